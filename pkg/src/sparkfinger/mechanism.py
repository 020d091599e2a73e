"""Planar bar-joint constraint solver and the SPARK finger linkage preset.

The mechanism is modelled as a graph of rigid bars pinned at named joints,
some joints grounded, one scalar coordinate driven. Position analysis is a
damped Newton iteration on the stacked bar-length residuals; trajectories are
swept with continuation so the solution stays on one assembly branch.

The SPARK preset realizes the finger's straight-line guide: a pair of
stacked parallelograms (A-B-E-D and B-C-I-E) keeps the distal body CI
parallel to the base at all times, and an inversor cell (arms AG/AH, rhombus
G-I-H-F, crank DF) pins the corner I to an exact vertical line. Because the
crank circle about D passes through the pole A, the inverse of that circle
is a straight line — the classical exact-line construction. The fingertip J
is a rigid marker on the CI body, triangulated off C and I, so it inherits
both the straight path and the fixed orientation.

Internal units: mm for lengths, radians for angles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "FingerParams",
    "ValidationReport",
    "LinkageTopology",
    "LinkageState",
    "NonConvergenceError",
    "SingularConfigurationError",
    "TrajectorySample",
    "validate_kempe_constraints",
    "spark_preset",
    "reference_state",
    "solve_position",
    "discover_stroke",
    "fingertip_trajectory",
    "straightness_metric",
    "mobility",
    "tip_line_x",
    "reference_tip_height",
]

RATIO_RTOL = 1e-9           # relative tolerance on the 4:2:1 link ratio
SOLVER_TOL = 1e-10          # Euclidean norm of the residual stack, mm
MAX_ITERATIONS = 100
MAX_STEP_HALVINGS = 20
SENSITIVITY_LIMIT = 8.0     # max |d(joint coord)/d(driver)| accepted in-stroke


class NonConvergenceError(RuntimeError):
    """Newton iteration failed to reach tolerance; carries the final residual."""

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


class SingularConfigurationError(NonConvergenceError):
    """The constraint Jacobian is singular (fold/branch point); no branch is chosen."""


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FingerParams:
    """Geometry, stopper, spring and inertial parameters of one finger.

    Lengths in mm, stopper/transition angles in degrees, stiffnesses in
    N·mm/rad, masses in kg, COM offsets in mm, gravity in mm/s².

    Defaults are the reference finger. The COM offsets default to the link
    midpoints of the default lengths; overriding L1..L3 without also
    overriding lc1..lc3 keeps the literal midpoint defaults.

    q1 is a stopper limit that is stored and reported but not consumed by
    any computation (its engagement joint is unspecified); q2 is the
    straight-configuration stop of the distal body, q3 the scooping stop.
    """

    L1: float = 80.0
    L2: float = 40.0
    L3: float = 20.0
    CJ: float = 28.8
    CG: float = 40.0
    FG: float = 40.0
    dh1: float = 15.8           # descent depth where the distal stop engages
    dh2: float = 14.6           # further descent completing the scoop
    dtheta_c1: float = 22.8     # total inward distal rotation, deg
    q1: float = 113.2           # stopper angles, deg
    q2: float = 90.0
    q3: float = 83.0
    k1: float = 50.0            # torsional stiffnesses, N·mm/rad
    k2: float = 50.0
    m1: float = 0.030           # link masses, kg
    m2: float = 0.020
    m3: float = 0.010
    lc1: float = 40.0           # COM offsets along each link, mm
    lc2: float = 20.0
    lc3: float = 10.0
    g: float = 9810.0           # mm/s²

    @property
    def lengths(self):
        return (self.L1, self.L2, self.L3)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


def _ratio_ok(a, b, target):
    return abs(a / b - target) <= RATIO_RTOL * target


def validate_kempe_constraints(params: FingerParams) -> ValidationReport:
    """Check the linkage's length relations; returns a report, never raises.

    The three link lengths must form the exact 4:2:1 ratio (relative
    tolerance 1e-9); all lengths must be strictly positive and finite, and
    spring stiffnesses non-negative.
    """
    bad = []
    lengths = {
        "L1": params.L1, "L2": params.L2, "L3": params.L3,
        "CJ": params.CJ, "CG": params.CG, "FG": params.FG,
        "dh1": params.dh1, "dh2": params.dh2,
    }
    for name, value in lengths.items():
        if not math.isfinite(value):
            bad.append(f"{name} is not finite")
        elif value <= 0:
            bad.append(f"{name} must be > 0 (got {value!r})")
    for name in ("k1", "k2"):
        value = getattr(params, name)
        if not math.isfinite(value) or value < 0:
            bad.append(f"{name} must be >= 0 (got {value!r})")
    if not bad:
        # ratio relations; report the measured ratio for each failure
        for name, num, den, target in (
            ("L1:L2 != 2:1", params.L1, params.L2, 2.0),
            ("L2:L3 != 2:1", params.L2, params.L3, 2.0),
            ("L1:L3 != 4:1", params.L1, params.L3, 4.0),
        ):
            if not _ratio_ok(num, den, target):
                bad.append(f"{name} (measured {num / den:.10g})")
    return ValidationReport(ok=not bad, violations=tuple(bad))


# ---------------------------------------------------------------------------
# Topology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkageTopology:
    """Immutable bar-joint graph.

    bars: (joint_a, joint_b, rest_length mm). grounded: (joint, (x, y)).
    driver: (joint, axis, neutral value) — the scalar coordinate the solver
    pins, with its value at the reference assembly. reference: optional
    assembled coordinates used to seed solves.
    """

    joints: tuple[str, ...]
    bars: tuple[tuple[str, str, float], ...]
    grounded: tuple[tuple[str, tuple[float, float]], ...]
    driver: tuple[str, str, float]
    reference: tuple[tuple[str, tuple[float, float]], ...] | None = None

    def __post_init__(self):
        names = set(self.joints)
        if len(names) != len(self.joints):
            raise ValueError("duplicate joint names")
        for a, b, L in self.bars:
            if a not in names or b not in names:
                raise ValueError(f"bar {a}-{b} references unknown joint")
            if not (L > 0):
                raise ValueError(f"bar {a}-{b} rest_length must be > 0")
        for j, _ in self.grounded:
            if j not in names:
                raise ValueError(f"grounded joint {j} unknown")
        dj, axis, _ = self.driver
        if dj not in names or axis not in ("x", "y"):
            raise ValueError("driver must name a joint and axis 'x' or 'y'")
        # connectivity of the bar graph over all joints
        adj = {j: set() for j in self.joints}
        for a, b, _ in self.bars:
            adj[a].add(b)
            adj[b].add(a)
        seen = {self.joints[0]}
        stack = [self.joints[0]]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if seen != names:
            raise ValueError("bar graph is not connected")

    def bar_length(self, a: str, b: str) -> float:
        for i, j, L in self.bars:
            if {i, j} == {a, b}:
                return L
        raise KeyError(f"no bar between {a} and {b}")


@dataclass(frozen=True)
class LinkageState:
    """Solved joint coordinates plus the norm of the full residual stack."""

    coordinates: dict
    residual_norm: float

    def point(self, joint: str) -> np.ndarray:
        return self.coordinates[joint]


@dataclass(frozen=True)
class TrajectorySample:
    driver: float
    tip: tuple[float, float]
    orientation: float          # rad, angle of the C→J segment


def mobility(topology: LinkageTopology) -> int:
    """Grübler DOF count of the planar linkage.

    Bars joining two grounded pins are frame webs, fused into the ground
    body; every pin contributes (number of incident members − 1) revolute
    joints, the ground counting as one member at each grounded pin.
    """
    grounded = {j for j, _ in topology.grounded}
    moving = [b for b in topology.bars if b[0] not in grounded or b[1] not in grounded]
    members_at = {}
    for a, b, _ in moving:
        members_at.setdefault(a, []).append((a, b))
        members_at.setdefault(b, []).append((a, b))
    for pin in grounded:
        members_at.setdefault(pin, []).append("ground")
    n_links = len(moving) + 1                       # + ground
    n_joints = sum(len(m) - 1 for m in members_at.values())
    return 3 * (n_links - 1) - 2 * n_joints


# ---------------------------------------------------------------------------
# SPARK preset
# ---------------------------------------------------------------------------

def tip_line_x(params: FingerParams) -> float:
    """x-station of the vertical line the fingertip rides (mm)."""
    return (params.L2 ** 2 - params.L3 ** 2) / (2.0 * params.L1) - params.L1


def _cell_line_x(params: FingerParams) -> float:
    # x of the inversor-cell corner I; the tip line sits one base length left
    return (params.L2 ** 2 - params.L3 ** 2) / (2.0 * params.L1)


def _reference_cell_height(params: FingerParams) -> float:
    """Mid-stroke height of corner I: midpoint of the two closed-form fold bounds."""
    x_i = _cell_line_x(params)
    x_c = x_i - params.L1
    near = math.sqrt((params.L2 - params.L3) ** 2 - x_i ** 2)
    far = math.sqrt(4.0 * params.L2 ** 2 - x_c ** 2)
    return -(near + far) / 2.0


def reference_tip_height(params: FingerParams) -> float:
    """Tip height of the reference assembly (mm); J sits CJ below the C corner."""
    return _reference_cell_height(params) - params.CJ


def _assemble(params: FingerParams, y_cell: float) -> dict:
    """Closed-form assembly of the preset with corner I at height y_cell.

    Raises ValueError outside the closed-form assembly range.
    """
    L1, L2, L3 = params.L1, params.L2, params.L3
    x_i = _cell_line_x(params)
    I = np.array([x_i, y_cell])
    C = I - np.array([L1, 0.0])
    # two-bar cascade reaching C = L2*(u + v); branch with u above the chord
    q = C / L2
    disc = 1.0 - 0.25 * float(q @ q)
    if disc < 0:
        raise ValueError(f"cascade cannot reach height {y_cell}")
    t = math.sqrt(disc)
    n = np.array([-q[1], q[0]]) / np.linalg.norm(q)
    u = 0.5 * q + t * n
    v = 0.5 * q - t * n
    B = L2 * u
    D = np.array([L1, 0.0])
    E = D + L2 * u
    # inversor cell on the ray A→I: |AF|·|AI| = L2² − L3²
    d_i = float(np.linalg.norm(I))
    d_f = (L2 ** 2 - L3 ** 2) / d_i
    ray = I / d_i
    F = d_f * ray
    mid = 0.5 * (d_f + d_i)
    half_diag = 0.5 * abs(d_f - d_i)
    cross_sq = L3 ** 2 - half_diag ** 2
    if cross_sq < 0:
        raise ValueError(f"rhombus cannot close at height {y_cell}")
    cross = math.sqrt(cross_sq)
    perp = np.array([-ray[1], ray[0]])
    G = mid * ray + cross * perp
    H = mid * ray - cross * perp
    J = C + np.array([0.0, -params.CJ])
    return {"A": np.zeros(2), "B": B, "C": C, "D": D, "E": E,
            "F": F, "G": G, "H": H, "I": I, "J": J}


def spark_preset(params: FingerParams = FingerParams()) -> LinkageTopology:
    """Build the finger linkage topology (ten joints A..J, mobility 1).

    Raises ValueError when the parameters fail validate_kempe_constraints.
    """
    report = validate_kempe_constraints(params)
    if not report.ok:
        raise ValueError("invalid linkage parameters: " + "; ".join(report.violations))
    L1, L2, L3 = params.L1, params.L2, params.L3
    tip_arm = math.hypot(L1, params.CJ)     # triangulation bar I-J
    bars = (
        ("A", "D", L1),         # base web between the frame pivots
        ("A", "B", L2),
        ("B", "E", L1),
        ("D", "E", L2),
        ("B", "C", L2),
        ("E", "I", L2),
        ("C", "I", L1),
        ("A", "G", L2),         # inversor arms
        ("A", "H", L2),
        ("G", "I", L3),         # rhombus sides
        ("H", "I", L3),
        ("H", "F", L3),
        ("F", "G", L3),
        ("D", "F", L1),         # crank through the pole
        ("C", "J", params.CJ),  # tip marker, rigid on the C-I body
        ("I", "J", tip_arm),
    )
    ref = _assemble(params, _reference_cell_height(params))
    reference = tuple((j, (float(p[0]), float(p[1]))) for j, p in sorted(ref.items()))
    return LinkageTopology(
        joints=("A", "B", "C", "D", "E", "F", "G", "H", "I", "J"),
        bars=bars,
        grounded=(("A", (0.0, 0.0)), ("D", (float(L1), 0.0))),
        driver=("J", "y", float(ref["J"][1])),
        reference=reference,
    )


def reference_state(topology: LinkageTopology) -> LinkageState:
    """The assembled reference pose stored on the topology, as a LinkageState."""
    if topology.reference is None:
        raise ValueError("topology carries no reference assembly")
    coords = {j: np.array(p) for j, p in topology.reference}
    return LinkageState(coordinates=coords, residual_norm=_full_residual_norm(topology, coords))


# ---------------------------------------------------------------------------
# Position solver
# ---------------------------------------------------------------------------

class _System:
    """Indexed view of a topology for fast residual/Jacobian assembly."""

    def __init__(self, topology: LinkageTopology):
        self.topology = topology
        grounded = dict(topology.grounded)
        self.fixed = {j: np.array(p) for j, p in grounded.items()}
        self.free = [j for j in topology.joints if j not in grounded]
        self.index = {j: k for k, j in enumerate(self.free)}
        rows = []
        for a, b, L in topology.bars:
            if a in self.index or b in self.index:
                rows.append((a, b, L))
            else:
                # both ends grounded: must already be satisfied exactly
                gap = np.linalg.norm(self.fixed[a] - self.fixed[b]) - L
                if abs(gap) > 1e-9 * L:
                    raise ValueError(
                        f"bar {a}-{b} joins two grounded pins but its rest length "
                        f"disagrees with their spacing by {gap:.3g} mm")
        self.rows = rows
        dj, axis, _ = topology.driver
        self.driver_joint = dj
        self.driver_axis = 0 if axis == "x" else 1
        self.n = 2 * len(self.free)

    def coords(self, x: np.ndarray) -> dict:
        c = dict(self.fixed)
        for j, k in self.index.items():
            c[j] = x[2 * k: 2 * k + 2]
        return c

    def pack(self, coords: dict) -> np.ndarray:
        x = np.empty(self.n)
        for j, k in self.index.items():
            x[2 * k: 2 * k + 2] = coords[j]
        return x

    def residual(self, x: np.ndarray, driver_value: float) -> np.ndarray:
        c = self.coords(x)
        r = np.empty(len(self.rows) + 1)
        for k, (a, b, L) in enumerate(self.rows):
            d = c[a] - c[b]
            r[k] = (float(d @ d) - L * L) / (2.0 * L)
        r[-1] = c[self.driver_joint][self.driver_axis] - driver_value
        return r

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        c = self.coords(x)
        J = np.zeros((len(self.rows) + 1, self.n))
        for k, (a, b, L) in enumerate(self.rows):
            d = (c[a] - c[b]) / L
            if a in self.index:
                J[k, 2 * self.index[a]: 2 * self.index[a] + 2] = d
            if b in self.index:
                J[k, 2 * self.index[b]: 2 * self.index[b] + 2] = -d
        J[-1, 2 * self.index[self.driver_joint] + self.driver_axis] = 1.0
        return J


_systems: dict = {}


def _system(topology: LinkageTopology) -> _System:
    sys_ = _systems.get(topology)
    if sys_ is None:
        sys_ = _systems[topology] = _System(topology)
    return sys_


def _full_residual_norm(topology: LinkageTopology, coords: dict) -> float:
    """Norm over every bar and every grounding residual (the full stack)."""
    grounded = dict(topology.grounded)
    parts = []
    for a, b, L in topology.bars:
        d = coords[a] - coords[b]
        parts.append((float(d @ d) - L * L) / (2.0 * L))
    for j, p in grounded.items():
        parts.extend(coords[j] - np.array(p))
    return float(np.linalg.norm(parts))


def solve_position(topology: LinkageTopology, driver_value: float,
                   initial_guess: LinkageState, tol: float = SOLVER_TOL,
                   max_iter: int = MAX_ITERATIONS) -> LinkageState:
    """Newton-Raphson position solve with the driver pinned at driver_value.

    Damped steps (up to 20 halvings) when the residual would grow. Returns
    the assembly branch continuously connected to the initial guess. Raises
    SingularConfigurationError at fold points and NonConvergenceError when
    the iteration stalls or runs out of iterations.
    """
    sys_ = _system(topology)
    missing = [j for j in topology.joints if j not in initial_guess.coordinates]
    if missing:
        raise ValueError(f"initial guess missing joints: {missing}")
    x = sys_.pack(initial_guess.coordinates)
    r = sys_.residual(x, driver_value)
    norm = float(np.linalg.norm(r))
    for _ in range(max_iter):
        if norm <= tol:
            coords = {j: p.copy() for j, p in sys_.coords(x).items()}
            return LinkageState(coordinates=coords,
                                residual_norm=_full_residual_norm(topology, coords))
        J = sys_.jacobian(x)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise SingularConfigurationError(
                f"singular constraint Jacobian at driver={driver_value}",
                residual_norm=norm) from None
        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS):
            x_new = x + scale * step
            r_new = sys_.residual(x_new, driver_value)
            norm_new = float(np.linalg.norm(r_new))
            if norm_new < norm:
                x, r, norm = x_new, r_new, norm_new
                break
            scale *= 0.5
        else:
            raise NonConvergenceError(
                f"no progress at driver={driver_value}; residual {norm:.3e}",
                residual_norm=norm)
    raise NonConvergenceError(
        f"no convergence after {max_iter} iterations at driver={driver_value}; "
        f"residual {norm:.3e}", residual_norm=norm)


def _driver_sensitivity(topology: LinkageTopology, state: LinkageState) -> float:
    """max |d(joint coordinate)/d(driver value)| at a solved state."""
    sys_ = _system(topology)
    J = sys_.jacobian(sys_.pack(state.coordinates))
    rhs = np.zeros(J.shape[0])
    rhs[-1] = 1.0
    try:
        dx = np.linalg.solve(J, rhs)
    except np.linalg.LinAlgError:
        return math.inf
    return float(np.abs(dx).max())


_stroke_cache: dict = {}


def discover_stroke(topology: LinkageTopology,
                    start: LinkageState | None = None) -> tuple[float, float]:
    """Numerically discovered driver range (lo, hi), cached per topology.

    Marches the driver both ways from the neutral value with step bisection;
    a value is inside the stroke iff the solve converges and the driver
    sensitivity stays below SENSITIVITY_LIMIT (keeps clear of folds, where
    branch continuity would break down).
    """
    cached = _stroke_cache.get(topology)
    if cached is not None:
        return cached
    if start is None:
        start = reference_state(topology)
    neutral = topology.driver[2]
    bounds = []
    for direction in (-1.0, 1.0):
        state = start
        value = neutral
        step = 0.5
        while step > 1e-9:
            probe = value + direction * step
            try:
                candidate = solve_position(topology, probe, state)
                if _driver_sensitivity(topology, candidate) > SENSITIVITY_LIMIT:
                    raise NonConvergenceError("sensitivity limit")
            except NonConvergenceError:
                step *= 0.5
                continue
            state, value = candidate, probe
        bounds.append(value)
    lo, hi = sorted(bounds)
    _stroke_cache[topology] = (lo, hi)
    return lo, hi


def _orientation(coords: dict) -> float:
    seg = coords["J"] - coords["C"]
    return math.atan2(seg[1], seg[0])


def fingertip_trajectory(topology: LinkageTopology,
                         stroke: tuple[float, float] | None = None,
                         n_samples: int = 100,
                         start: LinkageState | None = None) -> list[TrajectorySample]:
    """Sweep the driver over `stroke` and return (driver, tip J, CJ angle) samples.

    Continuation: each solve seeds the next. `stroke` defaults to the full
    discovered range. Solver failures are re-raised with the failing sample
    index attached.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if start is None:
        start = reference_state(topology)
    if stroke is None:
        stroke = discover_stroke(topology, start)
    lo, hi = stroke
    values = np.linspace(lo, hi, n_samples)
    # walk from the neutral pose to the first sample before sweeping
    state = start
    neutral = topology.driver[2]
    approach = np.linspace(neutral, values[0], max(2, int(abs(values[0] - neutral)) + 2))
    for v in approach[1:]:
        state = solve_position(topology, float(v), state)
    samples = []
    for k, v in enumerate(values):
        try:
            state = solve_position(topology, float(v), state)
        except NonConvergenceError as exc:
            raise NonConvergenceError(
                f"sample {k} (driver={v}): {exc}",
                residual_norm=exc.residual_norm) from exc
        tip = state.coordinates["J"]
        samples.append(TrajectorySample(
            driver=float(v),
            tip=(float(tip[0]), float(tip[1])),
            orientation=_orientation(state.coordinates)))
    return samples


def straightness_metric(trajectory: Iterable[TrajectorySample]) -> tuple[float, float]:
    """(max, rms) horizontal deviation from the vertical line through sample 0."""
    xs = np.array([s.tip[0] for s in trajectory])
    if xs.size == 0:
        raise ValueError("empty trajectory")
    dev = xs - xs[0]
    return float(np.abs(dev).max()), float(np.sqrt(np.mean(dev ** 2)))
