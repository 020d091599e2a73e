"""Lagrangian dynamics of the three-link chain.

Closed-form mass matrix, Christoffel Coriolis matrix and gravity vector for
the planar 3R chain with per-link mass, COM offset and rotational inertia.
Kinetic energy is computed independently through COM Jacobians (velocity
route) so the two formulations cross-check each other; the rotational
inertia term is included — without it the identity K = ½ q̇ᵀ M q̇ cannot
hold for rigid links.

Units: mm, kg, rad, s. Energies come out in kg·mm²/s² (1e-6 J); torques in
N·mm when masses are in kg and gravity in mm/s².
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mechanism import FingerParams

__all__ = [
    "DynamicsParams",
    "JointRates",
    "kinetic_energy",
    "potential_energy",
    "com_jacobian",
    "dynamics_terms",
    "inverse_dynamics",
    "simulate_free",
    "SimulationTrace",
]


@dataclass(frozen=True)
class DynamicsParams:
    """Inertial data per link: lengths (mm), masses (kg), COM offsets (mm),
    rotational inertias about the COM (kg·mm²), gravity (mm/s²)."""

    lengths: tuple[float, float, float] = (80.0, 40.0, 20.0)
    masses: tuple[float, float, float] = (0.030, 0.020, 0.010)
    coms: tuple[float, float, float] = (40.0, 20.0, 10.0)
    inertias: tuple[float, float, float] | None = None
    g: float = 9810.0

    def __post_init__(self):
        if self.inertias is None:
            # uniform slender rod about its COM
            rod = tuple(m * L * L / 12.0 for m, L in zip(self.masses, self.lengths))
            object.__setattr__(self, "inertias", rod)
        for name in ("masses", "inertias"):
            if any(v <= 0 for v in getattr(self, name)):
                raise ValueError(f"{name} must be strictly positive")
        for lc, L in zip(self.coms, self.lengths):
            if not 0.0 <= lc <= L:
                raise ValueError(f"COM offset {lc} outside [0, {L}]")

    @classmethod
    def from_finger(cls, params: FingerParams) -> "DynamicsParams":
        return cls(lengths=params.lengths,
                   masses=(params.m1, params.m2, params.m3),
                   coms=(params.lc1, params.lc2, params.lc3),
                   g=params.g)


@dataclass(frozen=True)
class JointRates:
    dtheta1: float
    dtheta2: float
    dtheta3: float
    ddtheta1: float | None = None
    ddtheta2: float | None = None
    ddtheta3: float | None = None

    def as_array(self) -> np.ndarray:
        return np.array([self.dtheta1, self.dtheta2, self.dtheta3])


def _vec3(x) -> np.ndarray:
    if hasattr(x, "as_array"):
        return x.as_array()
    return np.asarray(x, dtype=float)


def com_jacobian(params: DynamicsParams, q, link: int) -> np.ndarray:
    """2×3 planar Jacobian of link `link`'s COM (link in 1..3)."""
    if link not in (1, 2, 3):
        raise ValueError("link must be 1, 2 or 3")
    qa = _vec3(q)
    L1, L2, _ = params.lengths
    lc = params.coms[link - 1]
    a1, a12, a123 = qa[0], qa[0] + qa[1], qa[0] + qa[1] + qa[2]
    J = np.zeros((2, 3))

    def add(column_limit, radius, angle):
        n = np.array([-math.sin(angle), math.cos(angle)]) * radius
        for c in range(column_limit):
            J[:, c] += n

    if link == 1:
        add(1, lc, a1)
    elif link == 2:
        add(1, L1, a1)
        add(2, lc, a12)
    elif link == 3:
        add(1, L1, a1)
        add(2, L2, a12)
        add(3, lc, a123)
    else:
        raise ValueError("link must be 1, 2 or 3")
    return J


def kinetic_energy(params: DynamicsParams, q, qdot) -> float:
    """½ Σ mᵢ vᵢᵀvᵢ + ½ Σ Iᵢ ωᵢ², with vᵢ from the COM Jacobians."""
    qa, qd = _vec3(q), _vec3(qdot)
    K = 0.0
    omega = 0.0
    for i in range(1, 4):
        v = com_jacobian(params, qa, i) @ qd
        omega += qd[i - 1]
        K += 0.5 * params.masses[i - 1] * float(v @ v)
        K += 0.5 * params.inertias[i - 1] * omega * omega
    return K


def potential_energy(params: DynamicsParams, q) -> float:
    """Σ mᵢ g · (height of COMᵢ), the three-term sine sum."""
    qa = _vec3(q)
    L1, L2, _ = params.lengths
    m1, m2, m3 = params.masses
    lc1, lc2, lc3 = params.coms
    s1 = math.sin(qa[0])
    s12 = math.sin(qa[0] + qa[1])
    s123 = math.sin(qa[0] + qa[1] + qa[2])
    return params.g * (m1 * lc1 * s1
                       + m2 * (L1 * s1 + lc2 * s12)
                       + m3 * (L1 * s1 + L2 * s12 + lc3 * s123))


# ---------------------------------------------------------------------------
# Closed-form M, C, G
# ---------------------------------------------------------------------------

def _coefficients(params: DynamicsParams):
    L1, L2, _ = params.lengths
    m1, m2, m3 = params.masses
    lc1, lc2, lc3 = params.coms
    I1, I2, I3 = params.inertias
    a1 = I1 + m1 * lc1 ** 2 + (m2 + m3) * L1 ** 2
    a2 = I2 + m2 * lc2 ** 2 + m3 * L2 ** 2
    a3 = I3 + m3 * lc3 ** 2
    p12 = (m2 * lc2 + m3 * L2) * L1     # multiplies cos q2
    p23 = m3 * lc3 * L2                 # multiplies cos q3
    p13 = m3 * lc3 * L1                 # multiplies cos (q2+q3)
    return a1, a2, a3, p12, p23, p13


def _mass_matrix(params: DynamicsParams, qa) -> np.ndarray:
    a1, a2, a3, p12, p23, p13 = _coefficients(params)
    c2, c3, c23 = math.cos(qa[1]), math.cos(qa[2]), math.cos(qa[1] + qa[2])
    m11 = a1 + a2 + a3 + 2 * p12 * c2 + 2 * p23 * c3 + 2 * p13 * c23
    m12 = a2 + a3 + p12 * c2 + 2 * p23 * c3 + p13 * c23
    m13 = a3 + p23 * c3 + p13 * c23
    m22 = a2 + a3 + 2 * p23 * c3
    m23 = a3 + p23 * c3
    m33 = a3
    return np.array([[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]])


def _mass_matrix_partials(params: DynamicsParams, qa) -> np.ndarray:
    """(3,3,3) array: slot k holds ∂M/∂q_k (analytic; only q2, q3 appear)."""
    _, _, _, p12, p23, p13 = _coefficients(params)
    s2, s3, s23 = math.sin(qa[1]), math.sin(qa[2]), math.sin(qa[1] + qa[2])
    dM = np.zeros((3, 3, 3))
    d2 = np.array([
        [-2 * p12 * s2 - 2 * p13 * s23, -p12 * s2 - p13 * s23, -p13 * s23],
        [-p12 * s2 - p13 * s23, 0.0, 0.0],
        [-p13 * s23, 0.0, 0.0],
    ])
    d3 = np.array([
        [-2 * p23 * s3 - 2 * p13 * s23, -2 * p23 * s3 - p13 * s23, -p23 * s3 - p13 * s23],
        [-2 * p23 * s3 - p13 * s23, -2 * p23 * s3, -p23 * s3],
        [-p23 * s3 - p13 * s23, -p23 * s3, 0.0],
    ])
    dM[1], dM[2] = d2, d3
    return dM


def _gravity(params: DynamicsParams, qa) -> np.ndarray:
    L1, L2, _ = params.lengths
    m1, m2, m3 = params.masses
    lc1, lc2, lc3 = params.coms
    g1 = m1 * lc1 + (m2 + m3) * L1
    g2 = m2 * lc2 + m3 * L2
    g3 = m3 * lc3
    c1 = math.cos(qa[0])
    c12 = math.cos(qa[0] + qa[1])
    c123 = math.cos(qa[0] + qa[1] + qa[2])
    return params.g * np.array([
        g1 * c1 + g2 * c12 + g3 * c123,
        g2 * c12 + g3 * c123,
        g3 * c123,
    ])


def dynamics_terms(params: DynamicsParams, q, qdot):
    """(M, C, G) of M q̈ + C q̇ + G = τ.

    M is the closed-form mass matrix; C is assembled from the Christoffel
    symbols of M's analytic partial derivatives (which makes Ṁ − 2C skew
    by construction); G is ∂P/∂q.
    """
    qa, qd = _vec3(q), _vec3(qdot)
    M = _mass_matrix(params, qa)
    dM = _mass_matrix_partials(params, qa)
    # C[i,j] = Σ_k ½ (dM[k][i,j] + dM[j][i,k] − dM[i][j,k]) q̇_k
    Mdot = np.tensordot(qd, dM, axes=(0, 0))
    D = dM @ qd
    C = 0.5 * (Mdot + D.T - D)
    G = _gravity(params, qa)
    return M, C, G


def inverse_dynamics(params: DynamicsParams, q, qdot, qddot) -> np.ndarray:
    """Joint torques τ = M q̈ + C q̇ + G (N·mm)."""
    M, C, G = dynamics_terms(params, q, qdot)
    return M @ _vec3(qddot) + C @ _vec3(qdot) + G


# ---------------------------------------------------------------------------
# Verification integrator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationTrace:
    """Columns: t, q1..q3, dq1..dq3, K, P, E."""

    t: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    energy: np.ndarray

    def max_relative_energy_drift(self) -> float:
        """Worst |E(t) − E(0)| / |E(0)|; absolute drift if E(0) is zero."""
        e0 = self.energy[0]
        drift = float(np.max(np.abs(self.energy - e0)))
        return drift / abs(e0) if e0 != 0.0 else drift


def _acceleration(params: DynamicsParams, qa, qd) -> np.ndarray:
    M, C, G = dynamics_terms(params, qa, qd)
    try:
        return np.linalg.solve(M, -(C @ qd) - G)
    except np.linalg.LinAlgError as exc:        # M is SPD; should not happen
        raise RuntimeError(f"mass-matrix solve failed: {exc}") from exc


def simulate_free(params: DynamicsParams, q0, qdot0, duration: float,
                  dt: float) -> SimulationTrace:
    """Integrate unforced motion (τ = 0) with classical fixed-step RK4.

    Records kinetic, potential and total energy at every step; energy drift
    is the standard conservation check on the M/C/G implementation.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if duration < dt:
        raise ValueError("duration must be >= dt")
    n = int(round(duration / dt))
    qa, qd = _vec3(q0).copy(), _vec3(qdot0).copy()
    t = np.empty(n + 1)
    qs = np.empty((n + 1, 3))
    qds = np.empty((n + 1, 3))
    ks = np.empty(n + 1)
    ps = np.empty(n + 1)

    def record(i, time):
        t[i] = time
        qs[i], qds[i] = qa, qd
        ks[i] = kinetic_energy(params, qa, qd)
        ps[i] = potential_energy(params, qa)

    record(0, 0.0)
    for i in range(1, n + 1):
        try:
            k1q, k1v = qd, _acceleration(params, qa, qd)
            k2q, k2v = qd + 0.5 * dt * k1v, _acceleration(params, qa + 0.5 * dt * k1q, qd + 0.5 * dt * k1v)
            k3q, k3v = qd + 0.5 * dt * k2v, _acceleration(params, qa + 0.5 * dt * k2q, qd + 0.5 * dt * k2v)
            k4q, k4v = qd + dt * k3v, _acceleration(params, qa + dt * k3q, qd + dt * k3v)
        except RuntimeError as exc:
            raise RuntimeError(f"integration failed at step {i} of {n}: {exc}") from exc
        qa = qa + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        qd = qd + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        record(i, i * dt)
    return SimulationTrace(t=t, q=qs, qdot=qds, kinetic=ks, potential=ps,
                           energy=ks + ps)
