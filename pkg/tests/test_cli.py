"""End-to-end tests of the command-line interface.

Each test runs the installed module in a subprocess, the same way a user
would, and checks files, stdout and exit codes.
"""
import csv
import os
import subprocess
import sys
from pathlib import Path


def run_cli(*args: str, env_extra=None) -> subprocess.CompletedProcess:
    env = os.environ.copy()
    env.pop("SPARKFINGER_OUT", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "sparkfinger", *args],
                          capture_output=True, text=True, env=env)


def read_rows(path: Path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_default_geometry_passes():
    cp = run_cli("validate")
    assert cp.returncode == 0, cp.stderr
    assert "ok" in cp.stdout


def test_validate_reports_broken_ratio(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[finger]\nL3 = 21\n")
    cp = run_cli("--config", str(ini), "validate")
    assert cp.returncode == 1
    assert "4:1" in cp.stdout


def test_malformed_config_is_a_usage_error(tmp_path):
    ini = tmp_path / "broken.ini"
    ini.write_text("L1 = 80\n")  # no section header
    cp = run_cli("--config", str(ini), "validate")
    assert cp.returncode == 2
    assert "config error" in cp.stderr


def test_unknown_config_key_is_a_usage_error(tmp_path):
    ini = tmp_path / "typo.ini"
    ini.write_text("[finger]\nL1_mm = 80\n")
    cp = run_cli("--config", str(ini), "validate")
    assert cp.returncode == 2


# ---------------------------------------------------------------------------
# traj
# ---------------------------------------------------------------------------

def test_traj_writes_both_series_and_a_summary(tmp_path):
    cp = run_cli("traj", "--samples", "40", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    assert "max_dev_mm=" in cp.stdout and "rms_dev_mm=" in cp.stdout
    max_dev = float(cp.stdout.split("max_dev_mm=")[1].split()[0])
    assert max_dev <= 8e-5

    rows = read_rows(tmp_path / "trajectory.csv")
    assert rows[0] == ["driver_mm", "tip_x_mm", "tip_y_mm", "orientation_rad"]
    assert len(rows) == 41

    disp = read_rows(tmp_path / "displacement.csv")
    assert disp[0] == ["driver_mm", "along_line_mm", "off_line_mm"]
    # horizontal deviation column stays at solver noise level
    assert all(abs(float(r[2])) <= 8e-5 for r in disp[1:])


def test_traj_two_samples_gives_two_rows(tmp_path):
    cp = run_cli("traj", "--samples", "2", "--out", str(tmp_path), "--quiet")
    assert cp.returncode == 0, cp.stderr
    assert cp.stdout == ""
    assert len(read_rows(tmp_path / "trajectory.csv")) == 3


def test_traj_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("traj", "--samples", "30", "--out", str(a)).returncode == 0
    assert run_cli("traj", "--samples", "30", "--out", str(b)).returncode == 0
    for name in ("trajectory.csv", "displacement.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_sample_count_must_be_sane():
    cp = run_cli("traj", "--samples", "1")
    assert cp.returncode == 2


# ---------------------------------------------------------------------------
# forces
# ---------------------------------------------------------------------------

def test_pinch_force_table_is_monotone(tmp_path):
    cp = run_cli("forces", "pinch", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "forces_pinch.csv")
    assert rows[0] == ["sweep_var", "value", "F2_N", "F3_N", "status"]
    assert all(r[0] == "theta2_deg" and r[2] == "" and r[4] == "ok"
               for r in rows[1:])
    f3 = [float(r[3]) for r in rows[1:]]
    assert f3 == sorted(f3)
    assert f3[0] == 20.0 / (14.4 + 40.0)


def test_scoop_with_spring_disabled_gives_zero_distal_force(tmp_path):
    ini = tmp_path / "nospring.ini"
    ini.write_text("[statics]\nk = 0\n")
    cp = run_cli("--config", str(ini), "forces", "scoop",
                 "--out", str(tmp_path), "--samples", "12")
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "forces_scoop.csv")
    assert len(rows) == 13
    assert all(float(r[3]) == 0.0 for r in rows[1:])


def test_scoop_distal_force_is_linear_in_the_sweep(tmp_path):
    cp = run_cli("forces", "scoop", "--out", str(tmp_path), "--samples", "20")
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "forces_scoop.csv")[1:]
    deg = [float(r[1]) for r in rows]
    f3 = [float(r[3]) for r in rows]
    slope = (f3[-1] - f3[0]) / (deg[-1] - deg[0])
    predicted = [f3[0] + slope * (d - deg[0]) for d in deg]
    assert max(abs(a - b) for a, b in zip(f3, predicted)) < 1e-12


# ---------------------------------------------------------------------------
# descend
# ---------------------------------------------------------------------------

def test_descend_reaches_scoop_complete(tmp_path):
    cp = run_cli("descend", "--max-depth", "30.4", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "descend.csv")
    assert rows[0] == ["depth_mm", "mode", "distal_rotation_deg",
                       "k1_moment_Nmm", "k2_moment_Nmm"]
    assert rows[-1][1] == "ScoopComplete"
    assert float(rows[-1][2]) == 22.8


def test_shallow_descend_stays_in_pinch(tmp_path):
    cp = run_cli("descend", "--max-depth", "10", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "descend.csv")[1:]
    assert all(r[1] == "PinchContact" for r in rows)


def test_tilted_descend_emits_per_finger_columns(tmp_path):
    cp = run_cli("descend", "--tilt", "15", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "descend.csv")
    assert "mode_leading" in rows[0] and "mode_trailing" in rows[0]
    lead = rows[0].index("mode_leading")
    trail = rows[0].index("mode_trailing")
    assert any(r[lead] != r[trail] for r in rows[1:])


def test_tilt_outside_envelope_fails():
    cp = run_cli("descend", "--tilt", "50")
    assert cp.returncode == 1
    assert "tilt" in cp.stderr


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def test_dynamics_trace_and_drift_summary(tmp_path):
    cp = run_cli("dynamics", "--duration", "0.01", "--no-gravity",
                 "--qdot0", "30,-40,10", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    assert "max_rel_energy_drift=" in cp.stdout
    drift = float(cp.stdout.split("max_rel_energy_drift=")[1].split()[0])
    assert drift <= 1e-6
    rows = read_rows(tmp_path / "dynamics.csv")
    assert rows[0][:4] == ["t_s", "theta1_rad", "theta2_rad", "theta3_rad"]
    assert len(rows) == 102  # header + 101 states for 0.01 s at 1e-4 s


def test_dynamics_equilibrium_is_constant(tmp_path):
    cp = run_cli("dynamics", "--duration", "0.005", "--no-gravity",
                 "--q0", "10,20,30", "--out", str(tmp_path))
    assert cp.returncode == 0, cp.stderr
    rows = read_rows(tmp_path / "dynamics.csv")[1:]
    assert all(r[1:7] == rows[0][1:7] for r in rows)


# ---------------------------------------------------------------------------
# fk / jac
# ---------------------------------------------------------------------------

def test_fk_prints_tip_pose():
    cp = run_cli("fk", "90", "-90", "0")
    assert cp.returncode == 0, cp.stderr
    values = dict(line.split("=") for line in cp.stdout.strip().splitlines())
    assert float(values["tip_x_mm"]) == 60.0 or \
        abs(float(values["tip_x_mm"]) - 60.0) < 1e-12
    assert abs(float(values["tip_y_mm"]) - 80.0) < 1e-12
    assert float(values["orientation_deg"]) == 0.0


def test_jac_prints_six_component_rows():
    cp = run_cli("jac", "0", "0", "0")
    assert cp.returncode == 0, cp.stderr
    lines = cp.stdout.strip().splitlines()
    assert lines[0] == "component,per_dtheta1,per_dtheta2,per_dtheta3"
    assert len(lines) == 7
    vy = lines[2].split(",")
    assert vy[0] == "vy_mm_s"
    assert [float(v) for v in vy[1:]] == [140.0, 60.0, 20.0]


def test_help_runs_clean():
    cp = run_cli("--help")
    assert cp.returncode == 0
    for name in ("validate", "traj", "forces", "descend", "dynamics"):
        assert name in cp.stdout


# ---------------------------------------------------------------------------
# output resolution
# ---------------------------------------------------------------------------

def test_env_var_supplies_output_directory(tmp_path):
    target = tmp_path / "from_env"
    cp = run_cli("forces", "pinch", "--quiet",
                 env_extra={"SPARKFINGER_OUT": str(target)})
    assert cp.returncode == 0, cp.stderr
    assert (target / "forces_pinch.csv").exists()


def test_out_flag_beats_env_var(tmp_path):
    flag_dir = tmp_path / "from_flag"
    env_dir = tmp_path / "from_env"
    cp = run_cli("forces", "pinch", "--out", str(flag_dir), "--quiet",
                 env_extra={"SPARKFINGER_OUT": str(env_dir)})
    assert cp.returncode == 0, cp.stderr
    assert (flag_dir / "forces_pinch.csv").exists()
    assert not env_dir.exists()


def test_config_directory_is_the_fallback(tmp_path):
    ini = tmp_path / "run.ini"
    out = tmp_path / "from_config"
    ini.write_text(f"[output]\ndirectory = {out}\n")
    cp = run_cli("--config", str(ini), "forces", "pinch", "--quiet")
    assert cp.returncode == 0, cp.stderr
    assert (out / "forces_pinch.csv").exists()
