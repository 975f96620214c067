import json
import math
import os

import numpy as np
import pytest

from beqt2d import cli
from beqt2d.config import ConfigError, default_config, initial_state, parse_config
from beqt2d.diagnostics import CSV_FIELDS, DiagnosticsRow
from beqt2d.fields import Grid, QTensorField, SimState, VelocityField
from beqt2d.io import (
    CsvWriter,
    SchemaError,
    SnapshotError,
    read_diagnostics_csv,
    read_snapshot,
    write_snapshot,
)

EQ = np.sqrt(0.5)


def make_state(n=16, t=0.125):
    rng = np.random.default_rng(0)
    return SimState(
        t,
        VelocityField(rng.standard_normal((n, n)), rng.standard_normal((n, n)), Grid(n)),
        QTensorField(rng.standard_normal((n, n)), rng.standard_normal((n, n)), Grid(n)),
    )


def test_snapshot_roundtrip_bitwise(tmp_path):
    s = make_state(t=0.1 + 1e-17)  # non-representable decimals round-trip via repr
    path = tmp_path / "s.bin"
    write_snapshot(s, path)
    r = read_snapshot(path)
    assert r.t == s.t
    assert np.array_equal(r.u.u1, s.u.u1) and np.array_equal(r.u.u2, s.u.u2)
    assert np.array_equal(r.Q.p, s.Q.p) and np.array_equal(r.Q.q, s.Q.q)


def test_snapshot_truncated(tmp_path):
    s = make_state()
    path = tmp_path / "s.bin"
    write_snapshot(s, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-17])
    with pytest.raises(SnapshotError, match="size mismatch"):
        read_snapshot(path)


def test_snapshot_bad_magic(tmp_path):
    path = tmp_path / "s.bin"
    path.write_bytes(b"NOTASNAP" + b"\x00" * 100)
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(path)


def test_csv_roundtrip_precision(tmp_path):
    row = DiagnosticsRow(
        t=1 / 3, E_total=math.pi, E_kinetic=1e-17, E_elastic=2.0 / 7, E_bulk=-0.1,
        grad_u_L2sq=5.5, H_L2sq=1e300, A=5.5 + 1e300, B=3.7, div_u_max=1e-18,
        Q_Linf=0.70710678118654757, u_H1=2.3, Q_minus_Qinf_H2=math.nan,
        energy_residual=-1e-9,
    )
    path = tmp_path / "d.csv"
    with CsvWriter(path) as w:
        w.write_row(row)
    data = read_diagnostics_csv(path)
    assert list(data) == CSV_FIELDS
    for name in CSV_FIELDS:
        v = getattr(row, name)
        got = data[name][0]
        assert (math.isnan(v) and math.isnan(got)) or got == v


def test_csv_schema_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,E_total\n0.0,1.0\n")
    with pytest.raises(SchemaError, match="header mismatch"):
        read_diagnostics_csv(path)


def test_parse_config_defaults():
    cfg = parse_config("# empty\n")
    assert cfg.params.nu == 1.0 and cfg.params.lam == 1.0 and cfg.params.gamma == 1.0
    assert cfg.params.L == 0.1 and cfg.params.a == -1.0 and cfg.params.c == 1.0
    assert cfg.params.xi == 0.5
    assert cfg.grid_n == 128


def test_parse_config_values_and_comments():
    cfg = parse_config("""
# physics
xi = 0.0
grid_n = 64
adaptive = false
t_end = 2.5
output_dir = /tmp/somewhere
""")
    assert cfg.params.xi == 0.0
    assert cfg.grid_n == 64
    assert not cfg.stepper.adaptive
    assert cfg.stepper.t_end == 2.5
    assert cfg.output_dir == "/tmp/somewhere"


def test_parse_config_rejects_negative_c():
    with pytest.raises(ConfigError, match="positive"):
        parse_config("c = -1\n")


def test_parse_config_grid_validation():
    assert parse_config("grid_n = 10\n").grid_n == 10  # even, >= 8: accepted
    with pytest.raises(ConfigError, match="even"):
        parse_config("grid_n = 7\n")


def test_parse_config_collects_all_errors():
    with pytest.raises(ConfigError) as info:
        parse_config("c = -1\nnu = 0\nbogus_key = 3\ndt = zero\n")
    msg = str(info.value)
    for frag in ("c = -1", "nu", "bogus_key", "dt"):
        assert frag.split()[0] in msg


def test_initial_state_determinism():
    cfg = default_config(grid_n=32)
    a = initial_state(cfg)
    b = initial_state(cfg)
    assert np.array_equal(a.u.u1, b.u.u1) and np.array_equal(a.Q.p, b.Q.p)


def test_initial_state_amplitudes():
    cfg = default_config(grid_n=64, velocity_amplitude=0.25, q_amplitude=0.4)
    s = initial_state(cfg)
    assert np.sqrt(np.mean(s.u.u1**2 + s.u.u2**2)) == pytest.approx(0.25, rel=1e-12)
    assert np.sqrt(2 * (s.Q.p**2 + s.Q.q**2)).max() == pytest.approx(0.4, rel=1e-12)


def write_config(tmp_path, text):
    f = tmp_path / "run.cfg"
    f.write_text(text)
    return str(f)


def test_simulate_immediate_equilibrium(tmp_path, capsys):
    # quiescent velocity + constant equilibrium Q: detected at the first
    # sample, one CSV row, exit 0
    cfgp = write_config(tmp_path, f"""
grid_n = 16
initial_velocity = quiescent
initial_q = constant_q
q_p = {float(EQ)!r}
q_q = 0.0
t_end = 5.0
dt = 0.001
""")
    out = str(tmp_path / "out")
    rc = cli.main(["simulate", "--config", cfgp, "--output", out])
    assert rc == 0
    data = read_diagnostics_csv(os.path.join(out, "diagnostics.csv"))
    assert len(data["t"]) == 1
    assert os.path.exists(os.path.join(out, "final.bin"))


def test_simulate_short_run_monotone_energy(tmp_path):
    cfgp = write_config(tmp_path, """
grid_n = 32
t_end = 0.5
dt = 0.0004
adaptive = true
diagnostics_every = 25
snapshot_every = 2
""")
    out = str(tmp_path / "out")
    rc = cli.main(["simulate", "--config", cfgp, "--output", out])
    assert rc == 0
    data = read_diagnostics_csv(os.path.join(out, "diagnostics.csv"))
    E = data["E_total"]
    assert len(E) >= 3
    assert all(b <= a + 1e-8 * (1 + abs(a)) for a, b in zip(E, E[1:]))
    snaps = [f for f in os.listdir(out) if f.startswith("snap_")]
    assert snaps


def test_simulate_blowup_writes_checkpoint(tmp_path, capsys):
    cfgp = write_config(tmp_path, """
grid_n = 32
t_end = 50.0
dt = 0.05
adaptive = false
velocity_amplitude = 3.0
q_amplitude = 0.8
""")
    out = str(tmp_path / "out")
    rc = cli.main(["simulate", "--config", cfgp, "--output", out])
    assert rc == 2
    assert os.path.exists(os.path.join(out, "checkpoint.bin"))
    read_snapshot(os.path.join(out, "checkpoint.bin"))  # parses


def test_simulate_rejects_mismatched_reference(tmp_path):
    ref_state = SimState(0.0, VelocityField.zeros(Grid(16)), QTensorField.zeros(Grid(16)))
    ref = tmp_path / "ref.bin"
    write_snapshot(ref_state, ref)
    cfgp = write_config(tmp_path, f"""
grid_n = 32
t_end = 0.01
reference_snapshot = {ref}
""")
    rc = cli.main(["simulate", "--config", cfgp, "--output", str(tmp_path / "o")])
    assert rc == 1  # explicit rejection, no silent resampling


def test_relax_subcommand(tmp_path):
    cfgp = write_config(tmp_path, """
grid_n = 32
initial_q = perturbed_equilibrium
q_amplitude = 0.05
q_seed = 3
relax_tol = 1e-10
""")
    out = str(tmp_path / "out")
    rc = cli.main(["relax", "--config", cfgp, "--output", out])
    assert rc == 0
    report = json.load(open(os.path.join(out, "relax_report.json")))
    assert report["converged"] and report["residual"] <= 1e-10
    qinf = read_snapshot(os.path.join(out, "qinf.bin"))
    assert np.abs(qinf.u.u1).max() == 0.0


def test_relax_nonconvergence_exit(tmp_path):
    cfgp = write_config(tmp_path, """
grid_n = 32
initial_q = random_q
relax_tol = 1e-13
relax_max_steps = 2
""")
    out = str(tmp_path / "out")
    rc = cli.main(["relax", "--config", cfgp, "--output", out])
    assert rc == 3
    assert os.path.exists(os.path.join(out, "qinf.bin"))  # partial state saved


def test_rate_subcommand_synthetic(tmp_path):
    # synthetic decay-regime CSV: A = (1+t)^-1 after an omega-limit trigger
    path = tmp_path / "d.csv"
    with CsvWriter(path) as w:
        for i, t in enumerate(np.linspace(0.0, 40.0, 120)):
            A = (1 + t) ** -1.0
            w.write_row(DiagnosticsRow(
                t=t, E_total=1.0, E_kinetic=0.0, E_elastic=0.0, E_bulk=1.0,
                grad_u_L2sq=A, H_L2sq=1e-8, A=A, B=math.e + math.log(math.e + A),
                div_u_max=0.0, Q_Linf=1.0, u_H1=1e-3, Q_minus_Qinf_H2=math.nan,
                energy_residual=0.0,
            ))
    report_path = str(tmp_path / "rate.json")
    rc = cli.main(["rate", str(path), "--report", report_path])
    assert rc == 0
    report = json.load(open(report_path))
    fit = report["series"]["A"]
    assert fit["model_preference"] == "polynomial"
    assert abs(fit["theta_hat"] - 1.0 / 3.0) <= 1e-3


def test_rate_refused_on_flat_series(tmp_path):
    path = tmp_path / "d.csv"
    with CsvWriter(path) as w:
        for t in np.linspace(0.0, 10.0, 30):
            w.write_row(DiagnosticsRow(
                t=t, E_total=1.0, E_kinetic=0.0, E_elastic=0.0, E_bulk=1.0,
                grad_u_L2sq=0.5, H_L2sq=0.5, A=1.0, B=math.e + math.log(math.e + 1),
                div_u_max=0.0, Q_Linf=1.0, u_H1=1e-3, Q_minus_Qinf_H2=math.nan,
                energy_residual=0.0,
            ))
    rc = cli.main(["rate", str(path), "--report", str(tmp_path / "r.json")])
    assert rc == 5


def test_determinism_bit_identical_outputs(tmp_path):
    cfgp = write_config(tmp_path, """
grid_n = 32
t_end = 0.2
dt = 0.0004
diagnostics_every = 20
snapshot_every = 3
velocity_seed = 7
q_seed = 8
""")
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert cli.main(["simulate", "--config", cfgp, "--output", out]) == 0
        outs.append(out)
    for fname in sorted(os.listdir(outs[0])):
        b0 = open(os.path.join(outs[0], fname), "rb").read()
        b1 = open(os.path.join(outs[1], fname), "rb").read()
        assert b0 == b1, fname


def test_verify_mutation_detected(tmp_path, monkeypatch):
    # a corrupted sign in the elastic part of tau must fail the energy-law
    # and identity checks
    import beqt2d.coupling as coupling
    from beqt2d.verification import run_all_checks

    orig = coupling.stress_tau

    def corrupted(Q, H, params, grad_q=None):
        tau = orig(Q, H, params, grad_q=grad_q)
        for name in ("t11", "t12", "t21", "t22"):
            setattr(tau, name, -getattr(tau, name))
        return tau

    cfg = default_config(grid_n=32, t_end=1.0)
    monkeypatch.setattr(coupling, "stress_tau", corrupted)
    report = run_all_checks(cfg)
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert any("energy_law" in n for n in failed)
    assert any("identity" in n for n in failed)
    assert not report["passed"]
