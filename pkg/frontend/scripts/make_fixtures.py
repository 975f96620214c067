"""Generate the frontend test fixtures from the primary package.

Produces, under frontend/fixtures/:
  run/               outputs of the default-parameter run to t=50 at n=64
                     (diagnostics.csv, snap_*.bin, final.bin) plus
                     rate_report.json from the rate subcommand
  stheta/snapshot.bin      a small random state snapshot (n=32)
  stheta/expected.json     the primary's (s, theta) decomposition of it,
                           the oracle for the frontend's re-implementation
"""

import json
import os
import sys

import numpy as np

from beqt2d import cli
from beqt2d.config import default_config, initial_state
from beqt2d.fields import Grid, QTensorField, SimState, VelocityField, director_decompose
from beqt2d.io import write_snapshot

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.join(HERE, "..", "fixtures")


def run_fixture():
    out = os.path.join(FIX, "run")
    cfg_path = os.path.join(FIX, "run.cfg")
    with open(cfg_path, "w") as fh:
        fh.write(
            "grid_n = 64\n"
            "t_end = 50.0\n"
            "dt = 0.0004\n"
            "adaptive = false\n"
            "diagnostics_every = 100\n"
            "snapshot_every = 250\n"
        )
    rc = cli.main(["simulate", "--config", cfg_path, "--output", out])
    if rc != 0:
        raise SystemExit(f"simulate failed with {rc}")
    rc = cli.main([
        "rate",
        os.path.join(out, "diagnostics.csv"),
        "--qinf", os.path.join(out, "final.bin"),
        "--snapshots", out,
        "--report", os.path.join(out, "rate_report.json"),
    ])
    if rc != 0:
        raise SystemExit(f"rate failed with {rc}")


def stheta_fixture():
    out = os.path.join(FIX, "stheta")
    os.makedirs(out, exist_ok=True)
    cfg = default_config(grid_n=32, q_amplitude=0.8, q_seed=42,
                         initial_q="perturbed_equilibrium")
    state = initial_state(cfg)
    write_snapshot(state, os.path.join(out, "snapshot.bin"))
    s, theta = director_decompose(state.Q)
    with open(os.path.join(out, "expected.json"), "w") as fh:
        json.dump({"n": 32, "s": s.ravel().tolist(), "theta": theta.ravel().tolist()}, fh)


if __name__ == "__main__":
    os.makedirs(FIX, exist_ok=True)
    stheta_fixture()
    run_fixture()
    print("fixtures written to", FIX)
