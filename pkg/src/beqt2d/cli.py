"""Command-line driver.

Subcommands:

  simulate   evolve the coupled system, writing diagnostics.csv and field
             snapshots to the output directory; stops at t_end or on
             equilibrium detection (exit 0), exit 2 on blow-up (a checkpoint
             snapshot is written)
  relax      run the u = 0 gradient flow to an equilibrium Q_inf; writes
             qinf.bin and relax_report.json; exit 3 on non-convergence
  verify     run the self-check battery; writes verify_report.json; exit 4
             if any check fails
  rate       fit decay models to a finished run; writes rate_report.json;
             exit 5 if the fit is refused

Common flags: --config PATH (key = value file), --output DIR and --seed N
override the config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import diagnostics
from .config import ConfigError, default_config, initial_state, parse_config, with_seed
from .energetics import relax_to_equilibrium
from .fields import SimState, VelocityField
from .io import CsvWriter, SnapshotError, read_diagnostics_csv, read_snapshot, write_snapshot
from .stepper import BlowUpError, run
from .verification import run_all_checks

__all__ = ["main"]


def _load_config(args):
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = default_config()
    if args.output:
        cfg = replace(cfg, output_dir=args.output)
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    return cfg


def _outdir(cfg):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _outdir(cfg)
    state = initial_state(cfg)

    q_ref = None
    if cfg.reference_snapshot:
        ref = read_snapshot(cfg.reference_snapshot)
        if ref.grid.n != cfg.grid_n:
            raise SnapshotError(
                f"reference snapshot has n={ref.grid.n}, run uses n={cfg.grid_n}; "
                "resampling is not done implicitly"
            )
        q_ref = ref.Q

    samples = 0

    def observer(s, row):
        nonlocal samples
        writer.write_row(row)
        if cfg.snapshot_every > 0 and samples % cfg.snapshot_every == 0:
            write_snapshot(s, os.path.join(out, f"snap_{samples:06d}.bin"))
        samples += 1
        return diagnostics.omega_limit_check(s, cfg.params, cfg.stop_tol_u, cfg.stop_tol_H)

    csv_path = os.path.join(out, "diagnostics.csv")
    with CsvWriter(csv_path) as writer:
        try:
            final = run(state, cfg.params, cfg.stepper, observer=observer, q_ref=q_ref)
        except BlowUpError as exc:
            ckpt = os.path.join(out, "checkpoint.bin")
            write_snapshot(exc.state, ckpt)
            print(f"simulate: {exc} (term: {exc.term}); checkpoint written to {ckpt}", file=sys.stderr)
            return 2
    write_snapshot(final, os.path.join(out, "final.bin"))
    print(f"simulate: reached t={final.t:g}, outputs in {out}")
    return 0


def cmd_relax(args) -> int:
    cfg = _load_config(args)
    out = _outdir(cfg)
    state = initial_state(cfg)
    result = relax_to_equilibrium(state.Q, cfg.params, tol=cfg.relax_tol, max_steps=cfg.relax_max_steps)
    qinf_state = SimState(0.0, VelocityField.zeros(state.grid), result.Q)
    write_snapshot(qinf_state, os.path.join(out, "qinf.bin"))
    report = {
        "converged": result.converged,
        "residual": result.residual,
        "steps": result.steps,
        "free_energy": result.energy,
        "tol": cfg.relax_tol,
    }
    with open(os.path.join(out, "relax_report.json"), "w") as fh:
        json.dump(report, fh, indent=2)
    if not result.converged:
        print(f"relax: NOT converged, residual {result.residual:.3e} after {result.steps} steps", file=sys.stderr)
        return 3
    print(f"relax: ||H|| = {result.residual:.3e} after {result.steps} steps, outputs in {out}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    out = _outdir(cfg)
    report = run_all_checks(cfg)
    path = os.path.join(out, "verify_report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)
    for c in report["checks"]:
        status = "pass" if c["passed"] else "FAIL"
        print(f"  [{status}] {c['name']}: {c['value']:.3e} (<= {c['threshold']:.3e})")
    print(f"verify: {'all checks passed' if report['passed'] else 'FAILURES'}; report in {path}")
    return 0 if report["passed"] else 4


def _decay_window(data, tol_u, tol_h, floor_frac):
    """Samples after the loose omega-limit trigger, above the noise floor."""
    u = data["u_H1"]
    h = np.sqrt(data["H_L2sq"])
    idx = np.nonzero((u <= tol_u) & (h <= tol_h))[0]
    if len(idx) == 0:
        return None
    start = idx[0]
    y = data["A"][start:]
    keep = y > floor_frac * y.max() if y.size else np.array([], dtype=bool)
    # stop at the first floored sample to keep the window contiguous
    end = int(np.argmin(keep)) if not keep.all() else len(y)
    return start, start + end


def cmd_rate(args) -> int:
    data = read_diagnostics_csv(args.csv)
    window = _decay_window(data, args.trigger_u, args.trigger_h, args.floor)
    report = {"csv": args.csv, "series": {}}
    refused = False

    def finite(v):
        # strict JSON for downstream consumers: no bare NaN/Infinity tokens
        return v if isinstance(v, (int, float)) and math.isfinite(v) else None

    def add(name, t, y, primary=False):
        nonlocal refused
        fit = diagnostics.fit_convergence_rate(t, y)
        report["series"][name] = {
            "refused": fit.refused,
            "reason": fit.reason,
            "theta_hat": finite(fit.theta_hat),
            "poly_slope": finite(fit.poly_slope),
            "exp_rate": finite(fit.exp_rate),
            "model_preference": fit.model_preference,
            "poly_ssr": finite(fit.poly_ssr),
            "exp_ssr": finite(fit.exp_ssr),
            "out_of_theory": fit.out_of_theory,
            "samples": len(t),
        }
        # only the primary A-series refusal fails the command; the optional
        # snapshot-based series may legitimately be too sparse
        refused = refused or (primary and fit.refused)

    if window is None:
        report["error"] = "decay regime never reached at the trigger tolerances"
        refused = True
    else:
        lo, hi = window
        add("A", data["t"][lo:hi], data["A"][lo:hi], primary=True)
        if args.qinf and args.snapshots:
            qinf = read_snapshot(args.qinf).Q
            ts, ys = [], []
            for name in sorted(os.listdir(args.snapshots)):
                if not (name.startswith("snap_") and name.endswith(".bin")):
                    continue
                snap = read_snapshot(os.path.join(args.snapshots, name))
                ts.append(snap.t)
                ys.append(diagnostics.q_h1_dist(snap.Q, qinf))
            t0 = data["t"][lo]
            pairs = [(t, y) for t, y in zip(ts, ys) if t >= t0 and y > 0]
            if pairs:
                add("Q_minus_Qinf_H1", [p[0] for p in pairs], [p[1] for p in pairs])

    path = args.report or "rate_report.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"rate: report in {path}")
    for name, entry in report["series"].items():
        if entry["refused"]:
            print(f"  {name}: fit refused ({entry['reason']})")
        else:
            print(
                f"  {name}: theta_hat={entry['theta_hat']:.4f}, exp_rate={entry['exp_rate']:.4f},"
                f" prefers {entry['model_preference']}"
            )
    return 5 if refused else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="beqt2d", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--output", help="override output_dir")
        p.add_argument("--seed", type=int, help="override the random seeds")

    for name, fn in (("simulate", cmd_simulate), ("relax", cmd_relax), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("rate")
    p.add_argument("csv", help="diagnostics.csv from a finished run")
    p.add_argument("--qinf", help="equilibrium snapshot for the H1-distance series")
    p.add_argument("--snapshots", help="directory of snap_*.bin files")
    p.add_argument("--report", help="output report path (default rate_report.json)")
    p.add_argument("--trigger-u", type=float, default=1e-2, dest="trigger_u",
                   help="loose ||u||_H1 threshold marking the decay regime")
    p.add_argument("--trigger-h", type=float, default=1e-2, dest="trigger_h",
                   help="loose ||H||_L2 threshold marking the decay regime")
    p.add_argument("--floor", type=float, default=1e-14,
                   help="drop samples below floor * max(A) (roundoff plateau)")
    p.set_defaults(fn=cmd_rate)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, SnapshotError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
