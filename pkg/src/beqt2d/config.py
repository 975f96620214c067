"""Run configuration: a flat key = value text format, fully validated.

Schema (all keys optional; defaults in parentheses):

  # physical constants
  nu (1.0)  lambda (1.0)  gamma (1.0)  L (0.1)  a (-1.0)  c (1.0)  xi (0.5)

  # discretization and time loop
  grid_n (128)          even, >= 8
  dt (0.005)            base/maximum time step
  cfl (0.4)             in (0, 1]
  adaptive (true)
  t_end (50.0)
  diagnostics_every (20)    steps between diagnostics samples

  # initial data
  initial_velocity (random_smooth)   taylor_green | random_smooth | quiescent
  velocity_amplitude (0.5)           ||u0||_{L^2} for random_smooth,
                                     prefactor for taylor_green
  velocity_seed (1)
  spectrum_decay (4.0)               |psi_hat(k)| ~ |k|^-decay
  initial_q (random_q)               random_q | constant_q | perturbed_equilibrium
  q_amplitude (0.3)                  max Frobenius norm of the random part
  q_seed (2)
  q_p (0.0)  q_q (0.0)               constant_q components

  # outputs and stopping
  output_dir (out)
  snapshot_every (0)        snapshots every this many diagnostics samples
                            (0 = final state only)
  stop_tol_u (1e-13)        equilibrium detection thresholds for
  stop_tol_H (1e-13)        ||u||_{H^1} and ||H(Q)||_{L^2}
  relax_tol (1e-10)         target residual of the relax subcommand
  relax_max_steps (200000)
  reference_snapshot ()     optional path; enables the Q_minus_Qinf_H2 column

Lines starting with '#' and blank lines are ignored.  Unknown keys, type
mismatches and invariant violations are all collected and reported together.
Seeded runs are bit-reproducible on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import spectral
from .fields import Grid, Parameters, QTensorField, SimState, VelocityField
from .stepper import StepperConfig

__all__ = ["RunConfig", "ConfigError", "parse_config", "default_config", "initial_state"]

VELOCITY_KINDS = ("taylor_green", "random_smooth", "quiescent")
Q_KINDS = ("random_q", "constant_q", "perturbed_equilibrium")


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    params: Parameters
    grid_n: int
    stepper: StepperConfig
    initial_velocity: str
    velocity_amplitude: float
    velocity_seed: int
    spectrum_decay: float
    initial_q: str
    q_amplitude: float
    q_seed: int
    q_p: float
    q_q: float
    output_dir: str
    snapshot_every: int
    stop_tol_u: float
    stop_tol_H: float
    relax_tol: float
    relax_max_steps: int
    reference_snapshot: str


_SCHEMA = {
    "nu": float, "lambda": float, "gamma": float, "L": float,
    "a": float, "c": float, "xi": float,
    "grid_n": int, "dt": float, "cfl": float, "adaptive": bool,
    "t_end": float, "diagnostics_every": int,
    "initial_velocity": str, "velocity_amplitude": float,
    "velocity_seed": int, "spectrum_decay": float,
    "initial_q": str, "q_amplitude": float, "q_seed": int,
    "q_p": float, "q_q": float,
    "output_dir": str, "snapshot_every": int,
    "stop_tol_u": float, "stop_tol_H": float,
    "relax_tol": float, "relax_max_steps": int,
    "reference_snapshot": str,
}

_DEFAULTS = {
    "nu": 1.0, "lambda": 1.0, "gamma": 1.0, "L": 0.1,
    "a": -1.0, "c": 1.0, "xi": 0.5,
    "grid_n": 128, "dt": 0.005, "cfl": 0.4, "adaptive": True,
    "t_end": 50.0, "diagnostics_every": 20,
    "initial_velocity": "random_smooth", "velocity_amplitude": 0.5,
    "velocity_seed": 1, "spectrum_decay": 4.0,
    "initial_q": "random_q", "q_amplitude": 0.3, "q_seed": 2,
    "q_p": 0.0, "q_q": 0.0,
    "output_dir": "out", "snapshot_every": 0,
    "stop_tol_u": 1e-13, "stop_tol_H": 1e-13,
    "relax_tol": 1e-10, "relax_max_steps": 200_000,
    "reference_snapshot": "",
}


def _parse_value(key: str, text: str, problems: list):
    ty = _SCHEMA[key]
    if ty is bool:
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        problems.append(f"key '{key}': expected a boolean, got {text!r}")
        return None
    if ty is str:
        return text
    try:
        return ty(text)
    except ValueError:
        problems.append(f"key '{key}': expected {ty.__name__}, got {text!r}")
        return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError listing every violation."""
    problems: list = []
    values = dict(_DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA:
            problems.append(f"line {lineno}: unknown key '{key}'")
            continue
        parsed = _parse_value(key, val, problems)
        if parsed is not None:
            values[key] = parsed
    return _build(values, problems)


def _build(v: dict, problems: list) -> RunConfig:
    if not v["c"] > 0:
        problems.append(
            f"c = {v['c']}: the quartic bulk coefficient must be positive "
            "(the free energy is unbounded from below otherwise)"
        )
    params = None
    try:
        params = Parameters(v["nu"], v["lambda"], v["gamma"], v["L"], v["a"], v["c"], v["xi"])
    except ValueError as exc:
        problems.append(str(exc))
    try:
        Grid(v["grid_n"])
    except ValueError as exc:
        problems.append(str(exc))
    stepper = None
    try:
        stepper = StepperConfig(
            dt=v["dt"], t_end=v["t_end"], cfl=v["cfl"],
            adaptive=v["adaptive"], sample_every=v["diagnostics_every"],
        )
    except ValueError as exc:
        problems.append(str(exc))
    if v["initial_velocity"] not in VELOCITY_KINDS:
        problems.append(f"initial_velocity must be one of {VELOCITY_KINDS}, got '{v['initial_velocity']}'")
    if v["initial_q"] not in Q_KINDS:
        problems.append(f"initial_q must be one of {Q_KINDS}, got '{v['initial_q']}'")
    for key in ("velocity_amplitude", "q_amplitude"):
        if v[key] < 0:
            problems.append(f"{key} must be >= 0, got {v[key]}")
    for key in ("stop_tol_u", "stop_tol_H", "relax_tol"):
        if not v[key] > 0:
            problems.append(f"{key} must be > 0, got {v[key]}")
    if v["snapshot_every"] < 0:
        problems.append(f"snapshot_every must be >= 0, got {v['snapshot_every']}")
    if v["relax_max_steps"] < 1:
        problems.append(f"relax_max_steps must be >= 1, got {v['relax_max_steps']}")
    if problems:
        raise ConfigError(problems)
    return RunConfig(
        params=params,
        grid_n=v["grid_n"],
        stepper=stepper,
        initial_velocity=v["initial_velocity"],
        velocity_amplitude=v["velocity_amplitude"],
        velocity_seed=v["velocity_seed"],
        spectrum_decay=v["spectrum_decay"],
        initial_q=v["initial_q"],
        q_amplitude=v["q_amplitude"],
        q_seed=v["q_seed"],
        q_p=v["q_p"],
        q_q=v["q_q"],
        output_dir=v["output_dir"],
        snapshot_every=v["snapshot_every"],
        stop_tol_u=v["stop_tol_u"],
        stop_tol_H=v["stop_tol_H"],
        relax_tol=v["relax_tol"],
        relax_max_steps=v["relax_max_steps"],
        reference_snapshot=v["reference_snapshot"],
    )


def default_config(**overrides) -> RunConfig:
    values = dict(_DEFAULTS)
    values.update(overrides)
    return _build(values, [])


# ----------------------------------------------------------------------
# initial data

def _filtered_noise(rng: np.random.Generator, n: int, decay: float) -> np.ndarray:
    """Smooth zero-mean random field: white noise shaped to |k|^-decay,
    band-limited to the 2/3 ball."""
    w = rng.standard_normal((n, n))
    C = spectral.fwd(w)
    k2 = spectral.ksq(n).copy()
    k2[0, 0] = 1.0
    C = C * k2 ** (-decay / 2.0)
    C[0, 0] = 0.0
    return spectral.inv(spectral.dealias_hat(C))


def _velocity(config: RunConfig, grid: Grid) -> VelocityField:
    kind = config.initial_velocity
    amp = config.velocity_amplitude
    if kind == "quiescent" or amp == 0.0:
        return VelocityField.zeros(grid)
    if kind == "taylor_green":
        x1, x2 = grid.coords()
        u1 = amp * np.sin(2 * np.pi * x1) * np.cos(2 * np.pi * x2)
        u2 = -amp * np.cos(2 * np.pi * x1) * np.sin(2 * np.pi * x2)
        return VelocityField(u1, u2, grid)
    # random_smooth: stream function => exactly divergence-free
    rng = np.random.default_rng(config.velocity_seed)
    psi = _filtered_noise(rng, grid.n, config.spectrum_decay)
    ph = spectral.fwd(psi)
    u1 = spectral.inv(spectral.deriv_hat(ph, 1))
    u2 = -spectral.inv(spectral.deriv_hat(ph, 0))
    norm = np.sqrt(np.mean(u1**2 + u2**2))
    if norm > 0:
        u1 *= amp / norm
        u2 *= amp / norm
    return spectral.leray_project(VelocityField(u1, u2, grid))


def _order_parameter(config: RunConfig, grid: Grid) -> QTensorField:
    kind = config.initial_q
    if kind == "constant_q":
        return QTensorField.constant(grid, config.q_p, config.q_q)
    rng = np.random.default_rng(config.q_seed)
    p = _filtered_noise(rng, grid.n, config.spectrum_decay)
    q = _filtered_noise(rng, grid.n, config.spectrum_decay)
    fro = np.sqrt(2.0 * (p**2 + q**2)).max()
    if fro > 0 and config.q_amplitude > 0:
        scale = config.q_amplitude / fro
        p *= scale
        q *= scale
    else:
        p = np.zeros_like(p)
        q = np.zeros_like(q)
    if kind == "perturbed_equilibrium":
        pa = config.params
        base = np.sqrt(-pa.a / (2.0 * pa.c)) if pa.a < 0 else 0.0
        p = p + base
    return QTensorField(p, q, grid)


def initial_state(config: RunConfig) -> SimState:
    grid = Grid(config.grid_n)
    return SimState(0.0, _velocity(config, grid), _order_parameter(config, grid))


def with_seed(config: RunConfig, seed: int) -> RunConfig:
    """CLI --seed override: reseeds both random streams (q stream at seed+1)."""
    return replace(config, velocity_seed=seed, q_seed=seed + 1)
