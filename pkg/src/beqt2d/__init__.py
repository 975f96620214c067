"""beqt2d: pseudo-spectral solver and diagnostics for the incompressible
Navier-Stokes / Q-tensor system on the 2D periodic unit square."""

from .fields import (
    Grid,
    Parameters,
    QTensorField,
    SimState,
    VelocityField,
    director_decompose,
    q_to_matrix,
    tr_q2,
)
from .stepper import BlowUpError, StepperConfig, cfl_dt, rhs, run, step

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "Parameters",
    "QTensorField",
    "VelocityField",
    "SimState",
    "q_to_matrix",
    "tr_q2",
    "director_decompose",
    "StepperConfig",
    "BlowUpError",
    "rhs",
    "step",
    "cfl_dt",
    "run",
    "__version__",
]
