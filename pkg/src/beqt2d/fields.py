"""Grid and field representations for the 2D Q-tensor / velocity system.

A symmetric traceless 2x2 tensor field has two degrees of freedom; we store

    Q(x) = [[p(x), q(x)], [q(x), -p(x)]]

so symmetry and tr(Q) = 0 hold exactly by construction.  All derived tensor
algebra is expanded in (p, q); the full-matrix form is kept only as a test
oracle.  Velocities are two scalar fields on the same grid, divergence-free
after spectral projection (see spectral.leray_project).

The domain is the periodic unit square (0,1)^2 with n uniform points per
direction, x_j = j/n.  Fields are row-major float64 arrays of shape (n, n),
indexed [j1, j2] for the point (j1/n, j2/n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "QTensorField",
    "VelocityField",
    "Parameters",
    "SimState",
    "q_to_matrix",
    "tr_q2",
    "director_decompose",
]


@dataclass(frozen=True)
class Grid:
    """Uniform n x n grid on the periodic unit square."""

    n: int

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got n={self.n}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    def coords(self):
        """Meshgrid (x1, x2) arrays, shape (n, n), x in [0, 1)."""
        x = np.arange(self.n) / self.n
        return np.meshgrid(x, x, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros((self.n, self.n))

    def check_shape(self, f: np.ndarray, name: str = "field"):
        if f.shape != (self.n, self.n):
            raise ValueError(f"{name} has shape {f.shape}, expected {(self.n, self.n)}")


@dataclass
class QTensorField:
    """Order parameter Q = [[p, q], [q, -p]] on a grid."""

    p: np.ndarray
    q: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.grid.check_shape(self.p, "p")
        self.grid.check_shape(self.q, "q")

    @classmethod
    def zeros(cls, grid: Grid) -> "QTensorField":
        return cls(grid.zeros(), grid.zeros(), grid)

    @classmethod
    def constant(cls, grid: Grid, p: float, q: float) -> "QTensorField":
        return cls(np.full((grid.n, grid.n), float(p)), np.full((grid.n, grid.n), float(q)), grid)

    def copy(self) -> "QTensorField":
        return QTensorField(self.p.copy(), self.q.copy(), self.grid)


@dataclass
class VelocityField:
    """Velocity u = (u1, u2) on a grid.

    Divergence-freeness is not implied by construction; it is established by
    spectral.leray_project and preserved by the stepper.
    """

    u1: np.ndarray
    u2: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.u1 = np.asarray(self.u1, dtype=float)
        self.u2 = np.asarray(self.u2, dtype=float)
        self.grid.check_shape(self.u1, "u1")
        self.grid.check_shape(self.u2, "u2")

    @classmethod
    def zeros(cls, grid: Grid) -> "VelocityField":
        return cls(grid.zeros(), grid.zeros(), grid)

    def copy(self) -> "VelocityField":
        return VelocityField(self.u1.copy(), self.u2.copy(), self.grid)


@dataclass(frozen=True)
class Parameters:
    """Physical constants of the coupled system.

    nu     fluid viscosity (> 0)
    lam    kinetic/elastic coupling strength lambda (> 0)
    gamma  relaxation rate Gamma of the order parameter (> 0)
    L      elastic constant (> 0)
    a      quadratic bulk coefficient (any sign; a < 0 gives a nontrivial
           nematic minimum)
    c      quartic bulk coefficient (> 0, required for the energy to be
           bounded from below)
    xi     tumbling/aligning ratio (any sign; xi = 0 is the co-rotational
           case)

    There is no cubic bulk coefficient: for Q = [[p,q],[q,-p]] one has
    tr(Q^3) = 0 and Q^2 - (1/2)tr(Q^2) I = 0 identically, so every term it
    would multiply vanishes in 2D.
    """

    nu: float = 1.0
    lam: float = 1.0
    gamma: float = 1.0
    L: float = 0.1
    a: float = -1.0
    c: float = 1.0
    xi: float = 0.5

    def __post_init__(self):
        for name in ("nu", "lam", "gamma", "L", "c"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"parameter {name} must be > 0, got {v}")


@dataclass
class SimState:
    """Time t and the pair (u, Q); the unit of stepping and checkpointing."""

    t: float
    u: VelocityField
    Q: QTensorField

    def __post_init__(self):
        if self.u.grid != self.Q.grid:
            raise ValueError("u and Q must share the same grid")
        if self.t < 0:
            raise ValueError(f"time must be >= 0, got t={self.t}")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def copy(self) -> "SimState":
        return SimState(self.t, self.u.copy(), self.Q.copy())


def q_to_matrix(Q: QTensorField, i: int, j: int) -> np.ndarray:
    """2x2 matrix [[p,q],[q,-p]] at grid point (i, j)."""
    n = Q.grid.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"grid index ({i}, {j}) out of range for n={n}")
    p = Q.p[i, j]
    q = Q.q[i, j]
    return np.array([[p, q], [q, -p]])


def tr_q2(Q: QTensorField) -> np.ndarray:
    """Pointwise tr(Q^2) = 2(p^2 + q^2); nonnegative."""
    return 2.0 * (Q.p**2 + Q.q**2)


def director_decompose(Q: QTensorField, s_floor: float = 1e-8):
    """Scalar order parameter and director angle, Q = (s/2)[[cos2t, sin2t], ...].

    Returns (s, theta) with s = 2*sqrt(p^2+q^2) >= 0 and
    theta = atan2(q, p)/2 in (-pi/2, pi/2].  Where s <= s_floor the angle is
    ill-conditioned and is set to 0 by convention.  Reconstruction
    p = (s/2)cos(2 theta), q = (s/2)sin(2 theta) is exact wherever s exceeds
    the floor.
    """
    s = 2.0 * np.hypot(Q.p, Q.q)
    theta = 0.5 * np.arctan2(Q.q, Q.p)
    theta = np.where(s > s_floor, theta, 0.0)
    return s, theta
