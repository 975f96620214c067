"""Fourier-space kernels on the periodic unit square.

Conventions (fixed here, tested once, used everywhere):

* wavevectors are integers k = (k1, k2), |ki| <= n/2, laid out by
  numpy.fft.fftfreq(n) * n;
* coefficients are normalized Fourier-series coefficients,
  C = fft2(f) / n^2, so that f(x) = sum_k C(k) exp(2 pi i k.x) exactly at
  the grid points and the discrete Parseval identity
  mean(f*g) = sum_k C_f(k) conj(C_g(k)) holds exactly;
* the physical factor 2 pi lives in the derivative and Helmholtz symbols,
  never in k itself;
* grid means ARE integrals over (0,1)^2 (trapezoid = rectangle rule on the
  torus, exact for the trigonometric interpolant).

Dealiasing follows the 2/3 rule: coefficients with max(|k1|, |k2|) > n/3
are zeroed.  Cubic products would strictly need a 1/2 rule; with the modest
resolutions used here the residual aliasing is measured (fine-grid oracle
in the test-suite, `verify` subcommand report) rather than eliminated.

Array axis 0 is the x1 direction, axis 1 is x2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

from .fields import Grid, VelocityField

__all__ = [
    "SpectralField",
    "forward",
    "inverse",
    "derivative",
    "dealias",
    "leray_project",
    "invert_helmholtz",
    "resample",
    "divergence_max",
]

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=32)
def wavenumbers(n: int):
    """Integer wavevector meshes (K1, K2), shape (n, n), read-only."""
    k = np.fft.fftfreq(n, d=1.0 / n)  # integers: 0, 1, ..., -n/2, ..., -1
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    K1.setflags(write=False)
    K2.setflags(write=False)
    return K1, K2


@lru_cache(maxsize=32)
def ksq(n: int):
    K1, K2 = wavenumbers(n)
    out = K1**2 + K2**2
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def dealias_mask(n: int):
    """True on modes kept by the 2/3 rule: max(|k1|,|k2|) <= n/3."""
    K1, K2 = wavenumbers(n)
    cut = n / 3.0
    mask = (np.abs(K1) <= cut) & (np.abs(K2) <= cut)
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=32)
def _nyquist_free(n: int, axis: int):
    """Mask zeroing the unmatched Nyquist mode along one array axis."""
    mask = np.ones((n, n))
    if axis == 0:
        mask[n // 2, :] = 0.0
    else:
        mask[:, n // 2] = 0.0
    mask.setflags(write=False)
    return mask


# ----------------------------------------------------------------------
# low-level kernels on raw coefficient arrays (hot path for the stepper)

def fwd(f: np.ndarray) -> np.ndarray:
    """Normalized coefficients; works on (..., n, n) stacks of fields."""
    n = f.shape[-1]
    return _fft.fft2(f) / (n * n)


def inv(C: np.ndarray) -> np.ndarray:
    n = C.shape[-1]
    return _fft.ifft2(C * (n * n)).real


def deriv_hat(C: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
    """Multiply by (2 pi i k_axis)^order; axis 0 is x1, axis 1 is x2
    (the trailing two array axes)."""
    n = C.shape[-1]
    K = wavenumbers(n)[axis]
    out = C * (TWO_PI * 1j * K) ** order
    if order % 2 == 1:
        out = out * _nyquist_free(n, axis)
    return out


def lap_hat(C: np.ndarray) -> np.ndarray:
    n = C.shape[-1]
    return C * (-(TWO_PI**2) * ksq(n))


def dealias_hat(C: np.ndarray) -> np.ndarray:
    return C * dealias_mask(C.shape[-1])


def helmholtz_hat(C: np.ndarray, alpha: float) -> np.ndarray:
    """Solve (I - alpha Lap) g = f in coefficients, alpha > 0."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    n = C.shape[-1]
    return C / (1.0 + alpha * TWO_PI**2 * ksq(n))


def project_hat(C1: np.ndarray, C2: np.ndarray):
    """Leray projection of a vector coefficient pair.

    Kills the k=0 mode (zero mean) and the unmatched Nyquist modes k_i=-n/2,
    whose wavevector sign is ambiguous for real fields so they cannot be
    projected consistently; every band-limited field has none.
    """
    n = C1.shape[-1]
    K1, K2 = wavenumbers(n)
    k2 = ksq(n).copy()
    k2[0, 0] = 1.0  # avoid 0/0; the mean is zeroed below
    kdotu = (K1 * C1 + K2 * C2) / k2
    ny = _nyquist_free(n, 0) * _nyquist_free(n, 1)
    P1 = (C1 - K1 * kdotu) * ny
    P2 = (C2 - K2 * kdotu) * ny
    P1[0, 0] = 0.0
    P2[0, 0] = 0.0
    return P1, P2


def resample(f: np.ndarray, m: int) -> np.ndarray:
    """Re-sample a real field onto an m x m grid by spectral zero-padding
    (m > n) or truncation (m < n).  Exact for fields band-limited to the
    coarser grid."""
    n = f.shape[0]
    if m == n:
        return f.copy()
    C = np.fft.fftshift(fwd(f))
    out = np.zeros((m, m), dtype=complex)
    h = min(n, m)
    lo_n = n // 2 - h // 2
    lo_m = m // 2 - h // 2
    out[lo_m : lo_m + h, lo_m : lo_m + h] = C[lo_n : lo_n + h, lo_n : lo_n + h]
    if m < n:  # drop the unmatched Nyquist row/column
        out[0, :] = 0.0
        out[:, 0] = 0.0
    return inv(np.fft.ifftshift(out))


# ----------------------------------------------------------------------
# half-spectrum kernels (rfft layout): the hot path for stepping and norms.
# A real field is represented by coefficients on k2 = 0 .. n/2 only; the
# missing half is the complex conjugate.  Values and conventions are
# identical to the full-spectrum kernels above.

@lru_cache(maxsize=32)
def rsymbols(n: int):
    """Cached spectral symbols on the (n, n//2+1) half-spectrum layout:
    d1, d2 (first derivatives, unmatched Nyquist zeroed), k2sum (|k|^2),
    mask (2/3 rule), and pw (Parseval weights: 2 for interior k2 columns)."""
    k1 = np.fft.fftfreq(n, d=1.0 / n)
    k2 = np.arange(n // 2 + 1, dtype=float)
    K1 = k1[:, None] * np.ones_like(k2)[None, :]
    K2 = np.ones_like(k1)[:, None] * k2[None, :]
    ny1 = np.ones((n, 1))
    ny1[n // 2, 0] = 0.0
    ny2 = np.ones((1, n // 2 + 1))
    ny2[0, n // 2] = 0.0
    d1 = TWO_PI * 1j * K1 * ny1
    d2 = TWO_PI * 1j * K2 * ny2
    k2sum = K1**2 + K2**2
    cut = n / 3.0
    mask = ((np.abs(K1) <= cut) & (np.abs(K2) <= cut)).astype(float)
    pw = np.full((n, n // 2 + 1), 2.0)
    pw[:, 0] = 1.0
    pw[:, n // 2] = 1.0
    for arr in (d1, d2, k2sum, mask, pw):
        arr.setflags(write=False)
    return {"d1": d1, "d2": d2, "k2sum": k2sum, "mask": mask, "pw": pw,
            "K1": K1, "K2": K2, "ny": (ny1 * ny2)}


def rfwd(f: np.ndarray) -> np.ndarray:
    n = f.shape[-1]
    out = _fft.rfft2(f)
    out *= 1.0 / (n * n)
    return out


def rinv(C: np.ndarray) -> np.ndarray:
    n = C.shape[-2]
    out = _fft.irfft2(C, s=(n, n))
    out *= n * n
    return out


@lru_cache(maxsize=32)
def _proj_arrays(n: int):
    sym = rsymbols(n)
    k2 = sym["k2sum"].copy()
    k2[0, 0] = 1.0
    ny = sym["ny"]
    A1 = sym["K1"] / k2 * ny
    A2 = sym["K2"] / k2 * ny
    for a in (A1, A2):
        a.setflags(write=False)
    return sym["K1"], sym["K2"], A1, A2, ny


def rproject(C1: np.ndarray, C2: np.ndarray):
    """Half-spectrum Leray projection; kills k=0 and unmatched Nyquist."""
    n = C1.shape[-2]
    K1, K2, A1, A2, ny = _proj_arrays(n)
    kdotu = K1 * C1 + K2 * C2
    P1 = C1 * ny - A1 * kdotu
    P2 = C2 * ny - A2 * kdotu
    P1[..., 0, 0] = 0.0
    P2[..., 0, 0] = 0.0
    return P1, P2


def rparseval(C: np.ndarray, weight=None) -> float:
    """sum over full spectrum of weight * |C|^2 from half-spectrum C."""
    n = C.shape[-2]
    pw = rsymbols(n)["pw"]
    w = pw if weight is None else pw * weight
    return float(np.sum(w * (C.real**2 + C.imag**2)))


# ----------------------------------------------------------------------
# spec-level operations on typed fields

@dataclass
class SpectralField:
    """Normalized Fourier coefficients of a real scalar field."""

    coeffs: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.grid.check_shape(self.coeffs, "coeffs")


def forward(f: np.ndarray) -> SpectralField:
    f = np.asarray(f, dtype=float)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError(f"expected a square 2D field, got shape {f.shape}")
    return SpectralField(fwd(f), Grid(f.shape[0]))


def inverse(F: SpectralField) -> np.ndarray:
    return inv(F.coeffs)


def derivative(F: SpectralField, axis: int, order: int = 1) -> SpectralField:
    """Spectral partial derivative; axis=1 is d/dx1, axis=2 is d/dx2."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return SpectralField(deriv_hat(F.coeffs, axis - 1, order), F.grid)


def dealias(F: SpectralField) -> SpectralField:
    return SpectralField(dealias_hat(F.coeffs), F.grid)


def invert_helmholtz(F: SpectralField, alpha: float) -> SpectralField:
    return SpectralField(helmholtz_hat(F.coeffs, alpha), F.grid)


def leray_project(u: VelocityField) -> VelocityField:
    """Project onto divergence-free, zero-mean velocity fields."""
    P1, P2 = project_hat(fwd(u.u1), fwd(u.u2))
    return VelocityField(inv(P1), inv(P2), u.grid)


def divergence_max(u: VelocityField) -> float:
    """max_k |k . u_hat(k)| over integer wavevectors (spectral divergence)."""
    n = u.grid.n
    K1, K2 = wavenumbers(n)
    d = K1 * fwd(u.u1) + K2 * fwd(u.u2)
    return float(np.abs(d).max())
