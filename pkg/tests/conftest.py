import numpy as np
import pytest

from beqt2d import spectral
from beqt2d.fields import Grid, Parameters, QTensorField, SimState, VelocityField


@pytest.fixture
def grid64():
    return Grid(64)


@pytest.fixture
def params():
    return Parameters()


def band_limited(rng, n, kmax, amp=1.0):
    """Random real field with modes only in max(|k1|,|k2|) <= kmax,
    normalized to max-norm amp."""
    C = spectral.fwd(rng.standard_normal((n, n)))
    K1, K2 = spectral.wavenumbers(n)
    C[(np.abs(K1) > kmax) | (np.abs(K2) > kmax)] = 0.0
    C[0, 0] = 0.0
    f = spectral.inv(C)
    return amp * f / np.abs(f).max()


def random_velocity(rng, grid, kmax=6, amp=0.4):
    """Divergence-free velocity from a random stream function; amp is the
    L2 norm."""
    psi = band_limited(rng, grid.n, kmax)
    ph = spectral.fwd(psi)
    u1 = spectral.inv(spectral.deriv_hat(ph, 1))
    u2 = -spectral.inv(spectral.deriv_hat(ph, 0))
    norm = np.sqrt(np.mean(u1**2 + u2**2))
    if norm > 0:
        u1 *= amp / norm
        u2 *= amp / norm
    return VelocityField(u1, u2, grid)


def random_q(rng, grid, kmax=6, amp=0.4):
    return QTensorField(
        band_limited(rng, grid.n, kmax, amp), band_limited(rng, grid.n, kmax, amp), grid
    )


def random_state(rng, grid, kmax=6, u_amp=0.4, q_amp=0.4):
    return SimState(0.0, random_velocity(rng, grid, kmax, u_amp), random_q(rng, grid, kmax, q_amp))
