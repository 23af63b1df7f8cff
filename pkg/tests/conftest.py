import math

import numpy as np
import pytest

from holosim.pulses import GateSpec

#: Drive amplitude used in the hardware runs this package reproduces.
OMEGA0 = 2.0 * math.pi * 8.660e6


@pytest.fixture
def omega0():
    return OMEGA0


@pytest.fixture
def sqrt_x_spec():
    return GateSpec(theta=0.5 * math.pi, phi=0.0, gamma=0.5 * math.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_state(rng, dim):
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_gate_spec(rng, gamma_margin=0.05):
    return GateSpec(
        theta=rng.uniform(0.0, math.pi),
        phi=rng.uniform(0.0, 2.0 * math.pi),
        gamma=rng.uniform(gamma_margin, 2.0 * math.pi - gamma_margin),
    )


def phase_aligned_distance(a, b):
    """Max-norm distance between matrices after optimal global-phase alignment."""
    overlap = np.trace(a.conj().T @ b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a - b / phase)))
