"""Seeded random generators for sweeps and property tests.

All sampling routes through ``numpy.random.Generator`` (PCG64), so a fixed
seed reproduces the same trial sequence on any platform.
"""

from __future__ import annotations

import numpy as np

from .quantum import DensityMatrix, PureState, Unitary


def haar_unitary(rng: np.random.Generator, dim: int) -> Unitary:
    """Haar-distributed unitary via QR of a Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return Unitary(q * phases)


def random_pure(rng: np.random.Generator, dim: int) -> PureState:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def random_density(rng: np.random.Generator, dim: int) -> DensityMatrix:
    """Full-rank random density matrix from a normalized Ginibre product."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = z @ z.conj().T
    return DensityMatrix(m / np.real(np.trace(m)))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + z.conj().T) / 2


def random_kraus_channel(rng: np.random.Generator, dim: int, n_kraus: int = 2):
    """Random trace-preserving channel as a list of Kraus operators.

    Built from the first block column of a Haar unitary on dim * n_kraus.
    """
    big = haar_unitary(rng, dim * n_kraus).mat
    return [big[k * dim:(k + 1) * dim, :dim] for k in range(n_kraus)]
