"""Uhlmann fidelity and executable checkers for its algebraic properties
(multiplicativity over tensor products, monotonicity under partial trace)."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .quantum import DensityMatrix


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr sqrt(rho^{1/2} sigma rho^{1/2}), clamped to [0, 1].

    Computed by eigendecomposing the sandwiched operator and summing the
    square roots of its (clamped) eigenvalues.
    """
    if rho.side != sigma.side:
        raise ValueError(f"shape mismatch: {rho.side} vs {sigma.side}")
    root = linalg.psd_sqrt(rho.mat)
    sandwich = root @ sigma.mat @ root
    w, _ = np.linalg.eigh((sandwich + sandwich.conj().T) / 2)
    if w[0] < -linalg.tolerances.psd:
        raise ValueError(f"sandwiched operator not PSD: {w[0]:.3e}")
    # eigenvalues at the numerical noise floor would contribute sqrt(eps)
    # after the square root; floor them to zero first
    cut = 1e-13 * max(float(w[-1]), 1.0)
    w = np.where(w < cut, 0.0, w)
    f = float(np.sum(np.sqrt(w)))
    if f < -1e-9 or f > 1 + 1e-9:
        raise ValueError(f"fidelity {f} outside [0,1] beyond tolerance")
    return min(max(f, 0.0), 1.0)


def check_multiplicativity(
    rho_i: DensityMatrix,
    sigma_i: DensityMatrix,
    rho_j: DensityMatrix,
    sigma_j: DensityMatrix,
) -> float:
    """|F(rho_i x sigma_i, rho_j x sigma_j) - F(rho_i, rho_j) F(sigma_i, sigma_j)|."""
    big_i = DensityMatrix(linalg.kron(rho_i.mat, sigma_i.mat))
    big_j = DensityMatrix(linalg.kron(rho_j.mat, sigma_j.mat))
    lhs = fidelity(big_i, big_j)
    rhs = fidelity(rho_i, rho_j) * fidelity(sigma_i, sigma_j)
    return abs(lhs - rhs)


def check_monotonicity(
    sigma_big: DensityMatrix,
    tau_big: DensityMatrix,
    dims: Sequence[int],
    traced: Iterable[int],
) -> float:
    """Margin F(reduced sigma, reduced tau) - F(sigma, tau).

    Non-negative (within numerical slack) for every partial trace; callers
    pick their own threshold.
    """
    dims = tuple(int(d) for d in dims)
    traced = set(int(t) for t in traced)
    keep = [i for i in range(len(dims)) if i not in traced]
    red_s = DensityMatrix(linalg.partial_trace(sigma_big.mat, dims, keep))
    red_t = DensityMatrix(linalg.partial_trace(tau_big.mat, dims, keep))
    return fidelity(red_s, red_t) - fidelity(sigma_big, tau_big)
