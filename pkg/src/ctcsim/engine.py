"""The Deutsch fixed-point engine: the induced map on the time-travelling
register, its linearization as a superoperator, fixed-point solvers with
multiplicity diagnostics, and the visible output state.

Two solver paths exist. ``eig`` diagonalizes the d^2 x d^2 superoperator and
projects onto its unit-eigenvalue subspace. ``cesaro`` iterates the averaged
map rho -> (rho + M(rho)) / 2 from the maximally mixed state, which converges
geometrically to the same time-averaged limit even when plain iteration
cycles. Both select the same canonical state when several fixed points exist:
the averaged limit seeded at the maximally mixed state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .quantum import DensityMatrix, Layout, Unitary

EIG_DIM_CUTOFF = 8  # largest CTC dimension still solved by dense eigendecomposition


@dataclass(frozen=True)
class DeutschProblem:
    """A layout with a designated CTC register, the interaction unitary over
    the full layout, and the chronology-respecting input state."""

    layout: Layout
    interaction: Unitary
    cr_input: DensityMatrix

    def __post_init__(self):
        if self.layout.ctc_index is None:
            raise ValueError("layout must designate a CTC register")
        if self.interaction.side != self.layout.total_dim:
            raise ValueError(
                f"interaction side {self.interaction.side} does not match "
                f"layout dimension {self.layout.total_dim}"
            )
        cr_dim = int(np.prod(self.layout.cr_dims))
        if self.cr_input.side != cr_dim:
            raise ValueError(
                f"CR input side {self.cr_input.side} does not match "
                f"non-CTC dimension {cr_dim}"
            )

    @property
    def ctc_dim(self) -> int:
        return self.layout.ctc_dim


@dataclass
class SolverOptions:
    method: str = "auto"  # auto | eig | cesaro
    tol_residual: float = 1e-12
    max_iter: int = 100000
    eig_one_window: float = 1e-8

    def __post_init__(self):
        if self.method not in ("auto", "eig", "cesaro"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class FixedPointResult:
    rho_ctc: DensityMatrix
    residual: float
    multiplicity: int
    method_used: str
    iterations: int


def _map_raw(problem: DeutschProblem, ctc_mat: np.ndarray) -> np.ndarray:
    """Apply the induced CTC map to an arbitrary operator on the CTC register."""
    full = linalg.kron(problem.cr_input.mat, ctc_mat)
    u = problem.interaction.mat
    evolved = u @ full @ u.conj().T
    dims = problem.layout.dims
    return linalg.partial_trace(evolved, dims, [problem.layout.ctc_index])


def deutsch_map(problem: DeutschProblem, rho_ctc: DensityMatrix) -> DensityMatrix:
    """One application of the self-consistency map to a CTC state."""
    if rho_ctc.side != problem.ctc_dim:
        raise ValueError(
            f"CTC state side {rho_ctc.side} does not match dim {problem.ctc_dim}"
        )
    return DensityMatrix.sanitize(_map_raw(problem, rho_ctc.mat))


def output_state(problem: DeutschProblem, rho_ctc: DensityMatrix) -> DensityMatrix:
    """Visible output: trace the CTC register out of the evolved joint state."""
    if rho_ctc.side != problem.ctc_dim:
        raise ValueError(
            f"CTC state side {rho_ctc.side} does not match dim {problem.ctc_dim}"
        )
    full = linalg.kron(problem.cr_input.mat, rho_ctc.mat)
    u = problem.interaction.mat
    evolved = u @ full @ u.conj().T
    dims = problem.layout.dims
    keep = [i for i in range(len(dims)) if i != problem.layout.ctc_index]
    reduced = linalg.partial_trace(evolved, dims, keep)
    return DensityMatrix.sanitize(reduced, problem.layout.cr_dims)


def build_superoperator(problem: DeutschProblem) -> np.ndarray:
    """Row-major-vec linearization of the CTC map: vec(M(rho)) = S vec(rho)."""
    d = problem.ctc_dim
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            s[:, i * d + j] = _map_raw(problem, unit).reshape(-1)
    return s


def _multiplicity(s: np.ndarray, window: float) -> int:
    eigvals = np.linalg.eigvals(s)
    return int(np.sum(np.abs(eigvals - 1.0) <= window))


def _residual(problem: DeutschProblem, mat: np.ndarray) -> float:
    return linalg.trace_distance(_map_raw(problem, mat), mat)


def _solve_eig(problem: DeutschProblem, opts: SolverOptions, s: np.ndarray):
    d = problem.ctc_dim
    # fixed points = null space of S - I; SVD keeps this robust for
    # non-normal superoperators
    u_sv, sv, vh = np.linalg.svd(s - np.eye(d * d))
    null_mask = sv <= max(opts.eig_one_window, sv[0] * 1e-14)
    basis = vh[null_mask].conj().T  # columns span the fixed subspace
    if basis.shape[1] == 0:
        # fall back to the single smallest singular vector
        basis = vh[-1:].conj().T
    if basis.shape[1] == 1:
        candidate = basis[:, 0].reshape(d, d)
    else:
        seed = (np.eye(d, dtype=complex) / d).reshape(-1)
        coeff, *_ = np.linalg.lstsq(basis, seed, rcond=None)
        candidate = (basis @ coeff).reshape(d, d)
    tr = np.trace(candidate)
    if abs(tr) < 1e-12:
        raise ValueError("eigensolver produced a traceless fixed-point candidate")
    return DensityMatrix.sanitize(candidate / tr), 0


def _solve_cesaro(problem: DeutschProblem, opts: SolverOptions):
    d = problem.ctc_dim
    rho = np.eye(d, dtype=complex) / d
    best = rho
    best_res = _residual(problem, rho)
    iterations = 0
    while best_res > opts.tol_residual and iterations < opts.max_iter:
        rho = 0.5 * (rho + _map_raw(problem, rho))
        rho = (rho + rho.conj().T) / 2
        iterations += 1
        res = _residual(problem, rho)
        if res < best_res:
            best, best_res = rho, res
    return DensityMatrix.sanitize(best), iterations


def solve_fixed_point(
    problem: DeutschProblem, opts: SolverOptions | None = None
) -> FixedPointResult:
    """Find the canonical fixed point of the self-consistency condition."""
    opts = opts or SolverOptions()
    method = opts.method
    if method == "auto":
        method = "eig" if problem.ctc_dim <= EIG_DIM_CUTOFF else "cesaro"
    s = build_superoperator(problem)
    multiplicity = _multiplicity(s, opts.eig_one_window)
    if method == "eig":
        rho, iterations = _solve_eig(problem, opts, s)
    else:
        rho, iterations = _solve_cesaro(problem, opts)
    residual = _residual(problem, rho.mat)
    return FixedPointResult(
        rho_ctc=rho,
        residual=residual,
        multiplicity=multiplicity,
        method_used=method,
        iterations=iterations,
    )


def evolve(
    problem: DeutschProblem, opts: SolverOptions | None = None
) -> tuple[DensityMatrix, FixedPointResult]:
    """Solve the fixed point, then return (visible output, solver result)."""
    fp = solve_fixed_point(problem, opts)
    return output_state(problem, fp.rho_ctc), fp
