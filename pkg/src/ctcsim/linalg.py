"""Dense complex matrix primitives: Kronecker products, partial traces,
Hermitian eigendecomposition, PSD square roots and trace distances.

All operators are plain square ``numpy`` arrays of ``complex128``, stored
row-major. Every numeric kernel routes through ``hermitian_eig`` so the
tolerance story stays in one place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np


@dataclass
class Tolerances:
    """Central tolerance registry; mutate the module-level instance to override."""

    herm: float = 1e-12        # max |h - h^dag| accepted as Hermitian
    psd: float = 1e-10         # eigenvalue floor; more negative means not PSD
    reconstruction: float = 1e-9
    unitary: float = 1e-10     # max |U^dag U - I| accepted as unitary


tolerances = Tolerances()


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product of two square matrices."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*mats) -> np.ndarray:
    """Left-to-right Kronecker product of any number of square matrices."""
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"register dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if m.shape[0] != total:
        raise ValueError(
            f"matrix side {m.shape[0]} does not match product of dims {dims}"
        )
    return dims


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every register not in ``keep``, preserving register order.

    ``dims`` lists the register dimensions in tensor order; ``keep`` is a set
    of register indices. An empty ``keep`` yields the 1x1 matrix [Tr(m)].
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if keep and (keep[0] < 0 or keep[-1] >= n):
        raise ValueError(f"keep indices {keep} out of range for {n} registers")
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    remaining = n
    for count, i in enumerate(sorted(traced, reverse=True)):
        t = np.trace(t, axis1=i, axis2=i + remaining)
        remaining -= 1
    side = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(side, side)


def permute_registers(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: register i of the result is register perm[i] of m."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    t = m.reshape(dims + dims)
    t = t.transpose(perm + [p + n for p in perm])
    return np.ascontiguousarray(t.reshape(m.shape))


def hermiticity_defect(h) -> float:
    h = as_matrix(h)
    return float(np.max(np.abs(h - h.conj().T)))


def hermitian_eig(h, tol: float | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix; eigenvalues ascending.

    Rejects inputs whose asymmetry exceeds the Hermiticity tolerance, reporting
    the measured defect.
    """
    h = as_matrix(h)
    tol = tolerances.herm if tol is None else tol
    defect = hermiticity_defect(h)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian: max |h - h^dag| = {defect:.3e}")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return w, v


def psd_sqrt(h) -> np.ndarray:
    """Unique positive square root of a PSD Hermitian matrix.

    Eigenvalues within ``tolerances.psd`` of zero are clamped; anything more
    negative rejects the input.
    """
    w, v = hermitian_eig(h)
    if w[0] < -tolerances.psd:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def trace_norm(h) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w, _ = hermitian_eig(h)
    return float(np.sum(np.abs(w)))


def trace_distance(a, b) -> float:
    """Half the trace norm of a - b, for Hermitian a, b of equal side."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return 0.5 * trace_norm(a - b)
