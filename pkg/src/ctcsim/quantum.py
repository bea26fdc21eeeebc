"""Register layouts, validated state/unitary wrappers, and the qudit gate
constructors used by the cloning circuits: SWAP, CSUM, controlled-select
blocks, basis mappers, and single-register embeddings.

Tensor convention: registers appear in declaration order, the CTC register
(when present) last, and a basis state |i0, i1, ...> has flat index
sum(i_k * prod(later dims)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .linalg import as_matrix, kron_all, tolerances


@dataclass(frozen=True)
class Layout:
    """Ordered named registers; at most one is designated as the CTC."""

    registers: tuple  # of (name, dim) pairs
    ctc_index: int | None = None

    def __post_init__(self):
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        if any(d < 2 for _, d in regs):
            raise ValueError("register dimensions must be >= 2")
        if self.ctc_index is not None:
            if not 0 <= self.ctc_index < len(regs):
                raise ValueError(f"ctc_index {self.ctc_index} out of range")
            if self.ctc_index != len(regs) - 1:
                raise ValueError("the CTC register must be last in tensor order")

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.registers)

    @property
    def dims(self) -> tuple:
        return tuple(d for _, d in self.registers)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.registers):
            if n == name:
                return i
        raise KeyError(f"no register named {name!r}")

    def dim(self, name: str) -> int:
        return self.registers[self.index(name)][1]

    @property
    def ctc_dim(self) -> int:
        if self.ctc_index is None:
            raise ValueError("layout has no CTC register")
        return self.registers[self.ctc_index][1]

    @property
    def cr_dims(self) -> tuple:
        """Dimensions of the chronology-respecting (non-CTC) registers."""
        return tuple(
            d for i, (_, d) in enumerate(self.registers) if i != self.ctc_index
        )


@dataclass(frozen=True)
class PureState:
    """Unit-norm complex amplitude vector."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm} is not 1 within 1e-10")
        object.__setattr__(self, "amps", a)

    @property
    def dim(self) -> int:
        return self.amps.size

    @classmethod
    def basis(cls, dim: int, j: int) -> "PureState":
        a = np.zeros(dim, dtype=complex)
        a[j] = 1.0
        return cls(a)

    @classmethod
    def normalized(cls, amps) -> "PureState":
        a = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(a / np.linalg.norm(a))

    def projector(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-one operator, optionally with register dims."""

    mat: np.ndarray
    dims: tuple = None

    def __post_init__(self):
        m = as_matrix(self.mat)
        object.__setattr__(self, "mat", m)
        dims = (m.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"dims {dims} do not match side {m.shape[0]}")
        object.__setattr__(self, "dims", dims)
        w, _ = linalg.hermitian_eig(m)
        if w[0] < -tolerances.psd:
            raise ValueError(f"not PSD: min eigenvalue {w[0]:.3e}")
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace {tr} is not 1 within 1e-10")

    @property
    def side(self) -> int:
        return self.mat.shape[0]

    def with_dims(self, dims: Sequence[int]) -> "DensityMatrix":
        return DensityMatrix(self.mat, tuple(dims))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def sanitize(cls, m, dims=None) -> "DensityMatrix":
        """Symmetrize, clamp small negative eigenvalues, renormalize.

        Guards solver output against numerical drift; anything beyond the PSD
        tolerance still rejects.
        """
        m = as_matrix(m)
        m = (m + m.conj().T) / 2
        w, v = np.linalg.eigh(m)
        if w[0] < -tolerances.psd:
            raise ValueError(f"not PSD even before clamping: {w[0]:.3e}")
        w = np.clip(w, 0.0, None)
        m = (v * w) @ v.conj().T
        m = (m + m.conj().T) / 2
        return cls(m / np.real(np.trace(m)), dims)


@dataclass(frozen=True)
class Unitary:
    mat: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.mat)
        defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if defect > tolerances.unitary:
            raise ValueError(f"not unitary: max |U^dag U - I| = {defect:.3e}")
        object.__setattr__(self, "mat", m)

    @property
    def side(self) -> int:
        return self.mat.shape[0]

    def dagger(self) -> "Unitary":
        return Unitary(self.mat.conj().T)

    def __matmul__(self, other: "Unitary") -> "Unitary":
        return Unitary(self.mat @ other.mat)


@dataclass(frozen=True)
class Alphabet:
    """N distinct pure states in dimension N, the clone-target set."""

    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValueError("alphabet must not be empty")
        dim = states[0].dim
        if any(s.dim != dim for s in states):
            raise ValueError("alphabet states must share one dimension")
        if len(states) != dim:
            raise ValueError(
                f"alphabet size {len(states)} must equal the dimension {dim}"
            )
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                d = linalg.trace_distance(states[i].projector(), states[j].projector())
                if d <= 1e-8:
                    raise ValueError(f"alphabet states {i} and {j} are not distinct")
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    @classmethod
    def padded(cls, states: Sequence[PureState], dim: int) -> "Alphabet":
        """Pad fewer than ``dim`` states up to a full alphabet with vectors
        orthogonal to the given ones (Gram-Schmidt against the span)."""
        states = list(states)
        if len(states) > dim:
            raise ValueError("more states than the dimension allows")
        basis = [s.amps for s in states]
        for cand in np.eye(dim, dtype=complex):
            if len(basis) == dim:
                break
            v = cand.copy()
            for b in basis:
                v = v - b * (np.vdot(b, v))
            n = np.linalg.norm(v)
            if n > 1e-6:
                basis.append(v / n)
                states.append(PureState(v / n))
        if len(states) != dim:
            raise ValueError("could not complete the alphabet to full dimension")
        return cls(tuple(states))


def _permutation_gate(layout: Layout, f) -> Unitary:
    """Unitary permuting basis states: index tuple i -> f(i)."""
    dims = layout.dims
    total = layout.total_dim
    m = np.zeros((total, total), dtype=complex)
    for col, idx in enumerate(np.ndindex(*dims)):
        out = f(idx)
        row = int(np.ravel_multi_index(out, dims))
        m[row, col] = 1.0
    return Unitary(m)


def swap_gate(layout: Layout, r1: str, r2: str) -> Unitary:
    """Exchange the basis indices of two equal-dimension registers."""
    i1, i2 = layout.index(r1), layout.index(r2)
    if i1 == i2:
        raise ValueError("cannot swap a register with itself")
    if layout.dim(r1) != layout.dim(r2):
        raise ValueError(
            f"swap needs equal dims, got {layout.dim(r1)} and {layout.dim(r2)}"
        )

    def f(idx):
        out = list(idx)
        out[i1], out[i2] = out[i2], out[i1]
        return tuple(out)

    return _permutation_gate(layout, f)


def csum_gate(layout: Layout, ctrl: str, tgt: str) -> Unitary:
    """Generalized controlled sum: |i>|j> -> |i>|j + i mod N| on (ctrl, tgt)."""
    ic, it = layout.index(ctrl), layout.index(tgt)
    if ic == it:
        raise ValueError("control and target must differ")
    n = layout.dim(ctrl)
    if layout.dim(tgt) != n:
        raise ValueError(f"csum needs equal dims, got {n} and {layout.dim(tgt)}")

    def f(idx):
        out = list(idx)
        out[it] = (idx[it] + idx[ic]) % n
        return tuple(out)

    return _permutation_gate(layout, f)


def _embed_factors(layout: Layout, parts: dict) -> np.ndarray:
    """Kron together per-register operators (identity where unspecified)."""
    factors = []
    for name, dim in layout.registers:
        factors.append(parts.get(name, np.eye(dim, dtype=complex)))
    return kron_all(*factors)


def select_gate(
    layout: Layout,
    ctrl: str,
    tgt: str,
    family: Sequence[Unitary],
    adjoint: bool = False,
) -> Unitary:
    """Controlled-select block sum_k |k><k|_ctrl x (U_k or U_k^dag)_tgt."""
    nc = layout.dim(ctrl)
    nt = layout.dim(tgt)
    if layout.index(ctrl) == layout.index(tgt):
        raise ValueError("control and target must differ")
    if len(family) != nc:
        raise ValueError(f"family size {len(family)} must equal control dim {nc}")
    total = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    for k, u in enumerate(family):
        if u.side != nt:
            raise ValueError(f"family member {k} has side {u.side}, target dim {nt}")
        proj = np.zeros((nc, nc), dtype=complex)
        proj[k, k] = 1.0
        op = u.mat.conj().T if adjoint else u.mat
        total += _embed_factors(layout, {ctrl: proj, tgt: op})
    return Unitary(total)


def embed_unitary(layout: Layout, reg: str, u: Unitary) -> Unitary:
    """Place a single-register unitary into the full layout."""
    if u.side != layout.dim(reg):
        raise ValueError(f"unitary side {u.side} does not match register {reg!r}")
    return Unitary(_embed_factors(layout, {reg: u.mat}))


def embed_on_registers(layout: Layout, regs: Sequence[str], u: Unitary) -> Unitary:
    """Place a multi-register unitary (acting on ``regs`` in the given order)
    into the full layout, identity on the remaining registers."""
    positions = [layout.index(r) for r in regs]
    if len(set(positions)) != len(positions):
        raise ValueError("registers must be distinct")
    dims = layout.dims
    sub_dims = [dims[p] for p in positions]
    if u.side != int(np.prod(sub_dims)):
        raise ValueError(
            f"unitary side {u.side} does not match registers {list(regs)}"
        )
    rest = [i for i in range(len(dims)) if i not in positions]
    rest_dim = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(u.mat, np.eye(rest_dim, dtype=complex))
    order = positions + rest  # current tensor order of `full`
    inv = [order.index(r) for r in range(len(dims))]
    permuted = linalg.permute_registers(
        full, [dims[p] for p in order], inv
    )
    return Unitary(permuted)


def basis_mapper(psi: PureState, j: int) -> Unitary:
    """Unitary sending ``psi`` exactly to the computational basis vector e_j.

    Householder reflection through psi - e^{i theta} e_j, with theta the phase
    of <e_j|psi>, followed by a diagonal phase fix so the image carries no
    residual global phase.
    """
    n = psi.dim
    if not 0 <= j < n:
        raise ValueError(f"basis index {j} out of range for dimension {n}")
    overlap = psi.amps[j]
    theta = float(np.angle(overlap)) if abs(overlap) > 1e-14 else 0.0
    ej = np.zeros(n, dtype=complex)
    ej[j] = 1.0
    v = psi.amps - np.exp(1j * theta) * ej
    vv = float(np.real(np.vdot(v, v)))
    if vv < 1e-24:
        h = np.eye(n, dtype=complex)
    else:
        h = np.eye(n, dtype=complex) - 2.0 * np.outer(v, v.conj()) / vv
    phase_fix = np.eye(n, dtype=complex)
    phase_fix[j, j] = np.exp(-1j * theta)
    return Unitary(phase_fix @ h)
