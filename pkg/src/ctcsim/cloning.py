"""Builders for the two CTC-assisted cloning circuits, clone verification
reports, the cloning-condition inequality checks, and the chronology-
respecting no-cloning baseline.

Both circuits live on a three-register layout [A, B, CTC], all of dimension
N. Register A carries the state to clone, B the blank |0><0| input, and the
CTC register is solved self-consistently.

Gate application order: the pure cloner applies [W, V, S, T1, T2] (rightmost
factor of the operator product first); the mixed cloner applies [W1, W2, V]
in subscript order, the ordering under which its diagonal broadcast output is
actually reproduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from . import linalg
from .engine import DeutschProblem, FixedPointResult, SolverOptions, evolve
from .fidelity import fidelity
from .quantum import (
    Alphabet,
    DensityMatrix,
    Layout,
    PureState,
    Unitary,
    basis_mapper,
    csum_gate,
    select_gate,
    swap_gate,
)


@dataclass(frozen=True)
class ClonerCircuit:
    layout: Layout
    gates: tuple  # of (label, Unitary) in application order
    total: Unitary
    kind: str  # pure_alphabet | mixed_diagonal
    alphabet: Alphabet | None = None

    def __post_init__(self):
        labels = [lbl for lbl, _ in self.gates]
        expected = {
            "pure_alphabet": ["W", "V", "S", "T1", "T2"],
            "mixed_diagonal": ["W1", "W2", "V"],
        }
        if self.kind not in expected:
            raise ValueError(f"unknown cloner kind {self.kind!r}")
        if labels != expected[self.kind]:
            raise ValueError(f"gate labels {labels} do not match {self.kind}")
        product = reduce(lambda acc, g: g[1].mat @ acc, self.gates, np.eye(self.layout.total_dim, dtype=complex))
        if np.max(np.abs(product - self.total.mat)) > 1e-10:
            raise ValueError("total unitary does not match the gate product")

    @property
    def n(self) -> int:
        return self.layout.dim("A")


@dataclass
class CloneReport:
    input_state: DensityMatrix
    fixed_point: FixedPointResult
    output: DensityMatrix
    clone_a: DensityMatrix
    clone_b: DensityMatrix
    fid_a: float
    fid_b: float
    joint_fid: float


def _cloner_layout(n: int) -> Layout:
    return Layout((("A", n), ("B", n), ("CTC", n)), ctc_index=2)


def build_pure_cloner(alphabet: Alphabet) -> ClonerCircuit:
    """Cloner for a finite alphabet of pure states.

    The circuit swaps A into the loop, copies the loop's basis label onto B
    with CSUM, then uses three controlled-select stages built from the basis
    mappers U_k (U_k|psi_k> = |k>) to decode both clones.
    """
    n = alphabet.dim
    layout = _cloner_layout(n)
    mappers = [basis_mapper(alphabet.states[k], k) for k in range(n)]
    w = swap_gate(layout, "A", "CTC")
    v = csum_gate(layout, "A", "B")
    s = select_gate(layout, "B", "CTC", mappers)
    t1 = select_gate(layout, "A", "B", mappers, adjoint=True)
    t2 = select_gate(layout, "CTC", "A", mappers, adjoint=True)
    gates = (("W", w), ("V", v), ("S", s), ("T1", t1), ("T2", t2))
    total = Unitary(t2.mat @ t1.mat @ s.mat @ v.mat @ w.mat)
    return ClonerCircuit(layout, gates, total, "pure_alphabet", alphabet)


def build_mixed_cloner(n: int) -> ClonerCircuit:
    """Cloner for states diagonal in the computational basis."""
    if n < 2:
        raise ValueError("dimension must be >= 2")
    layout = _cloner_layout(n)
    w1 = swap_gate(layout, "A", "CTC")
    w2 = swap_gate(layout, "B", "CTC")
    v = csum_gate(layout, "B", "CTC")
    gates = (("W1", w1), ("W2", w2), ("V", v))
    total = Unitary(v.mat @ w2.mat @ w1.mat)
    return ClonerCircuit(layout, gates, total, "mixed_diagonal")


def blank_state(n: int) -> DensityMatrix:
    return PureState.basis(n, 0).density()


def make_problem(cloner: ClonerCircuit, target: DensityMatrix) -> DeutschProblem:
    cr = DensityMatrix(
        linalg.kron(target.mat, blank_state(cloner.n).mat), (cloner.n, cloner.n)
    )
    return DeutschProblem(cloner.layout, cloner.total, cr)


def run_clone(
    cloner: ClonerCircuit,
    target: DensityMatrix,
    opts: SolverOptions | None = None,
) -> CloneReport:
    """Clone one target through the circuit and report clones and fidelities."""
    n = cloner.n
    if target.side != n:
        raise ValueError(f"target side {target.side} does not match cloner dim {n}")
    if cloner.kind == "mixed_diagonal":
        off_diag = np.max(np.abs(target.mat - np.diag(np.diag(target.mat))))
        if off_diag > 1e-10:
            raise ValueError(
                "mixed-diagonal cloner requires a target diagonal in the "
                f"computational basis (off-diagonal magnitude {off_diag:.3e}); "
                "conjugate into the eigenbasis first"
            )
    output, fp = evolve(make_problem(cloner, target), opts)
    dims = (n, n)
    clone_a = DensityMatrix.sanitize(linalg.partial_trace(output.mat, dims, [0]))
    clone_b = DensityMatrix.sanitize(linalg.partial_trace(output.mat, dims, [1]))
    joint_target = DensityMatrix(linalg.kron(target.mat, target.mat))
    return CloneReport(
        input_state=target,
        fixed_point=fp,
        output=output,
        clone_a=clone_a,
        clone_b=clone_b,
        fid_a=fidelity(clone_a, target),
        fid_b=fidelity(clone_b, target),
        joint_fid=fidelity(output, joint_target),
    )


def check_cloning_condition(fid_cr: float, fid_ctc: float):
    """Evaluate the two fidelity inequalities for a pair of clone runs.

    Inputs are F(rho_i, rho_j) for the CR targets and F between the two solved
    CTC fixed points. Returns (ineq_cr_ok, ineq_ctc_ok, (margin_cr, margin_ctc))
    where margin_cr = F_cr^2 - F_cr F_ctc and margin_ctc = F_ctc - F_cr F_ctc;
    both must be >= -1e-9.
    """
    for name, f in (("fid_cr", fid_cr), ("fid_ctc", fid_ctc)):
        if not -1e-9 <= f <= 1 + 1e-9:
            raise ValueError(f"{name} = {f} outside [0, 1]")
    product = fid_cr * fid_ctc
    margin_cr = fid_cr**2 - product
    margin_ctc = fid_ctc - product
    return margin_cr >= -1e-9, margin_ctc >= -1e-9, (margin_cr, margin_ctc)


def no_ctc_baseline(
    alphabet: Alphabet,
    interaction: Unitary,
    ancilla: DensityMatrix,
) -> float:
    """Worst-pair infidelity of a chronology-respecting would-be cloner.

    The interaction acts on A x B x C with C a fixed ancilla; no fixed point
    is solved. Returns 1 minus the smallest joint clone fidelity over the
    alphabet. Strictly positive for alphabets with any pairwise fidelity
    strictly inside (0, 1), for every interaction.
    """
    n = alphabet.dim
    total = n * n * ancilla.side
    if interaction.side != total:
        raise ValueError(
            f"interaction side {interaction.side} does not match A*B*C = {total}"
        )
    dims = (n, n, ancilla.side)
    sigma = blank_state(n)
    worst = 1.0
    for state in alphabet.states:
        rho_s = state.density()
        full = linalg.kron_all(rho_s.mat, sigma.mat, ancilla.mat)
        u = interaction.mat
        evolved = u @ full @ u.conj().T
        out = DensityMatrix.sanitize(linalg.partial_trace(evolved, dims, [0, 1]))
        joint_target = DensityMatrix(linalg.kron(rho_s.mat, rho_s.mat))
        worst = min(worst, fidelity(out, joint_target))
    return 1.0 - worst


def classical_copy_circuit(n: int, ancilla_dim: int = 2) -> Unitary:
    """CSUM from A onto B with an idle ancilla: copies computational basis
    states exactly, the allowed orthonormal-alphabet case of the baseline."""
    layout = Layout((("A", n), ("B", n), ("C", ancilla_dim)))
    return csum_gate(layout, "A", "B")
