import numpy as np

from ctcsim import linalg
from ctcsim.cloning import build_mixed_cloner, run_clone
from ctcsim.engine import solve_fixed_point
from ctcsim.nosignal import (
    apply_spectator_channel,
    check_channel_invariance,
    run_entangled_clone,
)
from ctcsim.quantum import DensityMatrix, PureState
from ctcsim.sampling import random_kraus_channel


def bell_input():
    return PureState.normalized([0, 1, 1, 0]).density().with_dims((2, 2))


def test_bell_input_no_signal():
    report = run_entangled_clone(build_mixed_cloner(2), bell_input())
    expected = linalg.kron(np.eye(2) / 2, np.eye(2) / 2)
    assert linalg.trace_distance(report.reduced_ab.mat, expected) <= 1e-10
    assert report.deviation <= 1e-10


def test_product_input_reduces_to_plain_clone():
    cloner = build_mixed_cloner(2)
    psi = PureState.basis(2, 0)
    phi = PureState.normalized([1, 1j])
    joint = DensityMatrix(linalg.kron(psi.projector(), phi.projector()), (2, 2))
    report = run_entangled_clone(cloner, joint)
    plain = run_clone(cloner, psi.density())
    assert linalg.trace_distance(report.reduced_ab.mat, plain.output.mat) <= 1e-10


def test_bell_a_clone_uncorrelated_with_spectator():
    report = run_entangled_clone(build_mixed_cloner(2), bell_input())
    dims = (2, 2, 2)
    clone_a_r = linalg.partial_trace(report.rho_tot.mat, dims, {0, 2})
    clone_a = linalg.partial_trace(report.rho_tot.mat, dims, {0})
    spectator = linalg.partial_trace(report.rho_tot.mat, dims, {2})
    assert linalg.trace_distance(clone_a_r, linalg.kron(clone_a, spectator)) <= 1e-9
    assert linalg.trace_distance(clone_a, np.eye(2) / 2) <= 1e-9


def test_trace_over_spectator_commutes_with_evolution():
    # the fixed point solved on the extended problem equals the one solved
    # on the reduced input, so Tr_R(rho_tot) = evolve(Tr_R(input))
    from ctcsim.cloning import make_problem
    cloner = build_mixed_cloner(2)
    report = run_entangled_clone(cloner, bell_input())
    reduced_input = DensityMatrix(
        linalg.partial_trace(bell_input().mat, (2, 2), {0})
    )
    plain = run_clone(cloner, reduced_input)
    assert linalg.trace_distance(report.reduced_ab.mat, plain.output.mat) <= 1e-10
    fp_reduced = solve_fixed_point(make_problem(cloner, reduced_input))
    assert linalg.trace_distance(
        report.fixed_point.rho_ctc.mat, fp_reduced.rho_ctc.mat
    ) <= 1e-10


class TestChannelInvariance:
    def test_identity_channel(self):
        devs = check_channel_invariance(
            build_mixed_cloner(2), bell_input(), [[np.eye(2, dtype=complex)]]
        )
        assert devs[0] <= 1e-12

    def test_full_dephasing(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        devs = check_channel_invariance(
            build_mixed_cloner(2), bell_input(), [[p0, p1]]
        )
        assert devs[0] <= 1e-9

    def test_random_channels(self, rng):
        channels = [random_kraus_channel(rng, 2) for _ in range(20)]
        devs = check_channel_invariance(build_mixed_cloner(2), bell_input(), channels)
        assert max(devs) <= 1e-9

    def test_non_trace_preserving_rejected(self):
        import pytest
        with pytest.raises(ValueError, match="trace-preserving"):
            apply_spectator_channel(bell_input(), [np.eye(2) * 0.5], 2)
