import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxperm.aep import DomainError, EncodedPermutation, PermutationSpec, deviation, identity_aep
from approxperm.quantum import (
    InputDistribution,
    PureState,
    actual_output_state,
    check_subvector_lemma,
    desired_output_state,
    fidelity_and_trace_distance,
    lifted_state,
    permuted_overlap,
    random_lemma_pair,
    verify_deviation_theorem,
    verify_many,
)
from approxperm.representations import coset_aep, runway_aep


def shift_aep(size, c_size=1):
    """Exact encoding of ``g -> g + 1 mod size`` with ``c`` riding along."""
    shift = PermutationSpec(size, lambda g: (g + 1) % size, lambda g: (g - 1) % size)
    total = size * c_size
    return EncodedPermutation(
        g_size=size, e_size=total, c_size=c_size, u=shift,
        v=PermutationSpec(total, lambda e: (e // c_size + 1) % size * c_size + e % c_size,
                          lambda e: (e // c_size - 1) % size * c_size + e % c_size),
        encode_fn=lambda g, c: g * c_size + c,
        decode_fn=lambda e: (e // c_size, e % c_size, np.zeros(np.shape(e), dtype=bool)),
    )


def test_lifted_state_examples():
    P = identity_aep(2, 2)
    b = lifted_state(P, InputDistribution(np.array([1, 0]))).amplitudes
    assert np.allclose(b, [1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])
    P = coset_aep(3, 2)
    b = lifted_state(P, InputDistribution.uniform(3)).amplitudes
    assert np.allclose(b[:12], 1 / math.sqrt(12))
    assert np.allclose(b[12:], 0)


def test_lifted_state_size_check():
    with pytest.raises(DomainError):
        lifted_state(coset_aep(3, 2), InputDistribution.uniform(4))


def test_desired_state_examples():
    a = InputDistribution.random(5, 3)
    P = identity_aep(5, 2, 1)
    assert np.allclose(desired_output_state(P, a).amplitudes, lifted_state(P, a).amplitudes)
    shifted = desired_output_state(shift_aep(3), InputDistribution.basis(3, 0)).amplitudes
    assert np.allclose(shifted, [0, 1, 0])


def test_actual_state_identity_v():
    a = InputDistribution.random(7, 1)
    P = coset_aep(7, 2, 0)
    assert np.allclose(actual_output_state(P, a).amplitudes, lifted_state(P, a).amplitudes)


def test_exact_encoding_has_zero_distance():
    P = shift_aep(4, 3)
    report = verify_deviation_theorem(P, InputDistribution.random(4, 8))
    assert report.trace_distance == pytest.approx(0, abs=1e-7)
    assert report.passed


def test_fidelity_examples():
    s = PureState(np.array([0.6, 0.8j]))
    assert fidelity_and_trace_distance(s, s) == pytest.approx((1, 0), abs=1e-7)
    d, t = fidelity_and_trace_distance(PureState([1, 0]), PureState([0, 1]))
    assert (d, t) == (0, 1)
    with pytest.raises(DomainError):
        PureState([1, 1])


def test_identity_theorem_trivial():
    report = verify_deviation_theorem(identity_aep(4, 2), InputDistribution.uniform(4))
    assert report.trace_distance == pytest.approx(0, abs=1e-7)
    assert report.bound == 0
    assert report.passed


@pytest.mark.parametrize("N", [3, 5, 7])
def test_theorem_all_coset_uniform(N):
    for m in range(1, 5):
        for k in range(N):
            report = verify_deviation_theorem(coset_aep(N, m, k), InputDistribution.uniform(N))
            assert report.passed and report.fidelity_floor_ok


@pytest.mark.parametrize("n", [2, 4, 6])
def test_theorem_runway_random_inputs(n):
    inputs = [InputDistribution.random(1 << n, seed) for seed in range(20)]
    for p in range(1, n):
        for m in range(0, min(2, n - p) + 1):
            P = runway_aep(n, p, m, (5 * p + 3) % (1 << n))
            assert all(r.passed and r.fidelity_floor_ok for r in verify_many(P, inputs))


def test_permuted_overlap_matches_fidelity():
    P = runway_aep(5, 2, 2, 7)
    a = InputDistribution.random(32, 11)
    report = verify_deviation_theorem(P, a)
    assert permuted_overlap(P, a) == pytest.approx(report.fidelity, abs=1e-12)
    d, _ = fidelity_and_trace_distance(desired_output_state(P, a), actual_output_state(P, a))
    assert d == pytest.approx(report.fidelity, abs=1e-12)


def test_report_records_seed_and_ratio():
    P = coset_aep(5, 2, 3)
    report = verify_deviation_theorem(P, InputDistribution.random(5, 42))
    assert report.seed == 42
    assert report.deviation == deviation(P).deviation
    assert 0 <= report.ratio <= 1 + 1e-9


@settings(max_examples=40, deadline=None)
@given(N=st.integers(2, 9), m=st.integers(0, 3), seed=st.integers(0, 2 ** 31), data=st.data())
def test_theorem_property(N, m, seed, data):
    k = data.draw(st.integers(0, N - 1))
    report = verify_deviation_theorem(coset_aep(N, m, k), InputDistribution.random(N, seed))
    assert report.trace_distance <= 2 * math.sqrt(report.deviation) + 1e-9
    assert report.fidelity >= 1 - 2 * report.deviation - 1e-9


# -- subvector lemma ------------------------------------------------------------

def test_lemma_equal_vectors():
    rng = np.random.default_rng(0)
    u, _, _ = random_lemma_pair(8, rng)
    assert check_subvector_lemma(u, u, range(8))
    assert check_subvector_lemma(u, u, [])


def test_lemma_precondition():
    with pytest.raises(DomainError):
        check_subvector_lemma([1, 0], [0, 1], [0])
    with pytest.raises(DomainError):
        check_subvector_lemma([1, 0], [1, 0], [3])


@settings(max_examples=100, deadline=None)
@given(dim=st.integers(1, 64), seed=st.integers(0, 2 ** 31))
def test_lemma_property(dim, seed):
    u, v, S = random_lemma_pair(dim, np.random.default_rng(seed))
    assert check_subvector_lemma(u, v, S)
