import math

import numpy as np
import pytest
from hypothesis import given, settings

import oracles
from conftest import joints, random_joint
from privtradeoff.axioms import indicator_chain_counterexample
from privtradeoff.measures import (
    AdjacencyRelation,
    DistortionMeasure,
    PrivacyMeasure,
    differential_privacy,
    distortion,
    information_privacy,
    information_privacy_sets,
    leakage,
    maximal_information_leakage,
    sibson_infinity,
)
from privtradeoff.probability import Alphabet, Channel, JointPmf, Pmf, entropy, marginal, to_bits

PRODUCT = JointPmf.product(Pmf(["a", "b"], [0.3, 0.7]), Pmf(["u", "v", "w"], [0.2, 0.3, 0.5]))
COPY2 = JointPmf.from_array(np.eye(2) / 2)


@pytest.mark.parametrize("kind", ["mi", "max-leakage", "sibson", "ip", "max-leakage-swapped"])
def test_independent_release_leaks_nothing(kind):
    assert leakage(PrivacyMeasure(kind), PRODUCT) == pytest.approx(0.0, abs=1e-15)


def test_max_leakage_on_indicator_chain():
    t = indicator_chain_counterexample()
    az, bz = t.pair(0, 2), t.pair(1, 2)
    assert to_bits(maximal_information_leakage(az)) == pytest.approx(1.5, abs=1e-12)
    assert to_bits(maximal_information_leakage(bz)) == pytest.approx(1.0, abs=1e-12)
    # some release value pins the secret down completely, so I* = H(X)
    assert maximal_information_leakage(az) == pytest.approx(entropy(marginal(az, 0)), abs=1e-15)


def test_max_leakage_matches_enumeration(rng):
    for _ in range(20):
        j = random_joint(rng, (3, 3))
        assert maximal_information_leakage(j) == pytest.approx(oracles.max_leakage(j.probs.tolist()), abs=1e-12)


def test_ip_on_copied_bit():
    # diagonal cells have posterior/prior ratio 2, but off-diagonal cells are in-support zeros
    p = COPY2.probs
    assert abs(math.log(p[0, 0] / (0.5 * 0.5))) == pytest.approx(math.log(2), abs=1e-15)
    assert information_privacy(COPY2) == math.inf
    noisy = JointPmf.from_array(np.array([[0.9, 0.1], [0.1, 0.9]]) / 2)
    assert information_privacy(noisy) == pytest.approx(oracles.ip(noisy.probs.tolist()), abs=1e-15)
    assert information_privacy(noisy) == pytest.approx(math.log(5), abs=1e-15)  # |ln 0.2| beats ln 1.8


def test_sibson_examples():
    assert sibson_infinity(PRODUCT) == pytest.approx(0.0, abs=1e-15)
    for m in (2, 3, 7):
        assert sibson_infinity(JointPmf.from_array(np.eye(m) / m)) == pytest.approx(math.log(m), abs=1e-14)
    bsc = np.array([[0.9, 0.1], [0.1, 0.9]]) / 2
    assert sibson_infinity(bsc) == pytest.approx(oracles.LN18, abs=1e-15)


def test_ip_unbounded_on_zero_cell():
    j = JointPmf.from_array([[0.5, 0.0], [0.25, 0.25]])
    assert information_privacy(j) == math.inf
    assert information_privacy_sets(j) == math.inf


def test_dp_randomized_response():
    bits = Alphabet(["0", "1"])
    rr = Channel(bits, bits, [[0.75, 0.25], [0.25, 0.75]])
    adj = AdjacencyRelation.hamming(bits)
    assert differential_privacy(rr, adj) == pytest.approx(oracles.LN3, abs=1e-15)
    assert differential_privacy(Channel.identity(bits), adj) == math.inf


def test_dp_ignores_zero_over_zero():
    bits = Alphabet(["0", "1"])
    ch = Channel(bits, Alphabet(["a", "b", "c"]), [[0.5, 0.5, 0.0], [0.25, 0.75, 0.0]])
    assert differential_privacy(ch, AdjacencyRelation.hamming(bits)) == pytest.approx(math.log(2), abs=1e-15)


def test_dp_skips_absent_rows():
    dbs = Alphabet(["00", "01", "10", "11"])
    rows = np.array([[0.5, 0.5], [np.nan, np.nan], [0.6, 0.4], [0.5, 0.5]])
    ch = Channel(dbs, ["0", "1"], rows, present=[True, False, True, True])
    adj = AdjacencyRelation.hamming(dbs)
    expected = oracles.dp(rows.tolist(), [(0, 2), (2, 3)])
    assert differential_privacy(ch, adj) == pytest.approx(expected, abs=1e-15)


def test_hamming_adjacency_pairs():
    adj = AdjacencyRelation.hamming(Alphabet(["00", "01", "10", "11"]))
    assert adj.index_pairs() == [(0, 1), (0, 2), (1, 3), (2, 3)]
    with pytest.raises(ValueError):
        AdjacencyRelation.hamming(Alphabet(["a", "b"]))
    with pytest.raises(ValueError):
        AdjacencyRelation(Alphabet(["a", "b"]), [("a", "a")])


@settings(max_examples=60, deadline=None)
@given(joints(max_size=4, sparse=True))
def test_measures_match_loop_oracles(j):
    p = j.probs.tolist()
    assert leakage(PrivacyMeasure("max-leakage"), j) == pytest.approx(oracles.max_leakage(p), abs=1e-12)
    assert leakage(PrivacyMeasure("sibson"), j) == pytest.approx(oracles.sibson(p), abs=1e-12)
    ref = oracles.ip(p)
    got = leakage(PrivacyMeasure("ip"), j)
    assert got == ref if math.isinf(ref) else got == pytest.approx(ref, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(joints(max_size=4))
def test_measure_ordering(j):
    # I <= I_inf (Sibson) and I <= IP hold for every joint
    mi = leakage(PrivacyMeasure("mi"), j)
    assert mi <= leakage(PrivacyMeasure("sibson"), j) + 1e-12
    assert mi <= leakage(PrivacyMeasure("ip"), j) + 1e-12


@settings(max_examples=60, deadline=None)
@given(joints(max_size=3, sparse=True))
def test_event_level_ip_equals_singletons(j):
    a, b = information_privacy(j), information_privacy_sets(j)
    assert a == b if math.isinf(a) else b == pytest.approx(a, abs=1e-10)


def test_privacy_measure_rejects_unknown():
    with pytest.raises(ValueError):
        PrivacyMeasure("entropy")


def test_on_channel_needs_prior():
    bits = Alphabet(["0", "1"])
    ch = Channel(bits, bits, [[0.75, 0.25], [0.25, 0.75]])
    with pytest.raises(ValueError):
        PrivacyMeasure("mi").on_channel(ch)
    assert PrivacyMeasure("dp").on_channel(ch) == pytest.approx(oracles.LN3)
    assert PrivacyMeasure("mi").on_channel(ch, Pmf.uniform(bits)) == pytest.approx(
        oracles.mi([[0.375, 0.125], [0.125, 0.375]]), abs=1e-15)


def test_distortion_examples():
    pe = DistortionMeasure("prob-error")
    assert distortion(pe, JointPmf.from_array(np.diag([0.2, 0.3, 0.5]))) == 0.0
    for m in (2, 3, 5):
        indep = JointPmf.product(Pmf.uniform(m), Pmf.uniform(m))
        assert distortion(pe, indep) == pytest.approx(1 - 1 / m, abs=1e-15)
    py = Pmf(Alphabet.range(3), [0.2, 0.3, 0.5])
    indep = JointPmf.product(py, Pmf.uniform(2))
    assert distortion(DistortionMeasure("cond-entropy"), indep) == pytest.approx(entropy(py), abs=1e-15)


def test_expected_distortion_linear(rng):
    d = DistortionMeasure.expected(rng.uniform(0, 3, (3, 4)))
    p, q = random_joint(rng, (3, 4)), random_joint(rng, (3, 4))
    a = 0.3
    mix = JointPmf.from_array(a * p.probs + (1 - a) * q.probs)
    assert d(mix) == pytest.approx(a * d(p) + (1 - a) * d(q), abs=1e-14)


def test_expected_distortion_validation():
    with pytest.raises(ValueError):
        DistortionMeasure.expected([[0.0, -1.0]])
    with pytest.raises(ValueError):
        DistortionMeasure("expected")
    with pytest.raises(ValueError):
        DistortionMeasure.expected(np.ones((2, 2)))(JointPmf.from_array(np.full((2, 3), 1 / 6)))


def test_prob_error_requires_matching_alphabets():
    j = JointPmf([["a", "b"], ["a", "c"]], np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        DistortionMeasure("prob-error")(j)


def test_witness_indicator():
    target = np.array([[0.4, 0.1], [0.2, 0.3]])
    w = DistortionMeasure.witness(target)
    assert w(JointPmf.from_array(target)) == 1.0
    assert w(JointPmf.from_array(target + np.array([[1e-3, -1e-3], [0, 0]]))) == 2.0
