"""Executable post-processing and linkage checks for leakage measures."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .measures import AdjacencyRelation, PrivacyMeasure
from .probability import (
    TOL,
    Alphabet,
    Channel,
    JointPmf,
    Pmf,
    Tolerances,
    condition,
    is_markov,
    marginal,
)

AXIOM_SLACK = 1e-9

# Inequalities each measure is proven to satisfy; anything else is only observed.
GUARANTEED = {
    "post-processing": {"mi", "ip", "sibson", "max-leakage", "dp"},
    "linkage": {"mi", "ip", "sibson"},
}


@dataclass(frozen=True)
class MarkovTriple:
    """A -> B -> C, kept together with the pieces it was built from."""

    joint: JointPmf
    p_ab: JointPmf
    channel_cb: Channel

    @classmethod
    def from_parts(cls, p_ab: JointPmf, channel_cb: Channel) -> "MarkovTriple":
        if channel_cb.input_alphabet != p_ab.axes[1]:
            raise ValueError("P_{C|B} input alphabet must match B")
        probs = p_ab.probs[:, :, None] * channel_cb.matrix[None, :, :]
        joint = JointPmf([p_ab.axes[0], p_ab.axes[1], channel_cb.output_alphabet], probs)
        return cls(joint, p_ab, channel_cb)

    @property
    def channel_ba(self) -> Channel:
        return condition(self.p_ab, 0)

    @property
    def channel_ca(self) -> Channel:
        return self.channel_ba.compose(self.channel_cb)

    def pair(self, i: int, j: int) -> JointPmf:
        return marginal(self.joint, (i, j))

    def permuted(self, perms) -> "MarkovTriple":
        pa, pb, pc = (np.asarray(p, int) for p in perms)
        p_ab = self.p_ab.permuted([pa, pb])
        ch = self.channel_cb
        rows = ch.rows[np.ix_(pb, pc)]
        channel_cb = Channel(ch.input_alphabet.permuted(pb), ch.output_alphabet.permuted(pc), rows, ch.present[pb])
        return MarkovTriple.from_parts(p_ab, channel_cb)


@dataclass(frozen=True)
class AxiomReport:
    measure: str
    inequality: str
    lhs: float
    rhs: float
    holds: bool
    margin: float

    def verdict(self, expected_violation: bool = False) -> str:
        if self.holds:
            return "holds"
        if expected_violation:
            return "expected-violation"
        if self.measure in GUARANTEED[self.inequality]:
            return "violation"
        return "unguaranteed-violation"

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs", "margin"):
            d[k] = "inf" if d[k] == np.inf else ("-inf" if d[k] == -np.inf else d[k])
        return d


def _report(measure: PrivacyMeasure, inequality: str, lhs: float, rhs: float) -> AxiomReport:
    if lhs == rhs:  # covers inf == inf
        margin = 0.0
    else:
        margin = rhs - lhs
    return AxiomReport(measure.kind, inequality, lhs, rhs, bool(margin >= -AXIOM_SLACK), margin)


def _dp_adjacency(measure: PrivacyMeasure, alphabet: Alphabet) -> AdjacencyRelation:
    if measure.adjacency is not None and measure.adjacency.alphabet == alphabet:
        return measure.adjacency
    return AdjacencyRelation.hamming(alphabet)


def _dp(measure: PrivacyMeasure, channel: Channel) -> float:
    m = PrivacyMeasure("dp", _dp_adjacency(measure, channel.input_alphabet))
    return m.on_channel(channel)


def check_post_processing(measure: PrivacyMeasure, triple: MarkovTriple) -> AxiomReport:
    """J(A;B) >= J(A;C)."""
    if measure.kind == "dp":
        lhs, rhs = _dp(measure, triple.channel_ca), _dp(measure, triple.channel_ba)
    else:
        lhs, rhs = measure(triple.pair(0, 2)), measure(triple.pair(0, 1))
    return _report(measure, "post-processing", lhs, rhs)


def check_linkage(measure: PrivacyMeasure, triple: MarkovTriple) -> AxiomReport:
    """J(B;C) >= J(A;C)."""
    if measure.kind == "dp":
        lhs, rhs = _dp(measure, triple.channel_ca), _dp(measure, triple.channel_cb)
    else:
        lhs, rhs = measure(triple.pair(0, 2)), measure(triple.pair(1, 2))
    return _report(measure, "linkage", lhs, rhs)


def check_isomorphism_invariance(measure: PrivacyMeasure, joint: JointPmf, permutations,
                                 atol: float = 1e-10) -> bool:
    """Relabel both axes and compare the leakage (DP adjacency follows the relabelling)."""
    permuted = joint.permuted(permutations)
    if measure.kind == "dp":
        adj = measure.adjacency or AdjacencyRelation.hamming(joint.axes[0])
        before = PrivacyMeasure("dp", adj)(joint)
        after = PrivacyMeasure("dp", adj.permuted(permutations[0]))(permuted)
    else:
        before, after = measure(joint), measure(permuted)
    if before == after:
        return True
    return abs(before - after) <= atol


# --------------------------------------------------------------------------
# Constructions

def indicator_chain_counterexample() -> MarkovTriple:
    """A ternary (1/2, 1/4, 1/4), B = 1{A != 0}, C = B."""
    a = Pmf(["0", "1", "2"], [0.5, 0.25, 0.25])
    bits = Alphabet(["0", "1"])
    b_of_a = Channel.deterministic(a.alphabet, bits, lambda s: "0" if s == "0" else "1")
    return MarkovTriple.from_parts(b_of_a.joint(a), Channel.identity(bits))


def dp_counterexample(q: float, r: float, s: float, p_a: Pmf | None = None):
    """Databases A, B in {0,1}^2 with B1 = B2 = A1 or A2, and a binary release of B.

    Returns ``(p_a, b_map, mech)``; ``p_a`` defaults to uniform.
    """
    if not 0 < q < r < s < 1:
        raise ValueError(f"need 0 < q < r < s < 1, got {(q, r, s)}")
    dbs = Alphabet(["00", "01", "10", "11"])
    if p_a is None:
        p_a = Pmf.uniform(dbs)
    b_map = Channel.deterministic(dbs, dbs, lambda a: "11" if "1" in a else "00")
    p1 = {"00": q, "11": s, "01": r, "10": r}
    rows = [[1 - p1[b], p1[b]] for b in dbs]
    mech = Channel(dbs, Alphabet(["0", "1"]), rows)
    return p_a, b_map, mech


def dp_counterexample_triple(q: float, r: float, s: float) -> MarkovTriple:
    p_a, b_map, mech = dp_counterexample(q, r, s)
    return MarkovTriple.from_parts(b_map.joint(p_a), mech)


def random_markov_triple(seed, sizes=(3, 3, 3), a_alphabet: Alphabet | None = None,
                         tol: Tolerances = TOL) -> MarkovTriple:
    """P_{A,B} and each row of P_{C|B} drawn from flat Dirichlet laws."""
    na, nb, nc = sizes
    if min(sizes) < 1:
        raise ValueError("alphabet sizes must be >= 1")
    rng = np.random.default_rng(seed)
    p_ab = rng.dirichlet(np.ones(na * nb)).reshape(na, nb)
    rows = rng.dirichlet(np.ones(nc), size=nb)
    a_alph = a_alphabet or Alphabet([f"a{i}" for i in range(na)])
    p_ab = JointPmf([a_alph, Alphabet([f"b{i}" for i in range(nb)])], p_ab)
    ch = Channel(p_ab.axes[1], Alphabet([f"c{i}" for i in range(nc)]), rows)
    triple = MarkovTriple.from_parts(p_ab, ch)
    assert is_markov(triple.joint, tol)
    return triple


def random_dp_triple(seed, nc: int = 2) -> MarkovTriple:
    """Random chain whose A and B both live on {0,1}^2 (Hamming adjacency on each)."""
    rng = np.random.default_rng(seed)
    dbs = Alphabet(["00", "01", "10", "11"])
    p_ab = JointPmf([dbs, dbs], rng.dirichlet(np.ones(16)).reshape(4, 4))
    ch = Channel(dbs, Alphabet([f"c{i}" for i in range(nc)]), rng.dirichlet(np.ones(nc), size=4))
    return MarkovTriple.from_parts(p_ab, ch)
