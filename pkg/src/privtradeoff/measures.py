"""Privacy-leakage and distortion functionals on two-axis joints.

Leakage measures take a joint over (X, Z); distortion measures take a joint
over (Y, Z). Unbounded leakage is reported as ``math.inf``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .probability import (
    TOL,
    Alphabet,
    Channel,
    JointPmf,
    Tolerances,
    condition,
    conditional_entropy,
    entropy_array,
    mi_array,
)

PRIVACY_KINDS = ("mi", "max-leakage", "sibson", "ip", "dp", "max-leakage-swapped")
DISTORTION_KINDS = ("expected", "prob-error", "cond-entropy", "witness")


def _probs(joint) -> np.ndarray:
    p = joint.probs if isinstance(joint, JointPmf) else np.asarray(joint, dtype=float)
    if p.ndim != 2:
        raise ValueError("expected a two-axis joint")
    if p.sum() <= 0:
        raise ValueError("joint has empty support")
    return p


# --------------------------------------------------------------------------
# Adjacency for differential privacy

@dataclass(frozen=True)
class AdjacencyRelation:
    alphabet: Alphabet
    pairs: frozenset

    def __init__(self, alphabet, pairs):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        norm = set()
        for a, b in pairs:
            a, b = str(a), str(b)
            if a == b:
                raise ValueError(f"adjacency must be irreflexive, got ({a!r}, {b!r})")
            alphabet.index(a), alphabet.index(b)
            norm.add(frozenset((a, b)))
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "pairs", frozenset(norm))

    @classmethod
    def hamming(cls, alphabet: Alphabet) -> "AdjacencyRelation":
        """Hamming-distance-1 pairs over equal-length bit-string labels."""
        labels = alphabet.labels
        n = len(labels[0])
        if any(len(lab) != n or set(lab) - {"0", "1"} for lab in labels):
            raise ValueError("Hamming adjacency needs equal-length bit-string labels; pass pairs explicitly")
        pairs = [
            (a, b)
            for a, b in itertools.combinations(labels, 2)
            if sum(ca != cb for ca, cb in zip(a, b)) == 1
        ]
        return cls(alphabet, pairs)

    def index_pairs(self) -> list[tuple[int, int]]:
        out = []
        for pair in self.pairs:
            a, b = sorted(pair)
            out.append((self.alphabet.index(a), self.alphabet.index(b)))
        return sorted(out)

    def permuted(self, perm) -> "AdjacencyRelation":
        return AdjacencyRelation(self.alphabet.permuted(perm), [tuple(p) for p in self.pairs])


# --------------------------------------------------------------------------
# Privacy measures

def maximal_information_leakage(joint, tol: Tolerances = TOL) -> float:
    """H(X) - min over released z of H(X | Z = z)."""
    p = _probs(joint)
    px = p.sum(1)
    pz = p.sum(0)
    cond = [entropy_array(p[:, z] / pz[z]) for z in np.flatnonzero(pz > tol.support)]
    return max(entropy_array(px) - min(cond), 0.0)


def sibson_infinity(joint, tol: Tolerances = TOL) -> float:
    """log sum_z max_{x in supp} P(z|x)."""
    p = _probs(joint)
    ch = condition(JointPmf.from_array(p), 0, tol)
    rows = ch.rows[ch.present]
    return max(float(np.log(rows.max(axis=0).sum())), 0.0)


# log ratios this small are rounding residue of an exact 1
_ROUNDOFF = 64 * np.finfo(float).eps


def _snap(v: float) -> float:
    return 0.0 if v <= _ROUNDOFF else v


def _abs_log_ratio(num: float, den: float) -> float:
    # |ln(c/0)| = |ln 0| = inf, |ln(0/0)| = 0
    if num == 0 and den == 0:
        return 0.0
    if num == 0 or den == 0:
        return math.inf
    return abs(math.log(num / den))


def information_privacy(joint, tol: Tolerances = TOL) -> float:
    """max over supported (x, z) of |ln P(x,z) / (P(x) P(z))|."""
    p = _probs(joint)
    px, pz = p.sum(1), p.sum(0)
    xs = np.flatnonzero(px > tol.support)
    zs = np.flatnonzero(pz > tol.support)
    sub = p[np.ix_(xs, zs)]
    if np.any(sub <= tol.support):
        return math.inf
    ratio = sub / np.outer(px[xs], pz[zs])
    return _snap(float(np.abs(np.log(ratio)).max()))


def information_privacy_sets(joint, tol: Tolerances = TOL) -> float:
    """The same quantity maximised over all pairs of events (exponential; small alphabets only)."""
    p = _probs(joint)
    nx, nz = p.shape
    if nx > 12 or nz > 12:
        raise ValueError("subset enumeration limited to alphabets of size <= 12")
    px, pz = p.sum(1), p.sum(0)
    best = 0.0
    masks_x = [np.array(m, bool) for m in itertools.product([0, 1], repeat=nx) if any(m)]
    masks_z = [np.array(m, bool) for m in itertools.product([0, 1], repeat=nz) if any(m)]
    for a in masks_x:
        pa = px[a].sum()
        if pa <= tol.support:
            continue
        for b in masks_z:
            pb = pz[b].sum()
            if pb <= tol.support:
                continue
            pab = p[np.ix_(a, b)].sum()
            if pab <= tol.support:
                return math.inf
            best = max(best, abs(math.log(pab / (pa * pb))))
    return _snap(best)


def differential_privacy(channel: Channel, adjacency: AdjacencyRelation) -> float:
    """max over adjacent (x1, x2) and z of |ln P(z|x1) / P(z|x2)|.

    Pairs involving an absent row (input outside the support) are skipped.
    """
    if not adjacency.pairs:
        raise ValueError("differential privacy needs a nonempty adjacency relation")
    if adjacency.alphabet != channel.input_alphabet:
        raise ValueError("adjacency alphabet does not match the channel input alphabet")
    best = 0.0
    for i, j in adjacency.index_pairs():
        if not (channel.present[i] and channel.present[j]):
            continue
        for a, b in zip(channel.rows[i], channel.rows[j]):
            best = max(best, _abs_log_ratio(a, b))
            if best == math.inf:
                return best
    return best


def differential_privacy_joint(joint: JointPmf, adjacency: AdjacencyRelation | None = None,
                               tol: Tolerances = TOL) -> float:
    """DP of the channel P_{Z|X} extracted from a joint with full-support X marginal."""
    p = _probs(joint)
    if np.any(p.sum(1) <= tol.support):
        raise ValueError("DP from a joint needs every x to have positive probability")
    if not isinstance(joint, JointPmf):
        joint = JointPmf.from_array(p)
    if adjacency is None:
        adjacency = AdjacencyRelation.hamming(joint.axes[0])
    return differential_privacy(condition(joint, 0, tol), adjacency)


@dataclass(frozen=True)
class PrivacyMeasure:
    """A leakage functional J(X;Z).

    ``kind`` is one of ``mi``, ``max-leakage`` (I*), ``sibson`` (order-infinity
    Sibson MI), ``ip`` (information privacy), ``dp`` (differential privacy) or
    ``max-leakage-swapped`` (I* with the roles of X and Z exchanged).
    """

    kind: str = "mi"
    adjacency: AdjacencyRelation | None = None

    def __post_init__(self):
        if self.kind not in PRIVACY_KINDS:
            raise ValueError(f"unknown privacy measure {self.kind!r}; choose from {PRIVACY_KINDS}")

    @property
    def symmetric(self) -> bool:
        return self.kind in ("mi", "ip")

    def __call__(self, joint, tol: Tolerances = TOL) -> float:
        return leakage(self, joint, tol)

    def on_channel(self, channel: Channel, prior=None, tol: Tolerances = TOL) -> float:
        """Leakage of a mechanism P_{Z|X}; the prior is ignored for DP."""
        if self.kind == "dp":
            adj = self.adjacency or AdjacencyRelation.hamming(channel.input_alphabet)
            return differential_privacy(channel, adj)
        if prior is None:
            raise ValueError(f"{self.kind} needs the input distribution")
        return leakage(self, channel.joint(prior), tol)


def leakage(measure: PrivacyMeasure, joint, tol: Tolerances = TOL) -> float:
    kind = measure.kind
    if kind == "mi":
        return mi_array(_probs(joint))
    if kind == "max-leakage":
        return maximal_information_leakage(joint, tol)
    if kind == "max-leakage-swapped":
        return maximal_information_leakage(_probs(joint).T, tol)
    if kind == "sibson":
        return sibson_infinity(joint, tol)
    if kind == "ip":
        return information_privacy(joint, tol)
    if kind == "dp":
        if measure.adjacency is None and not isinstance(joint, JointPmf):
            raise ValueError("DP on a bare array needs an explicit adjacency relation")
        return differential_privacy_joint(joint, measure.adjacency, tol)
    raise AssertionError(kind)


# --------------------------------------------------------------------------
# Distortion measures

@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """A distortion functional D(P_{Y,Z}).

    ``expected`` needs a cost matrix over Y x Z, ``witness`` a target (Y, Z)
    joint: it scores 1 on joints within ``tol`` (max-abs) of the target and 2
    elsewhere.
    """

    kind: str = "prob-error"
    matrix: np.ndarray | None = None
    target: np.ndarray | None = None
    tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in DISTORTION_KINDS:
            raise ValueError(f"unknown distortion {self.kind!r}; choose from {DISTORTION_KINDS}")
        if self.kind == "expected":
            if self.matrix is None:
                raise ValueError("expected distortion needs a cost matrix")
            m = np.array(self.matrix, dtype=float)
            if m.ndim != 2 or np.any(m < 0) or not np.all(np.isfinite(m)):
                raise ValueError("cost matrix must be a finite nonnegative 2-D array")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if self.kind == "witness":
            if self.target is None:
                raise ValueError("witness distortion needs a target joint")
            t = self.target.probs if isinstance(self.target, JointPmf) else np.array(self.target, float)
            t = JointPmf.from_array(t).probs
            object.__setattr__(self, "target", t)

    @classmethod
    def expected(cls, matrix) -> "DistortionMeasure":
        return cls("expected", matrix=matrix)

    @classmethod
    def witness(cls, target, tol: float = 1e-6) -> "DistortionMeasure":
        return cls("witness", target=target, tol=tol)

    @property
    def linear(self) -> bool:
        return self.kind in ("expected", "prob-error")

    def cost_matrix(self, ny: int, nz: int, y_alphabet: Alphabet | None = None,
                    z_alphabet: Alphabet | None = None) -> np.ndarray:
        """d(y, z) for the linear kinds."""
        if self.kind == "expected":
            if self.matrix.shape != (ny, nz):
                raise ValueError(f"cost matrix shape {self.matrix.shape} does not match {(ny, nz)}")
            return self.matrix
        if self.kind == "prob-error":
            if y_alphabet is not None and z_alphabet is not None:
                if y_alphabet.labels != z_alphabet.labels:
                    raise ValueError("probability of error needs the Z alphabet to equal the Y alphabet")
            elif ny != nz:
                raise ValueError("probability of error needs |Z| = |Y|")
            return 1.0 - np.eye(ny)
        raise ValueError(f"{self.kind} distortion is not linear")

    def __call__(self, joint) -> float:
        return distortion(self, joint)


def distortion(measure: DistortionMeasure, joint) -> float:
    p = _probs(joint)
    if measure.linear:
        axes = joint.axes if isinstance(joint, JointPmf) else (None, None)
        d = measure.cost_matrix(*p.shape, *axes)
        return float((d * p).sum())
    if measure.kind == "cond-entropy":
        return conditional_entropy(p, given_axis=1)
    if measure.target.shape != p.shape:
        raise ValueError("witness target shape does not match the joint")
    return 1.0 if np.abs(p - measure.target).max() <= measure.tol else 2.0
