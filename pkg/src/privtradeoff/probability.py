"""Finite-alphabet distributions, channels and information quantities.

Everything here works in nats. Values are immutable once built: the
underlying arrays are flagged read-only at construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class Tolerances:
    pmf: float = 1e-9
    support: float = 1e-12
    info: float = 1e-9

    def __post_init__(self):
        if min(self.pmf, self.support, self.info) <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.support >= self.pmf:
            raise ValueError("support tolerance must be below the pmf tolerance")


TOL = Tolerances()


def to_bits(nats: float) -> float:
    return nats / LN2


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]

    def __init__(self, labels: Sequence):
        labels = tuple(str(lab) for lab in labels)
        if not labels:
            raise ValueError("alphabet must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in alphabet {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def range(cls, n: int) -> "Alphabet":
        return cls([str(i) for i in range(n)])

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label) -> int:
        return self.labels.index(str(label))

    def product(self, other: "Alphabet") -> "Alphabet":
        """Alphabet of pairs, row-major, labels joined with a comma."""
        return Alphabet([f"{a},{b}" for a in self.labels for b in other.labels])

    def permuted(self, perm) -> "Alphabet":
        return Alphabet([self.labels[i] for i in perm])


def _normalize(probs: np.ndarray, tol: Tolerances) -> np.ndarray:
    if not np.all(np.isfinite(probs)):
        raise ValueError("probabilities must be finite")
    if np.any(probs < 0):
        if probs.min() < -tol.pmf:
            raise ValueError(f"negative probability {probs.min():.3g}")
        probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > tol.pmf:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    return probs / total


def _same(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.array_equal(a, b, equal_nan=True))


@dataclass(frozen=True, eq=False)
class Pmf:
    alphabet: Alphabet
    probs: np.ndarray

    def __init__(self, alphabet, probs, tol: Tolerances = TOL):
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (len(alphabet),):
            raise ValueError(f"expected {len(alphabet)} probabilities, got shape {probs.shape}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", _frozen(_normalize(probs, tol)))

    @classmethod
    def uniform(cls, n_or_alphabet) -> "Pmf":
        alph = n_or_alphabet if isinstance(n_or_alphabet, Alphabet) else Alphabet.range(n_or_alphabet)
        return cls(alph, np.full(len(alph), 1.0 / len(alph)))

    def __len__(self):
        return len(self.alphabet)

    def __eq__(self, other):
        return isinstance(other, Pmf) and self.alphabet == other.alphabet and _same(self.probs, other.probs)

    def __hash__(self):
        return hash((self.alphabet, self.probs.tobytes()))


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Dense joint pmf; axis order is part of its identity."""

    axes: tuple[Alphabet, ...]
    probs: np.ndarray

    def __init__(self, axes, probs, tol: Tolerances = TOL):
        axes = tuple(a if isinstance(a, Alphabet) else Alphabet(a) for a in axes)
        probs = np.asarray(probs, dtype=float)
        if len(axes) < 2:
            raise ValueError("a joint pmf needs at least two axes")
        if probs.shape != tuple(len(a) for a in axes):
            raise ValueError(
                f"probability tensor shape {probs.shape} does not match alphabets "
                f"{tuple(len(a) for a in axes)}"
            )
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", _frozen(_normalize(probs, tol)))

    @classmethod
    def from_array(cls, probs, tol: Tolerances = TOL) -> "JointPmf":
        probs = np.asarray(probs, dtype=float)
        return cls([Alphabet.range(n) for n in probs.shape], probs, tol)

    @classmethod
    def product(cls, *pmfs: Pmf) -> "JointPmf":
        probs = pmfs[0].probs
        for p in pmfs[1:]:
            probs = np.multiply.outer(probs, p.probs)
        return cls([p.alphabet for p in pmfs], probs)

    def __eq__(self, other):
        return isinstance(other, JointPmf) and self.axes == other.axes and _same(self.probs, other.probs)

    def __hash__(self):
        return hash((self.axes, self.probs.tobytes()))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.probs.shape

    def swapped(self) -> "JointPmf":
        """Reverse the axis order."""
        return JointPmf(self.axes[::-1], self.probs.T)

    def permuted(self, perms) -> "JointPmf":
        """Relabel each axis by an index permutation (new position i holds old perm[i])."""
        probs = self.probs
        axes = []
        for k, (alph, perm) in enumerate(zip(self.axes, perms)):
            perm = np.asarray(perm, dtype=int)
            if sorted(perm.tolist()) != list(range(len(alph))):
                raise ValueError(f"axis {k}: {perm.tolist()} is not a bijection")
            probs = np.take(probs, perm, axis=k)
            axes.append(alph.permuted(perm))
        return JointPmf(axes, probs)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic kernel. Rows for inputs outside the support may be absent (NaN)."""

    input_alphabet: Alphabet
    output_alphabet: Alphabet
    rows: np.ndarray
    present: np.ndarray = field(repr=False)

    def __init__(self, input_alphabet, output_alphabet, rows, present=None, tol: Tolerances = TOL):
        if not isinstance(input_alphabet, Alphabet):
            input_alphabet = Alphabet(input_alphabet)
        if not isinstance(output_alphabet, Alphabet):
            output_alphabet = Alphabet(output_alphabet)
        rows = np.array(rows, dtype=float)
        if rows.shape != (len(input_alphabet), len(output_alphabet)):
            raise ValueError(
                f"channel rows have shape {rows.shape}, expected "
                f"{(len(input_alphabet), len(output_alphabet))}"
            )
        present = np.ones(len(input_alphabet), bool) if present is None else np.asarray(present, bool)
        for i in np.flatnonzero(present):
            try:
                rows[i] = _normalize(rows[i], tol)
            except ValueError as exc:
                raise ValueError(f"row {input_alphabet.labels[i]!r}: {exc}") from None
        rows[~present] = np.nan
        present = present.copy()
        present.setflags(write=False)
        object.__setattr__(self, "input_alphabet", input_alphabet)
        object.__setattr__(self, "output_alphabet", output_alphabet)
        object.__setattr__(self, "rows", _frozen(rows))
        object.__setattr__(self, "present", present)

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Channel":
        return cls(alphabet, alphabet, np.eye(len(alphabet)))

    @classmethod
    def constant(cls, input_alphabet: Alphabet, q: Pmf) -> "Channel":
        return cls(input_alphabet, q.alphabet, np.tile(q.probs, (len(input_alphabet), 1)))

    @classmethod
    def deterministic(cls, input_alphabet: Alphabet, output_alphabet: Alphabet, fn) -> "Channel":
        rows = np.zeros((len(input_alphabet), len(output_alphabet)))
        for i, a in enumerate(input_alphabet):
            rows[i, output_alphabet.index(fn(a))] = 1.0
        return cls(input_alphabet, output_alphabet, rows)

    def __eq__(self, other):
        return (isinstance(other, Channel) and self.input_alphabet == other.input_alphabet
                and self.output_alphabet == other.output_alphabet and _same(self.rows, other.rows))

    def __hash__(self):
        return hash((self.input_alphabet, self.output_alphabet, self.rows.tobytes()))

    @property
    def complete(self) -> bool:
        return bool(self.present.all())

    @property
    def matrix(self) -> np.ndarray:
        """Rows with absent entries replaced by zeros (safe for composition)."""
        return np.nan_to_num(self.rows, nan=0.0)

    def compose(self, other: "Channel") -> "Channel":
        """self followed by other: P_{C|A} = P_{B|A} P_{C|B}."""
        if self.output_alphabet != other.input_alphabet:
            raise ValueError("alphabet mismatch in channel composition")
        return Channel(self.input_alphabet, other.output_alphabet, self.matrix @ other.matrix, self.present)

    def joint(self, p: Pmf) -> JointPmf:
        """P_A x P_{B|A} as a joint over (A, B)."""
        if p.alphabet != self.input_alphabet:
            raise ValueError("input pmf alphabet does not match channel")
        mask = p.probs > 0
        if np.any(mask & ~self.present):
            raise ValueError("channel row absent for an input with positive mass")
        return JointPmf([self.input_alphabet, self.output_alphabet], p.probs[:, None] * self.matrix)


# --------------------------------------------------------------------------
# Algebra

def marginal(joint: JointPmf, keep_axes) -> JointPmf | Pmf:
    """Sum out every axis not listed in ``keep_axes`` (kept in the given order)."""
    if isinstance(keep_axes, int):
        keep_axes = (keep_axes,)
    keep_axes = tuple(keep_axes)
    for k in keep_axes:
        if not 0 <= k < joint.ndim:
            raise ValueError(f"axis {k} out of range for a {joint.ndim}-axis joint")
    if len(set(keep_axes)) != len(keep_axes) or not keep_axes:
        raise ValueError(f"invalid axes {keep_axes}")
    drop = tuple(k for k in range(joint.ndim) if k not in keep_axes)
    probs = joint.probs.sum(axis=drop) if drop else joint.probs
    kept_sorted = sorted(keep_axes)
    probs = np.transpose(probs, [kept_sorted.index(k) for k in keep_axes])
    axes = [joint.axes[k] for k in keep_axes]
    if len(axes) == 1:
        return Pmf(axes[0], probs)
    return JointPmf(axes, probs)


def condition(joint: JointPmf, given_axis: int = 0, tol: Tolerances = TOL) -> Channel:
    """P_{other|given} for a two-axis joint; rows off the support are absent."""
    if joint.ndim != 2:
        raise ValueError("condition expects a two-axis joint")
    p = np.moveaxis(joint.probs, given_axis, 0)
    given = p.sum(axis=1)
    present = given > tol.support
    rows = np.full(p.shape, np.nan)
    rows[present] = p[present] / given[present, None]
    return Channel(joint.axes[given_axis], joint.axes[1 - given_axis], rows, present)


def push_mechanism(data: JointPmf, obs: Channel, mech: Channel) -> JointPmf:
    """Joint of (X, Y, Z) for (X,Y) -> W -> Z, with W summed out."""
    if data.ndim != 2:
        raise ValueError("data model must be a joint over (X, Y)")
    xy = data.axes[0].product(data.axes[1])
    if obs.input_alphabet != xy:
        raise ValueError("observation channel input must be the (X,Y) product alphabet")
    if obs.output_alphabet != mech.input_alphabet:
        raise ValueError("mechanism input alphabet does not match observation output")
    nx, ny = data.shape
    o = obs.matrix.reshape(nx, ny, -1)
    probs = np.einsum("xy,xyw,wz->xyz", data.probs, o, mech.matrix)
    return JointPmf([data.axes[0], data.axes[1], mech.output_alphabet], probs)


# --------------------------------------------------------------------------
# Information quantities (nats). The array-level helpers are used by the solver.

def _plogp(p: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    out = np.zeros_like(p, dtype=float)
    mask = p > tol.support
    out[mask] = p[mask] * np.log(p[mask])
    return out


def entropy_array(p: np.ndarray) -> float:
    return float(-_plogp(np.asarray(p, dtype=float)).sum())


def mi_array(pxz: np.ndarray) -> float:
    pxz = np.asarray(pxz, dtype=float)
    val = entropy_array(pxz.sum(1)) + entropy_array(pxz.sum(0)) - entropy_array(pxz)
    return max(val, 0.0)


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    probs = p.probs if isinstance(p, (Pmf, JointPmf)) else p
    return entropy_array(probs)


def mutual_information(joint) -> float:
    probs = joint.probs if isinstance(joint, JointPmf) else np.asarray(joint, float)
    if probs.ndim != 2:
        raise ValueError("mutual information needs a two-axis joint")
    return mi_array(probs)


def conditional_entropy(joint, given_axis: int = 1) -> float:
    """H(other | given) of a two-axis joint."""
    probs = joint.probs if isinstance(joint, JointPmf) else np.asarray(joint, float)
    return entropy_array(probs) - entropy_array(probs.sum(axis=1 - given_axis))


def conditional_mutual_information(joint) -> float:
    """I(A;C|B) for a joint over (A, B, C)."""
    p = joint.probs if isinstance(joint, JointPmf) else np.asarray(joint, float)
    if p.ndim != 3:
        raise ValueError("conditional mutual information needs a three-axis joint")
    val = (
        entropy_array(p.sum(axis=2))
        + entropy_array(p.sum(axis=0))
        - entropy_array(p.sum(axis=(0, 2)))
        - entropy_array(p)
    )
    return max(val, 0.0)


def is_markov(joint, tol: Tolerances = TOL) -> bool:
    """True when A -> B -> C, judged by I(A;C|B) <= tol.info."""
    return conditional_mutual_information(joint) <= tol.info


# --------------------------------------------------------------------------
# JSON I/O

def joint_from_dict(d: dict) -> JointPmf:
    if "w_labels" in d:
        axes = [d["x_labels"], d["y_labels"], d["w_labels"]]
    else:
        axes = [d["x_labels"], d["y_labels"]]
    return JointPmf(axes, np.array(d["pmf"], dtype=float))


def joint_to_dict(joint: JointPmf) -> dict:
    keys = ["x_labels", "y_labels", "w_labels"]
    if joint.ndim > 3:
        raise ValueError("only two- and three-axis joints have a JSON form")
    d = {k: list(a.labels) for k, a in zip(keys, joint.axes)}
    d["pmf"] = joint.probs.tolist()
    return d


def channel_from_dict(d: dict) -> Channel:
    rows = [[np.nan if v is None else v for v in row] for row in d["rows"]]
    rows = np.array(rows, dtype=float)
    present = ~np.isnan(rows).any(axis=1)
    return Channel(d["in_labels"], d["out_labels"], rows, present)


def channel_to_dict(ch: Channel) -> dict:
    rows = [None if not ok else row.tolist() for ok, row in zip(ch.present, ch.rows)]
    rows = [r if r is not None else [None] * len(ch.output_alphabet) for r in rows]
    return {"in_labels": list(ch.input_alphabet.labels), "out_labels": list(ch.output_alphabet.labels), "rows": rows}


def load_joint(path) -> JointPmf:
    with open(path) as fh:
        return joint_from_dict(json.load(fh))


def load_channel(path) -> Channel:
    with open(path) as fh:
        return channel_from_dict(json.load(fh))
