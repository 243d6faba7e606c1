"""Gacs-Korner common part and the witnesses separating full data from output perturbation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probability import (
    TOL,
    Alphabet,
    Channel,
    JointPmf,
    Pmf,
    Tolerances,
    conditional_mutual_information,
    entropy,
    mutual_information,
)

NULL_COMPONENT = "null"


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class CommonPart:
    u_alphabet: Alphabet
    u_of_x: dict
    u_of_y: dict
    p_u: Pmf

    @property
    def entropy(self) -> float:
        return entropy(self.p_u)


def common_part(p_xy: JointPmf, tol: Tolerances = TOL) -> CommonPart:
    """Connected components of the support graph, labelled u0, u1, ... in order of first x."""
    p = p_xy.probs
    nx, ny = p.shape
    uf = UnionFind(nx + ny)
    for x, y in zip(*np.nonzero(p > tol.support)):
        uf.union(int(x), nx + int(y))
    px, py = p.sum(1), p.sum(0)
    labels: dict[int, str] = {}
    for node in range(nx + ny):
        mass = px[node] if node < nx else py[node - nx]
        if mass > tol.support:
            root = uf.find(node)
            labels.setdefault(root, f"u{len(labels)}")
    u_alph = Alphabet(list(labels.values()))

    def label(node, mass):
        return labels[uf.find(node)] if mass > tol.support else NULL_COMPONENT

    u_of_x = {xl: label(i, px[i]) for i, xl in enumerate(p_xy.axes[0])}
    u_of_y = {yl: label(nx + j, py[j]) for j, yl in enumerate(p_xy.axes[1])}
    p_u = np.zeros(len(u_alph))
    for i, xl in enumerate(p_xy.axes[0]):
        if u_of_x[xl] != NULL_COMPONENT:
            p_u[u_alph.index(u_of_x[xl])] += px[i]
    return CommonPart(u_alph, u_of_x, u_of_y, Pmf(u_alph, p_u))


def near_threshold_mass(p_xy: JointPmf, tol: Tolerances = TOL) -> bool:
    """Any entry whose classification as an edge is fragile."""
    p = p_xy.probs
    return bool(np.any((p > tol.support) & (p < 10 * tol.support)))


def gk_common_information(p_xy: JointPmf, tol: Tolerances = TOL) -> float:
    return common_part(p_xy, tol).entropy


def xuy_joint(p_xy: JointPmf, cp: CommonPart | None = None) -> JointPmf:
    """P_{X,U,Y} with U the common part."""
    cp = cp or common_part(p_xy)
    nx, ny = p_xy.shape
    probs = np.zeros((nx, len(cp.u_alphabet), ny))
    for i, xl in enumerate(p_xy.axes[0]):
        u = cp.u_of_x[xl]
        if u != NULL_COMPONENT:
            probs[i, cp.u_alphabet.index(u), :] = p_xy.probs[i]
    return JointPmf([p_xy.axes[0], cp.u_alphabet, p_xy.axes[1]], probs)


def ci_equals_mi(p_xy: JointPmf, tol: Tolerances = TOL) -> bool:
    """C(X;Y) = I(X;Y), decided through I(X;Y|U) = 0."""
    return conditional_mutual_information(xuy_joint(p_xy, common_part(p_xy, tol))) <= tol.info


def common_part_witness(p_xy: JointPmf, tol: Tolerances = TOL):
    """Lexicographically first (x0, x1, y0, y1), as indices, or None.

    y0 != y1 both reachable from x0, with P(x1|y0) != P(x1|y1).
    """
    p = p_xy.probs
    nx, ny = p.shape
    py = p.sum(0)
    supp = p > tol.support
    with np.errstate(invalid="ignore", divide="ignore"):
        post = np.where(py > tol.support, p / py, np.nan)
    for x0 in range(nx):
        for x1 in range(nx):
            for y0 in range(ny):
                if not supp[x0, y0]:
                    continue
                for y1 in range(ny):
                    if y1 == y0 or not supp[x0, y1]:
                        continue
                    if abs(post[x1, y0] - post[x1, y1]) > tol.pmf:
                        return x0, x1, y0, y1
    return None


@dataclass(frozen=True)
class MatchedReleaseParams:
    s: float
    t: float
    witness: tuple

    @staticmethod
    def t_upper(p_xy: JointPmf, s: float, witness) -> float:
        x0, _, y0, y1 = witness
        row = p_xy.probs[x0] / p_xy.probs[x0].sum()
        return min((1 - s) / row[y1], s / row[y0])

    @classmethod
    def default(cls, p_xy: JointPmf, tol: Tolerances = TOL) -> "MatchedReleaseParams":
        witness = common_part_witness(p_xy, tol)
        if witness is None:
            raise ValueError("C(X;Y) = I(X;Y): no witness exists")
        return cls(0.5, 0.5 * cls.t_upper(p_xy, 0.5, witness), witness)

    def validate(self, p_xy: JointPmf) -> None:
        if not 0 < self.s < 1:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        hi = self.t_upper(p_xy, self.s, self.witness)
        if not 0 < self.t < hi:
            raise ValueError(f"t must lie in (0, {hi:.6g}), got {self.t}")


def matched_release_pair(p_xy: JointPmf, params: MatchedReleaseParams | None = None, tol: Tolerances = TOL):
    """Binary full-data mechanism independent of X, and its output-perturbation shadow.

    Returns ``(mech_fd, mech_op)``: P_{Z|X,Y} over the (X,Y) product alphabet and
    P_{Z'|Y} := P_{Z|Y}. Both yield the same (Y, Z) joint.
    """
    from .solver import project_fd_to_op

    if params is None:
        params = MatchedReleaseParams.default(p_xy, tol)
    if common_part_witness(p_xy, tol) is None:
        raise ValueError("C(X;Y) = I(X;Y): the construction needs a witness pair")
    params.validate(p_xy)
    x0, _, y0, y1 = params.witness
    nx, ny = p_xy.shape
    row = p_xy.probs[x0] / p_xy.probs[x0].sum()
    p0 = np.full((nx, ny), params.s)
    p0[x0, y0] = params.s + params.t * row[y1]
    p0[x0, y1] = params.s - params.t * row[y0]
    z = Alphabet(["0", "1"])
    rows = np.stack([p0.ravel(), 1 - p0.ravel()], axis=1)
    mech_fd = Channel(p_xy.axes[0].product(p_xy.axes[1]), z, rows)
    return mech_fd, project_fd_to_op(p_xy, mech_fd)


def summary(p_xy: JointPmf, tol: Tolerances = TOL) -> dict:
    cp = common_part(p_xy, tol)
    witness = common_part_witness(p_xy, tol)
    return {
        "C": cp.entropy,
        "I": mutual_information(p_xy),
        "components": list(cp.u_alphabet.labels),
        "p_u": cp.p_u.probs.tolist(),
        "u_of_x": cp.u_of_x,
        "u_of_y": cp.u_of_y,
        "ci_equals_mi": ci_equals_mi(p_xy, tol),
        "witness": None if witness is None else {
            "x0": p_xy.axes[0].labels[witness[0]],
            "x1": p_xy.axes[0].labels[witness[1]],
            "y0": p_xy.axes[1].labels[witness[2]],
            "y1": p_xy.axes[1].labels[witness[3]],
        },
    }
