"""Closed-form tradeoffs for the m-ary symmetric pair under MI leakage and error probability.

(X, Y) ~ SP(m, p) has uniform marginals, P(X = Y) = 1 - p, and equal mass
p / (m (m - 1)) on every off-diagonal cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .probability import Alphabet, Channel, JointPmf, marginal, push_mechanism
from .solver import Scenario

_BOUNDARY_ATOL = 1e-12


@dataclass(frozen=True)
class SPParams:
    m: int
    p: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def uniform_error(self) -> float:
        """1 - 1/m: error probability of a release independent of the data."""
        return 1.0 - 1.0 / self.m

    @property
    def slope(self) -> float:
        """1 - p m / (m - 1), the factor linking Pr(X != Z) and Pr(Y != Z) along Y -> X -> Z."""
        return 1.0 - self.p * self.m / (self.m - 1)


@dataclass(frozen=True)
class ClosedFormResult:
    value: float
    branch: str


def _check_delta(delta: float) -> None:
    if not delta >= 0:
        raise ValueError(f"distortion level must be >= 0, got {delta}")


def h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def r_m(m: int, p: float) -> float:
    """Mutual information of SP(m, p) in nats."""
    val = math.log(m) - h2(p)
    if p > 0:
        val -= p * math.log(m - 1)
    return max(val, 0.0)


def sp_joint(params: SPParams) -> JointPmf:
    m, p = params.m, params.p
    probs = np.full((m, m), p / (m * (m - 1)))
    np.fill_diagonal(probs, (1 - p) / m)
    alph = Alphabet.range(m)
    return JointPmf([alph, alph], probs)


def symmetric_channel(m: int, t: float, alphabet: Alphabet | None = None) -> Channel:
    """Keep the input with probability 1 - t, else move uniformly to one of the other m - 1 symbols."""
    rows = np.full((m, m), t / (m - 1))
    np.fill_diagonal(rows, 1 - t)
    alph = alphabet or Alphabet.range(m)
    return Channel(alph, alph, rows)


def _agree_at_boundary(a: float, b: float) -> None:
    assert abs(a - b) <= _BOUNDARY_ATOL, f"branch values disagree at a boundary: {a} vs {b}"


# --------------------------------------------------------------------------
# Full data

def pi_fd_closed(params: SPParams, delta: float) -> ClosedFormResult:
    _check_delta(delta)
    m, p, u = params.m, params.p, params.uniform_error
    if delta <= u - p:
        val = r_m(m, p + delta)
        if delta == u - p:
            _agree_at_boundary(val, 0.0)
        return ClosedFormResult(val, "p+delta")
    if delta <= p - u:
        val = r_m(m, p - delta)
        if delta == p - u:
            _agree_at_boundary(val, 0.0)
        return ClosedFormResult(val, "p-delta")
    return ClosedFormResult(0.0, "zero")


def fd_optimal_mechanism(params: SPParams, delta: float) -> Channel:
    """Mechanism over the (X, Y) product alphabet achieving ``pi_fd_closed``.

    For p <= 1 - 1/m: release Y when X != Y, otherwise Y plus noise chosen so the
    error probability is t = min(1 - 1/m - p, delta). For larger p: release Y
    with probability t'/p and X otherwise, t' = max(p - delta, 1 - 1/m).
    """
    _check_delta(delta)
    m, p, u = params.m, params.p, params.uniform_error
    rows = np.zeros((m, m, m))
    if p <= u:
        t = min(u - p, delta)
        for x in range(m):
            for y in range(m):
                if x == y:
                    rows[x, y, :] = t / ((1 - p) * (m - 1))
                    rows[x, y, y] = 1 - t / (1 - p)
                else:
                    rows[x, y, y] = 1.0
    else:
        keep_y = max(p - delta, u) / p
        for x in range(m):
            for y in range(m):
                rows[x, y, y] += keep_y
                rows[x, y, x] += 1 - keep_y
    alph = Alphabet.range(m)
    return Channel(alph.product(alph), alph, rows.reshape(m * m, m))


# --------------------------------------------------------------------------
# Output perturbation

def pi_op_closed(params: SPParams, delta: float) -> ClosedFormResult:
    _check_delta(delta)
    if delta < params.uniform_error:
        return ClosedFormResult(r_m(params.m, params.p + delta * params.slope), "noise")
    return ClosedFormResult(0.0, "zero")


def op_optimal_mechanism(params: SPParams, delta: float) -> Channel:
    """Z = Y + N mod m with Pr(N != 0) = min(delta, 1 - 1/m); independent of p."""
    _check_delta(delta)
    return symmetric_channel(params.m, min(delta, params.uniform_error))


# --------------------------------------------------------------------------
# Inference

def _inf_t(params: SPParams, delta: float) -> float:
    return (delta - params.p) / params.slope


def pi_inf_closed(params: SPParams, delta: float) -> ClosedFormResult:
    _check_delta(delta)
    m, p, u = params.m, params.p, params.uniform_error
    if delta >= u:
        return ClosedFormResult(0.0, "zero")
    h = (m - 1) * (1 - delta)
    # the open interval (delta, h) already contains p = 1 - 1/m whenever delta < 1 - 1/m
    if delta < p < h or p == u:
        return ClosedFormResult(math.inf, "infeasible")
    return ClosedFormResult(r_m(m, min(max(_inf_t(params, delta), 0.0), 1.0)), "test-channel")


def inf_optimal_mechanism(params: SPParams, delta: float) -> Channel | None:
    """Symmetric test channel on X with error t = (delta - p) / (1 - pm/(m-1)); None when infeasible."""
    res = pi_inf_closed(params, delta)
    if res.branch == "infeasible":
        return None
    if res.branch == "zero":
        return symmetric_channel(params.m, params.uniform_error)
    return symmetric_channel(params.m, min(max(_inf_t(params, delta), 0.0), 1.0))


def closed_form(scenario: str, params: SPParams, delta: float) -> ClosedFormResult:
    fn = {"fd": pi_fd_closed, "op": pi_op_closed, "inf": pi_inf_closed}[scenario]
    return fn(params, delta)


def optimal_mechanism(scenario: str, params: SPParams, delta: float) -> Channel | None:
    fn = {"fd": fd_optimal_mechanism, "op": op_optimal_mechanism, "inf": inf_optimal_mechanism}[scenario]
    return fn(params, delta)


def scenario(params: SPParams, kind: str) -> Scenario:
    return Scenario.build(sp_joint(params), kind)


# --------------------------------------------------------------------------
# Fano-type bounds

def fano_g(m: int, eps: float) -> float:
    """Least I(X;Z) for uniform X subject to Pr(X != Z) <= eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return r_m(m, eps) if eps <= 1 - 1 / m else 0.0


def fano_g_star(m: int, eps: float) -> float:
    """Least I(X;Z) for uniform X subject to Pr(X != Z) >= eps."""
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    return r_m(m, eps) if eps >= 1 - 1 / m else 0.0


# --------------------------------------------------------------------------
# Error-probability identities

def _error_probs(params: SPParams, kind: str, mech: Channel) -> tuple[float, float]:
    pxyz = push_mechanism(sp_joint(params), Scenario.build(sp_joint(params), kind).obs, mech)
    pxz = marginal(pxyz, (0, 2)).probs
    pyz = marginal(pxyz, (1, 2)).probs
    return 1 - np.trace(pxz), 1 - np.trace(pyz)


def error_relation_check(params: SPParams, mech_fd: Channel) -> tuple[float, float]:
    """Pr(Y!=Z) - Pr(X!=Z) measured, and the off-diagonal sum formula for it."""
    m, p = params.m, params.p
    if len(mech_fd.output_alphabet) != m:
        raise ValueError("release alphabet must have m symbols")
    pr_xz, pr_yz = _error_probs(params, "fd", mech_fd)
    rows = mech_fd.matrix.reshape(m, m, m)
    total = 0.0
    for x in range(m):
        for y in range(m):
            if x != y:
                total += rows[x, y, x] - rows[x, y, y]
    return pr_yz - pr_xz, p / (m * (m - 1)) * total


def markov_error_relation(params: SPParams, mech: Channel) -> tuple[float, float]:
    """Measured Pr(Y!=Z) for a mechanism on X, and p + Pr(X!=Z) (1 - pm/(m-1))."""
    if len(mech.input_alphabet) != params.m or len(mech.output_alphabet) != params.m:
        raise ValueError("mechanism must map the m-ary X alphabet to m symbols")
    pr_xz, pr_yz = _error_probs(params, "inf", mech)
    return pr_yz, params.p + pr_xz * params.slope
