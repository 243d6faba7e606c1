"""Privacy-utility tradeoff under observation constraints.

The mechanism P_{Z|W} is a row-stochastic matrix Q. Both P_{X,Z} and P_{Y,Z}
are linear in Q, so mutual-information leakage is convex in Q and expected
distortion is linear. ``solve_point`` runs a pairwise conditional-gradient
method whose linear subproblem over

    {Q row-stochastic : sum_{w,z} c(w,z) Q(w,z) <= delta}

is a continuous multiple-choice knapsack, solved exactly by a greedy pass
over the lower convex hulls of each row's (cost, gradient) points.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .measures import DistortionMeasure, PrivacyMeasure, distortion, leakage
from .probability import (
    LN2,
    TOL,
    Alphabet,
    Channel,
    JointPmf,
    condition,
    marginal,
    mi_array,
    push_mechanism,
)


SCENARIO_KINDS = ("fd", "op", "inf", "custom")
_LOG_FLOOR = 1e-300
_EMPTY_COLUMN = 1e-200


# --------------------------------------------------------------------------
# Data types

@dataclass(frozen=True, eq=False)
class Scenario:
    """Data model P_{X,Y}, observation channel P_{W|X,Y} and release alphabet."""

    data: JointPmf
    kind: str
    obs: Channel
    z_alphabet: Alphabet

    @classmethod
    def build(cls, data: JointPmf, kind: str = "op", z_alphabet: Alphabet | int | None = None,
              obs: Channel | None = None) -> "Scenario":
        if kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario {kind!r}; choose from {SCENARIO_KINDS}")
        if data.ndim != 2:
            raise ValueError("data model must be a joint over (X, Y)")
        xa, ya = data.axes
        xy = xa.product(ya)
        nx, ny = data.shape
        if kind == "fd":
            obs = Channel.identity(xy)
        elif kind == "op":
            obs = Channel(xy, ya, np.tile(np.eye(ny), (nx, 1)))
        elif kind == "inf":
            obs = Channel(xy, xa, np.repeat(np.eye(nx), ny, axis=0))
        elif obs is None or obs.input_alphabet != xy:
            raise ValueError("custom scenarios need an observation channel from the (X,Y) product alphabet")
        if z_alphabet is None:
            z_alphabet = ya
        elif isinstance(z_alphabet, int):
            z_alphabet = ya if z_alphabet == ny else Alphabet.range(z_alphabet)
        return cls(data, kind, obs, z_alphabet)

    @property
    def w_alphabet(self) -> Alphabet:
        return self.obs.output_alphabet

    @property
    def pxyw(self) -> np.ndarray:
        nx, ny = self.data.shape
        return self.data.probs[:, :, None] * self.obs.matrix.reshape(nx, ny, -1)

    @property
    def n_params(self) -> int:
        return len(self.w_alphabet) * (len(self.z_alphabet) - 1)

    def mechanism(self, q) -> Channel:
        return Channel(self.w_alphabet, self.z_alphabet, q)

    def cost(self, dist: DistortionMeasure) -> np.ndarray:
        """c(w, z) such that D = sum c * Q for a linear distortion."""
        d = dist.cost_matrix(len(self.data.axes[1]), len(self.z_alphabet), self.data.axes[1], self.z_alphabet)
        return self.pxyw.sum(axis=0).T @ d


@dataclass(frozen=True)
class SolverOptions:
    """``max_iters`` is the iteration budget shared by all restarts of one point.

    A run also stops once I(X;Z) improves by less than ``stall_tol`` over
    ``stall_window`` iterations.
    """
    max_iters: int = 10000
    gap_tol: float = 1e-6
    restarts: int = 8
    seed: int = 0
    stall_window: int = 500
    stall_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters <= 0 or self.gap_tol <= 0 or self.restarts <= 0 or self.seed < 0:
            raise ValueError("solver options must be positive")


@dataclass
class TradeoffPoint:
    delta: float
    pi: float
    status: str  # optimal | approximate | infeasible
    gap: float = 0.0
    mechanism: Channel | None = field(default=None, repr=False)
    iterations: int = 0

    @property
    def pi_bits(self) -> float:
        return self.pi / LN2


# --------------------------------------------------------------------------
# Evaluation

def evaluate(scenario: Scenario, mechanism: Channel, privacy: PrivacyMeasure,
             dist: DistortionMeasure) -> tuple[float, float]:
    """(J(X;Z), D(P_{Y,Z})) for a mechanism acting on the scenario's W."""
    pxyz = push_mechanism(scenario.data, scenario.obs, mechanism)
    return leakage(privacy, marginal(pxyz, (0, 2))), distortion(dist, marginal(pxyz, (1, 2)))


def min_distortion(scenario: Scenario, dist: DistortionMeasure) -> float:
    if not dist.linear:
        raise ValueError("min_distortion needs an expected-distortion measure")
    return float(scenario.cost(dist).min(axis=1).sum())


# --------------------------------------------------------------------------
# Linear minimisation oracle

def _hull_candidates(cost: np.ndarray, grad: np.ndarray) -> list[np.ndarray]:
    """Per row, the points sorted by cost that strictly improve the gradient (vectorised prefilter)."""
    order = np.lexsort((grad, cost), axis=-1)
    gs = np.take_along_axis(grad, order, axis=1)
    prev_min = np.minimum.accumulate(gs, axis=1)
    keep = np.ones_like(gs, dtype=bool)
    keep[:, 1:] = gs[:, 1:] < prev_min[:, :-1]
    return [order[w, keep[w]] for w in range(len(order))]


def _row_hull(c: np.ndarray, g: np.ndarray, pts=None) -> list[int]:
    """Indices on the decreasing lower convex hull of points (c[z], g[z])."""
    if pts is None:
        pts = _hull_candidates(c[None], g[None])[0]
    hull: list[int] = []
    for z in pts:
        z = int(z)
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b unless slope(a,b) < slope(b,z)
            if (g[b] - g[a]) * (c[z] - c[b]) >= (g[z] - g[b]) * (c[b] - c[a]):
                hull.pop()
            else:
                break
        hull.append(z)
    return hull


def lmo(grad: np.ndarray, cost: np.ndarray, delta: float) -> np.ndarray:
    """argmin <grad, S> over row-stochastic S with <cost, S> <= delta."""
    nw, nz = grad.shape
    start = np.empty(nw, dtype=int)
    segments = []
    budget = delta
    for w, pts in enumerate(_hull_candidates(cost, grad)):
        hull = _row_hull(cost[w], grad[w], pts) if len(pts) > 2 else [int(z) for z in pts]
        start[w] = hull[0]
        budget -= cost[w, hull[0]]
        for k, (a, b) in enumerate(zip(hull, hull[1:])):
            dc = cost[w, b] - cost[w, a]
            segments.append(((grad[w, b] - grad[w, a]) / dc, w, k, a, b, dc))
    budget = max(budget, 0.0)
    segments.sort(key=lambda s: (s[0], s[1], s[2]))
    current = start.copy()
    s = np.zeros((nw, nz))
    split = None
    for slope, w, _, a, b, dc in segments:
        if slope >= 0 or budget <= 0:
            break
        if dc <= budget:
            current[w] = b
            budget -= dc
        else:
            split = (w, a, b, budget / dc)
            break
    s[np.arange(nw), current] = 1.0
    if split is not None:
        w, a, b, frac = split
        s[w] = 0.0
        s[w, a] = 1.0 - frac
        s[w, b] = frac
    return s


# --------------------------------------------------------------------------
# Pairwise conditional gradient for I(X;Z)

def _fw_vertex(a_xw: np.ndarray, q: np.ndarray, cost: np.ndarray, delta: float, n_candidates: int = 3):
    """Gradient, LMO vertex and duality gap at q.

    I(X;Z) splits into one convex, 1-homogeneous term per column of P_{X,Z}.
    At an empty column the gradient does not exist, but log r(x) is a valid
    subgradient for every distribution r. Several choices of r are tried and
    the smallest resulting gap is kept; each one is a valid certificate.
    """
    pxz = a_xw @ q
    pz = pxz.sum(axis=0)
    empty = pz <= _EMPTY_COLUMN
    score = np.log(np.maximum(pxz, _LOG_FLOOR)) - np.log(np.maximum(pz, _LOG_FLOOR))
    if not empty.any():
        g = a_xw.T @ score
        s = lmo(g, cost, delta)
        return g, s, float((g * (q - s)).sum())

    pw = a_xw.sum(axis=0)
    live = np.flatnonzero(pw > TOL.support)
    cond = a_xw[:, live] / pw[live]
    own = (a_xw[:, live] * np.log(np.maximum(cond, _LOG_FLOOR))).sum(axis=0)
    g_used = (a_xw.T @ score)[:, ~empty]
    benefit = g_used.min(axis=1)[live] - own if g_used.size else -own
    rows = live[np.argsort(-benefit)[:n_candidates]]
    candidates = [a_xw.sum(axis=1)] + [a_xw[:, w] / pw[w] for w in rows]

    best = None
    for r in candidates:
        score[:, empty] = np.log(np.maximum(r, _LOG_FLOOR))[:, None]
        g = a_xw.T @ score
        s = lmo(g, cost, delta)
        gap = float((g * (q - s)).sum())
        if best is None or gap < best[2]:
            best = (g, s, gap)
    return best


def _line_search(a_xw: np.ndarray, q: np.ndarray, d: np.ndarray, gmax: float) -> float:
    """Minimise I(X;Z) along q + gamma d for gamma in [0, gmax] (convex in gamma)."""
    j0, dj = a_xw @ q, a_xw @ d
    z0, dz = j0.sum(0), dj.sum(0)

    def derivs(gm):
        j = np.maximum(j0 + gm * dj, _LOG_FLOOR)
        z = np.maximum(z0 + gm * dz, _LOG_FLOOR)
        slope = float((dj * np.log(j)).sum() - (dz * np.log(z)).sum())
        return slope, float((dj * dj / j).sum() - (dz * dz / z).sum())

    if derivs(gmax)[0] <= 0:
        return gmax
    lo, hi = 0.0, gmax
    gm = 0.5 * gmax
    for _ in range(60):
        sl, h = derivs(gm)
        if sl > 0:
            hi = gm
        else:
            lo = gm
        if hi - lo <= 1e-14 * max(gmax, 1.0) or abs(sl) < 1e-15:
            break
        nxt = gm - sl / h if h > 0 else 0.5 * (lo + hi)
        gm = nxt if lo < nxt < hi else 0.5 * (lo + hi)
    return gm


class _ActiveSet:
    """Vertices with convex weights, stored contiguously for fast scoring."""

    def __init__(self, atoms, weights):
        atoms = np.array(atoms, dtype=float)
        self._buf = atoms
        self.n = len(atoms)
        self.weights = np.array(weights, dtype=float)
        self.index = {v.tobytes(): i for i, v in enumerate(atoms)}

    @property
    def atoms(self) -> np.ndarray:
        return self._buf[: self.n]

    def point(self) -> np.ndarray:
        return np.tensordot(self.weights, self.atoms, axes=1)

    def add(self, s: np.ndarray, gm: float) -> None:
        key = s.tobytes()
        i = self.index.get(key)
        if i is not None:
            self.weights[i] += gm
            return
        if self.n == len(self._buf):
            grown = np.empty((max(2 * self.n, 8),) + s.shape)
            grown[: self.n] = self.atoms
            self._buf = grown
        self._buf[self.n] = s
        self.index[key] = self.n
        self.n += 1
        self.weights = np.append(self.weights, gm)

    def prune(self) -> bool:
        keep = self.weights > 1e-14
        if keep.all():
            return False
        atoms = self.atoms[keep]
        self._buf, self.n = atoms, len(atoms)
        self.weights = self.weights[keep] / self.weights[keep].sum()
        self.index = {v.tobytes(): i for i, v in enumerate(atoms)}
        return True


def _pairwise_fw(a_xw, cost, delta, atoms, weights, opts: SolverOptions, budget: int):
    act = _ActiveSet(atoms, weights)
    q = act.point()
    f = mi_array(a_xw @ q)
    gap = math.inf
    it = 0
    history = [f]
    for it in range(1, budget + 1):
        g, s, gap = _fw_vertex(a_xw, q, cost, delta)
        if gap <= opts.gap_tol:
            break
        k = int(np.argmax(np.tensordot(act.atoms, g, axes=2)))
        d = s - act.atoms[k]
        gm = _line_search(a_xw, q, d, act.weights[k])
        q_new = q + gm * d
        f_new = mi_array(a_xw @ q_new) if gm > 0 else math.inf
        if f_new <= f:
            act.weights[k] -= gm
        else:
            # pairwise step stalled or hit round-off; take a plain Frank-Wolfe step
            d = s - q
            gm = _line_search(a_xw, q, d, 1.0)
            q_new = q + gm * d
            f_new = mi_array(a_xw @ q_new)
            if gm <= 0 or f_new > f:
                break
            act.weights *= 1 - gm
        act.add(s, gm)
        q, f = q_new, f_new
        if act.prune():
            q = act.point()
            f = mi_array(a_xw @ q)
        history.append(f)
        if it >= opts.stall_window and history[-opts.stall_window - 1] - f < opts.stall_tol:
            break
    return q, f, gap, it


def _supported(privacy: PrivacyMeasure, dist: DistortionMeasure) -> None:
    if privacy.kind != "mi" or not dist.linear:
        raise ValueError(
            "solve_point handles mutual-information leakage with expected distortion only; "
            "use brute_force_oracle for other combinations"
        )


def solve_point(scenario: Scenario, privacy: PrivacyMeasure, dist: DistortionMeasure, delta: float,
                opts: SolverOptions = SolverOptions(), warm_start: Channel | None = None) -> TradeoffPoint:
    """Minimise I(X;Z) subject to D <= delta over the scenario's mechanisms."""
    _supported(privacy, dist)
    cost = scenario.cost(dist)
    dmin = float(cost.min(axis=1).sum())
    if delta < dmin - 1e-12:
        return TradeoffPoint(delta, math.inf, "infeasible", 0.0, None)
    nw, nz = cost.shape

    const_cost = cost.sum(axis=0)
    z_best = int(np.argmin(const_cost))
    if const_cost[z_best] <= delta:
        q = np.zeros((nw, nz))
        q[:, z_best] = 1.0
        return TradeoffPoint(delta, 0.0, "optimal", 0.0, scenario.mechanism(q))

    a_xw = scenario.pxyw.sum(axis=1)
    rng = np.random.default_rng(opts.seed)
    starts = []
    if warm_start is not None and _feasible(cost, warm_start.matrix, delta):
        starts.append(([warm_start.matrix], [1.0]))
    n_atoms = min(nw * nz, 8)
    for _ in range(opts.restarts):
        atoms = [lmo(rng.normal(size=(nw, nz)), cost, delta) for _ in range(n_atoms)]
        starts.append((atoms, np.full(n_atoms, 1.0 / n_atoms)))

    # the problem is convex, so extra starts only hedge against numerical stalls
    best = None
    total_iters = 0
    for atoms, weights in starts:
        if total_iters >= opts.max_iters:
            break
        q, f, gap, iters = _pairwise_fw(a_xw, cost, delta, atoms, weights, opts, opts.max_iters - total_iters)
        total_iters += iters
        if best is None or f < best[1] - 1e-15 or (abs(f - best[1]) <= 1e-15 and gap < best[2]):
            best = (q, f, gap)
        if best[2] <= opts.gap_tol:
            break
    q, f, gap = best
    q = np.clip(q, 0.0, None)
    q /= q.sum(axis=1, keepdims=True)
    status = "optimal" if gap <= opts.gap_tol else "approximate"
    return TradeoffPoint(delta, f, status, max(gap, 0.0), scenario.mechanism(q), total_iters)


def _feasible(cost, q, delta) -> bool:
    return q.shape == cost.shape and float((cost * q).sum()) <= delta + 1e-12


# --------------------------------------------------------------------------
# Brute-force grid oracle

def _simplex_grid(nz: int, n: int) -> np.ndarray:
    pts = [
        np.diff(np.concatenate(([0], cuts, [n]))) / n
        for cuts in itertools.combinations_with_replacement(range(n + 1), nz - 1)
    ]
    return np.array(pts)


def _batch_mi(pxz: np.ndarray) -> np.ndarray:
    def h(p, axes):
        p = np.where(p > TOL.support, p, 1.0)
        return -(p * np.log(p)).sum(axis=axes)

    return np.maximum(h(pxz.sum(2), 1) + h(pxz.sum(1), 1) - h(pxz, (1, 2)), 0.0)


def _batch_eval(privacy, dist, scenario, a_xw, b_yw, qs):
    pxz = np.einsum("xw,bwz->bxz", a_xw, qs)
    pyz = np.einsum("yw,bwz->byz", b_yw, qs)
    if privacy.kind == "mi":
        j = _batch_mi(pxz)
    else:
        xz_axes = [scenario.data.axes[0], scenario.z_alphabet]
        j = np.array([leakage(privacy, JointPmf(xz_axes, p)) for p in pxz])
    if dist.linear:
        d = dist.cost_matrix(b_yw.shape[0], qs.shape[2], scenario.data.axes[1], scenario.z_alphabet)
        dv = np.einsum("yz,byz->b", d, pyz)
    elif dist.kind == "cond-entropy":
        pz = pyz.sum(1)
        safe = np.where(pyz > TOL.support, pyz, 1.0)
        hyz = -(safe * np.log(safe)).sum(axis=(1, 2))
        safez = np.where(pz > TOL.support, pz, 1.0)
        dv = hyz + (safez * np.log(safez)).sum(axis=1)
    else:
        dev = np.abs(pyz - dist.target[None]).max(axis=(1, 2))
        dv = np.where(dev <= dist.tol, 1.0, 2.0)
    return j, dv


MAX_GRID_POINTS = 20_000_000


def brute_force_oracle(scenario: Scenario, privacy: PrivacyMeasure, dist: DistortionMeasure,
                       delta: float, resolution: int = 200, chunk: int = 20000) -> TradeoffPoint:
    """Exhaustive grid over every row's simplex, then one coordinate-wise refinement pass.

    ``resolution`` is the number of grid steps per unit. The value returned is a
    feasible upper bound on the infimum; ``gap`` is reported as infinite since
    no certificate exists.
    """
    nw, nz = len(scenario.w_alphabet), len(scenario.z_alphabet)
    if scenario.n_params > 8:
        raise ValueError(f"oracle limited to 8 free channel parameters, scenario has {scenario.n_params}")
    if dist.linear and delta < min_distortion(scenario, dist) - 1e-12:
        return TradeoffPoint(delta, math.inf, "infeasible", 0.0, None)
    grid = _simplex_grid(nz, resolution)
    total = len(grid) ** nw
    if total > MAX_GRID_POINTS:
        raise ValueError(f"grid has {total} points; lower the resolution")
    pxyw = scenario.pxyw
    a_xw, b_yw = pxyw.sum(1), pxyw.sum(0)

    best_val, best_q = math.inf, None
    combos = itertools.product(range(len(grid)), repeat=nw)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)))
        if block.size == 0:
            break
        qs = grid[block]
        j, dv = _batch_eval(privacy, dist, scenario, a_xw, b_yw, qs)
        ok = dv <= delta + 1e-12
        if ok.any():
            i = int(np.argmin(np.where(ok, j, np.inf)))
            if j[i] < best_val:
                best_val, best_q = float(j[i]), qs[i].copy()
    if best_q is None:
        return TradeoffPoint(delta, math.inf, "infeasible", 0.0, None)

    fine = _simplex_grid(nz, resolution * 10)
    for w in range(nw):
        near = fine[np.abs(fine - best_q[w]).max(axis=1) <= 1.0 / resolution + 1e-12]
        qs = np.repeat(best_q[None], len(near), axis=0)
        qs[:, w] = near
        j, dv = _batch_eval(privacy, dist, scenario, a_xw, b_yw, qs)
        ok = dv <= delta + 1e-12
        if ok.any():
            i = int(np.argmin(np.where(ok, j, np.inf)))
            if j[i] < best_val:
                best_val, best_q = float(j[i]), qs[i].copy()
    return TradeoffPoint(delta, best_val, "approximate", math.inf, scenario.mechanism(best_q))


# --------------------------------------------------------------------------
# Curves

def tradeoff_curve(scenario: Scenario, privacy: PrivacyMeasure, dist: DistortionMeasure, deltas,
                   opts: SolverOptions = SolverOptions(), warm: bool = True) -> list[TradeoffPoint]:
    deltas = [float(d) for d in deltas]
    if any(b < a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be sorted ascending")
    points: list[TradeoffPoint] = []
    prev = None
    for delta in deltas:
        pt = solve_point(scenario, privacy, dist, delta, opts, warm_start=prev if warm else None)
        if pt.mechanism is not None:
            prev = pt.mechanism
        points.append(pt)
    # pi is nonincreasing in delta: an earlier mechanism stays feasible
    for i in range(1, len(points)):
        before, cur = points[i - 1], points[i]
        if cur.pi > before.pi:
            if cur.pi - before.pi > opts.gap_tol:
                warnings.warn(
                    f"tradeoff value rose by {cur.pi - before.pi:.3g} nats between "
                    f"delta={before.delta} and delta={cur.delta}; keeping the earlier mechanism",
                    RuntimeWarning,
                    stacklevel=2,
                )
            points[i] = TradeoffPoint(cur.delta, before.pi, before.status, before.gap, before.mechanism,
                                      cur.iterations)
    return points


# --------------------------------------------------------------------------
# Projections onto output-perturbation mechanisms

def project_inf_to_op(p_xy: JointPmf, mech_inf: Channel) -> Channel:
    """P_{Z'|Y}(z|y) = sum_x P_{Z|X}(z|x) P_{X|Y}(x|y)."""
    if mech_inf.input_alphabet != p_xy.axes[0]:
        raise ValueError("inference mechanism must take X as input")
    x_given_y = condition(p_xy, 1)
    rows = x_given_y.matrix @ mech_inf.matrix
    return Channel(p_xy.axes[1], mech_inf.output_alphabet, rows, x_given_y.present)


def project_fd_to_op(p_xy: JointPmf, mech_fd: Channel) -> Channel:
    """P_{Z'|Y}(z|y) = sum_x P_{Z|X,Y}(z|x,y) P_{X|Y}(x|y)."""
    xa, ya = p_xy.axes
    if mech_fd.input_alphabet != xa.product(ya):
        raise ValueError("full-data mechanism must take the (X,Y) product alphabet as input")
    x_given_y = condition(p_xy, 1)
    m = mech_fd.matrix.reshape(len(xa), len(ya), -1)
    rows = np.einsum("yx,xyz->yz", x_given_y.matrix, m)
    return Channel(ya, mech_fd.output_alphabet, rows, x_given_y.present)
