"""Estimator-style front end: fit a release mechanism to a data model, then apply it to samples."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from ._validation import check_delta, check_distortion, check_joint, check_privacy
from .common_info import common_part
from .solver import Scenario, SolverOptions, brute_force_oracle, solve_point, tradeoff_curve


class TradeoffMechanism(TransformerMixin, BaseEstimator):
    """Least-leakage release mechanism for one distortion budget.

    ``fit`` takes the data model P_{X,Y} (array or JointPmf) and finds the
    mechanism P_{Z|W} for the chosen observation scenario. ``transform`` maps
    integer-coded observations W to sampled releases Z.

    Parameters
    ----------
    scenario : {"fd", "op", "inf"}
    delta : float
        Distortion budget.
    privacy, distortion : str or measure objects
        Mutual information ("mi") with a linear distortion uses the
        conditional-gradient solver; any other pair needs ``oracle=True``.
    z_size : int, optional
        Release alphabet size; defaults to |Y|.
    oracle : bool
        Use the exhaustive grid search instead of the convex solver.
    """

    def __init__(self, scenario="op", delta=0.1, privacy="mi", distortion="prob-error", z_size=None,
                 oracle=False, resolution=200, max_iters=10000, gap_tol=1e-6, restarts=8,
                 random_state=0):
        self.scenario = scenario
        self.delta = delta
        self.privacy = privacy
        self.distortion = distortion
        self.z_size = z_size
        self.oracle = oracle
        self.resolution = resolution
        self.max_iters = max_iters
        self.gap_tol = gap_tol
        self.restarts = restarts
        self.random_state = random_state

    def _options(self) -> SolverOptions:
        return SolverOptions(self.max_iters, self.gap_tol, self.restarts, int(self.random_state or 0))

    def _scenario(self, X) -> Scenario:
        return Scenario.build(check_joint(X), self.scenario, self.z_size)

    def fit(self, X, y=None):
        delta = check_delta(self.delta)
        privacy, dist = check_privacy(self.privacy), check_distortion(self.distortion)
        self.scenario_ = self._scenario(X)
        if self.oracle:
            point = brute_force_oracle(self.scenario_, privacy, dist, delta, self.resolution)
        else:
            point = solve_point(self.scenario_, privacy, dist, delta, self._options())
        self.point_ = point
        self.mechanism_ = point.mechanism
        self.leakage_ = point.pi
        self.status_ = point.status
        self.gap_ = point.gap
        return self

    def transform(self, X):
        """Sample one release per integer-coded observation in ``X``."""
        check_is_fitted(self, "point_")
        if self.mechanism_ is None:
            raise ValueError(f"no feasible mechanism for delta={self.delta}")
        w = np.asarray(X, dtype=int).ravel()
        rows = self.mechanism_.matrix
        if w.size and (w.min() < 0 or w.max() >= rows.shape[0]):
            raise ValueError("observation codes out of range for the fitted mechanism")
        rng = check_random_state(self.random_state)
        cum = np.cumsum(rows[w], axis=1)
        u = rng.random_sample(len(w))[:, None]
        return np.minimum((u > cum).sum(axis=1), rows.shape[1] - 1)

    def frontier(self, X, deltas):
        """Tradeoff curve over ascending ``deltas`` for the same settings."""
        privacy, dist = check_privacy(self.privacy), check_distortion(self.distortion)
        sc = self._scenario(X)
        if self.oracle:
            return [brute_force_oracle(sc, privacy, dist, check_delta(d), self.resolution) for d in deltas]
        return tradeoff_curve(sc, privacy, dist, [check_delta(d) for d in deltas], self._options())


class CommonPartEncoder(TransformerMixin, BaseEstimator):
    """Map integer-coded X (or Y) symbols to their Gacs-Korner common-part index."""

    def __init__(self, side="x"):
        self.side = side

    def fit(self, X, y=None):
        if self.side not in ("x", "y"):
            raise ValueError("side must be 'x' or 'y'")
        joint = check_joint(X)
        cp = common_part(joint)
        self.common_part_ = cp
        axis = joint.axes[0] if self.side == "x" else joint.axes[1]
        mapping = cp.u_of_x if self.side == "x" else cp.u_of_y
        self.codes_ = np.array([
            cp.u_alphabet.index(mapping[lab]) if mapping[lab] in cp.u_alphabet.labels else -1
            for lab in axis
        ])
        return self

    def transform(self, X):
        check_is_fitted(self, "codes_")
        return self.codes_[np.asarray(X, dtype=int)]
