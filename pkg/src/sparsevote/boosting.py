"""Decision stumps, AdaBoostV, the sparsified-boosting pipeline, and the LP
oracle for the optimal minimal margin.

The pipeline trains c*T stumps with AdaBoostV, where
c = ceil(log(n)/log(2+n/T)) buys enough rounds that the boosting gap and the
sparsification error match, builds the margin matrix, normalizes the weights,
and halves the support down to T hypotheses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .discrepancy import DEFAULT_CONFIG, ColoringConfig
from .margins import MarginMatrix, WeightVector, build_margin_matrix
from .seeding import split_seed
from .sparsify import SparsifyReport, sparsify

EDGE_CAP = 1.0 - 1e-10


@dataclass(frozen=True)
class Dataset:
    """n labeled points: features in R^d, labels exactly +-1."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if features.ndim != 2 or features.size == 0:
            raise ValueError("features must be a nonempty n x d matrix")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite values")
        if labels.shape != (features.shape[0],):
            raise ValueError(
                f"expected {features.shape[0]} labels, got shape {labels.shape}"
            )
        if not np.all(np.abs(labels) == 1.0):
            raise ValueError("labels must be exactly +1 or -1")
        features = features.copy()
        labels = labels.copy()
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_points(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class DecisionStump:
    """Threshold rule on one feature: polarity * sign(x_f - threshold),
    with sign(0) := +1, so outputs are always exactly +-1."""

    feature: int
    threshold: float
    polarity: int

    def __post_init__(self):
        if self.feature < 0:
            raise ValueError("feature index must be nonnegative")
        if self.polarity not in (-1, 1):
            raise ValueError("polarity must be -1 or +1")
        if math.isnan(self.threshold):
            raise ValueError("threshold must not be NaN")

    def predict(self, features: np.ndarray) -> np.ndarray:
        column = features[:, self.feature]
        raw = np.where(column - self.threshold >= 0.0, 1.0, -1.0)
        return self.polarity * raw


@dataclass(frozen=True)
class Ensemble:
    """Weighted list of stumps; weights are nonnegative by construction."""

    hypotheses: tuple[DecisionStump, ...]
    weights: WeightVector
    stopped_early: bool = False

    def __post_init__(self):
        hypotheses = tuple(self.hypotheses)
        if not hypotheses:
            raise ValueError("ensemble must contain at least one hypothesis")
        if len(hypotheses) != len(self.weights):
            raise ValueError(
                f"{len(hypotheses)} hypotheses but {len(self.weights)} weights"
            )
        if np.any(self.weights.values < 0):
            raise ValueError("ensemble weights must be nonnegative")
        object.__setattr__(self, "hypotheses", hypotheses)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def hypothesis_outputs(self, features: np.ndarray) -> np.ndarray:
        """n x T matrix of raw hypothesis outputs h_j(x_i)."""
        return np.stack([h.predict(features) for h in self.hypotheses], axis=1)


@dataclass(frozen=True)
class BoostConfig:
    rounds: int
    edge_cap: float = EDGE_CAP
    seed: object = None

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("need at least one boosting round")
        if not 0.0 < self.edge_cap < 1.0:
            raise ValueError("edge cap must lie strictly between 0 and 1")


def train_stump(dataset: Dataset, sample_weights) -> DecisionStump:
    """Exhaustive weighted-edge maximization over all stumps.

    Candidate thresholds are the midpoints between consecutive distinct
    sorted feature values plus -inf/+inf sentinels; for each the edge
    sum_i D(i) y_i h(x_i) is evaluated through prefix sums in O(n log n)
    per feature. Ties go to the lowest feature index, then the lowest
    threshold, then polarity +1.
    """
    weights = np.asarray(sample_weights, dtype=np.float64)
    if weights.shape != (dataset.n_points,):
        raise ValueError("sample weights must match the number of points")
    if np.any(weights < 0):
        raise ValueError("sample weights must be nonnegative")
    total_weight = float(weights.sum())
    if total_weight <= 0.0:
        raise ValueError("sample weights sum to zero")
    if abs(total_weight - 1.0) > 1e-9:
        raise ValueError("sample weights must sum to 1")

    signed = weights * dataset.labels
    total = float(signed.sum())
    best_edge = -math.inf
    best: tuple[int, float, int] | None = None

    for feature in range(dataset.n_features):
        column = dataset.features[:, feature]
        order = np.argsort(column, kind="stable")
        sorted_vals = column[order]
        prefix = np.concatenate([[0.0], np.cumsum(signed[order])])
        # Split positions: j points strictly below the threshold. Position 0
        # is the -inf sentinel, n the +inf sentinel, and interior positions
        # exist only between distinct values.
        interior = np.flatnonzero(sorted_vals[:-1] < sorted_vals[1:]) + 1
        positions = np.concatenate([[0], interior, [sorted_vals.size]])
        thresholds = np.empty(positions.size)
        thresholds[0] = -math.inf
        thresholds[-1] = math.inf
        if interior.size:
            thresholds[1:-1] = (sorted_vals[interior - 1] + sorted_vals[interior]) / 2.0
        # h = sign(x - threshold): points below contribute -1. Interleaving
        # +1/-1 polarities per position makes argmax's first-occurrence rule
        # implement the tie order (threshold ascending, polarity +1 first).
        edge_plus = total - 2.0 * prefix[positions]
        flat = np.empty(2 * positions.size)
        flat[0::2] = edge_plus
        flat[1::2] = -edge_plus
        idx = int(np.argmax(flat))
        if flat[idx] > best_edge:
            best_edge = float(flat[idx])
            best = (feature, float(thresholds[idx // 2]), 1 if idx % 2 == 0 else -1)
    assert best is not None
    return DecisionStump(*best)


def adaboost_v(dataset: Dataset, config: BoostConfig) -> Ensemble:
    """AdaBoostV: margin-maximizing boosting with an adaptive target.

    Per-round update (Ratsch & Warmuth, JMLR 6, 2005, "Efficient Margin
    Maximizing with Boosting"): with edge gamma_t and adaptive estimate
    rho_t = (min_{r<=t} gamma_r) - nu, the hypothesis weight is
        alpha_t = 1/2 ln((1+gamma_t)/(1-gamma_t)) - 1/2 ln((1+rho_t)/(1-rho_t))
    and the sample distribution is scaled by exp(-alpha_t y_i h_t(x_i)).
    The accuracy parameter nu = sqrt(2 ln(n) / rounds) makes the final gap
    to the optimal margin O(sqrt(ln(n)/rounds)) for the given round budget.

    A round whose best edge is <= 0 stops training early; the rounds
    completed so far are returned with the ensemble flagged.
    """
    n = dataset.n_points
    nu = math.sqrt(2.0 * math.log(n) / config.rounds)
    distribution = np.full(n, 1.0 / n)
    cap = config.edge_cap

    stumps: list[DecisionStump] = []
    alphas: list[float] = []
    min_edge = math.inf
    stopped = False

    for _ in range(config.rounds):
        stump = train_stump(dataset, distribution)
        agreement = dataset.labels * stump.predict(dataset.features)
        edge = float(distribution @ agreement)
        if edge <= 0.0:
            stopped = True
            break
        edge = min(edge, cap)
        min_edge = min(min_edge, edge)
        rho = min(max(min_edge - nu, -cap), cap)
        alpha = 0.5 * math.log((1 + edge) / (1 - edge)) - 0.5 * math.log(
            (1 + rho) / (1 - rho)
        )
        stumps.append(stump)
        alphas.append(alpha)
        distribution = distribution * np.exp(-alpha * agreement)
        distribution /= distribution.sum()

    if not stumps:
        raise ValueError("no stump with positive edge exists on this dataset")
    return Ensemble(tuple(stumps), WeightVector(np.array(alphas)), stopped_early=stopped)


def budget_multiplier(n: int, T: int) -> int:
    """The round multiplier c = ceil(log(n)/log(2+n/T)); base-invariant ratio."""
    if n < 2:
        raise ValueError("need at least two training points")
    if T < 1:
        raise ValueError("target size must be positive")
    return math.ceil(math.log(n) / math.log(2.0 + n / T))


def sparsiboost(
    dataset: Dataset,
    T: int,
    config: BoostConfig,
    coloring: ColoringConfig = DEFAULT_CONFIG,
) -> tuple[Ensemble, SparsifyReport]:
    """Train c*T stumps, then sparsify the ensemble down to T of them.

    The returned ensemble carries the surviving hypotheses with their
    renormalized weights (summing to 1); the report documents the halving.
    """
    if T < 1:
        raise ValueError("target size must be positive")
    c = budget_multiplier(dataset.n_points, T)
    train_config = BoostConfig(
        rounds=c * T, edge_cap=config.edge_cap, seed=config.seed
    )
    ensemble = adaboost_v(dataset, train_config)
    U = build_margin_matrix(dataset, ensemble)
    w = ensemble.weights.normalized()
    target = min(T, len(ensemble))
    sparse_w, report = sparsify(U, w, target, split_seed(config.seed, 1), coloring)
    surviving = sparse_w.nonzero_indices()
    pruned = Ensemble(
        tuple(ensemble.hypotheses[i] for i in surviving),
        WeightVector(sparse_w.values[surviving]),
        stopped_early=ensemble.stopped_early,
    )
    return pruned, report


def lp_optimal_margin(U: MarginMatrix) -> tuple[float, WeightVector]:
    """Optimal minimal margin over the column dictionary of U.

    Solves max rho s.t. Uw >= rho, w >= 0, sum(w) = 1 with the HiGHS
    solver; always feasible (uniform w). Returned weights are cleaned of
    solver-tolerance negatives and renormalized.
    """
    n, m = U.n_points, U.n_hypotheses
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-U.values, np.ones((n, 1))])
    b_ub = np.zeros(n)
    A_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    b_eq = np.array([1.0])
    bounds = [(0.0, None)] * m + [(-1.0, 1.0)]
    result = linprog(
        cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
        method="highs",
    )
    if not result.success:
        raise RuntimeError(f"margin LP failed: {result.message}")
    rho = float(result.x[-1])
    weights = np.maximum(result.x[:m], 0.0)
    weights /= weights.sum()
    return rho, WeightVector(weights)
