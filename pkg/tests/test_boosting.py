import math

import numpy as np
import pytest

import sparsevote.boosting as boosting
from sparsevote import (
    BoostConfig,
    Dataset,
    DecisionStump,
    Ensemble,
    WeightVector,
    adaboost_v,
    budget_multiplier,
    build_margin_matrix,
    lp_optimal_margin,
    margins,
    min_margin,
    sparsiboost,
    sup_norm_diff,
    train_stump,
)
from sparsevote.seeding import rng_from

from oracles import best_stump_exhaustive, lp_margin_grid, margins_double_loop


def line_dataset(xs, labels):
    return Dataset(np.asarray(xs, dtype=float)[:, None], np.asarray(labels, dtype=float))


def random_dataset(seed, n, d, grid=None):
    rng = rng_from(seed)
    X = rng.uniform(0.0, 4.0, size=(n, d))
    if grid:
        X = np.round(X * grid) / grid
    y = rng.choice([-1.0, 1.0], size=n)
    return Dataset(X, y)


class TestDataset:
    def test_shape_properties(self):
        data = line_dataset([1, 2], [1, -1])
        assert data.n_points == 2
        assert data.n_features == 1

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 1)), np.array([1.0, 0.5]))

    def test_rejects_nonfinite_features(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[np.inf]]), np.array([1.0]))

    def test_arrays_read_only(self):
        data = line_dataset([1.0], [1.0])
        with pytest.raises(ValueError):
            data.features[0, 0] = 2.0


class TestDecisionStump:
    def test_sign_zero_is_plus_one(self):
        stump = DecisionStump(feature=0, threshold=2.0, polarity=1)
        out = stump.predict(np.array([[2.0], [1.9], [2.1]]))
        assert np.array_equal(out, [1.0, -1.0, 1.0])

    def test_polarity_flip(self):
        plus = DecisionStump(0, 0.5, 1)
        minus = DecisionStump(0, 0.5, -1)
        X = np.array([[0.0], [1.0]])
        assert np.array_equal(minus.predict(X), -plus.predict(X))

    def test_infinite_thresholds_are_constant(self):
        X = np.array([[-5.0], [5.0]])
        low = DecisionStump(0, -math.inf, 1)
        high = DecisionStump(0, math.inf, 1)
        assert np.array_equal(low.predict(X), [1.0, 1.0])
        assert np.array_equal(high.predict(X), [-1.0, -1.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            DecisionStump(-1, 0.0, 1)
        with pytest.raises(ValueError):
            DecisionStump(0, 0.0, 2)
        with pytest.raises(ValueError):
            DecisionStump(0, math.nan, 1)


class TestEnsemble:
    def test_outputs_are_stump_columns(self):
        data = random_dataset(1, 5, 2)
        stumps = (DecisionStump(0, 1.0, 1), DecisionStump(1, 2.0, -1))
        ens = Ensemble(stumps, WeightVector(np.array([0.5, 0.5])))
        outputs = ens.hypothesis_outputs(data.features)
        assert outputs.shape == (5, 2)
        for j, stump in enumerate(stumps):
            assert np.array_equal(outputs[:, j], stump.predict(data.features))
        assert len(ens) == 2

    def test_validation(self):
        stump = DecisionStump(0, 0.0, 1)
        with pytest.raises(ValueError):
            Ensemble((), WeightVector(np.array([])))
        with pytest.raises(ValueError):
            Ensemble((stump,), WeightVector(np.array([0.5, 0.5])))
        with pytest.raises(ValueError):
            Ensemble((stump,), WeightVector(np.array([-1.0])))


class TestTrainStump:
    def test_separable_example(self):
        data = line_dataset([1, 2, 3, 4], [1, 1, -1, -1])
        stump = train_stump(data, np.full(4, 0.25))
        assert (stump.feature, stump.threshold, stump.polarity) == (0, 2.5, -1)
        assert np.array_equal(stump.predict(data.features), data.labels)

    def test_alternating_example(self):
        # best achievable weighted error is 0.25; the tie order picks the
        # lowest qualifying threshold, in (1, 2), predicting + below
        data = line_dataset([1, 2, 3, 4], [1, -1, 1, -1])
        stump = train_stump(data, np.full(4, 0.25))
        assert (stump.feature, stump.threshold, stump.polarity) == (0, 1.5, -1)
        agreement = data.labels * stump.predict(data.features)
        assert float(np.mean(agreement == 1.0)) == 0.75

    def test_point_mass(self):
        data = line_dataset([1, 2, 3, 4], [-1, 1, 1, 1])
        stump = train_stump(data, np.array([1.0, 0.0, 0.0, 0.0]))
        assert stump.predict(data.features)[0] == -1.0

    def test_frozen_oracle_instance(self):
        # seed 88 on a half-integer grid; the expectation comes from the
        # exhaustive scan over every (feature, threshold, polarity). The
        # weight draw shares the dataset's generator, so replay it.
        data = random_dataset(88, 12, 3, grid=2)
        rng = rng_from(88)
        rng.uniform(0, 4, size=(12, 3))
        rng.choice([-1.0, 1.0], size=12)
        weights = rng.dirichlet(np.ones(12))
        stump = train_stump(data, weights)
        assert (stump.feature, stump.threshold, stump.polarity) == (2, 1.25, 1)

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_exhaustive_oracle(self, seed):
        n = 4 + seed
        d = 1 + seed % 3
        data = random_dataset(seed, n, d, grid=2 if seed % 2 else None)
        weights = rng_from(seed + 1000).dirichlet(np.ones(n))
        stump = train_stump(data, weights)
        (f, t, p), edge = best_stump_exhaustive(
            data.features, data.labels, weights
        )
        assert (stump.feature, stump.threshold, stump.polarity) == (f, t, p)
        got_edge = float(
            np.sum(weights * data.labels * stump.predict(data.features))
        )
        assert got_edge == pytest.approx(edge, abs=1e-12)

    def test_weight_validation(self):
        data = line_dataset([1, 2], [1, -1])
        with pytest.raises(ValueError):
            train_stump(data, np.array([0.5, -0.5]))
        with pytest.raises(ValueError):
            train_stump(data, np.array([0.0, 0.0]))
        with pytest.raises(ValueError):
            train_stump(data, np.array([0.5]))


class TestAdaBoostV:
    def test_perfect_single_stump(self):
        data = line_dataset([1, 2, 3, 4], [1, 1, -1, -1])
        ens = adaboost_v(data, BoostConfig(rounds=1))
        assert len(ens) == 1
        U = build_margin_matrix(data, ens)
        assert min_margin(U, ens.weights.normalized()) == 1.0

    def test_weights_nonnegative_and_positive_total(self):
        data = random_dataset(5, 30, 2)
        ens = adaboost_v(data, BoostConfig(rounds=20))
        assert np.all(ens.weights.values >= 0.0)
        assert ens.weights.l1_norm > 0.0

    def test_contradictory_duplicates_rejected(self):
        # identical points with opposite labels leave every stump at edge 0
        data = line_dataset([1, 1], [1, -1])
        with pytest.raises(ValueError):
            adaboost_v(data, BoostConfig(rounds=4))

    def test_early_stop_flag(self, monkeypatch):
        data = line_dataset([1, 2, 3, 4], [1, 1, -1, -1])
        real = boosting.train_stump
        calls = {"n": 0}

        def failing_learner(dataset, weights):
            calls["n"] += 1
            if calls["n"] >= 2:
                stump = real(dataset, weights)
                return DecisionStump(stump.feature, stump.threshold, -stump.polarity)
            return real(dataset, weights)

        monkeypatch.setattr(boosting, "train_stump", failing_learner)
        ens = adaboost_v(data, BoostConfig(rounds=5))
        assert ens.stopped_early
        assert len(ens) == 1

    def test_gap_rate_small_instance(self):
        xs = np.linspace(0, 1, 20)
        ys = np.where((xs > 0.3) & (xs <= 0.7), 1.0, -1.0)
        data = line_dataset(xs, ys)
        T = 64
        ens = adaboost_v(data, BoostConfig(rounds=T))
        U = build_margin_matrix(data, ens)
        rho_T = min_margin(U, ens.weights.normalized())
        rho_star, _ = lp_optimal_margin(U)
        assert rho_star - rho_T <= 4.0 * math.sqrt(math.log(20) / T)

    def test_rounds_validation(self):
        with pytest.raises(ValueError):
            BoostConfig(rounds=0)
        with pytest.raises(ValueError):
            BoostConfig(rounds=4, edge_cap=1.0)

    def test_margin_consistency_invariant(self):
        data = random_dataset(9, 25, 3)
        ens = adaboost_v(data, BoostConfig(rounds=12))
        w = ens.weights.normalized()
        U = build_margin_matrix(data, ens)
        direct = margins_double_loop(
            (data.labels[:, None] * ens.hypothesis_outputs(data.features)), w.values
        )
        assert np.max(np.abs(margins(U, w) - direct)) <= 1e-12


class TestLpOptimalMargin:
    def test_perfect_column(self):
        values = np.array([[1.0, -0.5], [1.0, 0.25], [1.0, 0.5]])
        rho, w = lp_optimal_margin(boosting.MarginMatrix(values))
        assert rho == pytest.approx(1.0, abs=1e-7)
        assert w.values[0] == pytest.approx(1.0, abs=1e-7)

    def test_symmetric_instance(self):
        U = boosting.MarginMatrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
        rho, w = lp_optimal_margin(U)
        assert rho == pytest.approx(0.0, abs=1e-7)
        assert w.values == pytest.approx([0.5, 0.5], abs=1e-7)

    def test_matches_grid_oracle_frozen(self):
        U = boosting.MarginMatrix(rng_from(55).uniform(-1.0, 1.0, size=(6, 4)))
        rho, _ = lp_optimal_margin(U)
        grid_best = -0.11800699500857484  # simplex grid, resolution 1/200
        assert grid_best == pytest.approx(lp_margin_grid(U.values, 200), abs=1e-12)
        assert rho >= grid_best - 1e-7
        assert abs(rho - grid_best) <= 1e-2

    @pytest.mark.parametrize("seed", range(5))
    def test_upper_bounds_every_feasible_weighting(self, seed):
        rng = rng_from(seed + 70)
        U = boosting.MarginMatrix(rng.uniform(-1.0, 1.0, size=(8, 5)))
        rho, w_star = lp_optimal_margin(U)
        assert min_margin(U, w_star) >= rho - 1e-7
        for _ in range(25):
            w = WeightVector(rng.dirichlet(np.ones(5)))
            assert min_margin(U, w) <= rho + 1e-7


class TestBudgetMultiplier:
    def test_documented_value(self):
        assert budget_multiplier(1024, 32) == 2

    def test_formula_and_base_invariance(self):
        for n, T in [(200, 16), (512, 64), (10_000, 10), (2, 1)]:
            expected = math.ceil(math.log10(n) / math.log10(2.0 + n / T))
            assert budget_multiplier(n, T) == expected

    def test_validation(self):
        with pytest.raises(ValueError):
            budget_multiplier(1, 4)
        with pytest.raises(ValueError):
            budget_multiplier(16, 0)


class TestSparsiBoost:
    def test_pipeline_postconditions(self):
        data = random_dataset(21, 60, 3)
        T = 8
        ens, report = sparsiboost(data, T, BoostConfig(rounds=1, seed=5))
        assert len(ens) <= T
        assert np.all(ens.weights.values >= 0.0)
        assert abs(ens.weights.l1_norm - 1.0) <= 1e-9
        c = budget_multiplier(60, T)
        assert report.initial_support <= c * T
        assert report.final_support == len(ens)

    def test_margin_chain_invariant(self):
        data = random_dataset(22, 80, 3)
        T = 8
        c = budget_multiplier(80, T)
        full = adaboost_v(data, BoostConfig(rounds=c * T))
        U = build_margin_matrix(data, full)
        w = full.weights.normalized()
        ens, report = sparsiboost(data, T, BoostConfig(rounds=1, seed=13))
        pruned_margin = float(
            np.min(
                data.labels
                * (ens.hypothesis_outputs(data.features) @ ens.weights.values)
            )
        )
        bound = 24.0 * math.sqrt(math.log(2.0 + 80 / T) / T)
        assert pruned_margin >= min_margin(U, w) - bound
        assert report.achieved_error <= bound
