import numpy as np
import pytest

from coarcta.errors import ModelSpecError, SingularDesignError, TransformMismatchError
from coarcta.features import EncodingMap, FeatureMatrix, FeatureTransform
from coarcta.regression import (
    ModelSpec,
    compute_rmse,
    fit_model,
    grid_search,
    make_voting_ensemble,
)
from coarcta.regression.ensemble import GradientBoostingRegressor, RandomForestRegressor
from coarcta.regression.knn import KNeighborsRegressor
from coarcta.regression.linear import LinearRegression
from coarcta.regression.svr import LinearSVR, svr_objective
from coarcta.regression.trees import DecisionTreeRegressor, grow_tree
from oracles import tree_oracle, tree_predict_oracle


def matrix(X, y):
    X = np.asarray(X, float)
    y = np.asarray(y, float)
    return FeatureMatrix(X, y, np.expm1(y), np.arange(len(y)))


class TestLinear:
    def test_exact_line(self):
        m = LinearRegression().fit(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]))
        assert m.coef_[0] == pytest.approx(2.0, abs=1e-12)
        assert m.intercept_ == pytest.approx(0.0, abs=1e-12)

    def test_singular_design(self):
        X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(SingularDesignError, match="regulari"):
            LinearRegression().fit(X, np.array([1.0, 2.0, 3.0]))


class TestKNN:
    def test_two_neighbours(self):
        m = KNeighborsRegressor(k=2).fit(np.array([[0.0], [1.0], [2.0]]), np.array([0.0, 1.0, 4.0]))
        assert m.predict(np.array([[1.6]]))[0] == pytest.approx(2.5)

    def test_tie_broken_by_index(self):
        m = KNeighborsRegressor(k=1).fit(np.array([[0.0], [2.0]]), np.array([5.0, 7.0]))
        assert m.predict(np.array([[1.0]]))[0] == 5.0

    def test_tie_cut_takes_lowest_indices(self):
        X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        m = KNeighborsRegressor(k=3).fit(X, np.array([1.0, 2.0, 4.0, 8.0]))
        assert m.predict(np.array([[0.0]]))[0] == pytest.approx(7.0 / 3.0)

    def test_tie_despite_rounding(self):
        # both rows sit at squared distance 4.34, rounded differently
        X = np.array([[-1.6, -1.6, -0.6], [-0.4, 0.6, 0.6]])
        m = KNeighborsRegressor(k=1).fit(X, np.array([1.0, 2.0]))
        assert m.predict(np.array([[0.4, -1.1, -0.3]]))[0] == 1.0

    def test_k_exceeds_rows(self, unit_transform):
        with pytest.raises(ModelSpecError):
            fit_model(ModelSpec("knn", {"k": 5}), np.zeros((3, 4)), np.zeros(3), unit_transform)


class TestTrees:
    def test_matches_recursive_oracle(self, rng):
        for _ in range(20):
            X = np.round(rng.normal(size=(30, 3)), 1)
            y = rng.normal(size=30)
            ours = DecisionTreeRegressor().fit(X, y)
            ref = tree_oracle(X, y, list(range(30)))
            Q = rng.normal(size=(50, 3))
            np.testing.assert_allclose(ours.predict(Q), tree_predict_oracle(ref, Q), atol=1e-12)

    def test_full_tree_interpolates_distinct_rows(self, rng):
        X = rng.normal(size=(25, 2))
        y = rng.normal(size=25)
        np.testing.assert_allclose(DecisionTreeRegressor().fit(X, y).predict(X), y, atol=1e-12)

    def test_depth_limit(self, rng):
        X = rng.normal(size=(100, 2))
        t = grow_tree(X, rng.normal(size=100), max_depth=3)
        assert t.depth <= 3

    def test_leafwise_leaf_budget(self, rng):
        X = rng.normal(size=(100, 2))
        t = grow_tree(X, rng.normal(size=100), max_leaves=7, growth="leafwise")
        assert t.n_leaves == 7

    def test_state_round_trip(self, rng):
        X = rng.normal(size=(40, 2))
        m = DecisionTreeRegressor(max_depth=4).fit(X, rng.normal(size=40))
        back = DecisionTreeRegressor().set_state(m.get_state())
        assert np.array_equal(back.predict(X), m.predict(X))


class TestEnsembles:
    def test_forest_deterministic(self, rng):
        X = rng.normal(size=(60, 4))
        y = rng.normal(size=60)
        probe = rng.normal(size=(20, 4))
        a = RandomForestRegressor(n_trees=15, seed=9).fit(X, y).predict(probe)
        b = RandomForestRegressor(n_trees=15, seed=9).fit(X, y).predict(probe)
        c = RandomForestRegressor(n_trees=15, seed=10).fit(X, y).predict(probe)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_zero_stage_boosting_is_mean(self, rng):
        X = rng.normal(size=(10, 2))
        y = rng.normal(size=10)
        m = GradientBoostingRegressor(n_stages=0).fit(X, y)
        assert np.allclose(m.predict(rng.normal(size=(5, 2))), y.mean(), atol=1e-15)

    def test_staged_predict_ends_at_predict(self, rng):
        X = rng.normal(size=(30, 2))
        m = GradientBoostingRegressor(n_stages=8, max_depth=2).fit(X, rng.normal(size=30))
        stages = list(m.staged_predict(X))
        assert len(stages) == 9
        assert np.array_equal(stages[-1], m.predict(X))


class TestSVR:
    def test_keeps_lowest_objective(self, rng):
        X = rng.normal(size=(40, 2))
        y = X @ np.array([0.5, -1.0]) + 0.3
        m = LinearSVR(C=10.0, n_iter=300).fit(X, y)
        start = svr_objective(np.zeros(2), float(np.median(y)), X, y, 10.0, 0.01)
        assert m.objective_ <= start
        assert m.objective_ == svr_objective(m.coef_, m.intercept_, X, y, 10.0, 0.01)

    def test_fits_line(self, rng):
        X = rng.normal(size=(80, 1))
        y = 0.4 * X[:, 0] + 1.0
        m = LinearSVR(C=100.0, n_iter=2000, learning_rate=0.05).fit(X, y)
        assert compute_rmse(m.predict(X), y) < 0.05


class TestModelSpec:
    def test_defaults_merged(self):
        assert ModelSpec("knn").hyperparameters == {"k": 5}

    def test_unknown_family(self):
        with pytest.raises(ModelSpecError):
            ModelSpec("lasso")

    def test_unknown_hyperparameter(self):
        with pytest.raises(ModelSpecError, match="depth"):
            ModelSpec("knn", {"depth": 3})

    def test_invalid_value(self):
        with pytest.raises(ModelSpecError):
            ModelSpec("gradient_boosted", {"learning_rate": -0.1})


class TestVoting:
    def test_mean_of_members(self, unit_transform):
        X = np.zeros((2, 4))
        low = fit_model(ModelSpec("knn", {"k": 1}), X, np.log1p([1.0, 1.0]), unit_transform, "a")
        high = fit_model(ModelSpec("knn", {"k": 1}), X, np.log1p([3.0, 3.0]), unit_transform, "b")
        vote = make_voting_ensemble([low, high])
        np.testing.assert_allclose(vote.predict_velocity(X[:1]), [2.0], atol=1e-12)

    def test_identical_members(self, unit_transform, rng):
        X = rng.normal(size=(10, 4))
        y = np.log1p(rng.uniform(0, 2, 10))
        a = fit_model(ModelSpec("knn", {"k": 3}), X, y, unit_transform)
        vote = make_voting_ensemble([a, a])
        assert np.array_equal(vote.predict_velocity(X), a.predict_velocity(X))

    def test_mismatched_transforms(self, unit_transform):
        other = FeatureTransform(
            EncodingMap("vessel", ("coarctation",)), unit_transform.case_map, unit_transform.scaler)
        X = np.zeros((2, 4))
        a = fit_model(ModelSpec("knn", {"k": 1}), X, np.zeros(2), unit_transform)
        b = fit_model(ModelSpec("knn", {"k": 1}), X, np.zeros(2), other)
        with pytest.raises(TransformMismatchError):
            make_voting_ensemble([a, b])

    def test_fit_needs_transform(self):
        with pytest.raises(TransformMismatchError):
            fit_model(ModelSpec("linear"), np.zeros((3, 1)), np.zeros(3))


class TestRMSE:
    def test_symmetric_residuals(self):
        assert compute_rmse([1.0, -1.0], [0.0, 0.0]) == 1.0

    def test_identity(self):
        assert compute_rmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_value(self):
        assert compute_rmse([1.0, 2.0], [2.0, 2.0]) == pytest.approx(0.70711, abs=1e-5)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            compute_rmse([1.0], [1.0, 2.0])


class TestGridSearch:
    def test_picks_lower_validation_rmse(self, unit_transform):
        # alternating targets: k=1 copies the last training row for every
        # query, k=3 blends both levels and lands closer on average
        x = np.arange(12.0)[:, None] * np.ones((1, 4))
        y = np.log1p(np.where(np.arange(12) % 2 == 0, 1.0, 2.0))
        train, val = matrix(x[:8], y[:8]), matrix(x[8:] + 0.5, y[8:])
        rmse = {}
        for k in (1, 3):
            m = fit_model(ModelSpec("knn", {"k": k}), train.X, train.y, unit_transform)
            rmse[k] = compute_rmse(m.predict_velocity(val.X), val.velocity)
        result = grid_search("knn", {"k": [1, 3]}, train, val, unit_transform)
        assert rmse[3] < rmse[1]
        assert result.best_spec.hyperparameters["k"] == 3
        assert result.best_rmse == pytest.approx(min(rmse.values()))

    def test_single_point(self, unit_transform, rng):
        train = matrix(rng.normal(size=(10, 4)), rng.uniform(0, 1, 10))
        val = matrix(rng.normal(size=(4, 4)), rng.uniform(0, 1, 4))
        result = grid_search("knn", {"k": [2]}, train, val, unit_transform)
        assert result.best_spec.hyperparameters["k"] == 2
        assert len(result.results) == 1
