"""Bagged forests and least-squares gradient boosting."""
import math

import numpy as np

from coarcta.regression.trees import Tree, grow_tree


def tree_rng(seed, tree_index):
    """Independent generator for one ensemble member, derived from the model seed."""
    return np.random.default_rng([int(seed), int(tree_index)])


def bootstrap_indices(rng, n):
    return rng.integers(0, n, size=n)


def resolve_max_features(max_features, n_features):
    if max_features is None:
        return None
    if max_features == "third":
        return max(1, math.ceil(n_features / 3))
    if max_features == "all":
        return None
    return int(max_features)


class RandomForestRegressor:
    """Bootstrap-aggregated CART trees with a random feature subset per split."""

    def __init__(self, n_trees=100, max_depth=None, max_features="third", min_samples_leaf=1,
                 bootstrap=True, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees_ = []

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        n, p = X.shape
        m = resolve_max_features(self.max_features, p)
        self.trees_ = []
        for t in range(self.n_trees):
            rng = tree_rng(self.seed, t)
            idx = bootstrap_indices(rng, n) if self.bootstrap else np.arange(n)
            self.trees_.append(grow_tree(
                X, y, sample_idx=idx,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                max_features=m,
                rng=rng,
            ))
        return self

    def predict(self, X):
        acc = np.zeros(np.asarray(X).shape[0])
        for tree in self.trees_:
            acc += tree.predict(X)
        return acc / len(self.trees_)

    def get_state(self):
        return {"trees": [t.get_state() for t in self.trees_]}

    def set_state(self, state):
        self.trees_ = [Tree.from_state(s) for s in state["trees"]]
        return self


class GradientBoostingRegressor:
    """Stagewise least-squares boosting of regression trees on residuals.

    ``growth="depthwise"`` bounds each tree by ``max_depth``;
    ``growth="leafwise"`` grows best-first up to ``max_leaves`` leaves.
    """

    def __init__(self, n_stages=100, learning_rate=0.1, max_depth=3, min_samples_leaf=1,
                 growth="depthwise", max_leaves=31):
        self.n_stages = n_stages
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.growth = growth
        self.max_leaves = max_leaves
        self.init_ = None
        self.trees_ = []
        self.train_rmse_ = None

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        self.init_ = float(np.mean(y))
        F = np.full(y.shape, self.init_)
        self.trees_ = []
        rmse = [float(np.sqrt(np.mean((y - F) ** 2)))]
        for _ in range(self.n_stages):
            residual = y - F
            tree = grow_tree(
                X, residual,
                max_depth=self.max_depth,
                min_samples_leaf=self.min_samples_leaf,
                max_leaves=self.max_leaves if self.growth == "leafwise" else None,
                growth=self.growth,
            )
            F = F + self.learning_rate * tree.predict(X)
            self.trees_.append(tree)
            rmse.append(float(np.sqrt(np.mean((y - F) ** 2))))
        self.train_rmse_ = np.array(rmse)
        return self

    def staged_predict(self, X):
        F = np.full(np.asarray(X).shape[0], self.init_)
        yield F
        for tree in self.trees_:
            F = F + self.learning_rate * tree.predict(X)
            yield F

    def predict(self, X):
        F = np.full(np.asarray(X).shape[0], self.init_)
        for tree in self.trees_:
            F = F + self.learning_rate * tree.predict(X)
        return F

    def get_state(self):
        return {"init": self.init_, "trees": [t.get_state() for t in self.trees_]}

    def set_state(self, state):
        self.init_ = float(state["init"])
        self.trees_ = [Tree.from_state(s) for s in state["trees"]]
        return self
