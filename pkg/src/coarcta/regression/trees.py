"""CART regression trees grown level-wise (depth-first) or best-first by leaf count."""
import heapq

import numpy as np

from coarcta import kernels


class Tree:
    """Binary regression tree stored as flat node arrays.

    ``left[i] == -1`` marks a leaf. Rows with ``x[feature] <= threshold`` go left.
    """

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def node_count(self):
        return self.value.size

    @property
    def n_leaves(self):
        return int(np.sum(self.left < 0))

    @property
    def depth(self):
        depth = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.left[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X):
        return kernels.tree_apply(X, self.feature, self.threshold, self.left, self.right)

    def predict(self, X):
        return self.value[self.apply(X)]

    def get_state(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_state(cls, state):
        return cls(state["feature"], state["threshold"], state["left"], state["right"], state["value"])


class _Builder:
    def __init__(self, X, y, max_depth, min_samples_leaf, min_samples_split, max_features, rng):
        self.X = X
        self.y = y
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.rng = rng
        self.n_features = X.shape[1]
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def new_node(self, idx):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(np.mean(self.y[idx])))
        return len(self.value) - 1

    def find_split(self, idx, depth):
        """(feature, threshold, gain) or None if the node must stay a leaf."""
        if self.max_depth is not None and depth >= self.max_depth:
            return None
        if idx.size < max(self.min_samples_split, 2 * self.min_samples_leaf):
            return None
        ys = self.y[idx]
        if ys.min() == ys.max():
            return None
        p = self.n_features
        m = self.max_features
        if m is None or m >= p:
            feature, threshold, gain = kernels.best_split(self.X, self.y, idx, np.arange(p), self.min_samples_leaf)
        else:
            # draw a feature subset; fall back to the rest if none of it can split
            perm = self.rng.permutation(p)
            feature, threshold, gain = kernels.best_split(self.X, self.y, idx, perm[:m], self.min_samples_leaf)
            if feature < 0:
                feature, threshold, gain = kernels.best_split(self.X, self.y, idx, perm[m:], self.min_samples_leaf)
        if feature < 0 or not gain > 0.0:
            return None
        return feature, threshold, gain

    def split(self, node, idx, feature, threshold):
        go_left = self.X[idx, feature] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        self.feature[node] = feature
        self.threshold[node] = threshold
        left = self.new_node(left_idx)
        right = self.new_node(right_idx)
        self.left[node] = left
        self.right[node] = right
        return (left, left_idx), (right, right_idx)

    def tree(self):
        return Tree(self.feature, self.threshold, self.left, self.right, self.value)


def grow_tree(
    X,
    y,
    sample_idx=None,
    max_depth=None,
    min_samples_leaf=1,
    min_samples_split=2,
    max_features=None,
    max_leaves=None,
    growth="depthwise",
    rng=None,
):
    """Grow a least-squares regression tree.

    ``growth="depthwise"`` expands every node until the stopping rules hit
    (``max_leaves`` is ignored); ``growth="leafwise"`` always expands the frontier leaf with the largest
    squared-error reduction until ``max_leaves`` leaves exist. ``sample_idx``
    may repeat rows (bootstrap samples).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if sample_idx is None:
        sample_idx = np.arange(X.shape[0], dtype=np.int64)
    sample_idx = np.asarray(sample_idx, dtype=np.int64)
    if sample_idx.size == 0:
        raise ValueError("cannot grow a tree on zero samples")
    if max_features is not None and max_features < X.shape[1] and rng is None:
        raise ValueError("a random generator is required for feature subsampling")
    b = _Builder(X, y, max_depth, min_samples_leaf, min_samples_split, max_features, rng)
    root = b.new_node(sample_idx)

    if growth == "depthwise":
        stack = [(root, sample_idx, 0)]
        while stack:
            node, idx, depth = stack.pop()
            found = b.find_split(idx, depth)
            if found is None:
                continue
            (lnode, lidx), (rnode, ridx) = b.split(node, idx, found[0], found[1])
            stack.append((rnode, ridx, depth + 1))
            stack.append((lnode, lidx, depth + 1))
    elif growth == "leafwise":
        if max_leaves is None:
            raise ValueError("leafwise growth needs max_leaves")
        heap = []
        counter = 0

        def push(node, idx, depth):
            nonlocal counter
            found = b.find_split(idx, depth)
            if found is not None:
                heapq.heappush(heap, (-found[2], counter, node, idx, depth, found))
                counter += 1

        push(root, sample_idx, 0)
        n_leaves = 1
        while heap and n_leaves < max_leaves:
            _, _, node, idx, depth, found = heapq.heappop(heap)
            (lnode, lidx), (rnode, ridx) = b.split(node, idx, found[0], found[1])
            n_leaves += 1
            push(lnode, lidx, depth + 1)
            push(rnode, ridx, depth + 1)
    else:
        raise ValueError(f"unknown growth {growth!r}")
    return b.tree()


class DecisionTreeRegressor:
    def __init__(self, max_depth=None, min_samples_leaf=1, min_samples_split=2):
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.min_samples_split = min_samples_split
        self.tree_ = None

    def fit(self, X, y):
        self.tree_ = grow_tree(
            X, y,
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            min_samples_split=self.min_samples_split,
        )
        return self

    def predict(self, X):
        return self.tree_.predict(X)

    def get_state(self):
        return {"tree": self.tree_.get_state()}

    def set_state(self, state):
        self.tree_ = Tree.from_state(state["tree"])
        return self
