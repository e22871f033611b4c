"""Pure numpy implementations of the hot kernels.

Arithmetic is ordered exactly as in ``_core.pyx`` (sequential prefix sums,
per-feature squared-distance accumulation) so both backends return identical
floating point results.
"""
import numpy as np

_QUERY_CHUNK = 512


TIE_RTOL = 1e-12


def best_split(X, y, idx, features, min_leaf):
    """Best least-squares binary split of the rows ``idx``.

    Candidate thresholds are midpoints between consecutive distinct values of
    each feature in ``features``. The split score is ``S_l**2/n_l + S_r**2/n_r``
    (maximising it minimises the summed within-child squared error). Every
    candidate scoring within ``TIE_RTOL`` (relative) of the best counts as
    tied, and the first tied candidate in (feature order, ascending
    threshold) wins, so equal-quality splits are not chosen by rounding noise.

    Returns ``(feature, threshold, gain)``; ``feature == -1`` when no split
    satisfies ``min_leaf``. ``gain`` is the reduction in squared error.
    """
    m = idx.shape[0]
    if m < 2 * min_leaf or m < 2:
        return -1, 0.0, 0.0
    ys = y[idx]
    n_left = np.arange(1, m, dtype=np.float64)
    n_right = m - n_left
    positions = np.arange(m - 1)
    size_ok = (positions + 1 >= min_leaf) & (m - positions - 1 >= min_leaf)
    per_feature = []
    best = -np.inf
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        v = vals[order]
        cs = np.cumsum(ys[order])
        total = cs[-1]
        s = cs[:-1]
        r = total - s
        score = s * s / n_left + r * r / n_right
        valid = size_ok & (v[:-1] != v[1:])
        score = np.where(valid, score, -np.inf)
        if valid.any():
            best = max(best, score.max())
        per_feature.append((int(f), v, score, total))
    if best == -np.inf:
        return -1, 0.0, 0.0
    band = best - TIE_RTOL * abs(best)
    for f, v, score, total in per_feature:
        hits = np.flatnonzero(score >= band)
        if hits.size:
            i = int(hits[0])
            threshold = (v[i] + v[i + 1]) / 2.0
            if threshold == v[i + 1]:
                threshold = v[i]
            return f, float(threshold), float(score[i] - total * total / m)
    return -1, 0.0, 0.0  # unreachable


def knn_predict(X_train, y_train, X_query, k):
    """Mean target of the ``k`` Euclidean-nearest training rows.

    Training rows whose squared distance lies within ``TIE_RTOL`` (relative)
    of the k-th smallest count as tied with it; tied rows are taken in
    training-row order. Targets are summed in training-row order.
    """
    n_query = X_query.shape[0]
    n_features = X_train.shape[1]
    out = np.empty(n_query, dtype=np.float64)
    for start in range(0, n_query, _QUERY_CHUNK):
        q = X_query[start:start + _QUERY_CHUNK]
        d = np.zeros((q.shape[0], X_train.shape[0]))
        for f in range(n_features):
            diff = q[:, f, None] - X_train[None, :, f]
            d += diff * diff
        dk = np.partition(d, k - 1, axis=1)[:, k - 1]
        lo = (dk - TIE_RTOL * dk)[:, None]
        hi = (dk + TIE_RTOL * dk)[:, None]
        definite = d < lo
        band = (d >= lo) & (d <= hi)
        room = k - definite.sum(axis=1, keepdims=True)
        chosen = definite | (band & (np.cumsum(band, axis=1) <= room))
        # cumulative sum is sequential, matching the compiled loop bit for bit
        acc = np.cumsum(np.where(chosen, y_train[None, :], 0.0), axis=1)[:, -1]
        out[start:start + q.shape[0]] = acc / k
    return out


def tree_apply(X, feature, threshold, left, right):
    """Leaf index reached by every row of ``X`` (``x <= threshold`` goes left)."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(left[node] >= 0)
    while active.size:
        cur = node[active]
        go_left = X[active, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[left[node[active]] >= 0]
    return node
