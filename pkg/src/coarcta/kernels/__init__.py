"""Hot kernels for tree split search, k-NN queries and tree traversal.

The compiled Cython backend is used when it was built; otherwise the numpy
fallback is selected. Set ``COARCTA_PURE_PYTHON=1`` to force the fallback.
Both backends return bit-identical results.
"""
import os

import numpy as np

from coarcta.kernels import _fallback

try:
    from coarcta.kernels import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = {"python": _fallback}
if _core is not None:
    BACKENDS["cython"] = _core

if _core is not None and os.environ.get("COARCTA_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def get_backend(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _impl
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available; have {sorted(BACKENDS)}") from None


def set_backend(name):
    """Switch the active backend process-wide; returns the previous name."""
    global BACKEND, _impl
    previous = BACKEND
    _impl = get_backend(name)
    BACKEND = name
    return previous


def _prep_split(X, y, idx, features):
    return (
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(idx, dtype=np.int64),
        np.ascontiguousarray(features, dtype=np.int64),
    )


def best_split(X, y, idx, features, min_leaf=1, backend=None):
    X, y, idx, features = _prep_split(X, y, idx, features)
    return get_backend(backend).best_split(X, y, idx, features, int(min_leaf))


def knn_predict(X_train, y_train, X_query, k, backend=None):
    return get_backend(backend).knn_predict(
        np.ascontiguousarray(X_train, dtype=np.float64),
        np.ascontiguousarray(y_train, dtype=np.float64),
        np.ascontiguousarray(X_query, dtype=np.float64),
        int(k),
    )


def tree_apply(X, feature, threshold, left, right, backend=None):
    return get_backend(backend).tree_apply(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(feature, dtype=np.int64),
        np.ascontiguousarray(threshold, dtype=np.float64),
        np.ascontiguousarray(left, dtype=np.int64),
        np.ascontiguousarray(right, dtype=np.int64),
    )
