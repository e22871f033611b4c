# cython: language_level=3
"""Compiled hot kernels; see ``_fallback.py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()


cdef struct Pair:
    double value
    Py_ssize_t pos
    double target


cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef const Pair* pa = <const Pair*> a
    cdef const Pair* pb = <const Pair*> b
    if pa.value < pb.value:
        return -1
    if pa.value > pb.value:
        return 1
    # stable order on equal values
    if pa.pos < pb.pos:
        return -1
    if pa.pos > pb.pos:
        return 1
    return 0


DEF TIE_RTOL = 1e-12


def best_split(const double[:, ::1] X, const double[::1] y,
               const cnp.int64_t[::1] idx, const cnp.int64_t[::1] features,
               Py_ssize_t min_leaf):
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t n_feat = features.shape[0]
    cdef Py_ssize_t a, i, f, hit_f = -1, hit_i = -1
    cdef double s, r, score, nl, nr, thr, band
    cdef double best = -INFINITY
    cdef Pair* buf
    cdef double* scores
    cdef double* values
    cdef double* totals
    if m < 2 * min_leaf or m < 2:
        return -1, 0.0, 0.0
    buf = <Pair*> malloc(m * sizeof(Pair))
    scores = <double*> malloc(n_feat * (m - 1) * sizeof(double))
    values = <double*> malloc(n_feat * m * sizeof(double))
    totals = <double*> malloc(n_feat * sizeof(double))
    if buf == NULL or scores == NULL or values == NULL or totals == NULL:
        free(buf); free(scores); free(values); free(totals)
        raise MemoryError()
    try:
        with nogil:
            for a in range(n_feat):
                f = features[a]
                for i in range(m):
                    buf[i].value = X[idx[i], f]
                    buf[i].pos = i
                    buf[i].target = y[idx[i]]
                qsort(buf, m, sizeof(Pair), _cmp_pair)
                totals[a] = 0.0
                for i in range(m):
                    totals[a] = totals[a] + buf[i].target
                    values[a * m + i] = buf[i].value
                s = 0.0
                for i in range(m - 1):
                    s = s + buf[i].target
                    scores[a * (m - 1) + i] = -INFINITY
                    if i + 1 < min_leaf or m - i - 1 < min_leaf:
                        continue
                    if buf[i].value == buf[i + 1].value:
                        continue
                    nl = <double> (i + 1)
                    nr = <double> (m - i - 1)
                    r = totals[a] - s
                    score = s * s / nl + r * r / nr
                    scores[a * (m - 1) + i] = score
                    if score > best:
                        best = score
            if best != -INFINITY:
                band = best - TIE_RTOL * fabs(best)
                for a in range(n_feat):
                    for i in range(m - 1):
                        if scores[a * (m - 1) + i] >= band:
                            hit_f = a
                            hit_i = i
                            break
                    if hit_f >= 0:
                        break
        if hit_f < 0:
            return -1, 0.0, 0.0
        i = hit_i
        thr = (values[hit_f * m + i] + values[hit_f * m + i + 1]) / 2.0
        if thr == values[hit_f * m + i + 1]:
            thr = values[hit_f * m + i]
        score = scores[hit_f * (m - 1) + i]
        return int(features[hit_f]), thr, score - totals[hit_f] * totals[hit_f] / <double> m
    finally:
        free(buf); free(scores); free(values); free(totals)


def knn_predict(const double[:, ::1] X_train, const double[::1] y_train,
                const double[:, ::1] X_query, Py_ssize_t k):
    cdef Py_ssize_t n = X_train.shape[0]
    cdef Py_ssize_t p = X_train.shape[1]
    cdef Py_ssize_t q = X_query.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(q, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* bd = <double*> malloc(k * sizeof(double))
    cdef double* dist = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t i, j, f, filled, pos, room
    cdef double d, diff, acc, lo, hi
    if bd == NULL or dist == NULL:
        free(bd)
        free(dist)
        raise MemoryError()
    try:
        with nogil:
            for i in range(q):
                # k smallest squared distances, kept sorted
                filled = 0
                for j in range(n):
                    d = 0.0
                    for f in range(p):
                        diff = X_query[i, f] - X_train[j, f]
                        d = d + diff * diff
                    dist[j] = d
                    if filled == k and not (d < bd[k - 1]):
                        continue
                    pos = filled if filled < k else k - 1
                    while pos > 0 and bd[pos - 1] > d:
                        if pos < k:
                            bd[pos] = bd[pos - 1]
                        pos -= 1
                    bd[pos] = d
                    if filled < k:
                        filled += 1
                lo = bd[k - 1] - TIE_RTOL * bd[k - 1]
                hi = bd[k - 1] + TIE_RTOL * bd[k - 1]
                room = k
                for j in range(n):
                    if dist[j] < lo:
                        room -= 1
                acc = 0.0
                for j in range(n):
                    if dist[j] < lo:
                        acc = acc + y_train[j]
                    elif dist[j] <= hi and room > 0:
                        acc = acc + y_train[j]
                        room -= 1
                    else:
                        acc = acc + 0.0
                out[i] = acc / <double> k
    finally:
        free(bd)
        free(dist)
    return out_arr


def tree_apply(const double[:, ::1] X, const cnp.int64_t[::1] feature,
               const double[::1] threshold, const cnp.int64_t[::1] left,
               const cnp.int64_t[::1] right):
    cdef Py_ssize_t n = X.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef cnp.int64_t node
    with nogil:
        for i in range(n):
            node = 0
            while left[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
    return out_arr
