# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: sign enumeration, distances and set covers.

Each function has a numpy twin in ``_fallback`` with the same contract.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs, INFINITY

cnp.import_array()

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_ctzll(u64) nogil
    int __builtin_popcountll(u64) nogil


def exact_sign_average(values):
    """Mean over all 2^n sign vectors of max_i (1/n) sum_j sigma_j values[i, j].

    Walks the sign vectors in Gray-code order so each step flips one sign
    and updates every row sum in O(m).
    """
    cdef const double[:, ::1] vt = np.ascontiguousarray(np.asarray(values, dtype=np.float64).T)
    cdef Py_ssize_t n = vt.shape[0]
    cdef Py_ssize_t m = vt.shape[1]
    if n > 62:
        raise ValueError("too many sample points for exact enumeration")
    cdef double[::1] s = np.zeros(m)
    cdef signed char[::1] sigma = np.full(n, -1, dtype=np.int8)
    cdef u64 total_vectors = (<u64>1) << n
    cdef u64 t
    cdef Py_ssize_t i, j
    cdef double best, total, f
    with nogil:
        for j in range(n):
            for i in range(m):
                s[i] -= vt[j, i]
        best = -INFINITY
        for i in range(m):
            if s[i] > best:
                best = s[i]
        total = best
        t = 1
        while t < total_vectors:
            j = __builtin_ctzll(t)
            sigma[j] = -sigma[j]
            f = 2.0 * sigma[j]
            best = -INFINITY
            for i in range(m):
                s[i] += f * vt[j, i]
                if s[i] > best:
                    best = s[i]
            total += best
            t += 1
    return total / (n * <double>total_vectors)


def pairwise_distances(values, double q=2.0):
    """Symmetric matrix of empirical L_q distances between rows."""
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0]
    cdef Py_ssize_t n = v.shape[1]
    out_arr = np.zeros((m, m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t a, c, k
    cdef double acc, d
    with nogil:
        for a in range(m):
            for c in range(a + 1, m):
                acc = 0.0
                if q == 2.0:
                    for k in range(n):
                        d = v[a, k] - v[c, k]
                        acc += d * d
                    d = sqrt(acc / n)
                elif q == 1.0:
                    for k in range(n):
                        acc += fabs(v[a, k] - v[c, k])
                    d = acc / n
                else:
                    for k in range(n):
                        acc += pow(fabs(v[a, k] - v[c, k]), q)
                    d = pow(acc / n, 1.0 / q)
                out[a, c] = d
                out[c, a] = d
    return out_arr


def greedy_cover(adj):
    """Greedy set cover on a symmetric boolean adjacency; ties to lowest index."""
    cdef const cnp.uint8_t[:, ::1] a = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef Py_ssize_t m = a.shape[0]
    cdef cnp.int64_t[::1] counts = np.zeros(m, dtype=np.int64)
    cdef cnp.uint8_t[::1] uncovered = np.ones(m, dtype=np.uint8)
    chosen_arr = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] chosen = chosen_arr
    cdef Py_ssize_t i, j, k, best_j, remaining = m, size = 0
    cdef cnp.int64_t best
    with nogil:
        for i in range(m):
            for j in range(m):
                counts[i] += a[i, j]
        while remaining > 0:
            best = -1
            best_j = 0
            for j in range(m):
                if counts[j] > best:
                    best = counts[j]
                    best_j = j
            chosen[size] = best_j
            size += 1
            for i in range(m):
                if uncovered[i] and a[best_j, i]:
                    uncovered[i] = 0
                    remaining -= 1
                    for k in range(m):
                        counts[k] -= a[i, k]
    return chosen_arr[:size].copy()


cdef struct CoverState:
    u64 full
    int m
    int best_size
    u64 best_set
    u64* masks
    int* degree


cdef void _search(CoverState* st, u64 covered, u64 chosen, int depth) noexcept nogil:
    cdef u64 free, cand
    cdef int gain, g, uncovered_count, need, pivot, e, j
    if covered == st.full:
        if depth < st.best_size:
            st.best_size = depth
            st.best_set = chosen
        return
    free = st.full & ~covered
    gain = 0
    for j in range(st.m):
        g = __builtin_popcountll(st.masks[j] & free)
        if g > gain:
            gain = g
    uncovered_count = __builtin_popcountll(free)
    need = (uncovered_count + gain - 1) // gain
    if depth + need >= st.best_size:
        return
    pivot = -1
    for e in range(st.m):
        if (free >> e) & 1:
            if pivot < 0 or st.degree[e] < st.degree[pivot]:
                pivot = e
    cand = st.masks[pivot]
    for j in range(st.m):
        if (cand >> j) & 1:
            _search(st, covered | st.masks[j], chosen | ((<u64>1) << j), depth + 1)


def exact_cover(adj):
    """Minimum-cardinality cover by branch and bound (m <= 64).

    Branches on the uncovered row with the fewest coverers, candidates in
    ascending index order; the greedy cover seeds the incumbent.
    """
    adj_arr = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef Py_ssize_t m = adj_arr.shape[0]
    if m > 64:
        raise ValueError("exact cover supports at most 64 rows")
    cdef const cnp.uint8_t[:, ::1] a = adj_arr
    masks_arr = np.zeros(m, dtype=np.uint64)
    degree_arr = np.zeros(m, dtype=np.intc)
    cdef cnp.uint64_t[::1] masks = masks_arr
    cdef int[::1] degree = degree_arr
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(m):
            if a[i, j]:
                masks[i] |= (<u64>1) << j
        degree[i] = __builtin_popcountll(masks[i])
    greedy = greedy_cover(adj_arr)
    cdef CoverState st
    st.m = <int>m
    st.full = ((<u64>1) << m) - 1 if m < 64 else <u64>0xFFFFFFFFFFFFFFFF
    st.best_size = <int>len(greedy)
    st.best_set = 0
    for j in greedy:
        st.best_set |= (<u64>1) << <int>j
    st.masks = <u64*>&masks[0]
    st.degree = &degree[0]
    with nogil:
        _search(&st, 0, 0, 0)
    return np.asarray([j for j in range(m) if (st.best_set >> j) & 1], dtype=np.int64)
