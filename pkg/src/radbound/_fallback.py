"""Pure numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` function by function; used when the compiled
extension is unavailable or ``RADBOUND_PURE`` is set.
"""
import numpy as np

_BLOCK_ELEMS = 1 << 22


def exact_sign_average(values):
    """Mean over all 2^n sign vectors of max_i (1/n) sum_j sigma_j values[i, j]."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    m, n = values.shape
    total_vectors = 1 << n
    chunk = max(1, min(total_vectors, _BLOCK_ELEMS // max(m, n)))
    bits = np.arange(n, dtype=np.int64)
    total = 0.0
    for start in range(0, total_vectors, chunk):
        idx = np.arange(start, min(start + chunk, total_vectors), dtype=np.int64)
        signs = ((idx[:, None] >> bits) & 1) * 2.0 - 1.0
        total += float((signs @ values.T).max(axis=1).sum())
    return total / (n * total_vectors)


def pairwise_distances(values, q=2.0):
    """Symmetric matrix of empirical L_q distances between rows."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    m, n = values.shape
    out = np.empty((m, m))
    chunk = max(1, _BLOCK_ELEMS // max(1, m * n))
    for start in range(0, m, chunk):
        diff = np.abs(values[start:start + chunk, None, :] - values[None, :, :])
        if q == 2.0:
            out[start:start + chunk] = np.sqrt(np.mean(diff * diff, axis=2))
        elif q == 1.0:
            out[start:start + chunk] = np.mean(diff, axis=2)
        else:
            out[start:start + chunk] = np.mean(diff ** q, axis=2) ** (1.0 / q)
    return out


def greedy_cover(adj):
    """Greedy set cover on a symmetric boolean adjacency; ties to lowest index."""
    adj = np.asarray(adj, dtype=bool)
    m = adj.shape[0]
    counts = adj.sum(axis=1).astype(np.int64)
    uncovered = np.ones(m, dtype=bool)
    chosen = []
    while uncovered.any():
        j = int(np.argmax(counts))
        chosen.append(j)
        newly = uncovered & adj[j]
        counts -= adj[newly].sum(axis=0)
        uncovered &= ~newly
    return np.asarray(chosen, dtype=np.int64)


def exact_cover(adj):
    """Minimum-cardinality cover by branch and bound (m <= 64).

    Branches on the uncovered row with the fewest coverers, candidates in
    ascending index order; the greedy cover seeds the incumbent.
    """
    adj = np.asarray(adj, dtype=bool)
    m = adj.shape[0]
    if m > 64:
        raise ValueError("exact cover supports at most 64 rows")
    masks = []
    for row in adj:
        mask = 0
        for j in np.flatnonzero(row):
            mask |= 1 << int(j)
        masks.append(mask)
    degree = [bin(mk).count("1") for mk in masks]
    full = (1 << m) - 1
    best = [list(greedy_cover(adj))]

    def search(covered, chosen):
        if covered == full:
            if len(chosen) < len(best[0]):
                best[0] = list(chosen)
            return
        free = full & ~covered
        gain = max(bin(mk & free).count("1") for mk in masks)
        uncovered_count = bin(free).count("1")
        need = -(-uncovered_count // gain)
        if len(chosen) + need >= len(best[0]):
            return
        pivot = -1
        for e in range(m):
            if free >> e & 1 and (pivot < 0 or degree[e] < degree[pivot]):
                pivot = e
        cand = masks[pivot]
        for j in range(m):
            if cand >> j & 1:
                chosen.append(j)
                search(covered | masks[j], chosen)
                chosen.pop()

    search(0, [])
    return np.asarray(sorted(best[0]), dtype=np.int64)
