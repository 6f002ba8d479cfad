"""Pure-Python clearing kernels.

Reference implementation of the compiled ``_kernels`` module; the two must
agree exactly. Inputs are assumed validated by :mod:`flexauc.auction`:
``bids`` is an ``(N, C)`` float64 array with non-increasing rows and
``counts`` a length-``N`` int64 array summing to ``C``.

Bid order is the total order (value desc, WSP index asc, rank asc).
"""

from __future__ import annotations

import heapq

import numpy as np

BACKEND = "python"


def top_bids(bids, m):
    """The ``m`` largest bids under the total order, via a frontier heap.

    Rows are non-increasing, so only each WSP's next unselected bid can be the
    next global maximum; the heap holds one entry per WSP. Returns
    ``(values, owners, ranks, examined)`` where ``examined`` counts bids ever
    pushed onto the heap.
    """
    n, c = bids.shape
    heap = [(-float(bids[i, 0]), i, 0) for i in range(n)]
    heapq.heapify(heap)
    examined = n
    values = np.empty(m, dtype=np.float64)
    owners = np.empty(m, dtype=np.int64)
    ranks = np.empty(m, dtype=np.int64)
    for t in range(m):
        negv, i, r = heapq.heappop(heap)
        values[t] = -negv
        owners[t] = i
        ranks[t] = r
        if r + 1 < c:
            heapq.heappush(heap, (-float(bids[i, r + 1]), i, r + 1))
            examined += 1
    return values, owners, ranks, examined


def allocate(bids, c):
    values, owners, _, _ = top_bids(bids, c)
    counts = np.bincount(owners, minlength=bids.shape[0]).astype(np.int64)
    return counts, values


def vcg_payments(bids, counts):
    n, c = bids.shape
    values, owners, _, _ = top_bids(bids, 2 * c)
    pay = np.zeros(n, dtype=np.float64)
    for i in range(n):
        k = counts[i]
        if k == 0:
            continue
        taken = 0
        total = 0.0
        j = c
        while taken < k:
            if owners[j] != i:
                total += values[j]
                taken += 1
            j += 1
        pay[i] = total
    return pay


def uniform_price(bids, counts):
    price = 0.0
    for i in range(bids.shape[0]):
        if counts[i] == 0 and bids[i, 0] > price:
            price = float(bids[i, 0])
    return price


def uniform_payments(bids, counts):
    return uniform_price(bids, counts) * counts.astype(np.float64)


def max_loser_bids(bids, counts):
    n, c = bids.shape
    out = np.zeros(n, dtype=np.float64)
    for i in range(n):
        if counts[i] < c:
            out[i] = bids[i, counts[i]]
    return out


def partial_uniform_payments(bids, counts):
    mlb = max_loser_bids(bids, counts)
    n = mlb.shape[0]
    top = 0
    for i in range(1, n):
        if mlb[i] > mlb[top]:
            top = i
    m1 = mlb[top]
    m2 = 0.0
    for i in range(n):
        if i != top and mlb[i] > m2:
            m2 = mlb[i]
    pay = np.empty(n, dtype=np.float64)
    for i in range(n):
        pay[i] = (m2 if i == top else m1) * counts[i]
    return pay


def brute_force_welfare(bids, c):
    """Exhaustive search over all allocations ``K_1 + ... + K_N = C``."""
    n = bids.shape[0]
    prefix = np.zeros((n, c + 1))
    prefix[:, 1:] = np.cumsum(bids, axis=1)
    pre = prefix.tolist()
    best = -1.0
    best_k = [0] * n
    k = [0] * n

    def rec(i, left, acc):
        nonlocal best, best_k
        if i == n - 1:
            k[i] = left
            total = acc + pre[i][left]
            if total > best:
                best = total
                best_k = list(k)
            return
        for x in range(left, -1, -1):
            k[i] = x
            rec(i + 1, left - x, acc + pre[i][x])

    rec(0, c, 0.0)
    return best, np.array(best_k, dtype=np.int64)
