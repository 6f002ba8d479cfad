# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled clearing kernels; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline bint _before(double va, Py_ssize_t ia, double vb, Py_ssize_t ib) nogil:
    # heap never holds two entries of one WSP, so rank never decides
    return va > vb or (va == vb and ia < ib)


cdef void _sift_down(double[::1] hv, Py_ssize_t[::1] hi, Py_ssize_t[::1] hr,
                     Py_ssize_t size, Py_ssize_t pos) nogil:
    cdef Py_ssize_t child, best
    cdef double tv
    cdef Py_ssize_t ti, tr
    while True:
        child = 2 * pos + 1
        if child >= size:
            return
        best = child
        if child + 1 < size and _before(hv[child + 1], hi[child + 1], hv[child], hi[child]):
            best = child + 1
        if not _before(hv[best], hi[best], hv[pos], hi[pos]):
            return
        tv = hv[pos]; ti = hi[pos]; tr = hr[pos]
        hv[pos] = hv[best]; hi[pos] = hi[best]; hr[pos] = hr[best]
        hv[best] = tv; hi[best] = ti; hr[best] = tr
        pos = best


def top_bids(const double[:, ::1] bids, Py_ssize_t m):
    cdef Py_ssize_t n = bids.shape[0], c = bids.shape[1]
    cdef Py_ssize_t size = n, t, i, r, examined = n, p
    hv_arr = np.empty(n, dtype=np.float64)
    hi_arr = np.empty(n, dtype=np.intp)
    hr_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] hv = hv_arr
    cdef Py_ssize_t[::1] hi = hi_arr
    cdef Py_ssize_t[::1] hr = hr_arr
    values_arr = np.empty(m, dtype=np.float64)
    owners_arr = np.empty(m, dtype=np.int64)
    ranks_arr = np.empty(m, dtype=np.int64)
    cdef double[::1] values = values_arr
    cdef cnp.int64_t[::1] owners = owners_arr
    cdef cnp.int64_t[::1] ranks = ranks_arr
    with nogil:
        for i in range(n):
            hv[i] = bids[i, 0]; hi[i] = i; hr[i] = 0
        p = n // 2 - 1
        while p >= 0:
            _sift_down(hv, hi, hr, size, p)
            p -= 1
        for t in range(m):
            values[t] = hv[0]; owners[t] = hi[0]; ranks[t] = hr[0]
            i = hi[0]; r = hr[0] + 1
            if r < c:
                hv[0] = bids[i, r]; hr[0] = r
                examined += 1
            else:
                size -= 1
                hv[0] = hv[size]; hi[0] = hi[size]; hr[0] = hr[size]
            _sift_down(hv, hi, hr, size, 0)
    return values_arr, owners_arr, ranks_arr, examined


def allocate(const double[:, ::1] bids, Py_ssize_t c):
    values, owners, _, _ = top_bids(bids, c)
    counts = np.bincount(owners, minlength=bids.shape[0]).astype(np.int64)
    return counts, values


def vcg_payments(const double[:, ::1] bids, const cnp.int64_t[::1] counts):
    cdef Py_ssize_t n = bids.shape[0], c = bids.shape[1], i, j, taken
    values_arr, owners_arr, _, _ = top_bids(bids, 2 * c)
    cdef double[::1] values = values_arr
    cdef cnp.int64_t[::1] owners = owners_arr
    pay_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] pay = pay_arr
    cdef double total
    with nogil:
        for i in range(n):
            if counts[i] == 0:
                continue
            taken = 0
            total = 0.0
            j = c
            while taken < counts[i]:
                if owners[j] != i:
                    total += values[j]
                    taken += 1
                j += 1
            pay[i] = total
    return pay_arr


def uniform_price(const double[:, ::1] bids, const cnp.int64_t[::1] counts):
    cdef Py_ssize_t i
    cdef double price = 0.0
    for i in range(bids.shape[0]):
        if counts[i] == 0 and bids[i, 0] > price:
            price = bids[i, 0]
    return price


def uniform_payments(const double[:, ::1] bids, const cnp.int64_t[::1] counts):
    return uniform_price(bids, counts) * np.asarray(counts, dtype=np.float64)


def max_loser_bids(const double[:, ::1] bids, const cnp.int64_t[::1] counts):
    cdef Py_ssize_t n = bids.shape[0], c = bids.shape[1], i
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        if counts[i] < c:
            out[i] = bids[i, counts[i]]
    return out_arr


def partial_uniform_payments(const double[:, ::1] bids, const cnp.int64_t[::1] counts):
    cdef Py_ssize_t n = bids.shape[0], c = bids.shape[1], i, top = 0
    cdef double m1, m2 = 0.0, v
    mlb_arr = max_loser_bids(bids, counts)
    cdef double[::1] mlb = mlb_arr
    for i in range(1, n):
        if mlb[i] > mlb[top]:
            top = i
    m1 = mlb[top]
    for i in range(n):
        if i != top and mlb[i] > m2:
            m2 = mlb[i]
    pay_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] pay = pay_arr
    for i in range(n):
        v = m2 if i == top else m1
        pay[i] = v * counts[i]
    return pay_arr


def brute_force_welfare(const double[:, ::1] bids, Py_ssize_t c):
    cdef Py_ssize_t n = bids.shape[0], i, x, left
    prefix_arr = np.zeros((n, c + 1))
    prefix_arr[:, 1:] = np.cumsum(np.asarray(bids), axis=1)
    cdef double[:, ::1] pre = prefix_arr
    k_arr = np.zeros(n, dtype=np.int64)
    best_arr = np.zeros(n, dtype=np.int64)
    acc_arr = np.zeros(n + 1)
    cdef cnp.int64_t[::1] k = k_arr
    cdef cnp.int64_t[::1] best_k = best_arr
    cdef double[::1] acc = acc_arr
    cdef double best = -1.0, total
    # iterative odometer over compositions, same visiting order as the
    # recursive reference: K_0 descending from C, then K_1, ...
    with nogil:
        i = 0
        left = c
        k[0] = c + 1
        while i >= 0:
            if i == n - 1:
                k[i] = left
                total = acc[i] + pre[i, left]
                if total > best:
                    best = total
                    for x in range(n):
                        best_k[x] = k[x]
                i -= 1
                if i >= 0:
                    left += k[i]
                continue
            if k[i] == 0:
                i -= 1
                if i >= 0:
                    left += k[i]
                continue
            k[i] -= 1
            acc[i + 1] = acc[i] + pre[i, k[i]]
            left -= k[i]
            i += 1
            k[i] = left + 1
    return best, best_arr
