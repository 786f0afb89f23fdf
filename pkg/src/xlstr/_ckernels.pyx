# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t

from xlstr import _pykernels

cnp.import_array()


cdef int _cmp_u64(const void *a, const void *b) noexcept nogil:
    cdef uint64_t x = (<uint64_t*>a)[0]
    cdef uint64_t y = (<uint64_t*>b)[0]
    return (x > y) - (x < y)


cdef Py_ssize_t _packed_grams(str text, int n, int bits, uint64_t *out):
    # each gram is packed exactly (no hashing) into one uint64
    cdef Py_ssize_t L = len(text)
    cdef Py_ssize_t i, j
    cdef uint64_t key
    if L < n:
        key = 0
        for j in range(L):
            key = (key << bits) | <uint64_t>(<Py_UCS4>text[j])
        # tag short grams with their length so they cannot equal a full gram
        out[0] = key | (<uint64_t>(L + 1) << 60)
        return 1
    for i in range(L - n + 1):
        key = 0
        for j in range(n):
            key = (key << bits) | <uint64_t>(<Py_UCS4>text[i + j])
        out[i] = key
    qsort(out, L - n + 1, sizeof(uint64_t), _cmp_u64)
    return L - n + 1


def ngram_cosine(str a, str b, int n):
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la == 0 or lb == 0:
        return 0.0
    cdef Py_UCS4 mx = 0
    cdef Py_UCS4 ch
    for ch in a:
        if ch > mx:
            mx = ch
    for ch in b:
        if ch > mx:
            mx = ch
    cdef int bits = 16 if mx < 65536 else 21
    # exact packing needs n*bits < 60 bits plus the short-gram tag
    if n * bits > 56:
        return _pykernels.ngram_cosine(a, b, n)
    cdef uint64_t *ga = <uint64_t*>malloc(max(la, 1) * sizeof(uint64_t))
    cdef uint64_t *gb = <uint64_t*>malloc(max(lb, 1) * sizeof(uint64_t))
    cdef Py_ssize_t na, nb, i = 0, j = 0, ci, cj
    cdef double dot = 0.0, sa = 0.0, sb = 0.0
    try:
        na = _packed_grams(a, n, bits, ga)
        nb = _packed_grams(b, n, bits, gb)
        while i < na or j < nb:
            if j >= nb or (i < na and ga[i] < gb[j]):
                ci = i
                while i < na and ga[i] == ga[ci]:
                    i += 1
                sa += (i - ci) * (i - ci)
            elif i >= na or gb[j] < ga[i]:
                cj = j
                while j < nb and gb[j] == gb[cj]:
                    j += 1
                sb += (j - cj) * (j - cj)
            else:
                ci = i
                cj = j
                while i < na and ga[i] == ga[ci]:
                    i += 1
                while j < nb and gb[j] == gb[cj]:
                    j += 1
                sa += (i - ci) * (i - ci)
                sb += (j - cj) * (j - cj)
                dot += (i - ci) * (j - cj)
    finally:
        free(ga)
        free(gb)
    if dot == 0.0:
        return 0.0
    return min(1.0, dot / sqrt(sa * sb))


def average_ranks(values):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.argsort(x, kind="mergesort")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ranks = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i = 0, j, t
    cdef double r
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        r = (i + j + 2) / 2.0
        for t in range(i, j + 1):
            ranks[order[t]] = r
        i = j + 1
    return ranks


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def sgd_batches(double[:, ::1] X, double[::1] y, cnp.intp_t[::1] order,
                Py_ssize_t start_batch, Py_ssize_t stop_batch, Py_ssize_t batch_size,
                double[::1] w, double b, double lr, double wd):
    cdef Py_ssize_t n = order.shape[0], D = X.shape[1]
    cdef Py_ssize_t bi, k, lo, hi, m, t, d, row
    cdef cnp.ndarray[cnp.float64_t, ndim=1] losses = np.empty(stop_batch - start_batch, dtype=np.float64)
    cdef double[::1] gw = np.empty(D, dtype=np.float64)
    cdef double z, p, r, gz, gb, loss
    for k in range(stop_batch - start_batch):
        bi = start_batch + k
        lo = bi * batch_size
        hi = min(n, lo + batch_size)
        m = hi - lo
        for d in range(D):
            gw[d] = 0.0
        gb = 0.0
        loss = 0.0
        for t in range(lo, hi):
            row = order[t]
            z = b
            for d in range(D):
                z += X[row, d] * w[d]
            p = _sigmoid(z)
            r = p - y[row]
            loss += r * r
            gz = (2.0 / m) * r * p * (1.0 - p)
            for d in range(D):
                gw[d] += X[row, d] * gz
            gb += gz
        losses[k] = loss / m
        for d in range(D):
            w[d] -= lr * (gw[d] + wd * w[d])
        b -= lr * gb
    return b, losses
