# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-scan and traversal kernels.

Mirrors kernels_py expression-for-expression. The extension is compiled
with floating-point contraction disabled so results are bit-identical
to the NumPy fallback.
"""

import numpy as np

BACKEND_NAME = "compiled"

cdef double EPS = 1e-12


def scan_split_class(double[::1] xs, double[::1] ys, int min_leaf):
    """Best Gini split of a sorted column; see kernels_py.scan_split_class."""
    cdef Py_ssize_t m = xs.shape[0]
    if m < 2 * min_leaf:
        return -1.0, 0.0, 0
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        total += ys[i]
    cdef double mf = <double> m
    cdef double q = total / mf
    cdef double gp = 1.0 - q * q - (1.0 - q) * (1.0 - q)
    cdef double pl = 0.0
    cdef double best = -1.0
    cdef double nl, nr, ql, qr, gl, gr, gain, a, b, thr
    cdef Py_ssize_t best_i = 0
    cdef bint found = False
    for i in range(1, m):
        pl += ys[i - 1]
        if xs[i] <= xs[i - 1]:
            continue
        if i < min_leaf or m - i < min_leaf:
            continue
        nl = <double> i
        nr = mf - nl
        ql = pl / nl
        qr = (total - pl) / nr
        gl = 1.0 - ql * ql - (1.0 - ql) * (1.0 - ql)
        gr = 1.0 - qr * qr - (1.0 - qr) * (1.0 - qr)
        gain = gp - (nl / mf) * gl - (nr / mf) * gr
        if not found or gain > best:
            best = gain
            best_i = i
            found = True
    if not found or best <= 0.0:
        return -1.0, 0.0, 0
    a = xs[best_i - 1]
    b = xs[best_i]
    thr = 0.5 * (a + b)
    if thr <= a:
        thr = b
    return best, thr, <long> best_i


def scan_split_reg(double[::1] xs, double[::1] gs, double[::1] hs, int min_leaf):
    """Best Newton-gain split of a sorted column; see kernels_py."""
    cdef Py_ssize_t m = xs.shape[0]
    if m < 2 * min_leaf:
        return -1.0, 0.0, 0
    cdef double g_total = 0.0
    cdef double h_total = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        g_total += gs[i]
        h_total += hs[i]
    cdef double parent = g_total * g_total / (h_total + EPS)
    cdef double gl = 0.0
    cdef double hl = 0.0
    cdef double gr, hr, gain, a, b, thr
    cdef double best = -1.0
    cdef Py_ssize_t best_i = 0
    cdef bint found = False
    for i in range(1, m):
        gl += gs[i - 1]
        hl += hs[i - 1]
        if xs[i] <= xs[i - 1]:
            continue
        if i < min_leaf or m - i < min_leaf:
            continue
        gr = g_total - gl
        hr = h_total - hl
        gain = gl * gl / (hl + EPS) + gr * gr / (hr + EPS) - parent
        if not found or gain > best:
            best = gain
            best_i = i
            found = True
    if not found or best <= 0.0:
        return -1.0, 0.0, 0
    a = xs[best_i - 1]
    b = xs[best_i]
    thr = 0.5 * (a + b)
    if thr <= a:
        thr = b
    return best, thr, <long> best_i


def gain_at_threshold_class(double[::1] x, double[::1] y, double thr, int min_leaf):
    """Gini gain at a fixed threshold on an unsorted column; see kernels_py."""
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t nl_i = 0
    cdef double pl = 0.0
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        total += y[i]
        if x[i] < thr:
            nl_i += 1
            pl += y[i]
    cdef Py_ssize_t nr_i = m - nl_i
    if nl_i < min_leaf or nr_i < min_leaf:
        return -1.0
    cdef double mf = <double> m
    cdef double nl = <double> nl_i
    cdef double nr = <double> nr_i
    cdef double ql = pl / nl
    cdef double qr = (total - pl) / nr
    cdef double gl = 1.0 - ql * ql - (1.0 - ql) * (1.0 - ql)
    cdef double gr = 1.0 - qr * qr - (1.0 - qr) * (1.0 - qr)
    cdef double q = total / mf
    cdef double gp = 1.0 - q * q - (1.0 - q) * (1.0 - q)
    return gp - (nl / mf) * gl - (nr / mf) * gr


def apply_tree(long long[::1] feature, double[::1] threshold,
               long long[::1] left, long long[::1] right, double[:, ::1] x):
    """Route every row of x to its leaf; returns leaf node indices."""
    cdef Py_ssize_t n = x.shape[0]
    idx_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] idx = idx_arr
    cdef Py_ssize_t r
    cdef long long node
    for r in range(n):
        node = 0
        while feature[node] >= 0:
            if x[r, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        idx[r] = node
    return idx_arr
