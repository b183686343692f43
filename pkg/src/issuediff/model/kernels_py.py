"""Pure-NumPy split-scan and traversal kernels.

Fallback backend used when the compiled extension is unavailable. The
compiled kernels mirror these expression-for-expression (same operation
order, no fused multiply-add) so both backends produce bit-identical
floats on the same inputs.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

EPS = 1e-12


def scan_split_class(xs: np.ndarray, ys: np.ndarray, min_leaf: int):
    """Best Gini split of a sorted column.

    xs ascending, ys the aligned 0/1 labels. Returns (gain, threshold,
    left_count); gain -1.0 means no valid split. First maximum wins.
    """
    m = xs.shape[0]
    if m < 2 * min_leaf:
        return -1.0, 0.0, 0
    pos = np.cumsum(ys)
    total = float(pos[m - 1])
    sizes = np.arange(1, m)
    valid = xs[1:] > xs[:-1]
    valid &= (sizes >= min_leaf) & (m - sizes >= min_leaf)
    if not valid.any():
        return -1.0, 0.0, 0
    mf = float(m)
    nl = sizes.astype(np.float64)
    nr = mf - nl
    pl = pos[:-1].astype(np.float64)
    ql = pl / nl
    qr = (total - pl) / nr
    gl = 1.0 - ql * ql - (1.0 - ql) * (1.0 - ql)
    gr = 1.0 - qr * qr - (1.0 - qr) * (1.0 - qr)
    q = total / mf
    gp = 1.0 - q * q - (1.0 - q) * (1.0 - q)
    gain = gp - (nl / mf) * gl - (nr / mf) * gr
    gain = np.where(valid, gain, -np.inf)
    j = int(np.argmax(gain))
    best = float(gain[j])
    if best <= 0.0:
        return -1.0, 0.0, 0
    a = float(xs[j])
    b = float(xs[j + 1])
    thr = 0.5 * (a + b)
    if thr <= a:
        thr = b
    return best, thr, j + 1


def scan_split_reg(xs: np.ndarray, gs: np.ndarray, hs: np.ndarray, min_leaf: int):
    """Best Newton-gain split of a sorted column for boosting.

    gs are gradients, hs hessians (non-negative), aligned with ascending
    xs. Returns (gain, threshold, left_count); gain -1.0 means none.
    """
    m = xs.shape[0]
    if m < 2 * min_leaf:
        return -1.0, 0.0, 0
    cg = np.cumsum(gs)
    ch = np.cumsum(hs)
    g_total = float(cg[m - 1])
    h_total = float(ch[m - 1])
    sizes = np.arange(1, m)
    valid = xs[1:] > xs[:-1]
    valid &= (sizes >= min_leaf) & (m - sizes >= min_leaf)
    if not valid.any():
        return -1.0, 0.0, 0
    gl = cg[:-1]
    hl = ch[:-1]
    gr = g_total - gl
    hr = h_total - hl
    gain = (
        gl * gl / (hl + EPS)
        + gr * gr / (hr + EPS)
        - g_total * g_total / (h_total + EPS)
    )
    gain = np.where(valid, gain, -np.inf)
    j = int(np.argmax(gain))
    best = float(gain[j])
    if best <= 0.0:
        return -1.0, 0.0, 0
    a = float(xs[j])
    b = float(xs[j + 1])
    thr = 0.5 * (a + b)
    if thr <= a:
        thr = b
    return best, thr, j + 1


def gain_at_threshold_class(x: np.ndarray, y: np.ndarray, thr: float, min_leaf: int):
    """Gini gain of splitting unsorted column x at a fixed threshold."""
    m = x.shape[0]
    mask = x < thr
    nl_i = int(mask.sum())
    nr_i = m - nl_i
    if nl_i < min_leaf or nr_i < min_leaf:
        return -1.0
    pl = float(y[mask].sum())
    total = float(y.sum())
    mf = float(m)
    nl = float(nl_i)
    nr = float(nr_i)
    ql = pl / nl
    qr = (total - pl) / nr
    gl = 1.0 - ql * ql - (1.0 - ql) * (1.0 - ql)
    gr = 1.0 - qr * qr - (1.0 - qr) * (1.0 - qr)
    q = total / mf
    gp = 1.0 - q * q - (1.0 - q) * (1.0 - q)
    return gp - (nl / mf) * gl - (nr / mf) * gr


def apply_tree(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Route every row of x to its leaf; returns leaf node indices."""
    n = x.shape[0]
    idx = np.zeros(n, dtype=np.int64)
    if n == 0:
        return idx
    active = feature[idx] >= 0
    while active.any():
        rows = np.nonzero(active)[0]
        node = idx[rows]
        f = feature[node]
        go_left = x[rows, f] < threshold[node]
        idx[rows] = np.where(go_left, left[node], right[node])
        active[rows] = feature[idx[rows]] >= 0
    return idx
