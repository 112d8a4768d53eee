"""Compiled inner loops of the tree builder."""

import numpy as np
from numba import njit


@njit(cache=True)
def level_stats(node_of_row, y, w, K):
    """Weighted count, weighted target sum and purity flag of each node."""
    count = np.zeros(K)
    total = np.zeros(K)
    ymin = np.full(K, np.inf)
    ymax = np.full(K, -np.inf)
    for i in range(node_of_row.size):
        k = node_of_row[i]
        if k < 0:
            continue
        count[k] += w[i]
        total[k] += w[i] * y[i]
        if y[i] < ymin[k]:
            ymin[k] = y[i]
        if y[i] > ymax[k]:
            ymax[k] = y[i]
    pure = np.empty(K, dtype=np.bool_)
    for k in range(K):
        pure[k] = not ymin[k] < ymax[k]
    return count, total, pure


@njit(cache=True, inline="always")
def _consider(k, c, lo, hi, nl, sl, count, total, msl, eps, best_col, best_thr, best_score):
    nr = count[k] - nl
    if nl < msl or nr < msl:
        return
    sr = total[k] - sl
    score = sl * sl / nl + sr * sr / nr
    cur = best_score[k]
    if best_col[k] >= 0 and score <= cur + eps * max(1.0, abs(cur)):
        return
    thr = (lo + hi) / 2.0
    if not thr < hi:  # lo and hi adjacent floats
        thr = lo
    best_col[k] = c
    best_thr[k] = thr
    best_score[k] = score


@njit(cache=True)
def find_splits(col_ptr, row, val, node_of_row, y, w, count, total, splittable,
                allowed, use_allowed, msl, eps):
    K = count.size
    V = col_ptr.size - 1
    best_col = np.full(K, -1, dtype=np.int64)
    best_thr = np.zeros(K)
    best_score = np.full(K, -np.inf)

    nz_cnt = np.zeros(K)
    nz_sum = np.zeros(K)
    left_cnt = np.zeros(K)
    left_sum = np.zeros(K)
    prev = np.zeros(K)
    has_prev = np.zeros(K, dtype=np.bool_)
    zero_done = np.zeros(K, dtype=np.bool_)
    stamp = np.full(K, -1, dtype=np.int64)
    touched = np.empty(K, dtype=np.int64)

    for c in range(V):
        lo = col_ptr[c]
        hi = col_ptr[c + 1]
        if lo == hi:
            continue
        # pass 1: nonzero mass of each participating node in this column
        nt = 0
        for e in range(lo, hi):
            r = row[e]
            k = node_of_row[r]
            if k < 0 or not splittable[k]:
                continue
            if use_allowed and not allowed[k, c]:
                continue
            if stamp[k] != c:
                stamp[k] = c
                touched[nt] = k
                nt += 1
                nz_cnt[k] = 0.0
                nz_sum[k] = 0.0
                left_cnt[k] = 0.0
                left_sum[k] = 0.0
                has_prev[k] = False
                zero_done[k] = False
            nz_cnt[k] += w[r]
            nz_sum[k] += w[r] * y[r]
        if nt == 0:
            continue
        # pass 2: ascending scan, zero block slotted in before the first positive
        for e in range(lo, hi):
            r = row[e]
            k = node_of_row[r]
            if k < 0 or stamp[k] != c:
                continue
            v = val[e]
            if v > 0.0 and not zero_done[k]:
                zero_done[k] = True
                zc = count[k] - nz_cnt[k]
                if zc > 0.0:
                    if has_prev[k]:
                        _consider(k, c, prev[k], 0.0, left_cnt[k], left_sum[k], count, total,
                                  msl, eps, best_col, best_thr, best_score)
                    left_cnt[k] += zc
                    left_sum[k] += total[k] - nz_sum[k]
                    prev[k] = 0.0
                    has_prev[k] = True
            if has_prev[k] and v != prev[k]:
                _consider(k, c, prev[k], v, left_cnt[k], left_sum[k], count, total,
                          msl, eps, best_col, best_thr, best_score)
            left_cnt[k] += w[r]
            left_sum[k] += w[r] * y[r]
            prev[k] = v
            has_prev[k] = True
        # columns whose stored values are all negative end with the zero block
        for t in range(nt):
            k = touched[t]
            if not zero_done[k] and count[k] - nz_cnt[k] > 0.0 and has_prev[k]:
                _consider(k, c, prev[k], 0.0, left_cnt[k], left_sum[k], count, total,
                          msl, eps, best_col, best_thr, best_score)
    return best_col, best_thr, best_score


@njit(cache=True)
def route(col_ptr, row, val, node_of_row, split_col, split_thr, child_base):
    """Child position (in the next level) of every row; -1 for finished rows."""
    n = node_of_row.size
    new = np.full(n, -1, dtype=np.int64)
    used = np.zeros(col_ptr.size - 1, dtype=np.bool_)
    for i in range(n):
        k = node_of_row[i]
        if k >= 0 and split_col[k] >= 0:
            # implicit zero unless the split column stores a value for this row
            new[i] = child_base[k] + (0 if 0.0 <= split_thr[k] else 1)
            used[split_col[k]] = True
    for c in range(used.size):
        if not used[c]:
            continue
        for e in range(col_ptr[c], col_ptr[c + 1]):
            r = row[e]
            k = node_of_row[r]
            if k >= 0 and split_col[k] == c:
                new[r] = child_base[k] + (0 if val[e] <= split_thr[k] else 1)
    return new
