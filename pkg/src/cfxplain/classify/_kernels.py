"""Numba kernels for the SVC epoch loop and the random-forest trees."""
from __future__ import annotations

import numba as nb
import numpy as np

_CACHE = True


@nb.njit(cache=_CACHE, nogil=True)
def svc_epoch(data, indices, indptr, y, sample_w, order, V, scale, t, lam):
    """One pass of Pegasos-style Crammer-Singer subgradient steps.

    Weights are stored as ``scale * V`` so the L2 shrink is O(1) per step.
    Returns the updated (scale, t).
    """
    K = V.shape[0]
    scores = np.empty(K)
    for ii in range(order.shape[0]):
        i = order[ii]
        t += 1
        eta = 1.0 / (lam * t)
        shrink = 1.0 - eta * lam
        if shrink <= 0.0:
            V[:, :] = 0.0
            scale = 1.0
        else:
            scale *= shrink
        if scale < 1e-9:
            V *= scale
            scale = 1.0
        start, end = indptr[i], indptr[i + 1]
        for c in range(K):
            s = 0.0
            for p in range(start, end):
                s += V[c, indices[p]] * data[p]
            scores[c] = s * scale
        yi = y[i]
        best = -1
        best_s = -np.inf
        for c in range(K):
            if c != yi and scores[c] > best_s:
                best_s = scores[c]
                best = c
        if 1.0 + best_s - scores[yi] > 0.0:
            step = eta * sample_w[i] / scale
            for p in range(start, end):
                j = indices[p]
                V[yi, j] += step * data[p]
                V[best, j] -= step * data[p]
    return scale, t


@nb.njit(cache=_CACHE, nogil=True)
def _gini_sweep(nz_vals, nz_cls, zero_counts, n_zero, total_counts, n_total):
    """Best midpoint threshold on one nonnegative feature.

    Zeros form one block (their class counts are ``zero_counts``); only the
    positive values are sorted. Returns (gain, threshold) with gain the
    decrease in weighted gini impurity, or (-1, 0) when nothing splits.
    """
    n_classes = total_counts.shape[0]
    order = np.argsort(nz_vals, kind="mergesort")
    left = zero_counts.copy()
    parent = 1.0
    for c in range(n_classes):
        parent -= (total_counts[c] / n_total) ** 2
    best_gain = -1.0
    best_thr = 0.0
    m = nz_vals.shape[0]
    nl = float(n_zero)
    for k in range(-1, m - 1):
        if k >= 0:
            left[nz_cls[order[k]]] += 1.0
            nl += 1.0
            v = nz_vals[order[k]]
        else:
            if n_zero == 0:
                continue
            v = 0.0
        v_next = nz_vals[order[k + 1]]
        if v_next <= v:
            continue
        nr = n_total - nl
        gl = 1.0
        gr = 1.0
        for c in range(n_classes):
            gl -= (left[c] / nl) ** 2
            gr -= ((total_counts[c] - left[c]) / nr) ** 2
        gain = n_total * parent - nl * gl - nr * gr
        if gain > best_gain:
            best_gain = gain
            best_thr = v + (v_next - v) / 2.0
    return best_gain, best_thr


@nb.njit(cache=_CACHE, nogil=True)
def _best_split(indptr, indices, data, y, samples, start, end, n_classes, mtry, n_features, ws):
    """Best gini split over features visited in random order.

    Features come from a fresh permutation until ``mtry`` non-constant ones
    have been evaluated. The node's nonzeros are bucketed by column first,
    so a column is inspected only through its nonzero entries; a column
    without any is constant zero in the node.
    """
    mark, cnt, pos, touched, b_val, b_cls, stamp = ws
    n = end - start
    counts = np.zeros(n_classes)
    for k in range(start, end):
        counts[y[samples[k]]] += 1.0
    n_present = 0
    for c in range(n_classes):
        if counts[c] > 0:
            n_present += 1
    if n_present < 2:
        return -1, 0.0, -1.0, counts
    stamp[0] += 1
    st = stamp[0]
    n_touched = 0
    for k in range(start, end):
        r = samples[k]
        for p in range(indptr[r], indptr[r + 1]):
            f = indices[p]
            if mark[f] != st:
                mark[f] = st
                cnt[f] = 0
                touched[n_touched] = f
                n_touched += 1
            cnt[f] += 1
    acc = 0
    for q in range(n_touched):
        f = touched[q]
        pos[f] = acc
        acc += cnt[f]
        cnt[f] = 0
    for k in range(start, end):
        r = samples[k]
        for p in range(indptr[r], indptr[r + 1]):
            f = indices[p]
            slot = pos[f] + cnt[f]
            b_val[slot] = data[p]
            b_cls[slot] = y[r]
            cnt[f] += 1

    perm = np.random.permutation(n_features)
    zero_counts = np.empty(n_classes)
    visited = 0
    best_gain = -1.0
    best_f = -1
    best_thr = 0.0
    for fi in range(n_features):
        f = perm[fi]
        if mark[f] != st:
            continue
        lo_, hi_ = pos[f], pos[f] + cnt[f]
        m = hi_ - lo_
        n_zero = n - m
        if n_zero == 0:
            v0 = b_val[lo_]
            same = True
            for q in range(lo_ + 1, hi_):
                if b_val[q] != v0:
                    same = False
                    break
            if same:
                continue
        visited += 1
        zero_counts[:] = counts
        for q in range(lo_, hi_):
            zero_counts[b_cls[q]] -= 1.0
        gain, thr = _gini_sweep(b_val[lo_:hi_], b_cls[lo_:hi_], zero_counts, n_zero, counts, float(n))
        if gain > best_gain:
            best_gain = gain
            best_f = f
            best_thr = thr
        if visited >= mtry:
            break
    return best_f, best_thr, best_gain, counts


@nb.njit(cache=_CACHE, nogil=True)
def grow_tree(XT, indptr, indices, data, y, n_classes, seed, mtry, max_depth, max_leaf_nodes, bootstrap):
    """Best-first gini tree on a (bootstrap) resample of the rows.

    ``indptr``/``indices``/``data`` hold the nonnegative design in CSR form;
    ``XT`` is its dense transpose (features x rows), used for partitioning.
    Returns (n_nodes, feature, threshold, left, right, value, depth); leaves
    carry feature == -1 and ``value`` holds per-class sample counts.
    """
    np.random.seed(seed)
    n_features, n_rows = XT.shape
    if bootstrap:
        samples = np.random.randint(0, n_rows, n_rows)
    else:
        samples = np.arange(n_rows)
    nnz = 0
    for k in range(n_rows):
        r = samples[k]
        nnz += indptr[r + 1] - indptr[r]
    ws = (
        np.zeros(n_features, dtype=np.int64),  # mark
        np.zeros(n_features, dtype=np.int64),  # cnt
        np.zeros(n_features, dtype=np.int64),  # pos
        np.zeros(n_features, dtype=np.int64),  # touched
        np.zeros(max(nnz, 1)),                 # bucketed values
        np.zeros(max(nnz, 1), dtype=np.int64),  # bucketed classes
        np.zeros(1, dtype=np.int64),           # stamp
    )
    cap = 2 * max_leaf_nodes + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    value = np.zeros((cap, n_classes))
    depth = np.zeros(cap, dtype=np.int32)
    seg_start = np.zeros(cap, dtype=np.int64)
    seg_end = np.zeros(cap, dtype=np.int64)
    cand_f = np.full(cap, -1, dtype=np.int64)
    cand_thr = np.zeros(cap)
    cand_gain = np.full(cap, -1.0)
    open_ = np.zeros(cap, dtype=np.bool_)

    seg_end[0] = n_rows
    n_nodes = 1
    n_leaves = 1

    f, thr, gain, counts = _best_split(indptr, indices, data, y, samples, 0, n_rows, n_classes, mtry, n_features, ws)
    value[0] = counts
    if max_depth > 0 and gain > 1e-12:
        cand_f[0] = f
        cand_thr[0] = thr
        cand_gain[0] = gain
        open_[0] = True

    while n_leaves < max_leaf_nodes:
        node = -1
        best = -1.0
        for k in range(n_nodes):
            if open_[k] and cand_gain[k] > best:
                best = cand_gain[k]
                node = k
        if node < 0:
            break
        open_[node] = False
        f = cand_f[node]
        thr = cand_thr[node]
        s, e = seg_start[node], seg_end[node]
        # partition samples[s:e] so rows with x <= thr come first
        row = XT[f]
        i, j = s, e - 1
        while i <= j:
            if row[samples[i]] <= thr:
                i += 1
            else:
                tmp = samples[i]
                samples[i] = samples[j]
                samples[j] = tmp
                j -= 1
        mid = i
        feature[node] = f
        threshold[node] = thr
        for side in range(2):
            child = n_nodes + side
            cs = s if side == 0 else mid
            ce = mid if side == 0 else e
            seg_start[child] = cs
            seg_end[child] = ce
            depth[child] = depth[node] + 1
            cf, ct, cg, cc = _best_split(indptr, indices, data, y, samples, cs, ce, n_classes, mtry, n_features, ws)
            value[child] = cc
            if depth[child] < max_depth and cg > 1e-12:
                cand_f[child] = cf
                cand_thr[child] = ct
                cand_gain[child] = cg
                open_[child] = True
        left[node] = n_nodes
        right[node] = n_nodes + 1
        n_nodes += 2
        n_leaves += 1

    return (n_nodes, feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), depth[:n_nodes].copy())


@nb.njit(cache=_CACHE, nogil=True)
def _row_value(data, indices, start, end, f):
    for p in range(start, end):
        if indices[p] == f:
            return data[p]
    return 0.0


@nb.njit(cache=_CACHE, nogil=True)
def forest_votes(data, indices, indptr, n_rows, offsets, feature, threshold, left, right, leaf_class, n_classes):
    """Per-class vote counts of every tree for CSR rows."""
    votes = np.zeros((n_rows, n_classes))
    n_trees = offsets.shape[0] - 1
    for i in range(n_rows):
        start, end = indptr[i], indptr[i + 1]
        for tr in range(n_trees):
            base = offsets[tr]
            node = 0
            while feature[base + node] >= 0:
                x = _row_value(data, indices, start, end, feature[base + node])
                if x <= threshold[base + node]:
                    node = left[base + node]
                else:
                    node = right[base + node]
            votes[i, leaf_class[base + node]] += 1.0
    return votes
