"""CART trees grown breadth-first over presorted sparse columns.

Split search works one depth level at a time. The nonzero entries of the
training matrix are sorted once by (column, value); a level is one scan over
them in that order, keeping running left-side sums per node, so no node ever
re-sorts. Implicit zeros enter as a single weighted block per (node, column)
at the position where 0 falls among the stored values.

Classification (Gini) and regression (variance) splits share one search:
for targets ``y`` and weights ``w`` both criteria pick the boundary that
maximises ``S_l**2 / n_l + S_r**2 / n_r`` with ``S`` the weighted target sum
and ``n`` the weighted count on each side. For 0/1 targets that is the
largest Gini decrease.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from revspam.models import _kernels

# relative slack under which two split scores count as tied
TIE_EPS = 1e-12
PREDICT_CHUNK = 2048


@dataclass
class Tree:
    """Flat array form of a binary tree; ``feature == -1`` marks a leaf.

    An internal node sends a row left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):  # children always follow parents
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max()) if self.n_nodes else 0

    @classmethod
    def leaf(cls, value: float) -> "Tree":
        return cls(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]),
                   np.array([float(value)]))

    def apply_dense(self, dense: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of a dense block."""
        node = np.zeros(dense.shape[0], dtype=np.int64)
        live = np.flatnonzero(self.feature[node] >= 0)
        while live.size:
            nd = node[live]
            go_left = dense[live, self.feature[nd]] <= self.threshold[nd]
            node[live] = np.where(go_left, self.left[nd], self.right[nd])
            live = live[self.feature[node[live]] >= 0]
        return node

    def predict(self, X) -> np.ndarray:
        if not sp.issparse(X):
            return self.value[self.apply_dense(np.atleast_2d(np.asarray(X, dtype=np.float64)))]
        X = sp.csr_matrix(X)
        out = np.empty(X.shape[0])
        for lo in range(0, X.shape[0], PREDICT_CHUNK):
            block = X[lo:lo + PREDICT_CHUNK].toarray()
            out[lo:lo + PREDICT_CHUNK] = self.value[self.apply_dense(block)]
        return out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.asarray(d["feature"], dtype=np.int64),
                   np.asarray(d["threshold"], dtype=np.float64),
                   np.asarray(d["left"], dtype=np.int64),
                   np.asarray(d["right"], dtype=np.int64),
                   np.asarray(d["value"], dtype=np.float64))


class Presorted:
    """Stored entries of a matrix ordered by (column, value).

    ``col_ptr[c]:col_ptr[c + 1]`` delimits the entries of column ``c``.
    """

    def __init__(self, X):
        Xc = sp.csc_matrix(X, dtype=np.float64, copy=True)
        Xc.eliminate_zeros()
        self.n_rows, self.n_cols = Xc.shape
        col = np.repeat(np.arange(self.n_cols, dtype=np.int64), np.diff(Xc.indptr))
        order = np.lexsort((Xc.data, col))
        self.col_ptr = Xc.indptr.astype(np.int64)
        self.row = Xc.indices[order].astype(np.int64)
        self.val = Xc.data[order]


def best_splits(pre: Presorted, node_of_row: np.ndarray, y: np.ndarray, w: np.ndarray,
                count: np.ndarray, total: np.ndarray, splittable: np.ndarray,
                min_samples_leaf: int, allowed: np.ndarray | None = None):
    """Best (column, threshold) for every splittable node of one level.

    ``allowed`` is an optional (nodes x columns) boolean mask. Returns
    ``(found, column, threshold, score)`` arrays indexed by the node's
    position in the level. A later candidate replaces the incumbent only if
    it beats it by more than ``TIE_EPS`` (relative), so ties go to the lowest
    column and then the smallest threshold.
    """
    use_allowed = allowed is not None
    if not use_allowed:
        allowed = np.zeros((1, 1), dtype=np.bool_)
    col, thr, score = _kernels.find_splits(
        pre.col_ptr, pre.row, pre.val, node_of_row, y, w, count, total,
        splittable, allowed, use_allowed, float(min_samples_leaf), TIE_EPS)
    return col >= 0, col, thr, score


def grow_tree(pre: Presorted, y: np.ndarray, weight: np.ndarray | None = None, *,
              max_depth: int, min_samples_leaf: int = 1,
              feature_sampler: Callable[[int], np.ndarray] | None = None,
              ) -> tuple[Tree, np.ndarray]:
    """Grow one tree; leaves hold the weighted mean target.

    Stops at ``max_depth``, when a child would get fewer than
    ``min_samples_leaf`` (weighted) rows, or when a node's targets are all
    equal. ``feature_sampler(heap_id)`` may return the columns a node is
    allowed to split on; the root has heap id 1 and node ``h`` has children
    ``2h`` and ``2h + 1``. Rows with zero weight are ignored.

    Returns the tree and the leaf index of every row (-1 for ignored rows).
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = pre.n_rows
    w = np.ones(n) if weight is None else np.ascontiguousarray(weight, dtype=np.float64)
    if max_depth < 0 or min_samples_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_samples_leaf >= 1")

    feature, threshold, left, right, value = [-1], [0.0], [-1], [-1], [0.0]
    leaf_of_row = np.full(n, -1, dtype=np.int64)
    node_of_row = np.where(w > 0, 0, -1).astype(np.int64)
    level_out = np.array([0])   # output index of each node in the level
    level_heap = np.array([1])  # heap id of each node in the level
    depth = 0
    while level_out.size:
        K = level_out.size
        count, total, pure = _kernels.level_stats(node_of_row, y, w, K)
        for k in range(K):
            value[level_out[k]] = total[k] / count[k] if count[k] > 0 else 0.0

        splittable = (count >= 2 * min_samples_leaf) & ~pure
        if depth >= max_depth:
            splittable[:] = False
        found = np.zeros(K, dtype=bool)
        if splittable.any():
            allowed = None
            if feature_sampler is not None:
                allowed = np.zeros((K, pre.n_cols), dtype=np.bool_)
                for k in np.flatnonzero(splittable):
                    allowed[k, feature_sampler(int(level_heap[k]))] = True
            found, col, thr, _ = best_splits(pre, node_of_row, y, w, count, total,
                                             splittable, min_samples_leaf, allowed)

        live = node_of_row >= 0
        leaf_rows = live.copy()
        leaf_rows[live] = ~found[node_of_row[live]]
        leaf_of_row[leaf_rows] = level_out[node_of_row[leaf_rows]]
        if not found.any():
            break

        split_nodes = np.flatnonzero(found)
        child_base = np.full(K, -1, dtype=np.int64)
        child_base[split_nodes] = 2 * np.arange(split_nodes.size)
        next_out = np.empty(2 * split_nodes.size, dtype=np.int64)
        next_heap = np.empty(2 * split_nodes.size, dtype=np.int64)
        for i, k in enumerate(split_nodes):
            o = level_out[k]
            li = len(feature)
            feature[o] = int(col[k])
            threshold[o] = float(thr[k])
            left[o], right[o] = li, li + 1
            feature += [-1, -1]
            threshold += [0.0, 0.0]
            left += [-1, -1]
            right += [-1, -1]
            value += [0.0, 0.0]
            next_out[2 * i:2 * i + 2] = li, li + 1
            next_heap[2 * i:2 * i + 2] = 2 * level_heap[k], 2 * level_heap[k] + 1

        node_of_row = _kernels.route(pre.col_ptr, pre.row, pre.val, node_of_row,
                                     np.where(found, col, -1), thr, child_base)
        level_out, level_heap = next_out, next_heap
        depth += 1

    tree = Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value))
    return tree, leaf_of_row


def fit_tree(X, y, *, max_depth: int, min_samples_leaf: int = 1, weight=None,
             feature_sampler=None) -> Tree:
    """Convenience wrapper: presort ``X`` and grow a single tree."""
    tree, _ = grow_tree(Presorted(X), y, weight, max_depth=max_depth,
                        min_samples_leaf=min_samples_leaf, feature_sampler=feature_sampler)
    return tree
