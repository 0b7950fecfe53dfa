"""Random forest: bagged Gini decision trees over random feature subspaces.

Each tree trains on a bootstrap resample seeded by (forest seed, tree index)
and considers a fresh uniform feature subset at every split, so the forest is
byte-reproducible for a given seed regardless of how trees are scheduled.
Prediction is the mode of the tree votes with ties going to the lowest class
index; split-gain ties go to the lowest feature index, then lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadInput, DegenerateLabels, ShapeError


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    label: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class ForestModel:
    trees: list[TreeNode]
    n_classes: int
    n_features: int
    n_estimators: int
    max_features: int
    max_depth: int | None
    seed: int


def _gini_split(X: np.ndarray, y: np.ndarray, features: np.ndarray, n_classes: int):
    """Best (feature, threshold, score) over candidate midpoints.

    Score is n * weighted-child-Gini, to be compared against the parent's
    n * Gini; lower is better. Returns None when no feature admits a split.
    """
    n = y.size
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    best = None
    for f in np.sort(features):
        xv = X[:, f]
        order = np.argsort(xv, kind="stable")
        xs = xv[order]
        left = np.cumsum(onehot[order], axis=0)
        total = left[-1]
        boundary = xs[:-1] < xs[1:]
        if not boundary.any():
            continue
        nl = np.arange(1, n, dtype=np.float64)
        nr = n - nl
        lc = left[:-1]
        rc = total[None, :] - lc
        score = (nl - np.sum(lc * lc, axis=1) / nl) + (nr - np.sum(rc * rc, axis=1) / nr)
        score = np.where(boundary, score, np.inf)
        pos = int(np.argmin(score))
        if not np.isfinite(score[pos]):
            continue
        if best is None or score[pos] < best[2] - 1e-12:
            threshold = (xs[pos] + xs[pos + 1]) / 2.0
            best = (int(f), float(threshold), float(score[pos]))
    return best


def _majority(y: np.ndarray, n_classes: int) -> int:
    return int(np.argmax(np.bincount(y, minlength=n_classes)))


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    n_classes: int,
    max_features: int,
    max_depth: int | None,
    depth: int,
) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    if np.count_nonzero(counts) <= 1 or (max_depth is not None and depth >= max_depth):
        return TreeNode(label=_majority(y, n_classes))
    features = rng.choice(X.shape[1], size=max_features, replace=False)
    parent_score = y.size - float(counts @ counts) / y.size
    split = _gini_split(X, y, features, n_classes)
    if split is None or parent_score - split[2] <= 1e-12:
        return TreeNode(label=_majority(y, n_classes))
    f, threshold, _ = split
    mask = X[:, f] <= threshold
    left = _grow(X[mask], y[mask], rng, n_classes, max_features, max_depth, depth + 1)
    right = _grow(X[~mask], y[~mask], rng, n_classes, max_features, max_depth, depth + 1)
    return TreeNode(feature=f, threshold=threshold, left=left, right=right)


def tree_predict(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.int64)

    def descend(nd: TreeNode, idx: np.ndarray):
        if nd.is_leaf:
            out[idx] = nd.label
            return
        mask = X[idx, nd.feature] <= nd.threshold
        descend(nd.left, idx[mask])
        descend(nd.right, idx[~mask])

    descend(node, np.arange(X.shape[0]))
    return out


def rf_fit(
    X: np.ndarray,
    y: np.ndarray,
    n_estimators: int = 100,
    max_features: int | None = None,
    max_depth: int | None = None,
    seed: int = 0,
) -> ForestModel:
    """Grow the forest. Single-class data is allowed (the forest becomes a
    constant predictor); an empty label vector raises DegenerateLabels."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"X {X.shape} does not align with y {y.shape}")
    if y.size == 0:
        raise DegenerateLabels("empty label vector")
    if not np.all(np.isfinite(X)):
        raise BadInput("X contains non-finite values")
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    n, p = X.shape
    n_classes = int(y.max()) + 1
    if max_features is None:
        max_features = max(1, int(np.sqrt(p)))
    max_features = min(max_features, p)
    trees = []
    for t in range(n_estimators):
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, t])
        boot = rng.integers(0, n, size=n)
        trees.append(
            _grow(X[boot], y[boot], rng, n_classes, max_features, max_depth, 0)
        )
    return ForestModel(
        trees=trees,
        n_classes=n_classes,
        n_features=p,
        n_estimators=n_estimators,
        max_features=max_features,
        max_depth=max_depth,
        seed=seed,
    )


def rf_predict(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Mode of the per-tree votes; exact ties resolve to the lowest class."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} features, got {X.shape}")
    votes = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    for tree in model.trees:
        pred = tree_predict(tree, X)
        votes[np.arange(X.shape[0]), pred] += 1
    return np.argmax(votes, axis=1).astype(np.int64)
