"""Gradient-boosted decision trees with leaf-wise growth.

Per one-vs-rest class the score starts at the clamped log-odds of the class
prior and each stage adds a shrunken regression tree fitted to the gradient
and hessian of the logistic loss. Trees grow leaf-wise: the leaf whose best
split yields the largest gain is split next, until the leaf cap is reached
or no split has positive gain. Leaf values are the Newton step
-sum(g) / (sum(h) + lambda) with lambda = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import BadInput, DegenerateLabels, ShapeError

_LAMBDA = 1.0
_F0_CLAMP = 10.0
_EPS = 1e-12


@dataclass
class ValueNode:
    feature: int = -1
    threshold: float = 0.0
    left: "ValueNode | None" = None
    right: "ValueNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class ClassBooster:
    f0: float
    trees: list[ValueNode] = field(default_factory=list)


@dataclass
class GBDTModel:
    boosters: list[ClassBooster]
    n_classes: int
    n_features: int
    learning_rate: float
    num_leaves: int
    min_samples_leaf: int


def _leaf_value(grad_sum: float, hess_sum: float) -> float:
    return -grad_sum / (hess_sum + _LAMBDA)


def _best_split(X, g, h, idx, min_leaf):
    """Best (gain, feature, threshold) for one leaf, or None.

    Gain is the standard second-order objective reduction; ties resolve to
    the lowest feature index then the lowest threshold.
    """
    n = idx.size
    if n < 2 * min_leaf:
        return None
    gs, hs = g[idx], h[idx]
    G, H = gs.sum(), hs.sum()
    base = G * G / (H + _LAMBDA)
    best = None
    nl = np.arange(1, n, dtype=np.float64)
    for f in range(X.shape[1]):
        xv = X[idx, f]
        order = np.argsort(xv, kind="stable")
        xs = xv[order]
        boundary = xs[:-1] < xs[1:]
        if not boundary.any():
            continue
        GL = np.cumsum(gs[order])[:-1]
        HL = np.cumsum(hs[order])[:-1]
        gain = 0.5 * (
            GL * GL / (HL + _LAMBDA)
            + (G - GL) ** 2 / (H - HL + _LAMBDA)
            - base
        )
        ok = boundary & (nl >= min_leaf) & (n - nl >= min_leaf)
        if not ok.any():
            continue
        gain = np.where(ok, gain, -np.inf)
        pos = int(np.argmax(gain))
        if best is None or gain[pos] > best[0] + _EPS:
            best = (float(gain[pos]), f, float((xs[pos] + xs[pos + 1]) / 2.0))
    if best is None or best[0] <= _EPS:
        return None
    return best


@dataclass
class _Leaf:
    node: ValueNode
    indices: np.ndarray
    split: tuple | None
    birth: int


def _grow_leafwise(X, g, h, num_leaves, min_leaf) -> ValueNode:
    root = ValueNode(value=_leaf_value(g.sum(), h.sum()))
    all_idx = np.arange(X.shape[0])
    leaves = [_Leaf(root, all_idx, _best_split(X, g, h, all_idx, min_leaf), 0)]
    births = 1
    while len(leaves) < num_leaves:
        candidates = [lf for lf in leaves if lf.split is not None]
        if not candidates:
            break
        # largest gain; equal gains go to the leaf created first
        target = min(candidates, key=lambda lf: (-lf.split[0], lf.birth))
        _, f, threshold = target.split
        mask = X[target.indices, f] <= threshold
        li, ri = target.indices[mask], target.indices[~mask]
        node = target.node
        node.feature = f
        node.threshold = threshold
        node.left = ValueNode(value=_leaf_value(g[li].sum(), h[li].sum()))
        node.right = ValueNode(value=_leaf_value(g[ri].sum(), h[ri].sum()))
        node.value = 0.0
        leaves.remove(target)
        leaves.append(_Leaf(node.left, li, _best_split(X, g, h, li, min_leaf), births))
        leaves.append(
            _Leaf(node.right, ri, _best_split(X, g, h, ri, min_leaf), births + 1)
        )
        births += 2
    return root


def tree_values(node: ValueNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.float64)

    def descend(nd: ValueNode, idx: np.ndarray):
        if nd.is_leaf:
            out[idx] = nd.value
            return
        mask = X[idx, nd.feature] <= nd.threshold
        descend(nd.left, idx[mask])
        descend(nd.right, idx[~mask])

    descend(node, np.arange(X.shape[0]))
    return out


def _prior_score(p: float) -> float:
    if p <= 0.0:
        return -_F0_CLAMP
    if p >= 1.0:
        return _F0_CLAMP
    return float(np.clip(np.log(p / (1.0 - p)), -_F0_CLAMP, _F0_CLAMP))


def gbdt_fit(
    X: np.ndarray,
    y: np.ndarray,
    n_stages: int = 100,
    learning_rate: float = 0.1,
    num_leaves: int = 31,
    min_samples_leaf: int = 1,
) -> GBDTModel:
    """Boost one chain of trees per class. n_stages = 0 yields the prior-only
    model; single-class data is handled by the clamped prior score."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"X {X.shape} does not align with y {y.shape}")
    if y.size == 0:
        raise DegenerateLabels("empty label vector")
    if not np.all(np.isfinite(X)):
        raise BadInput("X contains non-finite values")
    if not (0.0 < learning_rate <= 1.0):
        raise ValueError("learning_rate must be in (0, 1]")
    if n_stages < 0 or num_leaves < 2:
        raise ValueError("n_stages must be >= 0 and num_leaves >= 2")
    n_classes = int(y.max()) + 1
    boosters = []
    for cls in range(max(n_classes, 1)):
        ybin = (y == cls).astype(np.float64)
        booster = ClassBooster(f0=_prior_score(float(ybin.mean())))
        score = np.full(y.size, booster.f0)
        for _ in range(n_stages):
            prob = expit(score)
            grad = prob - ybin
            hess = prob * (1.0 - prob)
            tree = _grow_leafwise(X, grad, hess, num_leaves, min_samples_leaf)
            score = score + learning_rate * tree_values(tree, X)
            booster.trees.append(tree)
        boosters.append(booster)
    return GBDTModel(
        boosters=boosters,
        n_classes=n_classes,
        n_features=X.shape[1],
        learning_rate=learning_rate,
        num_leaves=num_leaves,
        min_samples_leaf=min_samples_leaf,
    )


def gbdt_raw_scores(model: GBDTModel, X: np.ndarray, n_stages: int | None = None) -> np.ndarray:
    """Per-class additive scores after the first `n_stages` stages (all by
    default); column c is f0_c plus the shrunken sum of its stage trees."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} features, got {X.shape}")
    out = np.empty((X.shape[0], model.n_classes))
    for c, booster in enumerate(model.boosters):
        trees = booster.trees if n_stages is None else booster.trees[:n_stages]
        score = np.full(X.shape[0], booster.f0)
        for tree in trees:
            score += model.learning_rate * tree_values(tree, X)
        out[:, c] = score
    return out


def gbdt_predict_proba(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    scores = expit(gbdt_raw_scores(model, X))
    return scores / scores.sum(axis=1, keepdims=True)


def gbdt_predict(model: GBDTModel, X: np.ndarray) -> np.ndarray:
    return np.argmax(gbdt_predict_proba(model, X), axis=1).astype(np.int64)
