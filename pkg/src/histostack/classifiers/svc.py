"""Soft-margin support vector classification solved in the dual.

The dual of the standard formulation (hinge slack entering linearly) is
optimized by sequential two-variable updates on the maximal-violating pair,
stopping when the KKT violation gap drops below tol. Kernels: linear <u,v>,
rbf exp(-gamma ||u-v||^2), and poly (gamma <u,v> + 1)^degree. Multi-class is
one-vs-rest with argmax over decision scores; the binary case trains a
single machine whose positive side is class index 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadInput, BadKernelParams, DegenerateLabels, ShapeError

KERNELS = ("linear", "rbf", "poly")
_TAU = 1e-12


def kernel_matrix(
    U: np.ndarray, V: np.ndarray, kernel: str, gamma: float, degree: int
) -> np.ndarray:
    if kernel == "linear":
        return U @ V.T
    if kernel == "rbf":
        sq = (
            np.sum(U * U, axis=1)[:, None]
            + np.sum(V * V, axis=1)[None, :]
            - 2.0 * (U @ V.T)
        )
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kernel == "poly":
        return (gamma * (U @ V.T) + 1.0) ** degree
    raise BadKernelParams(f"unknown kernel {kernel!r}")


@dataclass
class BinaryMachine:
    """Dual solution for one one-vs-rest slice: only support vectors kept."""

    dual_coef: np.ndarray  # alpha_i * y_i over support vectors
    support_vectors: np.ndarray
    support_indices: np.ndarray  # training-row indices of the stored vectors
    bias: float


@dataclass
class SVCModel:
    kernel: str
    c: float
    gamma: float
    degree: int
    n_classes: int
    n_features: int
    machines: list[BinaryMachine] = field(default_factory=list)


def resolve_gamma(gamma, n_features: int) -> float:
    """Numeric gamma, or the 1/p convention for the string 'scale'."""
    if gamma == "scale":
        return 1.0 / n_features
    return float(gamma)


def _smo(K: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int):
    """Maximal-violating-pair solver for the dual problem.

    Returns (alpha, bias). y must be ±1. The stopping rule bounds every KKT
    residual by tol once the violation gap m - M closes below it.
    """
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    Q_diag = np.diag(K).copy()
    pos = y > 0
    for _ in range(max_iter):
        viol = -y * grad
        up = (pos & (alpha < c - _TAU)) | (~pos & (alpha > _TAU))
        low = (pos & (alpha > _TAU)) | (~pos & (alpha < c - _TAU))
        if not up.any() or not low.any():
            break
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = up_idx[np.argmax(viol[up_idx])]
        j = low_idx[np.argmin(viol[low_idx])]
        if viol[i] - viol[j] < tol:
            break
        Qi = y[i] * y * K[i]
        Qj = y[j] * y * K[j]
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = Q_diag[i] + Q_diag[j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = c - diff
            else:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = c + diff
        else:
            quad = Q_diag[i] + Q_diag[j] - 2.0 * K[i, j]
            if quad <= 0:
                quad = _TAU
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > c:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = total - c
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > c:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = total - c
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        grad += Qi * (alpha[i] - old_i) + Qj * (alpha[j] - old_j)
    # bias from free vectors when available, else the violation midpoint
    viol = -y * grad
    free = (alpha > _TAU) & (alpha < c - _TAU)
    if free.any():
        bias = float(np.mean(viol[free]))
    else:
        up = (pos & (alpha < c - _TAU)) | (~pos & (alpha > _TAU))
        low = (pos & (alpha > _TAU)) | (~pos & (alpha < c - _TAU))
        hi = viol[up].max() if up.any() else 0.0
        lo = viol[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)
    return alpha, bias


def svc_fit(
    X: np.ndarray,
    y: np.ndarray,
    kernel: str = "rbf",
    c: float = 1.0,
    gamma="scale",
    degree: int = 3,
    tol: float = 1e-3,
    max_iter: int | None = None,
) -> SVCModel:
    """Fit one-vs-rest soft-margin machines; stores support vectors only
    (rows with alpha > tol)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"X {X.shape} does not align with y {y.shape}")
    if not np.all(np.isfinite(X)):
        raise BadInput("X contains non-finite values")
    if np.unique(y).size < 2:
        raise DegenerateLabels("need at least 2 classes")
    if c <= 0:
        raise ValueError("c must be positive")
    if kernel not in KERNELS:
        raise BadKernelParams(f"kernel must be one of {KERNELS}")
    g = resolve_gamma(gamma, X.shape[1])
    if kernel in ("rbf", "poly") and g <= 0:
        raise BadKernelParams(f"gamma must be positive for {kernel}, got {g}")
    if kernel == "poly" and (int(degree) != degree or degree < 1):
        raise BadKernelParams(f"degree must be an integer >= 1, got {degree}")
    k = int(y.max()) + 1
    n = X.shape[0]
    if max_iter is None:
        max_iter = max(20_000, 200 * n)
    K = kernel_matrix(X, X, kernel, g, int(degree))
    machines = []
    slices = [1] if k == 2 else list(range(k))  # binary: one machine, positive = class 1
    for cls in slices:
        ybin = np.where(y == cls, 1.0, -1.0)
        alpha, bias = _smo(K, ybin, c, tol, max_iter)
        support = alpha > tol
        machines.append(
            BinaryMachine(
                dual_coef=(alpha * ybin)[support],
                support_vectors=X[support].copy(),
                support_indices=np.flatnonzero(support),
                bias=bias,
            )
        )
    return SVCModel(
        kernel=kernel,
        c=float(c),
        gamma=g,
        degree=int(degree),
        n_classes=k,
        n_features=X.shape[1],
        machines=machines,
    )


def svc_decision(model: SVCModel, X: np.ndarray) -> np.ndarray:
    """Decision scores: shape (n,) for binary models, (n, k) otherwise."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} features, got {X.shape}")
    cols = []
    for machine in model.machines:
        if machine.support_vectors.size:
            Kx = kernel_matrix(
                X, machine.support_vectors, model.kernel, model.gamma, model.degree
            )
            cols.append(Kx @ machine.dual_coef + machine.bias)
        else:
            cols.append(np.full(X.shape[0], machine.bias))
    if model.n_classes == 2:
        return cols[0]
    return np.column_stack(cols)


def svc_predict(model: SVCModel, X: np.ndarray) -> np.ndarray:
    scores = svc_decision(model, X)
    if model.n_classes == 2:
        return (scores > 0).astype(np.int64)
    return np.argmax(scores, axis=1).astype(np.int64)
