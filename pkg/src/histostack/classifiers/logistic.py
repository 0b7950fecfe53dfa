"""One-vs-rest logistic regression fitted with a limited-memory quasi-Newton
solver (two-loop recursion, Armijo backtracking).

Each class gets its own binary model of the log-odds; probabilities are the
per-class sigmoid scores normalized to sum to one. The binary case is fitted
once and mirrored, so its probability pair is the exact sigmoid/complement
of a single log-odds model. L2 regularization with strength 1/c keeps the
solver stable on linearly separable feature maps, where the unregularized
likelihood has no finite optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import BadInput, DegenerateLabels, ShapeError


@dataclass
class LRModel:
    intercepts: np.ndarray  # (k,)
    coefficients: np.ndarray  # (k, p)
    n_classes: int
    regularization_c: float
    converged: bool

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[1]


def lr_objective(
    intercept: float, coef: np.ndarray, X: np.ndarray, y01: np.ndarray, c: float
) -> float:
    """Regularized negative log-likelihood of one binary slice.

    Sum of per-sample log losses plus ||coef||^2 / (2c); the intercept is not
    penalized.
    """
    z = X @ coef + intercept
    loss = float(np.sum(np.logaddexp(0.0, z) - y01 * z))
    return loss + float(coef @ coef) / (2.0 * c)


def _objective_grad(w: np.ndarray, X: np.ndarray, y01: np.ndarray, c: float):
    """(loss, gradient) at w = [intercept, coef...]."""
    z = X @ w[1:] + w[0]
    p = expit(z)
    loss = float(np.sum(np.logaddexp(0.0, z) - y01 * z)) + float(w[1:] @ w[1:]) / (2 * c)
    resid = p - y01
    grad = np.empty_like(w)
    grad[0] = resid.sum()
    grad[1:] = X.T @ resid + w[1:] / c
    return loss, grad


def _lbfgs(fun_grad, w0: np.ndarray, tol: float, max_iter: int, history: int = 10):
    """Minimize fun_grad from w0; returns (w, converged).

    Converged means the gradient infinity-norm dropped to `tol` or below.
    Curvature pairs with non-positive s'y are skipped to keep the implicit
    Hessian approximation positive definite.
    """
    w = w0.copy()
    f, g = fun_grad(w)
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    for _ in range(max_iter):
        if np.max(np.abs(g)) <= tol:
            return w, True
        q = g.copy()
        alphas = []
        for s, yv, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * yv
        if y_hist:
            q *= (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
        for (s, yv, rho), a in zip(
            zip(s_hist, y_hist, rho_hist), reversed(alphas)
        ):
            q += (a - rho * (yv @ q)) * s
        d = -q
        g_dot_d = g @ d
        if g_dot_d >= 0:  # stale curvature produced an ascent direction
            d = -g
            g_dot_d = -(g @ g)
            s_hist, y_hist, rho_hist = [], [], []
        step = 1.0
        for _ in range(60):
            w_new = w + step * d
            f_new, g_new = fun_grad(w_new)
            if f_new <= f + 1e-4 * step * g_dot_d:
                break
            step *= 0.5
        else:
            return w, bool(np.max(np.abs(g)) <= tol)
        s = w_new - w
        yv = g_new - g
        sy = s @ yv
        if sy > 1e-12:
            s_hist.append(s)
            y_hist.append(yv)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > history:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)
        w, f, g = w_new, f_new, g_new
    return w, bool(np.max(np.abs(g)) <= tol)


def lr_fit(
    X: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> LRModel:
    """Fit one-vs-rest logistic regression.

    Raises DegenerateLabels when only one class is present and BadInput on
    non-finite features. A model that hit max_iter before the gradient
    tolerance comes back with converged=False.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"X {X.shape} does not align with y {y.shape}")
    if not np.all(np.isfinite(X)):
        raise BadInput("X contains non-finite values")
    if c <= 0:
        raise ValueError("regularization c must be positive")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateLabels(f"need at least 2 classes, got {classes.size}")
    k = int(y.max()) + 1
    p = X.shape[1]
    intercepts = np.zeros(k)
    coefs = np.zeros((k, p))
    converged = True
    if k == 2:
        # single fit with class 0 positive; class 1 is the mirrored model
        y01 = (y == 0).astype(np.float64)
        w, ok = _lbfgs(lambda w: _objective_grad(w, X, y01, c), np.zeros(p + 1), tol, max_iter)
        intercepts[0], coefs[0] = w[0], w[1:]
        intercepts[1], coefs[1] = -w[0], -w[1:]
        converged = ok
    else:
        for cls in range(k):
            y01 = (y == cls).astype(np.float64)
            w, ok = _lbfgs(
                lambda w: _objective_grad(w, X, y01, c), np.zeros(p + 1), tol, max_iter
            )
            intercepts[cls], coefs[cls] = w[0], w[1:]
            converged = converged and ok
    return LRModel(
        intercepts=intercepts,
        coefficients=coefs,
        n_classes=k,
        regularization_c=c,
        converged=converged,
    )


def lr_predict_proba(model: LRModel, X: np.ndarray) -> np.ndarray:
    """Per-class probabilities, rows summing to one.

    Binary models return the exact (sigmoid, 1 - sigmoid) pair of the class-0
    log-odds; for k > 2 the per-class sigmoid scores are normalized.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} features, got {X.shape}")
    logits = X @ model.coefficients.T + model.intercepts
    if model.n_classes == 2:
        p0 = expit(logits[:, 0])
        return np.column_stack([p0, 1.0 - p0])
    scores = expit(logits)
    return scores / scores.sum(axis=1, keepdims=True)


def lr_predict(model: LRModel, X: np.ndarray) -> np.ndarray:
    return np.argmax(lr_predict_proba(model, X), axis=1).astype(np.int64)
