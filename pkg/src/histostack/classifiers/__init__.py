"""Four classifier heads with a uniform fit/predict contract.

Heads: logistic regression (limited-memory quasi-Newton), soft-margin SVC
(sequential two-variable dual optimization), random forest (Gini bagging
with random feature subspaces), and leaf-wise gradient-boosted trees.
Multi-class is one-vs-rest everywhere; ties resolve to the lowest class
index.
"""

from __future__ import annotations

import numpy as np

from .boosting import GBDTModel, gbdt_fit, gbdt_predict, gbdt_predict_proba
from .forest import ForestModel, rf_fit, rf_predict
from .logistic import LRModel, lr_fit, lr_predict, lr_predict_proba
from .serialize import load_model, model_from_dict, model_to_dict, save_model
from .svc import SVCModel, svc_decision, svc_fit, svc_predict

HEAD_KINDS = ("lr", "svc", "rf", "lgbm")


def fit_head(kind: str, X: np.ndarray, y: np.ndarray, params: dict, seed: int = 0):
    """Fit one of the four heads with its keyword params; `seed` only matters
    for the stochastic forest head."""
    if kind == "lr":
        return lr_fit(X, y, **params)
    if kind == "svc":
        return svc_fit(X, y, **params)
    if kind == "rf":
        return rf_fit(X, y, seed=seed, **params)
    if kind == "lgbm":
        return gbdt_fit(X, y, **params)
    raise ValueError(f"unknown head kind {kind!r}")


def predict_head(model, X: np.ndarray) -> np.ndarray:
    if isinstance(model, LRModel):
        return lr_predict(model, X)
    if isinstance(model, SVCModel):
        return svc_predict(model, X)
    if isinstance(model, ForestModel):
        return rf_predict(model, X)
    if isinstance(model, GBDTModel):
        return gbdt_predict(model, X)
    raise TypeError(f"not a classifier model: {type(model)!r}")


def head_kind(model) -> str:
    return {LRModel: "lr", SVCModel: "svc", ForestModel: "rf", GBDTModel: "lgbm"}[
        type(model)
    ]


__all__ = [
    "HEAD_KINDS",
    "LRModel",
    "SVCModel",
    "ForestModel",
    "GBDTModel",
    "lr_fit",
    "lr_predict",
    "lr_predict_proba",
    "svc_fit",
    "svc_decision",
    "svc_predict",
    "rf_fit",
    "rf_predict",
    "gbdt_fit",
    "gbdt_predict",
    "gbdt_predict_proba",
    "fit_head",
    "predict_head",
    "head_kind",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]
