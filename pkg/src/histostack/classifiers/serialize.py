"""Versioned JSON serialization for the four classifier model types.

Keeps every trained model auditable as plain text: a type tag, a schema
version, and the full parameter state. No binary formats.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .boosting import ClassBooster, GBDTModel, ValueNode
from .forest import ForestModel, TreeNode
from .logistic import LRModel
from .svc import BinaryMachine, SVCModel

SCHEMA_VERSION = 1


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"label": node.label}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(d: dict) -> TreeNode:
    if "label" in d:
        return TreeNode(label=d["label"])
    return TreeNode(
        feature=d["feature"],
        threshold=d["threshold"],
        left=_tree_from_dict(d["left"]),
        right=_tree_from_dict(d["right"]),
    )


def _vtree_to_dict(node: ValueNode) -> dict:
    if node.is_leaf:
        return {"value": node.value}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _vtree_to_dict(node.left),
        "right": _vtree_to_dict(node.right),
    }


def _vtree_from_dict(d: dict) -> ValueNode:
    if "value" in d:
        return ValueNode(value=d["value"])
    return ValueNode(
        feature=d["feature"],
        threshold=d["threshold"],
        left=_vtree_from_dict(d["left"]),
        right=_vtree_from_dict(d["right"]),
    )


def model_to_dict(model) -> dict:
    if isinstance(model, LRModel):
        return {
            "model": "lr",
            "version": SCHEMA_VERSION,
            "intercepts": model.intercepts.tolist(),
            "coefficients": model.coefficients.tolist(),
            "n_classes": model.n_classes,
            "regularization_c": model.regularization_c,
            "converged": model.converged,
        }
    if isinstance(model, SVCModel):
        return {
            "model": "svc",
            "version": SCHEMA_VERSION,
            "kernel": model.kernel,
            "c": model.c,
            "gamma": model.gamma,
            "degree": model.degree,
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "machines": [
                {
                    "dual_coef": m.dual_coef.tolist(),
                    "support_vectors": m.support_vectors.tolist(),
                    "support_indices": m.support_indices.tolist(),
                    "bias": m.bias,
                }
                for m in model.machines
            ],
        }
    if isinstance(model, ForestModel):
        return {
            "model": "rf",
            "version": SCHEMA_VERSION,
            "trees": [_tree_to_dict(t) for t in model.trees],
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "n_estimators": model.n_estimators,
            "max_features": model.max_features,
            "max_depth": model.max_depth,
            "seed": model.seed,
        }
    if isinstance(model, GBDTModel):
        return {
            "model": "lgbm",
            "version": SCHEMA_VERSION,
            "boosters": [
                {"f0": b.f0, "trees": [_vtree_to_dict(t) for t in b.trees]}
                for b in model.boosters
            ],
            "n_classes": model.n_classes,
            "n_features": model.n_features,
            "learning_rate": model.learning_rate,
            "num_leaves": model.num_leaves,
            "min_samples_leaf": model.min_samples_leaf,
        }
    raise TypeError(f"not a serializable model: {type(model)!r}")


def model_from_dict(d: dict):
    kind = d.get("model")
    if kind == "lr":
        return LRModel(
            intercepts=np.asarray(d["intercepts"], dtype=np.float64),
            coefficients=np.asarray(d["coefficients"], dtype=np.float64),
            n_classes=d["n_classes"],
            regularization_c=d["regularization_c"],
            converged=d["converged"],
        )
    if kind == "svc":
        machines = [
            BinaryMachine(
                dual_coef=np.asarray(m["dual_coef"], dtype=np.float64),
                support_vectors=np.asarray(m["support_vectors"], dtype=np.float64).reshape(
                    len(m["dual_coef"]), d["n_features"]
                ),
                support_indices=np.asarray(m["support_indices"], dtype=np.int64),
                bias=m["bias"],
            )
            for m in d["machines"]
        ]
        return SVCModel(
            kernel=d["kernel"],
            c=d["c"],
            gamma=d["gamma"],
            degree=d["degree"],
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            machines=machines,
        )
    if kind == "rf":
        return ForestModel(
            trees=[_tree_from_dict(t) for t in d["trees"]],
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            n_estimators=d["n_estimators"],
            max_features=d["max_features"],
            max_depth=d["max_depth"],
            seed=d["seed"],
        )
    if kind == "lgbm":
        return GBDTModel(
            boosters=[
                ClassBooster(f0=b["f0"], trees=[_vtree_from_dict(t) for t in b["trees"]])
                for b in d["boosters"]
            ],
            n_classes=d["n_classes"],
            n_features=d["n_features"],
            learning_rate=d["learning_rate"],
            num_leaves=d["num_leaves"],
            min_samples_leaf=d["min_samples_leaf"],
        )
    raise ValueError(f"unknown model tag {kind!r}")


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n")


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text()))
