"""Tri-extractor feature stacking: concatenate per-sample feature maps from
multiple extractors and bind them to one classifier head.

Every feature source carries the hash of the dataset manifest its rows were
computed from. Concatenation and prediction refuse to mix sources from
different manifests, and a fitted ensemble refuses sources that do not match
its recorded recipe, because silently misaligned rows are the one failure
mode this pipeline cannot detect from the numbers alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import classifiers, tensor_store
from .errors import AlignmentError, ProvenanceError

SPLITS = ("train", "val", "test")

# shorthand digit -> the three extractor names it stands for
ENSEMBLE_TRIPLES = {
    "1": ("densenet121", "inceptionv3", "nasnetmobile"),
    "2": ("efficientnetv2b1", "inceptionv3", "resnet50"),
    "3": ("densenet121", "inceptionv3", "resnet50"),
    "4": ("densenet121", "inceptionv3", "mobilenetv2"),
}
HEAD_BY_LETTER = {"a": "lr", "b": "svc", "c": "rf", "d": "lgbm"}


@dataclass
class FeatureSource:
    name: str
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    feature_width: int
    manifest_hash: str

    def split(self, name: str) -> np.ndarray:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return getattr(self, name)


def write_feature_source(
    out_dir: str | Path,
    name: str,
    train: np.ndarray,
    val: np.ndarray,
    test: np.ndarray,
    manifest_hash: str,
) -> Path:
    """Persist a source as {train,val,test}.npy (float32) plus source.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = train.shape[1]
    for split, arr in (("train", train), ("val", val), ("test", test)):
        arr = np.asarray(arr, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[1] != width:
            raise AlignmentError(f"{split} matrix width {arr.shape} != {width}")
        tensor_store.write_tensor(arr, out_dir / f"{split}.npy")
    meta = {"name": name, "feature_width": int(width), "manifest_hash": manifest_hash}
    (out_dir / "source.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return out_dir


def load_feature_source(src_dir: str | Path) -> FeatureSource:
    src_dir = Path(src_dir)
    meta = json.loads((src_dir / "source.json").read_text())
    mats = {s: tensor_store.read_tensor(src_dir / f"{s}.npy") for s in SPLITS}
    width = meta["feature_width"]
    for split, mat in mats.items():
        if mat.ndim != 2 or mat.shape[1] != width:
            raise AlignmentError(
                f"{src_dir}/{split}.npy has shape {mat.shape}, expected width {width}"
            )
    return FeatureSource(
        name=meta["name"],
        train=mats["train"],
        val=mats["val"],
        test=mats["test"],
        feature_width=width,
        manifest_hash=meta["manifest_hash"],
    )


@dataclass
class EnsembleSpec:
    source_names: tuple[str, ...]
    head: str
    shorthand: str = ""

    def __post_init__(self):
        if len(self.source_names) not in (2, 3):
            raise ValueError("an ensemble stacks 2 or 3 feature sources")
        if self.head not in classifiers.HEAD_KINDS:
            raise ValueError(f"head must be one of {classifiers.HEAD_KINDS}")


def parse_shorthand(code: str) -> EnsembleSpec:
    """Expand a two-character label like '3c' into its spec: the digit picks
    the extractor triple, the letter picks the head (a=lr b=svc c=rf d=lgbm)."""
    code = code.strip().lower()
    if len(code) != 2 or code[0] not in ENSEMBLE_TRIPLES or code[1] not in HEAD_BY_LETTER:
        raise ValueError(f"bad ensemble shorthand {code!r}")
    return EnsembleSpec(
        source_names=ENSEMBLE_TRIPLES[code[0]],
        head=HEAD_BY_LETTER[code[1]],
        shorthand=code,
    )


def _check_provenance(sources: list[FeatureSource]) -> str:
    hashes = {s.manifest_hash for s in sources}
    if len(hashes) != 1:
        raise ProvenanceError(
            "feature sources come from different manifests: "
            + ", ".join(sorted(f"{s.name}={s.manifest_hash[:12]}" for s in sources))
        )
    return sources[0].manifest_hash


def concat_features(sources: list[FeatureSource], split: str) -> np.ndarray:
    """Column-concatenate one split across sources, order preserved."""
    if not sources:
        raise ValueError("no sources given")
    _check_provenance(sources)
    mats = [s.split(split) for s in sources]
    counts = {m.shape[0] for m in mats}
    if len(counts) != 1:
        raise AlignmentError(
            f"row-count mismatch on split {split!r}: "
            + ", ".join(f"{s.name}={m.shape[0]}" for s, m in zip(sources, mats))
        )
    return np.concatenate(mats, axis=1)


@dataclass
class EnsembleModel:
    spec: EnsembleSpec
    head_model: object
    source_names: tuple[str, ...]
    source_widths: tuple[int, ...]
    manifest_hash: str
    standardize: bool = False
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None

    def _transform(self, X: np.ndarray) -> np.ndarray:
        if not self.standardize:
            return X
        return (X - self.feature_mean) / self.feature_std


def _select(sources: list[FeatureSource], names: tuple[str, ...]) -> list[FeatureSource]:
    by_name = {s.name: s for s in sources}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise ProvenanceError(f"sources missing for {missing}")
    return [by_name[n] for n in names]


def fit_ensemble(
    spec: EnsembleSpec,
    sources: list[FeatureSource],
    y_train: np.ndarray,
    head_params: dict | None = None,
    seed: int = 0,
    standardize: bool = False,
) -> EnsembleModel:
    """Concatenate the train split in spec order and fit the head on it.

    With standardize=True each column is shifted/scaled by its train-split
    mean and standard deviation before fitting (useful when raw extractor
    activations are badly scaled for SVC or LR); the statistics travel with
    the model.
    """
    ordered = _select(sources, spec.source_names)
    manifest_hash = _check_provenance(ordered)
    X = concat_features(ordered, "train").astype(np.float64)
    return _fit_on(spec, ordered, X, y_train, head_params, seed, standardize, manifest_hash)


def _fit_on(spec, ordered, X, y, head_params, seed, standardize, manifest_hash):
    mean = std = None
    if standardize:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0] = 1.0
        X = (X - mean) / std
    head_model = classifiers.fit_head(spec.head, X, np.asarray(y), head_params or {}, seed)
    return EnsembleModel(
        spec=spec,
        head_model=head_model,
        source_names=tuple(s.name for s in ordered),
        source_widths=tuple(s.feature_width for s in ordered),
        manifest_hash=manifest_hash,
        standardize=standardize,
        feature_mean=mean,
        feature_std=std,
    )


def predict_ensemble(
    model: EnsembleModel, sources: list[FeatureSource], split: str
) -> np.ndarray:
    """Predict a split through the bound head, enforcing the fit-time recipe:
    same source names in the same order, same widths, same manifest."""
    ordered = _select(sources, model.source_names)
    given = tuple(s.name for s in sources if s.name in model.source_names)
    if given != model.source_names:
        raise ProvenanceError(
            f"source order {given} does not match fitted recipe {model.source_names}"
        )
    if tuple(s.feature_width for s in ordered) != model.source_widths:
        raise ProvenanceError("source widths do not match fitted recipe")
    if _check_provenance(ordered) != model.manifest_hash:
        raise ProvenanceError("sources trace to a different manifest than the fitted model")
    X = concat_features(ordered, split).astype(np.float64)
    return classifiers.predict_head(model.head_model, model._transform(X))
