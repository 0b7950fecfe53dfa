"""Grid search on the validation split, run-record persistence, and
auto-curation of many runs into a ranked leaderboard.

Every evaluation writes a single hyperparameters.json capturing all settings
and all resulting quality metrics; curation parses a directory tree of such
records, keeps the best record per (model, dataset), and ranks models by the
weighted average that makes the second dataset group equal in significance
to the mean of the first.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import classifiers, stacking, tensor_store
from .errors import GridExhausted, NothingToCurate, ProvenanceError, ShapeError
from .metrics import compute_metrics, confusion, round_percent
from .stacking import EnsembleModel, EnsembleSpec

RECORD_SCHEMA_VERSION = 1
RECORD_NAME = "hyperparameters.json"
MODEL_NAME = "model.json"

# default search spaces; the "scale" gamma resolves to 1/width at fit time
DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "lr": {"c": [0.01, 0.1, 1.0, 10.0, 100.0]},
    "svc": {
        "c": [0.1, 1.0, 10.0, 100.0],
        "kernel": ["linear", "rbf", "poly"],
        "gamma": ["scale", 0.01, 0.001],
        "degree": [2, 3],
    },
    "rf": {"n_estimators": [100, 300], "max_depth": [None, 16]},
    "lgbm": {
        "n_stages": [100, 200],
        "learning_rate": [0.1, 0.05],
        "num_leaves": [15, 31],
    },
}


@dataclass
class ParamGrid:
    head: str
    axes: dict[str, list]

    def __post_init__(self):
        if not self.axes or any(not v for v in self.axes.values()):
            raise ValueError("grid axes must be non-empty")

    def points(self) -> list[dict]:
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in product(*self.axes.values())]

    @classmethod
    def default(cls, head: str) -> "ParamGrid":
        return cls(head=head, axes={k: list(v) for k, v in DEFAULT_GRIDS[head].items()})


@dataclass
class GridResult:
    best_params: dict
    best_accuracy: float
    best_index: int
    candidates: list[dict] = field(default_factory=list)


def point_seed(master_seed: int, index: int) -> int:
    """Per-grid-point model seed, a pure function of (master seed, index) so
    selection is identical for any parallelism degree."""
    return int(np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, index]).generate_state(1)[0])


def grid_search(
    grid: ParamGrid,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    seed: int = 0,
    threads: int = 1,
) -> GridResult:
    """Fit one model per grid point on train, score accuracy on val, return
    the argmax; ties break toward the earliest point in enumeration order.
    All candidate scores (or their failure messages) are kept."""
    points = grid.points()

    def run_point(idx_params):
        idx, params = idx_params
        try:
            model = classifiers.fit_head(
                grid.head, X_train, y_train, params, seed=point_seed(seed, idx)
            )
            pred = classifiers.predict_head(model, X_val)
            return {"params": params, "val_accuracy": float(np.mean(pred == y_val))}
        except Exception as exc:  # logged per point; GridExhausted if none survive
            return {"params": params, "error": f"{type(exc).__name__}: {exc}"}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            candidates = list(pool.map(run_point, enumerate(points)))
    else:
        candidates = [run_point(ip) for ip in enumerate(points)]
    best_idx = -1
    best_acc = -1.0
    for idx, cand in enumerate(candidates):
        if "val_accuracy" in cand and cand["val_accuracy"] > best_acc:
            best_idx, best_acc = idx, cand["val_accuracy"]
    if best_idx < 0:
        raise GridExhausted([c["error"] for c in candidates])
    return GridResult(
        best_params=candidates[best_idx]["params"],
        best_accuracy=best_acc,
        best_index=best_idx,
        candidates=candidates,
    )


@dataclass
class EvaluateConfig:
    dataset_name: str
    bundle_dir: str
    source_dirs: list[str]
    head: str | None = None
    shorthand: str | None = None
    grid_axes: dict[str, list] | None = None
    seed: int = 0
    standardize: bool = False
    threads: int = 1
    out_dir: str | None = None
    model_label: str | None = None

    def resolve_spec(self, source_names: tuple[str, ...]) -> EnsembleSpec:
        if self.shorthand:
            return stacking.parse_shorthand(self.shorthand)
        if not self.head:
            raise ValueError("either head or shorthand must be given")
        return EnsembleSpec(source_names=source_names, head=self.head)


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def evaluate_run(config: EvaluateConfig) -> tuple[dict, Path | None]:
    """Full evaluation: grid search on val, refit the winner on train, score
    test, and persist the run record (and model) under out_dir.

    The record is sufficient to re-run the evaluation: inputs, grid, seeds,
    selected params, and all metrics. Nothing is written if any stage fails.
    """
    started = _utc_now()
    bundle = tensor_store.load_bundle(Path(config.bundle_dir))
    sources = [stacking.load_feature_source(d) for d in config.source_dirs]
    spec = config.resolve_spec(tuple(s.name for s in sources))
    ordered = [next(s for s in sources if s.name == n) for n in spec.source_names]
    for src in ordered:
        if src.manifest_hash != bundle.manifest_hash:
            raise ProvenanceError(
                f"source {src.name!r} was computed from a different manifest than the bundle"
            )
    for split in ("train", "val", "test"):
        n_bundle = bundle.split(split)[1].shape[0]
        for src in ordered:
            if src.split(split).shape[0] != n_bundle:
                raise ShapeError(
                    f"source {src.name!r} {split} has {src.split(split).shape[0]} rows, "
                    f"bundle has {n_bundle}"
                )
    X_train = stacking.concat_features(ordered, "train").astype(np.float64)
    X_val = stacking.concat_features(ordered, "val").astype(np.float64)
    mean = std = None
    if config.standardize:
        mean = X_train.mean(axis=0)
        std = X_train.std(axis=0)
        std[std == 0] = 1.0
        X_train = (X_train - mean) / std
        X_val = (X_val - mean) / std
    axes = config.grid_axes or DEFAULT_GRIDS[spec.head]
    grid = ParamGrid(head=spec.head, axes={k: list(v) for k, v in axes.items()})
    result = grid_search(
        grid,
        X_train,
        bundle.y_train,
        X_val,
        bundle.y_val,
        seed=config.seed,
        threads=config.threads,
    )
    # refit the winner on train only (val stays a pure selection split),
    # reusing the winning point's derived seed so the record is reproducible
    head_model = classifiers.fit_head(
        spec.head,
        X_train,
        bundle.y_train,
        result.best_params,
        seed=point_seed(config.seed, result.best_index),
    )
    ensemble = EnsembleModel(
        spec=spec,
        head_model=head_model,
        source_names=tuple(s.name for s in ordered),
        source_widths=tuple(s.feature_width for s in ordered),
        manifest_hash=bundle.manifest_hash,
        standardize=config.standardize,
        feature_mean=mean,
        feature_std=std,
    )
    y_pred = stacking.predict_ensemble(ensemble, ordered, "test")
    cm = confusion(bundle.y_test, y_pred, len(bundle.class_names), bundle.class_names)
    report = compute_metrics(cm)
    label = config.model_label or (
        f"ens-{spec.shorthand}" if spec.shorthand else f"stack-{spec.head}"
    )
    augmentation = bundle.manifest.get("augmentation")
    record = {
        "schema_version": RECORD_SCHEMA_VERSION,
        "dataset_name": config.dataset_name,
        "model": label,
        "ensemble": {
            "shorthand": spec.shorthand,
            "head": spec.head,
            "sources": list(spec.source_names),
            "source_widths": [s.feature_width for s in ordered],
        },
        "augmented": augmentation is not None,
        "static_augmentation": bool(augmentation)
        and augmentation.get("mode") == "static_training",
        "augmentation": augmentation,
        "selected_params": result.best_params,
        "validation_accuracy": result.best_accuracy,
        "candidate_scores": result.candidates,
        "grid_axes": grid.axes,
        "seed": config.seed,
        "standardize": config.standardize,
        "manifest_hash": bundle.manifest_hash,
        "inputs": {
            "bundle": str(config.bundle_dir),
            "sources": [str(d) for d in config.source_dirs],
        },
        "metrics": report.to_dict(),
        "confusion": cm.to_dict(),
        "execution": {"started_at": started, "finished_at": _utc_now(), "threads": config.threads},
    }
    run_dir = None
    if config.out_dir:
        run_dir = _write_record(Path(config.out_dir), record, ensemble)
    return record, run_dir


def record_identity(record: dict) -> dict:
    """The reproducible portion of a record: everything except wall-clock
    and execution-environment fields."""
    return {k: v for k, v in record.items() if k != "execution"}


def _write_record(out_root: Path, record: dict, ensemble: EnsembleModel) -> Path:
    digest = hashlib.sha256(
        json.dumps(record_identity(record), sort_keys=True).encode()
    ).hexdigest()[:12]
    run_dir = out_root / record["dataset_name"] / record["model"] / f"run-{digest}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / RECORD_NAME).write_text(json.dumps(record, sort_keys=True, indent=2) + "\n")
    (run_dir / MODEL_NAME).write_text(
        json.dumps(stacking_model_to_dict(ensemble), sort_keys=True) + "\n"
    )
    return run_dir


def stacking_model_to_dict(model: EnsembleModel) -> dict:
    return {
        "kind": "ensemble",
        "shorthand": model.spec.shorthand,
        "head": classifiers.model_to_dict(model.head_model),
        "source_names": list(model.source_names),
        "source_widths": list(model.source_widths),
        "manifest_hash": model.manifest_hash,
        "standardize": model.standardize,
        "feature_mean": None if model.feature_mean is None else model.feature_mean.tolist(),
        "feature_std": None if model.feature_std is None else model.feature_std.tolist(),
    }


def stacking_model_from_dict(d: dict) -> EnsembleModel:
    head_model = classifiers.model_from_dict(d["head"])
    spec = EnsembleSpec(
        source_names=tuple(d["source_names"]),
        head=classifiers.head_kind(head_model),
        shorthand=d.get("shorthand") or "",
    )
    return EnsembleModel(
        spec=spec,
        head_model=head_model,
        source_names=tuple(d["source_names"]),
        source_widths=tuple(d["source_widths"]),
        manifest_hash=d["manifest_hash"],
        standardize=d["standardize"],
        feature_mean=None if d["feature_mean"] is None else np.asarray(d["feature_mean"]),
        feature_std=None if d["feature_std"] is None else np.asarray(d["feature_std"]),
    )


@dataclass
class LeaderboardRow:
    model: str
    accuracies: dict[str, float]  # dataset -> test accuracy fraction
    weighted_average: float


@dataclass
class Leaderboard:
    rows: list[LeaderboardRow]
    datasets: list[str]
    groups: dict[str, str]
    skipped: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "datasets": self.datasets,
            "groups": self.groups,
            "rows": [
                {
                    "model": r.model,
                    "accuracies": r.accuracies,
                    "weighted_average": r.weighted_average,
                }
                for r in self.rows
            ],
            "skipped": self.skipped,
        }

    def to_markdown(self) -> str:
        header = ["Model"] + self.datasets + ["WtdAvg"]
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        for row in self.rows:
            cells = [row.model]
            for ds in self.datasets:
                acc = row.accuracies.get(ds)
                cells.append("" if acc is None else f"{round_percent(acc):.2f}%")
            cells.append(f"{round_percent(row.weighted_average):.2f}%")
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = [",".join(["model"] + self.datasets + ["weighted_average"])]
        for row in self.rows:
            cells = [row.model]
            for ds in self.datasets:
                acc = row.accuracies.get(ds)
                cells.append("" if acc is None else f"{round_percent(acc):.2f}")
            cells.append(f"{round_percent(row.weighted_average):.2f}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def weighted_average(accuracies: dict[str, float], groups: dict[str, str]) -> float:
    """Mean of per-group means when more than one group is present (so a
    single-dataset group counts as much as a whole multi-dataset group),
    plain mean otherwise."""
    by_group: dict[str, list[float]] = {}
    for ds, acc in accuracies.items():
        by_group.setdefault(groups.get(ds, ds), []).append(acc)
    if len(by_group) < 2:
        return float(np.mean(list(accuracies.values())))
    return float(np.mean([np.mean(v) for v in by_group.values()]))


def find_records(run_dirs: list[str | Path]) -> list[Path]:
    found: set[Path] = set()
    for root in run_dirs:
        root = Path(root)
        if root.is_file() and root.name == RECORD_NAME:
            found.add(root)
        elif root.is_dir():
            found.update(root.rglob(RECORD_NAME))
    return sorted(found)


def curate(run_dirs: list[str | Path], groups: dict[str, str] | None = None) -> Leaderboard:
    """Parse every run record under run_dirs into a ranked leaderboard.

    Per (model, dataset) only the record with the highest test accuracy
    survives. Unparseable files are reported in `skipped`, never fatal.
    """
    groups = groups or {}
    best: dict[tuple[str, str], float] = {}
    skipped: list[str] = []
    parsed = 0
    for path in find_records(run_dirs):
        try:
            record = json.loads(path.read_text())
            model = record["model"]
            dataset = record["dataset_name"]
            acc = float(record["metrics"]["aggregate"]["accuracy"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            skipped.append(f"{path}: {type(exc).__name__}: {exc}")
            continue
        parsed += 1
        key = (model, dataset)
        if key not in best or acc > best[key]:
            best[key] = acc
    if not parsed:
        raise NothingToCurate(f"no parseable {RECORD_NAME} under {[str(d) for d in run_dirs]}")
    datasets = sorted({ds for _, ds in best})
    models = sorted({m for m, _ in best})
    rows = []
    for model in models:
        accs = {ds: best[(model, ds)] for ds in datasets if (model, ds) in best}
        rows.append(
            LeaderboardRow(
                model=model,
                accuracies=accs,
                weighted_average=weighted_average(accs, groups),
            )
        )
    rows.sort(key=lambda r: (-r.weighted_average, r.model))
    return Leaderboard(rows=rows, datasets=datasets, groups=groups, skipped=skipped)


def curate_from_table(
    table: dict[str, dict[str, float]], groups: dict[str, str] | None = None
) -> Leaderboard:
    """Leaderboard directly from {model: {dataset: accuracy fraction}}, the
    same ranking math without run directories."""
    groups = groups or {}
    datasets = sorted({ds for accs in table.values() for ds in accs})
    rows = [
        LeaderboardRow(
            model=model,
            accuracies=dict(accs),
            weighted_average=weighted_average(accs, groups),
        )
        for model, accs in table.items()
    ]
    rows.sort(key=lambda r: (-r.weighted_average, r.model))
    return Leaderboard(rows=rows, datasets=datasets, groups=groups)


def emit_challenge_csv(model, test_features: np.ndarray, image_ids: list[str], out_path: str | Path) -> Path:
    """Headerless two-column CSV `image_id,predicted_class_index`, one row
    per image in input order."""
    test_features = np.asarray(test_features, dtype=np.float64)
    if test_features.ndim != 2:
        raise ShapeError(f"test features must be 2-d, got {test_features.shape}")
    if isinstance(model, EnsembleModel):
        X = model._transform(test_features)
        head_model = model.head_model
    else:
        X = test_features
        head_model = model
    labels = classifiers.predict_head(head_model, X) if test_features.shape[0] else []
    if len(image_ids) != test_features.shape[0]:
        raise ShapeError(
            f"{len(image_ids)} image ids for {test_features.shape[0]} feature rows"
        )
    out_path = Path(out_path)
    lines = [f"{img_id},{int(label)}" for img_id, label in zip(image_ids, labels)]
    out_path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return out_path
