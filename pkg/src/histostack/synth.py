"""Synthetic feature-source generator for tests, demos, and pipeline checks.

Builds a jointly-separable binary task: each of three sources carries one
signal column (uniform on [-1, 1]) plus pure-noise columns, and the label is
the sign of the sum of the three signal columns, with a margin band around
zero rejected so the joint decision boundary is clean. Any single source is
weakly informative at best (about 71% attainable accuracy); stacking all
three makes the task linearly separable.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import stacking, tensor_store

DEFAULT_SOURCE_NAMES = ("synth-a", "synth-b", "synth-c")
CLASS_NAMES = ["negative", "positive"]


def make_joint_task(
    n_samples: int,
    n_sources: int = 3,
    width: int = 4,
    seed: int = 0,
    margin: float = 0.2,
):
    """Sample the task; returns (per-source matrices [n, width], labels).

    Column 0 of each source is its signal; the rest is standard normal noise.
    """
    rng = np.random.default_rng(seed)
    signals = np.empty((n_samples, n_sources))
    filled = 0
    while filled < n_samples:
        draw = rng.uniform(-1.0, 1.0, size=(n_samples, n_sources))
        keep = np.abs(draw.sum(axis=1)) >= margin
        take = min(int(keep.sum()), n_samples - filled)
        signals[filled : filled + take] = draw[keep][:take]
        filled += take
    y = (signals.sum(axis=1) > 0).astype(np.int64)
    sources = []
    for i in range(n_sources):
        mat = rng.standard_normal((n_samples, width)).astype(np.float32)
        mat[:, 0] = signals[:, i]
        sources.append(mat)
    return sources, y


def _split_counts(n: int, ratios=(0.6, 0.2, 0.2)) -> tuple[int, int, int]:
    n_train = int(round(n * ratios[0]))
    n_val = int(round(n * ratios[1]))
    return n_train, n_val, n - n_train - n_val


def generate_feature_sources(
    out_dir: str | Path,
    n_samples: int = 500,
    width: int = 4,
    seed: int = 0,
    margin: float = 0.2,
    source_names: tuple[str, ...] = DEFAULT_SOURCE_NAMES,
) -> dict:
    """Write a synthetic bundle plus one feature-source directory per name.

    Layout under out_dir: bundle/ (manifest + tensors) and sources/<name>/.
    The bundle's image tensors are small random rasters; its labels are the
    task labels, so the sources and the bundle share one manifest hash and
    can drive the full evaluate pipeline.
    """
    out_dir = Path(out_dir)
    mats, y = make_joint_task(n_samples, len(source_names), width, seed, margin)
    n_train, n_val, n_test = _split_counts(n_samples)
    bounds = {"train": (0, n_train), "val": (n_train, n_train + n_val), "test": (n_train + n_val, n_samples)}
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, 1])
    tensors = {}
    for split, (lo, hi) in bounds.items():
        tensors[f"x_{split}"] = rng.integers(0, 256, size=(hi - lo, 4, 4, 3), dtype=np.uint8)
        tensors[f"y_{split}"] = y[lo:hi]
    manifest = {
        "version": 1,
        "seed": seed,
        "ratios": [0.6, 0.2, 0.2],
        "class_names": CLASS_NAMES,
        "image_size": [4, 4],
        "entries": [],
        "synthetic": {"kind": "joint_separable", "n_samples": n_samples, "width": width, "margin": margin},
    }
    manifest_path = tensor_store.write_bundle(out_dir / "bundle", tensors, manifest)
    manifest_hash = tensor_store.manifest_digest(manifest_path)
    source_dirs = []
    for name, mat in zip(source_names, mats):
        src_dir = stacking.write_feature_source(
            out_dir / "sources" / name,
            name,
            mat[bounds["train"][0] : bounds["train"][1]],
            mat[bounds["val"][0] : bounds["val"][1]],
            mat[bounds["test"][0] : bounds["test"][1]],
            manifest_hash,
        )
        source_dirs.append(str(src_dir))
    return {
        "bundle": str(out_dir / "bundle"),
        "sources": source_dirs,
        "manifest_hash": manifest_hash,
        "counts": {"train": n_train, "val": n_val, "test": n_test},
    }
