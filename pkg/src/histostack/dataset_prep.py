"""Turn a class-labeled image tree into a stratified, leak-checked NPY bundle.

Class labels are inferred from the immediate parent directory of each image.
Splitting is stratified per class with largest-remainder rounding, shuffled
by a single 64-bit seed, so the resulting bundle bytes are a pure function
of (corpus bytes, seed, ratios, image size).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import tensor_store
from .errors import (
    BadRatios,
    ClassTooSmall,
    DataLeak,
    DecodeError,
    EmptyClass,
)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"}
# modes PIL converts losslessly to 8-bit 3-channel; 16/32-bit rasters are refused
_EIGHT_BIT_MODES = {"1", "L", "LA", "P", "RGB", "RGBA"}
SPLIT_NAMES = ("train", "val", "test")

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class CorpusEntry:
    relative_path: str
    class_label: str
    content_hash: str


@dataclass
class LabeledCorpus:
    root: Path
    entries: list[CorpusEntry]

    @property
    def class_names(self) -> list[str]:
        return sorted({e.class_label for e in self.entries})

    def by_class(self) -> dict[str, list[CorpusEntry]]:
        grouped: dict[str, list[CorpusEntry]] = {c: [] for c in self.class_names}
        for entry in self.entries:
            grouped[entry.class_label].append(entry)
        return grouped


@dataclass
class SplitAssignment:
    seed: int
    ratios: tuple[float, float, float]
    assignment: dict[str, str]  # relative_path -> train|val|test


@dataclass
class LeakReport:
    """Content hashes that appear in more than one split, with their paths."""

    duplicates: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    @property
    def is_clean(self) -> bool:
        return not self.duplicates


def _check_decodable(path: Path) -> None:
    try:
        with Image.open(path) as img:
            mode = img.mode
            img.verify()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    if mode not in _EIGHT_BIT_MODES:
        raise DecodeError(f"{path}: mode {mode!r} is not an 8-bit/channel raster")


def scan_corpus(root: str | Path) -> LabeledCorpus:
    """Enumerate every image under `root`, one class per subdirectory.

    Entries come back in lexicographic (class, path) order with a SHA-256
    digest of the raw file bytes, so repeated scans of the same tree are
    byte-identical regardless of filesystem ordering.
    """
    root = Path(root)
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise EmptyClass(f"{root}: no class subdirectories found")
    entries: list[CorpusEntry] = []
    for class_dir in class_dirs:
        files = sorted(
            p
            for p in class_dir.rglob("*")
            if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
        )
        if not files:
            raise EmptyClass(class_dir.name)
        for path in files:
            _check_decodable(path)
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            entries.append(
                CorpusEntry(
                    relative_path=path.relative_to(root).as_posix(),
                    class_label=class_dir.name,
                    content_hash=digest,
                )
            )
    entries.sort(key=lambda e: (e.class_label, e.relative_path))
    return LabeledCorpus(root=root, entries=entries)


def _split_counts(n: int, ratios: tuple[float, float, float]) -> list[int]:
    """Largest-remainder apportionment of n samples across the three splits."""
    ideal = [r * n for r in ratios]
    counts = [int(np.floor(v)) for v in ideal]
    remainders = [v - c for v, c in zip(ideal, counts)]
    leftover = n - sum(counts)
    # ties resolve in split declaration order (train, then val, then test)
    order = sorted(range(3), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def stratified_split(
    corpus: LabeledCorpus,
    ratios: tuple[float, float, float],
    seed: int,
) -> SplitAssignment:
    """Assign every corpus entry to train/val/test, stratified per class.

    Within each class the counts match the ratios to within one sample;
    shuffling is driven solely by `seed`.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatios(f"ratios must be three positive fractions summing to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    assignment: dict[str, str] = {}
    for class_label, members in sorted(corpus.by_class().items()):
        if len(members) < 3:
            raise ClassTooSmall(f"class {class_label!r} has only {len(members)} entries")
        order = rng.permutation(len(members))
        counts = _split_counts(len(members), tuple(ratios))
        cursor = 0
        for split, count in zip(SPLIT_NAMES, counts):
            for idx in order[cursor : cursor + count]:
                assignment[members[idx].relative_path] = split
            cursor += count
    return SplitAssignment(seed=seed, ratios=tuple(ratios), assignment=assignment)


def leak_check(assignment: SplitAssignment, corpus: LabeledCorpus) -> LeakReport:
    """Report every content hash that lands in more than one split.

    Leaks are report content, not errors; an empty report means clean. Note
    this catches byte-identical duplicates only: an augmented derivative with
    distinct bytes is invisible to the check.
    """
    by_hash: dict[str, list[tuple[str, str]]] = {}
    for entry in corpus.entries:
        split = assignment.assignment[entry.relative_path]
        by_hash.setdefault(entry.content_hash, []).append((entry.relative_path, split))
    duplicates = {
        digest: paths
        for digest, paths in by_hash.items()
        if len({split for _, split in paths}) > 1
    }
    return LeakReport(duplicates=duplicates)


def leak_check_manifest(manifest: dict) -> LeakReport:
    """Leak check over a bundle manifest's recorded entries (path, hash,
    split), without touching the original image tree."""
    by_hash: dict[str, list[tuple[str, str]]] = {}
    for entry in manifest.get("entries", []):
        by_hash.setdefault(entry["hash"], []).append((entry["path"], entry["split"]))
    duplicates = {
        digest: paths
        for digest, paths in by_hash.items()
        if len({split for _, split in paths}) > 1
    }
    return LeakReport(duplicates=duplicates)


def _decode_image(path: Path, image_size: tuple[int, int]) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode not in _EIGHT_BIT_MODES:
                raise DecodeError(f"{path}: mode {img.mode!r} is not an 8-bit/channel raster")
            rgb = img.convert("RGB")
            h, w = image_size
            if (rgb.height, rgb.width) != (h, w):
                rgb = rgb.resize((w, h), Image.Resampling.BILINEAR)
            return np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        if isinstance(exc, DecodeError):
            raise
        raise DecodeError(f"{path}: {exc}") from exc


def materialize_bundle(
    assignment: SplitAssignment,
    corpus: LabeledCorpus,
    image_size: tuple[int, int],
    out_dir: str | Path,
) -> tensor_store.DatasetBundle:
    """Decode, resize, and serialize the split corpus into a bundle directory.

    Images become uint8 [n, h, w, 3] tensors (bilinear resize, skipped when
    the source already matches); labels are int64 indices into the sorted
    class-name list. Refuses to materialize a leaking split.
    """
    h, w = image_size
    if h <= 0 or w <= 0:
        raise ValueError(f"image size must be positive, got {image_size}")
    report = leak_check(assignment, corpus)
    if not report.is_clean:
        raise DataLeak(f"{len(report.duplicates)} content hash(es) span multiple splits")
    class_names = corpus.class_names
    class_index = {c: i for i, c in enumerate(class_names)}
    images: dict[str, list[np.ndarray]] = {s: [] for s in SPLIT_NAMES}
    labels: dict[str, list[int]] = {s: [] for s in SPLIT_NAMES}
    for entry in corpus.entries:
        split = assignment.assignment[entry.relative_path]
        images[split].append(_decode_image(corpus.root / entry.relative_path, (h, w)))
        labels[split].append(class_index[entry.class_label])
    tensors = {}
    for split in SPLIT_NAMES:
        if images[split]:
            tensors[f"x_{split}"] = np.stack(images[split])
        else:
            tensors[f"x_{split}"] = np.zeros((0, h, w, 3), dtype=np.uint8)
        tensors[f"y_{split}"] = np.asarray(labels[split], dtype=np.int64)
    manifest = {
        "version": MANIFEST_VERSION,
        "seed": assignment.seed,
        "ratios": list(assignment.ratios),
        "class_names": class_names,
        "image_size": [h, w],
        "entries": [
            {
                "path": e.relative_path,
                "class": e.class_label,
                "hash": e.content_hash,
                "split": assignment.assignment[e.relative_path],
            }
            for e in corpus.entries
        ],
    }
    manifest_path = tensor_store.write_bundle(out_dir, tensors, manifest)
    return tensor_store.load_bundle(manifest_path)
