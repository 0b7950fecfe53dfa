"""Bit-reproducible NPY persistence for datasets, labels, and feature maps.

Implements the NPY v1.0 binary layout directly so that written files are a
pure function of the array contents: fixed little-endian encoding, row-major
order, no timestamps. Third-party scientific tooling can read the files and
files produced by such tooling round-trip back in, as long as they stay
within the three supported dtypes (uint8 images, float32 feature maps,
int64 labels).
"""

from __future__ import annotations

import ast
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BundleInvalid, FormatError, UnsupportedDtype, UnsupportedLayout

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
# dtype tag <-> NPY descr string; little-endian fixed for portability
_DESCR_BY_DTYPE = {
    np.dtype(np.uint8): "|u1",
    np.dtype(np.float32): "<f4",
    np.dtype(np.int64): "<i8",
}
_DTYPE_BY_DESCR = {
    "|u1": np.dtype(np.uint8),
    "<u1": np.dtype(np.uint8),
    "<f4": np.dtype(np.float32),
    "<i8": np.dtype(np.int64),
}

BUNDLE_TENSORS = ("x_train", "y_train", "x_val", "y_val", "x_test", "y_test")
MANIFEST_NAME = "manifest.json"


def write_tensor(arr: np.ndarray, path: str | Path) -> None:
    """Write `arr` to `path` in NPY v1.0 layout.

    Only uint8, float32, and int64 arrays are accepted; anything else raises
    UnsupportedDtype rather than being converted silently. The parent
    directory must already exist.
    """
    arr = np.asarray(arr)
    if arr.dtype not in _DESCR_BY_DTYPE:
        raise UnsupportedDtype(f"dtype {arr.dtype} not supported (use uint8, float32, or int64)")
    descr = _DESCR_BY_DTYPE[arr.dtype]
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (
        descr,
        repr(tuple(int(n) for n in arr.shape)),
    )
    # pad with spaces + trailing newline so the payload starts on a 64-byte boundary
    unpadded = len(_MAGIC) + len(_VERSION) + 2 + len(header) + 1
    header = header + " " * (-unpadded % 64) + "\n"
    payload = np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<"), copy=False)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(_VERSION)
        fh.write(struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(payload.tobytes(order="C"))


def read_tensor(path: str | Path) -> np.ndarray:
    """Read an NPY v1.0 file written by `write_tensor` or compatible tooling.

    Header parsing is total: malformed prefixes raise FormatError instead of
    crashing. Column-major files raise UnsupportedLayout and dtypes outside
    the supported set raise UnsupportedDtype.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    prefix = len(_MAGIC) + len(_VERSION) + 2
    if len(blob) < prefix:
        raise FormatError(f"{path}: file too short for an NPY header")
    if blob[: len(_MAGIC)] != _MAGIC:
        raise FormatError(f"{path}: bad magic bytes")
    if blob[len(_MAGIC) : len(_MAGIC) + 2] != _VERSION:
        raise FormatError(f"{path}: unsupported NPY version")
    (header_len,) = struct.unpack("<H", blob[len(_MAGIC) + 2 : prefix])
    if len(blob) < prefix + header_len:
        raise FormatError(f"{path}: truncated header")
    descr, fortran, shape = _parse_header(blob[prefix : prefix + header_len], path)
    if fortran:
        raise UnsupportedLayout(f"{path}: column-major layout not supported")
    if descr not in _DTYPE_BY_DESCR:
        raise UnsupportedDtype(f"{path}: dtype descr {descr!r} not supported")
    dtype = _DTYPE_BY_DESCR[descr]
    payload = blob[prefix + header_len :]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, header declares {expected}"
        )
    out = np.frombuffer(payload, dtype=dtype.newbyteorder("<")).astype(dtype, copy=True)
    return out.reshape(shape)


def _parse_header(raw: bytes, path) -> tuple[str, bool, tuple[int, ...]]:
    try:
        spec = ast.literal_eval(raw.decode("latin1").strip())
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"{path}: unparseable header dict") from exc
    if not isinstance(spec, dict) or set(spec) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: header must declare exactly descr/fortran_order/shape")
    descr, fortran, shape = spec["descr"], spec["fortran_order"], spec["shape"]
    if not isinstance(descr, str) or not isinstance(fortran, bool):
        raise FormatError(f"{path}: malformed descr or fortran_order")
    if not isinstance(shape, tuple) or not all(
        isinstance(n, int) and n >= 0 for n in shape
    ):
        raise FormatError(f"{path}: shape must be a tuple of non-negative ints")
    return descr, fortran, shape


def manifest_digest(manifest_path: str | Path) -> str:
    """SHA-256 hex digest of the manifest file bytes; the provenance key
    embedded in every feature source and run record."""
    return hashlib.sha256(Path(manifest_path).read_bytes()).hexdigest()


@dataclass
class DatasetBundle:
    """Six tensors plus the class vocabulary, loaded from one manifest."""

    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    class_names: list[str]
    manifest_path: Path
    manifest: dict
    manifest_hash: str

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        if name not in ("train", "val", "test"):
            raise ValueError(f"unknown split {name!r}")
        return getattr(self, f"x_{name}"), getattr(self, f"y_{name}")


def write_bundle(out_dir: str | Path, tensors: dict[str, np.ndarray], manifest: dict) -> Path:
    """Write six bundle tensors and a canonical manifest.json into `out_dir`.

    The manifest is serialized with sorted keys so bundle bytes are a pure
    function of the inputs. Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    missing = [k for k in BUNDLE_TENSORS if k not in tensors]
    if missing:
        raise BundleInvalid(f"bundle tensors missing: {missing}")
    for key in BUNDLE_TENSORS:
        write_tensor(tensors[key], out_dir / f"{key}.npy")
    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest_path


def pack_bundle(
    tensor_paths: dict[str, str | Path],
    class_names: list[str],
    out_dir: str | Path,
) -> DatasetBundle:
    """Assemble a validated bundle from six externally produced NPY files.

    For arrays that did not come out of the image pipeline (synthetic
    features, converted datasets); the manifest records no split provenance.
    """
    missing = [k for k in BUNDLE_TENSORS if k not in tensor_paths]
    if missing:
        raise BundleInvalid(f"tensor paths missing: {missing}")
    tensors = {k: read_tensor(tensor_paths[k]) for k in BUNDLE_TENSORS}
    x = tensors["x_train"]
    manifest = {
        "version": 1,
        "seed": None,
        "ratios": None,
        "class_names": list(class_names),
        "image_size": list(x.shape[1:3]) if x.ndim >= 3 else None,
        "entries": [],
        "packed_from": {k: str(v) for k, v in tensor_paths.items()},
    }
    manifest_path = write_bundle(out_dir, tensors, manifest)
    return load_bundle(manifest_path)


def load_bundle(manifest_path: str | Path) -> DatasetBundle:
    """Load and validate the six tensors referenced by a bundle manifest."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    manifest = json.loads(manifest_path.read_text())
    class_names = manifest.get("class_names")
    if (
        not isinstance(class_names, list)
        or not class_names
        or any(not isinstance(c, str) or not c for c in class_names)
        or len(set(class_names)) != len(class_names)
    ):
        raise BundleInvalid(f"{manifest_path}: class_names must be unique non-empty strings")
    root = manifest_path.parent
    arrays = {key: read_tensor(root / f"{key}.npy") for key in BUNDLE_TENSORS}
    for split in ("train", "val", "test"):
        x, y = arrays[f"x_{split}"], arrays[f"y_{split}"]
        if y.ndim != 1 or not np.issubdtype(y.dtype, np.integer):
            raise BundleInvalid(f"y_{split} must be a 1-d integer vector")
        if x.shape[0] != y.shape[0]:
            raise BundleInvalid(
                f"x_{split} has {x.shape[0]} samples but y_{split} has {y.shape[0]}"
            )
        if y.size and (y.min() < 0 or y.max() >= len(class_names)):
            raise BundleInvalid(f"y_{split} labels outside [0, {len(class_names)})")
    return DatasetBundle(
        x_train=arrays["x_train"],
        y_train=arrays["y_train"],
        x_val=arrays["x_val"],
        y_val=arrays["y_val"],
        x_test=arrays["x_test"],
        y_test=arrays["y_test"],
        class_names=list(class_names),
        manifest_path=manifest_path,
        manifest=manifest,
        manifest_hash=manifest_digest(manifest_path),
    )
