import json

import numpy as np
import pytest

from histostack import tensor_store as ts
from histostack.errors import (
    BundleInvalid,
    FormatError,
    UnsupportedDtype,
    UnsupportedLayout,
)


def test_float32_header_and_payload(tmp_path):
    arr = np.array([[1, 2], [3, 4]], dtype=np.float32)
    path = tmp_path / "a.npy"
    ts.write_tensor(arr, path)
    blob = path.read_bytes()
    assert blob[:6] == b"\x93NUMPY"
    header = blob[10 : 10 + int.from_bytes(blob[8:10], "little")].decode("latin1")
    assert "'descr': '<f4'" in header
    assert "'fortran_order': False" in header
    assert "'shape': (2, 2)" in header
    # 4 float32 values = 16 payload bytes
    assert len(blob) - (10 + int.from_bytes(blob[8:10], "little")) == 16


def test_empty_tensor_round_trip(tmp_path):
    arr = np.zeros((0,), dtype=np.float32)
    ts.write_tensor(arr, tmp_path / "e.npy")
    back = ts.read_tensor(tmp_path / "e.npy")
    assert back.shape == (0,) and back.dtype == np.float32


def test_large_uint8_round_trip_bit_exact(tmp_path, rng):
    arr = rng.integers(0, 256, size=(3, 700, 460, 3), dtype=np.uint8)
    path = tmp_path / "img.npy"
    ts.write_tensor(arr, path)
    back = ts.read_tensor(path)
    assert back.dtype == np.uint8 and back.shape == arr.shape
    assert np.array_equal(back, arr)
    assert back.tobytes() == arr.tobytes()


@pytest.mark.parametrize("dtype", [np.uint8, np.float32, np.int64])
def test_round_trip_all_dtypes(tmp_path, rng, dtype):
    if dtype is np.uint8:
        arr = rng.integers(0, 256, size=(4, 5), dtype=dtype)
    elif dtype is np.int64:
        arr = rng.integers(-(2**40), 2**40, size=(7,), dtype=dtype)
    else:
        arr = rng.standard_normal((3, 2, 2)).astype(dtype)
    path = tmp_path / "t.npy"
    ts.write_tensor(arr, path)
    back = ts.read_tensor(path)
    assert back.dtype == arr.dtype
    assert np.array_equal(back, arr)


def test_cross_check_against_numpy_writer(tmp_path):
    # externally generated NPY of int64 [7]
    np.save(tmp_path / "ref.npy", np.array([7], dtype=np.int64))
    back = ts.read_tensor(tmp_path / "ref.npy")
    assert back.dtype == np.int64 and back.shape == (1,) and back[0] == 7
    # and numpy can read ours, byte-identically written
    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    ts.write_tensor(arr, tmp_path / "ours.npy")
    np.save(tmp_path / "theirs.npy", arr)
    assert (tmp_path / "ours.npy").read_bytes() == (tmp_path / "theirs.npy").read_bytes()
    assert np.array_equal(np.load(tmp_path / "ours.npy"), arr)


def test_two_writes_identical(tmp_path, rng):
    arr = rng.standard_normal((5, 5)).astype(np.float32)
    ts.write_tensor(arr, tmp_path / "a.npy")
    ts.write_tensor(arr, tmp_path / "b.npy")
    assert (tmp_path / "a.npy").read_bytes() == (tmp_path / "b.npy").read_bytes()


def test_unsupported_dtype_rejected(tmp_path):
    with pytest.raises(UnsupportedDtype):
        ts.write_tensor(np.zeros(3, dtype=np.float64), tmp_path / "x.npy")
    np.save(tmp_path / "f8.npy", np.zeros(3, dtype=np.float64))
    with pytest.raises(UnsupportedDtype):
        ts.read_tensor(tmp_path / "f8.npy")


def test_truncated_payload_is_format_error(tmp_path):
    path = tmp_path / "t.npy"
    ts.write_tensor(np.arange(10, dtype=np.int64), path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])
    with pytest.raises(FormatError):
        ts.read_tensor(path)


def test_trailing_garbage_is_format_error(tmp_path):
    path = tmp_path / "t.npy"
    ts.write_tensor(np.arange(4, dtype=np.int64), path)
    path.write_bytes(path.read_bytes() + b"\x00" * 3)
    with pytest.raises(FormatError):
        ts.read_tensor(path)


def test_column_major_rejected(tmp_path):
    arr = np.asfortranarray(np.arange(6, dtype=np.float32).reshape(2, 3))
    np.save(tmp_path / "f.npy", arr)
    assert b"'fortran_order': True" in (tmp_path / "f.npy").read_bytes()
    with pytest.raises(UnsupportedLayout):
        ts.read_tensor(tmp_path / "f.npy")


def test_bad_magic_and_version(tmp_path):
    path = tmp_path / "bad.npy"
    path.write_bytes(b"NOTNPY" + b"\x00" * 32)
    with pytest.raises(FormatError):
        ts.read_tensor(path)
    good = tmp_path / "good.npy"
    ts.write_tensor(np.zeros(1, dtype=np.uint8), good)
    blob = bytearray(good.read_bytes())
    blob[6] = 9  # absurd major version
    path.write_bytes(bytes(blob))
    with pytest.raises(FormatError):
        ts.read_tensor(path)


def test_header_parsing_is_total(tmp_path, rng):
    # arbitrary byte prefixes never crash with anything but domain errors
    for i in range(200):
        blob = rng.integers(0, 256, size=int(rng.integers(0, 200)), dtype=np.uint8).tobytes()
        if i % 3 == 0:
            blob = b"\x93NUMPY" + blob  # valid magic, garbage after
        path = tmp_path / "fuzz.npy"
        path.write_bytes(blob)
        with pytest.raises((FormatError, UnsupportedDtype, UnsupportedLayout)):
            ts.read_tensor(path)


def _write_split_bundle(tmp_path, n=100, k=4, h=4, w=4):
    n_train, n_val, n_test = int(n * 0.6), int(n * 0.2), int(n * 0.2)
    rng = np.random.default_rng(3)
    tensors = {}
    for split, count in (("train", n_train), ("val", n_val), ("test", n_test)):
        tensors[f"x_{split}"] = rng.integers(0, 256, size=(count, h, w, 3), dtype=np.uint8)
        tensors[f"y_{split}"] = rng.integers(0, k, size=count, dtype=np.int64)
    manifest = {
        "version": 1,
        "seed": 3,
        "ratios": [0.6, 0.2, 0.2],
        "class_names": [f"class{i}" for i in range(k)],
        "image_size": [h, w],
        "entries": [],
    }
    return ts.write_bundle(tmp_path / "bundle", tensors, manifest)


def test_load_bundle_split_extents(tmp_path):
    manifest_path = _write_split_bundle(tmp_path, n=100, k=4)
    bundle = ts.load_bundle(manifest_path)
    assert bundle.x_train.shape[0] == 60
    assert bundle.x_val.shape[0] == 20
    assert bundle.x_test.shape[0] == 20
    assert bundle.class_names == ["class0", "class1", "class2", "class3"]
    assert bundle.manifest_hash == ts.manifest_digest(manifest_path)


def test_load_bundle_label_out_of_range(tmp_path):
    manifest_path = _write_split_bundle(tmp_path, n=20, k=4)
    bad = np.full(4, 4, dtype=np.int64)  # value == n_classes
    ts.write_tensor(bad, manifest_path.parent / "y_test.npy")
    with pytest.raises(BundleInvalid):
        ts.load_bundle(manifest_path)


def test_load_bundle_empty_class_name(tmp_path):
    manifest_path = _write_split_bundle(tmp_path, n=20, k=4)
    manifest = json.loads(manifest_path.read_text())
    manifest["class_names"] = ["a", "", "c", "d"]
    manifest_path.write_text(json.dumps(manifest))
    with pytest.raises(BundleInvalid):
        ts.load_bundle(manifest_path)


def test_load_bundle_length_mismatch(tmp_path):
    manifest_path = _write_split_bundle(tmp_path, n=20, k=4)
    ts.write_tensor(np.zeros(99, dtype=np.int64), manifest_path.parent / "y_train.npy")
    with pytest.raises(BundleInvalid):
        ts.load_bundle(manifest_path)
