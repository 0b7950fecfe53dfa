import math

import numpy as np
import pytest

from histostack import augment as aug


def test_zero_ranges_sample_identity():
    cfg = aug.identity_config(seed=5)
    t = aug.sample_transform(cfg, 0, (8, 8))
    assert t.is_identity()


def test_same_seed_index_same_transform():
    cfg = aug.AugmentConfig(seed=13)
    a = aug.sample_transform(cfg, 42, (16, 16))
    b = aug.sample_transform(cfg, 42, (16, 16))
    assert a == b
    c = aug.sample_transform(cfg, 43, (16, 16))
    assert a != c


def test_rotation_sampling_statistics():
    cfg = aug.AugmentConfig(rotation_range=40.0, seed=99)
    rotations = np.array(
        [aug.sample_transform(cfg, i, (8, 8)).rotation for i in range(10_000)]
    )
    assert rotations.min() >= -40.0 and rotations.max() <= 40.0
    # uniform(-40, 40): sigma of the mean = (80 / sqrt(12)) / 100
    three_sigma = 3 * (80 / math.sqrt(12)) / math.sqrt(10_000)
    assert abs(rotations.mean()) < three_sigma


def test_apply_identity_is_exact(rng):
    img = rng.integers(0, 256, size=(12, 10, 3), dtype=np.uint8)
    t = aug.sample_transform(aug.identity_config(), 0, (12, 10))
    out = aug.apply_transform(img, t)
    assert np.array_equal(out, img)


def _plain(**kw):
    base = dict(
        rotation=0.0, tx=0.0, ty=0.0, shear=0.0, zoom_x=1.0, zoom_y=1.0,
        flip_h=False, flip_v=False, brightness=1.0,
    )
    base.update(kw)
    return aug.SampledTransform(**base)


def test_flip_h_definition():
    img = np.array([[[1], [2]], [[3], [4]]], dtype=np.uint8).repeat(3, axis=2)
    out = aug.apply_transform(img, _plain(flip_h=True))
    assert out[0, 0, 0] == 2 and out[0, 1, 0] == 1
    assert out[1, 0, 0] == 4 and out[1, 1, 0] == 3


def test_flip_involution(rng):
    img = rng.integers(0, 256, size=(9, 11, 3), dtype=np.uint8)
    t = _plain(flip_h=True)
    assert np.array_equal(aug.apply_transform(aug.apply_transform(img, t), t), img)
    t = _plain(flip_v=True)
    assert np.array_equal(aug.apply_transform(aug.apply_transform(img, t), t), img)


def test_full_width_shift_constant_fill(rng):
    img = rng.integers(1, 256, size=(8, 8, 3), dtype=np.uint8)
    t = _plain(tx=8.0)
    out = aug.apply_transform(img, t, fill_mode="constant", fill_value=0)
    assert np.all(out == 0)


def test_rotation_360_is_near_identity(rng):
    img = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    out = aug.apply_transform(img, _plain(rotation=360.0), fill_mode="constant")
    assert np.max(np.abs(out.astype(int) - img.astype(int))) <= 1


def _oracle_rotate(img, degrees, fill_value=0.0):
    """Independent bilinear rotation about the image center, constant fill."""
    h, w = img.shape[:2]
    theta = math.radians(degrees)
    cr, cc = (h - 1) / 2.0, (w - 1) / 2.0
    out = np.zeros_like(img, dtype=np.float64)
    for r in range(h):
        for c in range(w):
            # inverse map: rotate the output coordinate by -theta
            dr, dc = r - cr, c - cc
            sr = math.cos(theta) * dr + math.sin(theta) * dc + cr
            sc = -math.sin(theta) * dr + math.cos(theta) * dc + cc
            r0, c0 = math.floor(sr), math.floor(sc)
            fr, fc = sr - r0, sc - c0
            acc = np.zeros(img.shape[2])
            for (ri, wr) in ((r0, 1 - fr), (r0 + 1, fr)):
                for (ci, wc) in ((c0, 1 - fc), (c0 + 1, fc)):
                    if 0 <= ri < h and 0 <= ci < w:
                        val = img[ri, ci].astype(np.float64)
                    else:
                        val = np.full(img.shape[2], fill_value)
                    acc += wr * wc * val
            out[r, c] = acc
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def test_rotation_matches_independent_warp_oracle(rng):
    img = rng.integers(0, 256, size=(9, 9, 3), dtype=np.uint8)
    for degrees in (17.0, -42.5, 90.0):
        ours = aug.apply_transform(img, _plain(rotation=degrees), fill_mode="constant", fill_value=0)
        ref = _oracle_rotate(img, degrees)
        assert np.max(np.abs(ours.astype(int) - ref.astype(int))) <= 1


def test_expand_counts_and_labels(rng):
    x = rng.integers(0, 256, size=(60, 6, 6, 3), dtype=np.uint8)
    y = rng.integers(0, 4, size=60).astype(np.int64)
    cfg = aug.AugmentConfig(seed=2)
    xa, ya = aug.expand_training_set(x, y, cfg, 10)
    assert xa.shape[0] == 660 and ya.shape[0] == 660
    # label multiset is (k+1) times the input's
    assert np.array_equal(np.bincount(ya, minlength=4), 11 * np.bincount(y, minlength=4))
    # originals precede their variants
    assert np.array_equal(xa[0], x[0]) and np.array_equal(xa[11], x[1])


def test_expand_k_zero_is_identity(rng):
    x = rng.integers(0, 256, size=(5, 4, 4, 3), dtype=np.uint8)
    y = np.arange(5, dtype=np.int64) % 2
    xa, ya = aug.expand_training_set(x, y, aug.AugmentConfig(seed=0), 0)
    assert np.array_equal(xa, x) and np.array_equal(ya, y)


def test_expand_identity_config_replicates_exactly(rng):
    x = rng.integers(0, 256, size=(4, 5, 5, 3), dtype=np.uint8)
    y = np.array([0, 1, 0, 1], dtype=np.int64)
    xa, ya = aug.expand_training_set(x, y, aug.identity_config(), 2)
    assert xa.shape[0] == 12
    for i in range(4):
        for j in range(3):
            assert np.array_equal(xa[3 * i + j], x[i])


def test_expand_deterministic(rng):
    x = rng.integers(0, 256, size=(3, 8, 8, 3), dtype=np.uint8)
    y = np.array([0, 1, 1], dtype=np.int64)
    cfg = aug.AugmentConfig(seed=31)
    a = aug.expand_training_set(x, y, cfg, 4)
    b = aug.expand_training_set(x, y, cfg, 4)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_outputs_stay_uint8_range(rng):
    x = rng.integers(0, 256, size=(2, 10, 10, 3), dtype=np.uint8)
    cfg = aug.AugmentConfig(brightness_range=(1.5, 2.0), seed=8)
    xa, _ = aug.expand_training_set(x, np.zeros(2, dtype=np.int64), cfg, 5)
    assert xa.dtype == np.uint8  # clamp semantics guaranteed by dtype


def test_config_validation_and_round_trip():
    cfg = aug.static_train_defaults(seed=4)
    again = aug.AugmentConfig.from_dict(cfg.to_dict())
    assert again == cfg
    with pytest.raises(ValueError):
        aug.AugmentConfig(rotation_range=-1.0)
    with pytest.raises(ValueError):
        aug.AugmentConfig(zoom_range=(0.0, 1.0))
    with pytest.raises(ValueError):
        aug.AugmentConfig(fill_mode="smear")


def test_pretrain_and_static_configs_differ():
    assert aug.pretrain_defaults(seed=1) != aug.static_train_defaults(seed=1)
