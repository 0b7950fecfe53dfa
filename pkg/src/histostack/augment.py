"""Deterministic generator-style image augmentation.

One seeded stream per (config seed, stream index) pair samples a combined
affine transform (rotation, shear, zoom, shift about the image center),
optional flips, and a brightness multiplier. The same machinery serves both
roles: expanding a training set k-fold before any training, and producing the
frozen "static" augmented dataset every model consumes byte-identically.

The default parameters are deliberately mild. Aggressive settings, and in
particular fill_mode="nearest", can smear border pixels into tumor-like
artifacts on histopathology tissue; prefer "reflect" unless you have checked
the output visually.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import cos, radians, sin

import numpy as np
from scipy import ndimage

from . import tensor_store
from .errors import BundleInvalid

FILL_MODES = ("nearest", "reflect", "wrap", "constant")
# grid-constant blends the fill value at the border like any bilinear
# neighbor; plain "constant" would hard-cut pixels that land epsilon outside
_SCIPY_MODE = {
    "nearest": "nearest",
    "reflect": "reflect",
    "wrap": "grid-wrap",
    "constant": "grid-constant",
}


@dataclass
class AugmentConfig:
    rotation_range: float = 20.0  # degrees
    width_shift_range: float = 0.05  # fraction of width
    height_shift_range: float = 0.05  # fraction of height
    shear_range: float = 5.0  # degrees
    zoom_range: tuple[float, float] = (0.95, 1.05)
    horizontal_flip: bool = True
    vertical_flip: bool = True
    brightness_range: tuple[float, float] = (0.9, 1.1)
    fill_mode: str = "reflect"
    fill_value: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.rotation_range < 0 or self.shear_range < 0:
            raise ValueError("rotation_range and shear_range must be non-negative")
        if self.width_shift_range < 0 or self.height_shift_range < 0:
            raise ValueError("shift ranges must be non-negative")
        for name in ("zoom_range", "brightness_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ValueError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
        if self.fill_mode not in FILL_MODES:
            raise ValueError(f"fill_mode must be one of {FILL_MODES}")
        if not (0 <= int(self.fill_value) <= 255):
            raise ValueError("fill_value must be a uint8 value")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zoom_range"] = list(self.zoom_range)
        d["brightness_range"] = list(self.brightness_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentConfig":
        d = dict(d)
        for name in ("zoom_range", "brightness_range"):
            if name in d:
                d[name] = tuple(d[name])
        return cls(**d)


def identity_config(seed: int = 0) -> AugmentConfig:
    """Config whose every sampled transform is the identity."""
    return AugmentConfig(
        rotation_range=0.0,
        width_shift_range=0.0,
        height_shift_range=0.0,
        shear_range=0.0,
        zoom_range=(1.0, 1.0),
        horizontal_flip=False,
        vertical_flip=False,
        brightness_range=(1.0, 1.0),
        seed=seed,
    )


def pretrain_defaults(seed: int = 0) -> AugmentConfig:
    """Settings for the k-fold expansion applied before any training."""
    return AugmentConfig(seed=seed)


def static_train_defaults(seed: int = 0) -> AugmentConfig:
    """Settings for the frozen training-time pass; deliberately slightly
    different from the pre-training expansion."""
    return AugmentConfig(
        rotation_range=15.0,
        width_shift_range=0.03,
        height_shift_range=0.03,
        shear_range=3.0,
        zoom_range=(0.97, 1.03),
        brightness_range=(0.95, 1.05),
        seed=seed,
    )


@dataclass
class SampledTransform:
    rotation: float  # degrees
    tx: float  # pixels, along width
    ty: float  # pixels, along height
    shear: float  # degrees
    zoom_x: float
    zoom_y: float
    flip_h: bool
    flip_v: bool
    brightness: float

    def is_identity(self) -> bool:
        return (
            self.rotation == 0.0
            and self.tx == 0.0
            and self.ty == 0.0
            and self.shear == 0.0
            and self.zoom_x == 1.0
            and self.zoom_y == 1.0
            and not self.flip_h
            and not self.flip_v
            and self.brightness == 1.0
        )


def sample_transform(
    cfg: AugmentConfig, stream_index: int, size: tuple[int, int]
) -> SampledTransform:
    """Draw one transform from the seeded stream (cfg.seed, stream_index).

    Angles and shifts are uniform in [-range, +range], zoom and brightness
    uniform in their configured intervals, flips Bernoulli(0.5) when enabled.
    `size` is (height, width); shift fractions convert to pixels here. The
    draw order is fixed, so a given (seed, index) pair always yields the same
    transform regardless of which images were processed before it.
    """
    h, w = size
    rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, stream_index])
    rotation = rng.uniform(-cfg.rotation_range, cfg.rotation_range)
    tx = rng.uniform(-cfg.width_shift_range, cfg.width_shift_range) * w
    ty = rng.uniform(-cfg.height_shift_range, cfg.height_shift_range) * h
    shear = rng.uniform(-cfg.shear_range, cfg.shear_range)
    zoom_x = rng.uniform(cfg.zoom_range[0], cfg.zoom_range[1])
    zoom_y = rng.uniform(cfg.zoom_range[0], cfg.zoom_range[1])
    # flips always consume a draw so toggling them never shifts the stream
    flip_h = bool(rng.random() < 0.5) and cfg.horizontal_flip
    flip_v = bool(rng.random() < 0.5) and cfg.vertical_flip
    brightness = rng.uniform(cfg.brightness_range[0], cfg.brightness_range[1])
    return SampledTransform(
        rotation=float(rotation),
        tx=float(tx),
        ty=float(ty),
        shear=float(shear),
        zoom_x=float(zoom_x),
        zoom_y=float(zoom_y),
        flip_h=flip_h,
        flip_v=flip_v,
        brightness=float(brightness),
    )


def _affine_matrix(t: SampledTransform, size: tuple[int, int]) -> np.ndarray:
    """Forward 3x3 matrix in (row, col, 1) coordinates: shift first, then
    zoom, shear, rotation, conjugated by the center translation."""
    h, w = size
    theta = radians(t.rotation)
    s = radians(t.shear)
    rot = np.array(
        [[cos(theta), -sin(theta), 0], [sin(theta), cos(theta), 0], [0, 0, 1]]
    )
    shear = np.array([[1, -sin(s), 0], [0, cos(s), 0], [0, 0, 1]])
    zoom = np.diag([t.zoom_y, t.zoom_x, 1.0])
    shift = np.array([[1, 0, t.ty], [0, 1, t.tx], [0, 0, 1]])
    center = np.array([[1, 0, (h - 1) / 2.0], [0, 1, (w - 1) / 2.0], [0, 0, 1]])
    uncenter = np.array([[1, 0, -(h - 1) / 2.0], [0, 1, -(w - 1) / 2.0], [0, 0, 1]])
    return center @ rot @ shear @ zoom @ shift @ uncenter


def apply_transform(
    img: np.ndarray,
    t: SampledTransform,
    fill_mode: str = "reflect",
    fill_value: int = 0,
) -> np.ndarray:
    """Warp a uint8 HxWx3 image: one fused affine resample (bilinear), then
    flips, then brightness multiply clamped back into [0, 255]."""
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected uint8 HxWx3 image, got {img.dtype} {img.shape}")
    if fill_mode not in FILL_MODES:
        raise ValueError(f"fill_mode must be one of {FILL_MODES}")
    if t.is_identity():
        return img.copy()
    h, w = img.shape[:2]
    out = img.astype(np.float32)
    needs_warp = not (
        t.rotation == 0.0
        and t.tx == 0.0
        and t.ty == 0.0
        and t.shear == 0.0
        and t.zoom_x == 1.0
        and t.zoom_y == 1.0
    )
    if needs_warp:
        inverse = np.linalg.inv(_affine_matrix(t, (h, w)))
        # snap trig noise (e.g. sin(2*pi) ~ -2e-16) so full-turn rotations
        # do not push coordinates epsilon outside the grid
        near_int = np.rint(inverse)
        snap = np.abs(inverse - near_int) < 1e-12
        inverse[snap] = near_int[snap]
        warped = np.empty_like(out)
        for ch in range(3):
            warped[:, :, ch] = ndimage.affine_transform(
                out[:, :, ch],
                inverse[:2, :2],
                offset=inverse[:2, 2],
                order=1,
                mode=_SCIPY_MODE[fill_mode],
                cval=float(fill_value),
            )
        out = warped
    if t.flip_h:
        out = out[:, ::-1, :]
    if t.flip_v:
        out = out[::-1, :, :]
    if t.brightness != 1.0:
        out = out * t.brightness
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def expand_training_set(
    x_train: np.ndarray,
    y_train: np.ndarray,
    cfg: AugmentConfig,
    k: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Emit each original image followed by k augmented variants.

    Output order is (original 0, its k variants, original 1, ...), labels
    replicated alongside, so |output| = (k+1) * |input|. The result bytes are
    fully determined by (x_train, cfg, k).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if x_train.shape[0] != y_train.shape[0]:
        raise BundleInvalid(
            f"x_train has {x_train.shape[0]} samples but y_train has {y_train.shape[0]}"
        )
    if k == 0:
        return x_train.copy(), y_train.copy()
    n = x_train.shape[0]
    size = (x_train.shape[1], x_train.shape[2])
    out_x = np.empty((n * (k + 1),) + x_train.shape[1:], dtype=np.uint8)
    out_y = np.empty(n * (k + 1), dtype=y_train.dtype)
    pos = 0
    for i in range(n):
        out_x[pos] = x_train[i]
        out_y[pos] = y_train[i]
        pos += 1
        for j in range(k):
            t = sample_transform(cfg, i * k + j, size)
            out_x[pos] = apply_transform(x_train[i], t, cfg.fill_mode, cfg.fill_value)
            out_y[pos] = y_train[i]
            pos += 1
    return out_x, out_y


AUGMENT_MODES = ("pre_training_expansion", "static_training")


def expand_bundle(
    bundle: tensor_store.DatasetBundle,
    cfg: AugmentConfig,
    k: int,
    out_dir,
    mode: str = "pre_training_expansion",
) -> tensor_store.DatasetBundle:
    """Write a new bundle whose train split is expanded k-fold; val and test
    pass through untouched. The manifest records the augmentation provenance
    (config, k, mode, and the parent manifest hash), so downstream run
    records can tell a pre-training expansion from a frozen training pass."""
    if mode not in AUGMENT_MODES:
        raise ValueError(f"mode must be one of {AUGMENT_MODES}")
    x_aug, y_aug = expand_training_set(bundle.x_train, bundle.y_train, cfg, k)
    tensors = {
        "x_train": x_aug,
        "y_train": y_aug,
        "x_val": bundle.x_val,
        "y_val": bundle.y_val,
        "x_test": bundle.x_test,
        "y_test": bundle.y_test,
    }
    manifest = dict(bundle.manifest)
    manifest["augmentation"] = {
        "config": cfg.to_dict(),
        "k": k,
        "parent_manifest_hash": bundle.manifest_hash,
        "mode": mode,
    }
    manifest_path = tensor_store.write_bundle(out_dir, tensors, manifest)
    return tensor_store.load_bundle(manifest_path)
