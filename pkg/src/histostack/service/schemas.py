"""Pydantic request/response models for the pipeline endpoints."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class SplitRequest(BaseModel):
    root: str
    out: str
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    seed: int = 0
    size: tuple[int, int] = Field(default=(64, 64), description="target (height, width)")


class SplitResponse(BaseModel):
    manifest_path: str
    manifest_hash: str
    class_names: list[str]
    counts: dict[str, int]
    leak_clean: bool


class LeakCheckRequest(BaseModel):
    manifest: str


class LeakCheckResponse(BaseModel):
    clean: bool
    duplicates: dict[str, list[tuple[str, str]]]


class AugmentConfigModel(BaseModel):
    rotation_range: float = 20.0
    width_shift_range: float = 0.05
    height_shift_range: float = 0.05
    shear_range: float = 5.0
    zoom_range: tuple[float, float] = (0.95, 1.05)
    horizontal_flip: bool = True
    vertical_flip: bool = True
    brightness_range: tuple[float, float] = (0.9, 1.1)
    fill_mode: str = "reflect"
    fill_value: int = 0
    seed: int = 0


class AugmentRequest(BaseModel):
    bundle: str
    out: str
    k: int = 10
    config: AugmentConfigModel | None = None
    config_path: str | None = None
    mode: str = "pre_training_expansion"


class AugmentResponse(BaseModel):
    manifest_path: str
    manifest_hash: str
    train_count: int


class PackRequest(BaseModel):
    x_train: str
    y_train: str
    x_val: str
    y_val: str
    x_test: str
    y_test: str
    class_names: list[str]
    out: str


class PackResponse(BaseModel):
    manifest_path: str
    manifest_hash: str
    counts: dict[str, int]


class SynthFeaturesRequest(BaseModel):
    out: str
    n_samples: int = 500
    width: int = 4
    seed: int = 0
    margin: float = 0.2
    source_names: tuple[str, ...] = ("synth-a", "synth-b", "synth-c")


class SynthFeaturesResponse(BaseModel):
    bundle: str
    sources: list[str]
    manifest_hash: str
    counts: dict[str, int]


class GridRequest(BaseModel):
    bundle: str
    sources: list[str]
    head: str
    axes: dict[str, list] | None = None
    seed: int = 0
    threads: int = 1
    standardize: bool = False


class GridResponse(BaseModel):
    best_params: dict
    best_val_accuracy: float
    candidates: list[dict]


class EvaluateRequest(BaseModel):
    dataset_name: str
    bundle: str
    sources: list[str]
    head: str | None = None
    shorthand: str | None = None
    axes: dict[str, list] | None = None
    seed: int = 0
    standardize: bool = False
    threads: int = 1
    out: str | None = None
    model_label: str | None = None


class EvaluateResponse(BaseModel):
    record: dict
    run_dir: str | None


class CurateRequest(BaseModel):
    run_dirs: list[str]
    groups: dict[str, str] = Field(
        default_factory=dict, description="dataset name -> weighting group"
    )


class CurateResponse(BaseModel):
    leaderboard: dict
    markdown: str
    csv: str


class ChallengeCsvRequest(BaseModel):
    model_path: str
    features: list[str] = Field(description="NPY feature matrices, concatenated in order")
    ids: list[str] | None = None
    ids_path: str | None = None
    out: str


class ChallengeCsvResponse(BaseModel):
    out: str
    rows: int


class ErrorBody(BaseModel):
    error: str
    message: str
