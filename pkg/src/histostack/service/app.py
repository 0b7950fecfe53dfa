"""FastAPI application exposing the full pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, augment, dataset_prep, harness, synth, tensor_store
from ..errors import HistostackError
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(title="histostack", version=__version__)

    @app.exception_handler(HistostackError)
    async def domain_error(request: Request, exc: HistostackError):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=404,
            content={"error": "FileNotFoundError", "message": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def bad_value(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/api/v1/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/api/v1/split", response_model=schemas.SplitResponse)
    def split(req: schemas.SplitRequest):
        corpus = dataset_prep.scan_corpus(req.root)
        assignment = dataset_prep.stratified_split(corpus, req.ratios, req.seed)
        report = dataset_prep.leak_check(assignment, corpus)
        bundle = dataset_prep.materialize_bundle(assignment, corpus, req.size, req.out)
        return schemas.SplitResponse(
            manifest_path=str(bundle.manifest_path),
            manifest_hash=bundle.manifest_hash,
            class_names=bundle.class_names,
            counts={s: int(bundle.split(s)[1].shape[0]) for s in ("train", "val", "test")},
            leak_clean=report.is_clean,
        )

    @app.post("/api/v1/leak-check", response_model=schemas.LeakCheckResponse)
    def leak_check(req: schemas.LeakCheckRequest):
        manifest_path = Path(req.manifest)
        if manifest_path.is_dir():
            manifest_path = manifest_path / tensor_store.MANIFEST_NAME
        manifest = json.loads(manifest_path.read_text())
        report = dataset_prep.leak_check_manifest(manifest)
        return schemas.LeakCheckResponse(clean=report.is_clean, duplicates=report.duplicates)

    @app.post("/api/v1/augment", response_model=schemas.AugmentResponse)
    def augment_bundle(req: schemas.AugmentRequest):
        bundle = tensor_store.load_bundle(Path(req.bundle))
        if req.config is not None:
            cfg = augment.AugmentConfig.from_dict(req.config.model_dump())
        elif req.config_path is not None:
            cfg = augment.AugmentConfig.from_dict(json.loads(Path(req.config_path).read_text()))
        else:
            cfg = augment.pretrain_defaults()
        out = augment.expand_bundle(bundle, cfg, req.k, req.out, mode=req.mode)
        return schemas.AugmentResponse(
            manifest_path=str(out.manifest_path),
            manifest_hash=out.manifest_hash,
            train_count=int(out.y_train.shape[0]),
        )

    @app.post("/api/v1/pack", response_model=schemas.PackResponse)
    def pack(req: schemas.PackRequest):
        paths = {
            key: getattr(req, key)
            for key in ("x_train", "y_train", "x_val", "y_val", "x_test", "y_test")
        }
        bundle = tensor_store.pack_bundle(paths, req.class_names, req.out)
        return schemas.PackResponse(
            manifest_path=str(bundle.manifest_path),
            manifest_hash=bundle.manifest_hash,
            counts={s: int(bundle.split(s)[1].shape[0]) for s in ("train", "val", "test")},
        )

    @app.post("/api/v1/synth-features", response_model=schemas.SynthFeaturesResponse)
    def synth_features(req: schemas.SynthFeaturesRequest):
        info = synth.generate_feature_sources(
            req.out,
            n_samples=req.n_samples,
            width=req.width,
            seed=req.seed,
            margin=req.margin,
            source_names=req.source_names,
        )
        return schemas.SynthFeaturesResponse(**info)

    @app.post("/api/v1/grid", response_model=schemas.GridResponse)
    def grid(req: schemas.GridRequest):
        from .. import stacking

        bundle = tensor_store.load_bundle(Path(req.bundle))
        sources = [stacking.load_feature_source(d) for d in req.sources]
        X_train = stacking.concat_features(sources, "train").astype(np.float64)
        X_val = stacking.concat_features(sources, "val").astype(np.float64)
        if req.standardize:
            mean = X_train.mean(axis=0)
            std = X_train.std(axis=0)
            std[std == 0] = 1.0
            X_train = (X_train - mean) / std
            X_val = (X_val - mean) / std
        axes = req.axes or harness.DEFAULT_GRIDS[req.head]
        result = harness.grid_search(
            harness.ParamGrid(head=req.head, axes={k: list(v) for k, v in axes.items()}),
            X_train,
            bundle.y_train,
            X_val,
            bundle.y_val,
            seed=req.seed,
            threads=req.threads,
        )
        return schemas.GridResponse(
            best_params=result.best_params,
            best_val_accuracy=result.best_accuracy,
            candidates=result.candidates,
        )

    @app.post("/api/v1/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest):
        config = harness.EvaluateConfig(
            dataset_name=req.dataset_name,
            bundle_dir=req.bundle,
            source_dirs=req.sources,
            head=req.head,
            shorthand=req.shorthand,
            grid_axes=req.axes,
            seed=req.seed,
            standardize=req.standardize,
            threads=req.threads,
            out_dir=req.out,
            model_label=req.model_label,
        )
        record, run_dir = harness.evaluate_run(config)
        return schemas.EvaluateResponse(record=record, run_dir=None if run_dir is None else str(run_dir))

    @app.post("/api/v1/curate", response_model=schemas.CurateResponse)
    def curate(req: schemas.CurateRequest):
        board = harness.curate(req.run_dirs, groups=req.groups)
        return schemas.CurateResponse(
            leaderboard=board.to_dict(),
            markdown=board.to_markdown(),
            csv=board.to_csv(),
        )

    @app.post("/api/v1/challenge-csv", response_model=schemas.ChallengeCsvResponse)
    def challenge_csv(req: schemas.ChallengeCsvRequest):
        model = harness.stacking_model_from_dict(json.loads(Path(req.model_path).read_text()))
        mats = [tensor_store.read_tensor(p).astype(np.float64) for p in req.features]
        features = np.concatenate(mats, axis=1) if len(mats) > 1 else mats[0]
        if req.ids is not None:
            ids = list(req.ids)
        elif req.ids_path is not None:
            ids = [line for line in Path(req.ids_path).read_text().splitlines() if line]
        else:
            ids = [str(i) for i in range(features.shape[0])]
        out = harness.emit_challenge_csv(model, features, ids, req.out)
        return schemas.ChallengeCsvResponse(out=str(out), rows=features.shape[0])

    return app


app = create_app()
