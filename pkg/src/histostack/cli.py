"""Command-line client for the pipeline service.

Every subcommand builds a JSON request and sends it to the HTTP API: against
a remote server when --server is given, otherwise against an in-process
instance of the same app, so batch sweeps are scriptable with no daemon
running. All randomness flows from --seed; repeated invocations with the
same inputs and seed reproduce their outputs byte for byte (timestamps in
run records excepted).

Exit codes: 0 success, 1 domain errors, 2 usage errors.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import httpx

from .metrics import format_percent


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=httpx.Timeout(600.0))
    import warnings

    with warnings.catch_warnings():
        # starlette warns about its own httpx shim on import; not actionable here
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _call(ctx, path: str, payload: dict) -> dict:
    client = _client(ctx.obj.get("server"))
    resp = client.post(f"/api/v1/{path}", json=payload)
    if resp.status_code >= 400:
        try:
            detail = resp.json()
            message = f"{detail.get('error', resp.status_code)}: {detail.get('message', '')}"
        except ValueError:
            message = f"HTTP {resp.status_code}: {resp.text[:200]}"
        click.echo(f"error: {message}", err=True)
        sys.exit(1)
    return resp.json()


def _emit(ctx, data: dict, render=None) -> None:
    if ctx.obj.get("json") or render is None:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        render(data)


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise click.UsageError("ratios must be three comma-separated numbers")
    total = sum(parts)
    if abs(total - 100.0) < 1e-6:
        parts = [p / 100.0 for p in parts]
    return tuple(parts)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except ValueError as exc:
        raise click.UsageError("size must look like HxW, e.g. 64x64") from exc


def _parse_json_opt(value: str | None, what: str):
    if value is None:
        return None
    if value.startswith("@"):
        value = Path(value[1:]).read_text()
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"{what} must be valid JSON (or @file): {exc}") from exc


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; default runs in-process.")
@click.option("--json", "json_out", is_flag=True, help="Print raw JSON responses.")
@click.option("--log-level", default="warning", show_default=True)
@click.pass_context
def main(ctx, server, json_out, log_level):
    """Dataset prep, augmentation, ensemble evaluation, and leaderboards."""
    logging.basicConfig(level=getattr(logging, log_level.upper(), logging.WARNING))
    ctx.obj = {"server": server, "json": json_out}


@main.command()
@click.option("--root", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--ratios", default="60,20,20", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--size", default="64x64", show_default=True, help="target HxW")
@click.pass_context
def split(ctx, root, out, ratios, seed, size):
    """Scan a class-labeled image tree, split it, and write an NPY bundle."""
    data = _call(
        ctx,
        "split",
        {
            "root": root,
            "out": out,
            "ratios": _parse_ratios(ratios),
            "seed": seed,
            "size": _parse_size(size),
        },
    )

    def render(d):
        click.echo(f"bundle: {d['manifest_path']}")
        click.echo(f"classes: {', '.join(d['class_names'])}")
        click.echo(
            "counts: "
            + ", ".join(f"{s}={d['counts'][s]}" for s in ("train", "val", "test"))
        )
        click.echo(f"leak check: {'clean' if d['leak_clean'] else 'LEAKS FOUND'}")

    _emit(ctx, data, render)


@main.command("leak-check")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.pass_context
def leak_check(ctx, manifest):
    """Check a bundle manifest for content hashes spanning multiple splits."""
    data = _call(ctx, "leak-check", {"manifest": manifest})

    def render(d):
        if d["clean"]:
            click.echo("clean: no content hash appears in more than one split")
        else:
            click.echo(f"LEAKS: {len(d['duplicates'])} hash(es) span multiple splits")
            for digest, paths in d["duplicates"].items():
                click.echo(f"  {digest[:16]}…")
                for path, split_name in paths:
                    click.echo(f"    {split_name}: {path}")

    _emit(ctx, data, render)


@main.command()
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--k", default=10, show_default=True, help="augmented variants per original")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option(
    "--mode",
    default="pre_training_expansion",
    type=click.Choice(["pre_training_expansion", "static_training"]),
    show_default=True,
)
@click.pass_context
def augment(ctx, bundle, out, k, config_path, mode):
    """Expand a bundle's train split with k augmented variants per image."""
    data = _call(
        ctx,
        "augment",
        {"bundle": bundle, "out": out, "k": k, "config_path": config_path, "mode": mode},
    )
    _emit(ctx, data, lambda d: click.echo(f"augmented bundle: {d['manifest_path']} (train={d['train_count']})"))


@main.command()
@click.option("--x-train", required=True, type=click.Path(exists=True))
@click.option("--y-train", required=True, type=click.Path(exists=True))
@click.option("--x-val", required=True, type=click.Path(exists=True))
@click.option("--y-val", required=True, type=click.Path(exists=True))
@click.option("--x-test", required=True, type=click.Path(exists=True))
@click.option("--y-test", required=True, type=click.Path(exists=True))
@click.option("--classes", required=True, help="comma-separated class names")
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def pack(ctx, x_train, y_train, x_val, y_val, x_test, y_test, classes, out):
    """Assemble six NPY files into a validated bundle."""
    data = _call(
        ctx,
        "pack",
        {
            "x_train": x_train,
            "y_train": y_train,
            "x_val": x_val,
            "y_val": y_val,
            "x_test": x_test,
            "y_test": y_test,
            "class_names": classes.split(","),
            "out": out,
        },
    )
    _emit(ctx, data, lambda d: click.echo(f"bundle: {d['manifest_path']}"))


@main.command("synth-features")
@click.option("--out", required=True, type=click.Path())
@click.option("--samples", default=500, show_default=True)
@click.option("--width", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--margin", default=0.2, show_default=True)
@click.pass_context
def synth_features(ctx, out, samples, width, seed, margin):
    """Generate the jointly-separable synthetic bundle + 3 feature sources."""
    data = _call(
        ctx,
        "synth-features",
        {"out": out, "n_samples": samples, "width": width, "seed": seed, "margin": margin},
    )

    def render(d):
        click.echo(f"bundle: {d['bundle']}")
        for src in d["sources"]:
            click.echo(f"source: {src}")

    _emit(ctx, data, render)


@main.command()
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--sources", required=True, multiple=True, type=click.Path(exists=True))
@click.option("--head", required=True, type=click.Choice(["lr", "svc", "rf", "lgbm"]))
@click.option("--grid", "grid_json", default=None, help="JSON axes override (or @file)")
@click.option("--seed", default=0, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--standardize", is_flag=True)
@click.pass_context
def grid(ctx, bundle, sources, head, grid_json, seed, threads, standardize):
    """Grid-search a head on the validation split of stacked sources."""
    data = _call(
        ctx,
        "grid",
        {
            "bundle": bundle,
            "sources": list(sources),
            "head": head,
            "axes": _parse_json_opt(grid_json, "--grid"),
            "seed": seed,
            "threads": threads,
            "standardize": standardize,
        },
    )

    def render(d):
        click.echo(f"best: {json.dumps(d['best_params'])}")
        click.echo(f"validation accuracy: {format_percent(d['best_val_accuracy'])}")

    _emit(ctx, data, render)


@main.command()
@click.option("--dataset", required=True, help="dataset name recorded in the run ledger")
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--sources", required=True, multiple=True, type=click.Path(exists=True))
@click.option("--head", default=None, type=click.Choice(["lr", "svc", "rf", "lgbm"]))
@click.option("--shorthand", default=None, help="ensemble shorthand like 3c")
@click.option("--grid", "grid_json", default=None, help="JSON axes override (or @file)")
@click.option("--seed", default=0, show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--standardize", is_flag=True)
@click.option("--out", default=None, type=click.Path(), help="run-record root directory")
@click.option("--label", default=None, help="model identity for the leaderboard")
@click.pass_context
def evaluate(ctx, dataset, bundle, sources, head, shorthand, grid_json, seed, threads, standardize, out, label):
    """Grid search, refit the winner, score the test split, persist a record."""
    if not head and not shorthand:
        raise click.UsageError("one of --head or --shorthand is required")
    data = _call(
        ctx,
        "evaluate",
        {
            "dataset_name": dataset,
            "bundle": bundle,
            "sources": list(sources),
            "head": head,
            "shorthand": shorthand,
            "axes": _parse_json_opt(grid_json, "--grid"),
            "seed": seed,
            "standardize": standardize,
            "threads": threads,
            "out": out,
            "model_label": label,
        },
    )

    def render(d):
        record = d["record"]
        agg = record["metrics"]["aggregate"]
        click.echo(f"model: {record['model']}  dataset: {record['dataset_name']}")
        click.echo(f"selected: {json.dumps(record['selected_params'])}")
        click.echo(
            "test: "
            + "  ".join(f"{name}={format_percent(agg[name])}" for name in
                        ("accuracy", "recall", "precision", "f1", "specificity"))
        )
        if d.get("run_dir"):
            click.echo(f"record: {d['run_dir']}")

    _emit(ctx, data, render)


@main.command()
@click.option("--runs", required=True, multiple=True, type=click.Path(exists=True))
@click.option("--groups", "groups_json", default=None, help="JSON dataset->group map (or @file)")
@click.option("--out", default=None, type=click.Path(), help="write leaderboard.md or .csv")
@click.pass_context
def curate(ctx, runs, groups_json, out):
    """Rank every parsed run record by weighted-average accuracy."""
    data = _call(
        ctx,
        "curate",
        {"run_dirs": list(runs), "groups": _parse_json_opt(groups_json, "--groups") or {}},
    )
    if out:
        text = data["csv"] if out.endswith(".csv") else data["markdown"]
        Path(out).write_text(text)

    def render(d):
        click.echo(d["markdown"], nl=False)
        if d["leaderboard"]["skipped"]:
            click.echo(f"skipped {len(d['leaderboard']['skipped'])} unparseable file(s)", err=True)

    _emit(ctx, data, render)


@main.command("challenge-csv")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--features", required=True, multiple=True, type=click.Path(exists=True))
@click.option("--ids", "ids_path", default=None, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def challenge_csv(ctx, model_path, features, ids_path, out):
    """Predict labels for a blind test set and emit the submission CSV."""
    data = _call(
        ctx,
        "challenge-csv",
        {"model_path": model_path, "features": list(features), "ids_path": ids_path, "out": out},
    )
    _emit(ctx, data, lambda d: click.echo(f"wrote {d['rows']} predictions to {d['out']}"))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8410, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("histostack.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
