"""Command-line entry point: generate, plan, serve, analyze.

Exit codes: 0 success, 1 input error (missing files, bad config),
2 contract violation (stale manifest, inconsistent plan).
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from .artifacts import load_manifest, render_condition_set, write_manifest
from .audio.wavio import read_wav
from .config import RunConfig
from .errors import ContractError, InputError
from .planning import TrialPlan, build_plan, manifest_digest
from .service import create_app, export_scores, scores_to_csv
from .stats import (
    ColumnMapping,
    POINT_COLUMNS,
    SIGNIFICANCE_COLUMNS,
    compare_lr_ms,
    export_figure_data,
    ingest_scores,
    summarize,
    write_table_csv,
)


def _load_config(config_path, seed, out) -> RunConfig:
    config = RunConfig.from_file(config_path) if config_path else RunConfig()
    if seed is not None:
        config.seed = seed
    if out is not None:
        config.out_dir = out
    config.validate()
    return config


def _exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InputError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except ContractError as exc:
            click.echo(f"contract violation: {exc}", err=True)
            sys.exit(2)

    return wrapper


_shared = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="JSON run configuration."),
    click.option("--seed", type=int, default=None, help="Override the generation seed."),
    click.option("--out", type=click.Path(), default=None, help="Override the output directory."),
]


def shared_options(fn):
    for option in reversed(_shared):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Stereo coding-artifact listening test toolkit."""


@main.command()
@shared_options
@_exit_codes
def generate(config_path, seed, out):
    """Render all test conditions and anchors, write the manifest."""
    config = _load_config(config_path, seed, out)
    items_dir = Path(config.items_dir)

    wanted = {}
    for kind, names in config.items_by_artifact.items():
        for name in names:
            wanted.setdefault(name, set()).add(kind)
    for name in config.training_items:
        wanted.setdefault(name, set()).update(config.items_by_artifact.keys())

    missing = [name for name in sorted(wanted) if not (items_dir / f"{name}.wav").exists()]
    if missing:
        raise InputError(
            f"missing input items in {items_dir}: "
            + ", ".join(f"{name}.wav" for name in missing)
        )

    settings = config.engine_settings()
    rows = []
    for name in sorted(wanted):
        buffer = read_wav(items_dir / f"{name}.wav")
        if buffer.num_channels != 2:
            raise InputError(f"{name}.wav: stimuli must be stereo")
        rows.extend(
            render_condition_set(
                buffer, name,
                kinds=sorted(wanted[name]),
                modes=("LR", "MS"),
                qualities=("Q1", "Q2", "Q3", "Q4", "Q5"),
                seed=config.seed,
                out_dir=config.stimuli_dir,
                settings=settings,
                lowpass_cutoffs=tuple(config.lowpass_cutoffs),
                bit_depth=config.bit_depth,
            )
        )
        click.echo(f"rendered {name}: {sorted(wanted[name])}")
    config.manifest_path.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(rows, config.manifest_path)
    click.echo(f"wrote {len(rows)} manifest rows to {config.manifest_path}")


@main.command()
@shared_options
@_exit_codes
def plan(config_path, seed, out):
    """Build the trial plan from the manifest."""
    config = _load_config(config_path, seed, out)
    if not config.manifest_path.exists():
        raise InputError(f"manifest not found: {config.manifest_path}; run generate first")
    rows = load_manifest(config.manifest_path)
    trial_plan = build_plan(
        rows,
        items_by_artifact=config.items_by_artifact,
        series_names=tuple(config.series),
        seed=config.seed,
        training_items=tuple(config.training_items),
        series_items=config.series_items,
        manifest_file_digest=manifest_digest(config.manifest_path),
    )
    trial_plan.save(config.plan_path)
    click.echo(
        f"planned {len(trial_plan.trials)} test trials "
        f"(+{len(trial_plan.training_trials)} training) -> {config.plan_path}"
    )
    for note in trial_plan.notes:
        click.echo(f"note: {note}")


def _verify_stimuli(trial_plan: TrialPlan, config: RunConfig):
    if not config.manifest_path.exists():
        raise ContractError(f"manifest missing: {config.manifest_path}")
    digest = manifest_digest(config.manifest_path)
    if digest != trial_plan.manifest_digest:
        raise ContractError(
            "manifest changed since the plan was built; regenerate the plan "
            f"(plan digest {trial_plan.manifest_digest[:12]}, manifest {digest[:12]})"
        )
    for trial in trial_plan.all_trials():
        for stim in trial.stimuli:
            if not (config.stimuli_dir / stim.file).exists():
                raise ContractError(f"stimulus file missing: {stim.file}")


@main.command()
@shared_options
@click.option("--host", default=None, help="Bind address (default from config).")
@click.option("--port", type=int, default=None, help="Port (default from config).")
@_exit_codes
def serve(config_path, seed, out, host, port):
    """Serve the listening test over HTTP."""
    import uvicorn

    config = _load_config(config_path, seed, out)
    if not config.plan_path.exists():
        raise InputError(f"plan not found: {config.plan_path}; run plan first")
    trial_plan = TrialPlan.load(config.plan_path)
    _verify_stimuli(trial_plan, config)
    ui_dir = None
    if config.ui_dir:
        if not Path(config.ui_dir).exists():
            raise InputError(f"ui_dir not found: {config.ui_dir}")
        ui_dir = config.ui_dir
        click.echo(f"serving listener UI from {ui_dir}")
    app = create_app(trial_plan, config.stimuli_dir, config.db_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host or config.host, port=port or config.port, log_level="info")


@main.command()
@shared_options
@click.option("--scores", "scores_path", type=click.Path(), default=None,
              help="Score CSV (default: config scores_csv, else the session DB export).")
@_exit_codes
def analyze(config_path, seed, out, scores_path):
    """Summaries, LR/MS significance and figure tables from a score file."""
    config = _load_config(config_path, seed, out)
    source = scores_path or config.scores_csv
    if not source:
        db = config.db_path
        if db.exists() and config.plan_path.exists():
            from .service import SessionStore

            store = SessionStore(db)
            rows = export_scores(store, TrialPlan.load(config.plan_path))
            store.close()
            source_rows = rows
            click.echo(f"using {len(rows)} rows exported from {db}")
        else:
            raise InputError("no scores: pass --scores, set scores_csv, or collect ratings first")
    else:
        if not Path(source).exists():
            raise InputError(f"score file not found: {source}")
        source_rows = source

    mapping = ColumnMapping(**config.column_mapping) if config.column_mapping else None
    dataset = ingest_scores(source_rows, mapping)
    click.echo(f"ingested {len(dataset)} ratings from {len(dataset.listeners)} listeners")

    by_item = summarize(dataset, "by_item", config.bootstrap_b, config.stats_seed)
    pooled = summarize(dataset, "pooled", config.bootstrap_b, config.stats_seed)
    comparisons = compare_lr_ms(dataset, thresholds=tuple(config.star_thresholds))

    out_dir = config.analysis_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_columns = ("scope", "item", "series", "condition", "n", "mean", "ci_low", "ci_high")
    write_table_csv([vars(s) for s in by_item], summary_columns, out_dir / "summary_by_item.csv")
    write_table_csv([vars(s) for s in pooled], summary_columns, out_dir / "summary_pooled.csv")
    comparison_columns = (
        "item", "context", "kind", "parameter", "lr_condition", "ms_condition",
        "lr_series", "ms_series", "n", "mean_diff", "p_value", "stars", "test",
    )
    write_table_csv([vars(c) for c in comparisons], comparison_columns,
                    out_dir / "comparisons.csv")

    for layout in ("overall", "mixed", "itemwise"):
        tables = export_figure_data(by_item + pooled, comparisons, layout)
        write_table_csv(tables["points"], POINT_COLUMNS, out_dir / f"figure_{layout}_points.csv")
        write_table_csv(tables["significance"], SIGNIFICANCE_COLUMNS,
                        out_dir / f"figure_{layout}_significance.csv")
    click.echo(f"analysis written to {out_dir}")


@main.command(name="export")
@shared_options
@_exit_codes
def export_cmd(config_path, seed, out):
    """Dump the collected ratings as CSV to stdout."""
    from .service import SessionStore

    config = _load_config(config_path, seed, out)
    if not config.db_path.exists():
        raise InputError(f"no rating database at {config.db_path}")
    if not config.plan_path.exists():
        raise InputError(f"plan not found: {config.plan_path}")
    store = SessionStore(config.db_path)
    rows = export_scores(store, TrialPlan.load(config.plan_path))
    store.close()
    click.echo(scores_to_csv(rows), nl=False)


if __name__ == "__main__":
    main()
