"""Command-line entry points.

Each pipeline stage is usable standalone with files as the interchange:
``synth`` writes a dataset, ``ingest`` inventories one, ``partition`` emits a
fold plan, ``features`` dumps feature CSVs, ``run`` executes a whole
experiment from a config file, ``score`` compares two annotation CSVs, and
``plot`` re-renders the SVG panels of a finished run.  Exit code is 0 only
when the command completed with all invariants intact.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import SeizevalError
from .experiment import (
    ExperimentConfig,
    config_from_mapping,
    config_to_mapping,
    load_config,
    run_experiment,
    score_only,
)
from .metrics import REPORT_COLUMNS, report_from_dict, report_to_row

_CONFIG_OVERRIDES = [
    # (click flag, config key, cast)
    ("seed", "seed", int),
    ("jobs", "jobs", int),
    ("out", "out_dir", str),
    ("aggregation", "aggregation", str),
    ("ws", "ws", float),
    ("wss", "wss", float),
    ("smooth", "smooth_s", float),
    ("merge_gap", "merge_gap_s", float),
    ("factor", "factor_k", int),
    ("window_hours", "window_hours", float),
]


def _wrap(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SeizevalError as exc:
        raise click.ClickException(str(exc)) from exc


def _build_config(config_path: str | None, **overrides) -> ExperimentConfig:
    mapping = {}
    if config_path:
        mapping = config_to_mapping(_wrap(load_config, config_path))
    for flag, key, cast in _CONFIG_OVERRIDES:
        value = overrides.get(flag)
        if value is not None:
            mapping[key] = cast(value)
    for key in ("arrangement", "cv", "scope", "data_dir", "annotations", "channels", "source"):
        value = overrides.get(key)
        if value is not None:
            mapping[key] = value
    return _wrap(config_from_mapping, mapping)


def _common_run_flags(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="Flat YAML key/value config; flags override its entries.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed (data + models).")(fn)
    fn = click.option("--jobs", type=int, default=None, help="Parallel folds (default 1).")(fn)
    fn = click.option("--out", type=str, default=None, help="Output directory.")(fn)
    fn = click.option("--aggregation", type=str, default=None,
                      help="fold_average | pooled (micro/macro accepted as aliases).")(fn)
    fn = click.option("--ws", type=float, default=None, help="Feature window size, seconds.")(fn)
    fn = click.option("--wss", type=float, default=None, help="Feature window step, seconds.")(fn)
    fn = click.option("--smooth", type=float, default=None, help="Majority smoothing window, seconds.")(fn)
    fn = click.option("--merge-gap", "merge_gap", type=float, default=None,
                      help="Merge predicted events closer than this, seconds.")(fn)
    fn = click.option("--factor", type=int, default=None, help="Fact-k non-seizure factor k.")(fn)
    fn = click.option("--window-hours", "window_hours", type=float, default=None,
                      help="Fixed-window arrangement slice length, hours.")(fn)
    return fn


@click.group()
def main() -> None:
    """Seizure-detection evaluation toolkit: one methodological choice at a time."""


@main.command()
@click.option("--out", type=str, required=True, help="Directory for EDF files + annotations.csv.")
@click.option("--seed", type=int, default=12345, show_default=True)
@click.option("--subjects", type=int, default=3, show_default=True)
@click.option("--hours", type=float, default=8.0, show_default=True)
@click.option("--fs", type=float, default=256.0, show_default=True)
@click.option("--channels", type=int, default=18, show_default=True)
@click.option("--gain", type=float, default=4.0, show_default=True,
              help="Seizure amplitude multiplier; 1 plants invisible seizures.")
@click.option("--freq", type=float, default=4.0, show_default=True,
              help="Base seizure rhythm frequency, Hz.")
def synth(out, seed, subjects, hours, fs, channels, gain, freq) -> None:
    """Generate a synthetic dataset with ground-truth annotations."""
    from .synthgen import SynthConfig, generate, save_dataset

    cfg = _wrap(SynthConfig, n_subjects=subjects, hours_per_subject=hours, fs=fs,
                n_channels=channels, seizure_gain=gain, seizure_freq_hz=freq, rng_seed=seed)
    recordings = _wrap(generate, cfg)
    paths, ann = _wrap(save_dataset, recordings, out)
    n_events = sum(len(r.events) for r in recordings)
    click.echo(f"wrote {len(paths)} EDF files and {n_events} events to {out}")
    click.echo(f"annotations: {ann}")


@main.command()
@click.option("--data-dir", type=click.Path(exists=True), required=True)
@click.option("--annotations", type=click.Path(exists=True), default=None)
@click.option("--channels", type=str, default="all", show_default=True,
              help="'all', 'chb18', or a comma-separated label list.")
def ingest(data_dir, annotations, channels) -> None:
    """Validate and inventory a directory of EDF files plus annotations."""
    from .edfio import CHB_COMMON_18, load_recording_set

    wanted = None if channels == "all" else (
        CHB_COMMON_18 if channels == "chb18"
        else tuple(c.strip() for c in channels.split(",") if c.strip())
    )
    recordings = _wrap(load_recording_set, data_dir, annotations, wanted)
    for subject in recordings.subjects():
        files = recordings.files(subject)
        hours = sum(f.meta.duration_s for f in files) / 3600.0
        n_events = sum(len(f.events) for f in files)
        click.echo(f"{subject}: {len(files)} files, {hours:.2f} h, {n_events} seizures")
    click.echo(f"total: {len(recordings)} files, "
               f"{sum(len(r.events) for r in recordings)} seizures")


@main.command()
@_common_run_flags
@click.option("--arrangement", type=click.Choice(["fact_k", "stos", "win_h"]), default=None)
@click.option("--cv", type=click.Choice(["l1o", "tscv"]), default=None)
@click.option("--scope", type=click.Choice(["personalized", "generalized"]), default=None)
@click.option("--data-dir", "data_dir", type=click.Path(exists=True), default=None)
@click.option("--annotations", type=click.Path(exists=True), default=None)
@click.option("--plan-out", type=str, default=None, help="Write the fold plans to this JSON file.")
def partition(config_path, plan_out, **overrides) -> None:
    """Build the data arrangement and print (or save) the fold plans."""
    if overrides.get("data_dir") and not overrides.get("source"):
        overrides["source"] = "edf_dir"
    cfg = _build_config(config_path, **overrides)
    from .experiment import _build_files, _load_data, _make_personal_plan
    from .partition import make_scope_generalized, validate_plan

    recordings = _wrap(_load_data, cfg)
    plans = {}
    if cfg.scope == "personalized":
        for subject in recordings.subjects():
            files = _wrap(_build_files, recordings.subset([subject]), cfg)
            plan = _wrap(_make_personal_plan, files, cfg)
            _wrap(validate_plan, plan, files)
            plans[subject] = plan
            click.echo(f"{subject}: {len(files)} files -> {len(plan.folds)} {cfg.cv} folds")
    else:
        files = _wrap(_build_files, recordings, cfg)
        plan = _wrap(make_scope_generalized, files)
        _wrap(validate_plan, plan, files)
        plans["all"] = plan
        click.echo(f"all: {len(files)} files -> {len(plan.folds)} loso folds")
    if plan_out:
        doc = {key: json.loads(p.to_json()) for key, p in plans.items()}
        Path(plan_out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
        click.echo(f"fold plans written to {plan_out}")


@main.command()
@click.option("--data-dir", type=click.Path(exists=True), required=True)
@click.option("--annotations", type=click.Path(exists=True), default=None)
@click.option("--channels", type=str, default="all", show_default=True)
@click.option("--ws", type=float, default=4.0, show_default=True)
@click.option("--wss", type=float, default=0.5, show_default=True)
@click.option("--out", type=str, required=True, help="Directory for per-file feature CSVs.")
def features(data_dir, annotations, channels, ws, wss, out) -> None:
    """Extract per-window features of every recording to CSV files."""
    from .edfio import CHB_COMMON_18, load_recording_set
    from .features import WindowingConfig, extract_features

    wanted = None if channels == "all" else (
        CHB_COMMON_18 if channels == "chb18"
        else tuple(c.strip() for c in channels.split(",") if c.strip())
    )
    recordings = _wrap(load_recording_set, data_dir, annotations, wanted)
    cfg = _wrap(WindowingConfig, window_s=ws, step_s=wss)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for rec in recordings:
        fm = _wrap(extract_features, rec, cfg)
        path = out_dir / f"{rec.meta.file_id}.features.csv"
        fm.to_csv(path)
        click.echo(f"{rec.meta.file_id}: {fm.n_windows} windows x {len(fm.columns)} columns -> {path}")


@main.command()
@_common_run_flags
@click.option("--arrangement", type=click.Choice(["fact_k", "stos", "win_h"]), default=None)
@click.option("--cv", type=click.Choice(["l1o", "tscv"]), default=None)
@click.option("--scope", type=click.Choice(["personalized", "generalized"]), default=None)
@click.option("--data-dir", "data_dir", type=click.Path(exists=True), default=None)
@click.option("--annotations", type=click.Path(exists=True), default=None)
def run(config_path, **overrides) -> None:
    """Run a full experiment and write reports, plans and plots."""
    if overrides.get("data_dir") and not overrides.get("source"):
        overrides["source"] = "edf_dir"
    cfg = _build_config(config_path, **overrides)
    summary = _wrap(run_experiment, cfg)
    for subject, rep in summary.subject_reports:
        click.echo(
            f"{subject}: F1 ep {rep.f1_ep:.3f}  F1 dur {rep.f1_dur:.3f}  "
            f"F1 DE {rep.f1_de:.3f}  FA/day {rep.far_per_day:.2f}"
        )
    avg = summary.average
    click.echo(
        f"mean: F1 ep {avg.f1_ep:.3f}  F1 dur {avg.f1_dur:.3f}  "
        f"F1 DE {avg.f1_de:.3f}  FA/day {avg.far_per_day:.2f}"
    )
    click.echo(f"artifacts in {summary.out_dir}")


@main.command()
@click.option("--ref", "ref_csv", type=click.Path(exists=True), required=True,
              help="Reference annotation CSV.")
@click.option("--hyp", "hyp_csv", type=click.Path(exists=True), required=True,
              help="Hypothesis annotation CSV.")
@click.option("--fs", type=float, default=256.0, show_default=True)
@click.option("--duration-s", type=float, default=None,
              help="Span per file; default covers the latest event.")
@click.option("--aggregation", type=str, default="fold_average", show_default=True)
@click.option("--out", type=str, default=None, help="Also write the JSON report here.")
@click.option("--csv", "as_csv", is_flag=True, help="Print the flat CSV row instead of JSON.")
def score(ref_csv, hyp_csv, fs, duration_s, aggregation, out, as_csv) -> None:
    """Score a hypothesis annotation CSV against a reference."""
    report = _wrap(score_only, ref_csv, hyp_csv, fs, duration_s, aggregation)
    if as_csv:
        click.echo(",".join(REPORT_COLUMNS))
        click.echo(",".join(repr(v) for v in report_to_row(report)))
    else:
        click.echo(report.to_json(indent=2))
    if out:
        Path(out).write_text(report.to_json(indent=2) + "\n", encoding="utf-8")


@main.command()
@click.option("--report", "report_path", type=click.Path(exists=True), required=True,
              help="report.json of a finished run.")
@click.option("--out", type=str, required=True, help="Output SVG path.")
@click.option("--title", type=str, default="", help="Panel title.")
def plot(report_path, out, title) -> None:
    """Re-render the SVG bar panels from a run's report.json."""
    from .plots import write_metrics_panel

    doc = json.loads(Path(report_path).read_text(encoding="utf-8"))
    rows = [(subject, report_from_dict(rep)) for subject, rep in sorted(doc["subjects"].items())]
    rows.append(("mean", report_from_dict(doc["average"])))
    _wrap(write_metrics_panel, out, rows, title)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    sys.exit(main())
