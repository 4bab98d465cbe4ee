"""Config-driven experiment engine.

One :class:`ExperimentConfig` pins every methodological choice this toolkit
exists to compare: data arrangement, cross-validation scheme, scope,
windowing, post-processing, predictor and aggregation mode.
:func:`run_experiment` executes partition -> features -> fit/predict ->
post-process -> score -> aggregate and leaves a replayable run directory:

* ``config.yaml``      -- the fully resolved flat config
* ``foldplans.json``   -- every fold plan used, by subject
* ``fold_reports.csv`` -- one pooled report row per fold
* ``subject_reports.csv`` / ``report.json`` -- per-subject and averaged panels
* ``panels.svg``       -- bar panels of the per-subject and mean reports

An ``INCOMPLETE`` marker file exists while a run is in flight and is removed
on success, so partially written directories are recognizable.  Reruns with
the same config and seed are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import __version__ as _pkg_version
from .errors import (
    AlignmentError,
    ExperimentError,
    SeizevalError,
    TrainingError,
    ValidationError,
)
from .features import FeatureMatrix, WindowingConfig, extract_features
from .metrics import (
    AGGREGATION_ALIASES,
    ScoreReport,
    _rates_from_counts,
    aggregate_folds,
    average_reports,
    score_episode,
    write_report_csv,
)
from .partition import (
    FoldPlan,
    build_fact_subset,
    build_fixed_windows,
    build_seizure_to_seizure,
    make_folds_l1o,
    make_folds_tscv,
    make_scope_generalized,
    validate_plan,
)
from .postprocess import PostprocessConfig, merge_close_events, smooth_majority
from .predictor import PredictorConfig, _resolve_feature, fit, predict
from .timeline import (
    Event,
    LabelSeries,
    RecordingSet,
    events_to_labels,
    labels_to_events,
    read_annotations,
)
from .plots import write_metrics_panel

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "run_experiment",
    "score_only",
    "permutation_episode_f1",
    "load_config",
    "save_config",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment, nothing environmental.

    ``seed`` drives synthetic data generation and all per-fold model seeds.
    With ``scope='generalized'`` the ``cv`` field is ignored: evaluation is
    leave-one-subject-out by definition.
    """

    source: str = "synthetic"
    data_dir: str | None = None
    annotations: str | None = None
    channels: str = "all"
    arrangement: str = "fact_k"
    factor_k: int = 1
    window_hours: float = 1.0
    first_fold_min_h: float = 5.0
    first_fold_min_seizures: int = 1
    cv: str = "l1o"
    scope: str = "personalized"
    windowing: WindowingConfig = field(default_factory=WindowingConfig)
    postprocess: PostprocessConfig = field(default_factory=PostprocessConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    aggregation: str = "fold_average"
    seed: int = 12345
    jobs: int = 1
    out_dir: str = "runs/experiment"
    synth_subjects: int = 3
    synth_hours: float = 8.0
    synth_fs: float = 256.0
    synth_channels: int = 18
    synth_seizures_mean: float = 7.6
    synth_seizures_sd: float = 5.8
    synth_len_mean_s: float = 58.6
    synth_len_sd_s: float = 65.0
    synth_freq_hz: float = 4.0
    synth_freq_step_hz: float = 2.5
    synth_gain: float = 4.0

    def __post_init__(self):
        if self.source not in ("synthetic", "edf_dir"):
            raise ValidationError(f"unknown source {self.source!r}")
        if self.source == "edf_dir" and not self.data_dir:
            raise ValidationError("source 'edf_dir' requires data_dir")
        if self.arrangement not in ("fact_k", "stos", "win_h"):
            raise ValidationError(f"unknown arrangement {self.arrangement!r}")
        if self.cv not in ("l1o", "tscv"):
            raise ValidationError(f"unknown cv scheme {self.cv!r}")
        if self.scope not in ("personalized", "generalized"):
            raise ValidationError(f"unknown scope {self.scope!r}")
        if self.aggregation not in AGGREGATION_ALIASES:
            raise ValidationError(
                f"unknown aggregation {self.aggregation!r}; "
                f"use one of {sorted(AGGREGATION_ALIASES)}"
            )
        if self.scope == "personalized" and self.cv == "l1o" and self.arrangement == "win_h":
            raise ValidationError(
                "leave-one-seizure-out needs one seizure per file; use "
                "arrangement 'fact_k' or 'stos', or cv 'tscv' with 'win_h'"
            )
        if self.jobs < 1:
            raise ValidationError(f"jobs must be >= 1, got {self.jobs}")


# Flat key/value serialization of ExperimentConfig (one key per field; no
# nesting, so any config can be skimmed or diffed line by line).
_NESTED = {
    "ws": ("windowing", "window_s", float),
    "wss": ("windowing", "step_s", float),
    "smooth_s": ("postprocess", "smooth_window_s", float),
    "merge_gap_s": ("postprocess", "merge_gap_s", float),
    "min_event_s": ("postprocess", "min_event_s", float),
    "predictor": ("predictor", "kind", str),
    "n_trees": ("predictor", "n_trees", int),
    "max_depth": ("predictor", "max_depth", lambda v: None if v in (None, "null", "none", "") else int(v)),
    "threshold_feature": ("predictor", "threshold_feature", str),
    "threshold_value": ("predictor", "threshold_value", float),
}

_TOP_LEVEL_SKIP = {"windowing", "postprocess", "predictor"}


def config_to_mapping(cfg: ExperimentConfig) -> dict:
    out = {}
    for f in fields(cfg):
        if f.name in _TOP_LEVEL_SKIP:
            continue
        out[f.name] = getattr(cfg, f.name)
    for key, (group, attr, _) in _NESTED.items():
        out[key] = getattr(getattr(cfg, group), attr)
    return out


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    mapping = dict(mapping or {})
    kwargs = {}
    nested = {"windowing": {}, "postprocess": {}, "predictor": {}}
    for key, (group, attr, conv) in _NESTED.items():
        if key in mapping:
            value = mapping.pop(key)
            nested[group][attr] = conv(value) if value is not None else None
    field_names = {f.name for f in fields(ExperimentConfig)} - _TOP_LEVEL_SKIP
    for key in list(mapping):
        if key not in field_names:
            raise ValidationError(f"unknown config key {key!r}")
        kwargs[key] = mapping.pop(key)
    # rng_seed of the predictor is assigned per fold at run time
    return ExperimentConfig(
        windowing=WindowingConfig(**nested["windowing"]),
        postprocess=PostprocessConfig(**nested["postprocess"]),
        predictor=PredictorConfig(**nested["predictor"]),
        **kwargs,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read the flat YAML key/value config file."""
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a flat key/value mapping")
    return config_from_mapping(doc)


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    text = yaml.safe_dump(config_to_mapping(cfg), sort_keys=True, default_flow_style=False)
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


@dataclass
class RunSummary:
    out_dir: Path
    average: ScoreReport
    subject_reports: list[tuple[str, ScoreReport]]
    plans: dict[str, FoldPlan]


def _stage(name: str, fn, *args, **kwargs):
    """Run one pipeline stage; qualify any package error with the stage name."""
    try:
        return fn(*args, **kwargs)
    except ExperimentError:
        raise
    except SeizevalError as exc:
        raise ExperimentError(f"[{name}] {exc}") from exc


def _load_data(cfg: ExperimentConfig) -> RecordingSet:
    if cfg.source == "synthetic":
        from .synthgen import SynthConfig, generate

        synth = SynthConfig(
            n_subjects=cfg.synth_subjects,
            hours_per_subject=cfg.synth_hours,
            fs=cfg.synth_fs,
            n_channels=cfg.synth_channels,
            seizures_mean=cfg.synth_seizures_mean,
            seizures_sd=cfg.synth_seizures_sd,
            seizure_len_mean_s=cfg.synth_len_mean_s,
            seizure_len_sd_s=cfg.synth_len_sd_s,
            seizure_freq_hz=cfg.synth_freq_hz,
            seizure_freq_step_hz=cfg.synth_freq_step_hz,
            seizure_gain=cfg.synth_gain,
            rng_seed=cfg.seed,
        )
        return generate(synth)
    from .edfio import CHB_COMMON_18, load_recording_set

    if cfg.channels == "all":
        channels = None
    elif cfg.channels == "chb18":
        channels = CHB_COMMON_18
    else:
        channels = tuple(c.strip() for c in cfg.channels.split(",") if c.strip())
    return load_recording_set(cfg.data_dir, cfg.annotations, channels)


def _build_files(recordings: RecordingSet, cfg: ExperimentConfig):
    if cfg.arrangement == "fact_k":
        return build_fact_subset(recordings, cfg.factor_k, rng_seed=cfg.seed)
    if cfg.arrangement == "stos":
        return build_seizure_to_seizure(recordings)
    return build_fixed_windows(
        recordings, cfg.window_hours, cfg.first_fold_min_h, cfg.first_fold_min_seizures
    )


def _make_personal_plan(files, cfg: ExperimentConfig) -> FoldPlan:
    return make_folds_l1o(files) if cfg.cv == "l1o" else make_folds_tscv(files)


def _fold_seed(master: int, fold_index: int) -> int:
    return int(np.random.SeedSequence([master, fold_index]).generate_state(1)[0] % (2**31))


def _fit_with_fallback(train: FeatureMatrix, pcfg: PredictorConfig):
    """Fit the configured predictor; on a single-class fold, fall back to an
    unsupervised threshold at mean + 3 sd of the baseline feature."""
    try:
        return _stage("predictor", fit, train, pcfg)
    except ExperimentError as exc:
        if not isinstance(exc.__cause__, TrainingError):
            raise
    feature = pcfg.threshold_feature or "line_length"
    idx = _resolve_feature(train.columns, feature)
    values = train.values[:, idx].mean(axis=1)
    fallback = replace(
        pcfg,
        kind="threshold_baseline",
        threshold_feature=feature,
        threshold_value=float(values.mean() + 3.0 * values.std()),
    )
    return _stage("predictor", fit, train, fallback)


def _run_folds(files, plan: FoldPlan, cfg: ExperimentConfig):
    """Execute every fold; returns, per fold, the list of per-test-file
    (reference, hypothesis) label series pairs."""
    catalog = {f.meta.file_id: f for f in files}
    cache: dict[str, FeatureMatrix] = {}
    for f in files:
        cache[f.meta.file_id] = _stage(
            "features", extract_features, f, cfg.windowing
        )

    def one_fold(k: int):
        fold = plan.folds[k]
        train = FeatureMatrix.concatenate([cache[fid] for fid in fold.train])
        pcfg = replace(cfg.predictor, rng_seed=_fold_seed(cfg.seed, k))
        model = _fit_with_fallback(train, pcfg)
        pairs: list[tuple[LabelSeries, LabelSeries]] = []
        for fid in fold.test:
            fm = cache[fid]
            window_labels = _stage("predictor", predict, model, fm)
            raw = fm.project_to_samples(window_labels)
            smoothed = _stage("postprocess", smooth_majority, raw, cfg.postprocess)
            hyp_events = _stage(
                "postprocess", merge_close_events, labels_to_events(smoothed), cfg.postprocess
            )
            hyp = events_to_labels(hyp_events, fm.fs, catalog[fid].meta.duration_s)
            ref = catalog[fid].label_series()
            pairs.append((ref, hyp))
        return pairs

    if cfg.jobs > 1:
        from joblib import Parallel, delayed

        return list(
            Parallel(n_jobs=cfg.jobs, prefer="threads")(
                delayed(one_fold)(k) for k in range(len(plan.folds))
            )
        )
    return [one_fold(k) for k in range(len(plan.folds))]


def _versions() -> dict:
    import scipy
    import sklearn

    return {
        "seizeval": _pkg_version,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
        "report_columns": "v1",
    }


def run_experiment(cfg: ExperimentConfig) -> RunSummary:
    """Run the full pipeline and write all artifacts under ``cfg.out_dir``.

    Returns the summary (per-subject reports plus their unweighted average).
    Any error leaves the ``INCOMPLETE`` marker in place.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "INCOMPLETE"
    marker.write_text("run did not finish; artifacts may be partial\n", encoding="utf-8")

    recordings = _stage("data", _load_data, cfg)
    plans: dict[str, FoldPlan] = {}
    subject_reports: list[tuple[str, ScoreReport]] = []
    fold_rows = []

    if cfg.scope == "personalized":
        for subject in recordings.subjects():
            files = _stage("partition", _build_files, recordings.subset([subject]), cfg)
            plan = _stage("partition", _make_personal_plan, files, cfg)
            _stage("partition", validate_plan, plan, files)
            plans[subject] = plan
            pairs_by_fold = _run_folds(files, plan, cfg)
            all_pairs = [p for fold_pairs in pairs_by_fold for p in fold_pairs]
            subject_reports.append(
                (subject, _stage("metrics", aggregate_folds, all_pairs, cfg.aggregation))
            )
            for k, fold_pairs in enumerate(pairs_by_fold):
                fold_rows.append(
                    (
                        (subject, str(k), "+".join(plan.folds[k].test)),
                        _stage("metrics", aggregate_folds, fold_pairs, "pooled"),
                    )
                )
    else:
        files = _stage("partition", _build_files, recordings, cfg)
        plan = _stage("partition", make_scope_generalized, files)
        _stage("partition", validate_plan, plan, files)
        plans["all"] = plan
        pairs_by_fold = _run_folds(files, plan, cfg)
        for k, fold_pairs in enumerate(pairs_by_fold):
            subject = recordings.subjects()[k]
            subject_reports.append(
                (subject, _stage("metrics", aggregate_folds, fold_pairs, cfg.aggregation))
            )
            fold_rows.append(
                (
                    (subject, str(k), "+".join(plan.folds[k].test)),
                    _stage("metrics", aggregate_folds, fold_pairs, "pooled"),
                )
            )

    average = average_reports([rep for _, rep in subject_reports])

    save_config(cfg, out / "config.yaml")
    plans_doc = {key: json.loads(plan.to_json()) for key, plan in plans.items()}
    (out / "foldplans.json").write_text(
        json.dumps(plans_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_report_csv(out / "fold_reports.csv", fold_rows, ["subject", "fold", "test_files"])
    write_report_csv(
        out / "subject_reports.csv",
        [((subject,), rep) for subject, rep in subject_reports],
        ["subject"],
    )
    report_doc = {
        "average": average.to_dict(),
        "subjects": {subject: rep.to_dict() for subject, rep in subject_reports},
        "versions": _versions(),
    }
    (out / "report.json").write_text(
        json.dumps(report_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    title = (
        f"{cfg.arrangement} / {cfg.cv if cfg.scope == 'personalized' else 'loso'} / "
        f"{cfg.scope} / {cfg.aggregation}"
    )
    write_metrics_panel(
        out / "panels.svg", subject_reports + [("mean", average)], title=title
    )
    marker.unlink()
    return RunSummary(out_dir=out, average=average, subject_reports=subject_reports, plans=plans)


# ---------------------------------------------------------------------------
# Standalone scoring and the permutation baseline
# ---------------------------------------------------------------------------


def score_only(
    ref_csv: str | Path,
    hyp_csv: str | Path,
    fs: float = 256.0,
    duration_s: float | None = None,
    aggregation: str = "fold_average",
) -> ScoreReport:
    """Score two annotation CSVs against each other; no training involved.

    Each (subject, file) key is scored as its own fold over a span of
    ``duration_s`` seconds (default: the smallest whole second covering both
    files' events).  Hypothesis keys missing from the reference indicate the
    inputs do not describe the same data and raise an alignment error.
    """
    ref_map = read_annotations(ref_csv)
    hyp_map = read_annotations(hyp_csv)
    extra = set(hyp_map) - set(ref_map)
    if extra:
        raise AlignmentError(
            f"hypothesis names files absent from the reference: {sorted(extra)}"
        )
    if not ref_map:
        raise AlignmentError(f"{ref_csv}: no events to score")
    pairs = []
    for key in sorted(ref_map):
        ref_events = ref_map[key]
        hyp_events = hyp_map.get(key, [])
        if duration_s is None:
            end = max(ev.end for ev in ref_events + hyp_events)
            span = float(np.ceil(end))
        else:
            span = duration_s
        ref = events_to_labels(ref_events, fs, span)
        hyp = events_to_labels(hyp_events, fs, span)
        pairs.append((ref, hyp))
    return aggregate_folds(pairs, aggregation)


def permutation_episode_f1(
    ref_events: Sequence[Event],
    hyp_events: Sequence[Event],
    duration_s: float,
    n_permutations: int = 200,
    seed: int = 0,
) -> np.ndarray:
    """Episode-level F1 under random circular shifts of the hypothesis.

    Each permutation shifts every hypothesis event by one shared uniform
    offset modulo the span, preserving event count and durations, and scores
    against the unmoved reference.  The returned distribution is the chance
    level an observed F1 should be compared against.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(n_permutations)
    for p in range(n_permutations):
        offset = rng.uniform(0.0, duration_s)
        moved = []
        for ev in hyp_events:
            s = (ev.start + offset) % duration_s
            e = s + ev.duration
            if e <= duration_s:
                moved.append((s, e))
            else:
                moved.append((s, duration_s))
                moved.append((0.0, e - duration_s))
        moved.sort()
        cleaned: list[Event] = []
        for s, e in moved:
            s = max(s, cleaned[-1].end if cleaned else 0.0)
            if e - s > 1e-9:
                cleaned.append(Event(s, e))
        counts = score_episode(ref_events, cleaned)
        _, _, f1 = _rates_from_counts(counts)
        out[p] = f1
    return out
