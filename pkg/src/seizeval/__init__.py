"""Evaluation methodology toolkit for epileptic seizure detection.

The package makes the usually-implicit methodological choices of a detection
study explicit and swappable: how data are arranged into files, which
cross-validation scheme orders them, whether models are personalized or
generalized, how windows become events, and how per-fold results are
aggregated.  Every choice is a config field, so their effect on reported
performance can be measured instead of assumed.

Layout:

* :mod:`seizeval.timeline`    -- events, label series, recordings, annotation CSV
* :mod:`seizeval.metrics`     -- duration/episode/overlap-weighted scoring, FAR, aggregation
* :mod:`seizeval.postprocess` -- majority smoothing and event merging
* :mod:`seizeval.partition`   -- data arrangements and fold plans
* :mod:`seizeval.features`    -- filtering and sliding-window feature extraction
* :mod:`seizeval.predictor`   -- seeded tree ensemble and threshold baseline
* :mod:`seizeval.synthgen`    -- synthetic recordings with planted seizures
* :mod:`seizeval.edfio`       -- EDF parsing/writing and dataset loading
* :mod:`seizeval.experiment`  -- config-driven end-to-end runner
* :mod:`seizeval.cli`         -- command-line front end
"""

__version__ = "0.1.0"

from .errors import (
    AlignmentError,
    BoundaryError,
    CapacityError,
    ChannelLookupError,
    DomainError,
    EdfError,
    EdfFormatError,
    EdfParseError,
    ExperimentError,
    SchemaError,
    SeizevalError,
    TrainingError,
    ValidationError,
)
from .timeline import (
    Event,
    LabelSeries,
    Recording,
    RecordingMeta,
    RecordingSet,
    events_to_labels,
    labels_to_events,
    read_annotations,
    write_annotations,
)
from .metrics import (
    MetricCounts,
    ScoreReport,
    aggregate_folds,
    average_reports,
    far_per_day,
    finalize_report,
    score_duration,
    score_episode,
    score_taes,
)
from .postprocess import PostprocessConfig, merge_close_events, smooth_majority
from .features import (
    BandDefinition,
    DEFAULT_BANDS,
    FEATURE_NAMES,
    FeatureMatrix,
    WindowingConfig,
    band_powers,
    bandpass_filter,
    extract_features,
    line_length,
)
from .partition import (
    DataFile,
    Fold,
    FoldPlan,
    SubjectTimeline,
    build_fact_subset,
    build_fixed_windows,
    build_seizure_to_seizure,
    make_folds_l1o,
    make_folds_tscv,
    make_scope_generalized,
    validate_plan,
)
from .predictor import PredictorConfig, fit, load_model, predict, save_model
from .synthgen import SynthConfig, generate, save_dataset
from .edfio import (
    CHB_COMMON_18,
    EdfHeader,
    load_recording_set,
    parse_edf,
    select_channels,
    write_edf,
)
from .experiment import (
    ExperimentConfig,
    load_config,
    permutation_episode_f1,
    run_experiment,
    save_config,
    score_only,
)

__all__ = [
    "__version__",
    # errors
    "SeizevalError", "ValidationError", "AlignmentError", "BoundaryError",
    "DomainError", "CapacityError", "SchemaError", "TrainingError",
    "ExperimentError", "EdfError", "EdfParseError", "EdfFormatError",
    "ChannelLookupError",
    # timeline
    "Event", "LabelSeries", "Recording", "RecordingMeta", "RecordingSet",
    "labels_to_events", "events_to_labels", "read_annotations", "write_annotations",
    # metrics
    "MetricCounts", "ScoreReport", "score_duration", "score_episode",
    "score_taes", "far_per_day", "finalize_report", "aggregate_folds",
    "average_reports",
    # postprocess
    "PostprocessConfig", "smooth_majority", "merge_close_events",
    # features
    "WindowingConfig", "BandDefinition", "FeatureMatrix", "DEFAULT_BANDS",
    "FEATURE_NAMES", "bandpass_filter", "line_length", "band_powers",
    "extract_features",
    # partition
    "DataFile", "Fold", "FoldPlan", "SubjectTimeline", "build_fact_subset",
    "build_seizure_to_seizure", "build_fixed_windows", "make_folds_l1o",
    "make_folds_tscv", "make_scope_generalized", "validate_plan",
    # predictor
    "PredictorConfig", "fit", "predict", "save_model", "load_model",
    # synthgen
    "SynthConfig", "generate", "save_dataset",
    # edf
    "EdfHeader", "CHB_COMMON_18", "parse_edf", "write_edf", "select_channels",
    "load_recording_set",
    # experiment
    "ExperimentConfig", "run_experiment", "score_only", "permutation_episode_f1",
    "load_config", "save_config",
]
