"""
Features, a tree ensemble, and one hand-rolled evaluation fold
==============================================================

The detector itself is intentionally plain: 19 features per channel over
sliding windows (amplitude statistics, line length, and spectral band
powers after a 1-20 Hz zero-phase bandpass) feeding a random forest.  The
point of the toolkit is what surrounds the model, so this script wires one
fold together explicitly: extract, fit, predict, project back to sample
resolution, post-process, score.
"""

import numpy as np

from seizeval.features import FeatureMatrix, WindowingConfig, extract_features
from seizeval.metrics import finalize_report, score_duration, score_episode
from seizeval.partition import build_fact_subset, make_folds_l1o
from seizeval.postprocess import PostprocessConfig, merge_close_events, smooth_majority
from seizeval.predictor import PredictorConfig, fit, predict
from seizeval.synthgen import SynthConfig, generate
from seizeval.timeline import events_to_labels, labels_to_events

recordings = generate(
    SynthConfig(n_subjects=1, hours_per_subject=3.0, fs=128.0, n_channels=2, rng_seed=11)
)

# One balanced file per seizure, leave-one-out over the files.
files = build_fact_subset(recordings, factor_k=1, rng_seed=0)
plan = make_folds_l1o(files)
print(f"{len(files)} files, {len(plan.folds)} folds")

# Features: 4 s windows hopping by 1 s.  A window is labeled seizure only
# if more than half its samples are, so labels stay unambiguous.
wcfg = WindowingConfig(window_s=4.0, step_s=1.0)
features = {f.meta.file_id: extract_features(f, wcfg) for f in files}
first = next(iter(features.values()))
print(f"feature matrix: {first.values.shape[1]} columns, e.g. "
      f"{', '.join(first.columns[:3])}, ...")

fold = plan.folds[0]
train = FeatureMatrix.concatenate([features[t] for t in fold.train])
model = fit(train, PredictorConfig(n_trees=50, max_depth=12, rng_seed=0))

(test_id,) = fold.test
test_fm = features[test_id]
window_decisions = predict(model, test_fm)
print(f"\nfold 0 tests {test_id}: "
      f"{int(window_decisions.sum())}/{len(window_decisions)} windows positive")

# Window decisions are projected back onto the sample grid, smoothed, and
# merged into events before scoring; scores are event-level statements.
pcfg = PostprocessConfig()
hyp_series = smooth_majority(test_fm.project_to_samples(window_decisions), pcfg)
hyp_events = merge_close_events(labels_to_events(hyp_series), pcfg)

test_file = next(f for f in files if f.meta.file_id == test_id)
ref_events = list(test_file.events)
ref_series = events_to_labels(
    ref_events, test_file.meta.fs, test_file.meta.duration_s
)

print("reference: ", ref_events)
print("hypothesis:", hyp_events)

report = finalize_report(
    score_duration(ref_series, hyp_series),
    score_episode(ref_events, hyp_events),
    test_file.meta.duration_s,
)
print(f"\nepisode F1 {report.f1_ep:.3f}, duration F1 {report.f1_dur:.3f}, "
      f"FAR/day {report.far_per_day:.1f}")
