"""
Data arrangements and cross-validation plans
============================================

Before any model is trained, two methodological choices shape the result:

* arrangement: how continuous recordings are cut into files.  Balanced
  subsets center each seizure in k times its length of background;
  seizure-to-seizure keeps everything, cutting at each seizure's end;
  fixed windows cut hour-style slices regardless of seizures.
* fold plan: which files train and which test.  Leave-one-out needs the
  one-seizure-per-file arrangements; time-series CV only ever trains on
  the past; the generalized scope holds out whole subjects.

The balanced arrangements discard most background, which changes the
class balance of the test set and with it every precision-like number.
"""

import numpy as np

from seizeval.partition import (
    build_fact_subset,
    build_fixed_windows,
    build_seizure_to_seizure,
    make_folds_l1o,
    make_folds_tscv,
    make_scope_generalized,
    validate_plan,
)
from seizeval.synthgen import SynthConfig, generate

# Modest seizure load so even k=10 finds enough background to draw from;
# an overloaded subject would raise CapacityError at high k, by design.
recordings = generate(
    SynthConfig(
        n_subjects=2, hours_per_subject=3.0, fs=64.0, n_channels=1,
        seizures_mean=4.0, seizures_sd=1.0, rng_seed=3,
    )
)
subject = recordings.subset(["s01"])
total_h = sum(r.meta.duration_s for r in subject) / 3600
n_seizures = sum(len(r.events) for r in subject)
print(f"s01: {total_h:.1f} h of signal, {n_seizures} seizures\n")


def describe(name, files):
    kept = sum(f.meta.duration_s for f in files)
    seiz = sum(ev.duration for f in files for ev in f.events)
    print(f"{name}: {len(files)} files, {kept / 3600:.2f} h kept, "
          f"seizure fraction {seiz / kept:.3f}")
    for f in files[:4]:
        print(f"  {f.meta.file_id}: {f.meta.duration_s:7.1f} s, "
              f"{len(f.events)} seizure(s)")
    if len(files) > 4:
        print(f"  ... {len(files) - 4} more")


# Balanced subset, k=1: each file is half seizure.  At k=10 the fraction
# drops to 1/11, still far above the natural rate.
describe("fact k=1 ", build_fact_subset(subject, factor_k=1, rng_seed=0))
print()
describe("fact k=10", build_fact_subset(subject, factor_k=10, rng_seed=0))
print()

# Seizure-to-seizure: nothing discarded, exactly one seizure per file,
# file lengths wildly uneven (that is the data's real shape).
stos = build_seizure_to_seizure(subject)
describe("stos     ", stos)
print()

# Fixed windows: hour slices, with the first file grown until it holds at
# least one full seizure so that an expanding-window CV has something to
# train on from fold one.
win = build_fixed_windows(subject, window_h=1.0, first_fold_min_h=1.0)
describe("fixed 1 h", win)
print()

# Fold plans over those files.  validate_plan re-checks the structural
# guarantees and raises if a plan and a file list drifted apart.
l1o = make_folds_l1o(stos)
tscv = make_folds_tscv(stos)
validate_plan(l1o, stos)
validate_plan(tscv, stos)
print(f"l1o : {len(l1o.folds)} folds; fold 0 trains on "
      f"{len(l1o.folds[0].train)} files, tests on {l1o.folds[0].test}")
print(f"tscv: {len(tscv.folds)} folds; fold 0 trains on "
      f"{tscv.folds[0].train}, tests on {tscv.folds[0].test}")

# The generalized scope works on whole recordings across subjects.
loso = make_scope_generalized(list(recordings))
validate_plan(loso, list(recordings))
for fold in loso.folds:
    train_subjects = {t.split("_")[0] for t in fold.train}
    test_subjects = {t.split("_")[0] for t in fold.test}
    print(f"loso fold: train {sorted(train_subjects)}, test {sorted(test_subjects)}")
    assert not train_subjects & test_subjects
