"""
Why averaging per-fold rates can flatter a detector
===================================================

Cross-validation produces one score per fold.  There are two ways to turn
them into a single number:

* fold_average: compute each rate per fold, then take the unweighted mean
* pooled: add up the raw counts across folds, then compute the rates once

When folds differ in size or difficulty the two disagree, and the averaged
number is usually the prettier one.  This script reproduces the canonical
two-fold example where averaged precision is 0.5 but pooled precision is
91/110 ~ 0.827.
"""

import numpy as np

from seizeval.metrics import aggregate_folds
from seizeval.timeline import LabelSeries

fs = 1.0

# Fold A: 90 true positive samples, 10 false positives -> precision 0.9
ref_a = LabelSeries(np.r_[np.ones(90), np.zeros(10)].astype(np.uint8), fs)
hyp_a = LabelSeries(np.ones(100, dtype=np.uint8), fs)

# Fold B: 1 true positive sample, 9 false positives -> precision 0.1
ref_b = LabelSeries(np.r_[np.ones(1), np.zeros(9)].astype(np.uint8), fs)
hyp_b = LabelSeries(np.ones(10, dtype=np.uint8), fs)

folds = [(ref_a, hyp_a), (ref_b, hyp_b)]

averaged = aggregate_folds(folds, "fold_average")
pooled = aggregate_folds(folds, "pooled")

print("duration-level precision")
print(f"  fold A alone: 0.900   fold B alone: 0.100")
print(f"  fold_average: {averaged.precision_dur:.3f}")
print(f"  pooled:       {pooled.precision_dur:.3f}  (= 91/110)")

# The averaged figure treats the 10-sample fold as equal in weight to the
# 100-sample fold.  Which one is "right" depends on the question, but a
# paper that reports only the averaged number without saying so invites
# comparison against pooled numbers from other papers.
assert averaged.precision_dur == 0.5
assert pooled.precision_dur == 91 / 110

# With a single fold there is nothing to average and the two modes agree.
one = [(ref_a, hyp_a)]
assert (
    aggregate_folds(one, "fold_average").precision_dur
    == aggregate_folds(one, "pooled").precision_dur
)
print("\nsingle fold: both modes give", aggregate_folds(one, "pooled").precision_dur)
