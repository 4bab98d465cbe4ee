"""Window classifiers: a seeded tree ensemble and a one-feature threshold rule.

The tree ensemble is a random forest: bootstrap-sampled, axis-aligned
decision trees with Gini impurity and random feature subsetting of size
``floor(sqrt(n_features))`` at each split, combined by a hard majority vote
over the trees (ties go to 0).  Everything is deterministic given the seed.

The threshold baseline predicts 1 iff one chosen feature exceeds a fixed
value; it doubles as the documented fallback when a training fold contains
only one class and a forest cannot be fit.

No feature scaling is applied anywhere: trees are scale-invariant and the
baseline compares raw values, so nothing can leak test-fold statistics into
the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import joblib
import numpy as np
from sklearn.ensemble import RandomForestClassifier

from .errors import SchemaError, TrainingError, ValidationError
from .features import FeatureMatrix

__all__ = [
    "PredictorConfig",
    "Model",
    "fit",
    "predict",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class PredictorConfig:
    """Choice of classifier plus its knobs.

    ``threshold_feature`` may be a full column name (``ch03_line_length``) or
    a bare feature name (``line_length``), in which case the value compared
    against the threshold is the mean over all channels' columns.
    """

    kind: str = "tree_ensemble"
    n_trees: int = 100
    max_depth: int | None = None
    rng_seed: int = 0
    threshold_feature: str = "line_length"
    threshold_value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("tree_ensemble", "threshold_baseline"):
            raise ValidationError(f"unknown predictor kind {self.kind!r}")
        if self.kind == "tree_ensemble" and self.n_trees < 1:
            raise ValidationError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.kind == "threshold_baseline" and not self.threshold_feature:
            raise ValidationError("threshold_baseline requires threshold_feature")


@dataclass
class Model:
    """A fitted classifier bound to the training-time column schema."""

    config: PredictorConfig
    columns: list[str]
    forest: RandomForestClassifier | None = None
    feature_indices: list[int] = field(default_factory=list)


def _resolve_feature(columns: list[str], name: str) -> list[int]:
    exact = [i for i, c in enumerate(columns) if c == name]
    if exact:
        return exact
    suffix = [i for i, c in enumerate(columns) if c.endswith(f"_{name}")]
    if suffix:
        return suffix
    raise SchemaError(
        f"feature {name!r} matches no column; columns look like {columns[:3]}..."
    )


def fit(train: FeatureMatrix, cfg: PredictorConfig) -> Model:
    """Train a classifier on a feature matrix.

    For the tree ensemble the training set must contain both classes; a
    single-class fold raises :class:`~seizeval.errors.TrainingError` telling
    the caller to fall back to the threshold baseline, which needs no fit.
    """
    if cfg.kind == "threshold_baseline":
        indices = _resolve_feature(train.columns, cfg.threshold_feature)
        return Model(config=cfg, columns=list(train.columns), feature_indices=indices)

    classes = np.unique(train.labels)
    if len(classes) < 2:
        raise TrainingError(
            f"training set has a single class ({classes.tolist()}); a tree "
            "ensemble cannot be fit -- fall back to kind='threshold_baseline'"
        )
    forest = RandomForestClassifier(
        n_estimators=cfg.n_trees,
        criterion="gini",
        max_depth=cfg.max_depth,
        max_features="sqrt",
        bootstrap=True,
        random_state=cfg.rng_seed,
        n_jobs=1,
    )
    forest.fit(train.values, train.labels)
    return Model(config=cfg, columns=list(train.columns), forest=forest)


def predict(model: Model, test: FeatureMatrix) -> np.ndarray:
    """Per-window binary labels for ``test``.

    Columns must match the training schema exactly (same names, same order).
    The ensemble takes a hard majority vote over per-tree predictions in tree
    order; a tie votes 0.
    """
    if list(test.columns) != model.columns:
        raise SchemaError(
            f"test columns do not match training columns "
            f"({len(test.columns)} vs {len(model.columns)}; first difference at "
            f"{next((i for i, (a, b) in enumerate(zip(test.columns, model.columns)) if a != b), 'length')})"
        )
    if test.n_windows == 0:
        return np.zeros(0, dtype=np.uint8)

    if model.config.kind == "threshold_baseline":
        value = test.values[:, model.feature_indices].mean(axis=1)
        return (value > model.config.threshold_value).astype(np.uint8)

    votes = np.zeros(test.n_windows, dtype=np.int64)
    for tree in model.forest.estimators_:
        votes += tree.predict(test.values).astype(np.int64)
    return (2 * votes > len(model.forest.estimators_)).astype(np.uint8)


def save_model(model: Model, path: str | Path) -> None:
    """Serialize a model with its config, seed and column schema embedded."""
    blob = {
        "format": "seizeval-model-v1",
        "config": model.config,
        "columns": model.columns,
        "forest": model.forest,
        "feature_indices": model.feature_indices,
    }
    joblib.dump(blob, path)


def load_model(path: str | Path) -> Model:
    blob = joblib.load(path)
    if not isinstance(blob, dict) or blob.get("format") != "seizeval-model-v1":
        raise SchemaError(f"{path}: not a recognized serialized model")
    return Model(
        config=blob["config"],
        columns=blob["columns"],
        forest=blob["forest"],
        feature_indices=blob["feature_indices"],
    )
