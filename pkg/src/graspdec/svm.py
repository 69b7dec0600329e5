"""One-vs-all linear SVM with a deterministic full-batch solver.

Each binary machine minimizes an L2-regularized, class-balanced hinge
loss by projected subgradient descent with the fixed 1/(lambda*t) step
schedule: no stochastic sampling, no library solver, so identical inputs
always produce identical models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidParameterError, InvalidTrainingSetError, NumericError

__all__ = ["LinearModel", "train", "predict", "predict_batch"]

MAX_ITER = 10_000
GRAD_TOL = 1e-6


@dataclass(frozen=True)
class LinearModel:
    classes: tuple[int, ...]  # ascending
    weights: np.ndarray  # (n_classes, n_selected)
    biases: np.ndarray  # (n_classes,)
    mean: np.ndarray  # (n_selected,) standardization over training data
    std: np.ndarray  # (n_selected,), floored above zero
    selected: tuple[int, ...]  # indices into the full feature vector
    c_reg: float
    objectives: tuple[np.ndarray, ...] = ()  # per-machine best-objective traces

    @property
    def n_features_full(self) -> int:
        return max(self.selected) + 1 if self.selected else 0


def _feature_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        x = np.asarray(features, dtype=np.float64)
        return np.atleast_2d(x)
    return np.asarray([np.asarray(f.values, dtype=np.float64) for f in features])


def train(
    features,
    classes: Sequence[int],
    c_reg: float = 1.0,
    selected: Sequence[int] | None = None,
) -> LinearModel:
    """Train the one-vs-all machines on (optionally pre-selected) features.

    Features are standardized with training statistics; each class-k
    machine sees class k as +1 and the rest as -1, with instance weights
    balancing the two sides of the hinge sum.
    """
    x_full = _feature_matrix(features)
    y = np.asarray(classes, dtype=np.int64)
    if x_full.shape[0] != y.shape[0]:
        raise InvalidParameterError("feature/class count mismatch")
    if c_reg <= 0:
        raise InvalidParameterError("c_reg must be positive")
    if not np.isfinite(x_full).all():
        raise NumericError("non-finite training features")
    uniq = np.unique(y)
    if uniq.size < 2:
        raise InvalidTrainingSetError("training set contains a single class")

    if selected is None:
        sel = tuple(range(x_full.shape[1]))
    else:
        sel = tuple(int(i) for i in selected)
    x = x_full[:, sel]

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std <= 1e-12, 1.0, std)
    xs = (x - mean) / std

    lam = 1.0 / c_reg
    weights = np.empty((uniq.size, xs.shape[1]))
    biases = np.empty(uniq.size)
    traces = []
    for i, cls in enumerate(uniq):
        ybin = np.where(y == cls, 1.0, -1.0)
        n_pos = float((ybin > 0).sum())
        n_neg = float((ybin < 0).sum())
        alpha = np.where(ybin > 0, 0.5 / n_pos, 0.5 / n_neg)
        w, b, trace = kernels.hinge_svm(
            np.ascontiguousarray(xs),
            ybin,
            alpha,
            lam,
            MAX_ITER,
            GRAD_TOL,
        )
        weights[i] = w
        biases[i] = b
        traces.append(trace)

    weights.setflags(write=False)
    biases.setflags(write=False)
    mean.setflags(write=False)
    std.setflags(write=False)
    return LinearModel(
        classes=tuple(int(c) for c in uniq),
        weights=weights,
        biases=biases,
        mean=mean,
        std=std,
        selected=sel,
        c_reg=float(c_reg),
        objectives=tuple(traces),
    )


def predict_batch(model: LinearModel, features) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized predict: (predicted classes, score matrix)."""
    x_full = _feature_matrix(features)
    if x_full.shape[1] <= max(model.selected):
        raise InvalidParameterError(
            f"feature dimension {x_full.shape[1]} too small for model "
            f"selecting index {max(model.selected)}"
        )
    xs = (x_full[:, model.selected] - model.mean) / model.std
    scores = xs @ model.weights.T + model.biases
    # argmax takes the first maximum, so exact ties go to the lower class
    pred = np.asarray(model.classes)[np.argmax(scores, axis=1)]
    return pred, scores


def predict(model: LinearModel, feature) -> tuple[int, np.ndarray]:
    """Decision scores for one feature vector and the argmax class."""
    values = feature if isinstance(feature, np.ndarray) else feature.values
    pred, scores = predict_batch(model, np.atleast_2d(values))
    return int(pred[0]), scores[0]
