"""Common spatial patterns, filter-bank CSP, and feature selection.

CSP solves the generalized eigenproblem C1 w = lambda (C1 + C2) w by
whitening the composite covariance; the first and last m eigenvectors
give the spatial filters, and log-normalized projected variances give
the features. FBCSP repeats this per frequency sub-band and per
one-vs-rest target class, followed by mutual-information selection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import eigh

from .errors import DegenerateInputError, InvalidParameterError, NumericError
from .signals import bandpass_matrix

__all__ = [
    "SpatialFilterSet",
    "FeatureVector",
    "trial_covariance",
    "csp_fit",
    "csp_features",
    "fbcsp_fit",
    "fbcsp_feature_matrix",
    "fit_transform_bands",
    "transform_bands",
    "select_features",
    "spatial_patterns",
]

DEFAULT_BANDS: tuple[tuple[float, float], ...] = tuple(
    (4.0 * i, 4.0 * i + 4.0) for i in range(1, 10)
)  # nine 4 Hz bands, 4-40 Hz

BROADBAND = (0.0, 0.0)  # sentinel band: use the trials as given


@dataclass(frozen=True)
class SpatialFilterSet:
    """Spatial filters (rows) with their variance-ratio eigenvalues."""

    filters: np.ndarray  # (2m, channels), unit-norm rows
    eigenvalues: np.ndarray  # (2m,), descending, in [0, 1]
    target_class: int
    band: tuple[float, float]
    composite_cov: np.ndarray  # shrunk C1 + C2, kept for the pattern transform

    @property
    def m(self) -> int:
        return self.filters.shape[0] // 2


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    layout: tuple[tuple[tuple[float, float], int, int], ...]  # (band, class, filter idx)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.layout):
            raise InvalidParameterError("feature/layout length mismatch")
        if not np.isfinite(values).all():
            raise NumericError("non-finite feature values")


def _stack_covariances(stack: np.ndarray) -> np.ndarray:
    """Trace-normalized per-trial covariances of a (n, channels, samples) stack."""
    centered = stack - stack.mean(axis=2, keepdims=True)
    covs = centered @ centered.transpose(0, 2, 1)
    traces = np.trace(covs, axis1=1, axis2=2)
    if not np.isfinite(traces).all():
        raise NumericError("covariance is not finite")
    if (traces <= 0.0).any():
        raise DegenerateInputError("zero-variance trial")
    covs /= traces[:, None, None]
    return (covs + covs.transpose(0, 2, 1)) / 2.0


def trial_covariance(trial_data: np.ndarray) -> np.ndarray:
    """Trace-normalized spatial covariance of one trial.

    Rows are mean-centered first; the result is symmetric PSD with unit
    trace, so trials contribute equally regardless of amplitude.
    """
    x = np.asarray(trial_data, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise InvalidParameterError("need a (channels >= 2, samples >= 2) matrix")
    return _stack_covariances(x[None])[0]


def _shrink(c: np.ndarray, gamma: float) -> np.ndarray:
    n = c.shape[0]
    return (1.0 - gamma) * c + gamma * (np.trace(c) / n) * np.eye(n)


def _csp_from_covariances(
    c1_raw: np.ndarray,
    c2_raw: np.ndarray,
    m: int,
    shrinkage: float,
    target_class: int,
    band: tuple[float, float],
) -> SpatialFilterSet:
    """Solve the whitened generalized eigenproblem for mean covariances."""
    n_ch = c1_raw.shape[0]
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    if not 0.0 <= shrinkage <= 1.0:
        raise InvalidParameterError("shrinkage must be in [0, 1]")
    if 2 * m > n_ch:
        raise InvalidParameterError(f"2m = {2 * m} filters exceed {n_ch} channels")
    c1 = _shrink(c1_raw, shrinkage)
    c2 = _shrink(c2_raw, shrinkage)
    if not (np.isfinite(c1).all() and np.isfinite(c2).all()):
        raise NumericError("non-finite class covariance")
    composite = c1 + c2

    evals, u = eigh(composite)
    if evals[-1] <= 0 or evals[0] <= evals[-1] * 1e-12:
        raise DegenerateInputError("composite covariance is singular; increase shrinkage")
    whitener = (u / np.sqrt(evals)).T
    s = whitener @ c1 @ whitener.T
    s = (s + s.T) / 2.0
    lam, b = eigh(s)  # ascending
    w_full = b.T @ whitener

    order = np.argsort(lam)[::-1]
    lam = lam[order]
    w_full = w_full[order]
    keep = np.concatenate([np.arange(m), np.arange(n_ch - m, n_ch)])
    filters = w_full[keep]
    eigenvalues = lam[keep]

    norms = np.linalg.norm(filters, axis=1)
    if (norms == 0).any():
        raise DegenerateInputError("zero spatial filter")
    filters = filters / norms[:, None]
    # eigenvector sign is arbitrary; pin it for run-to-run comparability
    signs = np.sign(filters[np.arange(filters.shape[0]), np.argmax(np.abs(filters), axis=1)])
    filters = filters * signs[:, None]

    filters.setflags(write=False)
    eigenvalues.setflags(write=False)
    composite.setflags(write=False)
    return SpatialFilterSet(
        filters=filters,
        eigenvalues=eigenvalues,
        target_class=target_class,
        band=tuple(band),
        composite_cov=composite,
    )


def csp_fit(
    target_trials: Sequence[np.ndarray],
    rest_trials: Sequence[np.ndarray],
    m: int = 3,
    shrinkage: float = 0.05,
    target_class: int = 0,
    band: tuple[float, float] = BROADBAND,
) -> SpatialFilterSet:
    """Fit one-vs-rest CSP filters: m per extreme of the eigenvalue spectrum.

    Class covariances are averaged over trials, shrunk toward the scaled
    identity, and the generalized eigenproblem is solved by whitening the
    composite covariance. Rows are unit-norm with the largest-magnitude
    entry positive, ordered by descending eigenvalue.
    """
    if not len(target_trials) or not len(rest_trials):
        raise InvalidParameterError("both trial lists must be non-empty")
    c1 = _stack_covariances(np.asarray(target_trials, dtype=np.float64)).mean(axis=0)
    c2 = _stack_covariances(np.asarray(rest_trials, dtype=np.float64)).mean(axis=0)
    return _csp_from_covariances(c1, c2, m, shrinkage, target_class, band)


def csp_features(trial_data: np.ndarray, fs: SpatialFilterSet) -> np.ndarray:
    """Log of normalized projected variances, one per spatial filter."""
    x = np.asarray(trial_data, dtype=np.float64)
    if x.shape[0] != fs.filters.shape[1]:
        raise InvalidParameterError(
            f"trial has {x.shape[0]} channels, filters expect {fs.filters.shape[1]}"
        )
    z = fs.filters @ (x - x.mean(axis=1, keepdims=True))
    v = np.mean(z * z, axis=1)
    total = v.sum()
    if not np.isfinite(total) or total <= 0.0 or (v <= 0.0).any():
        raise DegenerateInputError("zero projected variance")
    return np.log(v / total)


def spatial_patterns(fs: SpatialFilterSet) -> np.ndarray:
    """Covariance-weighted pattern transform: one column per filter.

    Patterns (forward-model columns) are what planted source topographies
    should be compared against, not the filters themselves.
    """
    w = fs.filters
    cw = fs.composite_cov @ w.T  # (channels, 2m)
    scale = np.einsum("ij,ji->i", w, cw)  # w_i^T C w_i
    return cw / scale


def _filtered(stack: np.ndarray, band: tuple[float, float], rate: float, order: int):
    if tuple(band) == BROADBAND:
        return stack
    return bandpass_matrix(stack, rate, band[0], band[1], order)


def _set_features_from_covs(covs: np.ndarray, fs: SpatialFilterSet) -> np.ndarray:
    """(n_trials, 2m) log-variance features from per-trial covariances.

    The features are variance *ratios*, so the covariances' trace
    normalization cancels and no second pass over the samples is needed.
    """
    v = np.einsum("fc,ncd,fd->nf", fs.filters, covs, fs.filters, optimize=True)
    total = v.sum(axis=1, keepdims=True)
    if (total <= 0).any() or (v <= 0).any() or not np.isfinite(v).all():
        raise DegenerateInputError("zero projected variance")
    return np.log(v / total)


def fit_transform_bands(
    trials: Sequence[np.ndarray],
    classes: Sequence[int],
    bands: Sequence[tuple[float, float]] = DEFAULT_BANDS,
    m: int = 3,
    shrinkage: float = 0.05,
    sample_rate_hz: float = 1000.0,
    order: int = 4,
) -> tuple[list[SpatialFilterSet], np.ndarray, tuple]:
    """Fit per-(band, class) one-vs-rest CSP and return training features.

    Each band is filtered exactly once; per-trial covariances feed every
    target class's C1/C2 means. Returns (filter sets ordered by
    (band, class), feature matrix, layout descriptor).
    """
    if not bands:
        raise InvalidParameterError("need at least one band")
    y = np.asarray(classes, dtype=np.int64)
    stack = np.asarray(trials, dtype=np.float64)
    if stack.ndim != 3:
        raise InvalidParameterError("trials must share one (channels, samples) shape")
    if stack.shape[0] != y.shape[0]:
        raise InvalidParameterError("trial/class count mismatch")
    uniq = np.unique(y)
    if uniq.size < 2:
        raise InvalidParameterError("need at least two classes")

    sets: list[SpatialFilterSet] = []
    cols: list[np.ndarray] = []
    layout: list[tuple] = []
    for band in bands:
        covs = _stack_covariances(_filtered(stack, band, sample_rate_hz, order))
        sums = {int(c): covs[y == c].sum(axis=0) for c in uniq}
        counts = {int(c): int((y == c).sum()) for c in uniq}
        total_sum = covs.sum(axis=0)
        for target in (int(c) for c in uniq):
            c1 = sums[target] / counts[target]
            n_rest = covs.shape[0] - counts[target]
            c2 = (total_sum - sums[target]) / n_rest
            fs = _csp_from_covariances(c1, c2, m, shrinkage, target, tuple(band))
            sets.append(fs)
            cols.append(_set_features_from_covs(covs, fs))
            layout.extend((fs.band, fs.target_class, j) for j in range(fs.filters.shape[0]))
    return sets, np.hstack(cols), tuple(layout)


def transform_bands(
    trials: Sequence[np.ndarray],
    sets: Sequence[SpatialFilterSet],
    sample_rate_hz: float = 1000.0,
    order: int = 4,
) -> tuple[np.ndarray, tuple]:
    """Feature matrix for fitted filter sets; one filtering pass per band."""
    stack = np.asarray(trials, dtype=np.float64)
    if stack.ndim != 3:
        raise InvalidParameterError("trials must share one (channels, samples) shape")
    cov_cache: dict[tuple[float, float], np.ndarray] = {}
    cols = []
    layout: list[tuple] = []
    for fs in sets:
        band = tuple(fs.band)
        if band not in cov_cache:
            cov_cache[band] = _stack_covariances(_filtered(stack, band, sample_rate_hz, order))
        cols.append(_set_features_from_covs(cov_cache[band], fs))
        layout.extend((fs.band, fs.target_class, j) for j in range(fs.filters.shape[0]))
    return np.hstack(cols), tuple(layout)


def fbcsp_fit(
    trials_by_class: Mapping[int, Sequence[np.ndarray]],
    bands: Sequence[tuple[float, float]] = DEFAULT_BANDS,
    m: int = 3,
    shrinkage: float = 0.05,
    sample_rate_hz: float = 1000.0,
    order: int = 4,
) -> list[SpatialFilterSet]:
    """Per-band, per-class one-vs-rest CSP fits, ordered by (band, class)."""
    classes = sorted(trials_by_class)
    if any(len(trials_by_class[c]) == 0 for c in classes):
        raise InvalidParameterError("every class needs at least one trial")
    trials = [t for c in classes for t in trials_by_class[c]]
    y = [c for c in classes for _ in trials_by_class[c]]
    sets, _, _ = fit_transform_bands(
        trials, y, bands=bands, m=m, shrinkage=shrinkage,
        sample_rate_hz=sample_rate_hz, order=order,
    )
    return sets


def fbcsp_feature_matrix(
    trials: Sequence[np.ndarray],
    sets: Sequence[SpatialFilterSet],
    sample_rate_hz: float = 1000.0,
    order: int = 4,
) -> tuple[np.ndarray, tuple]:
    """Feature matrix (n_trials, n_sets * 2m) plus its layout descriptor."""
    return transform_bands(trials, sets, sample_rate_hz, order)


def select_features(
    features: np.ndarray | Sequence[FeatureVector],
    classes: Sequence[int],
    k: int,
    n_bins: int = 8,
) -> list[int]:
    """Top-k feature indices by mutual information with the class label.

    Each feature is discretized into quantile bins before estimating MI
    from the joint histogram. Output is rank-ordered; exact MI ties break
    toward the lower index.
    """
    if k <= 0:
        raise InvalidParameterError("k must be positive")
    x = _as_matrix(features)
    y = np.asarray(classes)
    if x.shape[0] != y.shape[0]:
        raise InvalidParameterError("feature/class count mismatch")
    if np.unique(y).size < 2:
        raise InvalidParameterError("need at least two classes")
    if k > x.shape[1]:
        raise InvalidParameterError(f"k={k} exceeds {x.shape[1]} features")

    mi = np.array([_binned_mi(x[:, j], y, n_bins) for j in range(x.shape[1])])
    order = np.lexsort((np.arange(mi.size), -mi))
    return [int(j) for j in order[:k]]


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.atleast_2d(features)
    return np.asarray([fv.values for fv in features], dtype=np.float64)


def _binned_mi(x: np.ndarray, y: np.ndarray, n_bins: int) -> float:
    """Mutual information (nats) between a quantile-binned feature and labels."""
    edges = np.quantile(x, np.linspace(0.0, 1.0, n_bins + 1)[1:-1])
    bx = np.searchsorted(edges, x, side="right")
    classes, cy = np.unique(y, return_inverse=True)
    joint = np.zeros((n_bins, classes.size))
    np.add.at(joint, (bx, cy), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / (px @ py)[nz])))
