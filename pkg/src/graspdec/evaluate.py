"""Cross-validation harness: shared stratified folds, per-fold pipelines
with pre-augmentation test isolation, confusion matrices, and paired
significance testing.

The four compared methods (CSP, CSP_DA, FBCSP, FBCSP_DA) always see the
same fold assignments, so accuracy differences are paired by fold.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from . import svm
from .augment import audit_provenance, augment_dataset, build_bank
from .csp import DEFAULT_BANDS, fit_transform_bands, select_features, transform_bands
from .errors import (
    InvalidParameterError,
    IsolationViolationError,
)
from .labels import EmgLabel
from .seeds import substream
from .signals import Trial

__all__ = [
    "METHODS",
    "CvConfig",
    "ConfusionMatrix",
    "MethodResult",
    "ComparisonReport",
    "stratified_folds",
    "run_fold",
    "run_comparison",
    "paired_test",
]

METHODS = ("CSP", "CSP_DA", "FBCSP", "FBCSP_DA")
CLASS_NAMES = ("Cyl", "Sph", "Pin", "Tri", "Lum")


@dataclass(frozen=True)
class CvConfig:
    method: str = "CSP"
    paradigm: str = "ME"
    n_repeats: int = 5
    n_folds: int = 5
    seed: int = 0
    # augmentation
    ratio: float = 0.6
    multiplier: int = 3
    include_originals: bool = True
    kernel_len: int = 11
    window_ms: float = 500.0
    step_ms: float = 250.0
    # features
    csp_band: tuple[float, float] = (8.0, 30.0)
    fb_bands: tuple[tuple[float, float], ...] = DEFAULT_BANDS
    m: int = 3
    k: int = 12
    shrinkage: float = 0.05
    filter_order: int = 4
    # classifier
    c_reg: float = 1.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidParameterError(f"unknown method {self.method!r}")
        if self.n_folds < 2:
            raise InvalidParameterError("n_folds must be >= 2")
        if self.n_repeats < 1:
            raise InvalidParameterError("n_repeats must be >= 1")

    @property
    def uses_augmentation(self) -> bool:
        return self.method.endswith("_DA")

    @property
    def bands(self) -> tuple[tuple[float, float], ...]:
        if self.method.startswith("FBCSP"):
            return tuple(tuple(b) for b in self.fb_bands)
        return (tuple(self.csp_band),)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Integer count matrix; rows are true classes, columns predictions."""

    counts: np.ndarray
    classes: tuple[int, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (len(self.classes), len(self.classes)):
            raise InvalidParameterError("confusion matrix shape/classes mismatch")
        if (counts < 0).any():
            raise InvalidParameterError("negative confusion counts")

    @staticmethod
    def from_predictions(y_true, y_pred, classes) -> "ConfusionMatrix":
        classes = tuple(classes)
        index = {c: i for i, c in enumerate(classes)}
        counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(y_true, y_pred, strict=True):
            counts[index[int(t)], index[int(p)]] += 1
        return ConfusionMatrix(counts=counts, classes=classes)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def row_percent(self) -> np.ndarray:
        sums = self.counts.sum(axis=1, keepdims=True).astype(np.float64)
        sums[sums == 0] = 1.0
        return 100.0 * self.counts / sums

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise InvalidParameterError("cannot add confusion matrices over different classes")
        return ConfusionMatrix(self.counts + other.counts, self.classes)


@dataclass(frozen=True)
class MethodResult:
    method: str
    accuracies: np.ndarray  # (n_repeats, n_folds), in percent
    confusion: ConfusionMatrix  # summed over folds
    confusion_percent: np.ndarray  # row-normalized percent, averaged over folds

    @property
    def mean_accuracy(self) -> float:
        return float(self.accuracies.mean())

    @property
    def std_accuracy(self) -> float:
        return float(self.accuracies.std(ddof=1)) if self.accuracies.size > 1 else 0.0


@dataclass(frozen=True)
class ComparisonReport:
    paradigm: str
    results: dict[str, MethodResult]
    p_values: dict[str, float]  # DA method -> p vs its non-DA counterpart
    classes: tuple[int, ...]
    seed: int
    n_repeats: int
    n_folds: int


def stratified_folds(
    classes: Sequence[int], n_folds: int, rng: np.random.Generator
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Class-balanced disjoint folds over trial positions.

    Each class's (shuffled) trials are spread across folds as evenly as
    possible; returns (train_idx, test_idx) index arrays per fold.
    """
    y = np.asarray(classes)
    if n_folds < 2:
        raise InvalidParameterError("n_folds must be >= 2")
    chunks: list[list[np.ndarray]] = [[] for _ in range(n_folds)]
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < n_folds:
            raise InvalidParameterError(
                f"class {cls} has {idx.size} trials for {n_folds} folds"
            )
        perm = rng.permutation(idx)
        for f, part in enumerate(np.array_split(perm, n_folds)):
            chunks[f].append(part)
    folds = []
    all_idx = np.arange(y.size)
    for f in range(n_folds):
        test = np.sort(np.concatenate(chunks[f]))
        mask = np.ones(y.size, dtype=bool)
        mask[test] = False
        folds.append((all_idx[mask], test))
    return folds


def _fit_and_classify(
    fit_data: list[np.ndarray],
    fit_classes: np.ndarray,
    test_data: list[np.ndarray],
    cfg: CvConfig,
    sample_rate_hz: float,
):
    sets, x_fit, _ = fit_transform_bands(
        fit_data,
        fit_classes,
        bands=cfg.bands,
        m=cfg.m,
        shrinkage=cfg.shrinkage,
        sample_rate_hz=sample_rate_hz,
        order=cfg.filter_order,
    )
    if cfg.method.startswith("FBCSP"):
        selected = select_features(x_fit, fit_classes, min(cfg.k, x_fit.shape[1]))
    else:
        selected = None  # single-band CSP keeps all 2m x n_classes features
    model = svm.train(x_fit, fit_classes, c_reg=cfg.c_reg, selected=selected)
    x_test, _ = transform_bands(test_data, sets, sample_rate_hz, cfg.filter_order)
    pred, _ = svm.predict_batch(model, x_test)
    return pred


def run_fold(
    train_trials: Sequence[Trial],
    test_trials: Sequence[Trial],
    cfg: CvConfig,
    labels_by_trial: Mapping[int, Sequence[EmgLabel]] | None = None,
) -> tuple[float, ConfusionMatrix]:
    """Train on one fold and evaluate on its untouched test trials.

    For *_DA methods the segment bank is built from the training trials
    only, the augmented variants are audited against the training ids,
    and any leak raises IsolationViolationError.
    """
    train_ids = {t.trial_id for t in train_trials}
    test_ids = {t.trial_id for t in test_trials}
    if train_ids & test_ids:
        raise InvalidParameterError(
            f"train/test overlap: {sorted(train_ids & test_ids)}"
        )
    if not train_trials or not test_trials:
        raise InvalidParameterError("empty train or test split")
    rate = train_trials[0].sample_rate_hz

    fit_data = [np.asarray(t.data, dtype=np.float64) for t in train_trials]
    fit_classes = [t.class_label for t in train_trials]

    if cfg.uses_augmentation:
        if labels_by_trial is None:
            raise InvalidParameterError(f"{cfg.method} requires segment labels")
        flat_labels = [lab for t in train_trials for lab in labels_by_trial[t.trial_id]]
        bank = build_bank(train_trials, flat_labels, cfg.window_ms, cfg.step_ms)
        leaked = bank.training_trial_ids & test_ids
        if leaked:
            raise IsolationViolationError(
                f"bank holds segments from test trials {sorted(leaked)}"
            )
        augmented = augment_dataset(
            train_trials, bank, cfg.multiplier, cfg.ratio, cfg.kernel_len, seed=cfg.seed
        )
        violations = audit_provenance(augmented, train_ids)
        if violations:
            raise IsolationViolationError(
                f"augmented data sourced from outside the training split: "
                f"{violations[:5]}"
            )
        if cfg.include_originals:
            fit_data += [a.data for a in augmented]
            fit_classes += [a.class_label for a in augmented]
        elif augmented:
            fit_data = [a.data for a in augmented]
            fit_classes = [a.class_label for a in augmented]
        else:
            raise InvalidParameterError(
                "include_originals=False with multiplier=0 leaves no training data"
            )

    pred = _fit_and_classify(
        fit_data,
        np.asarray(fit_classes, dtype=np.int64),
        [np.asarray(t.data, dtype=np.float64) for t in test_trials],
        cfg,
        rate,
    )
    y_true = [t.class_label for t in test_trials]
    classes = tuple(sorted({t.class_label for t in train_trials} | set(y_true)))
    cm = ConfusionMatrix.from_predictions(y_true, pred, classes)
    return cm.accuracy, cm


def paired_test(acc_a: Sequence[float], acc_b: Sequence[float]) -> float:
    """Two-tailed paired t-test p-value on per-fold accuracy differences.

    All-zero differences return 1.0; zero-variance nonzero differences
    return 0.0 (the degenerate t -> inf limit).
    """
    a = np.asarray(acc_a, dtype=np.float64)
    b = np.asarray(acc_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise InvalidParameterError("need two equal-length vectors of >= 2 accuracies")
    d = a - b
    if np.all(d == 0.0):
        return 1.0
    sd = d.std(ddof=1)
    if sd == 0.0:
        return 0.0
    t = d.mean() / (sd / np.sqrt(d.size))
    return float(2.0 * stats.t.sf(abs(t), d.size - 1))


def _fold_seed(base_seed: int, repeat: int, fold: int) -> int:
    return int(substream(base_seed, "fold", repeat, fold).integers(2**62))


def run_comparison(
    trials: Sequence[Trial],
    cfg_base: CvConfig,
    labels_by_trial: Mapping[int, Sequence[EmgLabel]] | None = None,
    methods: Sequence[str] = METHODS,
    threads: int = 1,
) -> ComparisonReport:
    """Repeated stratified CV of every method on shared fold assignments."""
    for m in methods:
        if m not in METHODS:
            raise InvalidParameterError(f"unknown method {m!r}")
    y = np.asarray([t.class_label for t in trials])
    classes = tuple(int(c) for c in np.unique(y))

    fold_plan = []  # (repeat, fold, train trials, test trials, fold seed)
    for rep in range(cfg_base.n_repeats):
        folds = stratified_folds(y, cfg_base.n_folds, substream(cfg_base.seed, "folds", rep))
        for f, (tr, te) in enumerate(folds):
            fold_plan.append(
                (
                    rep,
                    f,
                    [trials[i] for i in tr],
                    [trials[i] for i in te],
                    _fold_seed(cfg_base.seed, rep, f),
                )
            )

    results: dict[str, MethodResult] = {}
    for method in methods:
        acc = np.zeros((cfg_base.n_repeats, cfg_base.n_folds))
        percents = []
        total_cm: ConfusionMatrix | None = None

        def one(entry):
            rep, f, tr, te, fseed = entry
            cfg = replace(cfg_base, method=method, seed=fseed)
            return rep, f, run_fold(tr, te, cfg, labels_by_trial)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcomes = list(pool.map(one, fold_plan))
        else:
            outcomes = [one(entry) for entry in fold_plan]

        for rep, f, (fold_acc, cm) in outcomes:
            acc[rep, f] = 100.0 * fold_acc
            percents.append(cm.row_percent())
            total_cm = cm if total_cm is None else total_cm + cm
        assert total_cm is not None
        results[method] = MethodResult(
            method=method,
            accuracies=acc,
            confusion=total_cm,
            confusion_percent=np.mean(percents, axis=0),
        )

    p_values: dict[str, float] = {}
    for da, plain in (("CSP_DA", "CSP"), ("FBCSP_DA", "FBCSP")):
        if da in results and plain in results:
            p_values[da] = paired_test(
                results[da].accuracies.ravel(), results[plain].accuracies.ravel()
            )

    return ComparisonReport(
        paradigm=cfg_base.paradigm,
        results=results,
        p_values=p_values,
        classes=classes,
        seed=cfg_base.seed,
        n_repeats=cfg_base.n_repeats,
        n_folds=cfg_base.n_folds,
    )
