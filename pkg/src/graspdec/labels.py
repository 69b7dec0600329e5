"""Per-segment muscle activation labels and label matching.

A label is the vector of reference-corrected RMS amplitudes of the four
active forearm channels over one 500 ms window. Labels are matched by
mean squared error; the nearest-neighbour scan is the backbone of the
segment-switching augmentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (
    IncompleteTemplateError,
    InvalidParameterError,
    MissingTemplateError,
    NoCandidateError,
)
from .signals import Segment, Trial

__all__ = [
    "EmgLabel",
    "LabelTemplate",
    "rms",
    "build_label",
    "mse",
    "nearest_label",
    "build_templates",
    "assign_mi_labels",
]


@dataclass(frozen=True)
class EmgLabel:
    """RMS activation vector of the active EMG channels, with provenance."""

    rms: np.ndarray  # (n_active_channels,), non-negative
    source_trial_id: int
    class_label: int
    segment_index: int

    def __post_init__(self):
        vec = np.asarray(self.rms, dtype=np.float64)
        vec.setflags(write=False)
        object.__setattr__(self, "rms", vec)
        if vec.ndim != 1 or vec.size == 0:
            raise InvalidParameterError("label vector must be 1-D and non-empty")
        if not np.isfinite(vec).all() or (vec < 0).any():
            raise InvalidParameterError("label entries must be finite and >= 0")


@dataclass(frozen=True)
class LabelTemplate:
    """Mean label per segment index for one class."""

    class_label: int
    entries: tuple[EmgLabel, ...]  # one per segment index, in order

    def __post_init__(self):
        for i, lab in enumerate(self.entries):
            if lab.segment_index != i:
                raise InvalidParameterError(
                    f"template entry {i} carries segment_index {lab.segment_index}"
                )


def rms(segment: np.ndarray) -> np.ndarray:
    """Root mean square per channel: sqrt(mean(x^2))."""
    data = np.atleast_2d(np.asarray(segment, dtype=np.float64))
    if data.shape[1] < 1:
        raise InvalidParameterError("empty segment")
    return np.sqrt(np.mean(data * data, axis=1))


def build_label(emg_segment: Segment, reference_index: int) -> EmgLabel:
    """Label a segment: active-channel RMS minus reference RMS, clamped at 0."""
    n_ch = emg_segment.data.shape[0]
    if not 0 <= reference_index < n_ch:
        raise InvalidParameterError(
            f"reference_index {reference_index} out of range for {n_ch} channels"
        )
    all_rms = rms(emg_segment.data)
    active = np.delete(all_rms, reference_index)
    return EmgLabel(
        rms=np.maximum(0.0, active - all_rms[reference_index]),
        source_trial_id=emg_segment.source_trial_id,
        class_label=emg_segment.class_label,
        segment_index=emg_segment.segment_index,
    )


def mse(a: EmgLabel, b: EmgLabel) -> float:
    """Mean squared difference between two label vectors."""
    if a.rms.shape != b.rms.shape:
        raise InvalidParameterError(
            f"label length mismatch: {a.rms.shape[0]} vs {b.rms.shape[0]}"
        )
    diff = a.rms - b.rms
    return float(np.mean(diff * diff))


def pool_arrays(pool: Sequence[EmgLabel]):
    """Stack a label pool into the flat arrays the scan kernel consumes."""
    mat = np.ascontiguousarray([lab.rms for lab in pool], dtype=np.float64)
    trial_ids = np.asarray([lab.source_trial_id for lab in pool], dtype=np.int64)
    seg_idx = np.asarray([lab.segment_index for lab in pool], dtype=np.int64)
    return mat, trial_ids, seg_idx


def nearest_label(
    query: EmgLabel,
    pool: Sequence[EmgLabel],
    exclude: Callable[[EmgLabel], bool] | None = None,
) -> int:
    """Index of the non-excluded pool entry with the smallest MSE to ``query``.

    Equidistant entries resolve to the lowest (source_trial_id,
    segment_index); this makes the whole augmentation pipeline
    reproducible under a fixed seed.
    """
    if len(pool) == 0:
        raise NoCandidateError("empty label pool")
    mat, trial_ids, seg_idx = pool_arrays(pool)
    if mat.shape[1] != query.rms.shape[0]:
        raise InvalidParameterError("query/pool label length mismatch")
    if exclude is None:
        excluded = np.zeros(len(pool), dtype=np.uint8)
    else:
        excluded = np.fromiter(
            (1 if exclude(lab) else 0 for lab in pool), dtype=np.uint8, count=len(pool)
        )
    best = kernels.nearest_label_scan(mat, query.rms, excluded, trial_ids, seg_idx)
    if best < 0:
        raise NoCandidateError("every pool entry is excluded")
    return best


def build_templates(me_labels: Sequence[EmgLabel]) -> list[LabelTemplate]:
    """Average executed-movement labels into per-class, per-index templates."""
    if not me_labels:
        raise InvalidParameterError("no labels to build templates from")
    n_seg = max(lab.segment_index for lab in me_labels) + 1
    classes = sorted({lab.class_label for lab in me_labels})
    cells: dict[tuple[int, int], list[np.ndarray]] = {}
    for lab in me_labels:
        cells.setdefault((lab.class_label, lab.segment_index), []).append(lab.rms)

    templates = []
    for cls in classes:
        entries = []
        for i in range(n_seg):
            vecs = cells.get((cls, i))
            if not vecs:
                raise IncompleteTemplateError(f"no labels for class {cls}, segment {i}")
            entries.append(
                EmgLabel(
                    rms=np.mean(vecs, axis=0),
                    source_trial_id=-1,
                    class_label=cls,
                    segment_index=i,
                )
            )
        templates.append(LabelTemplate(class_label=cls, entries=tuple(entries)))
    return templates


def assign_mi_labels(
    mi_trial: Trial, templates: Sequence[LabelTemplate] | Mapping[int, LabelTemplate]
) -> list[EmgLabel]:
    """Recall the class template for an imagery trial, re-stamped with its provenance."""
    if isinstance(templates, Mapping):
        by_class = dict(templates)
    else:
        by_class = {t.class_label: t for t in templates}
    template = by_class.get(mi_trial.class_label)
    if template is None:
        raise MissingTemplateError(
            f"no label template for class {mi_trial.class_label}"
        )
    return [
        EmgLabel(
            rms=entry.rms,
            source_trial_id=mi_trial.trial_id,
            class_label=mi_trial.class_label,
            segment_index=entry.segment_index,
        )
        for entry in template.entries
    ]
