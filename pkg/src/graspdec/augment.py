"""Segmented data bank and label-matched segment-switching augmentation.

Training trials are cut into overlapping labeled segments that form a
bank. An augmented trial replaces a random subset of its segments with
the bank entries whose labels are nearest in MSE (its own segments are
never candidates), reassembles the windows by overlap averaging, and
median-smooths the switched seams.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    IncompleteLabelError,
    InvalidParameterError,
    NoCandidateError,
)
from .labels import EmgLabel
from .seeds import substream
from .signals import Segment, Trial, segment_trial

__all__ = [
    "BankEntry",
    "SegmentBank",
    "SegmentProvenance",
    "AugmentedTrial",
    "build_bank",
    "select_switch_positions",
    "augment_trial",
    "augment_dataset",
    "audit_provenance",
]


@dataclass(frozen=True)
class BankEntry:
    eeg_segment: Segment
    label: EmgLabel

    def __post_init__(self):
        seg, lab = self.eeg_segment, self.label
        if (seg.source_trial_id, seg.class_label, seg.segment_index) != (
            lab.source_trial_id,
            lab.class_label,
            lab.segment_index,
        ):
            raise InvalidParameterError(
                f"segment/label provenance mismatch for trial {seg.source_trial_id}, "
                f"segment {seg.segment_index}"
            )


class SegmentBank:
    """Immutable pool of labeled EEG segments from training trials only."""

    def __init__(self, entries: Sequence[BankEntry], window_samples: int, step_samples: int):
        self.entries: tuple[BankEntry, ...] = tuple(entries)
        self.window_samples = window_samples
        self.step_samples = step_samples
        self.training_trial_ids = frozenset(
            e.eeg_segment.source_trial_id for e in self.entries
        )
        # flat arrays for the nearest-label scan kernel
        self.label_matrix = np.ascontiguousarray(
            [e.label.rms for e in self.entries], dtype=np.float64
        )
        self.trial_ids = np.asarray(
            [e.eeg_segment.source_trial_id for e in self.entries], dtype=np.int64
        )
        self.segment_indices = np.asarray(
            [e.eeg_segment.segment_index for e in self.entries], dtype=np.int64
        )
        self.label_matrix.setflags(write=False)
        self.trial_ids.setflags(write=False)
        self.segment_indices.setflags(write=False)

    def __len__(self) -> int:
        return len(self.entries)

    def labels_for_trial(self, trial_id: int) -> list[EmgLabel]:
        """Labels of one source trial, ordered by segment index."""
        labs = [e.label for e in self.entries if e.eeg_segment.source_trial_id == trial_id]
        labs.sort(key=lambda lab: lab.segment_index)
        return labs


@dataclass(frozen=True)
class SegmentProvenance:
    position: int
    source_trial_id: int
    source_segment_index: int
    switched: bool


@dataclass(frozen=True)
class AugmentedTrial:
    data: np.ndarray
    class_label: int
    paradigm: str
    sample_rate_hz: int
    base_trial_id: int
    provenance: tuple[SegmentProvenance, ...]

    def __post_init__(self):
        self.data.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def build_bank(
    eeg_trials: Sequence[Trial],
    labels: Sequence[EmgLabel],
    window_ms: float = 500.0,
    step_ms: float = 250.0,
) -> SegmentBank:
    """Segment the training trials and attach their labels.

    Raises IncompleteLabelError if any (trial, segment_index) pair has no
    label.
    """
    if not eeg_trials:
        raise InvalidParameterError("cannot build a bank from zero trials")
    by_key = {(lab.source_trial_id, lab.segment_index): lab for lab in labels}
    entries: list[BankEntry] = []
    window = step = 0
    for trial in eeg_trials:
        segs = segment_trial(trial, window_ms, step_ms)
        window = segs[0].data.shape[1]
        step = int(round(step_ms * trial.sample_rate_hz / 1000.0))
        for seg in segs:
            lab = by_key.get((seg.source_trial_id, seg.segment_index))
            if lab is None:
                raise IncompleteLabelError(
                    f"no label for trial {seg.source_trial_id}, "
                    f"segment {seg.segment_index}"
                )
            entries.append(BankEntry(eeg_segment=seg, label=lab))
    return SegmentBank(entries, window_samples=window, step_samples=step)


def select_switch_positions(
    n_segments: int, ratio: float, rng: np.random.Generator
) -> set[int]:
    """Uniform random subset of round(ratio * n_segments) positions."""
    if not 0.0 <= ratio <= 1.0:
        raise InvalidParameterError(f"ratio must be in [0, 1], got {ratio}")
    k = int(round(ratio * n_segments))
    if k == 0:
        return set()
    return set(int(i) for i in rng.choice(n_segments, size=k, replace=False))


def _reconstruct(chosen: list[np.ndarray], n_samples: int, step: int) -> np.ndarray:
    """Overlap-average the per-position windows back into a full trial."""
    n_ch, window = chosen[0].shape
    acc = np.zeros((n_ch, n_samples))
    cnt = np.zeros(n_samples)
    for i, block in enumerate(chosen):
        start = i * step
        acc[:, start:start + window] += block
        cnt[start:start + window] += 1.0
    return acc / cnt


def _smooth_seams(
    data: np.ndarray, boundaries: Sequence[int], kernel_len: int
) -> np.ndarray:
    """Median-filter a +/-kernel_len neighborhood around each boundary."""
    if kernel_len <= 1 or not boundaries:
        return data
    n = data.shape[1]
    margin = kernel_len // 2
    patches = []
    for b in sorted(set(boundaries)):
        r0, r1 = max(0, b - kernel_len), min(n, b + kernel_len + 1)
        s0, s1 = max(0, r0 - margin), min(n, r1 + margin)
        med = kernels.median_filter_rows(
            np.ascontiguousarray(data[:, s0:s1]), kernel_len
        )
        patches.append((r0, r1, med[:, r0 - s0:r1 - s0]))
    for r0, r1, patch in patches:
        data[:, r0:r1] = patch
    return data


def augment_trial(
    trial: Trial,
    trial_labels: Sequence[EmgLabel],
    bank: SegmentBank,
    ratio: float,
    kernel_len: int,
    rng: np.random.Generator,
) -> AugmentedTrial:
    """Synthesize one augmented variant of ``trial``.

    Selected positions are replaced by the bank segment with the nearest
    label (the trial's own segments excluded); unswitched positions keep
    the original window. Switched seams are median-smoothed.
    """
    if len(bank) == 0:
        raise NoCandidateError("empty segment bank")
    window, step = bank.window_samples, bank.step_samples
    n_positions = (trial.n_samples - window) // step + 1
    if (n_positions - 1) * step + window != trial.n_samples:
        raise InvalidParameterError(
            f"trial length {trial.n_samples} is not tiled by window {window}, "
            f"step {step}"
        )
    labels = sorted(trial_labels, key=lambda lab: lab.segment_index)
    if len(labels) != n_positions or any(
        lab.segment_index != i for i, lab in enumerate(labels)
    ):
        raise InvalidParameterError(
            f"expected one label per segment index 0..{n_positions - 1}"
        )

    switch = select_switch_positions(n_positions, ratio, rng)
    excluded = (bank.trial_ids == trial.trial_id).astype(np.uint8)

    chosen: list[np.ndarray] = []
    provenance: list[SegmentProvenance] = []
    for i in range(n_positions):
        start = i * step
        if i in switch:
            best = kernels.nearest_label_scan(
                bank.label_matrix,
                labels[i].rms,
                excluded,
                bank.trial_ids,
                bank.segment_indices,
            )
            if best < 0:
                raise NoCandidateError(
                    f"bank holds no segments outside trial {trial.trial_id}"
                )
            entry = bank.entries[best]
            chosen.append(np.asarray(entry.eeg_segment.data, dtype=np.float64))
            provenance.append(
                SegmentProvenance(
                    position=i,
                    source_trial_id=entry.eeg_segment.source_trial_id,
                    source_segment_index=entry.eeg_segment.segment_index,
                    switched=True,
                )
            )
        else:
            chosen.append(np.asarray(trial.data[:, start:start + window], dtype=np.float64))
            provenance.append(
                SegmentProvenance(
                    position=i,
                    source_trial_id=trial.trial_id,
                    source_segment_index=i,
                    switched=False,
                )
            )

    data = _reconstruct(chosen, trial.n_samples, step)
    boundaries = [
        b
        for i in sorted(switch)
        for b in (i * step, i * step + window)
        if 0 < b < trial.n_samples
    ]
    data = _smooth_seams(data, boundaries, kernel_len)
    return AugmentedTrial(
        data=data,
        class_label=trial.class_label,
        paradigm=trial.paradigm,
        sample_rate_hz=trial.sample_rate_hz,
        base_trial_id=trial.trial_id,
        provenance=tuple(provenance),
    )


def augment_dataset(
    training_trials: Sequence[Trial],
    bank: SegmentBank,
    multiplier: int,
    ratio: float,
    kernel_len: int,
    seed: int,
) -> list[AugmentedTrial]:
    """Generate ``multiplier`` independent variants per training trial.

    Each (trial, variant) pair draws from its own RNG substream, so the
    output is reproducible regardless of iteration order.
    """
    if multiplier < 0:
        raise InvalidParameterError("multiplier must be >= 0")
    out: list[AugmentedTrial] = []
    for trial in training_trials:
        labels = bank.labels_for_trial(trial.trial_id)
        for variant in range(multiplier):
            rng = substream(seed, "augment", trial.trial_id, variant)
            out.append(augment_trial(trial, labels, bank, ratio, kernel_len, rng))
    return out


def audit_provenance(
    augmented: Sequence[AugmentedTrial], allowed_trial_ids
) -> list[tuple[int, int, int]]:
    """Return (augmented index, position, offending trial id) leaks.

    Empty list means every provenance record points inside the allowed
    (training) trial set.
    """
    allowed = frozenset(allowed_trial_ids)
    violations = []
    for a_idx, aug in enumerate(augmented):
        for rec in aug.provenance:
            if rec.source_trial_id not in allowed:
                violations.append((a_idx, rec.position, rec.source_trial_id))
    return violations
