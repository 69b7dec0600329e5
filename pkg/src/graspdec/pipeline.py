"""Dataset assembly: preprocessing, trial extraction, and labeling.

Turns raw recordings plus an event list into the per-paradigm trial sets
and per-trial label sequences the CV harness consumes. Executed-movement
labels come from the EMG channels; imagery trials recall the class
templates built from the executed block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InvalidParameterError, MissingTemplateError
from .labels import (
    EmgLabel,
    LabelTemplate,
    assign_mi_labels,
    build_label,
    build_templates,
)
from .signals import (
    Recording,
    Trial,
    TrialEvent,
    bandpass,
    notch,
    segment_trial,
)
from .signals import extract_trials as _extract

__all__ = [
    "ParadigmData",
    "select_channels",
    "preprocess_emg",
    "preprocess_eeg",
    "label_me_trials",
    "me_templates",
    "prepare_paradigm",
]


@dataclass(frozen=True)
class ParadigmData:
    paradigm: str
    trials: tuple[Trial, ...]
    labels_by_trial: Mapping[int, tuple[EmgLabel, ...]]


def select_channels(rec: Recording, names: Sequence[str] | None) -> Recording:
    """Restrict a recording to a channel-name whitelist (None keeps all)."""
    if names is None:
        return rec
    missing = [n for n in names if n not in rec.channel_names]
    if missing:
        raise InvalidParameterError(f"unknown channels: {missing}")
    rows = [rec.channel_names.index(n) for n in names]
    return Recording(rec.modality, rec.sample_rate_hz, tuple(names), rec.samples[rows])


def preprocess_emg(rec: Recording, cfg: Mapping) -> Recording:
    """Notch then bandpass, per the recording-chain defaults."""
    p = cfg["preprocess"]
    if p["emg_notch_hz"] is not None:
        rec = notch(rec, p["emg_notch_hz"], p["notch_q"])
    if p["emg_band"] is not None:
        lo, hi = p["emg_band"]
        rec = bandpass(rec, lo, hi, p["filter_order"])
    return rec


def preprocess_eeg(rec: Recording, cfg: Mapping) -> Recording:
    """Channel whitelist plus optional broadband filtering.

    The baseline leaves EEG wideband here: method-specific bands (the
    8-30 Hz CSP band, the FBCSP sub-bands) are applied at feature time so
    augmentation operates on the full-band signal.
    """
    p = cfg["preprocess"]
    rec = select_channels(rec, p["channels"])
    if p["eeg_notch_hz"] is not None:
        rec = notch(rec, p["eeg_notch_hz"], p["notch_q"])
    if p["eeg_band"] is not None:
        lo, hi = p["eeg_band"]
        rec = bandpass(rec, lo, hi, p["filter_order"])
    return rec


def _paradigm_events(events: Sequence[TrialEvent], paradigm: str) -> list[TrialEvent]:
    selected = [ev for ev in events if ev.paradigm == paradigm]
    ids = [ev.trial_id for ev in selected]
    if len(set(ids)) != len(ids):
        raise InvalidParameterError(f"duplicate trial ids in {paradigm} events")
    return selected


def label_me_trials(
    emg: Recording, events: Sequence[TrialEvent], cfg: Mapping
) -> dict[int, tuple[EmgLabel, ...]]:
    """Segment the executed-movement EMG trials and label every window."""
    seg_cfg = cfg["segment"]
    me_events = _paradigm_events(events, "ME")
    trials = _extract(emg, me_events, seg_cfg["trial_duration_s"])
    reference = emg.n_channels - 1  # last electrode sits on non-muscle tissue
    out: dict[int, tuple[EmgLabel, ...]] = {}
    for trial in trials:
        segs = segment_trial(trial, seg_cfg["window_ms"], seg_cfg["step_ms"])
        out[trial.trial_id] = tuple(build_label(s, reference) for s in segs)
    return out


def me_templates(
    emg: Recording, events: Sequence[TrialEvent], cfg: Mapping
) -> list[LabelTemplate]:
    labels = [lab for labs in label_me_trials(emg, events, cfg).values() for lab in labs]
    return build_templates(labels)


def prepare_paradigm(
    eeg: Recording,
    emg: Recording | None,
    events: Sequence[TrialEvent],
    cfg: Mapping,
    paradigm: str,
    templates: Sequence[LabelTemplate] | None = None,
) -> ParadigmData:
    """Assemble trials plus per-trial label sequences for one paradigm.

    ME labels are computed from the simultaneous EMG; MI labels are
    recalled from the class templates (built from the ME block when not
    supplied).
    """
    seg_cfg = cfg["segment"]
    par_events = _paradigm_events(events, paradigm)
    if not par_events:
        raise InvalidParameterError(f"no {paradigm} events in the session")
    eeg_pp = preprocess_eeg(eeg, cfg)
    trials = tuple(_extract(eeg_pp, par_events, seg_cfg["trial_duration_s"]))

    if paradigm == "ME":
        if emg is None:
            raise InvalidParameterError("ME labeling requires the EMG recording")
        labels = label_me_trials(preprocess_emg(emg, cfg), events, cfg)
    else:
        if templates is None:
            if emg is None:
                raise MissingTemplateError(
                    "MI labeling needs ME-derived templates or the EMG recording"
                )
            templates = me_templates(preprocess_emg(emg, cfg), events, cfg)
        labels = {t.trial_id: tuple(assign_mi_labels(t, templates)) for t in trials}

    return ParadigmData(paradigm=paradigm, trials=trials, labels_by_trial=labels)
