"""Signal containers, zero-phase digital filtering, and windowing.

All operations are pure: they validate their inputs, never mutate them,
and return freshly allocated outputs, so repeated application yields
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import signal as sps

from . import kernels
from .errors import InvalidParameterError, OutOfRangeError

__all__ = [
    "Modality",
    "Recording",
    "TrialEvent",
    "Trial",
    "Segment",
    "bandpass",
    "notch",
    "extract_trials",
    "segment_trial",
    "segment_count",
    "median_smooth",
    "bandpass_matrix",
    "notch_matrix",
]

PARADIGMS = ("ME", "MI")


class Modality(Enum):
    EEG = 0
    EMG = 1


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Recording:
    """Multichannel sampled signal, channel-major.

    ``samples`` is marked read-only on construction; filtering returns new
    recordings instead of modifying in place.
    """

    modality: Modality
    sample_rate_hz: int
    channel_names: tuple[str, ...]
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        samples = np.atleast_2d(np.asarray(self.samples))
        object.__setattr__(self, "samples", _readonly(samples))
        if self.sample_rate_hz <= 0:
            raise InvalidParameterError("sample_rate_hz must be positive")
        if samples.shape[0] != len(self.channel_names):
            raise InvalidParameterError(
                f"{len(self.channel_names)} channel names for "
                f"{samples.shape[0]} signal rows"
            )
        if not np.isfinite(samples).all():
            raise InvalidParameterError("samples contain NaN or Inf")

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def replace_samples(self, samples: np.ndarray) -> "Recording":
        return Recording(self.modality, self.sample_rate_hz, self.channel_names, samples)


@dataclass(frozen=True, order=True)
class TrialEvent:
    trial_id: int
    class_label: int
    onset_sample: int
    paradigm: str = "ME"

    def __post_init__(self):
        if self.trial_id < 0:
            raise InvalidParameterError("trial_id must be non-negative")
        if self.paradigm not in PARADIGMS:
            raise InvalidParameterError(f"paradigm must be one of {PARADIGMS}")
        if self.onset_sample < 0:
            raise InvalidParameterError("onset_sample must be non-negative")


@dataclass(frozen=True)
class Trial:
    """One fixed-length epoch cut out of a recording."""

    trial_id: int
    class_label: int
    paradigm: str
    sample_rate_hz: int
    data: np.ndarray  # (channels, samples), read-only

    def __post_init__(self):
        object.__setattr__(self, "data", _readonly(self.data))

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Segment:
    """A windowed slice of a trial, with provenance."""

    source_trial_id: int
    class_label: int
    segment_index: int
    data: np.ndarray  # (channels, window), read-only view into the trial

    def __post_init__(self):
        object.__setattr__(self, "data", _readonly(self.data))


def _check_band(low_hz: float, high_hz: float, nyquist: float) -> None:
    if not (0 < low_hz < high_hz):
        raise InvalidParameterError(
            f"need 0 < low < high, got ({low_hz}, {high_hz})"
        )
    if high_hz > nyquist:
        raise InvalidParameterError(
            f"band edge {high_hz} Hz beyond Nyquist {nyquist} Hz"
        )


def _bandpass_sos(low_hz: float, high_hz: float, order: int, rate: float):
    nyquist = rate / 2.0
    _check_band(low_hz, high_hz, nyquist)
    if order < 2 or order % 2 != 0:
        raise InvalidParameterError(f"order must be even and >= 2, got {order}")
    # A band reaching Nyquist (the 10-500 Hz EMG band at 1 kHz) is a
    # highpass: there is no upper transition band left to realize.
    if high_hz >= nyquist:
        return sps.butter(order, low_hz, btype="highpass", fs=rate, output="sos")
    return sps.butter(order, [low_hz, high_hz], btype="bandpass", fs=rate, output="sos")


def bandpass_matrix(
    data: np.ndarray, rate: float, low_hz: float, high_hz: float, order: int = 4
) -> np.ndarray:
    """Zero-phase Butterworth bandpass along the last axis.

    Forward-backward application with reflect padding of 3x the design
    order, so the result has no phase shift and deterministic edges.
    """
    sos = _bandpass_sos(low_hz, high_hz, order, rate)
    return sps.sosfiltfilt(sos, data, axis=-1, padtype="even", padlen=3 * order)


def notch_matrix(data: np.ndarray, rate: float, center_hz: float, q: float = 30.0) -> np.ndarray:
    """Zero-phase IIR notch along the last axis."""
    nyquist = rate / 2.0
    if not (0 < center_hz < nyquist):
        raise InvalidParameterError(
            f"notch frequency {center_hz} Hz outside (0, {nyquist}) Hz"
        )
    if q <= 0:
        raise InvalidParameterError("q must be positive")
    b, a = sps.iirnotch(center_hz, q, fs=rate)
    sos = sps.tf2sos(b, a)
    return sps.sosfiltfilt(sos, data, axis=-1, padtype="even", padlen=6)


def bandpass(rec: Recording, low_hz: float, high_hz: float, order: int = 4) -> Recording:
    """Return a new recording band-limited to [low_hz, high_hz]."""
    return rec.replace_samples(
        bandpass_matrix(rec.samples, rec.sample_rate_hz, low_hz, high_hz, order)
    )


def notch(rec: Recording, center_hz: float, q: float = 30.0) -> Recording:
    """Return a new recording with a narrow notch at ``center_hz``."""
    return rec.replace_samples(notch_matrix(rec.samples, rec.sample_rate_hz, center_hz, q))


def extract_trials(
    rec: Recording, events: Sequence[TrialEvent], duration_s: float
) -> list[Trial]:
    """Cut one fixed-length trial per event, in event order."""
    n = int(round(duration_s * rec.sample_rate_hz))
    if n <= 0:
        raise InvalidParameterError("duration_s must span at least one sample")
    trials = []
    for ev in events:
        stop = ev.onset_sample + n
        if stop > rec.n_samples:
            raise OutOfRangeError(
                f"trial {ev.trial_id}: window [{ev.onset_sample}, {stop}) "
                f"exceeds recording length {rec.n_samples}"
            )
        data = np.array(rec.samples[:, ev.onset_sample:stop], dtype=np.float64)
        trials.append(
            Trial(ev.trial_id, ev.class_label, ev.paradigm, rec.sample_rate_hz, data)
        )
    return trials


def segment_count(n_samples: int, window: int, step: int) -> int:
    return (n_samples - window) // step + 1


def segment_trial(trial: Trial, window_ms: float = 500.0, step_ms: float = 250.0) -> list[Segment]:
    """Slide a window over the trial and return the covered segments.

    Segment ``i`` spans samples ``[i*step, i*step + window)``; data are
    zero-copy views into the trial.
    """
    rate = trial.sample_rate_hz
    window = int(round(window_ms * rate / 1000.0))
    step = int(round(step_ms * rate / 1000.0))
    if step <= 0:
        raise InvalidParameterError("step_ms must be positive")
    if window <= 0 or window > trial.n_samples:
        raise InvalidParameterError(
            f"window of {window} samples does not fit trial of {trial.n_samples}"
        )
    out = []
    for i in range(segment_count(trial.n_samples, window, step)):
        start = i * step
        out.append(
            Segment(
                source_trial_id=trial.trial_id,
                class_label=trial.class_label,
                segment_index=i,
                data=trial.data[:, start:start + window],
            )
        )
    return out


def median_smooth(data: np.ndarray, kernel_len: int) -> np.ndarray:
    """Per-channel sliding median with edge replication.

    ``kernel_len`` must be odd; 1 is the identity.
    """
    data = np.asarray(data)
    if kernel_len < 1 or kernel_len % 2 == 0:
        raise InvalidParameterError(f"kernel_len must be odd and >= 1, got {kernel_len}")
    squeeze = data.ndim == 1
    mat = np.atleast_2d(data)
    if kernel_len > mat.shape[1]:
        raise InvalidParameterError(
            f"kernel_len {kernel_len} exceeds signal length {mat.shape[1]}"
        )
    out = kernels.median_filter_rows(np.ascontiguousarray(mat, dtype=np.float64), kernel_len)
    return out[0] if squeeze else out
