"""Seeded synthetic EEG/EMG session generator with planted ground truth.

Each class gets a fixed spatial pattern (EEG) and a muscle-by-segment
activation envelope (EMG), so both the spatial-filter path and the
labeling path have recoverable truth. Everything derives from the config
seed through keyed substreams: generation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .csp import SpatialFilterSet, spatial_patterns
from .errors import InvalidParameterError
from .seeds import substream
from .signals import Modality, Recording, TrialEvent, segment_count

__all__ = ["SynthConfig", "SynthTruth", "generate_session", "plant_check"]

EEG_CHANNEL_NAMES = tuple(
    [f"FC{i}" for i in range(1, 7)]
    + [f"C{i}" for i in range(1, 7)]
    + ["Cz"]
    + [f"CP{i}" for i in range(1, 7)]
    + ["CPz"]
)
EMG_CHANNEL_NAMES = ("CH1", "CH2", "CH3", "CH4", "REF")


@dataclass(frozen=True)
class SynthConfig:
    n_classes: int = 5
    trials_per_class: int = 50
    mi_trials_per_class: int = 50
    eeg_channels: int = 20
    emg_channels: int = 5
    sample_rate_hz: int = 1000
    trial_s: float = 4.0
    gap_s: float = 1.0
    lead_in_s: float = 1.0
    window_ms: float = 500.0
    step_ms: float = 250.0
    snr_db: float = 10.0
    emg_snr_db: float | None = None  # None: follow snr_db
    mi_gain: float = 0.75
    source_band: tuple[float, float] = (8.0, 12.0)
    pattern_mix: float = 0.45  # blend toward a shared direction (class overlap)
    pattern_jitter: float = 0.3  # per-trial topography wobble
    background_gain: float = 1.0  # in-band distractor source, random topography
    seed: int = 0
    patterns: np.ndarray | None = None  # (n_classes, eeg_channels)
    envelopes: np.ndarray | None = None  # (n_classes, muscles, n_segments)

    @property
    def trial_samples(self) -> int:
        return int(round(self.trial_s * self.sample_rate_hz))

    @property
    def n_segments(self) -> int:
        w = int(round(self.window_ms * self.sample_rate_hz / 1000.0))
        s = int(round(self.step_ms * self.sample_rate_hz / 1000.0))
        return segment_count(self.trial_samples, w, s)

    def validate(self) -> None:
        if self.n_classes < 2:
            raise InvalidParameterError("need at least two classes")
        if self.trials_per_class < 1:
            raise InvalidParameterError("trials_per_class must be >= 1")
        if self.mi_trials_per_class < 0:
            raise InvalidParameterError("mi_trials_per_class must be >= 0")
        if self.emg_channels < 2:
            raise InvalidParameterError("need at least one active EMG channel + reference")
        if self.eeg_channels < self.n_classes:
            raise InvalidParameterError("need at least n_classes EEG channels")
        if self.trial_s <= 0 or self.gap_s < 0 or self.sample_rate_hz <= 0:
            raise InvalidParameterError("invalid timing parameters")
        if not (math.isfinite(self.snr_db) or self.snr_db == math.inf):
            raise InvalidParameterError("snr_db must be finite or +inf")
        if not 0.0 <= self.pattern_mix < 1.0:
            raise InvalidParameterError("pattern_mix must be in [0, 1)")
        if self.pattern_jitter < 0 or self.background_gain < 0:
            raise InvalidParameterError("jitter and background gain must be >= 0")


@dataclass(frozen=True)
class SynthTruth:
    patterns: np.ndarray  # (n_classes, eeg_channels), unit-norm rows
    envelopes: np.ndarray  # (n_classes, muscles, n_segments)
    seed: int
    snr_db: float
    source_band: tuple[float, float]


def default_patterns(cfg: SynthConfig) -> np.ndarray:
    """Class patterns from the seed: orthonormal draws blended toward a
    shared direction, so classes overlap spatially like neighbouring
    motor-cortex sources rather than living on orthogonal axes."""
    rng = substream(cfg.seed, "patterns")
    g = rng.standard_normal((cfg.eeg_channels, cfg.n_classes + 1))
    q, _ = np.linalg.qr(g)
    shared = q[:, cfg.n_classes]
    pats = (1.0 - cfg.pattern_mix) * q[:, : cfg.n_classes].T + cfg.pattern_mix * shared
    pats /= np.linalg.norm(pats, axis=1, keepdims=True)
    signs = np.sign(pats[np.arange(cfg.n_classes), np.argmax(np.abs(pats), axis=1)])
    return pats * signs[:, None]


def default_envelopes(cfg: SynthConfig) -> np.ndarray:
    """Planted muscle activations: distinct mixing rows x class-timed bumps.

    Values are spaced widely enough that windowed RMS recovers their
    ordering even with the broadband carrier's sampling jitter.
    """
    n_muscles = cfg.emg_channels - 1
    base = np.array([1.0, 0.7, 0.45, 0.25])
    if n_muscles != base.size:
        base = np.linspace(1.0, 0.25, n_muscles)
    mixes = []
    for k in range(cfg.n_classes):
        if k < n_muscles:
            mixes.append(np.roll(base, k))
        else:
            mixes.append(base[::-1] * 0.85)
    mix = np.asarray(mixes)  # (n_classes, n_muscles)

    n_seg = cfg.n_segments
    idx = np.arange(n_seg)
    peaks = np.linspace(0.15, 0.85, cfg.n_classes) * (n_seg - 1)
    profiles = 0.4 + 0.6 * np.exp(-0.5 * ((idx[None, :] - peaks[:, None]) / 3.5) ** 2)
    return mix[:, :, None] * profiles[:, None, :]


def _one_over_f(rng: np.random.Generator, n_channels: int, n_samples: int, rate: float):
    """Unit-RMS 1/f-shaped noise: power falls 10 dB per decade."""
    white = rng.standard_normal((n_channels, n_samples))
    spec = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / rate)
    shape = 1.0 / np.sqrt(np.maximum(freqs, 1.0))
    shape[0] = 0.0
    out = np.fft.irfft(spec * shape, n=n_samples, axis=1)
    rms = np.sqrt(np.mean(out * out, axis=1, keepdims=True))
    return out / rms


def _interp_envelope(values: np.ndarray, centers: np.ndarray, n_samples: int) -> np.ndarray:
    return np.interp(np.arange(n_samples), centers, values)


def generate_session(cfg: SynthConfig):
    """Generate (eeg, emg, events, truth) for one synthetic session.

    ME trials carry both the planted EEG sources and the planted EMG
    activations; MI trials repeat the EEG structure at ``mi_gain`` with
    noise-only EMG (imagery produces no muscle activity).
    """
    cfg.validate()
    rate = cfg.sample_rate_hz
    n_trial = cfg.trial_samples
    n_gap = int(round(cfg.gap_s * rate))
    n_lead = int(round(cfg.lead_in_s * rate))

    patterns = cfg.patterns if cfg.patterns is not None else default_patterns(cfg)
    patterns = np.asarray(patterns, dtype=np.float64)
    if patterns.shape != (cfg.n_classes, cfg.eeg_channels):
        raise InvalidParameterError(
            f"patterns must be ({cfg.n_classes}, {cfg.eeg_channels})"
        )
    envelopes = cfg.envelopes if cfg.envelopes is not None else default_envelopes(cfg)
    envelopes = np.asarray(envelopes, dtype=np.float64)
    if envelopes.shape != (cfg.n_classes, cfg.emg_channels - 1, cfg.n_segments):
        raise InvalidParameterError(
            f"envelopes must be ({cfg.n_classes}, {cfg.emg_channels - 1}, {cfg.n_segments})"
        )
    if (envelopes < 0).any():
        raise InvalidParameterError("envelopes must be non-negative")

    # noise scale from the SNR: each unit-RMS source through a unit-norm
    # pattern spreads 1/n_ch mean-square power per channel, and the class
    # and background sources are independent so their powers add
    signal_power = (1.0 + cfg.background_gain**2) / cfg.eeg_channels
    if math.isinf(cfg.snr_db):
        sigma_eeg = 0.0
    else:
        sigma_eeg = math.sqrt(signal_power / 10.0 ** (cfg.snr_db / 10.0))
    emg_snr = cfg.snr_db if cfg.emg_snr_db is None else cfg.emg_snr_db
    if math.isinf(emg_snr):
        sigma_emg = 0.0
    else:
        sigma_emg = float(np.sqrt(np.mean(envelopes**2))) * 10.0 ** (-emg_snr / 20.0)

    n_me = cfg.n_classes * cfg.trials_per_class
    n_mi = cfg.n_classes * cfg.mi_trials_per_class
    n_trials = n_me + n_mi
    total = n_lead + n_trials * (n_trial + n_gap) + n_lead

    class_seq = []
    for paradigm, count in (("ME", cfg.trials_per_class), ("MI", cfg.mi_trials_per_class)):
        seq = np.repeat(np.arange(1, cfg.n_classes + 1), count)
        class_seq.append(substream(cfg.seed, "order", paradigm).permutation(seq))

    eeg = np.empty((cfg.eeg_channels, total), dtype=np.float32)
    emg = np.empty((cfg.emg_channels, total), dtype=np.float32)

    def eeg_noise(key, tag, n):
        if sigma_eeg == 0.0:
            return 0.0
        return sigma_eeg * _one_over_f(substream(cfg.seed, tag, key), cfg.eeg_channels, n, rate)

    def emg_noise(key, tag, n):
        if sigma_emg == 0.0:
            return 0.0
        return sigma_emg * substream(cfg.seed, tag, key).standard_normal((cfg.emg_channels, n))

    eeg[:, :n_lead] = eeg_noise(0, "eeg_lead", n_lead)
    emg[:, :n_lead] = emg_noise(0, "emg_lead", n_lead)
    eeg[:, total - n_lead:] = eeg_noise(1, "eeg_lead", n_lead)
    emg[:, total - n_lead:] = emg_noise(1, "emg_lead", n_lead)

    window = int(round(cfg.window_ms * rate / 1000.0))
    step = int(round(cfg.step_ms * rate / 1000.0))
    centers = np.arange(cfg.n_segments) * step + window / 2.0
    t = np.arange(n_trial) / rate

    events = []
    trial_id = 0
    for block, paradigm in enumerate(("ME", "MI")):
        gain = 1.0 if paradigm == "ME" else cfg.mi_gain
        for cls in class_seq[block]:
            cls = int(cls)
            onset = n_lead + trial_id * (n_trial + n_gap)
            rng = substream(cfg.seed, "eeg_trial", trial_id)

            def osc_source(r, depth):
                f_osc = r.uniform(cfg.source_band[0] + 0.5, cfg.source_band[1] - 0.5)
                phase = r.uniform(0.0, 2.0 * math.pi)
                f_mod = r.uniform(0.6, 1.4)
                mod_phase = r.uniform(0.0, 2.0 * math.pi)
                s = (1.0 + depth * np.sin(2.0 * math.pi * f_mod * t + mod_phase)) * np.sin(
                    2.0 * math.pi * f_osc * t + phase
                )
                return s / np.sqrt(np.mean(s * s))

            class_depth = 0.2 + 0.6 * (cls - 1) / max(1, cfg.n_classes - 1)
            pattern = patterns[cls - 1]
            if cfg.pattern_jitter > 0:
                wobble = rng.standard_normal(cfg.eeg_channels)
                pattern = pattern + cfg.pattern_jitter * wobble / math.sqrt(cfg.eeg_channels)
                pattern = pattern / np.linalg.norm(pattern)
            block_eeg = gain * np.outer(pattern, osc_source(rng, class_depth))
            if cfg.background_gain > 0:
                bg_pattern = rng.standard_normal(cfg.eeg_channels)
                bg_pattern /= np.linalg.norm(bg_pattern)
                block_eeg = block_eeg + cfg.background_gain * np.outer(
                    bg_pattern, osc_source(rng, 0.5)
                )
            block_eeg = block_eeg + eeg_noise(trial_id, "eeg_noise", n_trial)
            eeg[:, onset:onset + n_trial] = block_eeg

            block_emg = np.zeros((cfg.emg_channels, n_trial))
            if paradigm == "ME":
                carrier_rng = substream(cfg.seed, "emg_carrier", trial_id)
                for c in range(cfg.emg_channels - 1):
                    env = _interp_envelope(envelopes[cls - 1, c], centers, n_trial)
                    block_emg[c] = env * carrier_rng.standard_normal(n_trial)
            block_emg = block_emg + emg_noise(trial_id, "emg_noise", n_trial)
            emg[:, onset:onset + n_trial] = block_emg

            gap_start = onset + n_trial
            eeg[:, gap_start:gap_start + n_gap] = eeg_noise(trial_id, "eeg_gap", n_gap)
            emg[:, gap_start:gap_start + n_gap] = emg_noise(trial_id, "emg_gap", n_gap)

            events.append(
                TrialEvent(
                    trial_id=trial_id, class_label=cls, onset_sample=onset, paradigm=paradigm
                )
            )
            trial_id += 1

    eeg_rec = Recording(
        Modality.EEG, rate, EEG_CHANNEL_NAMES[: cfg.eeg_channels]
        if cfg.eeg_channels <= len(EEG_CHANNEL_NAMES)
        else tuple(f"E{i + 1}" for i in range(cfg.eeg_channels)),
        eeg,
    )
    emg_rec = Recording(
        Modality.EMG, rate, EMG_CHANNEL_NAMES[: cfg.emg_channels]
        if cfg.emg_channels <= len(EMG_CHANNEL_NAMES)
        else tuple(f"M{i + 1}" for i in range(cfg.emg_channels)),
        emg,
    )
    truth = SynthTruth(
        patterns=patterns,
        envelopes=envelopes,
        seed=cfg.seed,
        snr_db=cfg.snr_db,
        source_band=cfg.source_band,
    )
    return eeg_rec, emg_rec, events, truth


def plant_check(fs: SpatialFilterSet, truth: SynthTruth) -> float:
    """Cosine similarity of the top filter's spatial pattern to the truth.

    The filter is mapped through the covariance-weighted pattern
    transform and compared (absolute cosine) against every planted
    column; the best match is returned.
    """
    pats = np.asarray(truth.patterns, dtype=np.float64)
    if pats.shape[1] != fs.filters.shape[1]:
        raise InvalidParameterError(
            f"truth patterns have {pats.shape[1]} channels, filters {fs.filters.shape[1]}"
        )
    fitted = spatial_patterns(fs)[:, 0]
    norm = np.linalg.norm(fitted)
    if norm == 0.0:
        return 0.0
    fitted = fitted / norm
    sims = np.abs(pats @ fitted) / np.linalg.norm(pats, axis=1)
    return float(np.max(sims))
