"""Run configuration: JSON document with strict keys and materialized defaults.

Unknown keys are rejected so typos never silently fall back to defaults;
the fully resolved document is echoed next to every report for
reproducibility.
"""

from __future__ import annotations

import copy
import json
from typing import Any, Mapping

from .errors import ConfigError
from .evaluate import METHODS, CvConfig
from .synth import SynthConfig

__all__ = ["default_config", "resolve_config", "load_config", "cv_config", "synth_config"]

_FB_BANDS = [[4.0 * i, 4.0 * i + 4.0] for i in range(1, 10)]

_DEFAULTS: dict[str, dict[str, Any]] = {
    "io": {
        "eeg": "eeg.bcir",
        "emg": "emg.bcir",
        "events": "events.csv",
        "out_dir": "out",
    },
    "preprocess": {
        "eeg_band": None,  # broadband by default; banding happens per method
        "eeg_notch_hz": None,
        "emg_band": [10.0, 500.0],
        "emg_notch_hz": 60.0,
        "notch_q": 30.0,
        "filter_order": 4,
        "median_kernel": 11,
        "channels": None,
    },
    "segment": {
        "window_ms": 500.0,
        "step_ms": 250.0,
        "trial_duration_s": 4.0,
    },
    "augment": {
        "ratio": 0.6,
        "multiplier": 3,
        "include_originals": True,
    },
    "features": {
        "csp_band": [8.0, 30.0],
        "fb_bands": _FB_BANDS,
        "m": 3,
        "k": 12,
        "shrinkage": 0.05,
    },
    "classify": {
        "c_reg": 1.0,
    },
    "eval": {
        "repeats": 5,
        "folds": 5,
        "seed": 7,
        "methods": list(METHODS),
        "paradigms": ["ME", "MI"],
    },
    "synth": {
        "n_classes": 5,
        "trials_per_class": 50,
        "mi_trials_per_class": 50,
        "eeg_channels": 20,
        "emg_channels": 5,
        "sample_rate_hz": 1000,
        "trial_s": 4.0,
        "gap_s": 1.0,
        "lead_in_s": 1.0,
        "snr_db": 10.0,
        "mi_gain": 0.75,
        "seed": 7,
    },
}


def default_config() -> dict:
    return copy.deepcopy(_DEFAULTS)


def resolve_config(doc: Mapping | None) -> dict:
    """Deep-merge a user document over the defaults, rejecting unknown keys."""
    resolved = default_config()
    if doc is None:
        return resolved
    if not isinstance(doc, Mapping):
        raise ConfigError("config document must be a JSON object")
    for section, body in doc.items():
        if section not in resolved:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(body, Mapping):
            raise ConfigError(f"config section {section!r} must be an object")
        for key, value in body.items():
            if key not in resolved[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            resolved[section][key] = copy.deepcopy(value)
    _validate(resolved)
    return resolved


def load_config(path: str | None) -> dict:
    if path is None:
        return resolve_config(None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return resolve_config(doc)


def _validate(cfg: dict) -> None:
    aug = cfg["augment"]
    if not 0.0 <= aug["ratio"] <= 1.0:
        raise ConfigError("augment.ratio must be in [0, 1]")
    if aug["multiplier"] < 0:
        raise ConfigError("augment.multiplier must be >= 0")
    ev = cfg["eval"]
    if ev["folds"] < 2:
        raise ConfigError("eval.folds must be >= 2")
    if ev["repeats"] < 1:
        raise ConfigError("eval.repeats must be >= 1")
    for m in ev["methods"]:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r} in eval.methods")
    for p in ev["paradigms"]:
        if p not in ("ME", "MI"):
            raise ConfigError(f"unknown paradigm {p!r} in eval.paradigms")
    feats = cfg["features"]
    if feats["m"] < 1:
        raise ConfigError("features.m must be >= 1")
    if feats["k"] < 1:
        raise ConfigError("features.k must be >= 1")
    kern = cfg["preprocess"]["median_kernel"]
    if kern < 1 or kern % 2 == 0:
        raise ConfigError("preprocess.median_kernel must be odd and >= 1")


def cv_config(cfg: Mapping, method: str, paradigm: str, seed: int | None = None) -> CvConfig:
    """Build the harness config for one (method, paradigm) run."""
    return CvConfig(
        method=method,
        paradigm=paradigm,
        n_repeats=cfg["eval"]["repeats"],
        n_folds=cfg["eval"]["folds"],
        seed=cfg["eval"]["seed"] if seed is None else seed,
        ratio=cfg["augment"]["ratio"],
        multiplier=cfg["augment"]["multiplier"],
        include_originals=cfg["augment"]["include_originals"],
        kernel_len=cfg["preprocess"]["median_kernel"],
        window_ms=cfg["segment"]["window_ms"],
        step_ms=cfg["segment"]["step_ms"],
        csp_band=tuple(cfg["features"]["csp_band"]),
        fb_bands=tuple(tuple(b) for b in cfg["features"]["fb_bands"]),
        m=cfg["features"]["m"],
        k=cfg["features"]["k"],
        shrinkage=cfg["features"]["shrinkage"],
        filter_order=cfg["preprocess"]["filter_order"],
        c_reg=cfg["classify"]["c_reg"],
    )


def synth_config(cfg: Mapping, seed: int | None = None) -> SynthConfig:
    s = cfg["synth"]
    return SynthConfig(
        n_classes=s["n_classes"],
        trials_per_class=s["trials_per_class"],
        mi_trials_per_class=s["mi_trials_per_class"],
        eeg_channels=s["eeg_channels"],
        emg_channels=s["emg_channels"],
        sample_rate_hz=s["sample_rate_hz"],
        trial_s=s["trial_s"],
        gap_s=s["gap_s"],
        lead_in_s=s["lead_in_s"],
        window_ms=cfg["segment"]["window_ms"],
        step_ms=cfg["segment"]["step_ms"],
        snr_db=float(s["snr_db"]),
        mi_gain=s["mi_gain"],
        seed=s["seed"] if seed is None else seed,
    )
