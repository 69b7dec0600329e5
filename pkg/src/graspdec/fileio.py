"""On-disk formats: BCIR recordings, event/label/provenance CSVs, truth
JSON, and the GDMD model blob. All binary layouts are little-endian and
versioned.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .augment import AugmentedTrial
from .errors import ConfigError, InvalidParameterError
from .labels import EmgLabel
from .signals import Modality, Recording, TrialEvent
from .svm import LinearModel
from .synth import SynthTruth

__all__ = [
    "write_recording",
    "read_recording",
    "read_recording_header",
    "write_events_csv",
    "read_events_csv",
    "write_truth_json",
    "read_truth_json",
    "write_label_bank_csv",
    "write_provenance_csv",
    "export_augmented",
    "save_model",
    "load_model",
]

RECORDING_MAGIC = b"BCIR"
RECORDING_VERSION = 1
_REC_HEADER = struct.Struct("<4sHBHIQ")  # magic, version, modality, channels, rate, samples

MODEL_MAGIC = b"GDMD"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sHHIId")  # magic, version, classes, d_sel, d_full, c_reg


def write_recording(path, rec: Recording) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(
            _REC_HEADER.pack(
                RECORDING_MAGIC,
                RECORDING_VERSION,
                rec.modality.value,
                rec.n_channels,
                rec.sample_rate_hz,
                rec.n_samples,
            )
        )
        for name in rec.channel_names:
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(rec.samples, dtype="<f4").tobytes())


def _read_header(fh):
    head = fh.read(_REC_HEADER.size)
    if len(head) != _REC_HEADER.size:
        raise ConfigError("truncated recording header")
    magic, version, modality, n_ch, rate, n_samples = _REC_HEADER.unpack(head)
    if magic != RECORDING_MAGIC:
        raise ConfigError(f"bad magic {magic!r}, expected {RECORDING_MAGIC!r}")
    if version != RECORDING_VERSION:
        raise ConfigError(f"unsupported recording version {version}")
    names = []
    for _ in range(n_ch):
        (n,) = struct.unpack("<H", fh.read(2))
        names.append(fh.read(n).decode("utf-8"))
    return {
        "modality": Modality(modality),
        "sample_rate_hz": rate,
        "channel_names": tuple(names),
        "samples_per_channel": n_samples,
    }


def read_recording_header(path) -> dict:
    """Parse just the header; cheap way to inspect a file."""
    with open(path, "rb") as fh:
        return _read_header(fh)


def read_recording(path) -> Recording:
    with open(path, "rb") as fh:
        header = _read_header(fh)
        n_ch = len(header["channel_names"])
        n_samples = header["samples_per_channel"]
        data = np.fromfile(fh, dtype="<f4", count=n_ch * n_samples)
    if data.size != n_ch * n_samples:
        raise ConfigError("truncated recording payload")
    return Recording(
        header["modality"],
        header["sample_rate_hz"],
        header["channel_names"],
        data.reshape(n_ch, n_samples),
    )


def write_events_csv(path, events: Sequence[TrialEvent]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_id", "class_label", "onset_sample", "paradigm"])
        for ev in events:
            writer.writerow([ev.trial_id, ev.class_label, ev.onset_sample, ev.paradigm])


def read_events_csv(path) -> list[TrialEvent]:
    events = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"trial_id", "class_label", "onset_sample", "paradigm"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise ConfigError(f"events file needs columns {sorted(expected)}")
        for row in reader:
            events.append(
                TrialEvent(
                    trial_id=int(row["trial_id"]),
                    class_label=int(row["class_label"]),
                    onset_sample=int(row["onset_sample"]),
                    paradigm=row["paradigm"],
                )
            )
    return events


def write_truth_json(path, truth: SynthTruth) -> None:
    doc = {
        "seed": truth.seed,
        "snr_db": truth.snr_db if np.isfinite(truth.snr_db) else "inf",
        "source_band": list(truth.source_band),
        "patterns": np.asarray(truth.patterns).tolist(),
        "envelopes": np.asarray(truth.envelopes).tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_truth_json(path) -> SynthTruth:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    snr = doc["snr_db"]
    return SynthTruth(
        patterns=np.asarray(doc["patterns"], dtype=np.float64),
        envelopes=np.asarray(doc["envelopes"], dtype=np.float64),
        seed=int(doc["seed"]),
        snr_db=float("inf") if snr == "inf" else float(snr),
        source_band=tuple(doc["source_band"]),
    )


def write_label_bank_csv(path, labels: Sequence[EmgLabel]) -> None:
    if not labels:
        raise InvalidParameterError("no labels to export")
    width = labels[0].rms.size
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["source_trial_id", "class_label", "segment_index"]
            + [f"rms{i + 1}" for i in range(width)]
        )
        for lab in labels:
            writer.writerow(
                [lab.source_trial_id, lab.class_label, lab.segment_index]
                + [f"{v:.9g}" for v in lab.rms]
            )


def write_provenance_csv(path, augmented: Sequence[AugmentedTrial]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "aug_id",
                "base_trial_id",
                "position",
                "source_trial_id",
                "source_segment_index",
                "switched",
            ]
        )
        for aug_id, aug in enumerate(augmented):
            for rec in aug.provenance:
                writer.writerow(
                    [
                        aug_id,
                        aug.base_trial_id,
                        rec.position,
                        rec.source_trial_id,
                        rec.source_segment_index,
                        int(rec.switched),
                    ]
                )


def export_augmented(
    out_recording,
    out_provenance,
    augmented: Sequence[AugmentedTrial],
    channel_names: Sequence[str],
) -> None:
    """Write augmented trials back-to-back as a BCIR file plus provenance."""
    if not augmented:
        raise InvalidParameterError("nothing to export")
    data = np.concatenate([a.data for a in augmented], axis=1)
    rec = Recording(
        Modality.EEG, augmented[0].sample_rate_hz, tuple(channel_names), data
    )
    write_recording(out_recording, rec)
    write_provenance_csv(out_provenance, augmented)


def save_model(path, model: LinearModel) -> None:
    n_classes = len(model.classes)
    d_sel = model.weights.shape[1]
    d_full = max(model.selected) + 1
    with open(path, "wb") as fh:
        fh.write(
            _MODEL_HEADER.pack(
                MODEL_MAGIC, MODEL_VERSION, n_classes, d_sel, d_full, model.c_reg
            )
        )
        fh.write(np.asarray(model.classes, dtype="<u2").tobytes())
        fh.write(np.asarray(model.selected, dtype="<u4").tobytes())
        for arr in (model.weights, model.biases, model.mean, model.std):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> LinearModel:
    with open(path, "rb") as fh:
        head = fh.read(_MODEL_HEADER.size)
        if len(head) != _MODEL_HEADER.size:
            raise ConfigError("truncated model header")
        magic, version, n_classes, d_sel, d_full, c_reg = _MODEL_HEADER.unpack(head)
        if magic != MODEL_MAGIC:
            raise ConfigError(f"bad magic {magic!r}, expected {MODEL_MAGIC!r}")
        if version != MODEL_VERSION:
            raise ConfigError(f"unsupported model version {version}")
        classes = np.frombuffer(fh.read(2 * n_classes), dtype="<u2")
        selected = np.frombuffer(fh.read(4 * d_sel), dtype="<u4")
        weights = np.frombuffer(fh.read(8 * n_classes * d_sel), dtype="<f8").reshape(
            n_classes, d_sel
        )
        biases = np.frombuffer(fh.read(8 * n_classes), dtype="<f8")
        mean = np.frombuffer(fh.read(8 * d_sel), dtype="<f8")
        std = np.frombuffer(fh.read(8 * d_sel), dtype="<f8")
    if max(int(i) for i in selected) + 1 != d_full:
        raise ConfigError("model selected-index table is inconsistent")
    return LinearModel(
        classes=tuple(int(c) for c in classes),
        weights=weights.copy(),
        biases=biases.copy(),
        mean=mean.copy(),
        std=std.copy(),
        selected=tuple(int(i) for i in selected),
        c_reg=float(c_reg),
    )
