"""Command-line front end.

Subcommands: ``synth`` (generate a synthetic session), ``run`` (full
method comparison), ``sweep`` (parameter sweep over fresh comparisons),
``inspect`` (print a recording header).

Exit codes: 0 success, 2 config/usage/I-O errors, 3 test-isolation
violation (the scientific-integrity failure), 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import config as cfgmod
from . import fileio, report
from .csp import fbcsp_fit
from .errors import ConfigError, GraspDecError, IsolationViolationError
from .evaluate import METHODS, run_comparison
from .pipeline import me_templates, prepare_paradigm, preprocess_emg
from .synth import generate_session

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_ISOLATION = 3

SWEEP_PARAMS = ("ratio", "multiplier", "snr_db", "trials_per_class")


def _status(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graspdec",
        description="EMG-label-driven EEG augmentation and grasp decoding toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic EEG/EMG session")
    p_synth.add_argument("--config", help="JSON config path (defaults used if omitted)")
    p_synth.add_argument("--out", help="output directory (default: io.out_dir)")
    p_synth.add_argument("--seed", type=int, help="override synth.seed")

    p_run = sub.add_parser("run", help="run the four-method comparison")
    p_run.add_argument("--config", help="JSON config path")
    p_run.add_argument("--out", help="output directory (default: io.out_dir)")
    p_run.add_argument("--seed", type=int, help="override eval.seed")
    p_run.add_argument("--threads", type=int, default=1, help="fold-level worker count")
    p_run.add_argument(
        "--method",
        help=f"comma-separated subset of {','.join(METHODS)} (default: eval.methods)",
    )
    p_run.add_argument("--paradigm", choices=("ME", "MI"), help="restrict to one paradigm")

    p_sweep = sub.add_parser("sweep", help="re-run the comparison over one varied parameter")
    p_sweep.add_argument("--config", help="JSON config path")
    p_sweep.add_argument("--param", required=True, help=f"one of {SWEEP_PARAMS}")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", help="output directory (default: io.out_dir)")
    p_sweep.add_argument("--seed", type=int, help="override eval.seed")
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--method", help="comma-separated method subset")
    p_sweep.add_argument("--paradigm", choices=("ME", "MI"))

    p_inspect = sub.add_parser("inspect", help="print a recording file header")
    p_inspect.add_argument("file", help="path to a .bcir recording")
    return parser


def _resolve_io_path(base: Path | None, value: str) -> Path:
    p = Path(value)
    if p.is_absolute() or base is None:
        return p
    return base / p


def _apply_overrides(cfg: dict, args) -> dict:
    if getattr(args, "seed", None) is not None:
        cfg["eval"]["seed"] = args.seed
        cfg["synth"]["seed"] = args.seed
    if getattr(args, "method", None):
        methods = [m.strip() for m in args.method.split(",") if m.strip()]
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        cfg["eval"]["methods"] = methods
    if getattr(args, "paradigm", None):
        cfg["eval"]["paradigms"] = [args.paradigm]
    if getattr(args, "out", None):
        cfg["io"]["out_dir"] = args.out
    return cfg


def cmd_synth(args) -> int:
    cfg = _apply_overrides(cfgmod.load_config(args.config), args)
    out_dir = Path(cfg["io"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    scfg = cfgmod.synth_config(cfg)
    _status(f"generating synthetic session (seed {scfg.seed}, snr {scfg.snr_db} dB)")
    eeg, emg, events, truth = generate_session(scfg)
    fileio.write_recording(out_dir / "eeg.bcir", eeg)
    fileio.write_recording(out_dir / "emg.bcir", emg)
    fileio.write_events_csv(out_dir / "events.csv", events)
    fileio.write_truth_json(out_dir / "truth.json", truth)
    _status(f"wrote {len(events)} trials to {out_dir}")
    return EXIT_OK


def _load_session(cfg: dict, base: Path | None):
    eeg = fileio.read_recording(_resolve_io_path(base, cfg["io"]["eeg"]))
    emg_path = _resolve_io_path(base, cfg["io"]["emg"])
    emg = fileio.read_recording(emg_path) if emg_path.exists() else None
    events = fileio.read_events_csv(_resolve_io_path(base, cfg["io"]["events"]))
    return eeg, emg, events


def _comparisons(cfg: dict, eeg, emg, events, threads: int):
    """One ComparisonReport per requested paradigm, on shared folds."""
    reports = []
    filter_sets = []
    templates = None
    paradigms = cfg["eval"]["paradigms"]
    if "MI" in paradigms and any(ev.paradigm == "ME" for ev in events) and emg is not None:
        templates = me_templates(preprocess_emg(emg, cfg), events, cfg)
    for paradigm in paradigms:
        data = prepare_paradigm(eeg, emg, events, cfg, paradigm, templates=templates)
        cv = cfgmod.cv_config(cfg, cfg["eval"]["methods"][0], paradigm)
        _status(
            f"{paradigm}: {len(data.trials)} trials, methods "
            f"{','.join(cfg['eval']['methods'])}, {cv.n_repeats}x{cv.n_folds}-fold"
        )
        rep = run_comparison(
            data.trials,
            cv,
            labels_by_trial=data.labels_by_trial,
            methods=cfg["eval"]["methods"],
            threads=threads,
        )
        reports.append(rep)

        by_class: dict[int, list] = {}
        for t in data.trials:
            by_class.setdefault(t.class_label, []).append(t.data)
        filter_sets.extend(
            fbcsp_fit(
                by_class,
                bands=(tuple(cfg["features"]["csp_band"]),),
                m=cfg["features"]["m"],
                shrinkage=cfg["features"]["shrinkage"],
                sample_rate_hz=data.trials[0].sample_rate_hz,
                order=cfg["preprocess"]["filter_order"],
            )
        )
    return reports, filter_sets


def cmd_run(args) -> int:
    cfg = _apply_overrides(cfgmod.load_config(args.config), args)
    base = Path(args.config).parent if args.config else None
    eeg, emg, events = _load_session(cfg, base)
    reports, filter_sets = _comparisons(cfg, eeg, emg, events, args.threads)

    out_dir = Path(cfg["io"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    report.write_reports(out_dir, reports, filter_sets)
    (out_dir / "resolved_config.json").write_text(
        json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    _status(f"report written to {out_dir / 'report.csv'}")
    return EXIT_OK


def _sweep_value_config(cfg: dict, param: str, value: float) -> dict:
    out = json.loads(json.dumps(cfg))  # deep copy via JSON round-trip
    if param == "ratio":
        out["augment"]["ratio"] = float(value)
    elif param == "multiplier":
        out["augment"]["multiplier"] = int(value)
    elif param == "snr_db":
        out["synth"]["snr_db"] = float(value)
    elif param == "trials_per_class":
        out["synth"]["trials_per_class"] = int(value)
    return out


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep param {args.param!r}; choose from {SWEEP_PARAMS}")
    raw = [v.strip() for v in args.values.split(",") if v.strip()]
    if not raw:
        raise ConfigError("empty sweep value list")
    try:
        values = [float(v) for v in raw]
    except ValueError as exc:
        raise ConfigError(f"sweep values must be numeric: {exc}") from exc

    cfg = _apply_overrides(cfgmod.load_config(args.config), args)
    out_dir = Path(cfg["io"]["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    lines = ["param,value,method,paradigm,mean_acc,std_acc"]
    session_cache: dict[tuple, tuple] = {}
    for value in values:
        vcfg = cfgmod.resolve_config(_sweep_value_config(cfg, args.param, value))
        scfg = cfgmod.synth_config(vcfg)
        key = (scfg.trials_per_class, scfg.mi_trials_per_class, scfg.snr_db, scfg.seed)
        if key not in session_cache:
            _status(f"synthesizing session for {args.param}={value}")
            session_cache[key] = generate_session(scfg)[:3]
        eeg, emg, events = session_cache[key]
        reports, _ = _comparisons(vcfg, eeg, emg, events, args.threads)
        for rep in reports:
            for method, res in rep.results.items():
                lines.append(
                    f"{args.param},{value:g},{method},{rep.paradigm},"
                    f"{res.mean_accuracy:.6f},{res.std_accuracy:.6f}"
                )
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _status(f"sweep written to {out_dir / 'sweep.csv'}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    header = fileio.read_recording_header(args.file)
    print(f"file:               {args.file}")
    print(f"modality:           {header['modality'].name}")
    print(f"sample_rate_hz:     {header['sample_rate_hz']}")
    print(f"channels:           {len(header['channel_names'])}")
    print(f"samples_per_channel:{header['samples_per_channel']}")
    print(f"duration_s:         {header['samples_per_channel'] / header['sample_rate_hz']:.3f}")
    print(f"channel_names:      {','.join(header['channel_names'])}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synth": cmd_synth,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "inspect": cmd_inspect,
    }
    try:
        return handlers[args.command](args)
    except IsolationViolationError as exc:
        _status(f"ISOLATION VIOLATION: {exc}")
        return EXIT_ISOLATION
    except (ConfigError, FileNotFoundError, OSError) as exc:
        _status(f"error: {exc}")
        return EXIT_CONFIG
    except GraspDecError as exc:
        _status(f"error: {exc}")
        return EXIT_CONFIG
    except Exception:  # pragma: no cover - last-resort diagnostics
        traceback.print_exc()
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
