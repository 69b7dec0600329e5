import hashlib
import json

import pytest

import graspdec.cli as cli
from graspdec.cli import main
from graspdec.errors import IsolationViolationError


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


SMALL_SYNTH = {
    "synth": {
        "trials_per_class": 6,
        "mi_trials_per_class": 2,
        "snr_db": 20.0,
        "seed": 13,
    },
    "eval": {
        "repeats": 1,
        "folds": 2,
        "seed": 13,
        "methods": ["CSP", "CSP_DA"],
        "paradigms": ["ME"],
    },
    "augment": {"multiplier": 1},
}


@pytest.fixture(scope="module")
def session_dir(tmp_path_factory):
    """A synthesized session on disk plus a run config pointing at it."""
    root = tmp_path_factory.mktemp("cli_session")
    cfg_path = root / "synth_config.json"
    cfg_path.write_text(json.dumps(SMALL_SYNTH))
    assert main(["synth", "--config", str(cfg_path), "--out", str(root / "data")]) == 0
    run_cfg = dict(SMALL_SYNTH)
    run_cfg["io"] = {
        "eeg": "data/eeg.bcir",
        "emg": "data/emg.bcir",
        "events": "data/events.csv",
        "out_dir": str(root / "out"),
    }
    run_cfg_path = root / "run_config.json"
    run_cfg_path.write_text(json.dumps(run_cfg))
    return root, run_cfg_path


class TestSynth:
    def test_outputs_exist(self, session_dir):
        root, _ = session_dir
        for name in ("eeg.bcir", "emg.bcir", "events.csv", "truth.json"):
            assert (root / "data" / name).exists()

    def test_same_seed_identical_files(self, tmp_path, session_dir):
        root, _ = session_dir
        cfg_path = root / "synth_config.json"
        assert main(["synth", "--config", str(cfg_path), "--out", str(tmp_path / "d2")]) == 0
        for name in ("eeg.bcir", "emg.bcir", "events.csv", "truth.json"):
            assert sha(tmp_path / "d2" / name) == sha(root / "data" / name)

    def test_bad_config_path(self, tmp_path):
        assert main(["synth", "--config", str(tmp_path / "missing.json")]) == 2

    def test_unwritable_out(self, session_dir):
        root, _ = session_dir
        code = main(
            ["synth", "--config", str(root / "synth_config.json"), "--out", "/proc/nope"]
        )
        assert code == 2


class TestInspect:
    def test_prints_header(self, session_dir, capsys):
        root, _ = session_dir
        assert main(["inspect", str(root / "data" / "eeg.bcir")]) == 0
        out = capsys.readouterr().out
        assert "EEG" in out
        assert "sample_rate_hz:     1000" in out
        assert "channels:           20" in out

    def test_missing_file(self, tmp_path):
        assert main(["inspect", str(tmp_path / "nope.bcir")]) == 2


class TestRun:
    def test_run_and_outputs(self, session_dir):
        root, run_cfg = session_dir
        assert main(["run", "--config", str(run_cfg)]) == 0
        out = root / "out"
        report = (out / "report.csv").read_text().splitlines()
        assert report[0] == "method,paradigm,mean_acc,std_acc,p_vs_nonDA"
        assert len(report) == 3  # CSP + CSP_DA rows
        assert (out / "confusion_CSP_ME.csv").exists()
        assert (out / "confusion_CSP_DA_ME.svg").exists()
        assert (out / "filters.csv").exists()
        assert (out / "resolved_config.json").exists()

    def test_rerun_byte_identical(self, session_dir, tmp_path):
        root, run_cfg = session_dir
        assert main(["run", "--config", str(run_cfg)]) == 0
        first = {
            p.name: sha(p) for p in (root / "out").iterdir() if p.suffix == ".csv"
        }
        assert main(["run", "--config", str(run_cfg), "--out", str(tmp_path / "out2")]) == 0
        for name, digest in first.items():
            assert sha(tmp_path / "out2" / name) == digest

    def test_resolved_config_roundtrip(self, session_dir, tmp_path):
        root, run_cfg = session_dir
        assert main(["run", "--config", str(run_cfg)]) == 0
        resolved = root / "out" / "resolved_config.json"
        # re-running from the resolved config reproduces the same report;
        # io paths inside it are relative to the original config dir, so
        # rewrite them as absolute before moving the file elsewhere
        doc = json.loads(resolved.read_text())
        doc["io"]["eeg"] = str(root / "data" / "eeg.bcir")
        doc["io"]["emg"] = str(root / "data" / "emg.bcir")
        doc["io"]["events"] = str(root / "data" / "events.csv")
        doc["io"]["out_dir"] = str(tmp_path / "out3")
        cfg2 = tmp_path / "resolved.json"
        cfg2.write_text(json.dumps(doc))
        assert main(["run", "--config", str(cfg2)]) == 0
        assert sha(tmp_path / "out3" / "report.csv") == sha(root / "out" / "report.csv")

    def test_method_and_paradigm_flags(self, session_dir, tmp_path):
        _, run_cfg = session_dir
        out = tmp_path / "single"
        assert main(
            ["run", "--config", str(run_cfg), "--out", str(out), "--method", "CSP",
             "--paradigm", "ME", "--threads", "2"]
        ) == 0
        lines = (out / "report.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("CSP,ME,")

    def test_unknown_method_flag(self, session_dir):
        _, run_cfg = session_dir
        assert main(["run", "--config", str(run_cfg), "--method", "LDA"]) == 2

    def test_isolation_violation_exit_code(self, session_dir, monkeypatch):
        _, run_cfg = session_dir

        def boom(*args, **kwargs):
            raise IsolationViolationError("bank leaked a test trial")

        monkeypatch.setattr(cli, "run_comparison", boom)
        assert main(["run", "--config", str(run_cfg)]) == 3


class TestSweep:
    def test_ratio_sweep(self, session_dir, tmp_path):
        _, run_cfg = session_dir
        out = tmp_path / "sweep_out"
        code = main(
            ["sweep", "--config", str(run_cfg), "--param", "ratio",
             "--values", "0,0.6", "--out", str(out), "--method", "CSP_DA"]
        )
        assert code == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "param,value,method,paradigm,mean_acc,std_acc"
        assert len(lines) == 3  # 2 values x 1 method x 1 paradigm
        assert lines[1].startswith("ratio,0,CSP_DA,ME,")
        assert lines[2].startswith("ratio,0.6,CSP_DA,ME,")

    def test_unknown_param(self, session_dir):
        _, run_cfg = session_dir
        assert main(["sweep", "--config", str(run_cfg), "--param", "snr", "--values", "1"]) == 2

    def test_empty_values(self, session_dir):
        _, run_cfg = session_dir
        assert (
            main(["sweep", "--config", str(run_cfg), "--param", "ratio", "--values", " , "])
            == 2
        )
