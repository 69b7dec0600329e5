"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``. The heavy end-to-end
criteria share session-scoped fixtures; everything is seeded and
deterministic.
"""

import hashlib
import json
import time

import numpy as np
import pytest
from scipy import stats as sps_stats

from graspdec.augment import audit_provenance, augment_dataset, augment_trial, build_bank
from graspdec.cli import main as cli_main
from graspdec.config import default_config
from graspdec.csp import csp_fit
from graspdec.evaluate import CvConfig, paired_test, run_comparison, stratified_folds
from graspdec.labels import EmgLabel, mse, nearest_label, rms
from graspdec.pipeline import prepare_paradigm
from graspdec.seeds import substream
from graspdec.signals import (
    Modality,
    Recording,
    Trial,
    bandpass,
    bandpass_matrix,
    notch,
    segment_trial,
)
from graspdec.synth import SynthConfig, generate_session, plant_check

pytestmark = pytest.mark.acceptance


def _criterion(number, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\n[acceptance] criterion {number:2d} ({name}): {status}  {detail}")
    assert ok, f"criterion {number} ({name}) failed: {detail}"


def _zero_trials(n, n_ch=4, n_samples=4000, rng=None):
    rng = rng or np.random.default_rng(0)
    return [
        Trial(i, 1 + i % 5, "ME", 1000, rng.normal(size=(n_ch, n_samples)))
        for i in range(n)
    ]


def _labels_for(trials, rng):
    out = []
    for t in trials:
        for i in range(15):
            out.append(EmgLabel(rng.uniform(0, 2, size=4), t.trial_id, t.class_label, i))
    return out


@pytest.fixture(scope="module")
def default_session():
    """The default synthetic session (50 ME + 50 MI trials per class)."""
    cfg = SynthConfig()
    return cfg, generate_session(cfg)


@pytest.fixture(scope="module")
def default_me_data(default_session):
    _, (eeg, emg, events, _) = default_session
    return prepare_paradigm(eeg, emg, events, default_config(), "ME")


class TestCriterion1:
    def test_segmentation_geometry(self, rng):
        t0 = time.time()
        trial = _zero_trials(1, rng=rng)[0]
        segs = segment_trial(trial, 500.0, 250.0)
        trials = _zero_trials(200, rng=rng)
        bank = build_bank(trials, _labels_for(trials, rng))
        elapsed = time.time() - t0
        ok = len(segs) == 15 and len(bank) == 3000 and elapsed < 1.0
        _criterion(
            1,
            "segmentation geometry",
            ok,
            f"15-window split -> {len(segs)}, 200-trial bank -> {len(bank)}, {elapsed:.2f}s",
        )


class TestCriterion2:
    def test_switch_ratio(self, rng):
        t0 = time.time()
        from graspdec.augment import select_switch_positions

        positions = select_switch_positions(15, 0.6, np.random.default_rng(0))
        trials = _zero_trials(6, rng=rng)
        bank = build_bank(trials, _labels_for(trials, rng))
        aug = augment_trial(
            trials[0], bank.labels_for_trial(0), bank, 0.6, 11, np.random.default_rng(1)
        )
        switched = sum(p.switched for p in aug.provenance)
        elapsed = time.time() - t0
        ok = len(positions) == 9 and switched == 9 and elapsed < 1.0
        _criterion(
            2,
            "switch ratio",
            ok,
            f"selected {len(positions)} positions, {switched} switched records, {elapsed:.2f}s",
        )


class TestCriterion3:
    def test_isolation_over_full_cv(self, default_me_data):
        t0 = time.time()
        data = default_me_data
        y = [t.class_label for t in data.trials]
        total_violations = 0
        n_banks = 0
        bank_sizes = set()
        for rep in range(5):
            folds = stratified_folds(y, 5, substream(7, "folds", rep))
            for f, (tr_idx, te_idx) in enumerate(folds):
                train = [data.trials[i] for i in tr_idx]
                test_ids = {data.trials[i].trial_id for i in te_idx}
                labels = [
                    lab for t in train for lab in data.labels_by_trial[t.trial_id]
                ]
                bank = build_bank(train, labels)
                bank_sizes.add(len(bank))
                n_banks += 1
                total_violations += len(bank.training_trial_ids & test_ids)
                seed = int(substream(7, "fold", rep, f).integers(2**62))
                aug = augment_dataset(train, bank, 3, 0.6, 11, seed=seed)
                total_violations += len(
                    audit_provenance(aug, {t.trial_id for t in train})
                )
        elapsed = time.time() - t0
        ok = total_violations == 0 and bank_sizes == {3000} and elapsed < 600
        _criterion(
            3,
            "test isolation",
            ok,
            f"{n_banks} folds audited, bank sizes {sorted(bank_sizes)}, "
            f"{total_violations} violations, {elapsed:.0f}s",
        )


class TestCriterion4:
    def test_csp_correctness(self):
        t0 = time.time()
        rng = np.random.default_rng(5)

        # (a) generalized eigen residual on realistically fitted filters
        def shrunk(trials, gamma=0.05):
            from graspdec.csp import trial_covariance

            c = np.mean([trial_covariance(x) for x in trials], axis=0)
            n = c.shape[0]
            return (1 - gamma) * c + gamma * (np.trace(c) / n) * np.eye(n)

        target = [rng.normal(size=(20, 1000)) * rng.uniform(0.5, 2) for _ in range(30)]
        rest = [rng.normal(size=(20, 1000)) * rng.uniform(0.5, 2) for _ in range(30)]
        fs = csp_fit(target, rest, m=3, shrinkage=0.05)
        c1, c2 = shrunk(target), shrunk(rest)
        residuals = [
            np.linalg.norm(c1 @ w - lam * (c1 + c2) @ w) / np.linalg.norm(w)
            for w, lam in zip(fs.filters, fs.eigenvalues)
        ]
        ok_resid = max(residuals) <= 1e-8

        # (b) 2-channel planted case against the closed-form 2x2 oracle
        from tests.test_csp import mean_cov, planted_2ch_trials, shrink, solve_2x2_oracle

        t_target = planted_2ch_trials(rng, strong=0)
        t_rest = planted_2ch_trials(rng, strong=1)
        fs2 = csp_fit(t_target, t_rest, m=1, shrinkage=0.05)
        c1p = shrink(mean_cov(t_target), 0.05)
        c2p = shrink(mean_cov(t_rest), 0.05)
        lams, vecs = solve_2x2_oracle(c1p, c1p + c2p)
        ok_oracle = np.allclose(fs2.eigenvalues, lams, atol=1e-6) and all(
            min(np.abs(r - v).max(), np.abs(r + v).max()) < 1e-6
            for r, v in zip(fs2.filters, vecs)
        )

        # (c) planted-pattern recovery at snr >= 20 dB
        cfg = SynthConfig(trials_per_class=15, mi_trials_per_class=0, snr_db=20.0, seed=6)
        eeg, emg, events, truth = generate_session(cfg)
        data = prepare_paradigm(eeg, emg, events, default_config(), "ME")
        sims = []
        for cls in range(1, 6):
            tgt, rst = [], []
            for t in data.trials:
                filtered = bandpass_matrix(np.asarray(t.data), 1000.0, 8.0, 30.0)
                (tgt if t.class_label == cls else rst).append(filtered)
            sims.append(plant_check(csp_fit(tgt, rst, m=3, target_class=cls), truth))
        ok_plant = min(sims) >= 0.9

        elapsed = time.time() - t0
        ok = ok_resid and ok_oracle and ok_plant
        _criterion(
            4,
            "CSP correctness",
            ok,
            f"max residual {max(residuals):.2e}, 2x2 oracle match {ok_oracle}, "
            f"min plant similarity {min(sims):.3f}, {elapsed:.0f}s",
        )


class TestCriterion7:
    def test_oracle_equivalence(self, rng):
        t0 = time.time()
        trials = _zero_trials(200, rng=rng)
        labels = _labels_for(trials, rng)
        bank = build_bank(trials, labels)
        pool = [e.label for e in bank.entries]
        pool_mat = np.array([lab.rms for lab in pool])
        tids = np.array([lab.source_trial_id for lab in pool])
        segs = np.array([lab.segment_index for lab in pool])

        def oracle(query_vec):
            # independent scan: broadcast distances + explicit lexicographic tie-break
            d = np.mean((pool_mat - query_vec) ** 2, axis=1)
            best = np.flatnonzero(d == d.min())
            order = np.lexsort((segs[best], tids[best]))
            return int(best[order[0]])

        mismatches = 0
        for _ in range(1000):
            q = EmgLabel(rng.uniform(0, 2, size=4), 10_000, 1, 0)
            if nearest_label(q, pool) != oracle(q.rms):
                mismatches += 1

        ok_scan = mismatches == 0
        ok_rms = abs(float(rms(np.array([[3.0, 4.0]]))[0]) - np.sqrt(12.5)) <= 1e-12
        a = EmgLabel(np.array([1.0, 0, 0, 0]), 0, 1, 0)
        b = EmgLabel(np.array([0.0, 1, 0, 0]), 0, 1, 0)
        c = EmgLabel(np.array([2.0, 2, 2, 2]), 0, 1, 0)
        z = EmgLabel(np.zeros(4), 0, 1, 0)
        ok_mse = (
            abs(mse(a, b) - 0.5) <= 1e-12
            and abs(mse(c, z) - 4.0) <= 1e-12
            and mse(a, a) == 0.0
        )
        elapsed = time.time() - t0
        ok = ok_scan and ok_rms and ok_mse
        _criterion(
            7,
            "oracle equivalence",
            ok,
            f"1000 queries over {len(pool)} entries, {mismatches} mismatches, "
            f"closed forms ok={ok_rms and ok_mse}, {elapsed:.0f}s",
        )


class TestCriterion8:
    def test_cmd_run_determinism(self, tmp_path):
        t0 = time.time()
        doc = {
            "synth": {"trials_per_class": 6, "mi_trials_per_class": 0, "snr_db": 10.0, "seed": 21},
            "eval": {
                "repeats": 1,
                "folds": 2,
                "seed": 21,
                "methods": ["CSP", "CSP_DA"],
                "paradigms": ["ME"],
            },
            "augment": {"multiplier": 1},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(doc))
        assert cli_main(["synth", "--config", str(cfg_path), "--out", str(tmp_path / "data")]) == 0
        run_doc = dict(doc)
        run_doc["io"] = {
            "eeg": str(tmp_path / "data" / "eeg.bcir"),
            "emg": str(tmp_path / "data" / "emg.bcir"),
            "events": str(tmp_path / "data" / "events.csv"),
            "out_dir": str(tmp_path / "out1"),
        }
        run_path = tmp_path / "run.json"
        run_path.write_text(json.dumps(run_doc))
        assert cli_main(["run", "--config", str(run_path)]) == 0
        assert cli_main(["run", "--config", str(run_path), "--out", str(tmp_path / "out2")]) == 0

        def digest(d, name):
            return hashlib.sha256((d / name).read_bytes()).hexdigest()

        names = ["report.csv", "confusion_CSP_ME.csv", "confusion_CSP_DA_ME.csv"]
        same = all(
            digest(tmp_path / "out1", n) == digest(tmp_path / "out2", n) for n in names
        )
        elapsed = time.time() - t0
        _criterion(
            8,
            "cmd_run determinism",
            same,
            f"{len(names)} files byte-identical across reruns, {elapsed:.0f}s",
        )


class TestCriterion9:
    def test_filter_responses(self):
        t0 = time.time()
        rate = 1000
        t = np.arange(8 * rate) / rate

        def steady(x):
            return float(np.abs(x[x.size // 4 : 3 * x.size // 4]).max())

        tone60 = Recording(Modality.EMG, rate, ("c",), np.sin(2 * np.pi * 60 * t)[None])
        notch_out = notch(tone60, 60.0, 30.0)
        notch_atten = -20 * np.log10(max(steady(notch_out.samples[0]), 1e-12))

        tone2 = Recording(Modality.EMG, rate, ("c",), np.sin(2 * np.pi * 2 * t)[None])
        band_out = bandpass(tone2, 10.0, 500.0, 4)
        stop_atten = -20 * np.log10(max(steady(band_out.samples[0]), 1e-12))

        ripples = []
        for f in (20.0, 60.0, 120.0, 249.0):
            tone = Recording(
                Modality.EMG, rate, ("c",), np.sin(2 * np.pi * f * t)[None]
            )
            out = bandpass(tone, 10.0, 500.0, 4)
            ripples.append(abs(20 * np.log10(steady(out.samples[0]))))

        elapsed = time.time() - t0
        ok = notch_atten >= 20.0 and stop_atten >= 20.0 and max(ripples) <= 1.0 and elapsed < 5
        _criterion(
            9,
            "filter responses",
            ok,
            f"notch {notch_atten:.1f} dB, stopband {stop_atten:.1f} dB, "
            f"ripple {max(ripples):.3f} dB, {elapsed:.1f}s",
        )


class TestCriterion10:
    def test_paired_test_calibration(self):
        t0 = time.time()
        rng = np.random.default_rng(99)
        pvals = []
        for _ in range(1000):
            a = rng.normal(size=25)
            b = rng.normal(size=25)
            pvals.append(paired_test(a, b))
        ks = sps_stats.kstest(pvals, "uniform").statistic
        elapsed = time.time() - t0
        ok = ks <= 0.05
        _criterion(
            10,
            "statistical calibration",
            ok,
            f"KS distance {ks:.4f} over 1000 simulations, {elapsed:.0f}s",
        )
