import numpy as np
import pytest

from graspdec.csp import (
    DEFAULT_BANDS,
    SpatialFilterSet,
    csp_features,
    csp_fit,
    fbcsp_feature_matrix,
    fbcsp_fit,
    fit_transform_bands,
    select_features,
    spatial_patterns,
    transform_bands,
    trial_covariance,
)
from graspdec.errors import DegenerateInputError, InvalidParameterError


def shrink(c, gamma):
    n = c.shape[0]
    return (1 - gamma) * c + gamma * (np.trace(c) / n) * np.eye(n)


def mean_cov(trials):
    return np.mean([trial_covariance(t) for t in trials], axis=0)


def solve_2x2_oracle(c1, cc):
    """Closed-form generalized eigensolve for 2x2 symmetric matrices.

    Solves det(c1 - lam * cc) = 0 with the quadratic formula and recovers
    each eigenvector from the null space by hand. Independent of any
    library eigensolver.
    """
    a = cc[0, 0] * cc[1, 1] - cc[0, 1] * cc[1, 0]
    b = -(c1[0, 0] * cc[1, 1] + c1[1, 1] * cc[0, 0] - c1[0, 1] * cc[1, 0] - c1[1, 0] * cc[0, 1])
    c = c1[0, 0] * c1[1, 1] - c1[0, 1] * c1[1, 0]
    disc = np.sqrt(b * b - 4 * a * c)
    lams = sorted([(-b - disc) / (2 * a), (-b + disc) / (2 * a)], reverse=True)
    vecs = []
    for lam in lams:
        m = c1 - lam * cc
        # null vector of a singular 2x2: pick the larger row for stability
        if abs(m[0, 0]) + abs(m[0, 1]) >= abs(m[1, 0]) + abs(m[1, 1]):
            v = np.array([-m[0, 1], m[0, 0]])
        else:
            v = np.array([-m[1, 1], m[1, 0]])
        vecs.append(v / np.linalg.norm(v))
    return np.array(lams), np.array(vecs)


def planted_2ch_trials(rng, n=30, strong=0, sigma=1.0, weak=0.05):
    """Trials whose variance concentrates on channel ``strong``."""
    out = []
    for _ in range(n):
        data = weak * rng.normal(size=(2, 500))
        data[strong] = sigma * rng.normal(size=500)
        out.append(data)
    return out


class TestTrialCovariance:
    def test_unit_trace_symmetric_psd(self, rng):
        c = trial_covariance(rng.normal(size=(6, 400)))
        assert np.isclose(np.trace(c), 1.0, atol=1e-12)
        assert np.allclose(c, c.T, atol=1e-14)
        assert np.linalg.eigvalsh(c).min() >= -1e-12

    def test_uncorrelated_noise_is_half_half(self):
        rng = np.random.default_rng(0)
        c = trial_covariance(rng.normal(size=(2, 20000)))
        assert np.allclose(np.diag(c), [0.5, 0.5], atol=0.05)
        assert abs(c[0, 1]) < 0.05

    def test_single_active_channel(self, rng):
        data = np.zeros((2, 100))
        data[0] = rng.normal(size=100)
        c = trial_covariance(data)
        assert np.isclose(c[0, 0], 1.0, atol=1e-12)
        assert np.allclose(c[[0, 1], [1, 1]], 0.0, atol=1e-12)

    def test_scale_invariant(self, rng):
        x = rng.normal(size=(4, 300))
        assert np.allclose(trial_covariance(x), trial_covariance(5.0 * x), atol=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInputError):
            trial_covariance(np.ones((3, 50)))

    def test_too_small_rejected(self):
        with pytest.raises(InvalidParameterError):
            trial_covariance(np.zeros((1, 50)))


class TestCspFit:
    def test_matches_2x2_closed_form(self, rng):
        target = planted_2ch_trials(rng, strong=0)
        rest = planted_2ch_trials(rng, strong=1)
        gamma = 0.05
        fs = csp_fit(target, rest, m=1, shrinkage=gamma)

        c1 = shrink(mean_cov(target), gamma)
        c2 = shrink(mean_cov(rest), gamma)
        lams, vecs = solve_2x2_oracle(c1, c1 + c2)
        assert np.allclose(fs.eigenvalues, lams, atol=1e-6)
        for row, v in zip(fs.filters, vecs):
            assert min(np.abs(row - v).max(), np.abs(row + v).max()) < 1e-6
        # top filter aligns with the channel-0 axis; lambda_max near 1
        assert abs(fs.filters[0, 0]) > 0.99
        assert fs.eigenvalues[0] > 0.9

    def test_generalized_eigen_residual(self, rng):
        target = [rng.normal(size=(8, 600)) for _ in range(20)]
        rest = [rng.normal(size=(8, 600)) * 1.5 for _ in range(20)]
        gamma = 0.05
        fs = csp_fit(target, rest, m=3, shrinkage=gamma)
        c1 = shrink(mean_cov(target), gamma)
        c2 = shrink(mean_cov(rest), gamma)
        assert np.allclose(fs.composite_cov, c1 + c2, atol=1e-12)
        for w, lam in zip(fs.filters, fs.eigenvalues):
            resid = np.linalg.norm(c1 @ w - lam * (c1 + c2) @ w)
            assert resid <= 1e-8 * np.linalg.norm(w)

    def test_eigenvalues_in_unit_interval(self, rng):
        target = [rng.normal(size=(10, 300)) for _ in range(15)]
        rest = [rng.normal(size=(10, 300)) for _ in range(15)]
        fs = csp_fit(target, rest, m=5)
        assert (fs.eigenvalues >= -1e-10).all()
        assert (fs.eigenvalues <= 1.0 + 1e-10).all()
        assert np.all(np.diff(fs.eigenvalues) <= 1e-12)  # descending

    def test_same_distribution_gives_half(self):
        rng = np.random.default_rng(11)
        target = [rng.normal(size=(3, 2000)) for _ in range(150)]
        rest = [rng.normal(size=(3, 2000)) for _ in range(150)]
        fs = csp_fit(target, rest, m=1, shrinkage=0.0)
        assert np.allclose(fs.eigenvalues, 0.5, atol=0.05)

    def test_swap_symmetry(self, rng):
        target = [rng.normal(size=(6, 500)) for _ in range(25)]
        rest = [1.3 * rng.normal(size=(6, 500)) for _ in range(25)]
        ab = csp_fit(target, rest, m=2)
        ba = csp_fit(rest, target, m=2)
        # top-m of one matches bottom-m of the other with lam -> 1 - lam
        assert np.allclose(ab.eigenvalues[:2], 1.0 - ba.eigenvalues[-2:][::-1], atol=1e-8)
        for w_ab, w_ba in zip(ab.filters[:2], ba.filters[-2:][::-1]):
            assert min(np.abs(w_ab - w_ba).max(), np.abs(w_ab + w_ba).max()) < 1e-7

    def test_filter_matrix_shape(self, rng):
        target = [rng.normal(size=(20, 300)) for _ in range(8)]
        rest = [rng.normal(size=(20, 300)) for _ in range(8)]
        fs = csp_fit(target, rest, m=3)
        assert fs.filters.shape == (6, 20)
        assert np.allclose(np.linalg.norm(fs.filters, axis=1), 1.0, atol=1e-12)

    def test_invalid_parameters(self, rng):
        trials = [rng.normal(size=(4, 100)) for _ in range(3)]
        with pytest.raises(InvalidParameterError):
            csp_fit([], trials)
        with pytest.raises(InvalidParameterError):
            csp_fit(trials, trials, m=0)
        with pytest.raises(InvalidParameterError):
            csp_fit(trials, trials, m=3)  # 2m > channels
        with pytest.raises(InvalidParameterError):
            csp_fit(trials, trials, shrinkage=1.5)


class TestCspFeatures:
    def uniform_filterset(self, n=6):
        return SpatialFilterSet(
            filters=np.eye(n),
            eigenvalues=np.linspace(0.9, 0.1, n),
            target_class=1,
            band=(8.0, 30.0),
            composite_cov=np.eye(n),
        )

    def test_uniform_variances(self, rng):
        base = rng.normal(size=600)
        data = np.stack([np.roll(base, 17 * i) for i in range(6)])
        feats = csp_features(data, self.uniform_filterset())
        assert np.allclose(feats, np.log(1.0 / 6.0), atol=1e-12)

    def test_scale_invariant(self, rng):
        data = rng.normal(size=(6, 400))
        fs = self.uniform_filterset()
        assert np.allclose(csp_features(data, fs), csp_features(3.7 * data, fs), atol=1e-9)

    def test_channel_mismatch(self, rng):
        with pytest.raises(InvalidParameterError):
            csp_features(rng.normal(size=(4, 100)), self.uniform_filterset(6))

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInputError):
            csp_features(np.zeros((6, 100)), self.uniform_filterset())


class TestFbcsp:
    def small_trials(self, rng, per_class=4, n_classes=3, n_ch=6):
        by_class = {}
        for cls in range(1, n_classes + 1):
            by_class[cls] = [rng.normal(size=(n_ch, 1000)) for _ in range(per_class)]
        return by_class

    def test_set_count_and_order(self, rng):
        by_class = self.small_trials(rng)
        sets = fbcsp_fit(by_class, bands=DEFAULT_BANDS, m=2)
        assert len(sets) == 9 * 3
        expected = [(band, cls) for band in DEFAULT_BANDS for cls in (1, 2, 3)]
        assert [(fs.band, fs.target_class) for fs in sets] == expected

    def test_feature_dimension_270(self, rng):
        by_class = self.small_trials(rng, per_class=3, n_classes=5, n_ch=8)
        trials = [t for c in sorted(by_class) for t in by_class[c]]
        classes = [c for c in sorted(by_class) for _ in by_class[c]]
        sets, x, layout = fit_transform_bands(trials, classes, bands=DEFAULT_BANDS, m=3)
        assert len(sets) == 45
        assert x.shape == (15, 270)
        assert len(layout) == 270

    def test_single_band_reduces_to_csp(self, rng):
        by_class = self.small_trials(rng, n_classes=2)
        band = (8.0, 12.0)
        sets = fbcsp_fit(by_class, bands=[band], m=2)
        assert len(sets) == 2
        from graspdec.signals import bandpass_matrix

        filt = {
            c: [bandpass_matrix(t, 1000.0, *band) for t in by_class[c]] for c in by_class
        }
        direct = csp_fit(filt[1], filt[2], m=2, target_class=1, band=band)
        assert np.allclose(np.abs(sets[0].filters), np.abs(direct.filters), atol=1e-9)
        assert np.allclose(sets[0].eigenvalues, direct.eigenvalues, atol=1e-10)

    def test_band_beyond_nyquist(self, rng):
        by_class = self.small_trials(rng)
        with pytest.raises(InvalidParameterError):
            fbcsp_fit(by_class, bands=[(400.0, 600.0)])

    def test_transform_matches_fit_features(self, rng):
        by_class = self.small_trials(rng)
        trials = [t for c in sorted(by_class) for t in by_class[c]]
        classes = [c for c in sorted(by_class) for _ in by_class[c]]
        sets, x_fit, _ = fit_transform_bands(trials, classes, bands=DEFAULT_BANDS[:3], m=2)
        x_again, _ = transform_bands(trials, sets)
        assert np.array_equal(x_fit, x_again)
        x_fbcsp, _ = fbcsp_feature_matrix(trials, sets)
        assert np.array_equal(x_fbcsp, x_again)


class TestSpatialPatterns:
    def test_identity_covariance_returns_filters(self):
        fs = SpatialFilterSet(
            filters=np.eye(3),
            eigenvalues=np.array([0.8, 0.5, 0.2]),
            target_class=1,
            band=(0.0, 0.0),
            composite_cov=np.eye(3),
        )
        assert np.allclose(spatial_patterns(fs), np.eye(3), atol=1e-12)


class TestSelectFeatures:
    def test_perfect_predictor_ranked_first(self, rng):
        y = np.repeat([1, 2, 3, 4, 5], 20)
        x = rng.normal(size=(100, 6))
        x[:, 3] = y  # exact copy of the label
        assert select_features(x, y, 1)[0] == 3

    def test_k_equals_dimension(self, rng):
        y = np.repeat([1, 2], 30)
        x = rng.normal(size=(60, 5))
        out = select_features(x, y, 5)
        assert sorted(out) == [0, 1, 2, 3, 4]

    def test_informative_beats_noise_over_seeds(self):
        wins = 0
        for seed in range(20):
            r = np.random.default_rng(seed)
            y = np.repeat([1, 2], 40)
            x = r.normal(size=(80, 2))
            x[:, 0] += 2.0 * (y == 1)  # planted signal in feature 0
            wins += select_features(x, y, 1)[0] == 0
        assert wins == 20

    def test_deterministic(self, rng):
        y = np.repeat([1, 2, 3], 20)
        x = rng.normal(size=(60, 12))
        assert select_features(x, y, 6) == select_features(x, y, 6)

    def test_invalid_k(self, rng):
        y = np.repeat([1, 2], 10)
        x = rng.normal(size=(20, 4))
        with pytest.raises(InvalidParameterError):
            select_features(x, y, 0)
        with pytest.raises(InvalidParameterError):
            select_features(x, y, 5)
        with pytest.raises(InvalidParameterError):
            select_features(x, np.ones(20), 2)
