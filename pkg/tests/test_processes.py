"""State process and panel simulator test suite"""

import unittest
import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from scipy import stats

from dyncred.errors import InvalidParams, InvalidRho
from dyncred.processes import (
    RNG_ALGORITHM,
    make_rng,
    sample_observations,
    simulate_arg1,
    simulate_bgar1,
    simulate_gar1,
    simulate_inar1_het,
    simulate_inar1_paths,
    simulate_panel,
    simulate_state_paths,
)
from dyncred.types import CovariateLaw, EdFamily, StateFamily, StateSpec

# Monte Carlo checks allow this many standard errors
N_SE = 3.0


def _se_mean(x):
    return np.std(x, ddof=1) / np.sqrt(len(x))


def _se_var(x):
    centred = x - x.mean()
    return np.std(centred ** 2, ddof=1) / np.sqrt(len(x))


def _se_cov(a, b):
    prod = (a - a.mean()) * (b - b.mean())
    return np.std(prod, ddof=1) / np.sqrt(len(a))


class MomentAssertions:
    """Mixin comparing sample moments of stationary columns with formulas"""

    def assert_moments(self, paths, mean, variance, covariances):
        first = paths[:, 0]
        self.assertLess(abs(first.mean() - mean), N_SE * _se_mean(first))
        self.assertLess(abs(first.var() - variance), N_SE * _se_var(first))
        for h, cov in enumerate(covariances, start=1):
            with self.subTest(lag=h):
                later = paths[:, h]
                sample = np.mean((first - first.mean()) * (later - later.mean()))
                self.assertLess(abs(sample - cov), N_SE * _se_cov(first, later))


@pytest.mark.slow
class TestStateMoments(MomentAssertions, unittest.TestCase):
    """Monte Carlo moments over 10^6 transitions per family"""

    N_PATHS = 250_000
    T = 4

    def test_bgar1_moments(self):
        paths = simulate_state_paths(StateSpec.bgar1(1.0, 0.8), self.T, self.N_PATHS, seed=1)
        self.assertTrue(np.all(paths > 0))
        self.assert_moments(paths, 1.0, 1.0, [0.8, 0.64, 0.512])
        for t in range(self.T + 1):
            self.assertLess(abs(paths[:, t].mean() - 1.0), N_SE * _se_mean(paths[:, t]))

    def test_bgar1_independence_limit(self):
        paths = simulate_state_paths(StateSpec.bgar1(1.0, 0.0), self.T, self.N_PATHS, seed=2)
        self.assert_moments(paths, 1.0, 1.0, [0.0, 0.0, 0.0])

    def test_arg1_moments_and_regression(self):
        # c * delta = 1 - rho gives a unit mean; variance delta c^2 / (1 - rho)^2
        spec = StateSpec.arg1(0.5, 0.25, 2.0)
        paths = simulate_state_paths(spec, self.T, self.N_PATHS, seed=3)
        self.assertTrue(np.all(paths > 0))
        self.assert_moments(paths, 1.0, 0.5, [0.25, 0.125, 0.0625])

        x, y = paths[:, :-1].ravel(), paths[:, 1:].ravel()
        fit = stats.linregress(x, y)
        self.assertLess(abs(fit.slope - 0.5), N_SE * fit.stderr)

    def test_gar1_exponential_marginal(self):
        paths = simulate_state_paths(StateSpec.gar1(1.0, 2.0, 0.5), self.T, self.N_PATHS, seed=4)
        sample = paths[:, -1]
        result = stats.kstest(sample, stats.expon(scale=0.5).cdf)
        self.assertGreater(result.pvalue, 0.01)
        self.assert_moments(paths, 0.5, 0.25, [0.125, 0.0625])

    def test_gar1_general_shape(self):
        shape, rate, rho = 2.5, 1.5, 0.6
        paths = simulate_state_paths(StateSpec.gar1(shape, rate, rho), self.T, self.N_PATHS,
                                     seed=5)
        self.assertTrue(np.all(paths > 0))
        variance = shape / rate ** 2
        self.assert_moments(paths, shape / rate, variance, [variance * rho, variance * rho ** 2])

    def test_inar1_moments(self):
        lam, p, psi0 = 0.5, 0.4, 0.8
        m = lam / (1 - p)
        y = simulate_inar1_paths(lam, p, psi0, 5, 200_000, seed=6).astype(float)
        self.assertTrue(np.issubdtype(simulate_inar1_paths(lam, p, psi0, 2, 3, 0).dtype,
                                      np.integer))
        self.assert_moments(y, m, m * (1 + m * psi0),
                            [m * (p ** h + m * psi0) for h in (1, 2, 3)])



def _window_trend_pvalues(paths, n_windows=50):
    """Slope p-values of windowed mean and variance against window index"""
    width = paths.shape[1] // n_windows
    windows = paths[:, :width * n_windows].reshape(paths.shape[0], n_windows, width)
    windows = windows.transpose(1, 0, 2).reshape(n_windows, -1)
    index = np.arange(n_windows)
    return (stats.linregress(index, windows.mean(axis=1)).pvalue,
            stats.linregress(index, windows.var(axis=1)).pvalue)


@pytest.mark.slow
class TestStationarity(unittest.TestCase):
    """No trend in windowed moments over 10^6 steps per family"""

    N_PATHS = 1000
    T = 999

    def assert_no_trend(self, paths):
        mean_p, var_p = _window_trend_pvalues(np.asarray(paths, dtype=float))
        self.assertGreater(mean_p, 0.01)
        self.assertGreater(var_p, 0.01)

    def test_bgar1(self):
        self.assert_no_trend(simulate_state_paths(StateSpec.bgar1(1.0, 0.6), self.T,
                                                  self.N_PATHS, seed=31))

    def test_arg1(self):
        self.assert_no_trend(simulate_state_paths(StateSpec.arg1(0.5, 0.25, 2.0), self.T,
                                                  self.N_PATHS, seed=32))

    def test_gar1(self):
        specs = ((33, StateSpec.gar1(1.0, 2.0, 0.5)), (34, StateSpec.gar1(2.5, 1.5, 0.6)))
        for seed, spec in specs:
            with self.subTest(shape=spec.shape):
                self.assert_no_trend(simulate_state_paths(spec, self.T, self.N_PATHS, seed=seed))

    def test_inar1(self):
        self.assert_no_trend(simulate_inar1_paths(0.5, 0.4, 0.8, self.T + 1, self.N_PATHS,
                                                  seed=35))

class TestStatePaths(unittest.TestCase):
    """Test single-path simulators"""

    def test_bgar1_static_limit(self):
        path = simulate_bgar1(0.5, 1.0, 10, seed=42)
        self.assertEqual(path.family, StateFamily.CONSTANT)
        self.assertTrue(np.all(path.values == path.values[0]))
        self.assertEqual(path.T, 10)

    def test_bgar1_invalid_rho(self):
        with self.assertRaises(InvalidRho):
            simulate_bgar1(1.0, 1.2, 5, seed=1)
        with self.assertRaises(InvalidRho):
            simulate_bgar1(1.0, -0.1, 5, seed=1)

    def test_invalid_params(self):
        with self.assertRaises(InvalidParams):
            simulate_arg1(0.5, -1.0, 2.0, 5, seed=1)
        with self.assertRaises(InvalidParams):
            simulate_gar1(1.0, 1.0, 1.0, 5, seed=1)
        with self.assertRaises(InvalidParams):
            simulate_inar1_het(0.5, 1.0, 0.8, 5, seed=1)

    def test_paths_positive_and_deterministic(self):
        for path_fn in (lambda s: simulate_bgar1(1.0, 0.6, 20, s),
                        lambda s: simulate_arg1(0.3, 0.5, 1.4, 20, s),
                        lambda s: simulate_gar1(2.0, 2.0, 0.7, 20, s)):
            a, b = path_fn(9), path_fn(9)
            self.assertTrue(np.all(a.values > 0))
            np.testing.assert_array_equal(a.values, b.values)
            self.assertFalse(np.array_equal(a.values, path_fn(10).values))

    def test_inar1_homogeneous_poisson(self):
        y = simulate_inar1_paths(2.0, 0.0, 0.0, 4, 50_000, seed=8)
        self.assertLess(abs(y.mean() - 2.0), 0.05)
        self.assertEqual(simulate_inar1_het(2.0, 0.0, 0.0, 4, seed=8).shape, (4,))

    def test_streams_are_independent_of_order(self):
        first = make_rng(5, 3).random(4)
        make_rng(5, 2).random(100)
        np.testing.assert_array_equal(first, make_rng(5, 3).random(4))
        with self.assertRaises(InvalidParams):
            make_rng(-1)


class TestSimulatePanel(unittest.TestCase):
    """Test claim panel generation"""

    def test_default_scheme_layout(self):
        panel = simulate_panel(20, 5, StateSpec.bgar1(1.0, 0.6), EdFamily.poisson(),
                               [-3.0, 2.0], seed=1)
        self.assertEqual(panel.n_policies, 20)
        self.assertEqual(len(panel.records), 20 * 6)
        self.assertEqual(panel.n_covariates, 1)
        self.assertEqual(panel.validate(), [])
        self.assertTrue(panel.has_truth)
        self.assertEqual(panel.train_periods, 5)
        self.assertEqual(panel.metadata["rng_algorithm"], RNG_ALGORITHM)
        self.assertEqual(panel.metadata["seed"], 1)
        for r in panel.records:
            self.assertAlmostEqual(r.lam, np.exp(-3.0 + 2.0 * r.covariates[0]), places=12)
            self.assertEqual(r.y, int(r.y))
            self.assertGreater(r.true_r, 0)

        histories = panel.policy_histories()
        self.assertEqual(len(histories), 20)
        self.assertEqual(histories[0].T, 5)
        self.assertEqual(histories[0].policy_id, "P00001")

    def test_policy_histories_explicit_zero_training(self):
        panel = simulate_panel(4, 3, StateSpec.bgar1(1.0, 0.6), EdFamily.poisson(),
                               [-1.0, 1.0], seed=2)
        histories = panel.policy_histories(0)
        self.assertEqual(len(histories), 4)
        self.assertTrue(all(h.T == 0 for h in histories))
        first = panel.by_policy()[histories[0].policy_id][0]
        self.assertEqual(histories[0].lambda_next, first.lam)
        self.assertEqual(panel.policy_histories()[0].T, 3)

    def test_determinism(self):
        args = (15, 3, StateSpec.bgar1(2.0, 0.9), EdFamily.poisson(), [-1.0, 0.5, 0.3])
        a = simulate_panel(*args, seed=77)
        b = simulate_panel(*args, seed=77)
        c = simulate_panel(*args, seed=78)
        self.assertEqual(a.records, b.records)
        self.assertNotEqual(a.records, c.records)

    def test_single_policy_smoke(self):
        panel = simulate_panel(1, 1, StateSpec.bgar1(1.0, 0.5), EdFamily.poisson(), [0.0])
        self.assertEqual(len(panel.records), 2)
        self.assertEqual(panel.n_covariates, 0)

    def test_constant_state_unit_ratio(self):
        panel = simulate_panel(2000, 4, StateSpec.bgar1(0.0, 0.5), EdFamily.poisson(), [0.0],
                               seed=3)
        ratios = np.array([r.y / r.lam for r in panel.records])
        self.assertTrue(all(r.true_r == 1.0 for r in panel.records))
        self.assertLess(abs(ratios.mean() - 1.0), 0.05)

    @pytest.mark.slow
    def test_gamma_variance(self):
        psi, sigma2 = 0.5, 0.5
        panel = simulate_panel(10_000, 4, StateSpec.constant(sigma2), EdFamily.gamma(psi), [0.0],
                               seed=4)
        y = np.array([r.y for r in panel.records])
        self.assertTrue(np.all(y > 0))
        self.assertLess(abs(y.var() - (psi * (1 + sigma2) + sigma2)), 0.2)

    def test_covariate_law(self):
        panel = simulate_panel(3000, 1, StateSpec.bgar1(1.0, 0.5), EdFamily.poisson(),
                               [0.0, 1.0], CovariateLaw(mean=0.0, variance=0.6), seed=5)
        x = np.array([r.covariates[0] for r in panel.records])
        self.assertLess(abs(x.var() - 0.6), 0.05)

    def test_invalid_spec(self):
        with self.assertRaises(InvalidParams):
            simulate_panel(0, 5, StateSpec.bgar1(1.0, 0.5), EdFamily.poisson(), [0.0])
        with self.assertRaises(InvalidParams):
            simulate_panel(5, 5, StateSpec.bgar1(1.0, 0.5), EdFamily.gamma(-1.0), [0.0])

    def test_sample_observations_gamma_bridge(self):
        rng = make_rng(12)
        y = sample_observations(EdFamily.gamma(0.5), np.full(200_000, 2.0), rng)
        self.assertLess(abs(y.mean() - 2.0), 0.02)
        self.assertLess(abs(y.var() - 0.5 * 4.0), 0.05)


if __name__ == '__main__':
    unittest.main()
