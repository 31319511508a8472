from funlib.learn.mpe import estimators, models, policy
from funlib.learn.mpe.distkit import EmpiricalDistribution
from funlib.learn.mpe.errors import (
    ConfigurationError,
    DomainError,
    TrimmedPointError)
from scipy.stats import norm
import numpy as np
import unittest


class TestApply(unittest.TestCase):

    def test_examples(self):

        self.assertAlmostEqual(
            policy.apply(policy.location_shift(), 3.0, 0.1), 3.1)
        self.assertAlmostEqual(
            policy.apply(policy.location_scale(0.0, 1.0, 0.0), 3.0, 0.1), 3.1)
        self.assertAlmostEqual(
            policy.apply(policy.mean_preserving(1.0, 2.0), 3.0, 0.1), 3.1)

    def test_identity_at_zero(self):

        rng = np.random.default_rng(0)
        d = rng.standard_normal(1000)
        specs = [
            policy.location_shift(),
            policy.location_scale(0.5, 2.0, -0.5),
            policy.mean_preserving(0.7, 0.1),
            policy.rank_preserving(norm(0.5, 1.2), sample=d),
        ]

        for spec in specs:
            np.testing.assert_allclose(
                policy.apply(spec, d, 0.0), d, rtol=0, atol=1e-12)

    def test_t_range(self):

        with self.assertRaises(DomainError):
            policy.apply(policy.location_shift(), 1.0, 1.5)
        with self.assertRaises(DomainError):
            policy.apply(policy.location_shift(), 1.0, -0.1)

    def test_mean_preserved(self):

        rng = np.random.default_rng(1)
        d = rng.exponential(size=5000)
        spec = policy.bind(policy.mean_preserving(0.8), d)

        self.assertAlmostEqual(spec.mean_d, d.mean())
        moved = policy.apply(spec, d, 0.3)
        self.assertAlmostEqual(moved.mean(), d.mean(), delta=1e-10)
        self.assertGreater(moved.std(), d.std())

    def test_unbound(self):

        with self.assertRaises(ConfigurationError):
            policy.apply(policy.mean_preserving(1.0), 1.0, 0.1)
        with self.assertRaises(ConfigurationError):
            policy.pi_dot(policy.rank_preserving(norm()), 0.0)

    def test_invalid(self):

        with self.assertRaises(ConfigurationError):
            policy.PolicySpec('teleport')
        with self.assertRaises(ConfigurationError):
            policy.mean_preserving(alpha=1.5)
        with self.assertRaises(DomainError):
            policy.location_scale(s_dot=-1.0)
        with self.assertRaises(ConfigurationError):
            policy.rank_preserving(None)


class TestPiDot(unittest.TestCase):

    def test_closed_forms(self):

        self.assertEqual(policy.pi_dot(policy.location_shift(), 7.0), 1.0)
        self.assertAlmostEqual(
            policy.pi_dot(policy.mean_preserving(0.5, 0.0), 2.0), 1.0)
        self.assertAlmostEqual(
            policy.pi_dot(policy.location_scale(1.0, 0.5, 2.0), 3.0),
            0.5 + 2.0*2.0)

        d = np.linspace(-1, 1, 5)
        np.testing.assert_array_equal(
            policy.pi_dot_deriv(policy.mean_preserving(0.3, 0.0), d), 0.3)
        np.testing.assert_array_equal(
            policy.pi_dot_deriv(policy.location_shift(), d), 0.0)

    def test_finite_differences(self):

        self.assertAlmostEqual(
            policy.finite_diff_pi_dot(policy.location_shift(), 0.0, 1e-4),
            1.0,
            places=10)
        self.assertAlmostEqual(
            policy.finite_diff_pi_dot(
                policy.location_scale(1.0, 0.0, 1.0), 2.0, 1e-4),
            1.0,
            delta=1e-6)
        self.assertAlmostEqual(
            policy.finite_diff_pi_dot(
                policy.mean_preserving(1.0, 0.0), -1.0, 1e-4),
            -1.0,
            delta=1e-6)

        with self.assertRaises(DomainError):
            policy.finite_diff_pi_dot(policy.location_shift(), 0.0, 0.1)

    def test_affine_exact(self):

        d = np.linspace(-2, 2, 41)
        for spec in (
                policy.location_shift(),
                policy.location_scale(0.2, 1.5, 0.5),
                policy.mean_preserving(-0.5, 0.3)):
            np.testing.assert_allclose(
                policy.finite_diff_pi_dot(spec, d, 0.01),
                policy.pi_dot(spec, d),
                atol=1e-12)


class TestRankPreserving(unittest.TestCase):

    def setUp(self):

        rng = np.random.default_rng(2)
        self.d = rng.standard_normal(10000)

    def test_same_target(self):

        target = EmpiricalDistribution(self.d)
        spec = policy.rank_preserving(target, sample=self.d)
        points = np.linspace(-1.5, 1.5, 31)

        np.testing.assert_allclose(
            policy.pi_dot(spec, points), 0.0, atol=1e-12)
        for t in (0.1, 0.5, 1.0):
            np.testing.assert_allclose(
                policy.apply(spec, points, t), points, atol=1e-3)

    def test_pi_dot_matches_differences(self):

        spec = policy.rank_preserving(norm(0.3, 1.1), sample=self.d)
        points = np.linspace(-1.5, 1.5, 13)

        np.testing.assert_allclose(
            policy.finite_diff_pi_dot(spec, points, 0.01),
            policy.pi_dot(spec, points),
            atol=0.05)

    def test_pi_dot_deriv(self):

        spec = policy.rank_preserving(norm(0.3, 1.1), sample=self.d)
        points = np.linspace(-1.0, 1.0, 9)
        step = 1e-3

        numeric = (
            policy.pi_dot(spec, points + step) -
            policy.pi_dot(spec, points - step))/(2*step)
        np.testing.assert_allclose(
            policy.pi_dot_deriv(spec, points), numeric, atol=1e-2)

    def test_outside_support(self):

        spec = policy.rank_preserving(norm(), sample=self.d)

        with self.assertRaises(DomainError):
            policy.apply(spec, self.d.max() + 1.0, 0.1)

        self.assertTrue(np.isnan(policy.pi_dot(spec, [self.d.max() + 1.0])[0]))
        with self.assertRaises(TrimmedPointError):
            policy.pi_dot(spec, self.d.max() + 1.0)

    def test_support_check(self):

        self.assertTrue(
            policy.support_check(policy.mean_preserving(-1.0), self.d, 0.5))

        with self.assertLogs('funlib.learn.mpe.policy', level='WARNING'):
            contained = policy.support_check(
                policy.location_shift(), self.d, 0.5)
        self.assertFalse(contained)

    def test_support_check_rank_preserving(self):

        self.assertTrue(
            policy.support_check(
                policy.rank_preserving(norm()), self.d, 1.0))

        wide = policy.rank_preserving(norm(0.5, 2.0))
        self.assertTrue(policy.support_check(wide, self.d, 0.1))
        with self.assertLogs('funlib.learn.mpe.policy', level='WARNING'):
            contained = policy.support_check(wide, self.d, 1.0)
        self.assertFalse(contained)

    def test_support_check_callers(self):

        dgp = models.get_preset('linear_exogenous')
        sample = models.simulate(dgp, 1000, seed=3)
        wide = policy.rank_preserving(norm(0.5, 2.0))

        with self.assertLogs('funlib.learn.mpe.policy', level='WARNING'):
            models.simulate_counterfactual(dgp, sample, wide, 1.0)
        with self.assertLogs('funlib.learn.mpe.policy', level='WARNING'):
            estimators.mean_mpe(sample.observed(), wide)

    def test_describe(self):

        spec = policy.rank_preserving(norm(0.5, 2.0))
        self.assertEqual(
            spec.describe(),
            {
                'variant': 'rank_preserving',
                'target': "norm(args=[0.5, 2.0], kwds={})",
            })
