from funlib.learn.mpe import estimators, models, policy
from funlib.learn.mpe.errors import ConfigurationError
from funlib.learn.mpe.estimators import FirstStageConfig
from funlib.learn.mpe.functionals import FunctionalSpec
from scipy.stats import kstest
import numpy as np
import unittest


class TestControlVariable(unittest.TestCase):

    @classmethod
    def setUpClass(cls):

        dgp = models.get_preset('triangular_normal')
        cls.sample = models.simulate(dgp, 1500, seed=21)
        cls.data = cls.sample.observed()
        cls.cfg = FirstStageConfig()

    def test_uniform(self):

        v = estimators.control_variable(self.data, self.cfg)

        self.assertEqual(v.shape, (1500,))
        self.assertTrue(np.all((v >= 0.001) & (v <= 0.999)))
        self.assertLess(kstest(v, 'uniform').statistic, 0.06)

    def test_tracks_selection_noise(self):

        v = estimators.control_variable(self.data, self.cfg)
        self.assertGreater(np.corrcoef(v, self.sample.eta)[0, 1], 0.9)

    def test_needs_instrument(self):

        data = models.simulate(
            models.get_preset('linear_exogenous'), 100, 0).observed()

        with self.assertRaises(ConfigurationError):
            estimators.control_variable(data, self.cfg)
        with self.assertRaises(ConfigurationError):
            estimators.cv_mean_mpe(data, policy.location_shift())

    def test_degenerate(self):

        dgp = models.get_preset('triangular_normal', eta_scale=0.0)
        data = models.simulate(dgp, 1000, seed=0).observed()

        with self.assertLogs(
                'funlib.learn.mpe.estimators.first_stage',
                level='WARNING'):
            estimators.control_variable(data, self.cfg)


class TestControlEstimators(unittest.TestCase):

    @classmethod
    def setUpClass(cls):

        dgp = models.get_preset('triangular_normal')
        cls.data = models.simulate(dgp, 1500, seed=22).observed()
        cls.shift = policy.location_shift()

    def test_quantile(self):

        corrected = estimators.cv_quantile_mpe(self.data, self.shift, 0.5)
        naive = estimators.plugin_quantile_mpe(self.data, self.shift, 0.5)

        self.assertEqual(corrected.method, 'cv_plugin')
        self.assertEqual(list(corrected.bandwidths), ['d', 'v'])
        self.assertAlmostEqual(corrected.value, 1.0, delta=0.35)
        # the regression slope of Y on D is 1.3
        self.assertGreater(naive.value, 1.05)

    def test_mean(self):

        corrected = estimators.cv_mean_mpe(self.data, self.shift)
        naive = estimators.mean_mpe(self.data, self.shift)

        self.assertEqual(corrected.method, 'cv_plugin')
        self.assertAlmostEqual(corrected.value, 1.0, delta=0.25)
        self.assertAlmostEqual(naive.value, 1.3, delta=0.1)

    def test_dispatch(self):

        median = FunctionalSpec('quantile', tau=0.5)
        estimate = estimators.estimate(
            self.data, self.shift, median, 'plugin', control=True)

        self.assertEqual(
            estimate.value,
            estimators.cv_quantile_mpe(self.data, self.shift, 0.5).value)
