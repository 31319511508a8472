from funlib.learn.mpe import distkit, functionals, policy
from funlib.learn.mpe.distkit import EmpiricalDistribution, KernelSpec
from funlib.learn.mpe.errors import (
    ConfigurationError,
    DomainError,
    EstimationFailure)
from funlib.learn.mpe.functionals import DirectionFunction, FunctionalSpec
from funlib.learn.mpe.harness.checks import errors_shrink, hadamard_fd_errors
from scipy.stats import norm
import numpy as np
import unittest


def quasi_normal(n, loc=0.0, scale=1.0):
    return norm.ppf((np.arange(n) + 0.5)/n, loc=loc, scale=scale)


class TestFunctionalSpec(unittest.TestCase):

    def test_invalid(self):

        with self.assertRaises(ConfigurationError):
            FunctionalSpec('variance')
        for tau in (None, 0.0, 1.0, 1.2):
            with self.assertRaises(DomainError):
                FunctionalSpec('quantile', tau=tau)
        with self.assertRaises(DomainError):
            FunctionalSpec('id_at', y=np.inf)

    def test_describe(self):

        self.assertEqual(
            FunctionalSpec('quantile', tau=0.25).describe(),
            {'variant': 'quantile', 'tau': 0.25})
        self.assertEqual(
            FunctionalSpec('gini').describe(),
            {'variant': 'gini'})


class TestEvaluate(unittest.TestCase):

    def test_variants(self):

        dist = EmpiricalDistribution([1.0, 2.0, 3.0, 4.0])

        self.assertEqual(
            functionals.evaluate(FunctionalSpec('id_at', y=2.5), dist), 0.5)
        self.assertEqual(
            functionals.evaluate(
                FunctionalSpec('quantile', tau=0.75), dist), 3.0)
        self.assertEqual(
            functionals.evaluate(FunctionalSpec('mean'), dist), 2.5)
        # mean absolute difference 1.25 over twice the mean
        self.assertAlmostEqual(
            functionals.evaluate(FunctionalSpec('gini'), dist), 0.25)


class TestDirectionFunction(unittest.TestCase):

    def test_algebra(self):

        a = DirectionFunction(lambda y: y**2)
        b = DirectionFunction.constant(1.0)
        y = np.array([-1.0, 0.0, 2.0])

        np.testing.assert_array_equal((a + b)(y), [2, 1, 5])
        np.testing.assert_array_equal((a - b)(y), [0, -1, 3])
        np.testing.assert_array_equal((2*a)(y), [2, 0, 8])
        np.testing.assert_array_equal((-a)(y), [-1, 0, -4])
        self.assertEqual(a(3.0), 9.0)

    def test_from_values(self):

        h = DirectionFunction.from_values([0.0, 1.0], [0.0, 2.0])

        self.assertEqual(h(0.5), 1.0)
        self.assertEqual(h(-3.0), 0.0)
        self.assertEqual(h(5.0), 2.0)


class TestHadamard(unittest.TestCase):

    def setUp(self):

        self.base = EmpiricalDistribution(quasi_normal(100000, 5.0))
        self.other = EmpiricalDistribution(quasi_normal(100000, 5.5))
        self.kde = KernelSpec()

        # the analytic h = G - F of a half-unit location shift
        self.shift = DirectionFunction(
            lambda y: norm.cdf(y, loc=5.5) - norm.cdf(y, loc=5.0))

    def test_id_at(self):

        spec = FunctionalSpec('id_at', y=5.0)
        value = functionals.hadamard_apply(
            spec, self.base, self.kde, self.shift)

        self.assertAlmostEqual(value, norm.cdf(-0.5) - 0.5, places=12)

    def test_quantile(self):

        spec = FunctionalSpec('quantile', tau=0.5)
        value = functionals.hadamard_apply(
            spec, self.base, self.kde, self.shift)

        expected = (0.5 - norm.cdf(-0.5))/norm.pdf(0.0)
        self.assertAlmostEqual(value, expected, delta=0.01)

    def test_mean(self):

        spec = FunctionalSpec('mean')
        value, n_trimmed = functionals.hadamard_apply(
            spec, self.base, self.kde, self.shift, return_trimmed=True)

        self.assertAlmostEqual(value, 0.5, delta=5e-3)
        self.assertEqual(n_trimmed, 0)

    def test_location_direction(self):

        rng = np.random.default_rng(3)
        samples = [
            self.base,
            EmpiricalDistribution(rng.uniform(1.0, 2.0, 100000))]

        for dist in samples:

            # the direction of a unit location shift of the outcome
            h = DirectionFunction(
                lambda y, dist=dist: -distkit.kde_eval(dist, self.kde, y))

            mean = functionals.hadamard_apply(
                FunctionalSpec('mean'), dist, self.kde, h)
            self.assertAlmostEqual(mean, 1.0, places=10)

            gini = functionals.hadamard_apply(
                FunctionalSpec('gini'), dist, self.kde, h)
            expected = -distkit.gini(dist)/dist.mean
            self.assertAlmostEqual(gini, expected, delta=1e-2*abs(expected))

    def test_mean_change_of_variables(self):

        # -∫h(y)dy = 1 for the negative of any density
        for loc, scale in ((5.2, 0.8), (4.5, 1.5)):
            h = DirectionFunction(
                lambda y, loc=loc, scale=scale: -norm.pdf(y, loc, scale))
            value = functionals.hadamard_apply(
                FunctionalSpec('mean'), self.base, self.kde, h)
            self.assertAlmostEqual(value, 1.0, delta=5e-3)

    def test_linear(self):

        spec = FunctionalSpec('mean')
        h = DirectionFunction(lambda y: norm.pdf(y, loc=5.0))

        single = functionals.hadamard_apply(spec, self.base, self.kde, h)
        double = functionals.hadamard_apply(spec, self.base, self.kde, 2*h)

        self.assertAlmostEqual(double, 2*single, places=10)

    def test_difference_quotients(self):

        steps = (0.1, 0.05, 0.01)
        floors = {'quantile': 2e-3, 'mean': 2e-3, 'gini': 2e-3}

        for variant, floor in floors.items():
            spec = FunctionalSpec(variant, tau=0.5) \
                if variant == 'quantile' else FunctionalSpec(variant)
            _, _, errors = hadamard_fd_errors(
                spec, self.base, self.other, t_values=steps)
            self.assertTrue(
                errors_shrink(errors, steps, floor),
                "%s: %s" % (variant, errors))

    def test_gini(self):

        # derivative of the mean absolute difference over twice the mean
        # along the mixture with a shifted copy
        a = 2/np.sqrt(np.pi)
        b = (
            np.sqrt(2)*np.sqrt(2/np.pi)*np.exp(-0.0625) +
            0.5*(1 - 2*norm.cdf(-0.5/np.sqrt(2))))
        expected = 2*(b - a)/10.0 - a*0.5/50.0

        value = functionals.hadamard_apply(
            FunctionalSpec('gini'), self.base, self.kde, self.shift)
        self.assertAlmostEqual(value, expected, delta=1e-3)

    def test_trimming(self):

        dist = EmpiricalDistribution(quasi_normal(20000))
        h = DirectionFunction.constant(-1.0)

        value, n_trimmed = functionals.hadamard_apply(
            FunctionalSpec('mean'), dist, self.kde, h,
            floor=0.05, return_trimmed=True)
        self.assertGreater(n_trimmed, 0)
        self.assertTrue(np.isfinite(value))

        with self.assertRaises(EstimationFailure):
            functionals.hadamard_apply(
                FunctionalSpec('mean'), dist, self.kde, h, floor=1e6)
        with self.assertRaises(EstimationFailure):
            functionals.hadamard_apply(
                FunctionalSpec('quantile', tau=0.5), dist, self.kde, h,
                floor=1e6)

    def test_gini_domain(self):

        dist = EmpiricalDistribution(quasi_normal(1000))
        with self.assertRaises(DomainError):
            functionals.hadamard_apply(
                FunctionalSpec('gini'), dist, self.kde, self.shift)


class TestWeights(unittest.TestCase):

    def test_omega(self):

        rng = np.random.default_rng(0)
        dist = EmpiricalDistribution(rng.uniform(1, 2, 5000))
        kde = KernelSpec()
        shift = policy.location_shift()
        y = np.array([1.2, 1.5, 1.8])
        d = np.zeros(3)

        np.testing.assert_allclose(
            functionals.omega_f(dist, kde, shift, y, d),
            -distkit.kde_eval(dist, kde, y))
        np.testing.assert_allclose(
            functionals.omega_gc(dist, shift, y, d),
            2*distkit.phi_weight(dist, distkit.ecdf_eval(dist, y)) /
            dist.mean**2)
