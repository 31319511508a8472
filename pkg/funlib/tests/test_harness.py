from funlib.learn.mpe import harness, models
from funlib.learn.mpe.errors import (
    ConfigurationError,
    DomainError,
    EstimationFailure,
    IngestionError,
    PresetLookupError,
    ReplicationError)
from funlib.learn.mpe.harness import cli
from funlib.learn.mpe.harness.config import ExperimentConfig, load_config
from unittest import mock
import json
import numpy as np
import os
import pandas as pd
import tempfile
import unittest


def write(path, text):
    with open(path, 'w') as f:
        f.write(text)


def small_config(**changes):
    '''A cheap Monte Carlo study of the mean effect of a location shift.'''

    values = dict(
        mode='mc_study',
        n=200,
        n_oracle=20000,
        replications=10,
        functional='mean',
        seed=5)
    values.update(changes)

    return ExperimentConfig(**values)


class TestConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_hash(self):

        a = ExperimentConfig()
        b = ExperimentConfig()
        c = a.replace(seed=1)

        self.assertEqual(a.config_hash(), b.config_hash())
        self.assertNotEqual(a.config_hash(), c.config_hash())
        self.assertEqual(len(a.config_hash()), 64)
        self.assertEqual(a.replace(seed=None).seed, 0)

    def test_invalid(self):

        invalid = [
            dict(mode='train'),
            dict(format='xml'),
            dict(method='bayes'),
            dict(policy='teleport'),
            dict(dgp_params={'gamma': 1.0}),
            dict(policy_params={'alpha': 0.5}),
            dict(first_stage={'learning_rate': 0.1}),
            dict(mode='estimate'),
            dict(replications=5),
            dict(t_step=0.1),
            dict(n=1),
        ]

        for changes in invalid:
            with self.assertRaises(ConfigurationError, msg=str(changes)):
                ExperimentConfig(**changes)

        with self.assertRaises(DomainError):
            ExperimentConfig(tau=1.5)
        with self.assertRaises(DomainError):
            ExperimentConfig(functional='id_at')
        with self.assertRaises(PresetLookupError):
            ExperimentConfig(dgp='nonlinear_everything')

    def test_read_config(self):

        path = os.path.join(self.tmp.name, 'experiment.ini')
        write(path, '\n'.join([
            '[experiment]',
            'mode = mc_study',
            'seed = 3',
            'n = 1e3',
            'replications = 20',
            '',
            '[dgp]',
            'preset = gaussian_endogenous',
            'rho = 0.25',
            '',
            '[policy]',
            'variant = mean_preserving',
            'alpha = 0.5',
            '',
            '[functional]',
            'variant = quantile',
            'tau = 0.25',
            '',
            '[estimator]',
            'method = debiased',
            'control = no',
            'bandwidths = 0.3, 0.4',
            'folds = 3',
        ]))

        config = load_config(path, seed=7, n=None)

        self.assertEqual(config.seed, 7)
        self.assertEqual(config.n, 1000)
        self.assertEqual(config.replications, 20)
        self.assertEqual(config.dgp_params, {'rho': 0.25})
        self.assertEqual(config.policy_spec().alpha, 0.5)
        self.assertEqual(config.functional_spec().tau, 0.25)
        self.assertEqual(config.method, 'debiased')
        self.assertFalse(config.control)

        cfg = config.first_stage_config()
        self.assertEqual(cfg.bandwidths, (0.3, 0.4))
        self.assertEqual(cfg.folds, 3)
        self.assertEqual(cfg.seed, 7)
        self.assertEqual(config.structural_model().params, {'rho': 0.25})

    def test_read_invalid(self):

        cases = [
            '[experiment]\nmode = oracle\nwhatever = 1\n',
            '[training]\nepochs = 1\n',
            '[experiment]\nn = many\n',
            '[estimator]\nfolds = few\n',
            '[functional]\nvariant = mean\nweights = 1\n',
            '[experiment\n',
        ]

        path = os.path.join(self.tmp.name, 'broken.ini')
        for text in cases:
            write(path, text)
            with self.assertRaises(ConfigurationError, msg=text):
                load_config(path)

        with self.assertRaises(ConfigurationError):
            load_config(os.path.join(self.tmp.name, 'missing.ini'))

    def test_rank_preserving_target(self):

        config = ExperimentConfig(
            policy='rank_preserving',
            policy_params={
                'target': 'norm',
                'target_loc': 0.5,
                'target_scale': 2.0})
        spec = config.policy_spec()

        self.assertEqual(spec.target.mean(), 0.5)
        self.assertEqual(spec.target.std(), 2.0)

        for name in ('poisson', 'no_such_distribution'):
            config = ExperimentConfig(
                policy='rank_preserving',
                policy_params={'target': name})
            with self.assertRaises(ConfigurationError):
                config.policy_spec()

    def test_kernel_options(self):

        cfg = ExperimentConfig(
            first_stage={'kernel': 'epanechnikov', 'y_bandwidth': 0.2}
        ).first_stage_config(seed=11)

        self.assertEqual(cfg.kernel.kernel, 'epanechnikov')
        self.assertEqual(cfg.kernel.bandwidth, 0.2)
        self.assertEqual(cfg.seed, 11)


class TestIo(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'data.csv')

    def tearDown(self):
        self.tmp.cleanup()

    def test_load(self):

        rng = np.random.default_rng(0)
        frame = pd.DataFrame({
            'y': rng.standard_normal(60),
            'd': rng.standard_normal(60),
            'x10': np.arange(60),
            'x2': np.ones(60),
            'x1': -np.ones(60),
            'z': rng.standard_normal(60),
            'comment': ['a']*60,
        })
        frame.to_csv(self.path, index=False)

        data = harness.load_csv(self.path)

        self.assertEqual(data.n, 60)
        self.assertEqual(data.k, 3)
        np.testing.assert_array_equal(data.x[0], [-1, 1, 0])
        self.assertTrue(data.has_instrument)

    def test_drop_rows(self):

        rows = ['y,d'] + ['%d,%d' % (i, i) for i in range(60)]
        rows[3] = '2,'
        rows[5] = 'nan,4'
        rows[7] = 'seven,6'
        write(self.path, '\n'.join(rows) + '\n')

        with self.assertLogs('funlib.learn.mpe.harness.io', level='WARNING'):
            data = harness.load_csv(self.path)

        self.assertEqual(data.n, 57)

    def test_invalid(self):

        write(self.path, 'y,x1\n1,2\n')
        with self.assertRaises(IngestionError):
            harness.load_csv(self.path)

        write(self.path, 'y,d\n1,2\n3,4\n')
        with self.assertRaises(IngestionError):
            harness.load_csv(self.path)

        write(self.path, '')
        with self.assertRaises(IngestionError):
            harness.load_csv(self.path)

        # ingestion errors are configuration errors
        with self.assertRaises(ConfigurationError):
            harness.load_csv(self.path)

    def test_export_exact(self):

        dgp = models.get_preset('triangular_normal')
        sample = models.simulate(dgp, 100, seed=0)

        harness.export_csv(sample, self.path)
        data = harness.load_csv(self.path)

        np.testing.assert_array_equal(data.y, sample.y)
        np.testing.assert_array_equal(data.d, sample.d)
        np.testing.assert_array_equal(data.z, sample.z)
        self.assertEqual(
            list(pd.read_csv(self.path).columns), ['y', 'd', 'z'])

        harness.export_csv(sample, self.path, with_latents=True)
        self.assertEqual(
            list(pd.read_csv(self.path).columns),
            ['y', 'd', 'z', 'e', 'eta'])


class TestRunner(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_mc_study(self):

        record = harness.run(small_config())

        self.assertEqual(record.mode, 'mc_study')
        self.assertEqual(len(record.replications), 10)
        self.assertEqual(
            [r['index'] for r in record.replications], list(range(10)))
        self.assertAlmostEqual(record.oracle['mpe'], 1.0, places=8)
        self.assertAlmostEqual(record.summary['mean'], 1.0, delta=0.15)
        self.assertEqual(
            sorted(record.summary),
            ['bias', 'mc_se', 'mean', 'replications', 'rmse', 'std'])
        self.assertIn('max_trim_fraction', record.trim)

    def test_deterministic(self):

        config = small_config()
        a = harness.run(config)
        b = harness.run(config.replace(n_jobs=2))
        longer = harness.run(config.replace(replications=12))

        values = [r['value'] for r in a.replications]
        self.assertEqual(values, [r['value'] for r in b.replications])
        self.assertEqual(
            values,
            [r['value'] for r in longer.replications[:10]])
        self.assertEqual(a.config_hash, config.config_hash())

        # byte-identical apart from timing
        a.wall_clock = b.wall_clock = 0.0
        self.assertEqual(harness.io.to_json(a), harness.io.to_json(b))
        self.assertNotEqual(a.config_hash, longer.config_hash)

    def test_oracle_cache(self):

        cache = {}
        config = small_config(mode='oracle')

        first = harness.run(config, cache)
        with mock.patch(
                'funlib.learn.mpe.harness.runner.oracle_mpe',
                side_effect=AssertionError("oracle recomputed")):
            second = harness.run(config, cache)

        self.assertEqual(first.oracle, second.oracle)
        self.assertEqual(
            sorted(first.oracle),
            ['mpe', 'structural', 'weighted_structural'])

    def test_exported_sample(self):

        path = os.path.join(self.tmp.name, 'sample.csv')

        for config in (
                small_config(),
                small_config(
                    n=500, functional='quantile', tau=0.5,
                    method='debiased')):

            harness.run(config.replace(mode='oracle', export_sample=path))
            estimated = harness.run(
                config.replace(mode='estimate', data_path=path))
            study = harness.run(config)

            self.assertEqual(
                estimated.estimate['value'],
                study.replications[0]['value'])
            self.assertEqual(
                estimated.estimate['method'],
                study.replications[0]['method'])

    def test_bootstrap(self):

        path = os.path.join(self.tmp.name, 'sample.csv')
        config = small_config()

        harness.run(config.replace(mode='oracle', export_sample=path))
        record = harness.run(
            config.replace(mode='estimate', data_path=path, bootstrap=10))

        self.assertEqual(record.bootstrap['replications'], 10)
        self.assertLess(record.bootstrap['lower'], record.bootstrap['upper'])

    def test_failed_replication(self):

        with self.assertRaises(ReplicationError) as context:
            harness.run(small_config(n=20))

        self.assertEqual(context.exception.index, 0)
        self.assertIsInstance(context.exception.__cause__, EstimationFailure)

    def test_emit(self):

        record = harness.run(small_config())

        path = os.path.join(self.tmp.name, 'result.json')
        harness.emit(record, path, 'json')
        with open(path) as f:
            result = json.load(f)
        self.assertEqual(result['config_hash'], record.config_hash)
        self.assertEqual(len(result['replications']), 10)

        path = os.path.join(self.tmp.name, 'result.csv')
        harness.emit(record, path, 'csv')
        frame = pd.read_csv(path)
        self.assertEqual(len(frame), 11)
        self.assertEqual(list(frame['kind']).count('summary'), 1)
        self.assertTrue((frame['config_hash'] == record.config_hash).all())

        with self.assertRaises(ConfigurationError):
            harness.emit(record, path, 'xml')


class TestChecks(unittest.TestCase):

    def test_unknown(self):

        with self.assertRaises(KeyError):
            harness.run_checks(ExperimentConfig(mode='check'), ['magic'])

    def test_failing_check(self):

        def broken(config):
            raise EstimationFailure("no density")

        checks = dict(harness.CHECKS)
        checks['broken'] = (broken, "a check that fails")

        with mock.patch.dict(harness.checks.CHECKS, checks):
            results = harness.run_checks(
                ExperimentConfig(mode='check'), ['broken'])

        self.assertFalse(results[0].passed)
        self.assertEqual(results[0].details, {'error': 'no density'})
        self.assertEqual(
            results[0].to_dict()['verifies'], "a check that fails")


class TestCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, 'out.json')

    def tearDown(self):
        self.tmp.cleanup()

    def common(self, *extra):
        return [
            '--functional', 'mean', '--n', '200', '--n-oracle', '20000',
            '--reps', '10', '--out', self.out] + list(extra)

    def test_success(self):

        self.assertEqual(cli.main(['mc'] + self.common()), cli.EXIT_SUCCESS)
        with open(self.out) as f:
            result = json.load(f)
        self.assertEqual(result['mode'], 'mc_study')
        self.assertEqual(result['config']['functional'], 'mean')

    def test_configuration_errors(self):

        self.assertEqual(
            cli.main(['mc', '--dgp', 'nonlinear_everything']),
            cli.EXIT_CONFIGURATION)
        self.assertEqual(
            cli.main(['estimate', '--functional', 'mean']),
            cli.EXIT_CONFIGURATION)
        self.assertEqual(
            cli.main(['mc'] + self.common('--reps', '3')),
            cli.EXIT_CONFIGURATION)
        self.assertEqual(
            cli.main([
                'estimate', '--data',
                os.path.join(self.tmp.name, 'missing.csv')]),
            cli.EXIT_CONFIGURATION)

    def test_estimation_failure(self):

        self.assertEqual(
            cli.main(['mc'] + self.common('--n', '20')),
            cli.EXIT_FAILURE)

    def test_replication_configuration_error(self):

        failure = ConfigurationError("bandwidth grid is empty")
        with mock.patch(
                'funlib.learn.mpe.harness.runner.estimate',
                side_effect=failure):
            self.assertEqual(
                cli.main(['mc'] + self.common()),
                cli.EXIT_CONFIGURATION)

        with mock.patch(
                'funlib.learn.mpe.harness.runner.estimate',
                side_effect=EstimationFailure("no density")):
            self.assertEqual(
                cli.main(['mc'] + self.common()),
                cli.EXIT_FAILURE)

    def test_usage(self):

        with self.assertRaises(SystemExit):
            cli.main(['train'])
