from ..errors import ReplicationError
from ..estimators import bootstrap, estimate
from ..estimators.data import TRIM_WARNING_FRACTION
from ..models import (
    derive_seed,
    oracle_conditional_effect,
    oracle_mpe,
    oracle_structural_side,
    oracle_weighted_structural,
    simulate)
from .io import export_csv, load_csv
from dataclasses import dataclass, field
from joblib import Parallel, delayed
import logging
import numpy as np
import time

logger = logging.getLogger(__name__)

# replication index reserved for the oracle sample of a run
ORACLE_INDEX = 2**32 - 1


@dataclass
class ResultRecord:
    '''Everything a run produced.

    Args:

        config (``dict``), config_hash (``string``):

            The resolved configuration and its hash.

        mode (``string``):

        oracle (``dict``):

            Oracle values, whenever a structural model was involved.

        replications (``list`` of ``dict``):

            Per-replication estimates of a Monte Carlo study, by index.

        summary (``dict``):

            Mean, bias, RMSE, and Monte Carlo standard error of the
            replications, or counts of passed checks.

        trim (``dict``):

            Trimming statistics over all estimates.

        estimate, bootstrap (``dict``):

            The single estimate of the ``estimate`` mode and its bootstrap
            dispersion.

        checks (``list`` of ``dict``):

            Results of the ``check`` mode.

        wall_clock (``float``):

            Seconds the run took.
    '''

    config: dict
    config_hash: str
    mode: str
    oracle: dict = None
    replications: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    trim: dict = field(default_factory=dict)
    estimate: dict = None
    bootstrap: dict = None
    checks: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self):
        return all(check['passed'] for check in self.checks)

    def to_dict(self):

        return {
            'config': self.config,
            'config_hash': self.config_hash,
            'mode': self.mode,
            'oracle': self.oracle,
            'replications': self.replications,
            'summary': self.summary,
            'trim': self.trim,
            'estimate': self.estimate,
            'bootstrap': self.bootstrap,
            'checks': self.checks,
            'wall_clock': self.wall_clock,
        }


def oracle_seed(config):
    return derive_seed(config.seed, ORACLE_INDEX)


def _cache_key(config):

    return (
        config.dgp,
        tuple(sorted(config.dgp_params.items())),
        config.policy,
        tuple(sorted(config.policy_params.items())),
        config.functional,
        config.tau,
        config.y,
        config.t_step,
        config.n_oracle,
        oracle_seed(config))


def oracle_values(config, cache=None, full=False):
    '''Oracle values of the configured structural model, policy and
    functional.

    ``mpe`` is the finite-difference oracle. With ``full``, the structural
    side of the representation is added, and the conditional effect
    (quantiles) or the weighted structural average (mean, Gini coefficient).
    '''

    key = _cache_key(config) + (full,)
    if cache is not None and key in cache:
        logger.debug("oracle cache hit for %s", key)
        return cache[key]

    dgp = config.structural_model()
    policy = config.policy_spec()
    functional = config.functional_spec()
    seed = oracle_seed(config)

    start = time.time()
    values = {
        'mpe': oracle_mpe(
            dgp, policy, functional,
            t_step=config.t_step,
            n_oracle=config.n_oracle,
            seed=seed),
    }

    if full:
        values['structural'] = oracle_structural_side(
            dgp, policy, functional, n_oracle=config.n_oracle, seed=seed)
        if functional.variant == 'quantile':
            values['conditional_effect'] = oracle_conditional_effect(
                dgp, policy, functional.tau,
                n_oracle=config.n_oracle,
                seed=seed)
        if functional.variant in ('mean', 'gini'):
            values['weighted_structural'] = oracle_weighted_structural(
                dgp, policy, functional, n_oracle=config.n_oracle, seed=seed)

    logger.info(
        "oracle of %s under %s on %s: %s, took %fs",
        functional.variant, policy.variant, dgp.name, values,
        time.time() - start)

    if cache is not None:
        cache[key] = values

    return values


def _replicate(config, index, seed):

    try:
        data = simulate(config.structural_model(), config.n, seed).observed()
        result = estimate(
            data,
            config.policy_spec(),
            config.functional_spec(),
            method=config.method,
            cfg=config.first_stage_config(seed=seed),
            control=config.control)
    except Exception as e:
        raise ReplicationError(index, seed, e) from e

    logger.debug("replication %d (seed %d): %f", index, seed, result.value)

    return {
        'index': index,
        'seed': seed,
        'value': float(result.value),
        'n_used': int(result.n_used),
        'n_trimmed': int(result.n_trimmed),
        'trim_fraction': float(result.trim_fraction),
        'method': result.method,
    }


def summarize(values, oracle):
    '''Mean, bias and RMSE against ``oracle``, and the Monte Carlo standard
    error of the mean.'''

    values = np.asarray(values, dtype=np.float64)
    errors = values - oracle

    return {
        'replications': int(values.size),
        'mean': float(values.mean()),
        'std': float(values.std(ddof=1)),
        'bias': float(errors.mean()),
        'rmse': float(np.sqrt(np.mean(errors**2))),
        'mc_se': float(values.std(ddof=1)/np.sqrt(values.size)),
    }


def _trim_statistics(estimates):

    fractions = np.array([e['trim_fraction'] for e in estimates])
    trimmed = np.array([e['n_trimmed'] for e in estimates])

    return {
        'mean_trimmed': float(trimmed.mean()),
        'max_trim_fraction': float(fractions.max()),
        'trim_warnings': int(np.sum(fractions > TRIM_WARNING_FRACTION)),
    }


def _run_oracle(config, record, cache):

    record.oracle = oracle_values(config, cache, full=True)

    if config.export_sample is not None:
        # the sample of replication 0
        sample = simulate(
            config.structural_model(), config.n, derive_seed(config.seed, 0))
        export_csv(sample, config.export_sample, config.with_latents)


def _run_estimate(config, record, cache):

    data = load_csv(config.data_path)
    policy = config.policy_spec()
    functional = config.functional_spec()
    # the fold stream of replication 0, so that a sample exported by the
    # oracle mode re-estimates to the first replication
    cfg = config.first_stage_config(seed=derive_seed(config.seed, 0))

    result = estimate(
        data, policy, functional,
        method=config.method,
        cfg=cfg,
        control=config.control)

    record.estimate = result.to_dict()
    record.trim = {
        'n_trimmed': int(result.n_trimmed),
        'trim_fraction': float(result.trim_fraction),
        'trim_warning': bool(result.trim_warning),
    }

    if config.bootstrap > 0:
        draws = bootstrap(
            estimate, data, policy, functional, config.method, cfg,
            config.control,
            replications=config.bootstrap,
            seed=config.seed,
            n_jobs=config.n_jobs)
        record.bootstrap = {
            'replications': config.bootstrap,
            'failed': draws.n_failed,
            'mean': draws.mean,
            'std': draws.std,
            'lower': float(draws.percentile(2.5)),
            'upper': float(draws.percentile(97.5)),
        }


def _run_mc_study(config, record, cache):

    record.oracle = oracle_values(config, cache)

    seeds = [derive_seed(config.seed, r) for r in range(config.replications)]

    start = time.time()
    # joblib returns results in submission order
    record.replications = Parallel(n_jobs=config.n_jobs)(
        delayed(_replicate)(config, r, seed)
        for r, seed in enumerate(seeds))
    logger.info(
        "%d replications took %fs", config.replications, time.time() - start)

    record.summary = summarize(
        [r['value'] for r in record.replications],
        record.oracle['mpe'])
    record.trim = _trim_statistics(record.replications)

    logger.info(
        "Monte Carlo mean %f (oracle %f), bias %f, RMSE %f",
        record.summary['mean'], record.oracle['mpe'], record.summary['bias'],
        record.summary['rmse'])


def _run_check(config, record, cache):

    # import here, the check suite pulls in every module
    from .checks import run_checks

    record.oracle = oracle_values(config, cache)
    record.checks = [check.to_dict() for check in run_checks(config)]

    passed = sum(check['passed'] for check in record.checks)
    record.summary = {
        'checks': len(record.checks),
        'passed': passed,
        'failed': len(record.checks) - passed,
    }


_MODES = {
    'oracle': _run_oracle,
    'estimate': _run_estimate,
    'mc_study': _run_mc_study,
    'check': _run_check,
}


def run(config, cache=None):
    '''Run the experiment ``config`` describes.

    Args:

        config (:class:`ExperimentConfig`):

        cache (``dict``, optional):

            Oracle values by structural model, policy, functional, step,
            size, and seed. Pass the same ``dict`` to several runs to share
            oracles between estimator comparisons.

    Returns:

        A :class:`ResultRecord`.
    '''

    if cache is None:
        cache = {}

    record = ResultRecord(
        config=config.to_dict(),
        config_hash=config.config_hash(),
        mode=config.mode)

    logger.info("running %s, config hash %s", config.mode, record.config_hash)

    start = time.time()
    _MODES[config.mode](config, record, cache)
    record.wall_clock = time.time() - start

    logger.info("%s done in %fs", config.mode, record.wall_clock)

    return record
