from ..errors import ConfigurationError
from .distributional import mean_mpe, plugin_mpe
from .quantile import (
    debiased_quantile_mpe,
    plugin_quantile_mpe,
    reweight_quantile_mpe)
import logging

logger = logging.getLogger(__name__)

METHODS = ('plugin', 'reweight', 'debiased')


def estimate(
        data,
        policy,
        functional,
        method='plugin',
        cfg=None,
        control=False):
    '''Estimate the marginal policy effect on ``functional`` with ``method``.

    ``plugin`` covers every functional, ``reweight`` and ``debiased`` only
    quantiles.
    '''

    if method not in METHODS:
        raise ConfigurationError(
            "unknown estimation method %r, choose from %s" % (method, METHODS))

    logger.info(
        "estimating %s effect of a %s policy with the %s%s estimator",
        functional.variant, policy.variant, 'control-variable ' if control
        else '', method)

    if functional.variant == 'quantile':
        return {
            'plugin': plugin_quantile_mpe,
            'reweight': reweight_quantile_mpe,
            'debiased': debiased_quantile_mpe,
        }[method](data, policy, functional.tau, cfg, control)

    if method != 'plugin':
        raise ConfigurationError(
            "the %s estimator is only available for quantiles, not %s" %
            (method, functional.variant))

    if functional.variant == 'mean':
        return mean_mpe(data, policy, cfg, control)

    return plugin_mpe(data, policy, functional, cfg, control)
