from .distributional import gini_mpe, mean_mpe
from .first_stage import control_variable
from .quantile import (
    debiased_quantile_mpe,
    plugin_quantile_mpe,
    reweight_quantile_mpe)
import logging

logger = logging.getLogger(__name__)

__all__ = [
    'control_variable',
    'cv_quantile_mpe',
    'cv_reweight_quantile_mpe',
    'cv_debiased_quantile_mpe',
    'cv_mean_mpe',
    'cv_gini_mpe',
]


def cv_quantile_mpe(data, policy, tau, cfg=None):
    '''Plug-in quantile marginal policy effect with first stages conditioned
    on ``(D, V̂, X)``.'''
    return plugin_quantile_mpe(data, policy, tau, cfg, control=True)


def cv_reweight_quantile_mpe(data, policy, tau, cfg=None):
    return reweight_quantile_mpe(data, policy, tau, cfg, control=True)


def cv_debiased_quantile_mpe(data, policy, tau, cfg=None):
    return debiased_quantile_mpe(data, policy, tau, cfg, control=True)


def cv_mean_mpe(data, policy, cfg=None):
    return mean_mpe(data, policy, cfg, control=True)


def cv_gini_mpe(data, policy, cfg=None):
    return gini_mpe(data, policy, cfg, control=True)
