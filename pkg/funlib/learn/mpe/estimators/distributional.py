from ..distkit import EmpiricalDistribution, check_lorenz_domain
from ..errors import TrimmedPointError
from ..functionals import DirectionFunction, FunctionalSpec, hadamard_apply
from ..policy import bind, pi_dot, support_check
from .data import FirstStageConfig, MpeEstimate
from .first_stage import FirstStage
import logging
import numpy as np

logger = logging.getLogger(__name__)


def _method(name, control):
    return 'cv_' + name if control else name


def _policy_weights(policy, data):

    policy = bind(policy, data.d)
    if policy.variant == 'rank_preserving':
        # the whole path up to the target
        support_check(policy, data.d, 1.0)
    weights = pi_dot(policy, data.d)
    n_trimmed = int(np.isnan(weights).sum())
    if n_trimmed:
        logger.info(
            "policy derivative trimmed at %d of %d observations",
            n_trimmed, data.n)

    return policy, weights


def outcome_direction(data, slope_average):
    '''The direction ``ĥ(y) = Σ_j s_j·1{Y_j <= y}`` of an averaged slope row
    ``s``, i.e., ``Ê_n[π̇(D)·∂_d F̂_{Y|D,X}(y|D,X)]``.'''

    order = np.argsort(data.y, kind='mergesort')
    sorted_y = data.y[order]
    partial = np.concatenate([[0.0], np.cumsum(slope_average[order])])

    def direction(y):
        return partial[np.searchsorted(sorted_y, y, side='right')]

    return DirectionFunction(direction)


def plugin_mpe(data, policy, functional, cfg=None, control=False):
    '''Plug-in estimator of the marginal policy effect on ``functional``.

    Estimates the direction ``ĥ(y) = Ê_n[π̇(D)·∂_d F̂_{Y|D,X}(y|D,X)]`` with
    local-linear first stages and applies the Hadamard derivative of the
    functional at the empirical outcome distribution to it.

    Args:

        data (:class:`Dataset`):

        policy (:class:`PolicySpec`):

        functional (:class:`FunctionalSpec`):

        cfg (:class:`FirstStageConfig`, optional):

        control (``bool``):

            Condition the first stages on the estimated control variable.

    Returns:

        :class:`MpeEstimate`
    '''

    cfg = cfg if cfg is not None else FirstStageConfig()
    data.require_size()

    outcome = EmpiricalDistribution(data.y)
    if functional.variant == 'gini':
        check_lorenz_domain(outcome)

    policy, weights = _policy_weights(policy, data)
    stage = FirstStage(data, cfg, control)
    average, n_used, _ = stage.smoother.averaged_slope(stage.features, weights)

    direction = outcome_direction(data, average)
    value, grid_trimmed = hadamard_apply(
        functional,
        outcome,
        cfg.kernel,
        direction,
        return_trimmed=True)

    return MpeEstimate(
        value=value,
        functional=functional,
        policy=policy,
        n_used=n_used,
        n_trimmed=data.n - n_used,
        bandwidths=stage.bandwidths,
        method=_method('plugin', control),
        grid_trimmed=grid_trimmed)


def distributional_mpe(data, policy, y, cfg=None, control=False):
    '''Marginal policy effect on the outcome CDF at ``y``.'''

    return plugin_mpe(data, policy, FunctionalSpec('id_at', y=y), cfg, control)


def gini_mpe(data, policy, cfg=None, control=False):
    '''Marginal policy effect on the Gini coefficient of the outcome.'''

    return plugin_mpe(data, policy, FunctionalSpec('gini'), cfg, control)


def mean_mpe(data, policy, cfg=None, control=False):
    '''Marginal policy effect on the mean outcome,
    ``Ê_n[π̇(D)·∂_d Ê[Y|D,X]]`` with a local-linear conditional mean.'''

    cfg = cfg if cfg is not None else FirstStageConfig()
    data.require_size()

    policy, weights = _policy_weights(policy, data)
    stage = FirstStage(data, cfg, control)
    average, n_used, _ = stage.smoother.averaged_slope(stage.features, weights)

    return MpeEstimate(
        value=float(average @ data.y),
        functional=FunctionalSpec('mean'),
        policy=policy,
        n_used=n_used,
        n_trimmed=data.n - n_used,
        bandwidths=stage.bandwidths,
        method=_method('plugin', control))


def cond_mean_dderiv(data, cfg, d, x=None):
    '''Slope ``∂_d Ê[Y|D=d,X=x]`` of the local-linear conditional mean.'''

    stage = FirstStage(data, cfg)
    scalar = np.ndim(d) == 0
    _, slope, trimmed = stage.smoother.evaluate(stage.points(d, x), data.y)

    if scalar:
        if trimmed[0]:
            raise TrimmedPointError(
                "local-linear fit at d=%f is trimmed" % float(d))
        return float(slope[0])

    return slope
