from ..distkit import (
    EmpiricalDistribution,
    kde_eval,
    kernel_function,
    quantile,
    resolve_bandwidth)
from ..errors import EstimationFailure, TrimmedPointError
from ..functionals import FunctionalSpec
from ..policy import bind, location_shift, pi_dot, pi_dot_deriv
from .data import FirstStageConfig, MpeEstimate
from .distributional import _method, _policy_weights, plugin_mpe
from .first_stage import FirstStage
from .impl.density import ProductKernelDensity
from .impl.local_linear import LocalLinearSmoother
from sklearn.isotonic import isotonic_regression
from sklearn.model_selection import KFold
import logging
import numpy as np

logger = logging.getLogger(__name__)

# observations with a smaller relative outcome-kernel weight are skipped
RELEVANT_WEIGHT = 1e-8

# smallest total outcome-kernel mass of the reweighting estimator
MIN_KERNEL_MASS = 1e-6

# relative (to the outcome IQR) precision of the matching-function root
MATCHING_TOLERANCE = 1e-3

MAX_BISECTIONS = 60


def _outcome_quantile(data, tau, cfg):

    outcome = EmpiricalDistribution(data.y)
    q = quantile(outcome, tau)
    f = kde_eval(outcome, cfg.kernel, q)

    if not f > cfg.trim_floor:
        raise EstimationFailure(
            "outcome density %g at the %g-quantile %g is not above the trim "
            "floor %g" % (f, tau, q, cfg.trim_floor))

    return outcome, q, f


class _OutcomeGrid(object):
    '''Outcome points conditional CDFs are tabulated on, with the machinery
    to turn equivalent-kernel rows into CDF tables.'''

    def __init__(self, y, size):

        self.points = np.unique(np.quantile(y, np.linspace(0, 1, size)))
        self._order = np.argsort(y, kind='mergesort')
        self._positions = np.searchsorted(
            y[self._order],
            self.points,
            side='right')

    def tabulate(self, rows):
        '''``Σ_{j: Y_j <= y_g} rows_j`` for every grid point ``y_g``.'''

        partial = np.cumsum(rows[:, self._order], axis=1)
        partial = np.concatenate(
            [np.zeros((rows.shape[0], 1)), partial],
            axis=1)
        return partial[:, self._positions]


def _rearrange(cdf):
    '''Monotone rearrangement of each row into ``[0, 1]`` by
    pool-adjacent-violators.'''

    out = np.empty_like(cdf)
    for i, row in enumerate(cdf):
        out[i] = isotonic_regression(row, y_min=0.0, y_max=1.0)

    return out


def _invert(cdf, points, alpha):
    '''Generalized inverse of monotone rows ``cdf`` ``(c, G)`` at levels
    ``alpha`` ``(c, A)``, interpolating linearly between grid points. Levels
    above a row's maximum give ``NaN``.'''

    index = (cdf[:, :, None] < alpha[:, None, :]).sum(axis=1)
    inside = index < cdf.shape[1]
    upper = np.minimum(index, cdf.shape[1] - 1)
    lower = np.maximum(upper - 1, 0)

    rows = np.arange(cdf.shape[0])[:, None]
    f_lower = cdf[rows, lower]
    f_upper = cdf[rows, upper]
    rise = f_upper - f_lower

    with np.errstate(divide='ignore', invalid='ignore'):
        frac = np.where(rise > 0, (alpha - f_lower)/rise, 0.0)
    frac = np.where(index == 0, 1.0, np.clip(frac, 0.0, 1.0))

    out = points[lower] + frac*(points[upper] - points[lower])

    return np.where(inside, out, np.nan)


def _matching_levels(cdf, points, q, alpha_grid, tolerance):
    '''Solve ``Q̂(α|row) = q`` for ``α``: bracket on ``alpha_grid``, then
    bisect. Returns ``(alpha, found)``.'''

    c = cdf.shape[0]
    grid = np.asarray(alpha_grid, dtype=np.float64)
    quantiles = _invert(cdf, points, np.broadcast_to(grid, (c, grid.size)))

    below = (quantiles <= q).sum(axis=1)
    found = (below >= 1) & (below < grid.size)
    k = np.clip(below - 1, 0, grid.size - 2)
    rows = np.arange(c)
    found &= quantiles[rows, k + 1] >= q

    lower = grid[k]
    upper = grid[k + 1]
    mid = 0.5*(lower + upper)
    done = ~found

    for _ in range(MAX_BISECTIONS):

        mid = np.where(done, mid, 0.5*(lower + upper))
        current = _invert(cdf, points, mid[:, None])[:, 0]
        done |= np.abs(current - q) <= tolerance
        if done.all():
            break

        step_up = current < q
        lower = np.where(~done & step_up, mid, lower)
        upper = np.where(~done & ~step_up, mid, upper)

    return mid, found


def _cqd_rows(level, slope, points, alpha, delta):
    '''Central difference in ``d`` of the conditional quantile at ``alpha``
    of the local-linear CDF model ``level + (d' - d)·slope``.'''

    plus = _rearrange(level + delta*slope)
    minus = _rearrange(level - delta*slope)
    alpha = np.asarray(alpha, dtype=np.float64).reshape(level.shape[0], -1)

    return (
        _invert(plus, points, alpha) -
        _invert(minus, points, alpha))/(2.0*delta)


def _conditional_tables(data, cfg, d, x):

    stage = FirstStage(data, cfg)
    grid = _OutcomeGrid(data.y, cfg.y_grid_size)
    level, slope, trimmed = stage.smoother.rows(stage.points(d, x))

    return stage, grid, grid.tabulate(level), grid.tabulate(slope), trimmed


def _finish_points(out, trimmed, scalar, what):

    trimmed = trimmed | np.isnan(out)
    out = np.where(trimmed, np.nan, out)

    if scalar:
        if trimmed[0]:
            raise TrimmedPointError("%s is trimmed at this point" % what)
        return float(out[0])

    return out


def _indicator_fit(data, cfg, y, d, x):

    stage = FirstStage(data, cfg)
    scalar = np.ndim(d) == 0
    response = (data.y <= y).astype(np.float64)
    level, slope, trimmed = stage.smoother.evaluate(
        stage.points(d, x),
        response)

    return level, slope, trimmed, scalar


def cond_cdf(data, cfg, y, d, x=None):
    '''Local-linear estimate of ``F_{Y|D,X}(y|d,x)``, clipped to
    ``[0, 1]``.'''

    level, _, trimmed, scalar = _indicator_fit(data, cfg, y, d, x)
    return _finish_points(
        np.clip(level, 0.0, 1.0), trimmed, scalar, 'cond_cdf')


def cond_cdf_dderiv(data, cfg, y, d, x=None):
    '''Local-linear slope estimate of ``∂_d F_{Y|D,X}(y|d,x)``.'''

    _, slope, trimmed, scalar = _indicator_fit(data, cfg, y, d, x)
    return _finish_points(slope, trimmed, scalar, 'cond_cdf_dderiv')


def cond_quantile(data, cfg, alpha, d, x=None):
    '''Conditional quantile ``Q̂_{Y|D,X}(alpha|d,x)`` from the monotone
    rearrangement of the local-linear conditional CDF.'''

    scalar = np.ndim(d) == 0
    _, grid, level, _, trimmed = _conditional_tables(data, cfg, d, x)
    alpha = np.broadcast_to(
        np.asarray(alpha, dtype=np.float64),
        (level.shape[0],))[:, None]

    out = _invert(_rearrange(level), grid.points, alpha)[:, 0]
    return _finish_points(out, trimmed, scalar, 'cond_quantile')


def cqd(data, cfg, alpha, d, x=None):
    '''Conditional-quantile derivative ``β̂^CQD(alpha, d, x)``, the
    ``d``-slope of the conditional quantile at level ``alpha``.'''

    scalar = np.ndim(d) == 0
    stage, grid, level, slope, trimmed = _conditional_tables(data, cfg, d, x)
    alpha = np.broadcast_to(
        np.asarray(alpha, dtype=np.float64),
        (level.shape[0],))
    delta = 0.5*stage.smoother.bandwidths[0]

    out = _cqd_rows(level, slope, grid.points, alpha, delta)[:, 0]
    return _finish_points(out, trimmed, scalar, 'cqd')


def plugin_quantile_mpe(data, policy, tau, cfg=None, control=False):
    '''Plug-in estimator of the quantile marginal policy effect,
    ``-Ê_n[π̇(D)·∂_d F̂_{Y|D,X}(q̂_τ|D,X)]/f̂_Y(q̂_τ)``.'''

    cfg = cfg if cfg is not None else FirstStageConfig()
    _outcome_quantile(data, tau, cfg)

    return plugin_mpe(
        data,
        policy,
        FunctionalSpec('quantile', tau=tau),
        cfg,
        control)


def uqr_estimand(data, tau, cfg=None, control=False):
    '''Unconditional quantile regression estimand ``β̂^UQR(τ)``, the quantile
    marginal policy effect of a location shift.'''

    return plugin_quantile_mpe(data, location_shift(), tau, cfg, control).value


def reweight_quantile_mpe(data, policy, tau, cfg=None, control=False):
    '''Reweighting estimator of the quantile marginal policy effect.

    Averages ``π̇(D_i)·β̂^CQD(ζ̂_τ(D_i,X_i), D_i, X_i)`` with outcome-kernel
    weights ``K((Y_i - q̂_τ)/h)``, where the matching level ``ζ̂_τ`` solves
    ``Q̂_{Y|D,X}(ζ|D_i,X_i) = q̂_τ``. Observations without a bracketed root
    are trimmed.
    '''

    cfg = cfg if cfg is not None else FirstStageConfig()
    data.require_size()

    outcome, q, _ = _outcome_quantile(data, tau, cfg)
    policy, weights = _policy_weights(policy, data)

    h = resolve_bandwidth(outcome, cfg.kernel)
    kernel = kernel_function(cfg.kernel.kernel)((data.y - q)/h)
    if kernel.sum() < MIN_KERNEL_MASS:
        raise EstimationFailure(
            "outcome kernel mass %g around the %g-quantile is below %g" %
            (kernel.sum(), tau, MIN_KERNEL_MASS))

    trimmed = np.isnan(weights)
    relevant = (
        (kernel > RELEVANT_WEIGHT*kernel.max()) &
        ~trimmed &
        (weights != 0))
    relevant_index = np.flatnonzero(relevant)

    stage = FirstStage(data, cfg, control)
    grid = _OutcomeGrid(data.y, cfg.y_grid_size)
    delta = 0.5*stage.smoother.bandwidths[0]
    tolerance = MATCHING_TOLERANCE*float(
        np.subtract(*np.percentile(data.y, [75, 25])))

    slopes = np.zeros(data.n)

    if relevant_index.size:

        points = stage.features[relevant_index]
        for s, level, slope, t in stage.smoother.iter_rows(points):

            index = relevant_index[s]
            ok = ~t
            trimmed[index[t]] = True
            if not ok.any():
                continue

            level = grid.tabulate(level[ok])
            slope = grid.tabulate(slope[ok])
            zeta, found = _matching_levels(
                _rearrange(level),
                grid.points,
                q,
                cfg.alpha_grid,
                tolerance)
            beta = _cqd_rows(level, slope, grid.points, zeta, delta)[:, 0]

            found &= np.isfinite(beta)
            slopes[index[ok][found]] = beta[found]
            trimmed[index[ok][~found]] = True

    kept = ~trimmed
    mass = kernel[kept].sum()
    if mass < MIN_KERNEL_MASS:
        raise EstimationFailure(
            "outcome kernel mass %g left after trimming is below %g" %
            (mass, MIN_KERNEL_MASS))

    contributions = np.where(kept & relevant, weights*slopes, 0.0)
    value = float(np.sum(contributions*kernel)/mass)

    n_trimmed = int(trimmed.sum())
    logger.info(
        "reweighting estimate at tau=%g from %d kernel-relevant "
        "observations, %d trimmed", tau, relevant_index.size, n_trimmed)

    return MpeEstimate(
        value=value,
        functional=FunctionalSpec('quantile', tau=tau),
        policy=policy,
        n_used=data.n - n_trimmed,
        n_trimmed=n_trimmed,
        bandwidths=dict(stage.bandwidths, y=float(h)),
        method=_method('reweight', control))


def _riesz_at(density, policy, points, floor):

    f, df = density.evaluate(points)
    d = points[:, 0]

    with np.errstate(divide='ignore', invalid='ignore'):
        alpha = pi_dot_deriv(policy, d) + pi_dot(policy, d)*df/f

    return np.where(f >= floor, alpha, np.nan)


def riesz_representer(data, policy, cfg, d, x=None, control=False):
    '''Riesz representer ``α̂(d, x) = ∂_d[π̇(d)·f̂_{D,X}(d,x)]/f̂_{D,X}(d,x)``
    from a product-Gaussian kernel density of the conditioning variables.

    Points where ``f̂_{D,X}`` falls below ``cfg.trim_floor`` are ``NaN`` (or
    raise ``TrimmedPointError`` for a scalar ``d``).
    '''

    cfg = cfg if cfg is not None else FirstStageConfig()
    policy = bind(policy, data.d)
    stage = FirstStage(data, cfg, control)
    density = ProductKernelDensity(stage.features, stage.smoother.bandwidths)

    scalar = np.ndim(d) == 0
    alpha = _riesz_at(density, policy, stage.points(d, x), cfg.trim_floor)

    if scalar:
        if np.isnan(alpha[0]):
            raise TrimmedPointError(
                "density of the conditioning variables at d=%f is below the "
                "trim floor" % float(d))
        return float(alpha[0])

    return alpha


def debiased_quantile_mpe(data, policy, tau, cfg=None, control=False):
    '''Cross-fitted debiased estimator of the quantile marginal policy
    effect.

    Averages the orthogonal score ``π̇·∂_d F̂ - α̂·(1{Y <= q̂_τ} - F̂)`` with
    first stages fitted on the other folds, and divides by ``-f̂_Y(q̂_τ)``.
    ``q̂_τ`` and ``f̂_Y`` use the full sample.
    '''

    cfg = cfg if cfg is not None else FirstStageConfig()
    data.require_size()

    _, q, f = _outcome_quantile(data, tau, cfg)
    policy, weights = _policy_weights(policy, data)
    stage = FirstStage(data, cfg, control)
    features = stage.features
    below = (data.y <= q).astype(np.float64)

    scores = np.full(data.n, np.nan)
    folds = KFold(n_splits=cfg.folds, shuffle=True, random_state=cfg.seed)

    for k, (train, test) in enumerate(folds.split(features)):

        bandwidths = None
        if cfg.bandwidths is not None:
            bandwidths = np.asarray(cfg.bandwidths, dtype=np.float64)

        smoother = LocalLinearSmoother(
            features[train],
            bandwidths,
            min_effective=cfg.min_effective)
        level, slope, _ = smoother.evaluate(features[test], below[train])

        density = ProductKernelDensity(features[train], smoother.bandwidths)
        alpha = _riesz_at(density, policy, features[test], cfg.trim_floor)

        scores[test] = weights[test]*slope - alpha*(below[test] - level)

        logger.debug(
            "fold %d: %d training, %d evaluation observations, %d trimmed",
            k, train.size, test.size, np.isnan(scores[test]).sum())

    used = np.isfinite(scores)
    if not used.any():
        raise EstimationFailure("every observation of the score was trimmed")

    value = -float(np.mean(scores[used]))/f
    n_used = int(used.sum())

    return MpeEstimate(
        value=value,
        functional=FunctionalSpec('quantile', tau=tau),
        policy=policy,
        n_used=n_used,
        n_trimmed=data.n - n_used,
        bandwidths=stage.bandwidths,
        method=_method('debiased', control))
