from .distkit import (
    EmpiricalDistribution,
    KernelSpec,
    kde_deriv,
    kde_eval,
    smoothed_cdf)
from .errors import ConfigurationError, DomainError, TrimmedPointError
from dataclasses import dataclass, field, replace
import logging
import numpy as np

logger = logging.getLogger(__name__)

VARIANTS = (
    'location_shift',
    'location_scale',
    'mean_preserving',
    'rank_preserving')

# number of support points the rank-preserving CDFs are tabulated on
SUPPORT_GRID_SIZE = 4097

# larger samples are thinned to this many order statistics before smoothing
MAX_TABLE_SAMPLE = 20000

# counterfactual mass a rank-preserving path may put outside the support of D
SUPPORT_MASS_TOLERANCE = 0.01


def _thinned(dist):

    if dist.n <= MAX_TABLE_SAMPLE or not dist.is_uniform:
        return dist

    keep = np.linspace(0, dist.n - 1, MAX_TABLE_SAMPLE).astype(int)
    return EmpiricalDistribution(dist.values[keep])


class _RankTable(object):
    '''Tabulated ``F̃_D``, ``f̂_D``, ``f̂_D'`` and ``G_D``, ``g_D`` on a grid
    spanning the sample range of ``D``.'''

    def __init__(self, sample, target, kernel):

        dist = EmpiricalDistribution.from_sample(sample)

        self.grid = np.linspace(
            dist.values[0],
            dist.values[-1],
            SUPPORT_GRID_SIZE)

        dist = _thinned(dist)
        self.cdf = np.maximum.accumulate(smoothed_cdf(dist, kernel, self.grid))
        self.pdf = kde_eval(dist, kernel, self.grid)
        self.dpdf = kde_deriv(dist, kernel, self.grid)

        if isinstance(target, EmpiricalDistribution):
            target = _thinned(target)
            self.target_cdf = np.maximum.accumulate(
                smoothed_cdf(target, kernel, self.grid))
            self.target_pdf = kde_eval(target, kernel, self.grid)
        else:
            self.target_cdf = np.asarray(target.cdf(self.grid), dtype=float)
            self.target_pdf = np.asarray(target.pdf(self.grid), dtype=float)

        fitted = np.interp(dist.values, self.grid, self.pdf)
        self.density_floor = float(np.percentile(fitted, 1))

        logger.info(
            "tabulated rank-preserving policy on [%f, %f], density floor %g",
            self.grid[0], self.grid[-1], self.density_floor)

    def lookup(self, table, d):
        return np.interp(d, self.grid, table)


@dataclass(frozen=True, eq=False)
class PolicySpec:
    '''A policy function ``π_t`` acting on the policy variable ``D``.

    Use the module-level constructors :func:`location_shift`,
    :func:`location_scale`, :func:`mean_preserving`, and
    :func:`rank_preserving` rather than creating this directly.

    Args:

        variant (``string``):

            One of ``location_shift``, ``location_scale``,
            ``mean_preserving``, ``rank_preserving``.

        mu, l_dot, s_dot (``float``):

            Center, location and scale derivatives of
            ``π_t(d) = μ + l_dot·t + (1 + s_dot·t)·(d - μ)``.

        alpha, mean_d (``float``):

            Spread and mean of ``π_t(d) = E[D] + (1 + α·t)·(d - E[D])``. If
            ``mean_d`` is ``None``, it is set by :func:`bind`.

        sample (array-like):

            Sample of ``D`` the rank-preserving ``F_D`` is estimated from. If
            ``None``, it is set by :func:`bind`.

        target:

            Target distribution ``G_D`` of the rank-preserving policy: a
            frozen ``scipy.stats`` distribution or an
            :class:`EmpiricalDistribution`.

        kernel (:class:`KernelSpec`):

            Kernel for ``f_D`` and the smoothed ``F_D``.
    '''

    variant: str
    mu: float = 0.0
    l_dot: float = 1.0
    s_dot: float = 0.0
    alpha: float = 1.0
    mean_d: float = None
    sample: object = field(default=None, repr=False)
    target: object = None
    kernel: KernelSpec = KernelSpec()
    _table: object = field(default=None, init=False, repr=False)

    def __post_init__(self):

        if self.variant not in VARIANTS:
            raise ConfigurationError(
                "unknown policy variant %r, choose from %s" %
                (self.variant, VARIANTS))

        if self.variant == 'mean_preserving' and not -1 <= self.alpha <= 1:
            raise ConfigurationError(
                "mean-preserving spread alpha has to be in [-1, 1], got %r" %
                self.alpha)

        if self.variant == 'location_scale' and 1 + min(self.s_dot, 0) <= 0:
            raise DomainError(
                "scale path s(t) = 1 + %g·t is not positive on [0, 1]" %
                self.s_dot)

        if self.variant == 'rank_preserving':
            if self.target is None:
                raise ConfigurationError(
                    "rank-preserving policy needs a target distribution")
            if self.sample is not None:
                object.__setattr__(
                    self,
                    '_table',
                    _RankTable(self.sample, self.target, self.kernel))

    @property
    def is_bound(self):
        '''Whether all sample-dependent parts are set.'''

        if self.variant == 'mean_preserving':
            return self.mean_d is not None
        if self.variant == 'rank_preserving':
            return self._table is not None
        return True

    def describe(self):
        '''A JSON-serializable description.'''

        description = {'variant': self.variant}
        if self.variant == 'location_scale':
            description.update(mu=self.mu, l_dot=self.l_dot, s_dot=self.s_dot)
        elif self.variant == 'mean_preserving':
            description.update(alpha=self.alpha, mean_d=self.mean_d)
        elif self.variant == 'rank_preserving':
            description.update(target=_describe_target(self.target))

        return description


def _describe_target(target):

    if isinstance(target, EmpiricalDistribution):
        return repr(target)

    # frozen scipy.stats distribution
    dist = getattr(target, 'dist', None)
    if dist is not None:
        return '%s(args=%s, kwds=%s)' % (
            dist.name,
            list(target.args),
            dict(sorted(target.kwds.items())))

    return type(target).__name__


def location_shift():
    '''``π_t(d) = d + t``.'''
    return PolicySpec('location_shift')


def location_scale(mu=0.0, l_dot=1.0, s_dot=0.0):
    '''``π_t(d) = μ + l_dot·t + (1 + s_dot·t)·(d - μ)``.'''
    return PolicySpec('location_scale', mu=mu, l_dot=l_dot, s_dot=s_dot)


def mean_preserving(alpha=1.0, mean_d=None):
    '''``π_t(d) = E[D] + (1 + α·t)·(d - E[D])``.'''
    return PolicySpec('mean_preserving', alpha=alpha, mean_d=mean_d)


def rank_preserving(target, sample=None, kernel=None):
    '''``π_t(d) = H_t⁻¹(F_D(d))`` with ``H_t = F_D + t·(G_D - F_D)``.'''

    return PolicySpec(
        'rank_preserving',
        sample=sample,
        target=target,
        kernel=kernel if kernel is not None else KernelSpec())


def bind(spec, d):
    '''Complete the sample-dependent parts of ``spec`` from the sample ``d``
    of the policy variable. Bound specs are returned unchanged.'''

    if spec.is_bound:
        return spec

    d = np.asarray(d, dtype=np.float64).ravel()

    if spec.variant == 'mean_preserving':
        return replace(spec, mean_d=float(np.mean(d)))

    return replace(spec, sample=d)


def _require_bound(spec):
    if not spec.is_bound:
        raise ConfigurationError(
            "%s policy is not bound to a sample of D, call bind() first" %
            spec.variant)


def _check_t(t):
    if not 0 <= t <= 1:
        raise DomainError("policy index t has to be in [0, 1], got %r" % t)


def apply(spec, d, t):
    '''Evaluate ``π_t(d)``. ``π_0`` is the identity for every variant.

    Args:

        spec (:class:`PolicySpec`):

            The policy.

        d (``float`` or array-like):

            Value(s) of the policy variable.

        t (``float``):

            Policy index in ``[0, 1]``.
    '''

    _check_t(t)
    _require_bound(spec)

    scalar = np.ndim(d) == 0
    d = np.asarray(d, dtype=np.float64)

    if spec.variant == 'location_shift':
        out = d + t

    elif spec.variant == 'location_scale':
        out = spec.mu + spec.l_dot*t + (1.0 + spec.s_dot*t)*(d - spec.mu)

    elif spec.variant == 'mean_preserving':
        out = spec.mean_d + (1.0 + spec.alpha*t)*(d - spec.mean_d)

    else:

        table = spec._table
        if np.any(d < table.grid[0]) or np.any(d > table.grid[-1]):
            raise DomainError(
                "rank-preserving policy evaluated outside the support "
                "[%f, %f] of D" % (table.grid[0], table.grid[-1]))

        if t == 0:
            out = d.copy()
        else:
            out = _invert_path(table, d, t)

    return float(out) if scalar else out


def _invert_path(table, d, t):

    u = table.lookup(table.cdf, d)
    path = table.cdf + t*(table.target_cdf - table.cdf)
    path = np.maximum.accumulate(path)

    # bracket u in the tabulated H_t, interpolate linearly inside
    upper = np.clip(np.searchsorted(path, u, side='left'), 1, path.size - 1)
    lower = upper - 1
    rise = path[upper] - path[lower]
    frac = np.where(
        rise > 0,
        (u - path[lower])/np.where(rise > 0, rise, 1.0),
        0.0)

    return table.grid[lower] + np.clip(frac, 0.0, 1.0)*(
        table.grid[upper] - table.grid[lower])


def _rank_terms(spec, d):

    table = spec._table
    outside = (d < table.grid[0]) | (d > table.grid[-1])
    f = table.lookup(table.pdf, d)
    trimmed = outside | (f < table.density_floor)
    f = np.where(trimmed, np.nan, f)

    return table, f, trimmed


def _finish(out, trimmed, scalar, d):

    if scalar:
        if trimmed.any():
            raise TrimmedPointError(
                "density of D at %f below the trim floor" % float(d))
        return float(out)

    if trimmed.any():
        logger.debug("trimmed %d of %d policy evaluations",
                     trimmed.sum(), trimmed.size)

    return out


def pi_dot(spec, d):
    '''Pathwise derivative ``π̇(d) = ∂_t π_t(d)`` at ``t = 0``.

    For rank-preserving policies, points where the estimated density of ``D``
    falls below the trim floor come back as ``NaN`` (or raise
    ``TrimmedPointError`` for a scalar ``d``).
    '''

    _require_bound(spec)

    scalar = np.ndim(d) == 0
    d = np.asarray(d, dtype=np.float64)

    if spec.variant == 'location_shift':
        out = np.ones_like(d)
    elif spec.variant == 'location_scale':
        out = spec.l_dot + (d - spec.mu)*spec.s_dot
    elif spec.variant == 'mean_preserving':
        out = spec.alpha*(d - spec.mean_d)
    else:
        table, f, trimmed = _rank_terms(spec, d)
        gap = table.lookup(table.target_cdf, d) - table.lookup(table.cdf, d)
        out = -gap/f
        return _finish(out, trimmed, scalar, d)

    return float(out) if scalar else out


def pi_dot_deriv(spec, d):
    '''Derivative ``∂_d π̇(d)``, with the same trimming as :func:`pi_dot`.'''

    _require_bound(spec)

    scalar = np.ndim(d) == 0
    d = np.asarray(d, dtype=np.float64)

    if spec.variant == 'location_shift':
        out = np.zeros_like(d)
    elif spec.variant == 'location_scale':
        out = np.full_like(d, spec.s_dot)
    elif spec.variant == 'mean_preserving':
        out = np.full_like(d, spec.alpha)
    else:
        table, f, trimmed = _rank_terms(spec, d)
        gap = table.lookup(table.target_cdf, d) - table.lookup(table.cdf, d)
        gap_deriv = table.lookup(table.target_pdf, d) - f
        df = table.lookup(table.dpdf, d)
        out = -(gap_deriv*f - gap*df)/(f*f)
        return _finish(out, trimmed, scalar, d)

    return float(out) if scalar else out


def finite_diff_pi_dot(spec, d, t_step):
    '''Forward difference ``(π_t(d) - d)/t`` at ``t = t_step``.'''

    if not 0 < t_step <= 0.05:
        raise DomainError(
            "finite difference step has to be in (0, 0.05], got %r" % t_step)

    d = np.asarray(d, dtype=np.float64) if np.ndim(d) else float(d)

    return (apply(spec, d, t_step) - d)/t_step


def support_check(spec, d, t):
    '''Check empirically that ``π_t`` keeps the counterfactual support
    inside the support of ``D``. Logs a warning and returns ``False`` if not.

    Affine policies are applied to the sample ``d`` and compared with its
    range. Rank-preserving policies never leave their tabulated range, so
    for them the mass ``t·(G_D(lower) + 1 - G_D(upper))`` the path puts
    outside of it is compared with ``SUPPORT_MASS_TOLERANCE``.
    '''

    d = np.asarray(d, dtype=np.float64).ravel()
    spec = bind(spec, d)

    if spec.variant == 'rank_preserving':

        table = spec._table
        lower, upper = table.grid[0], table.grid[-1]
        outside = t*(table.target_cdf[0] + 1.0 - table.target_cdf[-1])
        contained = outside <= SUPPORT_MASS_TOLERANCE

        if not contained:
            logger.warning(
                "rank-preserving policy at t=%g puts mass %f outside the "
                "support [%f, %f] of D",
                t, outside, lower, upper)

        return contained

    moved = apply(spec, d, t)

    lower, upper = d.min(), d.max()
    tolerance = 1e-9*max(1.0, upper - lower)
    contained = (
        moved.min() >= lower - tolerance and
        moved.max() <= upper + tolerance)

    if not contained:
        logger.warning(
            "%s policy at t=%g moves the support of D from [%f, %f] to "
            "[%f, %f]",
            spec.variant, t, lower, upper, moved.min(), moved.max())

    return contained
