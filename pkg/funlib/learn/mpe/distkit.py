from .errors import ConfigurationError, DomainError
from dataclasses import dataclass
from scipy.special import ndtr
import logging
import math
import numpy as np

logger = logging.getLogger(__name__)

# shared quantile-level grid for all density-weighted τ-integrals
TAU_GRID_SIZE = 512
TAU_LOWER = 0.005
TAU_UPPER = 0.995

# upper bound on the number of kernel evaluations held in memory at once
_CHUNK_ELEMENTS = 1 << 22

_SQRT_2PI = math.sqrt(2.0*math.pi)


class EmpiricalDistribution(object):
    '''A (weighted) sample, sorted, with ECDF and quantile services.

    Args:

        values (array-like):

            The sample. Will be flattened and sorted.

        weights (array-like, optional):

            Non-negative weights, one per value, summing to one. Uniform if
            not given.
    '''

    def __init__(self, values, weights=None):

        values = np.asarray(values, dtype=np.float64).ravel()

        if values.size < 2:
            raise DomainError(
                "an empirical distribution needs at least 2 values, got %d" %
                values.size)
        if not np.all(np.isfinite(values)):
            raise DomainError("empirical distribution values must be finite")

        order = np.argsort(values, kind='mergesort')
        values = values[order]

        if weights is None:

            n = values.size
            weights = np.full(n, 1.0/n)
            cumulative = np.arange(1, n + 1, dtype=np.float64)/n
            self._uniform = True

        else:

            weights = np.asarray(weights, dtype=np.float64).ravel()
            if weights.shape != values.shape:
                raise DomainError(
                    "got %d weights for %d values" %
                    (weights.size, values.size))
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise DomainError("weights have to be finite and non-negative")
            total = weights.sum()
            if abs(total - 1.0) > 1e-9:
                raise DomainError("weights sum to %r, not 1" % total)

            weights = weights[order]/total
            cumulative = np.cumsum(weights)
            cumulative[-1] = 1.0
            self._uniform = False

        for a in (values, weights, cumulative):
            a.flags.writeable = False

        self._values = values
        self._weights = weights
        self._cumulative = cumulative
        self._weighted_values = np.cumsum(weights*values)

    @classmethod
    def from_sample(cls, values, weights=None):
        '''Like the constructor, but pads a single observation to two equal
        values instead of failing.'''

        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 1:
            logger.warning(
                "padding single observation %f to a two-point sample",
                values[0])
            values = np.repeat(values, 2)
            if weights is not None:
                weights = np.full(2, 0.5)

        return cls(values, weights)

    @classmethod
    def mixture(cls, base, other, t):
        '''The mixture ``(1 - t)·base + t·other`` of two distributions.'''

        if not 0.0 <= t <= 1.0:
            raise DomainError("mixture weight %r not in [0, 1]" % t)

        values = np.concatenate([base.values, other.values])
        weights = np.concatenate([
            (1.0 - t)*base.weights,
            t*other.weights])

        return cls(values, weights/weights.sum())

    @property
    def values(self):
        return self._values

    @property
    def weights(self):
        return self._weights

    @property
    def cumulative(self):
        '''``F`` evaluated at each sorted value.'''
        return self._cumulative

    @property
    def is_uniform(self):
        return self._uniform

    @property
    def n(self):
        return self._values.size

    @property
    def effective_n(self):
        '''Kish effective sample size ``1/Σw²``.'''
        return 1.0/np.sum(self._weights**2)

    @property
    def mean(self):
        return float(self._weighted_values[-1])

    @property
    def std(self):
        mean = self.mean
        var = np.sum(self._weights*(self._values - mean)**2)
        if self._uniform:
            var *= self.n/(self.n - 1.0)
        return float(np.sqrt(max(var, 0.0)))

    def __len__(self):
        return self.n

    def __repr__(self):
        return "EmpiricalDistribution(n=%d, mean=%g)" % (self.n, self.mean)


@dataclass(frozen=True)
class KernelSpec:
    '''Kernel and bandwidth of a smoother.

    Args:

        kernel (``string``):

            ``'gaussian'`` or ``'epanechnikov'``.

        bandwidth (``float``, optional):

            An explicit bandwidth in outcome units. If not given, ``rule`` is
            used.

        rule (``string``):

            Bandwidth rule used when no explicit bandwidth is set. Only
            ``'silverman'`` is supported.
    '''

    kernel: str = 'gaussian'
    bandwidth: float = None
    rule: str = 'silverman'

    def __post_init__(self):

        if self.kernel not in _KERNELS:
            raise ConfigurationError(
                "unknown kernel %r, choose from %s" %
                (self.kernel, sorted(_KERNELS)))
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigurationError(
                "explicit bandwidth has to be positive, got %r" %
                self.bandwidth)
        if self.rule != 'silverman':
            raise ConfigurationError("unknown bandwidth rule %r" % self.rule)


def _gaussian_pdf(u):
    return np.exp(-0.5*u*u)/_SQRT_2PI


def _gaussian_dpdf(u):
    return -u*_gaussian_pdf(u)


def _epanechnikov_pdf(u):
    return np.where(np.abs(u) <= 1.0, 0.75*(1.0 - u*u), 0.0)


def _epanechnikov_cdf(u):
    u = np.clip(u, -1.0, 1.0)
    return 0.25*(2.0 + 3.0*u - u**3)


def _epanechnikov_dpdf(u):
    return np.where(np.abs(u) <= 1.0, -1.5*u, 0.0)


_KERNELS = {
    'gaussian': (_gaussian_pdf, ndtr, _gaussian_dpdf),
    'epanechnikov': (_epanechnikov_pdf, _epanechnikov_cdf, _epanechnikov_dpdf),
}


def kernel_function(name, which='pdf'):
    '''Get the kernel ``K``, its integral, or its derivative by name.'''

    pdf, cdf, dpdf = _KERNELS[name]
    return {'pdf': pdf, 'cdf': cdf, 'dpdf': dpdf}[which]


def silverman_bandwidth(values, weights=None, dims=1):
    '''Silverman's rule ``1.06·σ̂·n^(-1/(4+dims))`` with
    ``σ̂ = min(sd, IQR/1.349)``.

    Raises ``ConfigurationError`` for a zero-variance sample.
    '''

    dist = EmpiricalDistribution(values, weights)
    sd = dist.std
    iqr = float(quantile(dist, 0.75) - quantile(dist, 0.25))

    if sd <= 0:
        raise ConfigurationError(
            "zero sample variance, a bandwidth rule can not be applied")

    sigma = min(sd, iqr/1.349) if iqr > 0 else sd
    n = dist.n if dist.is_uniform else dist.effective_n

    return 1.06*sigma*n**(-1.0/(4.0 + dims))


def resolve_bandwidth(dist, spec):
    '''The bandwidth ``spec`` resolves to on ``dist``.'''

    if spec.bandwidth is not None:
        return float(spec.bandwidth)

    if dist.std <= 0:
        raise ConfigurationError(
            "zero sample variance, bandwidth rule %r can not be applied" %
            spec.rule)

    return silverman_bandwidth(
        dist.values,
        None if dist.is_uniform else dist.weights)


def _kernel_sum(dist, spec, y, which):

    y = np.asarray(y, dtype=np.float64)
    scalar = y.ndim == 0
    y = y.ravel()

    h = resolve_bandwidth(dist, spec)
    k = kernel_function(spec.kernel, which)

    out = np.empty(y.size)
    chunk = max(1, _CHUNK_ELEMENTS//dist.n)
    for start in range(0, y.size, chunk):
        u = (y[start:start + chunk, None] - dist.values[None, :])/h
        out[start:start + chunk] = k(u) @ dist.weights

    if which == 'pdf':
        out /= h
    elif which == 'dpdf':
        out /= h*h

    return float(out[0]) if scalar else out


def ecdf_eval(dist, y):
    '''Evaluate the (weighted) ECDF at ``y``, i.e., the fraction of values
    ``<= y``.'''

    y = np.asarray(y, dtype=np.float64)
    idx = np.searchsorted(dist.values, y, side='right')
    cum = np.concatenate([[0.0], dist.cumulative])
    out = cum[idx]

    return float(out) if out.ndim == 0 else out


def quantile(dist, tau):
    '''Left-continuous generalized inverse ``inf{y: F(y) >= tau}`` of the
    ECDF, without interpolation.'''

    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau <= 0) or np.any(tau >= 1) or np.any(np.isnan(tau)):
        raise DomainError("quantile level has to be in (0, 1), got %s" % tau)

    # tolerate rounding in the cumulative weights
    idx = np.searchsorted(dist.cumulative, tau - 1e-12, side='left')
    out = dist.values[np.minimum(idx, dist.n - 1)]

    return float(out) if out.ndim == 0 else out


def kde_eval(dist, spec, y):
    '''Kernel density estimate of ``dist`` at ``y``.'''
    return _kernel_sum(dist, spec, y, 'pdf')


def kde_deriv(dist, spec, y):
    '''Derivative of the kernel density estimate of ``dist`` at ``y``.'''
    return _kernel_sum(dist, spec, y, 'dpdf')


def smoothed_cdf(dist, spec, y):
    '''Kernel-integrated CDF of ``dist`` at ``y``, the antiderivative of
    ``kde_eval``.'''
    return _kernel_sum(dist, spec, y, 'cdf')


def check_lorenz_domain(dist):
    '''Raise ``DomainError`` unless ``dist`` has non-negative values and a
    positive mean.'''

    if dist.values[0] < 0:
        raise DomainError(
            "Lorenz curve and Gini coefficient need non-negative values, got "
            "minimum %f" % dist.values[0])
    if not dist.mean > 0:
        raise DomainError(
            "Lorenz curve and Gini coefficient need a positive mean")


def lorenz(dist, p):
    '''Lorenz curve ``L_p = ∫_0^p Q_τ dτ / μ``.

    The integral runs exactly over the steps of the empirical quantile
    function.
    '''

    check_lorenz_domain(dist)

    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or np.any(p > 1):
        raise DomainError("Lorenz curve argument has to be in [0, 1]")

    cum = dist.cumulative
    partial = dist._weighted_values

    k = np.minimum(np.searchsorted(cum, p, side='left'), dist.n - 1)
    prev_cum = np.where(k > 0, cum[k - 1], 0.0)
    prev_partial = np.where(k > 0, partial[k - 1], 0.0)

    area = prev_partial + dist.values[k]*np.clip(p - prev_cum, 0.0, None)
    out = np.clip(area/partial[-1], 0.0, 1.0)

    return float(out) if out.ndim == 0 else out


def _first_moment_in_p(dist):
    # ∫_0^1 p·Q_p dp over the quantile steps
    cum = dist.cumulative
    prev = np.concatenate([[0.0], cum[:-1]])
    return float(np.sum(dist.values*dist.weights*0.5*(cum + prev)))


def gini(dist):
    '''Gini coefficient ``1 - 2∫_0^1 L_p dp``.'''

    check_lorenz_domain(dist)

    # ∫ L_p dp = ∫ (1 - τ)·Q_τ dτ / μ
    mu = dist.mean
    area = mu - _first_moment_in_p(dist)

    return max(0.0, 1.0 - 2.0*area/mu)


def phi_weight(dist, tau):
    '''Gini weight ``φ(τ) = ∫_0^1 (τ - p)·Q_p dp = τ·μ - ∫_0^1 p·Q_p dp``.

    Affine in ``tau`` with slope ``μ``.
    '''

    check_lorenz_domain(dist)

    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau < 0) or np.any(tau > 1):
        raise DomainError("φ weight argument has to be in [0, 1]")

    out = tau*dist.mean - _first_moment_in_p(dist)

    return float(out) if out.ndim == 0 else out


def quantile_grid(size=TAU_GRID_SIZE, lower=TAU_LOWER, upper=TAU_UPPER):
    '''The shared τ-grid and its trapezoid weights.

    Returns:

        ``(taus, weights)``, both of shape ``(size,)``.
    '''

    taus = np.linspace(lower, upper, size)
    weights = np.full(size, (upper - lower)/(size - 1))
    weights[0] *= 0.5
    weights[-1] *= 0.5

    return taus, weights
