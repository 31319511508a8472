from .distkit import (
    ecdf_eval,
    gini,
    kde_eval,
    phi_weight,
    quantile,
    quantile_grid,
    resolve_bandwidth)
from .errors import ConfigurationError, DomainError, EstimationFailure
from .policy import pi_dot
from dataclasses import dataclass
from scipy.integrate import trapezoid
import logging
import numbers
import numpy as np

logger = logging.getLogger(__name__)

VARIANTS = ('id_at', 'quantile', 'mean', 'gini')

# outcome range of the τ-tails beyond the sample, in KDE bandwidths
TAIL_REACH = 6.0

# points per bandwidth of the tail quadrature, and bounds on their number
TAIL_RESOLUTION = 4
TAIL_MIN_POINTS = 33
TAIL_MAX_POINTS = 2049


@dataclass(frozen=True)
class FunctionalSpec:
    '''A scalar functional ``Γ`` of an outcome distribution.

    Args:

        variant (``string``):

            ``'id_at'`` (the CDF at ``y``), ``'quantile'`` (at ``tau``),
            ``'mean'``, or ``'gini'``.

        tau (``float``, optional):

            Quantile level, strictly inside ``(0, 1)``.

        y (``float``, optional):

            Evaluation point of ``id_at``.
    '''

    variant: str
    tau: float = None
    y: float = None

    def __post_init__(self):

        if self.variant not in VARIANTS:
            raise ConfigurationError(
                "unknown functional %r, choose from %s" %
                (self.variant, VARIANTS))

        if self.variant == 'quantile':
            if self.tau is None or not 0 < self.tau < 1:
                raise DomainError(
                    "quantile functional needs tau in (0, 1), got %r" %
                    self.tau)

        if self.variant == 'id_at':
            if self.y is None or not np.isfinite(self.y):
                raise DomainError(
                    "id_at functional needs a finite y, got %r" % self.y)

    def describe(self):

        description = {'variant': self.variant}
        if self.variant == 'quantile':
            description['tau'] = self.tau
        if self.variant == 'id_at':
            description['y'] = self.y

        return description


class DirectionFunction(object):
    '''A direction ``h`` in the space of distribution functions.

    Wraps a vectorized callable. Directions add and scale like functions,
    which is all a linear Hadamard derivative needs.

    Args:

        fn (``callable``):

            Maps an array of outcome values to an array of directions.
    '''

    def __init__(self, fn):
        self._fn = fn

    @classmethod
    def from_values(cls, ys, values):
        '''Linear interpolation of ``values`` given on the sorted points
        ``ys``, constant beyond.'''

        ys = np.asarray(ys, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)

        return cls(lambda y: np.interp(y, ys, values))

    @classmethod
    def constant(cls, value):
        return cls(lambda y: np.full(np.shape(y), float(value)))

    def __call__(self, y):

        y = np.asarray(y, dtype=np.float64)
        out = np.asarray(self._fn(y), dtype=float)
        return float(out) if out.ndim == 0 else out

    def __add__(self, other):
        return DirectionFunction(lambda y: self(y) + other(y))

    def __sub__(self, other):
        return DirectionFunction(lambda y: self(y) - other(y))

    def __mul__(self, scale):

        if not isinstance(scale, numbers.Real):
            return NotImplemented

        return DirectionFunction(lambda y: scale*self(y))

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0*self


class _DensityGrid(object):
    '''Quantiles and outcome densities on the shared τ-grid, with the
    density-floor trimming mask.'''

    def __init__(self, dist, kde, floor=None):

        self.dist = dist
        self.kde = kde
        self.taus, self.weights = quantile_grid()
        self.quantiles = quantile(dist, self.taus)
        self.density = kde_eval(dist, kde, self.quantiles)

        if floor is None:
            floor = max(1e-4, 0.01*self.density.max())
        self.floor = floor
        self.keep = self.density >= floor
        self.n_trimmed = int((~self.keep).sum())

        if not self.keep.any():
            raise EstimationFailure(
                "outcome density below %g at every point of the quantile "
                "grid" % floor)

        if self.n_trimmed > 0:
            logger.info(
                "trimmed %d of %d quantile grid points with density below %g",
                self.n_trimmed, self.taus.size, floor)

    def integrate(self, integrand):
        '''Trapezoid sum over kept grid points, renormalized to the τ-mass of
        the full grid.'''

        weights = np.where(self.keep, self.weights, 0.0)
        weights *= self.weights.sum()/weights.sum()
        values = np.where(self.keep, integrand, 0.0)

        return float(np.sum(weights*values))

    def tails(self, h, weight=None):
        '''Contribution of the τ-ranges below and above the grid to
        ``∫ w(τ)·(-h(q̂_τ)/f̂_Y(q̂_τ)) dτ``.

        Each tail contributes its τ-mass times the density-weighted mean of
        the integrand over the outcome range beyond the outermost grid
        quantile. With ``τ = F(y)`` that mean is
        ``∫ w(F̂(y))·(-h(y)) dy / ∫ f̂_Y(y) dy``, free of density divisions.

        Args:

            h (``callable``):

                The direction.

            weight (``callable``, optional):

                ``y -> w(F̂_Y(y))``, one if not given.
        '''

        bandwidth = resolve_bandwidth(self.dist, self.kde)
        reach = TAIL_REACH*bandwidth

        ranges = (
            (self.dist.values[0] - reach, self.quantiles[0], self.taus[0]),
            (self.quantiles[-1], self.dist.values[-1] + reach,
             1.0 - self.taus[-1]))

        total = 0.0
        for start, stop, mass in ranges:

            size = int(np.clip(
                np.ceil(TAIL_RESOLUTION*(stop - start)/bandwidth) + 1,
                TAIL_MIN_POINTS,
                TAIL_MAX_POINTS))
            ys = np.linspace(start, stop, size)

            density = trapezoid(kde_eval(self.dist, self.kde, ys), ys)
            if not density > 0:
                continue

            values = -np.asarray(h(ys), dtype=np.float64)
            if weight is not None:
                values = values*weight(ys)

            total += mass*trapezoid(values, ys)/density

        return float(total)


def evaluate(spec, dist):
    '''Evaluate ``Γ(F̂)`` on an empirical distribution.'''

    if spec.variant == 'id_at':
        return ecdf_eval(dist, spec.y)
    if spec.variant == 'quantile':
        return quantile(dist, spec.tau)
    if spec.variant == 'mean':
        return dist.mean

    return gini(dist)


def hadamard_apply(spec, dist, kde, h, floor=None, return_trimmed=False):
    '''Apply the Hadamard derivative ``Γ'_F̂`` to the direction ``h``.

    The mean and Gini derivatives integrate over the τ-grid and add the
    τ-tails outside of it, see :meth:`_DensityGrid.tails`.

    Args:

        spec (:class:`FunctionalSpec`):

            The functional.

        dist (:class:`EmpiricalDistribution`):

            The outcome distribution ``F̂`` the derivative is taken at.

        kde (:class:`KernelSpec`):

            Kernel for the outcome density ``f̂``.

        h (``callable``):

            The direction, e.g., a :class:`DirectionFunction`.

        floor (``float``, optional):

            Density floor below which quantile grid points are trimmed.
            Defaults to ``max(1e-4, 0.01·max f̂)`` on the grid.

        return_trimmed (``bool``):

            If set, return ``(value, n_trimmed)``.
    '''

    n_trimmed = 0

    if spec.variant == 'id_at':

        value = float(h(spec.y))

    elif spec.variant == 'quantile':

        grid = _DensityGrid(dist, kde, floor)
        q = quantile(dist, spec.tau)
        f = kde_eval(dist, kde, q)
        if f < grid.floor:
            raise EstimationFailure(
                "outcome density %g at the %g-quantile %g is below the floor "
                "%g" % (f, spec.tau, q, grid.floor))
        value = -float(h(q))/f

    else:

        if spec.variant == 'gini':
            # domain of the Gini coefficient
            phi = phi_weight(dist, quantile_grid()[0])

        grid = _DensityGrid(dist, kde, floor)
        n_trimmed = grid.n_trimmed
        with np.errstate(divide='ignore', invalid='ignore'):
            quantile_effect = -h(grid.quantiles)/grid.density

        if spec.variant == 'mean':
            value = grid.integrate(quantile_effect) + grid.tails(h)
        else:
            value = 2.0/dist.mean**2*(
                grid.integrate(phi*quantile_effect) +
                grid.tails(
                    h, lambda y: phi_weight(dist, ecdf_eval(dist, y))))

    if return_trimmed:
        return value, n_trimmed

    return value


def omega_f(dist, kde, policy, y, d):
    '''Structural weight ``ω^f(y, d) = -f̂_Y(y)·π̇(d)``.'''
    return -kde_eval(dist, kde, y)*pi_dot(policy, d)


def omega_gc(dist, policy, y, d):
    '''Gini weight ``ω^GC(y, d) = 2·φ̂(F̂_Y(y))·π̇(d)/μ̂²``.'''

    phi = phi_weight(dist, ecdf_eval(dist, y))
    return 2.0*phi*pi_dot(policy, d)/dist.mean**2
