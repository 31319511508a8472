from ..distkit import KernelSpec
from ..errors import ConfigurationError, DomainError, EstimationFailure
from dataclasses import dataclass, field
import logging
import numpy as np

logger = logging.getLogger(__name__)

# hard floor on the sample size of any nonparametric estimator
MIN_OBSERVATIONS = 50

# fraction of trimmed observations above which an estimate is flagged
TRIM_WARNING_FRACTION = 0.2


@dataclass(frozen=True, eq=False)
class Dataset:
    '''Observables ``(Y, D, X, Z)``, the only data estimators ever see.

    Args:

        y, d (array-like):

            Outcome and policy variable, of length ``n``.

        x (array-like, optional):

            Covariates of shape ``(n, k)``. ``k`` may be zero.

        z (array-like, optional):

            Instrument of the selection equation, of length ``n``.
    '''

    y: np.ndarray
    d: np.ndarray
    x: np.ndarray = None
    z: np.ndarray = None

    def __post_init__(self):

        y = np.asarray(self.y, dtype=np.float64).ravel()
        d = np.asarray(self.d, dtype=np.float64).ravel()
        n = y.size

        if self.x is None:
            x = np.empty((n, 0))
        else:
            x = np.asarray(self.x, dtype=np.float64)
            if x.ndim == 1:
                x = x.reshape(-1, 1)

        z = None
        if self.z is not None:
            z = np.asarray(self.z, dtype=np.float64).ravel()

        for name, column in (('d', d), ('x', x), ('z', z)):
            if column is not None and column.shape[0] != n:
                raise DomainError(
                    "column %s has %d rows, y has %d" %
                    (name, column.shape[0], n))

        for name, column in (('y', y), ('d', d), ('x', x), ('z', z)):
            if column is not None and not np.all(np.isfinite(column)):
                raise DomainError("column %s has missing values" % name)

        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'd', d)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'z', z)

    @property
    def n(self):
        return self.y.size

    @property
    def k(self):
        return self.x.shape[1]

    @property
    def has_instrument(self):
        return self.z is not None

    def subset(self, index):
        '''The rows ``index`` as a new dataset.'''

        return Dataset(
            self.y[index],
            self.d[index],
            self.x[index],
            None if self.z is None else self.z[index])

    def require_size(self, minimum=MIN_OBSERVATIONS):

        if self.n < minimum:
            raise EstimationFailure(
                "nonparametric estimation needs at least %d observations, got "
                "%d" % (minimum, self.n))


@dataclass(frozen=True)
class FirstStageConfig:
    '''Tuning of the nonparametric first stages.

    Args:

        kernel (:class:`KernelSpec`):

            Kernel of the outcome density ``f̂_Y`` and of the reweighting
            estimator's outcome kernel.

        bandwidths (``tuple`` of ``float``, optional):

            Explicit bandwidths of the local-linear and product-kernel first
            stages, one per conditioning variable ``(D, [V,] X...)``. The
            rule ``1.06·σ̂_j·n^(-1/(4+q))`` is used if not given.

        trim_floor (``float``):

            Density floor for ``f̂_Y(q̂_τ)`` and ``f̂_{D,X}``.

        folds (``int``):

            Number of cross-fitting folds.

        alpha_grid (``tuple`` of ``float``):

            Quantile levels bracketing the matching-function root.

        min_effective (``float``):

            Smallest local effective sample size of a local-linear fit.

        y_grid_size (``int``):

            Number of outcome points conditional CDFs are tabulated on before
            inversion.

        seed (``int``):

            Seed of the cross-fitting fold assignment.
    '''

    kernel: KernelSpec = KernelSpec()
    bandwidths: tuple = None
    trim_floor: float = 1e-3
    folds: int = 5
    alpha_grid: tuple = field(
        default_factory=lambda: tuple(
            np.round(np.linspace(0.01, 0.99, 99), 2)))
    min_effective: float = 20.0
    y_grid_size: int = 256
    seed: int = 0

    def __post_init__(self):

        if self.folds < 2:
            raise ConfigurationError(
                "cross-fitting needs at least 2 folds, got %d" % self.folds)
        if not self.trim_floor > 0:
            raise ConfigurationError(
                "trim floor has to be positive, got %r" % self.trim_floor)
        increasing = np.all(np.diff(self.alpha_grid) > 0)
        if len(self.alpha_grid) < 2 or not increasing:
            raise ConfigurationError(
                "alpha grid has to be strictly increasing")
        if min(self.alpha_grid) <= 0 or max(self.alpha_grid) >= 1:
            raise ConfigurationError("alpha grid has to lie inside (0, 1)")
        if self.bandwidths is not None:
            if any(not h > 0 for h in self.bandwidths):
                raise ConfigurationError(
                    "explicit bandwidths have to be positive")
            object.__setattr__(self, 'bandwidths', tuple(self.bandwidths))
        object.__setattr__(self, 'alpha_grid', tuple(self.alpha_grid))

    def describe(self):

        return {
            'kernel': self.kernel.kernel,
            'y_bandwidth': self.kernel.bandwidth,
            'bandwidths': None if self.bandwidths is None else list(
                self.bandwidths),
            'trim_floor': self.trim_floor,
            'folds': self.folds,
            'min_effective': self.min_effective,
            'y_grid_size': self.y_grid_size,
            'seed': self.seed,
        }


@dataclass(frozen=True, eq=False)
class MpeEstimate:
    '''An estimated marginal policy effect.

    Args:

        value (``float``):

            The estimate.

        functional (:class:`FunctionalSpec`):

        policy (:class:`PolicySpec`):

        n_used, n_trimmed (``int``):

            Observations entering the estimate, and observations dropped by
            first-stage trimming.

        bandwidths (``dict``):

            The resolved bandwidths, by conditioning variable.

        method (``string``):

            ``plugin``, ``reweight``, ``debiased``, each with a ``cv_`` prefix
            when a control variable was used.
    '''

    value: float
    functional: object
    policy: object
    n_used: int
    n_trimmed: int
    bandwidths: dict
    method: str
    grid_trimmed: int = 0

    def __post_init__(self):

        if self.trim_warning:
            logger.warning(
                "%s estimate trimmed %d of %d observations",
                self.method, self.n_trimmed, self.n_used + self.n_trimmed)

    @property
    def trim_fraction(self):

        total = self.n_used + self.n_trimmed
        return self.n_trimmed/total if total else 0.0

    @property
    def trim_warning(self):
        return self.trim_fraction > TRIM_WARNING_FRACTION

    def to_dict(self):

        return {
            'value': self.value,
            'functional': self.functional.describe(),
            'policy': self.policy.describe(),
            'n_used': self.n_used,
            'n_trimmed': self.n_trimmed,
            'grid_trimmed': self.grid_trimmed,
            'trim_warning': self.trim_warning,
            'bandwidths': dict(self.bandwidths),
            'method': self.method,
        }
