from ..errors import EstimationFailure
from dataclasses import dataclass
from joblib import Parallel, delayed
import logging
import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BootstrapResult:
    '''Pairs-bootstrap draws of an estimate, for dispersion reporting.'''

    values: np.ndarray
    n_failed: int

    @property
    def mean(self):
        return float(np.mean(self.values))

    @property
    def std(self):
        return float(np.std(self.values, ddof=1))

    def percentile(self, q):
        return np.percentile(self.values, q)


def _draw(estimator, data, seed, b, args, kwargs):

    rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
    index = rng.integers(0, data.n, size=data.n)

    try:
        return estimator(data.subset(index), *args, **kwargs).value
    except EstimationFailure as e:
        logger.debug("bootstrap draw %d failed: %s", b, e)
        return np.nan


def bootstrap(
        estimator,
        data,
        *args,
        replications=200,
        seed=0,
        n_jobs=1,
        **kwargs):
    '''Nonparametric pairs bootstrap of ``estimator(data, *args, **kwargs)``.

    Draws resample whole observations with replacement. Draws whose
    estimator fails are dropped and counted.

    Args:

        estimator (``callable``):

            Any estimator returning an :class:`MpeEstimate`.

        data (:class:`Dataset`):

        replications (``int``):

            Number of bootstrap draws.

        seed (``int``):

            Master seed; draw ``b`` uses ``SeedSequence([seed, b])``.

        n_jobs (``int``):

            Parallel workers, forwarded to ``joblib.Parallel``.
    '''

    values = Parallel(n_jobs=n_jobs)(
        delayed(_draw)(estimator, data, seed, b, args, kwargs)
        for b in range(replications))
    values = np.asarray(values, dtype=np.float64)

    failed = np.isnan(values)
    if failed.all():
        raise EstimationFailure("every bootstrap draw failed")
    if failed.any():
        logger.warning(
            "%d of %d bootstrap draws failed", failed.sum(), replications)

    return BootstrapResult(values[~failed], int(failed.sum()))
