from ...errors import ConfigurationError
import logging
import math
import numpy as np

logger = logging.getLogger(__name__)

# upper bound on the number of kernel weights held in memory at once
CHUNK_ELEMENTS = 1 << 22

_LOG_SQRT_2PI = 0.5*math.log(2.0*math.pi)


def rule_of_thumb_bandwidths(features):
    '''Per-dimension bandwidths ``h_j = 1.06·σ̂_j·n^(-1/(4+q))`` for ``q``
    conditioning variables.'''

    n, q = features.shape
    sd = features.std(axis=0, ddof=1)

    if np.any(sd <= 0):
        raise ConfigurationError(
            "conditioning variable %d has zero variance" %
            int(np.argmin(sd)))

    return 1.06*sd*n**(-1.0/(4.0 + q))


def as_features(features):

    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features.reshape(-1, 1)

    return features


def resolve_bandwidths(features, bandwidths=None):

    if bandwidths is None:
        return rule_of_thumb_bandwidths(features)

    bandwidths = np.asarray(bandwidths, dtype=np.float64).ravel()
    if bandwidths.size != features.shape[1]:
        raise ConfigurationError(
            "got %d bandwidths for %d conditioning variables" %
            (bandwidths.size, features.shape[1]))

    return bandwidths


def product_gaussian_weights(scaled_features, scaled_points):
    '''Unnormalized product-Gaussian weights ``exp(-|u|²/2)`` between
    ``scaled_points`` ``(m, q)`` and ``scaled_features`` ``(n, q)``, both
    divided by the bandwidths.'''

    squared = np.zeros((scaled_points.shape[0], scaled_features.shape[0]))
    for j in range(scaled_features.shape[1]):
        diff = scaled_features[None, :, j] - scaled_points[:, j, None]
        squared += diff*diff

    return np.exp(-0.5*squared)


def chunks(m, n):
    '''Slices over ``m`` evaluation points, sized for ``n`` observations.'''

    size = max(1, CHUNK_ELEMENTS//max(n, 1))
    for start in range(0, m, size):
        yield slice(start, min(start + size, m))


class ProductKernelDensity(object):
    '''Product-Gaussian kernel density estimate of the conditioning variables
    with its analytic derivative along the first one.

    Args:

        features (array-like):

            Sample of shape ``(n, q)``, the policy variable in the first
            column.

        bandwidths (array-like, optional):

            One bandwidth per column. Rule of thumb if not given.
    '''

    def __init__(self, features, bandwidths=None):

        features = as_features(features)

        self.bandwidths = resolve_bandwidths(features, bandwidths)
        self._scaled = features/self.bandwidths
        self._log_norm = (
            np.sum(np.log(self.bandwidths)) +
            features.shape[1]*_LOG_SQRT_2PI)

        logger.debug(
            "product kernel density on %d observations, bandwidths %s",
            features.shape[0], self.bandwidths)

    def evaluate(self, points):
        '''Density ``f̂`` and ``∂f̂/∂p_0`` at ``points`` ``(m, q)``.'''

        points = as_features(points)
        scaled = points/self.bandwidths
        n = self._scaled.shape[0]
        norm = math.exp(-self._log_norm)/n

        density = np.empty(points.shape[0])
        derivative = np.empty(points.shape[0])

        for s in chunks(points.shape[0], n):
            weights = product_gaussian_weights(self._scaled, scaled[s])
            # ∂/∂p_0 of exp(-u_0²/2) is -u_0/h_0 times the weight
            u0 = scaled[s, 0, None] - self._scaled[None, :, 0]
            density[s] = weights.sum(axis=1)*norm
            derivative[s] = -(weights*u0).sum(axis=1)*norm/self.bandwidths[0]

        return density, derivative
