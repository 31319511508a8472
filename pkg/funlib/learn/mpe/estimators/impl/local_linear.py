from .density import (
    as_features,
    chunks,
    product_gaussian_weights,
    resolve_bandwidths)
import logging
import numpy as np

logger = logging.getLogger(__name__)

# local fits with fewer effective observations are trimmed
MIN_EFFECTIVE = 20.0

# local design matrices with a larger condition number are trimmed
MAX_CONDITION = 1e10


class LocalLinearSmoother(object):
    '''Local-linear regression with a product-Gaussian kernel, expressed
    through its equivalent kernel.

    At every evaluation point ``p`` the fit is linear in the responses: the
    level is ``l(p)·r`` and the slope along the first conditioning variable is
    ``s(p)·r`` for equivalent-kernel rows ``l(p)`` and ``s(p)`` over the
    ``n`` observations. All estimators are built from these rows.

    Args:

        features (array-like):

            Conditioning variables of shape ``(n, q)``, the policy variable
            in the first column.

        bandwidths (array-like, optional):

            One bandwidth per column. Rule of thumb if not given.

        min_effective (``float``):

            Trim points where ``(ΣK)²/ΣK²`` is smaller.

        max_condition (``float``):

            Trim points whose local design is worse conditioned.
    '''

    def __init__(
            self,
            features,
            bandwidths=None,
            min_effective=MIN_EFFECTIVE,
            max_condition=MAX_CONDITION):

        features = as_features(features)

        self.bandwidths = resolve_bandwidths(features, bandwidths)
        self.min_effective = min_effective
        self.max_condition = max_condition

        self._scaled = features/self.bandwidths
        n, q = self._scaled.shape
        self._outer = (
            self._scaled[:, :, None]*self._scaled[:, None, :]).reshape(n, q*q)

        logger.debug(
            "local-linear smoother on %d observations, bandwidths %s",
            n, self.bandwidths)

    @property
    def n(self):
        return self._scaled.shape[0]

    def iter_rows(self, points):
        '''Yield ``(s, level, slope, trimmed)`` for consecutive slices ``s``
        of ``points``: equivalent-kernel rows of shape ``(len(s), n)`` and the
        trimming mask. Rows of trimmed points are zero.'''

        points = as_features(points)/self.bandwidths
        n, q = self._scaled.shape
        eye = np.eye(q + 1)

        for s in chunks(points.shape[0], n):

            p = points[s]
            c = p.shape[0]
            weights = product_gaussian_weights(self._scaled, p)

            s0 = weights.sum(axis=1)
            s1 = weights @ self._scaled
            s2 = (weights @ self._outer).reshape(c, q, q)

            with np.errstate(divide='ignore', invalid='ignore'):
                n_effective = np.where(
                    s0 > 0,
                    s0*s0/(weights*weights).sum(axis=1),
                    0.0)

            # moments of the design [1, u - p]
            m1 = s1 - p*s0[:, None]
            m2 = (
                s2 -
                p[:, :, None]*s1[:, None, :] -
                s1[:, :, None]*p[:, None, :] +
                p[:, :, None]*p[:, None, :]*s0[:, None, None])

            design = np.empty((c, q + 1, q + 1))
            design[:, 0, 0] = s0
            design[:, 0, 1:] = m1
            design[:, 1:, 0] = m1
            design[:, 1:, 1:] = m2

            trimmed = n_effective < self.min_effective
            if (~trimmed).any():
                with np.errstate(divide='ignore', invalid='ignore'):
                    condition = np.linalg.cond(design[~trimmed])
                trimmed[~trimmed] = ~(condition < self.max_condition)
            design[trimmed] = eye

            inverse = np.linalg.inv(design)

            level = self._row(weights, inverse[:, 0, :], p)
            slope = self._row(weights, inverse[:, 1, :], p)/self.bandwidths[0]
            level[trimmed] = 0.0
            slope[trimmed] = 0.0

            yield s, level, slope, trimmed

    def _row(self, weights, coefficients, p):

        # coefficients·[1, u_i - p] for every observation i
        offset = coefficients[:, 0] - np.sum(coefficients[:, 1:]*p, axis=1)
        return weights*(offset[:, None] + coefficients[:, 1:] @ self._scaled.T)

    def rows(self, points):
        '''All equivalent-kernel rows at once, ``(level, slope, trimmed)``.'''

        points = as_features(points)
        m = points.shape[0]
        level = np.empty((m, self.n))
        slope = np.empty((m, self.n))
        trimmed = np.empty(m, dtype=bool)

        for s, l, d, t in self.iter_rows(points):
            level[s] = l
            slope[s] = d
            trimmed[s] = t

        return level, slope, trimmed

    def evaluate(self, points, response):
        '''Fitted levels and slopes of ``response`` at ``points``.

        Args:

            points (array-like):

                Evaluation points ``(m, q)``.

            response (array-like):

                Responses of shape ``(n,)`` or ``(n, r)``.

        Returns:

            ``(level, slope, trimmed)``, the first two of shape ``(m,)`` or
            ``(m, r)`` with ``NaN`` in trimmed rows.
        '''

        response = np.asarray(response, dtype=np.float64)
        vector = response.ndim == 1
        if vector:
            response = response[:, None]

        points = as_features(points)
        m = points.shape[0]
        level = np.empty((m, response.shape[1]))
        slope = np.empty((m, response.shape[1]))
        trimmed = np.empty(m, dtype=bool)

        for s, l, d, t in self.iter_rows(points):
            level[s] = l @ response
            slope[s] = d @ response
            trimmed[s] = t

        level[trimmed] = np.nan
        slope[trimmed] = np.nan

        if vector:
            return level[:, 0], slope[:, 0], trimmed

        return level, slope, trimmed

    def averaged_slope(self, points, weights):
        '''The weighted average ``Σ_i w_i·s(p_i) / n_used`` of slope rows over
        points that are neither trimmed nor carry a ``NaN`` weight.

        Returns:

            ``(average, n_used, used)`` with ``average`` of shape ``(n,)``.
        '''

        points = as_features(points)
        weights = np.asarray(weights, dtype=np.float64)

        average = np.zeros(self.n)
        used = np.isfinite(weights)

        for s, _, slope, trimmed in self.iter_rows(points):
            used[s] &= ~trimmed
            keep = used[s]
            if keep.any():
                average += weights[s][keep] @ slope[keep]

        n_used = int(used.sum())
        if n_used > 0:
            average /= n_used

        logger.info(
            "averaged local-linear slopes over %d of %d points",
            n_used, points.shape[0])

        return average, n_used, used
