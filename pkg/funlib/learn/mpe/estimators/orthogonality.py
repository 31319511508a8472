from ..distkit import EmpiricalDistribution, quantile
from ..errors import ConfigurationError, EstimationFailure
from ..policy import bind, location_shift, pi_dot
from .data import FirstStageConfig
from .first_stage import FirstStage
from .quantile import riesz_representer
from dataclasses import dataclass
from scipy.stats import norm
import logging
import numpy as np

logger = logging.getLogger(__name__)

QUADRATURE_POINTS = 4001


@dataclass(frozen=True)
class SlopeCheck:
    '''Log-log slope of the moment change against the perturbation size.'''

    slope: float
    deltas: tuple
    changes: tuple


@dataclass(frozen=True)
class RieszGap:
    '''Both sides of the Riesz identity ``E[α·g] = -E[π̇·∂_d g]``.'''

    lhs: float
    rhs: float
    n_used: int

    @property
    def relative_error(self):
        return abs(self.lhs - self.rhs)/abs(self.rhs)


def orthogonal_moment(pi, dgamma, alpha, response, gamma, weights=None):
    '''Average of the orthogonal score ``π̇·∂_d γ - α·(r - γ)``.

    Args:

        pi, dgamma, alpha, response, gamma (array-like):

            Policy derivative, ``d``-derivative of the conditional CDF,
            Riesz representer, response ``1{Y <= q}`` (or its conditional
            expectation), and conditional CDF, all at the same points.

        weights (array-like, optional):

            Quadrature weights. Plain average if not given.
    '''

    score = (
        np.asarray(pi)*np.asarray(dgamma) -
        np.asarray(alpha)*(np.asarray(response) - np.asarray(gamma)))

    if weights is None:
        return float(np.mean(score))

    return float(np.sum(np.asarray(weights)*score))


def orthogonality_slope(
        data,
        tau,
        cfg=None,
        beta=1.0,
        deltas=(0.05, 0.1, 0.2, 0.4)):
    '''Numerical Neyman-orthogonality check of the quantile score.

    Works on data from ``Y = beta·D + ε`` with independent standard normal
    ``D`` and ``ε`` and a location shift, where ``γ₀(d) = Φ(q - beta·d)`` and
    ``α₀(d) = -d`` are known. The conditional CDF and the Riesz representer
    are jointly moved from the truth towards their estimates by ``δ``; the
    population moment, computed by quadrature over ``D``, then changes by
    ``O(δ²)``.

    Returns:

        :class:`SlopeCheck`, with a slope close to 2 for an orthogonal score.
    '''

    cfg = cfg if cfg is not None else FirstStageConfig()
    if data.k != 0:
        raise ConfigurationError(
            "the orthogonality check expects data without covariates")

    q = quantile(EmpiricalDistribution(data.y), tau)
    stage = FirstStage(data, cfg)

    lower, upper = np.percentile(data.d, [1, 99])
    grid = np.linspace(lower, upper, QUADRATURE_POINTS)
    weights = norm.pdf(grid)*(grid[1] - grid[0])
    weights[[0, -1]] *= 0.5
    # perturbations vanish at the ends, no boundary terms
    taper = np.sin(np.pi*(grid - lower)/(upper - lower))**2

    gamma_true = norm.cdf(q - beta*grid)
    alpha_true = -grid

    below = (data.y <= q).astype(np.float64)
    gamma_hat, _, _ = stage.smoother.evaluate(grid[:, None], below)
    alpha_hat = riesz_representer(data, location_shift(), cfg, grid)

    gamma_gap = taper*np.nan_to_num(gamma_hat - gamma_true, nan=0.0)
    alpha_gap = taper*np.nan_to_num(alpha_hat - alpha_true, nan=0.0)

    def moment(delta):
        gamma = gamma_true + delta*gamma_gap
        alpha = alpha_true + delta*alpha_gap
        return orthogonal_moment(
            1.0,
            np.gradient(gamma, grid),
            alpha,
            gamma_true,
            gamma,
            weights)

    base = moment(0.0)
    changes = np.array([abs(moment(delta) - base) for delta in deltas])

    if not np.all(changes > 0):
        raise EstimationFailure(
            "estimated first stages coincide with the truth, the moment does "
            "not move")

    slope = float(np.polyfit(np.log(deltas), np.log(changes), 1)[0])
    logger.info(
        "moment changes %s for perturbations %s, log-log slope %f",
        changes, deltas, slope)

    return SlopeCheck(slope, tuple(deltas), tuple(map(float, changes)))


def riesz_gap(data, policy, cfg, g, dg, control=False):
    '''Evaluate both sides of ``Ê_n[α̂·g] = -Ê_n[π̇·∂_d g]``.

    Args:

        g, dg (``callable``):

            Test function ``g(d, x)`` and its ``d``-derivative, vectorized
            over observations.

    Returns:

        :class:`RieszGap`
    '''

    cfg = cfg if cfg is not None else FirstStageConfig()
    policy = bind(policy, data.d)
    stage = FirstStage(data, cfg, control)
    others = stage.features[:, 1:] if stage.features.shape[1] > 1 else None

    alpha = riesz_representer(data, policy, cfg, data.d, others, control)
    pi = pi_dot(policy, data.d)
    used = np.isfinite(alpha) & np.isfinite(pi)

    lhs = float(np.mean(alpha[used]*g(data.d[used], data.x[used])))
    rhs = -float(np.mean(pi[used]*dg(data.d[used], data.x[used])))

    logger.info(
        "Riesz identity: %f vs %f on %d observations", lhs, rhs, used.sum())

    return RieszGap(lhs, rhs, int(used.sum()))
