from ..errors import ConfigurationError
from .data import FirstStageConfig
from .impl.density import rule_of_thumb_bandwidths
from .impl.local_linear import LocalLinearSmoother
import logging
import numpy as np

logger = logging.getLogger(__name__)

# the control variable is clipped to [CONTROL_CLIP, 1 - CONTROL_CLIP]
CONTROL_CLIP = 0.001

# control variables with a smaller standard deviation are reported degenerate
CONTROL_MIN_SPREAD = 0.05


def feature_names(data, control=False):

    names = ['d']
    if control:
        names.append('v')
    names += ['x%d' % j for j in range(data.k)]

    return names


def _bandwidths(features, cfg):

    if cfg.bandwidths is None:
        return rule_of_thumb_bandwidths(features)

    if len(cfg.bandwidths) != features.shape[1]:
        raise ConfigurationError(
            "configured %d first-stage bandwidths for %d conditioning "
            "variables" % (len(cfg.bandwidths), features.shape[1]))

    return np.asarray(cfg.bandwidths, dtype=np.float64)


class FirstStage(object):
    '''Conditioning variables ``(D, [V̂,] X)`` of one estimator call and the
    local-linear smoother over them.

    Args:

        data (:class:`Dataset`):

        cfg (:class:`FirstStageConfig`):

        control (``bool``):

            Whether to condition on the estimated control variable ``V̂``.
    '''

    def __init__(self, data, cfg, control=False):

        cfg = cfg if cfg is not None else FirstStageConfig()
        self.names = feature_names(data, control)
        self.control = control

        columns = [data.d]
        if control:
            self.v = control_variable(data, cfg)
            columns.append(self.v)
        else:
            self.v = None
        columns += [data.x[:, j] for j in range(data.k)]

        self.features = np.column_stack(columns)
        self.smoother = LocalLinearSmoother(
            self.features,
            _bandwidths(self.features, cfg),
            min_effective=cfg.min_effective)

        logger.info(
            "first stage on %s with bandwidths %s",
            self.names, np.round(self.smoother.bandwidths, 4))

    @property
    def bandwidths(self):
        return dict(zip(self.names, map(float, self.smoother.bandwidths)))

    def points(self, d, x=None):
        '''Stack evaluation points from values of ``d`` and ``x``. With a
        control variable, ``x`` has to start with the value of ``V``.'''

        d = np.atleast_1d(np.asarray(d, dtype=np.float64))
        q = self.features.shape[1]

        if q == 1:
            return d.reshape(-1, 1)

        if x is None:
            raise ConfigurationError(
                "evaluation point needs values for %s" % self.names[1:])

        x = np.asarray(x, dtype=np.float64).reshape(d.size, q - 1)
        return np.column_stack([d, x])


def control_variable(data, cfg):
    '''Estimate the control variable ``V̂_i = F̂_{D|Z,X}(D_i|Z_i,X_i)``.

    The conditional CDF is a local-linear fit of ``1{D_j <= D_i}`` on
    ``(Z, X)``. Points whose local fit is trimmed fall back to the marginal
    rank of ``D_i``. The result is clipped to ``[0.001, 0.999]``. Bandwidths
    always follow the rule of thumb on ``(Z, X)``.
    '''

    if not data.has_instrument:
        raise ConfigurationError(
            "the control variable needs an instrument column z")

    features = np.column_stack(
        [data.z] + [data.x[:, j] for j in range(data.k)])
    cfg = cfg if cfg is not None else FirstStageConfig()
    smoother = LocalLinearSmoother(
        features,
        rule_of_thumb_bandwidths(features),
        min_effective=cfg.min_effective)

    v = np.empty(data.n)
    trimmed = np.empty(data.n, dtype=bool)

    for s, level, _, t in smoother.iter_rows(features):
        below = data.d[None, :] <= data.d[s, None]
        v[s] = np.sum(level*below, axis=1)
        trimmed[s] = t

    n_trimmed = int(trimmed.sum())
    if n_trimmed > 0:
        ranks = np.searchsorted(np.sort(data.d), data.d, side='right')/data.n
        v[trimmed] = ranks[trimmed]
        logger.info(
            "control variable fell back to marginal ranks at %d of %d points",
            n_trimmed, data.n)

    v = np.clip(v, CONTROL_CLIP, 1.0 - CONTROL_CLIP)

    spread = float(np.std(v))
    if spread < CONTROL_MIN_SPREAD:
        logger.warning(
            "control variable is degenerate (standard deviation %f), the "
            "selection equation may leave no variation in D given Z", spread)

    return v
