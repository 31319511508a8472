from ..errors import ConfigurationError, DomainError, MpeError
from ..estimators.data import Dataset
from ..policy import apply, bind, support_check
from dataclasses import dataclass, field
import logging
import numpy as np

logger = logging.getLogger(__name__)

# observations drawn to check dm_dd against finite differences of m
PROBE_POINTS = 32
PROBE_STEP = 1e-5
PROBE_TOLERANCE = 1e-6


def derive_seed(master, index):
    '''Seed of replication ``index`` under master seed ``master``, distinct
    for distinct ``(master, index)``.'''

    state = np.random.SeedSequence([int(master), int(index)]).generate_state(1)
    return int(state[0])


@dataclass(frozen=True)
class Selection:
    '''Selection equation ``D = h(Z, X, η)`` of a triangular system.

    Args:

        h (``callable``):

            ``(z, x, eta) -> d``, strictly increasing in ``eta``.

        sample_z (``callable``):

            ``(rng, n, x) -> z``.

        sample_eta (``callable``):

            ``(rng, n) -> eta``, with a continuous, strictly increasing CDF.
    '''

    h: object
    sample_z: object
    sample_eta: object


@dataclass(frozen=True, eq=False)
class StructuralDgp:
    '''A structural model ``Y = m(D, X, ε)`` with known ingredients.

    Exactly one of ``selection`` and ``exogenous_d`` has to be given.

    Args:

        name (``string``):

            Preset name, for logging and reports.

        m (``callable``):

            Outcome equation ``(d, x, e) -> y``, vectorized; ``x`` has shape
            ``(n, k)``.

        dm_dd (``callable``):

            Its closed-form derivative ``∂_d m``.

        sample_x (``callable``):

            ``(rng, n) -> x`` of shape ``(n, k)``.

        sample_eps (``callable``):

            ``(rng, d, x, eta) -> e``, the disturbance given the policy
            variable, the covariates and, for triangular systems, ``η``.

        dlogf (``callable``, optional):

            ``(e, d, x) -> ∂_d ln f_{ε|D,X}(e|d,x)``. Zero under conditional
            independence.

        selection (:class:`Selection`, optional):

        exogenous_d (``callable``, optional):

            ``(rng, n, x) -> d``.

        params (``dict``):

            The numeric parameters the model was created with.
    '''

    name: str
    m: object
    dm_dd: object
    sample_x: object
    sample_eps: object
    dlogf: object = None
    selection: Selection = None
    exogenous_d: object = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):

        if (self.selection is None) == (self.exogenous_d is None):
            raise ConfigurationError(
                "structural model %s needs exactly one of a selection "
                "equation and an exogenous policy variable" % self.name)

        self._check_derivative()

    @property
    def is_triangular(self):
        return self.selection is not None

    def _check_derivative(self):

        probe = simulate(self, PROBE_POINTS, seed=0)
        d, x, e = probe.d, probe.x, probe.e

        numeric = (
            self.m(d + PROBE_STEP, x, e) -
            self.m(d - PROBE_STEP, x, e))/(2*PROBE_STEP)
        analytic = self.dm_dd(d, x, e)
        error = np.max(np.abs(numeric - analytic)/np.maximum(
            1.0,
            np.abs(analytic)))

        if error > PROBE_TOLERANCE:
            raise ConfigurationError(
                "dm_dd of %s deviates from a central difference of m by %g" %
                (self.name, error))


@dataclass(frozen=True, eq=False)
class DgpSample:
    '''A simulated sample with its latent disturbances.

    ``e`` and ``eta`` are for oracles only; :meth:`observed` strips them.
    '''

    y: np.ndarray
    d: np.ndarray
    x: np.ndarray
    e: np.ndarray
    z: np.ndarray = None
    eta: np.ndarray = None

    @property
    def n(self):
        return self.y.size

    def observed(self):
        '''The observables as a :class:`Dataset`.'''
        return Dataset(self.y, self.d, self.x, self.z)


def _draw(what, sampler, *args):

    try:
        return np.asarray(sampler(*args), dtype=np.float64)
    except MpeError:
        raise
    except Exception as e:
        raise ConfigurationError("sampling %s failed: %s" % (what, e)) from e


def simulate(dgp, n, seed):
    '''Draw ``n`` observations of ``(Y, D, X, Z)`` with latents ``(ε, η)``.

    Deterministic given ``seed``.
    '''

    if n < 2:
        raise DomainError("simulation needs n >= 2, got %d" % n)

    rng = np.random.default_rng(seed)

    x = _draw('X', dgp.sample_x, rng, n).reshape(n, -1)

    z = eta = None
    if dgp.selection is not None:
        z = _draw('Z', dgp.selection.sample_z, rng, n, x)
        eta = _draw('eta', dgp.selection.sample_eta, rng, n)
        d = _draw('D', dgp.selection.h, z, x, eta)
    else:
        d = _draw('D', dgp.exogenous_d, rng, n, x)

    e = _draw('eps', dgp.sample_eps, rng, d, x, eta)
    y = np.asarray(dgp.m(d, x, e), dtype=np.float64)

    return DgpSample(y=y, d=d, x=x, e=e, z=z, eta=eta)


def simulate_counterfactual(dgp, sample, policy, t):
    '''Counterfactual outcomes ``m(π_t(D), X, ε)`` with the same ``(X, ε)``
    as ``sample``.'''

    policy = bind(policy, sample.d)
    if policy.variant == 'rank_preserving':
        support_check(policy, sample.d, t)

    return np.asarray(
        dgp.m(apply(policy, sample.d, t), sample.x, sample.e),
        dtype=np.float64)
