from ..errors import ConfigurationError, PresetLookupError
from .dgp import Selection, StructuralDgp
import inspect
import logging
import numpy as np

logger = logging.getLogger(__name__)


def _no_covariates(rng, n):
    return np.empty((n, 0))


def _normal_covariate(rng, n):
    return rng.standard_normal((n, 1))


def _normal_d(rng, n, x):
    return rng.standard_normal(n)


def _uniform_d(low, high):
    def sample(rng, n, x):
        return rng.uniform(low, high, n)
    return sample


def _independent_eps(rng, d, x, eta):
    return rng.standard_normal(d.size)


def _no_eps(rng, d, x, eta):
    return np.zeros(d.size)


def _zero_score(e, d, x):
    return np.zeros_like(d)


def linear_exogenous(beta=1.0):
    '''``Y = beta·D + ε`` with independent standard normal ``D`` and ``ε``.'''

    return StructuralDgp(
        name='linear_exogenous',
        m=lambda d, x, e: beta*d + e,
        dm_dd=lambda d, x, e: np.full_like(d, beta),
        sample_x=_no_covariates,
        sample_eps=_independent_eps,
        dlogf=_zero_score,
        exogenous_d=_normal_d,
        params={'beta': beta})


def random_coefficient(slope_loading=0.5):
    '''``Y = β₀(ε) + β₁(ε)·D`` with ``β₀ = ε`` and
    ``β₁ = 1 + slope_loading·ε``, so that ``E[β₁] = 1``.'''

    return StructuralDgp(
        name='random_coefficient',
        m=lambda d, x, e: e + (1.0 + slope_loading*e)*d,
        dm_dd=lambda d, x, e: 1.0 + slope_loading*e,
        sample_x=_no_covariates,
        sample_eps=_independent_eps,
        dlogf=_zero_score,
        exogenous_d=_normal_d,
        params={'slope_loading': slope_loading})


def quadratic_exogenous():
    '''``Y = D² + X + ε`` with independent standard normals.'''

    return StructuralDgp(
        name='quadratic_exogenous',
        m=lambda d, x, e: d*d + x[:, 0] + e,
        dm_dd=lambda d, x, e: 2.0*d,
        sample_x=_normal_covariate,
        sample_eps=_independent_eps,
        dlogf=_zero_score,
        exogenous_d=_normal_d,
        params={})


def gaussian_endogenous(rho=0.5):
    '''``Y = D + ε`` with ``D ~ N(0, 1)`` and ``ε|D=d ~ N(ρ·d, 1 - ρ²)``.

    The UQR estimand is ``1 + ρ``, the local average structural derivative
    is 1 and the endogeneity bias term is ``-ρ``.
    '''

    if not -1 < rho < 1:
        raise ConfigurationError("rho has to be in (-1, 1), got %r" % rho)

    scale = np.sqrt(1.0 - rho*rho)

    def sample_eps(rng, d, x, eta):
        return rho*d + scale*rng.standard_normal(d.size)

    return StructuralDgp(
        name='gaussian_endogenous',
        m=lambda d, x, e: d + e,
        dm_dd=lambda d, x, e: np.ones_like(d),
        sample_x=_no_covariates,
        sample_eps=sample_eps,
        dlogf=lambda e, d, x: rho*(e - rho*d)/(1.0 - rho*rho),
        exogenous_d=_normal_d,
        params={'rho': rho})


def triangular_normal(rho=0.6, eta_scale=1.0):
    '''Triangular system ``D = Z + eta_scale·η``, ``Y = D + ε`` with
    ``ε = ρ·η + √(1 - ρ²)·u`` and ``Z, η, u`` independent standard normals.

    ``D`` is endogenous, ``V = Φ(η)`` is a control variable. Ignoring the
    endogeneity, the regression slope is
    ``1 + ρ·eta_scale/(1 + eta_scale²)``.
    '''

    if not -1 < rho < 1:
        raise ConfigurationError("rho has to be in (-1, 1), got %r" % rho)
    if eta_scale < 0:
        raise ConfigurationError("eta_scale has to be non-negative")

    scale = np.sqrt(1.0 - rho*rho)

    def sample_eps(rng, d, x, eta):
        return rho*eta + scale*rng.standard_normal(d.size)

    # ε|D=d ~ N(c·d, v) for the jointly normal (ε, D)
    c = rho*eta_scale/(1.0 + eta_scale**2)
    v = 1.0 - rho*eta_scale*c

    return StructuralDgp(
        name='triangular_normal',
        m=lambda d, x, e: d + e,
        dm_dd=lambda d, x, e: np.ones_like(d),
        sample_x=_no_covariates,
        sample_eps=sample_eps,
        dlogf=lambda e, d, x: c*(e - c*d)/v,
        selection=Selection(
            h=lambda z, x, eta: z + eta_scale*eta,
            sample_z=lambda rng, n, x: rng.standard_normal(n),
            sample_eta=lambda rng, n: rng.standard_normal(n)),
        params={'rho': rho, 'eta_scale': eta_scale})


def uniform_identity(low=1.0, high=2.0):
    '''``Y = D`` with ``D ~ U(low, high)``.'''

    return StructuralDgp(
        name='uniform_identity',
        m=lambda d, x, e: d + e,
        dm_dd=lambda d, x, e: np.ones_like(d),
        sample_x=_no_covariates,
        sample_eps=_no_eps,
        dlogf=_zero_score,
        exogenous_d=_uniform_d(low, high),
        params={'low': low, 'high': high})


def quadratic_uniform(low=1.0, high=2.0):
    '''``Y = D²`` with ``D ~ U(low, high)``.'''

    return StructuralDgp(
        name='quadratic_uniform',
        m=lambda d, x, e: d*d + e,
        dm_dd=lambda d, x, e: 2.0*d,
        sample_x=_no_covariates,
        sample_eps=_no_eps,
        dlogf=_zero_score,
        exogenous_d=_uniform_d(low, high),
        params={'low': low, 'high': high})


def independent():
    '''``Y = ε`` independent of ``D``, both standard normal.'''

    return StructuralDgp(
        name='independent',
        m=lambda d, x, e: e + 0.0*d,
        dm_dd=lambda d, x, e: np.zeros_like(d),
        sample_x=_no_covariates,
        sample_eps=_independent_eps,
        dlogf=_zero_score,
        exogenous_d=_normal_d,
        params={})


_REGISTRY = {
    'linear_exogenous': linear_exogenous,
    'random_coefficient': random_coefficient,
    'quadratic_exogenous': quadratic_exogenous,
    'gaussian_endogenous': gaussian_endogenous,
    'triangular_normal': triangular_normal,
    'uniform_identity': uniform_identity,
    'quadratic_uniform': quadratic_uniform,
    'independent': independent,
}


def registry():
    '''Names of all structural model presets.'''
    return sorted(_REGISTRY)


def preset_parameters(name):
    '''Numeric parameters (and their defaults) the preset ``name`` takes.'''

    factory = _lookup(name)
    return {
        p.name: p.default
        for p in inspect.signature(factory).parameters.values()}


def _lookup(name):

    try:
        return _REGISTRY[name]
    except KeyError:
        raise PresetLookupError(
            "unknown structural model preset %r, choose from %s" %
            (name, registry())) from None


def get_preset(name, **params):
    '''Create the preset ``name``, overriding its numeric parameters with
    ``params``.'''

    factory = _lookup(name)
    known = preset_parameters(name)
    unknown = set(params) - set(known)
    if unknown:
        raise ConfigurationError(
            "preset %s has no parameters %s, it takes %s" %
            (name, sorted(unknown), sorted(known)))

    logger.debug("creating preset %s with %s", name, params)

    return factory(**{k: float(v) for k, v in params.items()})
