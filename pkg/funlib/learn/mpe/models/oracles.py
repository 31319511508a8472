from ..distkit import (
    EmpiricalDistribution,
    KernelSpec,
    kde_eval,
    kernel_function,
    quantile,
    resolve_bandwidth)
from ..errors import ConfigurationError, DomainError
from ..functionals import (
    DirectionFunction,
    evaluate,
    hadamard_apply,
    omega_gc)
from ..policy import bind, pi_dot
from .dgp import derive_seed, simulate, simulate_counterfactual
from dataclasses import dataclass
import logging
import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_T_STEP = 0.01
DEFAULT_N_ORACLE = 10**6

# upper bound on the number of kernel evaluations held in memory at once
_CHUNK_ELEMENTS = 1 << 22

# relative rounding allowance of identity checks between exact oracles
EXACT_TOLERANCE = 1e-9


def _check_t_step(t_step):
    if not 0 < t_step <= 0.05:
        raise DomainError(
            "oracle step has to be in (0, 0.05], got %r" % t_step)


def _structural_effects(dgp, sample, policy):
    '''``π̇(D_i)·∂_d m(D_i, X_i, ε_i)``, with ``NaN`` where ``π̇`` is
    trimmed.'''

    policy = bind(policy, sample.d)
    return pi_dot(policy, sample.d)*dgp.dm_dd(sample.d, sample.x, sample.e)


class _OutcomeSmoother(object):
    '''Nadaraya-Watson sums over the outcome, ``(1/n)·Σ_i K_h(y - Y_i)·g_i``.
    Divided by the density estimate with the same kernel, this is the
    kernel regression of ``g`` on ``Y`` at ``y``.'''

    def __init__(self, y, kernel):

        self.outcome = EmpiricalDistribution(y)
        self.kernel = kernel if kernel is not None else KernelSpec()
        self.bandwidth = resolve_bandwidth(self.outcome, self.kernel)
        self._y = np.asarray(y, dtype=np.float64)
        self._k = kernel_function(self.kernel.kernel)

    def sums(self, values, points):

        points = np.atleast_1d(np.asarray(points, dtype=np.float64))
        used = np.isfinite(values)
        y = self._y[used]
        g = values[used]

        out = np.empty(points.size)
        chunk = max(1, _CHUNK_ELEMENTS//max(y.size, 1))
        for start in range(0, points.size, chunk):
            u = (points[start:start + chunk, None] - y[None, :])/self.bandwidth
            out[start:start + chunk] = self._k(u) @ g

        return out/(y.size*self.bandwidth)

    def regression(self, values, point):

        density = kde_eval(self.outcome, self.kernel, point)
        return float(self.sums(values, point)[0]/density)


def oracle_mpe(
        dgp,
        policy,
        functional,
        t_step=DEFAULT_T_STEP,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0):
    '''Brute-force marginal policy effect
    ``(Γ(F̂_{Y^t}) - Γ(F̂_Y))/t`` at ``t = t_step``, with common random
    numbers.'''

    _check_t_step(t_step)

    sample = simulate(dgp, n_oracle, seed)
    counterfactual = simulate_counterfactual(dgp, sample, policy, t_step)

    base = evaluate(functional, EmpiricalDistribution(sample.y))
    moved = evaluate(functional, EmpiricalDistribution(counterfactual))

    return (moved - base)/t_step


def oracle_path_differences(
        dgp,
        policy,
        functional,
        t_steps,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0):
    '''Difference quotients ``(Γ(F̂_{Y^t}) - Γ(F̂_Y))/t`` for every ``t`` in
    ``t_steps``, all on the same latent draws.'''

    for t in t_steps:
        _check_t_step(t)

    sample = simulate(dgp, n_oracle, seed)
    base = evaluate(functional, EmpiricalDistribution(sample.y))

    return np.array([
        (evaluate(
            functional,
            EmpiricalDistribution(
                simulate_counterfactual(dgp, sample, policy, t))) - base)/t
        for t in t_steps])


def oracle_structural_side(
        dgp,
        policy,
        functional,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0,
        cond_kernel=None):
    '''The structural side of the representation result: the Hadamard
    derivative of ``functional`` applied to
    ``ĥ(y) = -f̂_Y(y)·Ê[π̇(D)·∂_d m(D,X,ε) | Y=y]``.

    The conditional expectation is a Nadaraya-Watson regression on ``Y``
    using the latent disturbances.
    '''

    sample = simulate(dgp, n_oracle, seed)
    effects = _structural_effects(dgp, sample, policy)
    smoother = _OutcomeSmoother(sample.y, cond_kernel)

    direction = DirectionFunction(
        lambda y: -smoother.sums(effects, y).reshape(np.shape(y)))

    return hadamard_apply(
        functional,
        smoother.outcome,
        smoother.kernel,
        direction)


def oracle_conditional_effect(
        dgp,
        policy,
        tau,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0,
        cond_kernel=None):
    '''Kernel-conditional mean ``Ê[π̇(D)·∂_d m(D,X,ε) | Y=q̂_τ]``.'''

    sample = simulate(dgp, n_oracle, seed)
    effects = _structural_effects(dgp, sample, policy)
    smoother = _OutcomeSmoother(sample.y, cond_kernel)

    return smoother.regression(effects, quantile(smoother.outcome, tau))


def oracle_weighted_structural(
        dgp,
        policy,
        functional,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0):
    '''Structural averages that need no conditioning on ``Y``:
    ``E[π̇(D)·∂_d m]`` for the mean and ``E[ω^GC(Y,D)·∂_d m]`` for the Gini
    coefficient.'''

    if functional.variant not in ('mean', 'gini'):
        raise ConfigurationError(
            "weighted structural averages exist for the mean and the Gini "
            "coefficient, not %s" % functional.variant)

    sample = simulate(dgp, n_oracle, seed)
    policy = bind(policy, sample.d)
    slopes = dgp.dm_dd(sample.d, sample.x, sample.e)

    if functional.variant == 'mean':
        values = pi_dot(policy, sample.d)*slopes
    else:
        outcome = EmpiricalDistribution(sample.y)
        values = omega_gc(outcome, policy, sample.y, sample.d)*slopes

    return float(np.nanmean(values))


def oracle_uqr_decomposition(
        dgp,
        tau,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0,
        cond_kernel=None):
    '''Split the UQR estimand at ``τ`` into the local average structural
    derivative ``Ê[∂_d m | Y=q̂_τ]`` and the endogeneity bias
    ``Ê[1{Y <= q̂_τ}·∂_d ln f_{ε|D,X}]/f̂_Y(q̂_τ)``.

    Returns:

        ``dict`` with ``lasd_term``, ``bias_term``, and
        ``beta_uqr = lasd_term - bias_term``.
    '''

    if dgp.dlogf is None:
        raise ConfigurationError(
            "structural model %s has no log-density derivative" % dgp.name)

    sample = simulate(dgp, n_oracle, seed)
    smoother = _OutcomeSmoother(sample.y, cond_kernel)
    q = quantile(smoother.outcome, tau)

    slopes = dgp.dm_dd(sample.d, sample.x, sample.e)
    lasd = smoother.regression(slopes, q)

    score = dgp.dlogf(sample.e, sample.d, sample.x)
    density = kde_eval(smoother.outcome, smoother.kernel, q)
    bias = float(np.mean((sample.y <= q)*score))/density

    logger.info(
        "UQR decomposition of %s at tau=%g: LASD %f, bias %f",
        dgp.name, tau, lasd, bias)

    return {'lasd_term': lasd, 'bias_term': bias, 'beta_uqr': lasd - bias}


@dataclass(frozen=True)
class IdentityCheck:
    '''Replicated comparison of two oracles.'''

    lhs: float
    rhs: float
    lhs_se: float
    rhs_se: float
    n_se: float
    abs_tol: float

    @property
    def combined_se(self):
        return float(np.hypot(self.lhs_se, self.rhs_se))

    @property
    def gap(self):
        return abs(self.lhs - self.rhs)

    @property
    def passed(self):
        rounding = EXACT_TOLERANCE*max(1.0, abs(self.rhs))
        return self.gap <= self.n_se*self.combined_se + self.abs_tol + rounding

    def to_dict(self):

        return {
            'lhs': self.lhs,
            'rhs': self.rhs,
            'lhs_se': self.lhs_se,
            'rhs_se': self.rhs_se,
            'combined_se': self.combined_se,
            'gap': self.gap,
            'passed': self.passed,
        }


def identity_check(
        lhs,
        rhs,
        n_oracle=DEFAULT_N_ORACLE,
        seed=0,
        replications=10,
        n_se=3.0,
        abs_tol=0.0):
    '''Compare two oracles ``lhs(n, seed)`` and ``rhs(n, seed)`` over
    ``replications`` independent replications of size
    ``n_oracle/replications``, within ``n_se`` combined Monte Carlo standard
    errors (plus ``abs_tol``).'''

    n = max(2, n_oracle//replications)
    seeds = [derive_seed(seed, r) for r in range(replications)]

    left = np.array([lhs(n, s) for s in seeds])
    right = np.array([rhs(n, s) for s in seeds])

    root = np.sqrt(replications)
    check = IdentityCheck(
        lhs=float(left.mean()),
        rhs=float(right.mean()),
        lhs_se=float(left.std(ddof=1)/root),
        rhs_se=float(right.std(ddof=1)/root),
        n_se=n_se,
        abs_tol=abs_tol)

    logger.info(
        "identity check: %f vs %f, combined standard error %f, %s",
        check.lhs, check.rhs, check.combined_se,
        'passed' if check.passed else 'FAILED')

    return check
