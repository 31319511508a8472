from ..distkit import EmpiricalDistribution, KernelSpec, ecdf_eval, quantile
from ..errors import MpeError
from ..estimators import (
    control_variable,
    cv_quantile_mpe,
    orthogonality_slope,
    plugin_quantile_mpe,
    riesz_gap,
    uqr_estimand)
from ..functionals import (
    DirectionFunction,
    FunctionalSpec,
    evaluate,
    hadamard_apply)
from ..models import (
    derive_seed,
    get_preset,
    identity_check,
    oracle_conditional_effect,
    oracle_mpe,
    oracle_structural_side,
    oracle_uqr_decomposition,
    simulate)
from ..policy import location_shift, mean_preserving
from collections import OrderedDict
from dataclasses import dataclass, field
from scipy.stats import kstest, norm
import logging
import numpy as np

logger = logging.getLogger(__name__)

QUANTILE_LEVELS = (0.25, 0.5, 0.75)

STEP_SCHEDULE = (0.1, 0.05, 0.01)

# t-independent error floors of the finite-difference schedule (kernel bias
# and the trimmed quantile grid)
HADAMARD_FLOORS = {'quantile': 2e-3, 'mean': 2e-3, 'gini': 2e-3}

# size of the quasi-random normal samples of the Hadamard checks
HADAMARD_SAMPLE = 10**6

RIESZ_MIN_SAMPLE = 20000
RIESZ_TOLERANCE = 0.05

MIN_ORTHOGONALITY_SLOPE = 1.7

NAIVE_MIN_BIAS = 0.1


@dataclass(frozen=True)
class CheckResult:
    '''Outcome of one check.

    Args:

        name (``string``):

        verifies (``string``):

            The property the check verifies.

        passed (``bool``):

        details (``dict``):

            The compared quantities and tolerances.
    '''

    name: str
    verifies: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):

        return {
            'name': self.name,
            'verifies': self.verifies,
            'passed': bool(self.passed),
            'details': self.details,
        }


def _tolerance(base, scale, n):
    '''``base``, widened to ``scale/√n`` for small samples.'''
    return max(base, scale/np.sqrt(n))


def _sample(preset, n, config, stream, **params):
    dgp = get_preset(preset, **params)
    return dgp, simulate(dgp, n, derive_seed(config.seed, stream)).observed()


def representation_cells(dgp, n, seed):
    '''The policy and functional combinations the structural representation
    is checked on: location shifts and mean-preserving spreads, each with the
    CDF at the median, three quantiles and the mean.

    Returns:

        ``list`` of ``(label, policy, functional)``.
    '''

    pilot = simulate(dgp, n, seed)
    median = quantile(EmpiricalDistribution(pilot.y), 0.5)

    functionals = [FunctionalSpec('id_at', y=median)]
    functionals += [FunctionalSpec('quantile', tau=t) for t in QUANTILE_LEVELS]
    functionals.append(FunctionalSpec('mean'))

    cells = []
    for policy in (location_shift(), mean_preserving(1.0)):
        for functional in functionals:
            label = '%s/%s' % (
                policy.variant,
                ','.join('%s=%s' % item
                         for item in sorted(functional.describe().items())))
            cells.append((label, policy, functional))

    return cells


def structural_identity(dgp, policy, functional, config):
    '''Replicated comparison of the finite-difference oracle with the
    structural side of the representation.'''

    return identity_check(
        lambda n, s: oracle_mpe(dgp, policy, functional, config.t_step, n, s),
        lambda n, s: oracle_structural_side(dgp, policy, functional, n, s),
        n_oracle=config.n_oracle,
        seed=config.seed)


def structural_representation(config):

    dgp = config.structural_model()
    cells = representation_cells(
        dgp,
        max(2, config.n_oracle//10),
        derive_seed(config.seed, 7))
    cells.append(
        ('configured', config.policy_spec(), config.functional_spec()))

    details = {}
    passed = True
    for label, policy, functional in cells:
        check = structural_identity(dgp, policy, functional, config)
        details[label] = check.to_dict()
        passed = passed and check.passed

    return passed, details


def quantile_representation(config):

    dgp = config.structural_model()
    policy = config.policy_spec()

    details = {}
    passed = True
    for tau in QUANTILE_LEVELS:
        functional = FunctionalSpec('quantile', tau=tau)
        check = identity_check(
            lambda n, s: oracle_mpe(
                dgp, policy, functional, config.t_step, n, s),
            lambda n, s: oracle_conditional_effect(dgp, policy, tau, n, s),
            n_oracle=config.n_oracle,
            seed=config.seed)
        details['tau=%g' % tau] = check.to_dict()
        passed = passed and check.passed

    return passed, details


def uqr_decomposition(config):

    dgp, data = _sample('gaussian_endogenous', config.n, config, 1, rho=0.5)
    decomposition = oracle_uqr_decomposition(
        dgp, 0.5, n_oracle=config.n_oracle, seed=config.seed)
    estimate = uqr_estimand(data, 0.5, config.first_stage_config())
    tolerance = _tolerance(0.1, 10.0, config.n)

    exogenous = get_preset('linear_exogenous')
    bias = identity_check(
        lambda n, s: oracle_uqr_decomposition(
            exogenous, 0.5, n_oracle=n, seed=s)['bias_term'],
        lambda n, s: 0.0,
        n_oracle=config.n_oracle,
        seed=config.seed)

    gap = abs(estimate - decomposition['beta_uqr'])
    details = dict(decomposition)
    details.update(
        estimate=estimate,
        gap=gap,
        tolerance=tolerance,
        exogenous_bias=bias.to_dict())

    return gap <= tolerance and bias.passed, details


def single_equation_identification(config):

    dgp, data = _sample('linear_exogenous', config.n, config, 2)
    policy = location_shift()
    functional = FunctionalSpec('quantile', tau=0.5)

    oracle = oracle_mpe(
        dgp, policy, functional, config.t_step, config.n_oracle, config.seed)
    estimate = plugin_quantile_mpe(
        data, policy, 0.5, config.first_stage_config()).value
    tolerance = _tolerance(0.15, 7.0, config.n)

    gap = abs(estimate - oracle)
    return gap <= tolerance, {
        'oracle': oracle,
        'estimate': estimate,
        'gap': gap,
        'tolerance': tolerance,
    }


def control_variable_identification(config):

    dgp, data = _sample('triangular_normal', config.n, config, 3)
    policy = location_shift()
    functional = FunctionalSpec('quantile', tau=0.5)
    cfg = config.first_stage_config()

    oracle = oracle_mpe(
        dgp, policy, functional, config.t_step, config.n_oracle, config.seed)
    corrected = cv_quantile_mpe(data, policy, 0.5, cfg).value
    naive = plugin_quantile_mpe(data, policy, 0.5, cfg).value
    tolerance = _tolerance(0.2, 9.0, config.n)

    gap = abs(corrected - oracle)
    naive_bias = abs(naive - oracle)

    return gap <= tolerance and naive_bias >= NAIVE_MIN_BIAS, {
        'oracle': oracle,
        'control_variable_estimate': corrected,
        'naive_estimate': naive,
        'gap': gap,
        'naive_bias': naive_bias,
        'tolerance': tolerance,
    }


def control_variable_uniformity(config):

    _, data = _sample('triangular_normal', config.n, config, 4)
    v = control_variable(data, config.first_stage_config())

    result = kstest(v, 'uniform')
    tolerance = _tolerance(0.03, 2.0, config.n)

    return result.statistic <= tolerance, {
        'ks_statistic': float(result.statistic),
        'tolerance': tolerance,
    }


def orthogonal_score(config):

    _, data = _sample('linear_exogenous', config.n, config, 5)
    slope = orthogonality_slope(data, 0.5, config.first_stage_config())

    return slope.slope >= MIN_ORTHOGONALITY_SLOPE, {
        'slope': slope.slope,
        'deltas': list(slope.deltas),
        'changes': list(slope.changes),
        'minimum': MIN_ORTHOGONALITY_SLOPE,
    }


def riesz_identity(config):

    n = max(config.n, RIESZ_MIN_SAMPLE)
    _, data = _sample('linear_exogenous', n, config, 6)
    cfg = config.first_stage_config()

    tests = {
        'linear': (lambda d, x: d, lambda d, x: np.ones_like(d)),
        'sine': (lambda d, x: np.sin(d), lambda d, x: np.cos(d)),
    }

    details = {}
    passed = True
    for name, (g, dg) in tests.items():
        gap = riesz_gap(data, location_shift(), cfg, g, dg)
        details[name] = {
            'lhs': gap.lhs,
            'rhs': gap.rhs,
            'relative_error': gap.relative_error,
        }
        passed = passed and gap.relative_error <= RIESZ_TOLERANCE
    details['n'] = n
    details['tolerance'] = RIESZ_TOLERANCE

    return passed, details


def _quasi_normal(n, loc, scale):
    return norm.ppf((np.arange(n) + 0.5)/n, loc=loc, scale=scale)


def hadamard_fd_errors(
        functional,
        base,
        other,
        kde=None,
        t_values=STEP_SCHEDULE):
    '''Compare the Hadamard derivative of ``functional`` at ``base`` in the
    direction ``h = G - F`` of ``other`` with difference quotients along the
    mixture path ``(1 - t)·F + t·G``.

    Returns:

        ``(derivative, quotients, errors)``, the latter two by ``t``.
    '''

    kde = kde if kde is not None else KernelSpec()
    direction = DirectionFunction(
        lambda y: ecdf_eval(other, y) - ecdf_eval(base, y))

    derivative = hadamard_apply(functional, base, kde, direction)
    level = evaluate(functional, base)

    quotients = np.array([
        (evaluate(
            functional,
            EmpiricalDistribution.mixture(base, other, t)) - level)/t
        for t in t_values])

    return derivative, quotients, np.abs(quotients - derivative)


def errors_shrink(errors, t_values, floor):
    '''Whether the error at each step is at most twice its linear share of
    the error at the previous step, up to ``floor``.'''

    return all(
        errors[i + 1] <=
        2.0*(t_values[i + 1]/t_values[i])*errors[i] + floor
        for i in range(len(t_values) - 1))


def _hadamard_check(variant):

    def check(config):

        functional = FunctionalSpec(variant, tau=0.5) \
            if variant == 'quantile' else FunctionalSpec(variant)
        base = EmpiricalDistribution(_quasi_normal(HADAMARD_SAMPLE, 5.0, 1.0))
        other = EmpiricalDistribution(_quasi_normal(HADAMARD_SAMPLE, 5.5, 1.0))

        derivative, quotients, errors = hadamard_fd_errors(
            functional, base, other)
        floor = HADAMARD_FLOORS[variant]

        return errors_shrink(errors, STEP_SCHEDULE, floor), {
            'derivative': float(derivative),
            'steps': list(STEP_SCHEDULE),
            'quotients': quotients.tolist(),
            'errors': errors.tolist(),
            'floor': floor,
        }

    return check


CHECKS = OrderedDict([
    ('structural_representation', (
        structural_representation,
        "finite-difference effect equals the Hadamard derivative of the "
        "structural direction")),
    ('quantile_representation', (
        quantile_representation,
        "quantile effect equals the conditional mean structural effect at "
        "the quantile")),
    ('uqr_decomposition', (
        uqr_decomposition,
        "UQR estimand splits into structural derivative and endogeneity "
        "bias")),
    ('single_equation_identification', (
        single_equation_identification,
        "observables identify the effect under conditional exogeneity")),
    ('control_variable_identification', (
        control_variable_identification,
        "control variable restores identification in a triangular system")),
    ('control_variable_uniformity', (
        control_variable_uniformity,
        "estimated control variable is uniform")),
    ('orthogonal_score', (
        orthogonal_score,
        "debiased quantile score is Neyman-orthogonal")),
    ('riesz_identity', (
        riesz_identity,
        "Riesz representer satisfies integration by parts")),
    ('hadamard_quantile', (
        _hadamard_check('quantile'),
        "quantile Hadamard derivative matches path differences")),
    ('hadamard_mean', (
        _hadamard_check('mean'),
        "mean Hadamard derivative matches path differences")),
    ('hadamard_gini', (
        _hadamard_check('gini'),
        "Gini Hadamard derivative matches path differences")),
])


def run_checks(config, names=None):
    '''Run the checks ``names`` (all by default) for ``config``.

    Errors inside a check fail that check only.

    Returns:

        ``list`` of :class:`CheckResult`.
    '''

    names = list(CHECKS) if names is None else names
    unknown = set(names) - set(CHECKS)
    if unknown:
        raise KeyError("unknown checks %s" % sorted(unknown))

    results = []
    for name in names:

        function, verifies = CHECKS[name]
        logger.info("running check %s", name)

        try:
            passed, details = function(config)
        except MpeError as e:
            logger.error("check %s raised %s: %s", name, type(e).__name__, e)
            passed, details = False, {'error': str(e)}

        logger.info("check %s %s", name, 'passed' if passed else 'FAILED')
        results.append(CheckResult(name, verifies, bool(passed), details))

    return results
