from ..distkit import KernelSpec
from ..errors import ConfigurationError
from ..estimators.data import FirstStageConfig
from ..estimators.dispatch import METHODS
from ..functionals import FunctionalSpec
from ..models.presets import get_preset, preset_parameters
from .. import policy as policies
from dataclasses import asdict, dataclass, field, fields, replace
import configparser
import hashlib
import json
import logging
import scipy.stats

logger = logging.getLogger(__name__)

MODES = ('oracle', 'estimate', 'mc_study', 'check')
FORMATS = ('json', 'csv')

# smallest replication count of a Monte Carlo study
MIN_REPLICATIONS = 10

_EXPERIMENT_KEYS = (
    'mode', 'seed', 'n', 'n_oracle', 't_step', 'replications', 'n_jobs',
    'data_path', 'out', 'format', 'bootstrap', 'export_sample',
    'with_latents')

_FIRST_STAGE_KEYS = {
    'kernel': str,
    'y_bandwidth': float,
    'bandwidths': lambda v: tuple(
        float(b) for b in v.replace(',', ' ').split()),
    'trim_floor': float,
    'folds': int,
    'min_effective': float,
    'y_grid_size': int,
}

_POLICY_KEYS = {
    'location_shift': (),
    'location_scale': ('mu', 'l_dot', 's_dot'),
    'mean_preserving': ('alpha', 'mean_d'),
    'rank_preserving': ('target', 'target_loc', 'target_scale'),
}


def _boolean(value):

    if isinstance(value, bool):
        return value

    value = str(value).strip().lower()
    if value in ('1', 'yes', 'true', 'on'):
        return True
    if value in ('0', 'no', 'false', 'off'):
        return False

    raise ConfigurationError("not a boolean: %r" % value)


@dataclass(frozen=True)
class ExperimentConfig:
    '''A complete, resolved experiment.

    Args:

        mode (``string``):

            ``oracle``, ``estimate``, ``mc_study``, or ``check``.

        seed (``int``):

            Master seed. Replication ``r`` uses ``derive_seed(seed, r)``.

        n, n_oracle (``int``):

            Sample size of estimation replications and of oracles.

        t_step (``float``):

            Step of the finite-difference oracle.

        replications, n_jobs (``int``):

            Monte Carlo replications and parallel workers.

        data_path (``string``):

            CSV file of the ``estimate`` mode.

        out, format (``string``):

            Where and how results are written. ``None`` writes to stdout.

        bootstrap (``int``):

            Bootstrap draws in the ``estimate`` mode, 0 to skip.

        export_sample (``string``), with_latents (``bool``):

            CSV file to export a simulated sample to in the ``oracle`` mode,
            with or without latent columns.

        dgp, dgp_params:

            Structural model preset and parameter overrides.

        policy, policy_params:

            Policy variant and its parameters.

        functional, tau, y:

            Functional variant and its parameter.

        method, control, first_stage:

            Estimator, control-variable switch, and first-stage overrides.
    '''

    mode: str = 'mc_study'
    seed: int = 0
    n: int = 2000
    n_oracle: int = 10**6
    t_step: float = 0.01
    replications: int = 100
    n_jobs: int = 1
    data_path: str = None
    out: str = None
    format: str = 'json'
    bootstrap: int = 0
    export_sample: str = None
    with_latents: bool = False
    dgp: str = 'linear_exogenous'
    dgp_params: dict = field(default_factory=dict)
    policy: str = 'location_shift'
    policy_params: dict = field(default_factory=dict)
    functional: str = 'quantile'
    tau: float = 0.5
    y: float = None
    method: str = 'plugin'
    control: bool = False
    first_stage: dict = field(default_factory=dict)

    def __post_init__(self):

        if self.mode not in MODES:
            raise ConfigurationError(
                "unknown mode %r, choose from %s" % (self.mode, MODES))
        if self.format not in FORMATS:
            raise ConfigurationError(
                "unknown output format %r, choose from %s" %
                (self.format, FORMATS))
        if self.method not in METHODS:
            raise ConfigurationError(
                "unknown estimator %r, choose from %s" %
                (self.method, METHODS))
        if self.policy not in _POLICY_KEYS:
            raise ConfigurationError(
                "unknown policy %r, choose from %s" %
                (self.policy, sorted(_POLICY_KEYS)))

        unknown = set(self.dgp_params) - set(preset_parameters(self.dgp))
        if unknown:
            raise ConfigurationError(
                "preset %s takes no parameters %s" %
                (self.dgp, sorted(unknown)))
        unknown = set(self.policy_params) - set(_POLICY_KEYS[self.policy])
        if unknown:
            raise ConfigurationError(
                "policy %s takes no parameters %s" %
                (self.policy, sorted(unknown)))
        unknown = set(self.first_stage) - set(_FIRST_STAGE_KEYS)
        if unknown:
            raise ConfigurationError(
                "unknown estimator options %s" % sorted(unknown))

        if self.mode == 'estimate' and not self.data_path:
            raise ConfigurationError("estimate mode needs a data_path")
        if self.mode == 'mc_study' and self.replications < MIN_REPLICATIONS:
            raise ConfigurationError(
                "a Monte Carlo study needs at least %d replications, got %d" %
                (MIN_REPLICATIONS, self.replications))
        if self.n < 2 or self.n_oracle < 2:
            raise ConfigurationError("sample sizes have to be at least 2")
        if not 0 < self.t_step <= 0.05:
            raise ConfigurationError(
                "t_step has to be in (0, 0.05], got %r" % self.t_step)

        # fail early on invalid specs
        self.functional_spec()
        self.first_stage_config()

    def replace(self, **changes):
        '''A copy with ``changes`` applied; ``None`` values are ignored.'''

        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)

    def config_hash(self):
        '''SHA-256 over the canonical JSON of the resolved configuration.'''

        canonical = json.dumps(
            self.to_dict(),
            sort_keys=True,
            separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def structural_model(self):
        return get_preset(self.dgp, **self.dgp_params)

    def policy_spec(self):

        params = dict(self.policy_params)

        if self.policy == 'location_shift':
            return policies.location_shift()
        if self.policy == 'location_scale':
            return policies.location_scale(
                **{k: float(v) for k, v in params.items()})
        if self.policy == 'mean_preserving':
            return policies.mean_preserving(
                **{k: float(v) for k, v in params.items()})

        return policies.rank_preserving(self._target(params))

    def _target(self, params):

        name = params.get('target', 'norm')
        family = getattr(scipy.stats, name, None)
        if not isinstance(family, scipy.stats.rv_continuous):
            raise ConfigurationError(
                "target %r is not a continuous scipy.stats distribution" %
                name)

        return family(
            loc=float(params.get('target_loc', 0.0)),
            scale=float(params.get('target_scale', 1.0)))

    def functional_spec(self):

        if self.functional == 'quantile':
            return FunctionalSpec('quantile', tau=self.tau)
        if self.functional == 'id_at':
            return FunctionalSpec('id_at', y=self.y)

        return FunctionalSpec(self.functional)

    def first_stage_config(self, seed=None):

        options = dict(self.first_stage)
        kernel = KernelSpec(
            kernel=options.pop('kernel', 'gaussian'),
            bandwidth=options.pop('y_bandwidth', None))

        return FirstStageConfig(
            kernel=kernel,
            seed=self.seed if seed is None else seed,
            **options)


def _typed(name, value):

    types = {f.name: f.type for f in fields(ExperimentConfig)}
    kind = types[name]

    if value is None or value == '':
        return None
    if kind is bool:
        return _boolean(value)
    if kind in (int, float):
        try:
            return kind(float(value)) if kind is int else kind(value)
        except ValueError:
            raise ConfigurationError(
                "%s has to be a number, got %r" % (name, value)) from None

    return value


def _number(name, value):

    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(
            "%s has to be a number, got %r" % (name, value)) from None


def read_config(path):
    '''Read an INI experiment file into keyword arguments of
    :class:`ExperimentConfig`.

    Sections ``[experiment]``, ``[dgp]`` (``preset`` plus numeric
    overrides), ``[policy]`` (``variant`` plus parameters), ``[functional]``
    (``variant``, ``tau``, ``y``), and ``[estimator]`` (``method``,
    ``control`` plus first-stage options).
    '''

    parser = configparser.ConfigParser()
    try:
        with open(path) as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as e:
        raise ConfigurationError(
            "can not read configuration %s: %s" % (path, e)) from e

    known = {'experiment', 'dgp', 'policy', 'functional', 'estimator'}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigurationError(
            "unknown configuration sections %s" % sorted(unknown))

    values = {}

    if parser.has_section('experiment'):
        for key, value in parser.items('experiment'):
            if key not in _EXPERIMENT_KEYS:
                raise ConfigurationError(
                    "unknown experiment option %r" % key)
            values[key] = _typed(key, value)

    if parser.has_section('dgp'):
        section = dict(parser.items('dgp'))
        if 'preset' in section:
            values['dgp'] = section.pop('preset')
        values['dgp_params'] = {
            k: _number(k, v) for k, v in section.items()}

    if parser.has_section('policy'):
        section = dict(parser.items('policy'))
        if 'variant' in section:
            values['policy'] = section.pop('variant')
        values['policy_params'] = {
            k: v if k == 'target' else _number(k, v)
            for k, v in section.items()}

    if parser.has_section('functional'):
        section = dict(parser.items('functional'))
        if 'variant' in section:
            values['functional'] = section.pop('variant')
        for key in ('tau', 'y'):
            if key in section:
                values[key] = _number(key, section.pop(key))
        if section:
            raise ConfigurationError(
                "unknown functional options %s" % sorted(section))

    if parser.has_section('estimator'):
        section = dict(parser.items('estimator'))
        if 'method' in section:
            values['method'] = section.pop('method')
        if 'control' in section:
            values['control'] = _boolean(section.pop('control'))
        first_stage = {}
        for key, value in section.items():
            if key not in _FIRST_STAGE_KEYS:
                raise ConfigurationError(
                    "unknown estimator option %r" % key)
            try:
                first_stage[key] = _FIRST_STAGE_KEYS[key](value)
            except ValueError:
                raise ConfigurationError(
                    "invalid value %r for estimator option %s" %
                    (value, key)) from None
        values['first_stage'] = first_stage

    logger.debug("read configuration %s: %s", path, values)

    return values


def load_config(path=None, **overrides):
    '''Build an :class:`ExperimentConfig` from an optional INI file and
    overrides, which win over file values. ``None`` overrides are
    ignored.'''

    values = read_config(path) if path is not None else {}
    values.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return ExperimentConfig(**values)
    except TypeError as e:
        raise ConfigurationError(str(e)) from e
