from ..errors import (
    ConfigurationError,
    DomainError,
    EstimationFailure,
    PresetLookupError,
    ReplicationError)
from .config import load_config
from .io import emit
from .runner import run
import argparse
import logging
import sys

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_CONFIGURATION = 2

# errors that make the exit code a configuration error, also when raised
# inside a replication
CONFIGURATION_ERRORS = (ConfigurationError, DomainError, PresetLookupError)

_COMMANDS = {
    'oracle': 'oracle',
    'estimate': 'estimate',
    'mc': 'mc_study',
    'check': 'check',
}


def _add_common(parser):

    parser.add_argument('--config', help="INI experiment file")
    parser.add_argument('--dgp', help="structural model preset")
    parser.add_argument('--policy', help="policy variant")
    parser.add_argument('--functional', help="functional variant")
    parser.add_argument(
        '--estimator',
        dest='method',
        help="plugin, reweight, or debiased")
    parser.add_argument(
        '--control',
        action='store_const',
        const=True,
        help="condition on an estimated control variable")
    parser.add_argument('--tau', type=float, help="quantile level")
    parser.add_argument('--y', type=float, help="outcome value of id_at")
    parser.add_argument('--n', type=int, help="sample size")
    parser.add_argument('--n-oracle', type=int, help="oracle sample size")
    parser.add_argument(
        '--reps',
        dest='replications',
        type=int,
        help="Monte Carlo replications")
    parser.add_argument('--jobs', dest='n_jobs', type=int)
    parser.add_argument('--seed', type=int, help="master seed")
    parser.add_argument('--out', help="output file, stdout if not given")
    parser.add_argument('--format', choices=('json', 'csv'))
    parser.add_argument(
        '--verbose',
        action='store_true',
        help="log debug messages")


def build_parser():

    parser = argparse.ArgumentParser(
        prog='mpe',
        description="Marginal policy effects: oracles, estimation, Monte "
                    "Carlo studies, and identity checks.")
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    oracle = commands.add_parser(
        'oracle', help="oracle values of a structural model")
    _add_common(oracle)
    oracle.add_argument(
        '--export-sample',
        help="also write a simulated sample to this CSV file")
    oracle.add_argument(
        '--with-latents',
        action='store_const',
        const=True,
        help="include the latent columns in the exported sample")

    estimate = commands.add_parser(
        'estimate', help="estimate from a CSV file")
    _add_common(estimate)
    estimate.add_argument('--data', dest='data_path', help="CSV file")
    estimate.add_argument(
        '--bootstrap',
        type=int,
        help="number of bootstrap draws")

    mc = commands.add_parser('mc', help="Monte Carlo study")
    _add_common(mc)

    check = commands.add_parser('check', help="run the check suite")
    _add_common(check)

    return parser


def _overrides(args):

    skip = {'command', 'config', 'verbose'}
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in skip and v is not None}
    overrides['mode'] = _COMMANDS[args.command]

    return overrides


def main(argv=None):

    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s')

    try:
        config = load_config(args.config, **_overrides(args))
        record = run(config)
        emit(record, config.out, config.format)
    except CONFIGURATION_ERRORS as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_CONFIGURATION
    except ReplicationError as e:
        logger.error("%s: %s", type(e).__name__, e)
        if isinstance(e.cause, CONFIGURATION_ERRORS):
            return EXIT_CONFIGURATION
        return EXIT_FAILURE
    except EstimationFailure as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILURE

    if not record.passed:
        failed = [c['name'] for c in record.checks if not c['passed']]
        logger.error("failed checks: %s", ', '.join(failed))
        return EXIT_FAILURE

    return EXIT_SUCCESS


if __name__ == '__main__':
    sys.exit(main())
