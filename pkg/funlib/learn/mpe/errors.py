class MpeError(Exception):
    '''Base class of all errors raised by ``funlib.learn.mpe``.'''
    pass


class DomainError(MpeError, ValueError):
    '''An argument lies outside the domain of an operation (e.g., a quantile
    level outside ``(0, 1)``, negative outcomes for a Lorenz curve).'''
    pass


class ConfigurationError(MpeError, ValueError):
    '''A configuration cannot be resolved (e.g., a bandwidth rule on a
    zero-variance sample, a missing instrument column).'''
    pass


class IngestionError(ConfigurationError):
    '''A data file cannot be turned into a dataset.'''
    pass


class PresetLookupError(MpeError, KeyError):
    '''An unknown structural model preset was requested.'''
    pass


class EstimationFailure(MpeError, RuntimeError):
    '''An estimate cannot be formed from the data at hand.'''
    pass


class TrimmedPointError(EstimationFailure):
    '''A single first-stage evaluation point had to be trimmed.

    Vectorized code marks trimmed points with ``NaN`` instead of raising.
    '''
    pass


class ReplicationError(MpeError, RuntimeError):
    '''An error raised inside one Monte Carlo replication.

    Args:

        index (``int``):

            The replication index.

        seed (``int``):

            The derived seed of the replication, to reproduce the failure.

        cause (``Exception``):

            The original error.
    '''

    def __init__(self, index, seed, cause):

        self.index = index
        self.seed = seed
        self.cause = cause

        super(ReplicationError, self).__init__(
            "replication %d (seed %d) failed: %s: %s" % (
                index, seed, type(cause).__name__, cause))

    def __reduce__(self):

        # raised inside joblib workers, has to survive pickling
        return (ReplicationError, (self.index, self.seed, self.cause))
