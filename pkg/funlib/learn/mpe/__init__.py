from __future__ import absolute_import

from . import distkit
from . import estimators
from . import functionals
from . import harness
from . import models
from . import policy
from .errors import ( # noqa
    ConfigurationError,
    DomainError,
    EstimationFailure,
    IngestionError,
    MpeError,
    PresetLookupError,
    ReplicationError,
    TrimmedPointError)

__all__ = [
    'distkit',
    'estimators',
    'functionals',
    'harness',
    'models',
    'policy',
]
