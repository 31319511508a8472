from .density import ProductKernelDensity, rule_of_thumb_bandwidths # noqa
from .local_linear import LocalLinearSmoother # noqa
