from __future__ import absolute_import

from .bootstrap import bootstrap, BootstrapResult # noqa
from .control import ( # noqa
    control_variable,
    cv_debiased_quantile_mpe,
    cv_gini_mpe,
    cv_mean_mpe,
    cv_quantile_mpe,
    cv_reweight_quantile_mpe)
from .data import Dataset, FirstStageConfig, MpeEstimate # noqa
from .dispatch import estimate, METHODS # noqa
from .distributional import ( # noqa
    cond_mean_dderiv,
    distributional_mpe,
    gini_mpe,
    mean_mpe,
    plugin_mpe)
from .orthogonality import ( # noqa
    orthogonal_moment,
    orthogonality_slope,
    riesz_gap,
    RieszGap,
    SlopeCheck)
from .quantile import ( # noqa
    cond_cdf,
    cond_cdf_dderiv,
    cond_quantile,
    cqd,
    debiased_quantile_mpe,
    plugin_quantile_mpe,
    reweight_quantile_mpe,
    riesz_representer,
    uqr_estimand)
