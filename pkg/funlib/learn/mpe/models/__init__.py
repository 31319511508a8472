from .dgp import ( # noqa
    derive_seed,
    DgpSample,
    Selection,
    simulate,
    simulate_counterfactual,
    StructuralDgp)
from .oracles import ( # noqa
    identity_check,
    IdentityCheck,
    oracle_conditional_effect,
    oracle_mpe,
    oracle_path_differences,
    oracle_structural_side,
    oracle_uqr_decomposition,
    oracle_weighted_structural)
from .presets import get_preset, preset_parameters, registry # noqa
