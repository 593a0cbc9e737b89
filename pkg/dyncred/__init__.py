"""dyncred - Dynamic random-effects credibility factors and premiums."""

__version__ = "0.1.0"

# Factor computation
from .credibility import (
    build_covariance,
    check_covariance_ordering,
    check_isotonic,
    check_regular,
    closed_form_factors_model1,
    credibility_factors,
    harvey_fernandez_predict,
    inar1_closed_form,
)

# Premiums and evaluation
from .premiums import (
    estimate_moments,
    evaluate,
    exact_premium_smc,
    fit_panel,
    naive_premium,
    proposed_premium,
    run_simulation_study,
    static_premium,
)
from .processes import simulate_panel, simulate_state
from .glm import fit_poisson

from .errors import CredibilityError
from .types import (
    ClaimPanel,
    CovModel,
    CovVariant,
    CredibilityFactors,
    EdFamily,
    EvaluationSettings,
    FamilyKind,
    PremiumMethod,
    StateFamily,
    StateSpec,
    VarianceFn,
)

__all__ = [
    "__version__",
    # Factors
    "build_covariance",
    "check_covariance_ordering",
    "check_isotonic",
    "check_regular",
    "closed_form_factors_model1",
    "credibility_factors",
    "harvey_fernandez_predict",
    "inar1_closed_form",
    # Premiums
    "estimate_moments",
    "evaluate",
    "exact_premium_smc",
    "fit_panel",
    "naive_premium",
    "proposed_premium",
    "run_simulation_study",
    "static_premium",
    "simulate_panel",
    "simulate_state",
    "fit_poisson",
    # Types
    "CredibilityError",
    "ClaimPanel",
    "CovModel",
    "CovVariant",
    "CredibilityFactors",
    "EdFamily",
    "EvaluationSettings",
    "FamilyKind",
    "PremiumMethod",
    "StateFamily",
    "StateSpec",
    "VarianceFn",
]
