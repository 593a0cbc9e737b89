"""Premium strategies, moment estimation and out-of-sample evaluation"""

from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .credibility import closed_form_factors_model1, credibility_factors, harvey_fernandez_predict
from .errors import DegenerateDenominator, InvalidParams, InvalidSigma, MissingTruth
from .glm import design_from_panel, fit_poisson
from .particle_filter import BootstrapFilter, FilterEstimate
from .processes import make_rng, sample_observations, simulate_panel
from .types import (
    ClaimPanel,
    CovariateLaw,
    CovModel,
    CovVariant,
    CredibilityFactors,
    EdFamily,
    EvaluationSettings,
    FamilyKind,
    GlmFit,
    MethodSummary,
    MomentEstimates,
    PolicyHistory,
    PremiumMethod,
    PremiumReport,
    PremiumRow,
    StateSpec,
    StaticSigmaMode,
)
from .utils.logging import CredibilityLogger


RHO_CAP = 0.999
SIGMA2_FLOOR = 1e-10
HARVEY_ALPHA_FLOOR = 0.05

# (rho, sigma2) scenarios of the simulation study
STUDY_SCENARIOS: List[Tuple[float, float]] = [
    (0.0, 0.0),
    (0.0, 1.0), (0.3, 1.0), (0.6, 1.0), (0.9, 1.0), (1.0, 1.0),
    (0.0, 2.0), (0.3, 2.0), (0.6, 2.0), (0.9, 2.0), (1.0, 2.0),
]

_logger = CredibilityLogger.get_logger("premiums")


def naive_premium(lambda_next: float) -> float:
    """Premium without experience rating"""
    if not lambda_next > 0:
        raise InvalidParams(f"lambda_next must be positive, got {lambda_next}")
    return float(lambda_next)


def static_premium(policy: PolicyHistory, sigma2: float,
                   lambda_next: Optional[float] = None) -> float:
    """
    Conjugate static gamma random-effects premium.

    Args:
        policy: Policy history
        sigma2: Random-effect variance
        lambda_next: lambda_{T+1}; taken from the policy when omitted

    Returns:
        lambda_{T+1} (sum y + 1/sigma2) / (sum lambda + 1/sigma2)
    """
    if not sigma2 > 0:
        raise InvalidSigma(f"sigma2 must be positive, got {sigma2}")
    lam_next = policy.lambda_next if lambda_next is None else lambda_next
    prior = 1.0 / sigma2
    return float(lam_next * (np.sum(policy.y) + prior) / (np.sum(policy.lambdas) + prior))


def policy_model(template: CovModel, policy: PolicyHistory) -> CovModel:
    """Covariance model carrying the policy's own a-priori means"""
    if template.variant == CovVariant.INAR1_HET:
        return template
    lambdas = tuple(policy.lambdas) + (policy.lambda_next,)
    return replace(template, lambdas=lambdas)


def _policy_factors(policy: PolicyHistory, model: CovModel) -> CredibilityFactors:
    model = policy_model(model, policy)
    if model.variant == CovVariant.DYNAMIC_AR1:
        return closed_form_factors_model1(model, policy.T)
    return credibility_factors(model, policy.T)


def proposed_premium(policy: PolicyHistory, model: CovModel) -> float:
    """
    Credibility premium alpha0 lambda_{T+1} + sum alpha_t y_t.

    For mean-lambda models this equals lambda_{T+1} (1 + sum (alpha_t / lambda_{T+1}) (y_t - lambda_t)).
    A negative value is returned as is and logged.
    """
    factors = _policy_factors(policy, model)
    premium = factors.intercept + float(np.dot(factors.alpha, policy.y))
    if premium < 0:
        _logger.warning(f"Negative proposed premium {premium:.6g} for policy {policy.policy_id}")
    return premium


def posterior_rating_factor(policy: PolicyHistory, factors: CredibilityFactors) -> float:
    """1 + sum (alpha_t / lambda_{T+1}) (y_t - lambda_t)"""
    weights = np.asarray(factors.alpha) / policy.lambda_next
    return float(1.0 + weights @ (policy.y - policy.lambdas))


def harvey_premium(policy: PolicyHistory, a0: float, alpha: float) -> float:
    """Harvey-Fernandez exponentially weighted premium"""
    return harvey_fernandez_predict(policy.y, policy.lambdas, a0, alpha, policy.lambda_next)


def exact_premium_smc(policy: PolicyHistory, state: StateSpec, family: EdFamily,
                      n_particles: int = 2000, seed: int = 0, stream: int = 0,
                      n_replicates: int = 16) -> FilterEstimate:
    """
    Conditional-mean premium E[Y_{T+1} | history] by bootstrap particle filtering.

    Args:
        policy: Policy history
        state: Latent state process
        family: Observation family
        n_particles: Particles per replicate filter
        seed: Master seed
        stream: Stream index, usually the policy index

    Returns:
        FilterEstimate with premium and standard error
    """
    filter_ = BootstrapFilter(state, family, n_particles=n_particles,
                              n_replicates=n_replicates)
    return filter_.predict(policy.y, policy.lambdas, policy.lambda_next,
                           make_rng(seed, stream))


def true_premium(true_r_next: Optional[float], lambda_next: float) -> float:
    """R_{T+1} lambda_{T+1}"""
    if true_r_next is None:
        raise MissingTruth("True latent factor is not available")
    return float(true_r_next * lambda_next)


def _residual_arrays(histories: Sequence[PolicyHistory],
                     fitted: Optional[Dict[str, np.ndarray]]) -> List[Tuple[np.ndarray, np.ndarray]]:
    pairs = []
    for h in histories:
        lam = h.lambdas if fitted is None else np.asarray(fitted[h.policy_id][:h.T], dtype=float)
        pairs.append((h.y, lam))
    return pairs


def estimate_moments(panel: ClaimPanel, family: EdFamily,
                     fitted_lambdas: Optional[Dict[str, np.ndarray]] = None) -> MomentEstimates:
    """
    Method-of-moments estimates of sigma^2 and the lag-1 autocorrelation rho.

    Args:
        panel: Claim panel; the training periods are used
        family: Observation family (GAMMA uses its psi as the dispersion)
        fitted_lambdas: Optional policy_id -> fitted a-priori means; panel lambdas otherwise

    Returns:
        MomentEstimates with clamp flags
    """
    pairs = _residual_arrays(panel.policy_histories(), fitted_lambdas)
    if not pairs:
        raise DegenerateDenominator("Panel has no policy with a training history")

    num_var = den_var = num_cov = den_cov = 0.0
    n_used = 0
    psi = family.psi
    for y, lam in pairs:
        resid = y - lam
        if family.kind == FamilyKind.POISSON:
            num_var += float(np.sum(resid ** 2 - lam))
            den_var += float(np.sum(lam ** 2))
        else:
            num_var += float(np.sum(resid ** 2 - psi * lam ** 2))
            den_var += float((1.0 + psi) * np.sum(lam ** 2))
        num_cov += float(np.sum(resid[:-1] * resid[1:]))
        den_cov += float(np.sum(lam[:-1] * lam[1:]))
        n_used += y.shape[0]

    if den_var == 0:
        raise DegenerateDenominator("Sum of squared a-priori means is zero")
    if den_cov == 0:
        raise DegenerateDenominator("At least two training periods per policy are needed for rho")

    clamped = {"sigma2": False, "rho": False}
    warnings: List[str] = []
    sigma2_hat = num_var / den_var
    if sigma2_hat < 0:
        warnings.append(f"sigma2 estimate {sigma2_hat:.6g} clamped to 0")
        sigma2_hat = 0.0
        clamped["sigma2"] = True

    if sigma2_hat > 0:
        rho_hat = num_cov / (sigma2_hat * den_cov)
    else:
        rho_hat = 0.0
        clamped["rho"] = True
        warnings.append("rho estimate undefined for sigma2 = 0, set to 0")
    if rho_hat < 0 or rho_hat > RHO_CAP:
        bound = 0.0 if rho_hat < 0 else RHO_CAP
        warnings.append(f"rho estimate {rho_hat:.6g} clamped to {bound}")
        rho_hat = bound
        clamped["rho"] = True

    CredibilityLogger.log_warning_flags(_logger, warnings)
    _logger.info(f"Moment estimates: sigma2={sigma2_hat:.6f}, rho={rho_hat:.6f}, n={n_used}")
    return MomentEstimates(
        sigma2_hat=sigma2_hat,
        rho_hat=rho_hat,
        psi_hat=psi if family.kind == FamilyKind.GAMMA else None,
        n_used=n_used,
        clamped=clamped,
        warnings=warnings,
    )


def estimate_static_sigma2(panel: ClaimPanel,
                           fitted_lambdas: Optional[Dict[str, np.ndarray]] = None) -> float:
    """
    sigma^2 under the static model from all cross-period residual products.

    Returns:
        sum_{s != t} r_s r_t / sum_{s != t} lambda_s lambda_t, clamped at 0
    """
    num = den = 0.0
    for y, lam in _residual_arrays(panel.policy_histories(), fitted_lambdas):
        resid = y - lam
        num += float(np.sum(resid) ** 2 - np.sum(resid ** 2))
        den += float(np.sum(lam) ** 2 - np.sum(lam ** 2))
    if den == 0:
        raise DegenerateDenominator("At least two training periods per policy are needed")
    return max(num / den, 0.0)


def _glm_lambdas(panel: ClaimPanel, fit: GlmFit, add_intercept: bool,
                 n_periods: Optional[int] = None) -> Dict[str, np.ndarray]:
    lead = (1.0,) if add_intercept else ()
    fitted = {}
    for pid, recs in panel.by_policy().items():
        rows = np.array([lead + r.covariates for r in recs[:n_periods]], dtype=float)
        fitted[pid] = np.exp(rows @ fit.beta)
    return fitted


def _fitted_lambdas(panel: ClaimPanel, train_periods: int,
                    fit_glm: bool) -> Tuple[Dict[str, np.ndarray], Optional[GlmFit]]:
    """A-priori means for periods 1..T+1 per policy and the GLM behind them, if any"""
    if not fit_glm:
        lambdas = {pid: np.array([r.lam for r in recs[:train_periods + 1]])
                   for pid, recs in panel.by_policy().items()}
        return lambdas, None
    design, y = design_from_panel(panel, add_intercept=True, max_period=train_periods)
    fit = fit_poisson(design, y)
    return _glm_lambdas(panel, fit, True, train_periods + 1), fit


def fit_panel(panel: ClaimPanel, family: EdFamily,
              add_intercept: bool = True) -> Tuple[GlmFit, MomentEstimates]:
    """
    Poisson GLM on the training periods followed by moment estimation.

    Args:
        panel: Claim panel with covariates
        family: Observation family used by the moment estimator
        add_intercept: Prepend a column of ones to the covariates

    Returns:
        (GlmFit, MomentEstimates) with moments computed from the fitted means
    """
    T = panel.train_periods
    design, y = design_from_panel(panel, add_intercept, max_period=T if T >= 1 else None)
    if design.shape[1] == 0:
        raise InvalidParams("Design matrix has no columns: add an intercept or covariates")
    fit = fit_poisson(design, y)
    moments = estimate_moments(panel, family, _glm_lambdas(panel, fit, add_intercept))
    return fit, moments


def _error_summary(predicted: np.ndarray, copies: np.ndarray) -> Tuple[float, float]:
    diff = copies - predicted[:, None]
    return float(np.sqrt(np.mean(diff ** 2))), float(np.mean(np.abs(diff)))


def evaluate(panel: ClaimPanel, methods: Sequence[PremiumMethod],
             settings: Optional[EvaluationSettings] = None, seed: int = 0) -> PremiumReport:
    """
    Out-of-sample comparison of premium methods against simulated holdout claims.

    Args:
        panel: Panel with T training periods, one holdout period and true latent factors
        methods: Methods to report
        settings: Family, state process and method settings
        seed: Seed for holdout copies and particle filters

    Returns:
        PremiumReport with per-policy rows and RMSE / MAE summaries
    """
    settings = settings or EvaluationSettings()
    errors = settings.validate()
    if errors:
        raise InvalidParams(f"Invalid evaluation settings: {', '.join(errors)}")
    if not panel.has_truth:
        raise MissingTruth("Evaluation needs a panel carrying the true latent factors")
    methods = list(dict.fromkeys(methods))
    if PremiumMethod.EXACT_SMC in methods and settings.state is None:
        raise InvalidParams("EXACT_SMC needs a state process in the evaluation settings")

    T = panel.train_periods
    histories = panel.policy_histories(T)
    fitted, glm_fit = _fitted_lambdas(panel, T, settings.fit_glm)
    fitted_histories = [
        replace(h, lambdas=fitted[h.policy_id][:T], lambda_next=float(fitted[h.policy_id][T]))
        for h in histories
    ]
    family = settings.family
    report_warnings: List[str] = list(glm_fit.warnings) if glm_fit is not None else []

    moments = estimate_moments(panel, family, {pid: lam[:T] for pid, lam in fitted.items()})
    report_warnings.extend(moments.warnings)
    sigma2 = max(moments.sigma2_hat, SIGMA2_FLOOR)
    if settings.static_sigma2 == StaticSigmaMode.REESTIMATE:
        static_sigma2 = max(estimate_static_sigma2(panel, fitted), SIGMA2_FLOOR)
    else:
        static_sigma2 = sigma2
    dynamic = CovModel.dynamic_ar1(sigma2, moments.rho_hat, (1.0,) * (T + 1), family)
    harvey_a0 = settings.harvey_a0 or 1.0 / sigma2
    harvey_alpha = settings.harvey_alpha or max(moments.rho_hat, HARVEY_ALPHA_FLOOR)

    predictions: Dict[PremiumMethod, np.ndarray] = {}
    all_methods = methods if PremiumMethod.TRUE in methods else methods + [PremiumMethod.TRUE]
    for method in all_methods:
        values = []
        for i, (h, fh) in enumerate(zip(histories, fitted_histories)):
            if method == PremiumMethod.NAIVE:
                values.append(naive_premium(fh.lambda_next))
            elif method == PremiumMethod.STATIC:
                values.append(static_premium(fh, static_sigma2))
            elif method == PremiumMethod.PROPOSED:
                values.append(proposed_premium(fh, dynamic))
            elif method == PremiumMethod.HARVEY:
                values.append(harvey_premium(fh, harvey_a0, harvey_alpha))
            elif method == PremiumMethod.EXACT_SMC:
                estimate = exact_premium_smc(fh, settings.state, family, settings.n_particles,
                                             seed=seed, stream=i,
                                             n_replicates=settings.n_replicates)
                values.append(estimate.premium)
            elif method == PremiumMethod.TRUE:
                values.append(true_premium(h.true_r_next, h.lambda_next))
        predictions[method] = np.array(values)

    copies = np.empty((len(histories), settings.n_holdout_copies))
    for i, h in enumerate(histories):
        rng = make_rng(seed, i, 1)
        mean = np.full(settings.n_holdout_copies, h.true_r_next * h.lambda_next)
        copies[i] = sample_observations(family, mean, rng)

    true_rmse, true_mae = _error_summary(predictions[PremiumMethod.TRUE], copies)
    summary: Dict[PremiumMethod, MethodSummary] = {}
    rows: List[PremiumRow] = []
    for method in methods:
        pred = predictions[method]
        rmse, mae = _error_summary(pred, copies)
        summary[method] = MethodSummary(
            rmse=rmse,
            mae=mae,
            relative_rmse_pct=100.0 * rmse / true_rmse,
            relative_mae_pct=100.0 * mae / true_mae,
        )
        negative = np.flatnonzero(pred < 0)
        if negative.size:
            warning = f"{method.value}: {negative.size} negative premiums (not clipped)"
            _logger.warning(warning)
            report_warnings.append(warning)
        for h, value in zip(histories, pred):
            rows.append(PremiumRow(h.policy_id, method, float(value), negative=bool(value < 0)))

    rows.sort(key=lambda r: (r.policy_id, r.method.value))
    report = PremiumReport(rows=rows, summary=summary, warnings=report_warnings)
    CredibilityLogger.log_report(_logger, report)
    return report


def rating_factor_by_claim_count(panel: ClaimPanel, model: CovModel) -> List[Dict[str, Any]]:
    """
    Posterior rating factors grouped by the number of past claims.

    Returns:
        One row per claim count with n_policies and mean / min / max factor
    """
    groups: Dict[int, List[float]] = {}
    for h in panel.policy_histories():
        factors = _policy_factors(h, model)
        count = int(round(float(np.sum(h.y))))
        groups.setdefault(count, []).append(posterior_rating_factor(h, factors))
    return [
        {
            "n_claims": count,
            "n_policies": len(values),
            "mean_factor": float(np.mean(values)),
            "min_factor": float(np.min(values)),
            "max_factor": float(np.max(values)),
        }
        for count, values in sorted(groups.items())
    ]


def run_simulation_study(scenarios: Optional[Sequence[Tuple[float, float]]] = None,
                         methods: Optional[Sequence[PremiumMethod]] = None,
                         seeds: Sequence[int] = (1, 2, 3, 4, 5),
                         n_policies: int = 500, T: int = 5,
                         beta: Sequence[float] = (-3.0, 2.0),
                         covariate_law: Optional[CovariateLaw] = None,
                         settings: Optional[EvaluationSettings] = None) -> List[Dict[str, Any]]:
    """
    Relative prediction errors over (rho, sigma2) scenarios averaged over seeds.

    Returns:
        One row per scenario: rho, sigma2 and per-method relative RMSE / MAE
    """
    scenarios = list(scenarios or STUDY_SCENARIOS)
    methods = list(methods or [PremiumMethod.NAIVE, PremiumMethod.STATIC,
                               PremiumMethod.PROPOSED, PremiumMethod.TRUE])
    base = settings or EvaluationSettings()
    rows = []
    for rho, sigma2 in scenarios:
        state = StateSpec.bgar1(sigma2, rho)
        scenario_settings = replace(base, state=state)
        rmse = {m: [] for m in methods}
        mae = {m: [] for m in methods}
        for seed in seeds:
            panel = simulate_panel(n_policies, T, state, base.family, beta, covariate_law, seed)
            report = evaluate(panel, methods, scenario_settings, seed=seed)
            for m in methods:
                rmse[m].append(report.summary[m].relative_rmse_pct)
                mae[m].append(report.summary[m].relative_mae_pct)
        row: Dict[str, Any] = {"rho": rho, "sigma2": sigma2}
        for m in methods:
            row[f"rmse_{m.value}"] = float(np.mean(rmse[m]))
            row[f"mae_{m.value}"] = float(np.mean(mae[m]))
        rows.append(row)
        _logger.info(f"Scenario rho={rho}, sigma2={sigma2} done over {len(seeds)} seeds")
    return rows
