"""Covariance structures, credibility normal equations and closed forms"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidAlpha,
    InvalidParams,
    InvalidRho,
    InvalidVariant,
    NonStationary,
    UnsupportedVarianceFn,
)
from .linalg import solve_spd, tridiag_uv
from .types import (
    AcfSpec,
    CovModel,
    CovVariant,
    CredibilityFactors,
    EdFamily,
    FamilyKind,
    IsotonicityReport,
    RegularityReport,
    SymMatrix,
    VarianceFn,
)
from .utils.logging import CredibilityLogger


SIGN_TOL = 1e-12
ISOTONIC_TOL = 1e-12

_logger = CredibilityLogger.get_logger("credibility")


def expected_unit_variance(family: EdFamily, lambdas, sigma2: float) -> np.ndarray:
    """E[V(lambda R)] for a unit-mean random effect with variance sigma2"""
    lam = np.asarray(lambdas, dtype=float)
    if family.kind == FamilyKind.POISSON:
        return lam.copy()
    if family.kind == FamilyKind.GAMMA:
        return lam ** 2 * (1.0 + sigma2)
    raise UnsupportedVarianceFn(f"No unit variance function for family {family.kind}")


def q_star(family: EdFamily, lambdas, sigma2: float) -> np.ndarray:
    """Conditional-variance term q*_t = psi E[V(lambda_t R_t)]"""
    return family.psi * expected_unit_variance(family, lambdas, sigma2)


def arma11_acf(phi: float, theta: float, sigma_e_sq: float, maxlag: int) -> AcfSpec:
    """
    Autocovariance structure of Z_t = phi Z_{t-1} + e_t - theta e_{t-1}.

    Args:
        phi: Autoregressive coefficient, |phi| < 1
        theta: Moving-average coefficient
        sigma_e_sq: Innovation variance
        maxlag: Number of lags to return

    Returns:
        AcfSpec with the variance and correlations at lags 1..maxlag
    """
    if not -1 < phi < 1:
        raise NonStationary(f"ARMA(1,1) needs |phi| < 1, got {phi}")
    if not sigma_e_sq > 0:
        raise InvalidParams(f"sigma_e_sq must be positive, got {sigma_e_sq}")
    variance = (1.0 - 2.0 * phi * theta + theta ** 2) / (1.0 - phi ** 2) * sigma_e_sq
    covariances = []
    cov = phi * variance - theta * sigma_e_sq
    for _ in range(maxlag):
        covariances.append(cov)
        cov = phi * cov
    return AcfSpec(variance=variance, correlations=tuple(c / variance for c in covariances))


def _full_covariance(model: CovModel, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Covariance and means of Y_1..Y_n"""
    lam = np.asarray(model.lambdas[:n], dtype=float)
    lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    outer = np.outer(lam, lam)
    v = model.variant

    if v in (CovVariant.STATIC_RE, CovVariant.DYNAMIC_AR1):
        rho = 1.0 if v == CovVariant.STATIC_RE else model.rho
        cov = outer * model.sigma2 * rho ** lags
        cov[np.diag_indices(n)] += q_star(model.family, lam, model.sigma2)
        return cov, lam.copy()

    if v == CovVariant.TWO_COMPONENT:
        total = model.sigma1_sq + model.sigma2_sq
        if model.variance_fn == VarianceFn.IDENTITY:
            ev = 2.0 * lam
        elif model.variance_fn == VarianceFn.SQUARE:
            ev = lam ** 2 * (total + 4.0)
        else:
            raise UnsupportedVarianceFn(f"Unsupported variance function: {model.variance_fn}")
        cov = outer * (model.sigma1_sq * model.rho ** lags + model.sigma2_sq)
        cov[np.diag_indices(n)] += model.psi * ev
        return cov, 2.0 * lam

    if v == CovVariant.ARBITRARY_ACF:
        if len(model.correlations) < n - 1:
            raise InvalidParams(
                f"ARBITRARY_ACF needs correlations up to lag {n - 1}, "
                f"got {len(model.correlations)}"
            )
        rho_h = np.concatenate([[1.0], model.correlations])
        cov = outer * model.sigma2 * rho_h[lags]
        cov[np.diag_indices(n)] += q_star(model.family, lam, model.sigma2)
        return cov, lam.copy()

    if v == CovVariant.ARMA11:
        acf = arma11_acf(model.phi, model.theta, model.sigma_e_sq, n - 1)
        gamma_h = np.concatenate([[acf.variance], acf.covariances])
        # Y_t = lambda_t (1 + Z_t) with Z the ARMA(1,1) deviation
        return outer * gamma_h[lags], lam.copy()

    if v == CovVariant.INAR1_HET:
        mean = model.inar_lambda / (1.0 - model.p)
        cov = mean * (model.p ** lags + mean * model.psi0)
        return cov, np.full(n, mean)

    raise InvalidVariant(f"Unknown covariance model variant: {v}")


def build_covariance(model: CovModel, T: int) -> Tuple[SymMatrix, np.ndarray, np.ndarray]:
    """
    Second moments needed by the credibility normal equations.

    Args:
        model: Covariance-generating model
        T: Number of observed periods

    Returns:
        (Sigma_T, cross, means) where cross[t] = Cov(Y_t, Y_{T+1}) and
        means holds E[Y_1..Y_{T+1}]
    """
    errors = model.validate()
    if errors:
        message = f"Invalid covariance model: {', '.join(errors)}"
        if any("rho" in e for e in errors):
            raise InvalidRho(message)
        raise InvalidParams(message)
    if T < 1:
        raise InvalidParams(f"T must be at least 1, got {T}")
    if T + 1 > len(model.lambdas):
        raise DimensionMismatch(
            f"Model carries {len(model.lambdas)} a-priori means, T + 1 = {T + 1} needed"
        )
    cov, means = _full_covariance(model, T + 1)
    return SymMatrix(cov[:T, :T]), cov[:T, T].copy(), means


def _assemble(alpha0: float, alpha: np.ndarray, model: CovModel, T: int) -> CredibilityFactors:
    lam = np.asarray(model.lambdas[:T], dtype=float)
    alpha_star = lam * alpha
    regular = bool(np.all(alpha > -SIGN_TOL))
    isotonic = bool(np.all(np.diff(alpha_star) >= -ISOTONIC_TOL))
    warnings: List[str] = []
    if not regular:
        bad = [i + 1 for i in np.flatnonzero(alpha <= -SIGN_TOL)]
        warnings.append(f"Credibility factors are not regular: negative weight at periods {bad}")
    if alpha0 < 0:
        warnings.append(f"Negative intercept alpha0 = {alpha0:.6g}")
    CredibilityLogger.log_warning_flags(_logger, warnings)
    return CredibilityFactors(
        alpha0=float(alpha0),
        alpha=alpha,
        alpha_star=alpha_star,
        regular=regular,
        isotonic_star=isotonic,
        model_echo=model.summary(),
        lambda_next=float(model.lambdas[T]),
        warnings=tuple(warnings),
    )


def credibility_factors(model: CovModel, T: int) -> CredibilityFactors:
    """
    Solve the normal equations Sigma_T alpha = cross.

    Returns:
        CredibilityFactors with alpha0 expressed per unit of lambda_{T+1}
    """
    sigma, cross, means = build_covariance(model, T)
    alpha = solve_spd(sigma, cross)
    alpha0 = (means[T] - float(np.dot(alpha, means[:T]))) / model.lambdas[T]
    factors = _assemble(alpha0, alpha, model, T)
    _logger.debug(f"Solved normal equations for {model.variant.value}, T={T}")
    return factors


def closed_form_factors_model1(model: CovModel, T: int) -> CredibilityFactors:
    """
    Closed-form factors of the dynamic AR(1) random-effects model.

    alpha*_t = rho (1 - rho^2) sigma^2 lambda_{T+1} v_T u_t lambda_t^2 / q*_t
    with xi_t = sigma^2 (1 - rho^2) lambda_t^2 / q*_t driving the u/v recursions.
    """
    if model.variant != CovVariant.DYNAMIC_AR1:
        raise InvalidVariant(
            f"Closed form needs a DYNAMIC_AR1 model, got {model.variant.value}"
        )
    if not -1 < model.rho < 1:
        raise InvalidRho(f"rho must lie in (-1, 1), got {model.rho}")
    errors = model.validate()
    if errors:
        raise InvalidParams(f"Invalid covariance model: {', '.join(errors)}")
    if T < 1 or T + 1 > len(model.lambdas):
        raise DimensionMismatch(f"T = {T} is not supported by {len(model.lambdas)} a-priori means")

    rho, sigma2 = model.rho, model.sigma2
    lam = np.asarray(model.lambdas[:T], dtype=float)
    lam_next = float(model.lambdas[T])
    q = q_star(model.family, lam, sigma2)
    weight = lam ** 2 / q
    xi = sigma2 * (1.0 - rho ** 2) * weight

    if T == 1:
        last_col = np.array([1.0 / (1.0 - rho ** 2 + xi[0])])
    else:
        last_col = tridiag_uv(xi, rho).last_column()

    alpha_star = rho * (1.0 - rho ** 2) * sigma2 * lam_next * last_col * weight
    alpha = alpha_star / lam
    alpha0 = 1.0 - float(np.sum(alpha_star)) / lam_next
    return _assemble(alpha0, alpha, model, T)


def inar1_closed_form(lam: float, p: float, psi0: float, t: int) -> CredibilityFactors:
    """
    Closed-form factors of the heterogeneous INAR(1) model.

    With b = lambda psi0 / (1 - p) and D = b (t - p (t - 2)) + 1 + p the first
    factor is b (1 - p) / D, interior factors are (1 - p) times it and the last
    one adds p.
    """
    if not lam > 0 or not 0 <= p < 1 or psi0 < 0:
        raise InvalidParams(f"Invalid INAR(1) parameters: lambda={lam}, p={p}, psi0={psi0}")
    if t < 3:
        raise InvalidParams(f"INAR(1) closed form needs t >= 3, got {t}")

    b = lam * psi0 / (1.0 - p)
    denom = b * (t - p * (t - 2)) + 1.0 + p
    alpha_1 = b * (1.0 - p) / denom
    alpha = np.full(t, (1.0 - p) * alpha_1)
    alpha[0] = alpha_1
    alpha[-1] = alpha_1 + p
    alpha0 = (1.0 - p ** 2) / denom
    return _assemble(alpha0, alpha, CovModel.inar1_het(lam, p, psi0, t), t)


def harvey_fernandez_predict(y: Sequence[float], lambdas: Sequence[float], a0: float,
                             alpha: float, lambda_next: float = 1.0) -> float:
    """
    Exponentially weighted predictive mean of the Harvey-Fernandez model.

    Args:
        y: Claims y_1..y_t
        lambdas: A-priori means lambda_1..lambda_t
        a0: Prior weight
        alpha: Discount factor in (0, 1]
        lambda_next: lambda_{t+1}; the multiplicative rating factor is returned when omitted

    Returns:
        lambda_{t+1} (a0 + sum alpha^-tau y_tau) / (a0 + sum alpha^-tau lambda_tau)
    """
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    if y.shape != lam.shape:
        raise DimensionMismatch(f"y has {y.shape[0]} entries, lambdas has {lam.shape[0]}")
    if not 0 < alpha <= 1:
        raise InvalidAlpha(f"alpha must lie in (0, 1], got {alpha}")
    if not a0 > 0:
        raise InvalidParams(f"a0 must be positive, got {a0}")
    t = y.shape[0]
    # weights alpha^(t - tau), i.e. alpha^-tau rescaled by alpha^t
    w = alpha ** (t - np.arange(1, t + 1))
    scale = alpha ** t
    return lambda_next * (a0 * scale + float(w @ y)) / (a0 * scale + float(w @ lam))


def check_regular(f: CredibilityFactors) -> RegularityReport:
    """Regular when every alpha_t is positive up to rounding"""
    violations = [int(i) + 1 for i in np.flatnonzero(f.alpha <= -SIGN_TOL)]
    return RegularityReport(regular=not violations, violations=violations)


def check_isotonic(f: CredibilityFactors) -> IsotonicityReport:
    """Positively isotonic when alpha*_1 <= ... <= alpha*_T"""
    drops = np.flatnonzero(np.diff(f.alpha_star) < -ISOTONIC_TOL)
    if drops.size:
        return IsotonicityReport(isotonic=False, first_violation=int(drops[0]) + 1)
    return IsotonicityReport(isotonic=True)


def check_covariance_ordering(model: CovModel, T: int) -> bool:
    """
    Positive covariance ordering of the standardised series.

    Returns:
        True when Cov(Y*_1, Y*_{1+h}) strictly decreases over h = 0..T
    """
    sigma, cross, _ = build_covariance(model, T)
    full = np.append(sigma.entries[0], cross[0])
    lam = np.asarray(model.lambdas[:T + 1], dtype=float)
    standardised = full / (lam[0] * lam)
    return bool(np.all(np.diff(standardised) < 0))


def rating_factor_contributions(factors: CredibilityFactors,
                                lambda_next: Optional[float] = None) -> np.ndarray:
    """Weights alpha_t / lambda_{T+1} of the posterior rating factor"""
    lam_next = factors.lambda_next if lambda_next is None else lambda_next
    return np.asarray(factors.alpha) / lam_next
