"""Poisson regression with log link fitted by IRLS"""

from typing import Optional, Tuple

import numpy as np
from scipy import stats
from scipy.special import gammaln, xlogy

from .errors import DimensionMismatch, InvalidParams, NotPositiveDefinite, RankDeficient
from .linalg import ldl_factor, solve_spd
from .types import ClaimPanel, GlmFit
from .utils.logging import CredibilityLogger


MAX_ITER = 50
DEVIANCE_TOL = 1e-10
MAX_HALVINGS = 10
SEPARATION_THRESHOLD = 30.0
MAX_ETA = 700.0

_logger = CredibilityLogger.get_logger("glm")


def poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    """2 * sum(y log(y / mu) - (y - mu))"""
    return float(2.0 * np.sum(xlogy(y, y) - xlogy(y, mu) - (y - mu)))


def poisson_log_likelihood(y: np.ndarray, mu: np.ndarray) -> float:
    return float(np.sum(xlogy(y, mu) - mu - gammaln(y + 1.0)))


def _mean(design: np.ndarray, beta: np.ndarray, offset: np.ndarray) -> np.ndarray:
    return np.exp(np.minimum(design @ beta + offset, MAX_ETA))


def _check_rank(design: np.ndarray):
    norms = np.linalg.norm(design, axis=0)
    if np.any(norms == 0):
        raise RankDeficient("Design matrix has an all-zero column")
    scaled = design / norms
    try:
        ldl_factor(scaled.T @ scaled)
    except NotPositiveDefinite as e:
        raise RankDeficient(f"Design matrix is not of full column rank: {e}") from e


def _weighted_step(design: np.ndarray, mu: np.ndarray, working: np.ndarray) -> np.ndarray:
    xtw = design.T * mu
    try:
        return solve_spd(xtw @ design, xtw @ working)
    except NotPositiveDefinite as e:
        raise RankDeficient(f"Weighted normal equations are singular: {e}") from e


def fit_poisson(design, y, offset=None, max_iter: int = MAX_ITER,
                tol: float = DEVIANCE_TOL) -> GlmFit:
    """
    Maximum likelihood Poisson regression with mean exp(X beta + offset).

    Args:
        design: n x k design matrix (include the intercept column yourself)
        y: Non-negative counts of length n
        offset: Optional offset of length n
        max_iter: IRLS iteration limit
        tol: Relative deviance change that counts as converged

    Returns:
        GlmFit; converged is False when the iteration limit is hit
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"Design has {n} rows, response has {y.shape[0]}")
    off = np.zeros(n) if offset is None else np.asarray(offset, dtype=float).ravel()
    if off.shape[0] != n:
        raise DimensionMismatch(f"Offset has {off.shape[0]} entries, expected {n}")
    if n <= k:
        raise InvalidParams(f"Need more rows than columns, got n={n}, k={k}")
    if np.any(y < 0):
        raise InvalidParams("Poisson responses must be non-negative")
    _check_rank(X)

    mu = y + 0.1
    beta = _weighted_step(X, mu, np.log(mu) - off)
    mu = _mean(X, beta, off)
    dev = poisson_deviance(y, mu)
    history = [dev]
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        eta = X @ beta
        working = eta + (y - mu) / mu
        beta_new = _weighted_step(X, mu, working)
        mu_new = _mean(X, beta_new, off)
        dev_new = poisson_deviance(y, mu_new)

        halvings = 0
        slack = 1e-12 * (abs(dev) + 1.0)
        while dev_new > dev + slack and halvings < MAX_HALVINGS:
            beta_new = 0.5 * (beta + beta_new)
            mu_new = _mean(X, beta_new, off)
            dev_new = poisson_deviance(y, mu_new)
            halvings += 1
        if halvings:
            _logger.debug(f"Iteration {iterations}: {halvings} step halvings")
        if dev_new > dev + slack:
            _logger.warning(f"Deviance could not be decreased at iteration {iterations}")
            break

        change = abs(dev_new - dev) / (abs(dev_new) + 0.1)
        beta, mu, dev = beta_new, mu_new, dev_new
        history.append(dev)
        if change < tol:
            converged = True
            break

    info = (X.T * mu) @ X
    cov = np.linalg.inv(info)
    std_err = np.sqrt(np.diag(cov))
    p_values = 2.0 * stats.norm.sf(np.abs(beta / std_err))

    warnings = []
    if not converged:
        warnings.append(f"IRLS did not converge within {max_iter} iterations")
    large = [j for j, b in enumerate(beta) if abs(b) > SEPARATION_THRESHOLD]
    if large:
        warnings.append(f"Possible separation: |beta| > {SEPARATION_THRESHOLD:g} for columns {large}")

    fit = GlmFit(
        beta=beta,
        std_err=std_err,
        p_values=p_values,
        converged=converged,
        iterations=iterations,
        log_likelihood=poisson_log_likelihood(y, mu),
        deviance=dev,
        warnings=warnings,
        deviance_history=history,
    )
    CredibilityLogger.log_fit(_logger, fit)
    return fit


def predict_lambda(fit: GlmFit, design_row, offset: float = 0.0) -> float:
    """exp(x^T beta + offset)"""
    x = np.asarray(design_row, dtype=float).ravel()
    if x.shape[0] != fit.beta.shape[0]:
        raise DimensionMismatch(
            f"Design row has {x.shape[0]} entries, fit has {fit.beta.shape[0]} coefficients"
        )
    return float(np.exp(x @ fit.beta + offset))


def design_from_panel(panel: ClaimPanel, add_intercept: bool = True,
                      max_period: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Design matrix and response from panel records.

    Args:
        panel: Claim panel with covariates
        add_intercept: Prepend a column of ones
        max_period: Only use records with period <= max_period

    Returns:
        (design, y) in panel record order
    """
    records = [r for r in panel.records if max_period is None or r.period <= max_period]
    if not records:
        raise InvalidParams("No panel records selected for the design matrix")
    cov = np.array([r.covariates for r in records], dtype=float).reshape(
        len(records), panel.n_covariates)
    if add_intercept:
        cov = np.hstack([np.ones((len(records), 1)), cov])
    y = np.array([r.y for r in records], dtype=float)
    return cov, y
