"""Seeded simulators for latent state processes and claim panels"""

from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParams, InvalidRho
from .types import (
    ClaimPanel,
    ClaimRecord,
    CovariateLaw,
    EdFamily,
    FamilyKind,
    StateFamily,
    StatePath,
    StateSpec,
)
from .utils.logging import CredibilityLogger


RNG_ALGORITHM = "PCG64"

_logger = CredibilityLogger.get_logger("processes")


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """
    Deterministic generator for a (master seed, stream index...) pair.

    Args:
        seed: Non-negative master seed
        spawn_key: Stream indices, e.g. the policy index

    Returns:
        numpy Generator backed by PCG64
    """
    if seed < 0:
        raise InvalidParams(f"Seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def _check_spec(spec: StateSpec):
    errors = spec.validate()
    if errors:
        raise InvalidParams(f"Invalid state specification: {', '.join(errors)}")


def sample_stationary(spec: StateSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw R_0 from the stationary marginal of the state process"""
    family = spec.family
    if family in (StateFamily.BGAR1, StateFamily.IID, StateFamily.CONSTANT):
        if spec.sigma2 == 0:
            return np.ones(size)
        return rng.gamma(shape=1.0 / spec.sigma2, scale=spec.sigma2, size=size)
    if family == StateFamily.ARG1:
        return rng.gamma(shape=spec.delta, scale=spec.c / (1.0 - spec.rho), size=size)
    if family == StateFamily.GAR1:
        return rng.gamma(shape=spec.shape, scale=1.0 / spec.rate, size=size)
    raise InvalidParams(f"Unknown state family: {family}")


def _gar1_innovations(spec: StateSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    rho, scale = spec.rho, 1.0 / spec.rate
    if spec.shape == 1.0:
        # exponential marginal: zero with probability rho, else Exp(rate)
        jump = rng.random(size) >= rho
        return np.where(jump, rng.exponential(scale, size), 0.0)
    # shot noise: N ~ Poisson(shape ln(1/rho)) jumps of size rho^U Exp(rate)
    counts = rng.poisson(spec.shape * np.log(1.0 / rho), size)
    total = int(counts.sum())
    jumps = rho ** rng.random(total) * rng.exponential(scale, total)
    owner = np.repeat(np.arange(size), counts)
    return np.bincount(owner, weights=jumps, minlength=size)


def state_transition(spec: StateSpec, values: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
    """
    Propagate a vector of current states one step forward.

    Args:
        spec: State process specification
        values: Current states R_t (any length)
        rng: Random generator

    Returns:
        Array of R_{t+1}, same length as values
    """
    values = np.asarray(values, dtype=float)
    size = values.shape[0]
    family = spec.family
    if family == StateFamily.CONSTANT:
        return values.copy()
    if family == StateFamily.IID:
        return rng.gamma(shape=1.0 / spec.sigma2, scale=spec.sigma2, size=size)
    if family == StateFamily.BGAR1:
        gamma_ = 1.0 / spec.sigma2
        b = rng.beta(gamma_ * spec.rho, gamma_ * (1.0 - spec.rho), size)
        g = rng.gamma(shape=gamma_ * (1.0 - spec.rho), scale=spec.sigma2, size=size)
        return b * values + g
    if family == StateFamily.ARG1:
        z = rng.poisson(spec.rho * values / spec.c)
        return rng.gamma(shape=spec.delta + z, scale=spec.c)
    if family == StateFamily.GAR1:
        return spec.rho * values + _gar1_innovations(spec, size, rng)
    raise InvalidParams(f"Unknown state family: {family}")


def simulate_state_paths(spec: StateSpec, T: int, n_paths: int, seed: int) -> np.ndarray:
    """
    Independent stationary paths R_0..R_T.

    Returns:
        Array of shape (n_paths, T + 1)
    """
    _check_spec(spec)
    if T < 0 or n_paths < 1:
        raise InvalidParams("T must be non-negative and n_paths positive")
    rng = make_rng(seed)
    paths = np.empty((n_paths, T + 1))
    paths[:, 0] = sample_stationary(spec, n_paths, rng)
    for t in range(1, T + 1):
        paths[:, t] = state_transition(spec, paths[:, t - 1], rng)
    return paths


def simulate_state(spec: StateSpec, T: int, seed: int) -> StatePath:
    """Single stationary path of the given state process"""
    values = simulate_state_paths(spec, T, 1, seed)[0]
    params = {k: v for k, v in spec.to_dict().items() if k != "family"}
    return StatePath(values=values, family=spec.family, params=params, seed=seed)


def simulate_bgar1(sigma2: float, rho: float, T: int, seed: int) -> StatePath:
    """BGAR(1) path with unit mean and variance sigma2; rho = 1 gives a CONSTANT path"""
    if not 0 <= rho <= 1:
        raise InvalidRho(f"BGAR(1) rho must lie in [0, 1], got {rho}")
    if not sigma2 > 0:
        raise InvalidParams(f"sigma2 must be positive, got {sigma2}")
    return simulate_state(StateSpec.bgar1(sigma2, rho), T, seed)


def simulate_arg1(rho: float, c: float, delta: float, T: int, seed: int) -> StatePath:
    """Autoregressive gamma path via Poisson mixing"""
    spec = StateSpec.arg1(rho, c, delta)
    _check_spec(spec)
    return simulate_state(spec, T, seed)


def simulate_gar1(shape: float, rate: float, rho: float, T: int, seed: int) -> StatePath:
    """Gaver-Lewis gamma AR(1) path with Gamma(shape, rate) marginal"""
    spec = StateSpec.gar1(shape, rate, rho)
    _check_spec(spec)
    return simulate_state(spec, T, seed)


def simulate_inar1_paths(lam: float, p: float, psi0: float, T: int, n_paths: int,
                         seed: int) -> np.ndarray:
    """
    Heterogeneous INAR(1) counts Y_1..Y_T for independent policyholders.

    Args:
        lam: Innovation intensity lambda
        p: Binomial thinning probability in [0, 1)
        psi0: Variance of the unit-mean gamma heterogeneity; 0 gives R = 1
        T: Number of periods
        n_paths: Number of independent paths
        seed: Master seed

    Returns:
        Integer array of shape (n_paths, T)
    """
    if not lam > 0:
        raise InvalidParams(f"lambda must be positive, got {lam}")
    if not 0 <= p < 1:
        raise InvalidParams(f"p must lie in [0, 1), got {p}")
    if psi0 < 0:
        raise InvalidParams(f"psi0 must be non-negative, got {psi0}")
    if T < 1:
        raise InvalidParams(f"T must be at least 1, got {T}")

    rng = make_rng(seed)
    if psi0 > 0:
        r = rng.gamma(shape=1.0 / psi0, scale=psi0, size=n_paths)
    else:
        r = np.ones(n_paths)
    y = np.empty((n_paths, T), dtype=np.int64)
    y[:, 0] = rng.poisson(lam * r / (1.0 - p))
    for t in range(1, T):
        y[:, t] = rng.binomial(y[:, t - 1], p) + rng.poisson(lam * r)
    return y


def simulate_inar1_het(lam: float, p: float, psi0: float, T: int, seed: int) -> np.ndarray:
    """Single heterogeneous INAR(1) path Y_1..Y_T"""
    return simulate_inar1_paths(lam, p, psi0, T, 1, seed)[0]


def sample_observations(family: EdFamily, mean, rng: np.random.Generator) -> np.ndarray:
    """
    Draw claims with the given conditional means.

    POISSON draws counts; GAMMA uses shape 1/psi and scale mean*psi so that the
    variance is psi * mean^2.
    """
    mean = np.asarray(mean, dtype=float)
    if family.kind == FamilyKind.POISSON:
        return rng.poisson(mean).astype(float)
    return rng.gamma(shape=1.0 / family.psi, scale=mean * family.psi)


def simulate_panel(n_policies: int, T: int, state: StateSpec, family: EdFamily,
                   beta: Sequence[float], covariate_law: Optional[CovariateLaw] = None,
                   seed: int = 0) -> ClaimPanel:
    """
    Generate a longitudinal claim panel with T training periods and one holdout.

    Args:
        n_policies: Number of policyholders
        T: Training periods; period T + 1 is the holdout
        state: Latent state process
        family: Observation family
        beta: Regression coefficients, intercept first
        covariate_law: Law of the len(beta) - 1 covariates
        seed: Master seed; policy i draws from stream (seed, i)

    Returns:
        ClaimPanel carrying the true latent factors
    """
    covariate_law = covariate_law or CovariateLaw()
    errors = state.validate() + family.validate() + covariate_law.validate()
    if n_policies < 1:
        errors.append("n_policies must be at least 1")
    if T < 1:
        errors.append("T must be at least 1")
    if len(beta) < 1:
        errors.append("beta needs at least an intercept")
    if errors:
        raise InvalidParams(f"Invalid panel specification: {', '.join(errors)}")

    beta = np.asarray(beta, dtype=float)
    k = beta.shape[0] - 1
    n_periods = T + 1
    std = np.sqrt(covariate_law.variance)
    records = []

    for i in range(n_policies):
        rng = make_rng(seed, i)
        x = rng.normal(covariate_law.mean, std, size=(n_periods, k))
        lam = np.exp(beta[0] + x @ beta[1:])
        path = np.empty(n_periods + 1)
        path[0] = sample_stationary(state, 1, rng)[0]
        for t in range(1, n_periods + 1):
            path[t] = state_transition(state, path[t - 1:t], rng)[0]
        r = path[1:]
        y = sample_observations(family, lam * r, rng)

        policy_id = f"P{i + 1:05d}"
        for t in range(n_periods):
            records.append(ClaimRecord(
                policy_id=policy_id,
                period=t + 1,
                lam=float(lam[t]),
                y=float(y[t]),
                covariates=tuple(float(v) for v in x[t]),
                true_r=float(r[t]),
            ))

    metadata = {
        "rng_algorithm": RNG_ALGORITHM,
        "seed": seed,
        "n_policies": n_policies,
        "train_periods": T,
        "state": state.to_dict(),
        "family": {"kind": family.kind.value, "psi": family.psi},
        "beta": [float(b) for b in beta],
        "covariate_law": {"mean": covariate_law.mean, "variance": covariate_law.variance},
    }
    _logger.debug(
        f"Simulated panel: {n_policies} policies x {n_periods} periods, "
        f"state={state.family.value}, family={family.kind.value}, seed={seed}"
    )
    return ClaimPanel(records=records, metadata=metadata)
