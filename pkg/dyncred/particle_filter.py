"""
Bootstrap particle filter for the exact conditional-mean premium
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DimensionMismatch, InvalidParams, ParticleDegeneracy
from .processes import sample_stationary, state_transition
from .types import EdFamily, FamilyKind, StateFamily, StateSpec
from .utils.logging import CredibilityLogger


MIN_ESS = 10.0

_logger = CredibilityLogger.get_logger("particle_filter")


@dataclass
class FilterEstimate:
    """Predicted premium with its Monte Carlo standard error"""
    premium: float
    std_err: float
    n_resamples: int
    min_ess: float


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Systematic resampling indices.

    Args:
        weights: Normalised weights
        rng: Random generator

    Returns:
        Ancestor index for each of the len(weights) new particles
    """
    n = weights.shape[0]
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(cumulative, positions)


class BootstrapFilter:
    """
    Bootstrap particle filter over R_1..R_T.

    Runs ``n_replicates`` independent filters side by side; the premium is the
    mean of their estimates and the standard error comes from their spread.

    Args:
        state: Latent state process (BGAR1, ARG1, GAR1 or CONSTANT)
        family: Observation family
        n_particles: Particles per replicate
        n_replicates: Independent filters used for the standard error
        ess_fraction: Resample when ESS < ess_fraction * n_particles
    """

    SUPPORTED = (StateFamily.BGAR1, StateFamily.ARG1, StateFamily.GAR1,
                 StateFamily.CONSTANT, StateFamily.IID)

    def __init__(self, state: StateSpec, family: EdFamily, n_particles: int = 2000,
                 n_replicates: int = 16, ess_fraction: float = 0.5):
        if state.family not in self.SUPPORTED:
            raise InvalidParams(f"State family {state.family.value} is not simulable")
        errors = state.validate() + family.validate()
        if n_particles < MIN_ESS:
            errors.append(f"n_particles must be at least {int(MIN_ESS)}")
        if n_replicates < 2:
            errors.append("n_replicates must be at least 2")
        if errors:
            raise InvalidParams(f"Invalid particle filter setup: {', '.join(errors)}")
        self.state = state
        self.family = family
        self.n_particles = n_particles
        self.n_replicates = n_replicates
        self.ess_fraction = ess_fraction

    def log_likelihood(self, y: float, mean: np.ndarray) -> np.ndarray:
        """Log density of claim y given conditional means"""
        if self.family.kind == FamilyKind.POISSON:
            return stats.poisson.logpmf(y, mean)
        psi = self.family.psi
        return stats.gamma.logpdf(y, a=1.0 / psi, scale=mean * psi)

    def _propagate(self, particles: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        flat = state_transition(self.state, particles.ravel(), rng)
        return flat.reshape(particles.shape)

    def predict(self, y, lambdas, lambda_next: float,
                rng: np.random.Generator) -> FilterEstimate:
        """
        Estimate E[Y_{T+1} | y_1..y_T].

        Args:
            y: Observed claims y_1..y_T
            lambdas: A-priori means lambda_1..lambda_T
            lambda_next: lambda_{T+1}
            rng: Random generator

        Returns:
            FilterEstimate with premium and standard error
        """
        y = np.asarray(y, dtype=float)
        lam = np.asarray(lambdas, dtype=float)
        if y.shape != lam.shape:
            raise DimensionMismatch(f"y has {y.shape[0]} entries, lambdas has {lam.shape[0]}")

        K, N = self.n_replicates, self.n_particles
        particles = sample_stationary(self.state, K * N, rng).reshape(K, N)
        log_w = np.zeros((K, N))
        n_resamples = 0
        min_ess = float(N)

        for t in range(y.shape[0]):
            particles = self._propagate(particles, rng)
            log_w = log_w + self.log_likelihood(y[t], lam[t] * particles)
            log_w -= log_w.max(axis=1, keepdims=True)
            w = np.exp(log_w)
            w /= w.sum(axis=1, keepdims=True)
            ess = 1.0 / np.sum(w ** 2, axis=1)
            min_ess = min(min_ess, float(ess.min()))
            if ess.min() < MIN_ESS:
                raise ParticleDegeneracy(
                    f"Effective sample size {ess.min():.1f} fell below {MIN_ESS:.0f} at period {t + 1}"
                )
            for k in np.flatnonzero(ess < self.ess_fraction * N):
                idx = systematic_resample(w[k], rng)
                particles[k] = particles[k, idx]
                log_w[k] = 0.0
                n_resamples += 1

        w = np.exp(log_w - log_w.max(axis=1, keepdims=True))
        w /= w.sum(axis=1, keepdims=True)
        following = self._propagate(particles, rng)
        estimates = lambda_next * np.sum(w * following, axis=1)
        premium = float(estimates.mean())
        std_err = float(estimates.std(ddof=1) / np.sqrt(K))
        _logger.debug(f"Filter estimate {premium:.6f} (se {std_err:.2e}), {n_resamples} resamples")
        return FilterEstimate(premium=premium, std_err=std_err, n_resamples=n_resamples,
                              min_ess=min_ess)
