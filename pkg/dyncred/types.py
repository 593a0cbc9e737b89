"""Dynamic Credibility Type Definitions"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, List, Dict, Any, Tuple

import numpy as np


class FamilyKind(Enum):
    """Observation distribution within the reproductive EDF"""
    POISSON = "poisson"  # V(u) = u, psi = 1
    GAMMA = "gamma"      # V(u) = u^2


class VarianceFn(Enum):
    """Unit variance function V(.)"""
    IDENTITY = "identity"  # V(x) = x
    SQUARE = "square"      # V(x) = x^2


class StateFamily(Enum):
    """Latent state process family"""
    BGAR1 = "bgar1"
    ARG1 = "arg1"
    GAR1 = "gar1"
    IID = "iid"
    CONSTANT = "constant"


class CovVariant(Enum):
    """Covariance-generating model variant"""
    STATIC_RE = "static_re"
    DYNAMIC_AR1 = "dynamic_ar1"
    TWO_COMPONENT = "two_component"
    ARBITRARY_ACF = "arbitrary_acf"
    ARMA11 = "arma11"
    INAR1_HET = "inar1_het"


class PremiumMethod(Enum):
    """Premium strategies compared by the evaluation harness"""
    NAIVE = "naive"
    STATIC = "static"
    PROPOSED = "proposed"
    EXACT_SMC = "exact_smc"
    TRUE = "true"
    HARVEY = "harvey"


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense symmetric matrix"""
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(self.entries))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def validate(self) -> List[str]:
        errors = []
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            errors.append("Matrix must be square")
            return errors
        if self.dim < 1:
            errors.append("Matrix dimension must be at least 1")
        if not np.array_equal(self.entries, self.entries.T):
            errors.append("Matrix must be symmetric")
        return errors

    def to_array(self) -> np.ndarray:
        return np.array(self.entries)


@dataclass(frozen=True, eq=False)
class UvSequences:
    """Recursions d, delta, u, v of the tridiagonal inverse"""
    d: np.ndarray
    delta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    rho: float
    xi: np.ndarray

    def __post_init__(self):
        for name in ("d", "delta", "u", "v", "xi"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def T(self) -> int:
        return int(self.xi.shape[0])

    def last_column(self) -> np.ndarray:
        """Last column of the inverse tridiagonal matrix: v_T * u"""
        if self.v[-1] == 0:
            # rho = 0 stores the column directly in u
            return np.array(self.u)
        return self.v[-1] * self.u


@dataclass(frozen=True)
class EdFamily:
    """Exponential dispersion family with dispersion psi"""
    kind: FamilyKind
    psi: float = 1.0

    def __post_init__(self):
        # Poisson has no free dispersion
        if self.kind == FamilyKind.POISSON:
            object.__setattr__(self, "psi", 1.0)

    @classmethod
    def poisson(cls) -> "EdFamily":
        return cls(FamilyKind.POISSON, 1.0)

    @classmethod
    def gamma(cls, psi: float) -> "EdFamily":
        return cls(FamilyKind.GAMMA, psi)

    @property
    def variance_fn(self) -> VarianceFn:
        if self.kind == FamilyKind.POISSON:
            return VarianceFn.IDENTITY
        return VarianceFn.SQUARE

    def validate(self) -> List[str]:
        errors = []
        if not self.psi > 0:
            errors.append("Dispersion psi must be positive")
        return errors


@dataclass(frozen=True)
class StateSpec:
    """Latent state process specification"""
    family: StateFamily
    sigma2: float = 0.0   # BGAR1 / IID / CONSTANT variance (unit mean)
    rho: float = 0.0      # BGAR1 / ARG1 / GAR1 autocorrelation
    c: float = 0.0        # ARG1 scale
    delta: float = 0.0    # ARG1 shape
    shape: float = 0.0    # GAR1 marginal shape
    rate: float = 0.0     # GAR1 marginal rate

    @classmethod
    def bgar1(cls, sigma2: float, rho: float) -> "StateSpec":
        """BGAR(1) with unit mean; rho = 1 and sigma2 = 0 collapse to CONSTANT"""
        if sigma2 == 0 or rho == 1:
            return cls(StateFamily.CONSTANT, sigma2=sigma2, rho=1.0)
        if rho == 0:
            return cls(StateFamily.IID, sigma2=sigma2)
        return cls(StateFamily.BGAR1, sigma2=sigma2, rho=rho)

    @classmethod
    def arg1(cls, rho: float, c: float, delta: float) -> "StateSpec":
        return cls(StateFamily.ARG1, rho=rho, c=c, delta=delta)

    @classmethod
    def gar1(cls, shape: float, rate: float, rho: float) -> "StateSpec":
        return cls(StateFamily.GAR1, shape=shape, rate=rate, rho=rho)

    @classmethod
    def constant(cls, sigma2: float) -> "StateSpec":
        return cls(StateFamily.CONSTANT, sigma2=sigma2, rho=1.0)

    @property
    def mean(self) -> float:
        if self.family == StateFamily.ARG1:
            return self.c * self.delta / (1 - self.rho)
        if self.family == StateFamily.GAR1:
            return self.shape / self.rate
        return 1.0

    @property
    def variance(self) -> float:
        if self.family == StateFamily.ARG1:
            return self.delta * self.c ** 2 / (1 - self.rho) ** 2
        if self.family == StateFamily.GAR1:
            return self.shape / self.rate ** 2
        return self.sigma2

    @property
    def autocorrelation(self) -> float:
        if self.family == StateFamily.CONSTANT:
            return 1.0
        if self.family == StateFamily.IID:
            return 0.0
        return self.rho

    def validate(self) -> List[str]:
        errors = []
        if self.family in (StateFamily.BGAR1, StateFamily.IID, StateFamily.CONSTANT):
            if self.sigma2 < 0:
                errors.append("State variance sigma2 must be non-negative")
            if self.family != StateFamily.CONSTANT and self.sigma2 == 0:
                errors.append("State variance sigma2 must be positive")
        if self.family == StateFamily.BGAR1 and not 0 <= self.rho <= 1:
            errors.append("BGAR(1) rho must lie in [0, 1]")
        if self.family == StateFamily.ARG1:
            if not 0 <= self.rho < 1:
                errors.append("ARG(1) rho must lie in [0, 1)")
            if not (self.c > 0 and self.delta > 0):
                errors.append("ARG(1) c and delta must be positive")
        if self.family == StateFamily.GAR1:
            if not 0 < self.rho < 1:
                errors.append("GAR(1) rho must lie in (0, 1)")
            if not (self.shape > 0 and self.rate > 0):
                errors.append("GAR(1) shape and rate must be positive")
        return errors

    def to_dict(self) -> Dict[str, Any]:
        data = {"family": self.family.value}
        for name in ("sigma2", "rho", "c", "delta", "shape", "rate"):
            value = getattr(self, name)
            if value:
                data[name] = value
        return data


@dataclass(frozen=True)
class CovariateLaw:
    """Normal law of the rating covariates X_it"""
    mean: float = 0.0
    variance: float = 0.6

    def validate(self) -> List[str]:
        errors = []
        if self.variance < 0:
            errors.append("Covariate variance must be non-negative")
        return errors


@dataclass(frozen=True, eq=False)
class StatePath:
    """Simulated latent trajectory R_0..R_T"""
    values: np.ndarray
    family: StateFamily
    params: Dict[str, float]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))

    @property
    def T(self) -> int:
        return int(self.values.shape[0]) - 1


@dataclass(frozen=True)
class CovModel:
    """Tagged covariance-generating model

    Only the fields belonging to ``variant`` are read; ``lambdas`` holds the
    a-priori means lambda_1..lambda_{T+1}.
    """
    variant: CovVariant
    lambdas: Tuple[float, ...]
    sigma2: float = 0.0
    rho: float = 0.0
    family: EdFamily = field(default_factory=EdFamily.poisson)
    # TWO_COMPONENT
    sigma1_sq: float = 0.0
    sigma2_sq: float = 0.0
    psi: float = 1.0
    variance_fn: VarianceFn = VarianceFn.IDENTITY
    # ARBITRARY_ACF
    correlations: Tuple[float, ...] = ()
    # ARMA11
    phi: float = 0.0
    theta: float = 0.0
    sigma_e_sq: float = 0.0
    # INAR1_HET
    inar_lambda: float = 0.0
    p: float = 0.0
    psi0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "correlations", tuple(float(x) for x in self.correlations))

    @classmethod
    def static_re(cls, sigma2: float, lambdas, family: Optional[EdFamily] = None) -> "CovModel":
        return cls(CovVariant.STATIC_RE, tuple(lambdas), sigma2=sigma2,
                   family=family or EdFamily.poisson())

    @classmethod
    def dynamic_ar1(cls, sigma2: float, rho: float, lambdas,
                    family: Optional[EdFamily] = None) -> "CovModel":
        return cls(CovVariant.DYNAMIC_AR1, tuple(lambdas), sigma2=sigma2, rho=rho,
                   family=family or EdFamily.poisson())

    @classmethod
    def two_component(cls, sigma1_sq: float, sigma2_sq: float, rho: float, psi: float,
                      lambdas, variance_fn: VarianceFn = VarianceFn.IDENTITY) -> "CovModel":
        return cls(CovVariant.TWO_COMPONENT, tuple(lambdas), rho=rho, sigma1_sq=sigma1_sq,
                   sigma2_sq=sigma2_sq, psi=psi, variance_fn=variance_fn)

    @classmethod
    def arbitrary_acf(cls, sigma2: float, correlations, lambdas,
                      family: Optional[EdFamily] = None) -> "CovModel":
        return cls(CovVariant.ARBITRARY_ACF, tuple(lambdas), sigma2=sigma2,
                   correlations=tuple(correlations), family=family or EdFamily.poisson())

    @classmethod
    def arma11(cls, phi: float, theta: float, sigma_e_sq: float, T: int,
               lambdas=None) -> "CovModel":
        if lambdas is None:
            lambdas = (1.0,) * (T + 1)
        return cls(CovVariant.ARMA11, tuple(lambdas), phi=phi, theta=theta,
                   sigma_e_sq=sigma_e_sq)

    @classmethod
    def inar1_het(cls, inar_lambda: float, p: float, psi0: float, T: int) -> "CovModel":
        # a-priori means are the stationary INAR mean lambda / (1 - p)
        mean = inar_lambda / (1 - p) if p < 1 else float("inf")
        return cls(CovVariant.INAR1_HET, (mean,) * (T + 1), inar_lambda=inar_lambda, p=p,
                   psi0=psi0)

    @property
    def max_periods(self) -> int:
        """Largest T the lambdas vector supports"""
        return len(self.lambdas) - 1

    def validate(self) -> List[str]:
        """Validate model parameters and return list of errors"""
        errors = []
        if len(self.lambdas) < 2:
            errors.append("At least two a-priori means (lambda_1, lambda_{T+1}) are required")
        if any(not lam > 0 for lam in self.lambdas):
            errors.append("All a-priori means lambda_t must be positive")

        v = self.variant
        if v in (CovVariant.STATIC_RE, CovVariant.DYNAMIC_AR1, CovVariant.ARBITRARY_ACF):
            if not self.sigma2 > 0:
                errors.append("Random-effect variance sigma2 must be positive")
            errors.extend(self.family.validate())
        if v == CovVariant.DYNAMIC_AR1 and not -1 < self.rho < 1:
            errors.append("Autocorrelation rho must lie in (-1, 1)")
        if v == CovVariant.TWO_COMPONENT:
            if not -1 < self.rho < 1:
                errors.append("Autocorrelation rho must lie in (-1, 1)")
            if not (self.sigma1_sq > 0 and self.sigma2_sq >= 0):
                errors.append("Component variances must be positive")
            if not self.psi > 0:
                errors.append("Dispersion psi must be positive")
        if v == CovVariant.ARBITRARY_ACF:
            if any(not -1 < r < 1 for r in self.correlations):
                errors.append("Correlations must lie in (-1, 1)")
        if v == CovVariant.ARMA11:
            if not self.sigma_e_sq > 0:
                errors.append("Innovation variance sigma_e_sq must be positive")
        if v == CovVariant.INAR1_HET:
            if not self.inar_lambda > 0:
                errors.append("INAR intensity lambda must be positive")
            if not 0 <= self.p < 1:
                errors.append("Thinning probability p must lie in [0, 1)")
            if self.psi0 < 0:
                errors.append("Heterogeneity variance psi0 must be non-negative")
        return errors

    def summary(self) -> Dict[str, Any]:
        """Compact echo of the variant-specific parameters"""
        data: Dict[str, Any] = {"variant": self.variant.value}
        v = self.variant
        if v in (CovVariant.STATIC_RE, CovVariant.DYNAMIC_AR1, CovVariant.ARBITRARY_ACF):
            data["sigma2"] = self.sigma2
            data["family"] = self.family.kind.value
            data["psi"] = self.family.psi
        if v in (CovVariant.DYNAMIC_AR1, CovVariant.TWO_COMPONENT):
            data["rho"] = self.rho
        if v == CovVariant.TWO_COMPONENT:
            data.update(sigma1_sq=self.sigma1_sq, sigma2_sq=self.sigma2_sq, psi=self.psi,
                        variance_fn=self.variance_fn.value)
        if v == CovVariant.ARBITRARY_ACF:
            data["correlations"] = list(self.correlations)
        if v == CovVariant.ARMA11:
            data.update(phi=self.phi, theta=self.theta, sigma_e_sq=self.sigma_e_sq)
        if v == CovVariant.INAR1_HET:
            data.update(inar_lambda=self.inar_lambda, p=self.p, psi0=self.psi0)
        data["lambdas"] = list(self.lambdas)
        return data


@dataclass(frozen=True)
class AcfSpec:
    """Variance and autocorrelations rho_1..rho_L of a stationary series"""
    variance: float
    correlations: Tuple[float, ...]

    @property
    def covariances(self) -> Tuple[float, ...]:
        return tuple(self.variance * r for r in self.correlations)

    @property
    def max_lag(self) -> int:
        return len(self.correlations)


@dataclass(frozen=True, eq=False)
class CredibilityFactors:
    """Credibility premium coefficients for periods 1..T"""
    alpha0: float
    alpha: np.ndarray
    alpha_star: np.ndarray
    regular: bool
    isotonic_star: bool
    model_echo: Dict[str, Any]
    lambda_next: float = 1.0
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", _readonly(self.alpha))
        object.__setattr__(self, "alpha_star", _readonly(self.alpha_star))

    @property
    def T(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def intercept(self) -> float:
        """Absolute intercept alpha0 * lambda_{T+1}"""
        return self.alpha0 * self.lambda_next

    @property
    def alpha0_star(self) -> float:
        """Intercept of the standardised premium, 1 - sum(alpha*) / lambda_{T+1}"""
        return 1.0 - float(np.sum(self.alpha_star)) / self.lambda_next


@dataclass
class RegularityReport:
    """Result of the regularity check"""
    regular: bool
    violations: List[int]  # 1-based periods with alpha_t <= 0


@dataclass
class IsotonicityReport:
    """Result of the positive isotonicity check"""
    isotonic: bool
    first_violation: Optional[int] = None  # 1-based t with alpha*_t > alpha*_{t+1}


@dataclass
class ClaimRecord:
    """One policy-period observation"""
    policy_id: str
    period: int
    lam: float
    y: float
    covariates: Tuple[float, ...] = ()
    true_r: Optional[float] = None


@dataclass
class PolicyHistory:
    """Training history and holdout information for one policyholder"""
    policy_id: str
    lambdas: np.ndarray          # lambda_1..lambda_T
    y: np.ndarray                # y_1..y_T
    lambda_next: float           # lambda_{T+1}
    true_r_next: Optional[float] = None
    y_next: Optional[float] = None

    @property
    def T(self) -> int:
        return int(self.y.shape[0])


@dataclass
class ClaimPanel:
    """Longitudinal claim records"""
    records: List[ClaimRecord]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def validate(self) -> List[str]:
        errors = []
        grouped = self.by_policy()
        for policy_id, recs in grouped.items():
            periods = [r.period for r in recs]
            if periods != list(range(1, len(periods) + 1)):
                errors.append(f"Policy {policy_id}: periods must be consecutive starting at 1")
        if any(not r.lam > 0 for r in self.records):
            errors.append("Every record must have lambda > 0")
        if any(r.y < 0 for r in self.records):
            errors.append("Claims must be non-negative")
        return errors

    def by_policy(self) -> Dict[str, List[ClaimRecord]]:
        """Records grouped per policy, sorted by period, in first-seen policy order"""
        grouped: Dict[str, List[ClaimRecord]] = {}
        for record in self.records:
            grouped.setdefault(record.policy_id, []).append(record)
        for recs in grouped.values():
            recs.sort(key=lambda r: r.period)
        return grouped

    @property
    def n_policies(self) -> int:
        return len(self.by_policy())

    @property
    def n_covariates(self) -> int:
        return len(self.records[0].covariates) if self.records else 0

    @property
    def has_truth(self) -> bool:
        return bool(self.records) and all(r.true_r is not None for r in self.records)

    @property
    def train_periods(self) -> int:
        """Number of training periods; the following period is the holdout"""
        if "train_periods" in self.metadata:
            return int(self.metadata["train_periods"])
        return max(len(recs) for recs in self.by_policy().values()) - 1

    def policy_histories(self, train_periods: Optional[int] = None) -> List[PolicyHistory]:
        """Split each policy into T training periods and the T+1 holdout period"""
        T = self.train_periods if train_periods is None else train_periods
        histories = []
        for policy_id, recs in self.by_policy().items():
            if len(recs) < T + 1:
                continue
            train, nxt = recs[:T], recs[T]
            histories.append(PolicyHistory(
                policy_id=policy_id,
                lambdas=np.array([r.lam for r in train]),
                y=np.array([r.y for r in train]),
                lambda_next=nxt.lam,
                true_r_next=nxt.true_r,
                y_next=nxt.y,
            ))
        return histories


@dataclass
class MomentEstimates:
    """Method-of-moments estimates of the dynamic random effect"""
    sigma2_hat: float
    rho_hat: float
    psi_hat: Optional[float]
    n_used: int
    clamped: Dict[str, bool] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


@dataclass
class GlmFit:
    """Poisson GLM fit result"""
    beta: np.ndarray
    std_err: np.ndarray
    p_values: np.ndarray
    converged: bool
    iterations: int
    log_likelihood: float
    deviance: float = 0.0
    warnings: List[str] = field(default_factory=list)
    deviance_history: List[float] = field(default_factory=list)

    def coefficient_table(self, names: Optional[List[str]] = None) -> str:
        """Coefficient table in Estimate / Std. err / p-value layout"""
        if names is None:
            names = ["(Intercept)"] + [f"x{j}" for j in range(1, len(self.beta))]
        width = max(len(n) for n in names) + 2
        lines = [f"{'':<{width}}{'Estimate':>10}{'Std. err':>10}{'p-value':>10}"]
        for name, b, se, p in zip(names, self.beta, self.std_err, self.p_values):
            lines.append(f"{name:<{width}}{b:>10.4f}{se:>10.4f}{p:>10.4f}")
        return "\n".join(lines)


class StaticSigmaMode(Enum):
    """Source of sigma^2 for the STATIC premium"""
    REESTIMATE = "reestimate"  # moment estimate under rho = 1
    DYNAMIC = "dynamic"        # reuse the dynamic sigma^2 estimate


@dataclass
class EvaluationSettings:
    """Settings of the out-of-sample premium comparison"""
    family: EdFamily = field(default_factory=EdFamily.poisson)
    state: Optional[StateSpec] = None  # required by EXACT_SMC
    n_holdout_copies: int = 100
    n_particles: int = 2000
    n_replicates: int = 16
    fit_glm: bool = True
    static_sigma2: StaticSigmaMode = StaticSigmaMode.REESTIMATE
    harvey_a0: Optional[float] = None
    harvey_alpha: Optional[float] = None

    def validate(self) -> List[str]:
        errors = self.family.validate()
        if self.state is not None:
            errors.extend(self.state.validate())
        if self.n_holdout_copies < 1:
            errors.append("n_holdout_copies must be at least 1")
        if self.n_particles < 10:
            errors.append("n_particles must be at least 10")
        if self.n_replicates < 2:
            errors.append("n_replicates must be at least 2")
        if self.harvey_a0 is not None and not self.harvey_a0 > 0:
            errors.append("harvey_a0 must be positive")
        if self.harvey_alpha is not None and not 0 < self.harvey_alpha <= 1:
            errors.append("harvey_alpha must lie in (0, 1]")
        return errors


@dataclass
class PremiumRow:
    """Predicted premium for one policy under one method"""
    policy_id: str
    method: PremiumMethod
    predicted: float
    negative: bool = False


@dataclass
class MethodSummary:
    """Out-of-sample error summary of one method"""
    rmse: float
    mae: float
    relative_rmse_pct: float = 100.0
    relative_mae_pct: float = 100.0


@dataclass
class PremiumReport:
    """Per-policy premiums plus RMSE / MAE summary rows"""
    rows: List[PremiumRow]
    summary: Dict[PremiumMethod, MethodSummary]
    warnings: List[str] = field(default_factory=list)

    def predictions(self, method: PremiumMethod) -> Dict[str, float]:
        return {row.policy_id: row.predicted for row in self.rows if row.method == method}
