"""Run Configuration Management"""

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .errors import ConfigError
from .types import (
    CovariateLaw,
    CovModel,
    CovVariant,
    EdFamily,
    EvaluationSettings,
    FamilyKind,
    PremiumMethod,
    StateFamily,
    StateSpec,
    StaticSigmaMode,
    VarianceFn,
)


COMMANDS = ("factors", "tables", "simulate", "evaluate", "fit")
TABLE_IDS = ("two-component", "poisson-std", "poisson-nonstd", "gamma-both",
             "semiparametric", "arma-remark")


@dataclass
class SimulationSpec:
    """Panel generation block"""
    state: StateSpec
    family: EdFamily = field(default_factory=EdFamily.poisson)
    n_policies: int = 500
    periods: int = 5
    beta: List[float] = field(default_factory=lambda: [-3.0, 2.0])
    covariates: CovariateLaw = field(default_factory=CovariateLaw)

    def validate(self) -> List[str]:
        errors = self.state.validate() + self.family.validate() + self.covariates.validate()
        if self.n_policies < 1:
            errors.append("simulation.n_policies must be at least 1")
        if self.periods < 1:
            errors.append("simulation.periods must be at least 1")
        if not self.beta:
            errors.append("simulation.beta needs at least an intercept")
        return errors


@dataclass
class StudySpec:
    """Simulation study block of the evaluate command"""
    # (rho, sigma2) pairs; None runs the default eleven-scenario grid
    scenarios: Optional[List[Tuple[float, float]]] = None
    seeds: List[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    n_policies: int = 500
    periods: int = 5
    beta: List[float] = field(default_factory=lambda: [-3.0, 2.0])
    covariates: CovariateLaw = field(default_factory=CovariateLaw)

    def validate(self) -> List[str]:
        errors = self.covariates.validate()
        for rho, sigma2 in self.scenarios or []:
            if not 0 <= rho <= 1:
                errors.append(f"study scenario rho={rho} must lie in [0, 1]")
            if sigma2 < 0:
                errors.append(f"study scenario sigma2={sigma2} must be non-negative")
        if not self.seeds or any(s < 0 for s in self.seeds):
            errors.append("study.seeds must be a non-empty list of non-negative seeds")
        if self.n_policies < 1:
            errors.append("study.n_policies must be at least 1")
        if self.periods < 1:
            errors.append("study.periods must be at least 1")
        if not self.beta:
            errors.append("study.beta needs at least an intercept")
        return errors


@dataclass
class OutputSpec:
    """Where a command writes its files"""
    directory: str = "."
    panel: str = "panel.csv"
    factors: str = "factors.json"
    rows: str = "premiums.csv"
    summary: str = "summary.json"
    table: str = "relative_errors.txt"
    study_rows: str = "study.csv"
    study_table: str = "study.txt"
    fit: str = "fit.json"

    def path(self, name: str) -> str:
        return os.path.join(self.directory, getattr(self, name))


@dataclass
class RunConfig:
    """Configuration of one CLI command"""
    command: str
    seed: Optional[int] = None
    model: Optional[CovModel] = None
    periods: Optional[int] = None
    tables: List[str] = field(default_factory=lambda: ["all"])
    simulation: Optional[SimulationSpec] = None
    panel_path: Optional[str] = None
    train_periods: Optional[int] = None
    family: EdFamily = field(default_factory=EdFamily.poisson)
    add_intercept: bool = True
    methods: List[PremiumMethod] = field(default_factory=lambda: [
        PremiumMethod.NAIVE, PremiumMethod.STATIC, PremiumMethod.PROPOSED, PremiumMethod.TRUE
    ])
    evaluation: EvaluationSettings = field(default_factory=EvaluationSettings)
    study: Optional[StudySpec] = None
    output: OutputSpec = field(default_factory=OutputSpec)

    def validate(self) -> List[str]:
        """Validate configuration and return list of errors"""
        errors = []
        if self.command not in COMMANDS:
            errors.append(f"Unknown command '{self.command}'")
        if self.seed is not None and self.seed < 0:
            errors.append("seed must be non-negative")

        if self.command == "factors":
            if self.model is None:
                errors.append("factors needs a model block")
            else:
                errors.extend(self.model.validate())
                T = self.factor_periods
                if T < 1 or T + 1 > len(self.model.lambdas):
                    errors.append(
                        f"periods={T} needs {T + 1} lambdas, model has {len(self.model.lambdas)}"
                    )
        elif self.command == "tables":
            for table_id in self.tables:
                if table_id != "all" and table_id not in TABLE_IDS:
                    errors.append(f"Unknown table id '{table_id}'")
        elif self.command == "simulate":
            if self.simulation is None:
                errors.append("simulate needs a simulation block")
            else:
                errors.extend(self.simulation.validate())
        elif self.command in ("evaluate", "fit"):
            studying = self.command == "evaluate" and self.study is not None
            if not self.panel_path and not studying:
                errors.append(f"{self.command} needs input.panel")
            if self.train_periods is not None and self.train_periods < 1:
                errors.append("input.train_periods must be at least 1")
            errors.extend(self.family.validate())
            if self.command == "evaluate":
                errors.extend(self.evaluation.validate())
                if not self.methods:
                    errors.append("evaluation.methods must not be empty")
                if studying:
                    errors.extend(self.study.validate())
                elif PremiumMethod.EXACT_SMC in self.methods and self.evaluation.state is None:
                    errors.append("exact_smc needs evaluation.state")
        return errors

    @property
    def factor_periods(self) -> int:
        if self.periods is not None:
            return self.periods
        return len(self.model.lambdas) - 1 if self.model else 0


def _enum(enum_cls, value, where: str):
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{where}: '{value}' is not one of {allowed}") from None


def parse_family(data: Optional[Dict[str, Any]]) -> EdFamily:
    if not data:
        return EdFamily.poisson()
    kind = _enum(FamilyKind, data.get("kind", "poisson"), "family.kind")
    return EdFamily(kind, float(data.get("psi", 1.0)))


def parse_state(data: Dict[str, Any]) -> StateSpec:
    family = _enum(StateFamily, data.get("family"), "state.family")
    try:
        if family == StateFamily.BGAR1:
            return StateSpec.bgar1(float(data["sigma2"]), float(data["rho"]))
        if family == StateFamily.ARG1:
            return StateSpec.arg1(float(data["rho"]), float(data["c"]), float(data["delta"]))
        if family == StateFamily.GAR1:
            return StateSpec.gar1(float(data["shape"]), float(data["rate"]), float(data["rho"]))
        if family == StateFamily.IID:
            return StateSpec(StateFamily.IID, sigma2=float(data["sigma2"]))
        return StateSpec.constant(float(data.get("sigma2", 0.0)))
    except KeyError as e:
        raise ConfigError(f"state block for {family.value} is missing {e}") from None


def parse_model(data: Dict[str, Any], periods: Optional[int] = None) -> CovModel:
    variant = _enum(CovVariant, data.get("variant"), "model.variant")
    lambdas = data.get("lambdas")
    if lambdas is None and periods is not None:
        lambdas = [1.0] * (periods + 1)
    try:
        if variant == CovVariant.ARMA11:
            T = periods if periods is not None else len(lambdas) - 1
            return CovModel.arma11(float(data["phi"]), float(data["theta"]),
                                   float(data["sigma_e_sq"]), T, lambdas)
        if variant == CovVariant.INAR1_HET:
            if periods is None:
                raise ConfigError("inar1_het needs periods")
            return CovModel.inar1_het(float(data["lambda"]), float(data["p"]),
                                      float(data["psi0"]), periods)
        if lambdas is None:
            raise ConfigError("model.lambdas is required")
        family = parse_family(data.get("family"))
        if variant == CovVariant.STATIC_RE:
            return CovModel.static_re(float(data["sigma2"]), lambdas, family)
        if variant == CovVariant.DYNAMIC_AR1:
            return CovModel.dynamic_ar1(float(data["sigma2"]), float(data["rho"]), lambdas, family)
        if variant == CovVariant.TWO_COMPONENT:
            vfn = _enum(VarianceFn, data.get("variance_fn", "identity"), "model.variance_fn")
            return CovModel.two_component(float(data["sigma1_sq"]), float(data["sigma2_sq"]),
                                          float(data["rho"]), float(data["psi"]), lambdas, vfn)
        return CovModel.arbitrary_acf(float(data["sigma2"]), data["correlations"], lambdas, family)
    except KeyError as e:
        raise ConfigError(f"model block for {variant.value} is missing {e}") from None


def parse_study(data: Dict[str, Any]) -> StudySpec:
    scenarios = None
    if "scenarios" in data:
        try:
            scenarios = [(float(s["rho"]), float(s["sigma2"])) for s in data["scenarios"]]
        except (KeyError, TypeError) as e:
            raise ConfigError(f"study.scenarios entries need rho and sigma2: {e}") from None
    cov = data.get("covariates", {})
    return StudySpec(
        scenarios=scenarios,
        seeds=[int(s) for s in data.get("seeds", [1, 2, 3, 4, 5])],
        n_policies=int(data.get("n_policies", 500)),
        periods=int(data.get("periods", 5)),
        beta=[float(b) for b in data.get("beta", [-3.0, 2.0])],
        covariates=CovariateLaw(float(cov.get("mean", 0.0)), float(cov.get("variance", 0.6))),
    )


class RunConfigLoader:
    """Manages run configuration files"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self.config: Optional[RunConfig] = None

    def load_from_file(self, path: str) -> RunConfig:
        """Load configuration from JSON or YAML file"""
        if not os.path.exists(path):
            raise ConfigError(f"Configuration file not found: {path}")

        with open(path, 'r') as f:
            if path.endswith('.json'):
                data = json.load(f)
            elif path.endswith(('.yml', '.yaml')):
                data = yaml.safe_load(f)
            else:
                raise ConfigError("Configuration file must be JSON or YAML")

        if not isinstance(data, dict):
            raise ConfigError(f"Configuration file {path} does not hold a mapping")
        self.config_path = path
        return self.from_dict(data)

    def from_dict(self, data: Dict[str, Any]) -> RunConfig:
        """Create RunConfig from dictionary"""
        command = str(data.get("command", ""))
        periods = data.get("periods")
        config = RunConfig(command=command, seed=data.get("seed"), periods=periods)

        if "model" in data:
            config.model = parse_model(data["model"], periods)
        if "tables" in data:
            tables = data["tables"]
            config.tables = [tables] if isinstance(tables, str) else list(tables)

        if "simulation" in data:
            sim = data["simulation"]
            if "state" not in sim:
                raise ConfigError("simulation.state is required")
            cov = sim.get("covariates", {})
            config.simulation = SimulationSpec(
                state=parse_state(sim["state"]),
                family=parse_family(sim.get("family")),
                n_policies=int(sim.get("n_policies", 500)),
                periods=int(sim.get("periods", 5)),
                beta=[float(b) for b in sim.get("beta", [-3.0, 2.0])],
                covariates=CovariateLaw(float(cov.get("mean", 0.0)),
                                        float(cov.get("variance", 0.6))),
            )

        source = data.get("input", {})
        config.panel_path = source.get("panel")
        config.train_periods = source.get("train_periods")

        if "estimation" in data:
            est = data["estimation"]
            config.family = parse_family(est.get("family"))
            config.add_intercept = bool(est.get("add_intercept", True))

        if "evaluation" in data:
            ev = data["evaluation"]
            if "methods" in ev:
                config.methods = [_enum(PremiumMethod, m, "evaluation.methods")
                                  for m in ev["methods"]]
            family = parse_family(ev.get("family"))
            config.family = family
            config.evaluation = EvaluationSettings(
                family=family,
                state=parse_state(ev["state"]) if ev.get("state") else None,
                n_holdout_copies=int(ev.get("n_holdout_copies", 100)),
                n_particles=int(ev.get("n_particles", 2000)),
                n_replicates=int(ev.get("n_replicates", 16)),
                fit_glm=bool(ev.get("fit_glm", True)),
                static_sigma2=_enum(StaticSigmaMode, ev.get("static_sigma2", "reestimate"),
                                    "evaluation.static_sigma2"),
                harvey_a0=ev.get("harvey_a0"),
                harvey_alpha=ev.get("harvey_alpha"),
            )

        if "study" in data:
            config.study = parse_study(data["study"] or {})

        if "output" in data:
            config.output = OutputSpec(**data["output"])

        errors = config.validate()
        if errors:
            raise ConfigError(f"Configuration validation failed: {', '.join(errors)}")

        self.config = config
        return config

    def save_to_file(self, config: RunConfig, path: str):
        """Save configuration to file"""
        data = self.to_dict(config)

        with open(path, 'w') as f:
            if path.endswith('.json'):
                json.dump(data, f, indent=2)
            elif path.endswith(('.yml', '.yaml')):
                yaml.dump(data, f, default_flow_style=False, sort_keys=False)
            else:
                raise ConfigError("Configuration file must be JSON or YAML")

    def to_dict(self, config: RunConfig) -> Dict[str, Any]:
        """Convert RunConfig to dictionary"""
        data: Dict[str, Any] = {"command": config.command}
        if config.seed is not None:
            data["seed"] = config.seed
        if config.periods is not None:
            data["periods"] = config.periods
        if config.model is not None:
            data["model"] = _model_to_dict(config.model)
        if config.command == "tables":
            data["tables"] = list(config.tables)
        if config.simulation is not None:
            sim = config.simulation
            data["simulation"] = {
                "n_policies": sim.n_policies,
                "periods": sim.periods,
                "state": sim.state.to_dict(),
                "family": {"kind": sim.family.kind.value, "psi": sim.family.psi},
                "beta": list(sim.beta),
                "covariates": {"mean": sim.covariates.mean, "variance": sim.covariates.variance},
            }
        if config.panel_path:
            data["input"] = {"panel": config.panel_path}
            if config.train_periods is not None:
                data["input"]["train_periods"] = config.train_periods
        family = {"kind": config.family.kind.value, "psi": config.family.psi}
        if config.command == "fit":
            data["estimation"] = {"family": family, "add_intercept": config.add_intercept}
        if config.command == "evaluate":
            ev = config.evaluation
            data["evaluation"] = {
                "methods": [m.value for m in config.methods],
                "family": family,
                "n_holdout_copies": ev.n_holdout_copies,
                "n_particles": ev.n_particles,
                "n_replicates": ev.n_replicates,
                "fit_glm": ev.fit_glm,
                "static_sigma2": ev.static_sigma2.value,
            }
            if ev.state is not None:
                data["evaluation"]["state"] = ev.state.to_dict()
            if ev.harvey_a0 is not None:
                data["evaluation"]["harvey_a0"] = ev.harvey_a0
            if ev.harvey_alpha is not None:
                data["evaluation"]["harvey_alpha"] = ev.harvey_alpha
        if config.study is not None:
            data["study"] = _study_to_dict(config.study)
        data["output"] = dict(vars(config.output))
        return data

    def create_default_config(self, command: str) -> RunConfig:
        """Create a default configuration for a command"""
        examples = self.get_example_configs()
        if command not in examples:
            raise ConfigError(f"Unknown command '{command}'")
        return examples[command]

    def get_example_configs(self) -> Dict[str, RunConfig]:
        """Get one example configuration per command"""
        return {
            'factors': RunConfig(
                command="factors",
                model=CovModel.dynamic_ar1(0.5, 0.6, [1.0] * 6, EdFamily.poisson()),
                periods=5,
            ),
            'tables': RunConfig(command="tables", tables=["all"]),
            'simulate': RunConfig(
                command="simulate",
                seed=20240121,
                simulation=SimulationSpec(state=StateSpec.bgar1(1.0, 0.6)),
            ),
            'evaluate': RunConfig(
                command="evaluate",
                seed=20240121,
                panel_path="panel.csv",
                evaluation=EvaluationSettings(state=StateSpec.bgar1(1.0, 0.6)),
            ),
            'fit': RunConfig(command="fit", panel_path="panel.csv"),
        }


def _study_to_dict(study: StudySpec) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "seeds": list(study.seeds),
        "n_policies": study.n_policies,
        "periods": study.periods,
        "beta": list(study.beta),
        "covariates": {"mean": study.covariates.mean, "variance": study.covariates.variance},
    }
    if study.scenarios is not None:
        data["scenarios"] = [{"rho": rho, "sigma2": sigma2} for rho, sigma2 in study.scenarios]
    return data


def _model_to_dict(model: CovModel) -> Dict[str, Any]:
    data = model.summary()
    if model.variant == CovVariant.INAR1_HET:
        data["lambda"] = data.pop("inar_lambda")
        data.pop("lambdas")
    if "family" in data:
        data["family"] = {"kind": data["family"], "psi": data.pop("psi")}
    return data
