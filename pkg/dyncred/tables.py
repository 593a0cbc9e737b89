"""Reference factor tables reproduced from the closed forms and the normal equations"""

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence

from .credibility import closed_form_factors_model1, credibility_factors
from .errors import UnknownTable
from .persistence import write_rows_csv
from .types import CovModel, EdFamily, VarianceFn
from .utils.logging import CredibilityLogger


# a-priori means lambda_1..lambda_5 of the factor table cases; lambda_6 = 1
LAMBDA_CASES: Dict[str, List[float]] = {
    "a": [1.0, 1.0, 1.0, 1.0, 1.0],
    "b": [0.001, 0.01, 0.1, 1.0, 10.0],
    "c": [10.0, 1.0, 0.1, 0.01, 0.001],
}
RHO_CASES: Dict[str, float] = {"1": 0.3, "2": 0.6}
CASE_SIGMA2 = 0.5
GAMMA_PSI = 0.5
GAMMA_RHO = 0.3

# (scenario, psi, sigma2_sq) with sigma1_sq = 1 and rho = 0.8
TWO_COMPONENT_SCENARIOS = [("I", 0.01, 1.0), ("II", 0.1, 1.0), ("III", 1.0, 1.0), ("IV", 0.1, 0.01)]

SEMIPARAMETRIC_ACF = (0.733, 0.524, 0.504, 0.483, 0.401)
ARMA_REMARK = (0.5, -0.2, 1.0)

_logger = CredibilityLogger.get_logger("tables")


@dataclass
class GoldenTable:
    """Rows of one reference table and the precision they are printed with"""
    table_id: str
    title: str
    decimals: int
    rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def file_name(self) -> str:
        return f"{self.table_id}.csv"


def _verdict(flag: bool) -> str:
    return "yes" if flag else "no"


def _case_model(case: str, family: EdFamily) -> CovModel:
    rho = RHO_CASES[case[0]]
    lambdas = LAMBDA_CASES[case[-1]] + [1.0]
    return CovModel.dynamic_ar1(CASE_SIGMA2, rho, lambdas, family)


def _values(prefix: str, values: Sequence[float], scale: float = 1.0) -> Dict[str, float]:
    return {f"{prefix}_{t}": scale * float(v) for t, v in enumerate(values, start=1)}


def two_component_table() -> GoldenTable:
    table = GoldenTable("two-component", "Two-component model, sigma1^2 = 1, rho = 0.8", 3)
    for scenario, psi, sigma2_sq in TWO_COMPONENT_SCENARIOS:
        model = CovModel.two_component(1.0, sigma2_sq, 0.8, psi, [1.0] * 6, VarianceFn.IDENTITY)
        f = credibility_factors(model, 5)
        row: Dict[str, Any] = {"scenario": scenario, "psi": psi, "sigma2_sq": sigma2_sq}
        row.update(_values("alpha", f.alpha))
        row["monotone"] = _verdict(f.isotonic_star)
        table.rows.append(row)
    return table


def _poisson_table(table_id: str, title: str, standardized: bool) -> GoldenTable:
    table = GoldenTable(table_id, title, 3)
    for case in ("1.a", "1.b", "1.c", "2.a", "2.b", "2.c"):
        f = closed_form_factors_model1(_case_model(case, EdFamily.poisson()), 5)
        values = f.alpha_star if standardized else f.alpha
        row: Dict[str, Any] = {"case": case, "rho": RHO_CASES[case[0]]}
        row.update(_values("alpha_star" if standardized else "alpha", values, 1e3))
        table.rows.append(row)
    return table


def poisson_std_table() -> GoldenTable:
    return _poisson_table("poisson-std", "Poisson-gamma standardized factors x 1e-3", True)


def poisson_nonstd_table() -> GoldenTable:
    return _poisson_table("poisson-nonstd", "Poisson-gamma factors x 1e-3", False)


def _gamma_case_model(case: str) -> CovModel:
    # every gamma case uses rho = 0.3; lambda_6 repeats lambda_1
    lambdas = LAMBDA_CASES[case[-1]]
    family = EdFamily.gamma(GAMMA_PSI)
    return CovModel.dynamic_ar1(CASE_SIGMA2, GAMMA_RHO, lambdas + [lambdas[0]], family)


def gamma_both_table() -> GoldenTable:
    """Raw factors for the 1.x cases, standardized factors for the 2.x cases"""
    table = GoldenTable("gamma-both", "Gamma-gamma factors x 1e-3, rho = 0.3, psi = 0.5", 3)
    for case in ("1.a", "1.b", "2.a", "2.b"):
        f = closed_form_factors_model1(_gamma_case_model(case), 5)
        quantity = "alpha" if case[0] == "1" else "alpha_star"
        row: Dict[str, Any] = {"case": case, "rho": GAMMA_RHO, "quantity": quantity}
        row.update(_values("f", f.alpha if quantity == "alpha" else f.alpha_star, 1e3))
        table.rows.append(row)
    return table


def semiparametric_table() -> GoldenTable:
    table = GoldenTable("semiparametric", "Arbitrary autocorrelation, sigma^2 = 1, lambda = 1", 2)
    for T in (3, 4, 5):
        model = CovModel.arbitrary_acf(1.0, SEMIPARAMETRIC_ACF, [1.0] * (T + 1))
        f = credibility_factors(model, T)
        row: Dict[str, Any] = {"T": T}
        # periods 1..5; shorter histories leave the trailing columns empty
        row.update({f"alpha_{t}": (float(f.alpha[t - 1]) if t <= T else "") for t in range(1, 6)})
        row["monotone"] = _verdict(f.isotonic_star)
        table.rows.append(row)
    return table


def arma_remark_table() -> GoldenTable:
    phi, theta, sigma_e_sq = ARMA_REMARK
    table = GoldenTable("arma-remark", "ARMA(1,1) deviations, T = 5", 3)
    f = credibility_factors(CovModel.arma11(phi, theta, sigma_e_sq, 5), 5)
    row: Dict[str, Any] = {"phi": phi, "theta": theta, "sigma_e_sq": sigma_e_sq}
    row.update(_values("alpha", f.alpha))
    row["regular"] = _verdict(f.regular)
    table.rows.append(row)
    return table


TABLES: Dict[str, Callable[[], GoldenTable]] = {
    "two-component": two_component_table,
    "poisson-std": poisson_std_table,
    "poisson-nonstd": poisson_nonstd_table,
    "gamma-both": gamma_both_table,
    "semiparametric": semiparametric_table,
    "arma-remark": arma_remark_table,
}


def resolve_table_ids(requested: Sequence[str]) -> List[str]:
    """Expand 'all' and reject unknown ids"""
    ids: List[str] = []
    for table_id in requested:
        if table_id == "all":
            ids.extend(TABLES)
        elif table_id in TABLES:
            ids.append(table_id)
        else:
            raise UnknownTable(
                f"Unknown table '{table_id}'; choose from {', '.join(TABLES)} or all"
            )
    return list(dict.fromkeys(ids))


def build_table(table_id: str) -> GoldenTable:
    if table_id not in TABLES:
        raise UnknownTable(f"Unknown table '{table_id}'; choose from {', '.join(TABLES)} or all")
    return TABLES[table_id]()


def write_table(table: GoldenTable, directory: str) -> str:
    path = os.path.join(directory, table.file_name)
    write_rows_csv(table.rows, path, decimals=table.decimals)
    _logger.info(f"Wrote {table.table_id} ({len(table.rows)} rows) to {path}")
    return path
