"""Panel, factor and report files"""

import csv
import json
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParams
from .types import (
    ClaimPanel,
    ClaimRecord,
    CredibilityFactors,
    GlmFit,
    MomentEstimates,
    PremiumMethod,
    PremiumReport,
)


PANEL_COLUMNS = ["policy_id", "period", "lambda", "y", "true_r"]
SIGNIFICANT_DIGITS = 10


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _round(value: float) -> float:
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def _round_all(values) -> List[float]:
    return [_round(float(v)) for v in values]


def metadata_path(panel_path: str) -> str:
    return panel_path + ".meta.json"


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_json(data: Dict[str, Any], path: str):
    _ensure_parent(path)
    with open(path, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=False)
        f.write("\n")


def write_panel_csv(panel: ClaimPanel, path: str):
    """
    Write a panel as CSV plus a metadata sidecar.

    Columns are policy_id, period, lambda, y, true_r and then x1..xk; floats use
    %.12g and an unknown true_r is left empty.
    """
    k = panel.n_covariates
    _ensure_parent(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(PANEL_COLUMNS + [f"x{j}" for j in range(1, k + 1)])
        for r in panel.records:
            if len(r.covariates) != k:
                raise DimensionMismatch(
                    f"Record {r.policy_id}/{r.period} has {len(r.covariates)} covariates, expected {k}"
                )
            writer.writerow(
                [r.policy_id, r.period, _fmt(r.lam), _fmt(r.y),
                 "" if r.true_r is None else _fmt(r.true_r)]
                + [_fmt(x) for x in r.covariates]
            )
    if panel.metadata:
        write_json(panel.metadata, metadata_path(path))


def read_panel_csv(path: str, train_periods: Optional[int] = None) -> ClaimPanel:
    """
    Read a panel CSV written by write_panel_csv (or by hand).

    Args:
        path: CSV path; a ``<path>.meta.json`` sidecar is read when present
        train_periods: Overrides the number of training periods

    Returns:
        Validated ClaimPanel
    """
    records = []
    with open(path, 'r', newline='') as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in PANEL_COLUMNS if c not in header and c != "true_r"]
        if missing:
            raise InvalidParams(f"Panel file {path} lacks columns {missing}")
        covariate_columns = [c for c in header if c.startswith("x") and c[1:].isdigit()]
        covariate_columns.sort(key=lambda c: int(c[1:]))
        for line, row in enumerate(reader, start=2):
            try:
                true_r = row.get("true_r") or ""
                records.append(ClaimRecord(
                    policy_id=row["policy_id"],
                    period=int(row["period"]),
                    lam=float(row["lambda"]),
                    y=float(row["y"]),
                    covariates=tuple(float(row[c]) for c in covariate_columns),
                    true_r=float(true_r) if true_r.strip() else None,
                ))
            except (TypeError, ValueError) as e:
                raise InvalidParams(f"{path}:{line}: {e}") from e

    metadata: Dict[str, Any] = {}
    if os.path.exists(metadata_path(path)):
        with open(metadata_path(path), 'r') as f:
            metadata = json.load(f)
    if train_periods is not None:
        metadata["train_periods"] = int(train_periods)

    panel = ClaimPanel(records=records, metadata=metadata)
    errors = panel.validate()
    if not records:
        errors.append("panel has no records")
    if errors:
        raise InvalidParams(f"Invalid panel {path}: {', '.join(errors)}")
    return panel


def factors_to_dict(factors: CredibilityFactors) -> Dict[str, Any]:
    """Factors rounded to 10 significant digits"""
    return {
        "alpha0": _round(factors.alpha0),
        "alpha": _round_all(factors.alpha),
        "alpha_star": _round_all(factors.alpha_star),
        "regular": bool(factors.regular),
        "isotonic": bool(factors.isotonic_star),
        "model": factors.model_echo,
        "warnings": list(factors.warnings),
    }


def format_factors(factors: CredibilityFactors) -> str:
    """Human readable factor listing"""
    verdict = {True: "yes", False: "no"}
    lines = [
        f"alpha0      {factors.alpha0:.6f}",
        f"alpha       ({', '.join(f'{a:.6f}' for a in factors.alpha)})",
        f"alpha*      ({', '.join(f'{a:.6f}' for a in factors.alpha_star)})",
        f"alpha* x1e3 ({', '.join(f'{1e3 * a:.3f}' for a in factors.alpha_star)})",
        f"regular     {verdict[bool(factors.regular)]}",
        f"isotonic    {verdict[bool(factors.isotonic_star)]}",
    ]
    return "\n".join(lines)


def write_report_csv(report: PremiumReport, path: str):
    _ensure_parent(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["policy_id", "method", "predicted"])
        for row in report.rows:
            writer.writerow([row.policy_id, row.method.value, _fmt(row.predicted)])


def report_summary_to_dict(report: PremiumReport) -> Dict[str, Any]:
    return {
        "methods": {
            method.value: {
                "rmse": _round(s.rmse),
                "mae": _round(s.mae),
                "relative_rmse_pct": _round(s.relative_rmse_pct),
                "relative_mae_pct": _round(s.relative_mae_pct),
            }
            for method, s in report.summary.items()
        },
        "warnings": list(report.warnings),
    }


def format_report_table(report: PremiumReport,
                        methods: Optional[Sequence[PremiumMethod]] = None) -> str:
    """Relative errors in percent of TRUE: RMSE block then MAE block"""
    methods = list(methods or report.summary.keys())
    header = "".join(f"{m.value.upper():>12}" for m in methods)
    lines = [f"{'RMSE':<8}{header}",
             f"{'':<8}" + "".join(f"{report.summary[m].relative_rmse_pct:>12.2f}" for m in methods),
             f"{'MAE':<8}{header}",
             f"{'':<8}" + "".join(f"{report.summary[m].relative_mae_pct:>12.2f}" for m in methods)]
    return "\n".join(lines) + "\n"


def format_study_table(rows: List[Dict[str, Any]], methods: Sequence[PremiumMethod]) -> str:
    """Simulation study rows in the same RMSE / MAE layout, one line per scenario"""
    names = "".join(f"{m.value.upper():>12}" for m in methods)
    lines = []
    for measure in ("rmse", "mae"):
        lines.append(f"{measure.upper():<6}{'rho':>6}{'sigma2':>8}{names}")
        for row in rows:
            values = "".join(f"{row[f'{measure}_{m.value}']:>12.2f}" for m in methods)
            lines.append(f"{'':<6}{row['rho']:>6.1f}{row['sigma2']:>8.1f}{values}")
    return "\n".join(lines) + "\n"


def write_report(report: PremiumReport, rows_path: str, summary_path: str, table_path: str):
    write_report_csv(report, rows_path)
    write_json(report_summary_to_dict(report), summary_path)
    _ensure_parent(table_path)
    with open(table_path, 'w') as f:
        f.write(format_report_table(report))



def write_study(rows: List[Dict[str, Any]], methods: Sequence[PremiumMethod], rows_path: str,
                table_path: str):
    write_rows_csv(rows, rows_path, decimals=2)
    _ensure_parent(table_path)
    with open(table_path, 'w') as f:
        f.write(format_study_table(rows, methods))

def fit_to_dict(fit: GlmFit, moments: Optional[MomentEstimates] = None,
                names: Optional[List[str]] = None) -> Dict[str, Any]:
    if names is None:
        names = ["(Intercept)"] + [f"x{j}" for j in range(1, len(fit.beta))]
    data: Dict[str, Any] = {
        "coefficients": {
            name: {"estimate": _round(b), "std_err": _round(se), "p_value": _round(p)}
            for name, b, se, p in zip(names, fit.beta, fit.std_err, fit.p_values)
        },
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        "log_likelihood": _round(fit.log_likelihood),
        "deviance": _round(fit.deviance),
    }
    warnings = list(fit.warnings)
    if moments is not None:
        data["moments"] = {
            "sigma2_hat": _round(moments.sigma2_hat),
            "rho_hat": _round(moments.rho_hat),
            "psi_hat": None if moments.psi_hat is None else _round(moments.psi_hat),
            "n_used": int(moments.n_used),
            "clamped": {k: bool(v) for k, v in sorted(moments.clamped.items())},
        }
        warnings.extend(moments.warnings)
    data["warnings"] = warnings
    return data


def write_rows_csv(rows: List[Dict[str, Any]], path: str, decimals: Optional[int] = None):
    """Plain CSV of dict rows in key order of the first row"""
    if not rows:
        raise InvalidParams(f"Nothing to write to {path}")
    _ensure_parent(path)
    columns = list(rows[0].keys())
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c], decimals) for c in columns])


def _cell(value: Any, decimals: Optional[int]) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "yes" if value else "no"
    if isinstance(value, (float, np.floating)):
        return f"{value:.{decimals}f}" if decimals is not None else _fmt(float(value))
    return str(value)
