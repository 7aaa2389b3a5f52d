from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from config_store import (
    DefaultsModel,
    DiagnoseSettings,
    GibbsSettings,
    PriorConfig,
    ScenarioConfig,
    load_config,
    parse_prior,
    read_json_file,
)
from core_linalg import DesignMatrix, ModelIndicator, least_squares_fit, sum_squares
from data_io import InputError, RegressionData, intercept_of, read_design_csv, read_regression_csv
from db import write_action_log
from design_diagnostics import diagnose_report
from priors_penalties import HyperParams, PriorSpec, penalty_schedule
from reporting import csv_path_for, rows_to_csv_text, to_json_text, with_meta, write_csv, write_json
from risk_simulator import REPORT_COLUMNS, ReplicationError, adaptivity_grid, compare_estimators
from scenario_templates import resolve_scenario
from selector_exhaustive import BudgetExceededError, map_select
from selector_ssvs import run_ssvs


EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

COMMANDS = ("select", "ssvs", "diagnose", "simulate", "penalty")
PENALTY_COLUMNS = ("k", "prior", "log_prior", "L", "pen")
TOP_MODEL_COLUMNS = ("rank", "model", "selected", "size", "frequency", "criterion")
SPECTRUM_COLUMNS = ("k", "phi_min", "phi_max", "tau", "exact", "subsets_evaluated")


@dataclass(slots=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    config: Optional[str] = None
    scenario: Optional[str] = None
    prior: Optional[str] = None
    criterion: Optional[str] = None
    gamma: Optional[float] = None
    sigma_sq: Optional[float] = None
    estimate_sigma: bool = False
    seed: Optional[int] = None
    budget: Optional[int] = None
    sweeps: Optional[int] = None
    burn_in: Optional[int] = None
    chains: Optional[int] = None
    top_k: Optional[int] = None
    workers: Optional[int] = None
    output: Optional[str] = None
    csv_output: Optional[str] = None
    intercept: bool = True
    include_meta: bool = True
    p: Optional[int] = None
    rank: Optional[int] = None
    threshold: Optional[float] = None
    k_max: Optional[int] = None


@dataclass(slots=True)
class CliExecutionResult:
    ok: bool
    message: str
    exit_code: int = EXIT_OK
    payload: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)


def _short(value: str, limit: int = 220) -> str:
    text = " ".join(str(value or "").split())
    if len(text) <= limit:
        return text
    return text[:limit].rstrip() + "..."


def _log(config: RunConfig, result: CliExecutionResult) -> None:
    try:
        write_action_log(
            config.command,
            "success" if result.ok else "failed",
            result.exit_code,
            f"input={config.input or config.scenario or '-'} msg={_short(result.message, 180)}",
        )
    except Exception:
        pass


def _check_file(path: Optional[str], flag: str) -> str:
    if not path:
        raise InputError(f"{flag} is required")
    if not os.path.isfile(path):
        raise InputError(f"File not found: {path}")
    return path


def _prior_config(config: RunConfig, defaults: DefaultsModel) -> PriorConfig:
    try:
        if config.criterion:
            return PriorConfig(kind="binomial", criterion=str(config.criterion).upper())
        if config.prior:
            return parse_prior(config.prior)
    except (ValidationError, ValueError) as exc:
        raise InputError(f"invalid prior: {exc}") from exc
    return defaults.prior


def _gamma(config: RunConfig, defaults: DefaultsModel, p: int) -> float:
    if config.gamma is not None:
        return float(config.gamma)
    if defaults.gamma is not None:
        return float(defaults.gamma)
    return float(p)


def _sigma_sq(config: RunConfig, data: RegressionData) -> Tuple[float, bool]:
    if config.sigma_sq is not None:
        return float(config.sigma_sq), False
    if not config.estimate_sigma:
        raise InputError("--sigma-sq is required (or pass --estimate-sigma)")
    X = data.X
    dof = data.n - X.r - (1 if data.intercept else 0)
    if dof <= 0:
        raise ValueError(f"cannot estimate sigma^2: residual degrees of freedom {dof} <= 0")
    rss = least_squares_fit(X, data.y, ModelIndicator(tuple(range(X.p)))).rss
    estimate = rss / dof
    if estimate <= 0:
        raise ValueError("cannot estimate sigma^2: the saturated fit is exact")
    logging.warning(
        "[CLI] sigma^2 estimated from the saturated fit (%.6g on %d df); selection theory assumes it is known",
        estimate,
        dof,
    )
    return estimate, True


def _emit_json(config: RunConfig, payload: Dict[str, Any]) -> Optional[str]:
    full = with_meta(payload, config.command, config.include_meta)
    if config.output:
        write_json(config.output, full)
        return None
    return to_json_text(full)


def _emit_csv(path: Optional[str], rows: List[Dict[str, Any]], columns) -> None:
    if path:
        write_csv(path, rows, columns)


def _intercept_only(data: RegressionData) -> Dict[str, Any]:
    rss = sum_squares(data.y)
    return {
        "model": [],
        "selected": [],
        "coefficients": {},
        "intercept": float(data.y_mean) if data.intercept else 0.0,
        "rss": rss,
        "criterion": rss,
        "penalty": 0.0,
        "models_evaluated": 1,
        "saturated": False,
        "method": "intercept_only",
    }


def _load_regression(config: RunConfig) -> RegressionData:
    return read_regression_csv(_check_file(config.input, "--input"), intercept=config.intercept)


def _hyper(config: RunConfig, defaults: DefaultsModel, data: RegressionData) -> Tuple[PriorSpec, HyperParams, Dict]:
    X = data.X
    gamma = _gamma(config, defaults, X.p)
    sigma_sq, estimated = _sigma_sq(config, data)
    prior = _prior_config(config, defaults).to_spec(X.p, X.n, gamma)
    info = {
        "n": X.n,
        "p": X.p,
        "r": X.r,
        "gamma": gamma,
        "sigma_sq": sigma_sq,
        "sigma_sq_estimated": estimated,
        "prior": prior.to_dict(),
        "fit_intercept": data.intercept,
    }
    return prior, HyperParams(gamma, sigma_sq), info


def cmd_select(config: RunConfig) -> CliExecutionResult:
    defaults = load_config()
    data = _load_regression(config)
    if data.X is None or data.X.r == 0:
        payload = _intercept_only(data)
        return CliExecutionResult(True, "no usable predictors; intercept-only model", payload=_emit_json(config, payload))

    prior, hp, info = _hyper(config, defaults, data)
    budget = config.budget if config.budget is not None else defaults.budget
    workers = config.workers if config.workers is not None else defaults.workers
    result = map_select(data.X, data.y, prior, hp, budget=budget, workers=workers)
    payload = result.to_dict(data.X)
    payload["intercept"] = intercept_of(data, result.fit.beta_hat)
    payload.update(info)
    names = ", ".join(payload["selected"]) or "(none)"
    return CliExecutionResult(
        True,
        f"selected {names} from {result.models_evaluated} models",
        payload=_emit_json(config, payload),
    )


def cmd_penalty(config: RunConfig) -> CliExecutionResult:
    defaults = load_config()
    if config.input:
        data = _load_regression(config)
        if data.X is None:
            raise InputError("input has no predictor columns")
        p, r, n = data.X.p, data.X.r, data.X.n
    else:
        if config.p is None:
            raise InputError("--p is required when no --input is given")
        p = int(config.p)
        r = int(config.rank) if config.rank is not None else p
        n = max(p, 2)
    gamma = _gamma(config, defaults, p)
    sigma_sq = float(config.sigma_sq) if config.sigma_sq is not None else 1.0
    prior = _prior_config(config, defaults).to_spec(p, n, gamma)
    schedule = penalty_schedule(p, r, prior, HyperParams(gamma, sigma_sq))
    text = rows_to_csv_text(schedule.as_rows(), PENALTY_COLUMNS)
    if config.output:
        write_csv(config.output, schedule.as_rows(), PENALTY_COLUMNS)
        return CliExecutionResult(True, f"penalty schedule for p={p}, r={r} written to {config.output}")
    return CliExecutionResult(True, f"penalty schedule for p={p}, r={r}", payload=text)


def cmd_ssvs(config: RunConfig) -> CliExecutionResult:
    defaults = load_config()
    data = _load_regression(config)
    if data.X is None or data.X.r == 0:
        payload = {"result": _intercept_only(data), "summary": None}
        return CliExecutionResult(True, "no usable predictors; intercept-only model", payload=_emit_json(config, payload))

    settings = defaults.gibbs
    if config.config:
        settings = GibbsSettings.model_validate(read_json_file(config.config))
    overrides = {
        "sweeps": config.sweeps,
        "burn_in": config.burn_in,
        "chains": config.chains,
        "top_k": config.top_k,
        "seed": config.seed,
    }
    settings = settings.model_copy(update={k: v for k, v in overrides.items() if v is not None})
    settings = GibbsSettings.model_validate(settings.model_dump())
    workers = config.workers if config.workers is not None else defaults.workers
    try:
        cfg = settings.to_config(workers)
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    prior, hp, info = _hyper(config, defaults, data)
    summary, result = run_ssvs(data.X, data.y, prior, hp, cfg)
    selected = result.to_dict(data.X)
    selected["intercept"] = intercept_of(data, result.fit.beta_hat)
    payload = {"result": selected, "summary": summary.to_dict(data.X), "settings": settings.model_dump()}
    payload.update(info)
    _emit_csv(config.csv_output, summary.top_model_rows(data.X), TOP_MODEL_COLUMNS)
    names = ", ".join(selected["selected"]) or "(none)"
    return CliExecutionResult(
        True,
        f"best visited model {names}; {len(summary.visit_counts)} distinct models",
        payload=_emit_json(config, payload),
    )


def _centered_design(X: DesignMatrix, intercept: bool) -> DesignMatrix:
    if not intercept:
        return X
    entries = np.asarray(X.entries)
    return DesignMatrix.from_array(entries - entries.mean(axis=0), column_names=X.column_names)


def cmd_diagnose(config: RunConfig) -> CliExecutionResult:
    defaults = load_config()
    if config.intercept:
        logging.info("[DIAG] centering design columns; pass --no-intercept to use them as given")
    X = _centered_design(read_design_csv(_check_file(config.input, "--input")), config.intercept)
    settings = DiagnoseSettings(budget=defaults.diag_budget)
    if config.config:
        settings = DiagnoseSettings.model_validate({"budget": defaults.diag_budget, **read_json_file(config.config)})
    overrides = {"k_max": config.k_max, "threshold": config.threshold, "budget": config.budget, "seed": config.seed}
    settings = DiagnoseSettings.model_validate(
        {**settings.model_dump(), **{k: v for k, v in overrides.items() if v is not None}}
    )
    if settings.beta is not None and len(settings.beta) != X.p:
        raise InputError(f"beta has {len(settings.beta)} entries, design has p={X.p}")
    workers = config.workers if config.workers is not None else defaults.workers
    report = diagnose_report(
        X,
        k_max=settings.k_max,
        budget=settings.budget,
        seed=settings.seed,
        workers=workers,
        threshold=settings.threshold,
        beta=np.asarray(settings.beta) if settings.beta is not None else None,
        sigma_sq=settings.sigma_sq,
        c4=settings.c4,
        assumption_d=settings.assumption_d.model_dump() if settings.assumption_d else None,
        C1=settings.C1,
        C2=settings.C2,
    )
    report["column_names"] = list(X.column_names)
    report["centered"] = bool(config.intercept)
    _emit_csv(config.csv_output, report["spectra"], SPECTRUM_COLUMNS)
    label = report["classification"]
    return CliExecutionResult(
        True,
        f"tau[r]={label['tau_r']:.6g} ({label['label']})",
        payload=_emit_json(config, report),
    )


def _scenario(config: RunConfig) -> ScenarioConfig:
    if config.scenario:
        return resolve_scenario(config.scenario)
    if config.config:
        return ScenarioConfig.model_validate(read_json_file(_check_file(config.config, "--config")))
    raise InputError("--scenario or --config is required")


def cmd_simulate(config: RunConfig) -> CliExecutionResult:
    defaults = load_config()
    scenario_cfg = _scenario(config)
    spec = scenario_cfg.to_spec(seed=config.seed)
    budget = config.budget if config.budget is not None else defaults.budget
    workers = config.workers if config.workers is not None else defaults.workers
    csv_target = config.csv_output or (csv_path_for(config.output) if config.output else None)

    if scenario_cfg.p0_grid:
        grid = adaptivity_grid(spec, scenario_cfg.p0_grid, workers=workers, budget=budget)
        rows = [row for report in grid.reports for row in report.to_rows()]
        _emit_csv(csv_target, rows, REPORT_COLUMNS)
        return CliExecutionResult(
            True,
            f"{spec.name}: adaptivity grid over p0={list(grid.p0_values)}",
            payload=_emit_json(config, {"grid": grid.to_dict()}),
        )

    report = compare_estimators(
        spec,
        workers=workers,
        budget=budget,
        ratio_ceiling=defaults.oracle_ratio_ceiling,
    )
    _emit_csv(csv_target, report.to_rows(), REPORT_COLUMNS)
    best = min(report.estimators, key=lambda e: e.mean)
    return CliExecutionResult(
        True,
        f"{spec.name}: lowest risk {best.name} ({best.mean:.4f}), oracle {report.oracle_risk:.4f}",
        payload=_emit_json(config, report.to_dict()),
    )


_DISPATCH: Dict[str, Callable[[RunConfig], CliExecutionResult]] = {
    "select": cmd_select,
    "ssvs": cmd_ssvs,
    "diagnose": cmd_diagnose,
    "simulate": cmd_simulate,
    "penalty": cmd_penalty,
}


def _budget_cause(exc: BaseException) -> Optional[BudgetExceededError]:
    if isinstance(exc, BudgetExceededError):
        return exc
    if isinstance(exc, ReplicationError) and isinstance(exc.cause, BudgetExceededError):
        return exc.cause
    return None


def execute(config: RunConfig) -> CliExecutionResult:
    handler = _DISPATCH.get(str(config.command or "").lower())
    if handler is None:
        result = CliExecutionResult(False, f"Unknown command: {config.command}", EXIT_INPUT)
        _log(config, result)
        return result

    try:
        result = handler(config)
    except (BudgetExceededError, ReplicationError) as exc:
        budget = _budget_cause(exc)
        if budget is not None:
            hint = " Use 'ssvs' for a stochastic search instead." if config.command == "select" else ""
            result = CliExecutionResult(False, f"{budget}.{hint}", EXIT_BUDGET)
        else:
            result = CliExecutionResult(False, str(exc), EXIT_DOMAIN)
    except InputError as exc:
        result = CliExecutionResult(False, str(exc), EXIT_INPUT, extra={"line": exc.line})
    except (ValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        result = CliExecutionResult(False, f"invalid input: {exc}", EXIT_INPUT)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        result = CliExecutionResult(False, str(exc), EXIT_DOMAIN)

    if not result.ok:
        logging.error("[CLI] %s failed (exit %d): %s", config.command, result.exit_code, result.message)
    else:
        logging.info("[CLI] %s: %s", config.command, result.message)
    _log(config, result)
    return result
