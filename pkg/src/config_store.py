import json
import logging
import os
import sys
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from data_io import InputError
from design_diagnostics import DEFAULT_DIAG_BUDGET
from priors_penalties import PriorSpec, binomial_xi_for_criterion
from risk_simulator import DEFAULT_RATIO_CEILING, EstimatorSpec, ScenarioSpec
from selector_exhaustive import DEFAULT_BUDGET
from selector_ssvs import GibbsConfig


def _runtime_base_dir() -> str:
    if getattr(sys, "frozen", False):
        exe_dir = os.path.dirname(os.path.abspath(sys.executable))
        candidates = [
            os.path.join(exe_dir, "src"),
            os.path.join(os.path.dirname(exe_dir), "src"),
            os.path.join(os.getcwd(), "src"),
            exe_dir,
        ]
        for candidate in candidates:
            try:
                if os.path.isdir(candidate):
                    return os.path.abspath(candidate)
            except Exception:
                continue
        return os.path.abspath(exe_dir)
    return os.path.dirname(os.path.abspath(__file__))


BASE_DIR = _runtime_base_dir()
CONFIG_NAME = "mapsel_config.json"
SCENARIO_TEMPLATES_DIR = os.path.join(BASE_DIR, "scenarios")

CONFIG_CACHE = None
CONFIG_LAST_MODIFIED = 0.0
CONFIG_CACHE_PATH = ""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PriorConfig(_Strict):
    kind: Literal["binomial", "geometric", "uniform", "table"]
    xi: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    q: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    weights: List[float] = Field(default_factory=list)
    criterion: Optional[Literal["AIC", "BIC", "RIC"]] = None

    @model_validator(mode="after")
    def _check_parameters(self) -> "PriorConfig":
        if self.kind == "binomial" and self.xi is None and self.criterion is None:
            raise ValueError("binomial prior needs xi or criterion")
        if self.kind == "geometric" and self.q is None:
            raise ValueError("geometric prior needs q")
        if self.kind == "table" and not self.weights:
            raise ValueError("table prior needs weights")
        if self.criterion is not None and self.kind != "binomial":
            raise ValueError("criterion calibration applies to the binomial prior only")
        return self

    def to_spec(self, p: int, n: int, gamma: float) -> PriorSpec:
        if self.kind == "binomial" and self.xi is None:
            return PriorSpec.binomial(binomial_xi_for_criterion(self.criterion, p, n, gamma).xi)
        return PriorSpec.from_dict(self.model_dump(exclude={"criterion"}))


class EstimatorConfig(_Strict):
    kind: Literal["map", "lambda", "fixed_model", "null", "oracle_model"]
    name: str = ""
    prior: Optional[PriorConfig] = None
    gamma: Optional[float] = Field(default=None, gt=0.0)
    criterion: Optional[Literal["AIC", "BIC", "RIC", "lambda"]] = None
    lam: Optional[float] = Field(default=None, gt=0.0, allow_inf_nan=False)
    model: List[int] = Field(default_factory=list)

    def to_spec(self) -> EstimatorSpec:
        prior = None
        prior_criterion = None
        if self.prior is not None:
            if self.prior.kind == "binomial" and self.prior.xi is None:
                prior_criterion = self.prior.criterion
            else:
                prior = PriorSpec.from_dict(self.prior.model_dump(exclude={"criterion"}))
        return EstimatorSpec(
            kind=self.kind,
            name=self.name,
            prior=prior,
            prior_criterion=prior_criterion,
            gamma=self.gamma,
            criterion=self.criterion,
            lam=self.lam,
            model=tuple(self.model),
        )


class ScenarioConfig(_Strict):
    name: str = "scenario"
    n: int = Field(ge=1)
    p: int = Field(ge=1)
    design_kind: Literal["orthonormal", "iid_gaussian", "equicorrelated", "custom"] = "orthonormal"
    rho: Optional[float] = Field(default=None, gt=-1.0, lt=1.0)
    design: Optional[List[List[float]]] = None
    p0: int = Field(default=0, ge=0)
    beta_magnitude: float = 0.0
    beta: Optional[List[float]] = None
    sigma_sq: float = Field(default=1.0, gt=0.0)
    replications: int = Field(default=500, ge=2)
    seed: int = 0
    estimators: List[EstimatorConfig] = Field(default_factory=list)
    p0_grid: List[int] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_shape(self) -> "ScenarioConfig":
        if self.p0 > self.p:
            raise ValueError(f"p0={self.p0} exceeds p={self.p}")
        if any(v < 0 or v > self.p for v in self.p0_grid):
            raise ValueError(f"p0_grid values must lie in 0..{self.p}")
        if self.design_kind == "equicorrelated" and self.rho is None:
            raise ValueError("equicorrelated design needs rho")
        if self.design_kind == "custom" and self.design is None:
            raise ValueError("custom design needs the design matrix")
        return self

    def to_spec(self, seed: Optional[int] = None) -> ScenarioSpec:
        return ScenarioSpec(
            n=self.n,
            p=self.p,
            design_kind=self.design_kind,
            p0=self.p0,
            beta_magnitude=self.beta_magnitude,
            sigma_sq=self.sigma_sq,
            replications=self.replications,
            seed=self.seed if seed is None else int(seed),
            estimators=tuple(e.to_spec() for e in self.estimators),
            rho=self.rho,
            design=tuple(tuple(row) for row in self.design) if self.design is not None else None,
            beta=tuple(self.beta) if self.beta is not None else None,
            name=self.name,
        )


class GibbsSettings(_Strict):
    sweeps: int = Field(default=20_000, ge=1)
    burn_in: int = Field(default=2_000, ge=0)
    chains: int = Field(default=4, ge=1)
    top_k: int = Field(default=10, ge=1)
    seed: int = 0

    def to_config(self, workers: Optional[int] = None) -> GibbsConfig:
        return GibbsConfig(
            sweeps=self.sweeps,
            burn_in=self.burn_in,
            seed=self.seed,
            chains=self.chains,
            top_k=self.top_k,
            workers=workers,
        )


class AssumptionDSettings(_Strict):
    kappa1: int = Field(ge=1)
    kappa2: int = Field(ge=1)
    c1: float
    c2: float
    c3: float = Field(le=1.0)


class DiagnoseSettings(_Strict):
    k_max: Optional[int] = Field(default=None, ge=1)
    threshold: float = Field(default=0.5, gt=0.0, le=1.0)
    budget: int = Field(default=DEFAULT_DIAG_BUDGET, ge=1)
    seed: int = 0
    beta: Optional[List[float]] = None
    sigma_sq: float = Field(default=1.0, gt=0.0)
    c4: float = Field(default=1.0, gt=0.0)
    assumption_d: Optional[AssumptionDSettings] = None
    C1: float = Field(default=1.0, gt=0.0)
    C2: float = Field(default=1.0, gt=0.0)


class DefaultsModel(_Strict):
    budget: int = Field(default=DEFAULT_BUDGET, ge=1)
    diag_budget: int = Field(default=DEFAULT_DIAG_BUDGET, ge=1)
    gamma: Optional[float] = Field(default=None, gt=0.0)
    prior: PriorConfig = Field(default_factory=lambda: PriorConfig(kind="geometric", q=0.5))
    gibbs: GibbsSettings = Field(default_factory=GibbsSettings)
    workers: Optional[int] = Field(default=None, ge=1)
    oracle_ratio_ceiling: float = Field(default=DEFAULT_RATIO_CEILING, gt=0.0)
    log_retention_days: int = Field(default=30, ge=1, le=3650)


def config_path() -> str:
    override = str(os.getenv("MAPSEL_CONFIG", "") or "").strip()
    if override:
        return override
    local = os.path.join(BASE_DIR, CONFIG_NAME)
    if os.path.isfile(local):
        return local
    return os.path.join(os.path.dirname(BASE_DIR), CONFIG_NAME)


def load_config() -> DefaultsModel:
    global CONFIG_CACHE, CONFIG_LAST_MODIFIED, CONFIG_CACHE_PATH
    path = config_path()
    if not os.path.exists(path):
        CONFIG_CACHE = DefaultsModel()
        CONFIG_CACHE_PATH = path
        return CONFIG_CACHE
    current_mtime = os.path.getmtime(path)
    if CONFIG_CACHE is None or path != CONFIG_CACHE_PATH or current_mtime > CONFIG_LAST_MODIFIED:
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
            CONFIG_CACHE = DefaultsModel.model_validate(raw)
            CONFIG_LAST_MODIFIED = current_mtime
        except ValidationError as e:
            logging.critical(f"Configuration error (schema) in {path}: {e}")
            CONFIG_CACHE = DefaultsModel()
        except Exception as e:
            logging.critical(f"Configuration error in {path}: {e}")
            CONFIG_CACHE = DefaultsModel()
        CONFIG_CACHE_PATH = path
    return CONFIG_CACHE


def read_json_file(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    if not isinstance(raw, dict):
        raise InputError(f"{path} must contain a JSON object")
    return raw


def parse_prior(text: str) -> PriorConfig:
    """JSON object or shorthand: geometric:0.5, binomial:0.1, binomial:RIC, uniform."""
    raw = str(text or "").strip()
    if raw.startswith("{"):
        return PriorConfig.model_validate(json.loads(raw))
    kind, _, arg = raw.partition(":")
    kind = kind.strip().lower()
    arg = arg.strip()
    data: Dict[str, Any] = {"kind": kind}
    if kind == "geometric" and arg:
        data["q"] = float(arg)
    elif kind == "binomial" and arg:
        if arg.upper() in ("AIC", "BIC", "RIC"):
            data["criterion"] = arg.upper()
        else:
            data["xi"] = float(arg)
    elif kind == "table" and arg:
        data["weights"] = [float(v) for v in arg.split(",") if v.strip()]
    return PriorConfig.model_validate(data)
