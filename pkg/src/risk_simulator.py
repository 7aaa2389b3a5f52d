"""Monte Carlo risk of model selectors against the oracle benchmark.

Every replication i draws its noise from the stream (seed, NOISE, i), so all
estimators in a comparison see the same noise vectors and serial and
parallel runs produce identical numbers.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core_linalg import (
    DesignMatrix,
    ModelIndicator,
    is_orthogonal_design,
    least_squares_fit,
    mean_projection,
    sum_squares,
)
from data_io import DESIGN_KINDS, build_design
from design_diagnostics import DEFAULT_DIAG_BUDGET, SpectrumCache, rate_bounds
from parallel import ordered_map
from priors_penalties import (
    HyperParams,
    PenaltySchedule,
    PriorSpec,
    binomial_xi_for_criterion,
    criterion_lambda,
    linear_penalty_schedule,
    penalty_schedule,
)
from seeding import STREAM_NOISE, make_generator
from selector_exhaustive import DEFAULT_BUDGET, BudgetExceededError, select_with_schedule, strictly_better


ESTIMATOR_KINDS = ("map", "lambda", "fixed_model", "null", "oracle_model")
ORACLE_BUDGET = 1 << 20
ORACLE_POOL = 16
DEFAULT_RATIO_CEILING = 50.0


class ScenarioError(ValueError):
    pass


class ReplicationError(RuntimeError):
    def __init__(self, estimator: str, replication: int, cause: BaseException):
        self.estimator = estimator
        self.replication = int(replication)
        self.cause = cause
        super().__init__(f"estimator {estimator!r} failed in replication {replication}: {cause}")


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    name: str = ""
    prior: Optional[PriorSpec] = None
    prior_criterion: Optional[str] = None
    gamma: Optional[float] = None
    criterion: Optional[str] = None
    lam: Optional[float] = None
    model: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ESTIMATOR_KINDS:
            raise ScenarioError(f"Unknown estimator kind {self.kind!r}; expected one of {', '.join(ESTIMATOR_KINDS)}")
        if self.kind == "map" and self.prior is None and not self.prior_criterion:
            raise ScenarioError("map estimator needs a prior or a prior criterion")
        if self.kind == "lambda" and not self.criterion and self.lam is None:
            raise ScenarioError("lambda estimator needs a criterion name or a lambda value")
        if self.gamma is not None and not self.gamma > 0:
            raise ScenarioError(f"gamma must be positive, got {self.gamma}")
        if self.lam is not None and not (math.isfinite(self.lam) and self.lam > 0):
            raise ScenarioError(f"lam must be positive and finite, got {self.lam}")
        object.__setattr__(self, "model", tuple(sorted(int(j) for j in self.model)))
        if not self.name:
            object.__setattr__(self, "name", self._default_name())

    def _default_name(self) -> str:
        if self.kind == "map":
            if self.prior is not None:
                params = ",".join(f"{k}={v}" for k, v in self.prior.to_dict().items() if k != "kind")
                return f"map:{self.prior.kind}({params})" if params else f"map:{self.prior.kind}"
            return f"map:binomial({self.prior_criterion})"
        if self.kind == "lambda":
            return f"lambda:{self.criterion or self.lam}"
        if self.kind == "fixed_model":
            return "fixed:{" + ",".join(str(j) for j in self.model) + "}"
        return self.kind

    def schedule(self, p: int, n: int, r: int, sigma_sq: float) -> Optional[PenaltySchedule]:
        gamma = float(self.gamma) if self.gamma is not None else float(p)
        hp = HyperParams(gamma, sigma_sq)
        if self.kind == "map":
            prior = self.prior
            if prior is None:
                prior = PriorSpec.binomial(binomial_xi_for_criterion(self.prior_criterion, p, n, gamma, self.lam).xi)
            return penalty_schedule(p, r, prior, hp)
        if self.kind == "lambda":
            lam = criterion_lambda(self.criterion or "lambda", p, n, self.lam)
            return linear_penalty_schedule(p, r, lam, hp)
        return None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind, "name": self.name}
        if self.prior is not None:
            out["prior"] = self.prior.to_dict()
        if self.prior_criterion:
            out["prior_criterion"] = self.prior_criterion
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.criterion:
            out["criterion"] = self.criterion
        if self.lam is not None:
            out["lam"] = self.lam
        if self.model:
            out["model"] = list(self.model)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EstimatorSpec":
        prior = data.get("prior")
        return cls(
            kind=str(data["kind"]),
            name=str(data.get("name") or ""),
            prior=PriorSpec.from_dict(prior) if isinstance(prior, dict) else None,
            prior_criterion=data.get("prior_criterion"),
            gamma=data.get("gamma"),
            criterion=data.get("criterion"),
            lam=data.get("lam"),
            model=tuple(data.get("model") or ()),
        )


@dataclass(frozen=True)
class ScenarioSpec:
    n: int
    p: int
    design_kind: str
    p0: int
    beta_magnitude: float
    sigma_sq: float
    replications: int
    seed: int
    estimators: Tuple[EstimatorSpec, ...] = ()
    rho: Optional[float] = None
    design: Optional[Tuple[Tuple[float, ...], ...]] = field(default=None, repr=False)
    beta: Optional[Tuple[float, ...]] = None
    name: str = "scenario"

    def __post_init__(self) -> None:
        if self.n < 1 or self.p < 1:
            raise ScenarioError(f"n and p must be positive, got n={self.n}, p={self.p}")
        if self.design_kind not in DESIGN_KINDS:
            raise ScenarioError(f"Unknown design kind {self.design_kind!r}")
        if not 0 <= self.p0 <= self.p:
            raise ScenarioError(f"p0={self.p0} must lie in 0..p={self.p}")
        if self.replications < 2:
            raise ScenarioError(f"replications must be at least 2, got {self.replications}")
        if not (math.isfinite(self.sigma_sq) and self.sigma_sq > 0):
            raise ScenarioError(f"sigma_sq must be positive, got {self.sigma_sq}")
        if self.beta is not None and len(self.beta) != self.p:
            raise ScenarioError(f"beta has {len(self.beta)} entries, expected p={self.p}")
        object.__setattr__(self, "estimators", tuple(self.estimators))

    def with_p0(self, p0: int) -> "ScenarioSpec":
        return ScenarioSpec(
            n=self.n,
            p=self.p,
            design_kind=self.design_kind,
            p0=int(p0),
            beta_magnitude=self.beta_magnitude,
            sigma_sq=self.sigma_sq,
            replications=self.replications,
            seed=self.seed,
            estimators=self.estimators,
            rho=self.rho,
            design=self.design,
            beta=None,
            name=f"{self.name}/p0={p0}",
        )

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "n": self.n,
            "p": self.p,
            "design_kind": self.design_kind,
            "p0": self.p0,
            "beta_magnitude": self.beta_magnitude,
            "sigma_sq": self.sigma_sq,
            "replications": self.replications,
            "seed": self.seed,
            "estimators": [e.to_dict() for e in self.estimators],
        }
        if self.rho is not None:
            out["rho"] = self.rho
        if self.design is not None:
            out["design"] = [list(row) for row in self.design]
        if self.beta is not None:
            out["beta"] = list(self.beta)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioSpec":
        design = data.get("design")
        beta = data.get("beta")
        return cls(
            n=int(data["n"]),
            p=int(data["p"]),
            design_kind=str(data.get("design_kind", "orthonormal")),
            p0=int(data.get("p0", 0)),
            beta_magnitude=float(data.get("beta_magnitude", 0.0)),
            sigma_sq=float(data.get("sigma_sq", 1.0)),
            replications=int(data.get("replications", 100)),
            seed=int(data.get("seed", 0)),
            estimators=tuple(EstimatorSpec.from_dict(e) for e in data.get("estimators", [])),
            rho=data.get("rho"),
            design=tuple(tuple(float(v) for v in row) for row in design) if design is not None else None,
            beta=tuple(float(v) for v in beta) if beta is not None else None,
            name=str(data.get("name") or "scenario"),
        )


@dataclass(frozen=True)
class PreparedScenario:
    """Design, coefficients and mean vector built once per scenario."""

    spec: ScenarioSpec
    X: DesignMatrix
    beta: np.ndarray
    mu: np.ndarray

    @property
    def support(self) -> ModelIndicator:
        return ModelIndicator(tuple(int(j) for j in np.flatnonzero(self.beta)))


@dataclass(frozen=True)
class OracleResult:
    risk: float
    model: ModelIndicator
    exact: bool
    method: str
    models_evaluated: int


@dataclass(frozen=True)
class EstimatorRisk:
    name: str
    kind: str
    mean: float
    stderr: float
    size_histogram: Dict[int, int]
    support_contained: float
    support_exact: float
    oracle_ratio: float = float("nan")
    losses: Tuple[float, ...] = field(default=(), repr=False)

    def ci95(self) -> Tuple[float, float]:
        return self.mean - 1.96 * self.stderr, self.mean + 1.96 * self.stderr

    def to_dict(self) -> Dict[str, Any]:
        lo, hi = self.ci95()
        return {
            "name": self.name,
            "kind": self.kind,
            "mean_risk": self.mean,
            "stderr": self.stderr,
            "ci95": [lo, hi],
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "support_contained": self.support_contained,
            "support_exact": self.support_exact,
            "oracle_ratio": self.oracle_ratio,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EstimatorRisk":
        ratio = data.get("oracle_ratio")
        return cls(
            name=str(data["name"]),
            kind=str(data["kind"]),
            mean=float(data["mean_risk"]),
            stderr=float(data["stderr"]),
            size_histogram={int(k): int(v) for k, v in dict(data["size_histogram"]).items()},
            support_contained=float(data["support_contained"]),
            support_exact=float(data["support_exact"]),
            oracle_ratio=float("nan") if ratio is None else float(ratio),
        )


@dataclass(frozen=True)
class RiskReport:
    scenario: Dict[str, Any]
    estimators: List[EstimatorRisk]
    oracle_risk: float
    oracle_exact: bool
    oracle_model: ModelIndicator
    rate_upper: Optional[float] = None
    rate_lower: Optional[float] = None

    def by_name(self, name: str) -> EstimatorRisk:
        for item in self.estimators:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "estimators": [e.to_dict() for e in self.estimators],
            "oracle_risk": self.oracle_risk,
            "oracle_exact": self.oracle_exact,
            "oracle_model": list(self.oracle_model.indices),
            "rate_upper": self.rate_upper,
            "rate_lower": self.rate_lower,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RiskReport":
        return cls(
            scenario=dict(data["scenario"]),
            estimators=[EstimatorRisk.from_dict(e) for e in data["estimators"]],
            oracle_risk=float(data["oracle_risk"]),
            oracle_exact=bool(data["oracle_exact"]),
            oracle_model=ModelIndicator.of(data.get("oracle_model", [])),
            rate_upper=None if data.get("rate_upper") is None else float(data["rate_upper"]),
            rate_lower=None if data.get("rate_lower") is None else float(data["rate_lower"]),
        )

    def to_rows(self) -> List[Dict[str, Any]]:
        """One flat row per estimator."""
        rows = []
        for item in self.estimators:
            lo, hi = item.ci95()
            rows.append(
                {
                    "scenario": self.scenario.get("name", ""),
                    "n": self.scenario.get("n"),
                    "p": self.scenario.get("p"),
                    "p0": self.scenario.get("p0"),
                    "design_kind": self.scenario.get("design_kind"),
                    "replications": self.scenario.get("replications"),
                    "estimator": item.name,
                    "kind": item.kind,
                    "mean_risk": item.mean,
                    "stderr": item.stderr,
                    "ci95_low": lo,
                    "ci95_high": hi,
                    "support_contained": item.support_contained,
                    "support_exact": item.support_exact,
                    "oracle_risk": self.oracle_risk,
                    "oracle_exact": self.oracle_exact,
                    "oracle_ratio": item.oracle_ratio,
                    "rate_upper": self.rate_upper,
                    "rate_lower": self.rate_lower,
                }
            )
        return rows


REPORT_COLUMNS = (
    "scenario",
    "n",
    "p",
    "p0",
    "design_kind",
    "replications",
    "estimator",
    "kind",
    "mean_risk",
    "stderr",
    "ci95_low",
    "ci95_high",
    "support_contained",
    "support_exact",
    "oracle_risk",
    "oracle_exact",
    "oracle_ratio",
    "rate_upper",
    "rate_lower",
)


@dataclass(frozen=True)
class AdaptivityGrid:
    p0_values: Tuple[int, ...]
    reports: List[RiskReport]
    ratios: Dict[int, Dict[str, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p0_values": list(self.p0_values),
            "reports": [r.to_dict() for r in self.reports],
            "ratio_to_best": {str(p0): dict(v) for p0, v in self.ratios.items()},
        }


def scenario_beta(spec: ScenarioSpec) -> np.ndarray:
    """Explicit beta, or p0 leading entries of size magnitude * sigma with alternating signs."""
    if spec.beta is not None:
        return np.asarray(spec.beta, dtype=np.float64)
    beta = np.zeros(spec.p)
    sigma = math.sqrt(spec.sigma_sq)
    for j in range(spec.p0):
        beta[j] = (1.0 if j % 2 == 0 else -1.0) * spec.beta_magnitude * sigma
    return beta


def prepare_scenario(spec: ScenarioSpec) -> PreparedScenario:
    entries = build_design(spec.design_kind, spec.n, spec.p, rho=spec.rho, seed=spec.seed, custom=spec.design)
    X = DesignMatrix.from_array(entries)
    beta = scenario_beta(spec)
    mu = X.entries @ beta
    mu.setflags(write=False)
    return PreparedScenario(spec=spec, X=X, beta=beta, mu=mu)


def bias_sq(X: DesignMatrix, mu: np.ndarray, M: ModelIndicator) -> float:
    return mean_projection(X, mu, M)[1]


def _oracle_value(X: DesignMatrix, mu: np.ndarray, idx: Sequence[int], sigma_sq: float) -> float:
    return bias_sq(X, mu, ModelIndicator(tuple(idx))) + sigma_sq * len(idx)


def _argmin_over(
    X: DesignMatrix,
    mu: np.ndarray,
    pool: Sequence[int],
    max_size: int,
    sigma_sq: float,
) -> Tuple[float, Tuple[int, ...], int]:
    best_value = math.inf
    best: Tuple[int, ...] = ()
    seen = 0
    for k in range(min(max_size, len(pool)) + 1):
        for idx in itertools.combinations(pool, k):
            value = _oracle_value(X, mu, idx, sigma_sq)
            seen += 1
            if strictly_better(value, best_value):
                best_value, best = value, tuple(idx)
    return best_value, best, seen


def _forward_path(X: DesignMatrix, mu: np.ndarray, sigma_sq: float, limit: int) -> Tuple[float, Tuple[int, ...], int]:
    current: List[int] = []
    value = _oracle_value(X, mu, current, sigma_sq)
    seen = 1
    while len(current) < limit:
        best_j, best_value = None, value
        for j in range(X.p):
            if j in current:
                continue
            trial = _oracle_value(X, mu, sorted(current + [j]), sigma_sq)
            seen += 1
            if trial < best_value:
                best_j, best_value = j, trial
        if best_j is None:
            break
        current = sorted(current + [best_j])
        value = best_value
    return value, tuple(current), seen


def oracle_search(
    X: DesignMatrix,
    beta: np.ndarray,
    sigma_sq: float,
    budget: int = ORACLE_BUDGET,
    allow_fallback: bool = True,
) -> OracleResult:
    """min over models M of ||X beta_M - X beta||^2 + sigma^2 |M|."""
    b = np.asarray(beta, dtype=np.float64)
    mu = X.entries @ b
    if not np.any(b):
        return OracleResult(0.0, ModelIndicator(), True, "null", 1)

    if is_orthogonal_design(X):
        gains = b * b * np.diag(X.gram)
        keep = tuple(int(j) for j in np.flatnonzero(gains > sigma_sq))
        risk = float(np.minimum(gains, sigma_sq).sum())
        return OracleResult(risk, ModelIndicator(keep), True, "orthogonal", X.p)

    # models larger than r never beat a basis subset of themselves
    needed = sum(math.comb(X.p, k) for k in range(X.r + 1))
    if needed <= budget:
        value, idx, seen = _argmin_over(X, mu, range(X.p), X.r, sigma_sq)
        return OracleResult(value, ModelIndicator(idx), True, "enumeration", seen)
    if not allow_fallback:
        raise BudgetExceededError(needed, budget)

    support = [int(j) for j in np.flatnonzero(b)]
    score = np.abs(X.entries.T @ mu) / np.sqrt(np.maximum(np.diag(X.gram), 1e-300))
    extra = [int(j) for j in np.argsort(-score, kind="stable") if int(j) not in support]
    pool = sorted(support + extra[: max(0, ORACLE_POOL - len(support))])
    fwd_value, fwd_idx, fwd_seen = _forward_path(X, mu, sigma_sq, X.r)
    if len(pool) <= ORACLE_POOL:
        value, idx, seen = _argmin_over(X, mu, pool, X.r, sigma_sq)
    else:
        value, idx, seen = _oracle_value(X, mu, support[: X.r], sigma_sq), tuple(support[: X.r]), 1
    if fwd_value < value:
        value, idx = fwd_value, fwd_idx
    logging.warning("[SIM] oracle risk from a support-restricted search (p=%d); value is an upper bound", X.p)
    return OracleResult(value, ModelIndicator(idx), False, "support_restricted", seen + fwd_seen)


def oracle_risk(X: DesignMatrix, beta: np.ndarray, sigma_sq: float, budget: int = ORACLE_BUDGET) -> float:
    return oracle_search(X, beta, sigma_sq, budget).risk


def _noise(seed: int, replication: int, n: int, sigma_sq: float) -> np.ndarray:
    return make_generator(seed, STREAM_NOISE, replication).standard_normal(n) * math.sqrt(sigma_sq)


def _fit_once(
    prep: PreparedScenario,
    estimator: EstimatorSpec,
    schedule: Optional[PenaltySchedule],
    oracle_model: Optional[ModelIndicator],
    y: np.ndarray,
    budget: int,
) -> Tuple[ModelIndicator, np.ndarray]:
    if estimator.kind in ("map", "lambda"):
        result = select_with_schedule(prep.X, y, schedule, budget=budget, workers=1)
        return result.model, result.fit.fitted
    if estimator.kind == "null":
        return ModelIndicator(), np.zeros(prep.X.n)
    model = ModelIndicator.of(estimator.model) if estimator.kind == "fixed_model" else oracle_model
    return model, least_squares_fit(prep.X, y, model).fitted


def empirical_risk(
    scenario: ScenarioSpec,
    estimator: EstimatorSpec,
    prepared: Optional[PreparedScenario] = None,
    workers: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    oracle_model: Optional[ModelIndicator] = None,
) -> EstimatorRisk:
    """Replicates y = X beta + noise and records ||X beta_hat - X beta||^2."""
    prep = prepared if prepared is not None else prepare_scenario(scenario)
    X = prep.X
    schedule = estimator.schedule(X.p, X.n, X.r, scenario.sigma_sq) if X.r >= 1 else None
    if estimator.kind in ("map", "lambda") and schedule is None:
        raise ScenarioError("Design has rank zero")
    if estimator.kind == "fixed_model":
        ModelIndicator.of(estimator.model).validate(X.p)
    if estimator.kind == "oracle_model" and oracle_model is None:
        oracle_model = oracle_search(X, prep.beta, scenario.sigma_sq).model
    support = prep.support

    def _one(i: int) -> Tuple[float, int, bool, bool]:
        y = prep.mu + _noise(scenario.seed, i, X.n, scenario.sigma_sq)
        try:
            model, fitted = _fit_once(prep, estimator, schedule, oracle_model, y, budget)
        except Exception as exc:
            raise ReplicationError(estimator.name, i, exc) from exc
        contained = all(j in model for j in support.indices)
        return sum_squares(fitted - prep.mu), model.size, contained, model == support

    outcomes = ordered_map(_one, range(scenario.replications), workers)
    losses = np.array([o[0] for o in outcomes])
    histogram: Dict[int, int] = {}
    for _, size, _, _ in outcomes:
        histogram[size] = histogram.get(size, 0) + 1
    reps = len(outcomes)
    return EstimatorRisk(
        name=estimator.name,
        kind=estimator.kind,
        mean=float(losses.mean()),
        stderr=float(losses.std(ddof=1) / math.sqrt(reps)),
        size_histogram=dict(sorted(histogram.items())),
        support_contained=sum(1 for o in outcomes if o[2]) / reps,
        support_exact=sum(1 for o in outcomes if o[3]) / reps,
        losses=tuple(float(v) for v in losses),
    )


def _rates(prep: PreparedScenario, sigma_sq: float) -> Tuple[Optional[float], Optional[float]]:
    X = prep.X
    p0 = prep.support.size
    if not 1 <= p0 <= X.r:
        return None, None
    cache = SpectrumCache(X, DEFAULT_DIAG_BUDGET, seed=prep.spec.seed)
    tau_2p0 = cache.get(2 * p0).tau if 2 * p0 <= X.r else None
    tau_p0 = cache.get(p0).tau if 2 * p0 > X.r else None
    bounds = rate_bounds(X.p, p0, X.r, tau_2p0, tau_p0, sigma_sq)
    return bounds.upper, bounds.lower


def compare_estimators(
    scenario: ScenarioSpec,
    workers: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    oracle_budget: int = ORACLE_BUDGET,
    ratio_ceiling: float = DEFAULT_RATIO_CEILING,
) -> RiskReport:
    """Paired Monte Carlo comparison of the scenario's estimators."""
    if len(scenario.estimators) < 2:
        raise ScenarioError(f"compare_estimators needs at least 2 estimators, got {len(scenario.estimators)}")
    names = [e.name for e in scenario.estimators]
    if len(set(names)) != len(names):
        raise ScenarioError(f"estimator names must be unique: {names}")
    prep = prepare_scenario(scenario)
    oracle = oracle_search(prep.X, prep.beta, scenario.sigma_sq, oracle_budget)
    log_p = math.log(prep.X.p)

    results: List[EstimatorRisk] = []
    for est in scenario.estimators:
        risk = empirical_risk(scenario, est, prep, workers=workers, budget=budget, oracle_model=oracle.model)
        ratio = risk.mean / (log_p * (oracle.risk + scenario.sigma_sq)) if log_p > 0 else float("nan")
        if est.kind == "map" and math.isfinite(ratio) and ratio > ratio_ceiling:
            logging.warning("[SIM] %s: oracle ratio %.3f exceeds ceiling %.1f", est.name, ratio, ratio_ceiling)
        logging.info(
            "[SIM] %s %s: risk %.4f +- %.4f, oracle ratio %.4f",
            scenario.name,
            est.name,
            risk.mean,
            risk.stderr,
            ratio,
        )
        results.append(
            EstimatorRisk(
                name=risk.name,
                kind=risk.kind,
                mean=risk.mean,
                stderr=risk.stderr,
                size_histogram=risk.size_histogram,
                support_contained=risk.support_contained,
                support_exact=risk.support_exact,
                oracle_ratio=ratio,
                losses=risk.losses,
            )
        )

    upper, lower = _rates(prep, scenario.sigma_sq)
    return RiskReport(
        scenario=scenario.to_dict(),
        estimators=results,
        oracle_risk=oracle.risk,
        oracle_exact=oracle.exact,
        oracle_model=oracle.model,
        rate_upper=upper,
        rate_lower=lower,
    )


def _relative(value: float, best: float) -> float:
    if best > 0:
        return value / best
    return 1.0 if value == 0 else math.inf


def adaptivity_grid(
    base: ScenarioSpec,
    p0_values: Sequence[int],
    workers: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> AdaptivityGrid:
    """compare_estimators at each p0 and each estimator's risk relative to the best one."""
    values = tuple(int(v) for v in p0_values)
    if not values:
        raise ScenarioError("p0_values must not be empty")
    reports: List[RiskReport] = []
    ratios: Dict[int, Dict[str, float]] = {}
    for p0 in values:
        report = compare_estimators(base.with_p0(p0), workers=workers, budget=budget)
        reports.append(report)
        best = min(e.mean for e in report.estimators)
        ratios[p0] = {e.name: _relative(e.mean, best) for e in report.estimators}
    return AdaptivityGrid(values, reports, ratios)
