from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from core_linalg import (
    DesignMatrix,
    DimensionError,
    FitResult,
    ModelIndicator,
    is_orthogonal_design,
    least_squares_fit,
    saturated_representative,
    sum_squares,
)
from parallel import chunked, ordered_map
from priors_penalties import HyperParams, PenaltySchedule, PriorSpec, penalty_schedule


DEFAULT_BUDGET = 2_000_000
TIE_RTOL = 1e-12
CHUNK_SIZE = 2048


class BudgetExceededError(RuntimeError):
    def __init__(self, needed: int, budget: int, what: str = "models"):
        self.needed = int(needed)
        self.budget = int(budget)
        super().__init__(f"Exhaustive search needs {needed} {what}, budget is {budget}")


class ModelSizeError(ValueError):
    pass


def strictly_better(value: float, incumbent: float) -> bool:
    """value beats incumbent by more than the relative tie tolerance.

    A non-finite incumbent (no candidate yet) is beaten by any smaller value.
    """
    if not math.isfinite(incumbent):
        return value < incumbent
    return value < incumbent - TIE_RTOL * (1.0 + abs(incumbent))


@dataclass(frozen=True)
class SelectionResult:
    model: ModelIndicator
    fit: FitResult
    criterion: float
    penalty: float
    log_posterior_unnorm: float
    models_evaluated: int
    saturated: bool
    method: str = "enumeration"
    best_by_size: Tuple[Tuple[int, ModelIndicator, float], ...] = field(default=(), repr=False)

    def to_dict(self, X: Optional[DesignMatrix] = None) -> Dict[str, object]:
        names = [X.name_of(j) for j in self.model.indices] if X is not None else []
        return {
            "model": list(self.model.indices),
            "selected": names,
            "coefficients": {
                (X.name_of(j) if X is not None else str(j)): float(self.fit.beta_hat[j])
                for j in self.model.indices
            },
            "rss": float(self.fit.rss),
            "criterion": float(self.criterion),
            "penalty": float(self.penalty),
            "log_posterior_unnorm": float(self.log_posterior_unnorm),
            "models_evaluated": int(self.models_evaluated),
            "saturated": bool(self.saturated),
            "method": self.method,
            "best_by_size": [
                {"k": k, "model": list(m.indices), "criterion": float(c)} for k, m, c in self.best_by_size
            ],
        }


def _schedule_for(X: DesignMatrix, prior: PriorSpec, hp: HyperParams) -> PenaltySchedule:
    if X.r < 1:
        raise DimensionError("Design has rank zero")
    return penalty_schedule(X.p, X.r, prior, hp)


def criterion(X: DesignMatrix, y: np.ndarray, M: ModelIndicator, schedule: PenaltySchedule) -> float:
    if M.size > schedule.r:
        raise ModelSizeError(f"|M|={M.size} exceeds rank r={schedule.r}")
    return least_squares_fit(X, y, M).rss + float(schedule.pen[M.size])


def _log_posterior_from_fit(fit: FitResult, size: int, schedule: PenaltySchedule) -> float:
    return schedule.log_prior_term(size) + sum_squares(fit.fitted) / schedule.hp.scale


def log_posterior(
    X: DesignMatrix,
    y: np.ndarray,
    M: ModelIndicator,
    prior: PriorSpec,
    hp: HyperParams,
    schedule: Optional[PenaltySchedule] = None,
) -> float:
    """Unnormalized log posterior probability of model M.

    ln pi(|M|) - ln C(p,|M|) - (|M|/2) ln(1+gamma) + gamma/(gamma+1) y'P_M y / (2 sigma^2);
    the binomial term is absent for the saturated size |M| = r.
    """
    sched = schedule if schedule is not None else _schedule_for(X, prior, hp)
    if M.size > sched.r:
        raise ModelSizeError(f"|M|={M.size} exceeds rank r={sched.r}; such models have zero prior mass")
    return _log_posterior_from_fit(least_squares_fit(X, y, M), M.size, sched)


def enumeration_count(p: int, r: int) -> int:
    """Models visited by exhaustive search: all sizes below r plus one saturated model."""
    return sum(math.comb(p, k) for k in range(r)) + 1


def build_result(
    X: DesignMatrix,
    y: np.ndarray,
    model: ModelIndicator,
    schedule: PenaltySchedule,
    evaluated: int,
    method: str,
    best_by_size: Iterable[Tuple[int, ModelIndicator, float]],
) -> SelectionResult:
    fit = least_squares_fit(X, y, model)
    pen = float(schedule.pen[model.size])
    return SelectionResult(
        model=model,
        fit=fit,
        criterion=fit.rss + pen,
        penalty=pen,
        log_posterior_unnorm=_log_posterior_from_fit(fit, model.size, schedule),
        models_evaluated=int(evaluated),
        saturated=model.size == schedule.r,
        method=method,
        best_by_size=tuple(best_by_size),
    )


def _select_orthogonal(X: DesignMatrix, y: np.ndarray, schedule: PenaltySchedule) -> SelectionResult:
    """Hard thresholding with a data-driven threshold.

    With a diagonal Gram matrix the best size-k model holds the k largest
    z_j^2 = (x_j'y)^2 / ||x_j||^2, so only r+1 candidates need comparing.
    """
    diag = np.diag(X.gram)
    z_sq = (X.entries.T @ y) ** 2 / diag
    order = sorted(range(X.p), key=lambda j: (-z_sq[j], j))
    gains = np.concatenate(([0.0], np.cumsum(z_sq[order])))
    total = sum_squares(y)
    best_k = 0
    best_value = math.inf
    by_size: List[Tuple[int, ModelIndicator, float]] = []
    for k in range(schedule.r + 1):
        value = max(total - gains[k], 0.0) + float(schedule.pen[k])
        by_size.append((k, ModelIndicator.of(order[:k]), value))
        if strictly_better(value, best_value):
            best_value = value
            best_k = k
    model = ModelIndicator.of(order[:best_k])
    return build_result(X, y, model, schedule, schedule.r + 1, "orthogonal", by_size)


def _best_in_chunk(
    X: DesignMatrix,
    y: np.ndarray,
    pen_k: float,
    chunk: List[Tuple[int, ...]],
) -> Tuple[float, Optional[Tuple[int, ...]], int]:
    best_value = math.inf
    best_idx: Optional[Tuple[int, ...]] = None
    for idx in chunk:
        value = least_squares_fit(X, y, ModelIndicator(idx)).rss + pen_k
        if strictly_better(value, best_value):
            best_value = value
            best_idx = idx
    return best_value, best_idx, len(chunk)


def select_with_schedule(
    X: DesignMatrix,
    y: np.ndarray,
    schedule: PenaltySchedule,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> SelectionResult:
    """Minimizes rss + Pen(|M|) over all models of size 0..r.

    Sizes are visited in ascending order and models within a size in
    lexicographic order; a candidate replaces the incumbent only when strictly
    better, so ties go to the smaller, then lexicographically first, model.
    """
    vec = np.asarray(y, dtype=np.float64)
    if vec.shape != (X.n,):
        raise DimensionError(f"y has shape {vec.shape}, expected ({X.n},)")
    if schedule.r != X.r or schedule.p != X.p:
        raise DimensionError(f"schedule is for p={schedule.p}, r={schedule.r}; design has p={X.p}, r={X.r}")
    if X.r < 1:
        raise DimensionError("Design has rank zero")

    if is_orthogonal_design(X):
        return _select_orthogonal(X, vec, schedule)

    needed = enumeration_count(X.p, X.r)
    if needed > budget:
        raise BudgetExceededError(needed, budget)

    representative = saturated_representative(X)
    saturated_rss = least_squares_fit(X, vec, representative).rss
    saturated_value = saturated_rss + float(schedule.pen[X.r])
    evaluated = 1

    best_value = math.inf
    best_model = ModelIndicator()
    by_size: List[Tuple[int, ModelIndicator, float]] = []

    for k in range(X.r):
        pen_k = float(schedule.pen[k])
        # rss of any model is at least the saturated rss
        bound = saturated_rss + pen_k
        if math.isfinite(best_value) and bound > best_value + TIE_RTOL * (1.0 + abs(best_value)):
            continue
        chunks = chunked(itertools.combinations(range(X.p), k), CHUNK_SIZE)
        parts = ordered_map(lambda chunk: _best_in_chunk(X, vec, pen_k, chunk), chunks, workers)
        size_value = math.inf
        size_idx: Optional[Tuple[int, ...]] = None
        for value, idx, count in parts:
            evaluated += count
            if idx is not None and strictly_better(value, size_value):
                size_value = value
                size_idx = idx
        if size_idx is None:
            continue
        by_size.append((k, ModelIndicator(size_idx), size_value))
        if strictly_better(size_value, best_value):
            best_value = size_value
            best_model = ModelIndicator(size_idx)

    by_size.append((X.r, representative, saturated_value))
    if strictly_better(saturated_value, best_value):
        best_model = representative

    logging.debug("[SELECT] %d models evaluated, best size %d", evaluated, best_model.size)
    return build_result(X, vec, best_model, schedule, evaluated, "enumeration", by_size)


def map_select(
    X: DesignMatrix,
    y: np.ndarray,
    prior: PriorSpec,
    hp: HyperParams,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> SelectionResult:
    """MAP model: minimizes ||y - X beta_M||^2 + Pen(|M|) for the prior-derived penalty."""
    return select_with_schedule(X, y, _schedule_for(X, prior, hp), budget=budget, workers=workers)
