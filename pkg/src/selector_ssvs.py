"""Stochastic search variable selection over model indicator vectors.

A systematic-scan Gibbs sampler draws d_j | d_(-j), y for j = 0..p-1 from the
posterior odds of the hierarchical size-prior / g-prior model. Odds are always
computed as the exponential of a log-posterior difference, which reproduces
the usual closed form inside the support and stays valid at the saturated
size r. Moves beyond size r have zero prior mass and are never taken.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from core_linalg import DesignMatrix, DimensionError, ModelIndicator, least_squares_fit, sum_squares
from parallel import ordered_map
from priors_penalties import HyperParams, PenaltySchedule, PriorSpec, penalty_schedule
from seeding import STREAM_GIBBS, make_generator
from selector_exhaustive import ModelSizeError, SelectionResult, build_result, strictly_better


TRACE_POINTS = 50
MEMO_ENTRIES = 1 << 16


class RankExceededError(ModelSizeError):
    pass


@dataclass(frozen=True)
class GibbsConfig:
    sweeps: int = 20_000
    burn_in: int = 2_000
    seed: int = 0
    chains: int = 4
    top_k: int = 10
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be at least 1, got {self.sweeps}")
        if self.burn_in < 0 or self.burn_in >= self.sweeps:
            raise ValueError(f"burn_in must satisfy 0 <= burn_in < sweeps, got {self.burn_in}")
        if self.chains < 1:
            raise ValueError(f"chains must be at least 1, got {self.chains}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be at least 1, got {self.top_k}")


@dataclass(frozen=True)
class ChainSummary:
    visit_counts: Dict[str, int]
    top_models: List[Tuple[ModelIndicator, float, float]]
    inclusion_freq: np.ndarray
    accepted_sweeps: int
    inclusion_trace: List[List[Tuple[int, List[float]]]] = field(default_factory=list, repr=False)
    chains: int = 1
    sweeps: int = 0
    burn_in: int = 0
    seed: int = 0

    def to_dict(self, X: Optional[DesignMatrix] = None) -> Dict[str, object]:
        def _names(model: ModelIndicator) -> List[str]:
            return [X.name_of(j) for j in model.indices] if X is not None else []

        return {
            "visit_counts": dict(sorted(self.visit_counts.items())),
            "top_models": [
                {"model": list(m.indices), "selected": _names(m), "frequency": float(f), "criterion": float(c)}
                for m, f, c in self.top_models
            ],
            "inclusion_freq": [float(v) for v in self.inclusion_freq],
            "accepted_sweeps": int(self.accepted_sweeps),
            "inclusion_trace": [
                [{"sweep": s, "inclusion": [float(v) for v in vals]} for s, vals in chain]
                for chain in self.inclusion_trace
            ],
            "chains": self.chains,
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "ChainSummary":
        return cls(
            visit_counts={str(k): int(v) for k, v in dict(data["visit_counts"]).items()},
            top_models=[
                (ModelIndicator.of(row["model"]), float(row["frequency"]), float(row["criterion"]))
                for row in data["top_models"]
            ],
            inclusion_freq=np.asarray(data["inclusion_freq"], dtype=np.float64),
            accepted_sweeps=int(data["accepted_sweeps"]),
            inclusion_trace=[
                [(int(pt["sweep"]), [float(v) for v in pt["inclusion"]]) for pt in chain]
                for chain in data.get("inclusion_trace", [])
            ],
            chains=int(data.get("chains", 1)),
            sweeps=int(data.get("sweeps", 0)),
            burn_in=int(data.get("burn_in", 0)),
            seed=int(data.get("seed", 0)),
        )

    def top_model_rows(self, X: Optional[DesignMatrix] = None) -> List[Dict[str, object]]:
        rows = []
        for rank, (model, freq, crit) in enumerate(self.top_models, start=1):
            rows.append(
                {
                    "rank": rank,
                    "model": model_label(model),
                    "selected": " ".join(X.name_of(j) for j in model.indices) if X is not None else "",
                    "size": model.size,
                    "frequency": float(freq),
                    "criterion": float(crit),
                }
            )
        return rows


def model_label(model: ModelIndicator) -> str:
    return "{" + model.key + "}"


class PosteriorTable:
    """Bounded memo of log posterior and rss per model bitmask."""

    def __init__(self, X: DesignMatrix, y: np.ndarray, schedule: PenaltySchedule, max_entries: int = MEMO_ENTRIES):
        self.X = X
        self.y = np.asarray(y, dtype=np.float64)
        self.schedule = schedule
        self._entry = functools.lru_cache(maxsize=max_entries)(self._compute)

    def _compute(self, bits: int) -> Tuple[float, float]:
        model = ModelIndicator.from_bits(bits)
        if model.size > self.schedule.r:
            raise RankExceededError(f"|M|={model.size} exceeds rank r={self.schedule.r}")
        fit = least_squares_fit(self.X, self.y, model)
        return (
            self.schedule.log_prior_term(model.size) + sum_squares(fit.fitted) / self.schedule.hp.scale,
            fit.rss,
        )

    def log_post(self, bits: int) -> float:
        return self._entry(bits)[0]

    def criterion(self, bits: int) -> float:
        rss = self._entry(bits)[1]
        return rss + float(self.schedule.pen[bin(bits).count("1")])

    def __len__(self) -> int:
        return self._entry.cache_info().currsize


def _table_for(X: DesignMatrix, y: np.ndarray, prior: PriorSpec, hp: HyperParams) -> PosteriorTable:
    if X.r < 1:
        raise DimensionError("Design has rank zero")
    return PosteriorTable(X, y, penalty_schedule(X.p, X.r, prior, hp))


def _log_odds(table: PosteriorTable, bits_without: int, j: int) -> float:
    return table.log_post(bits_without | (1 << j)) - table.log_post(bits_without)


def odds_ratio(
    X: DesignMatrix,
    y: np.ndarray,
    d_minus_j: ModelIndicator,
    j: int,
    prior: PriorSpec,
    hp: HyperParams,
    table: Optional[PosteriorTable] = None,
) -> float:
    """P(d_j = 1 | d_(-j), y) / P(d_j = 0 | d_(-j), y).

    Inside the support this equals
    [pi(k+1)/pi(k)] [(k+1)/(p-k)] (1+gamma)^(-1/2) exp{gamma/(gamma+1) dRSS_j / (2 sigma^2)}.
    """
    if not 0 <= j < X.p:
        raise DimensionError(f"Predictor index {j} out of range for p={X.p}")
    d_minus_j.validate(X.p)
    if j in d_minus_j:
        raise DimensionError(f"Conditioning set already contains predictor {j}")
    tab = table if table is not None else _table_for(X, y, prior, hp)
    if d_minus_j.size + 1 > tab.schedule.r:
        raise RankExceededError(f"Activating predictor {j} would give |M|={d_minus_j.size + 1} > r={tab.schedule.r}")
    log_odds = _log_odds(tab, d_minus_j.bits, j)
    if log_odds > 709.0:
        return math.inf
    return math.exp(log_odds)


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _sweep_bits(bits: int, p: int, r: int, table: PosteriorTable, uniforms: List[float]) -> int:
    size = bin(bits).count("1")
    for j in range(p):
        flag = 1 << j
        if bits & flag:
            bits ^= flag
            size -= 1
        if size + 1 > r:
            continue
        prob = _logistic(_log_odds(table, bits, j))
        if uniforms[j] < prob:
            bits |= flag
            size += 1
    return bits


def gibbs_sweep(
    state: np.ndarray,
    X: DesignMatrix,
    y: np.ndarray,
    prior: PriorSpec,
    hp: HyperParams,
    rng: np.random.Generator,
    table: Optional[PosteriorTable] = None,
) -> np.ndarray:
    """One systematic scan j = 0..p-1; returns a new indicator vector."""
    tab = table if table is not None else _table_for(X, y, prior, hp)
    mask = np.asarray(state, dtype=bool)
    if mask.shape != (X.p,):
        raise DimensionError(f"state has shape {mask.shape}, expected ({X.p},)")
    if int(mask.sum()) > tab.schedule.r:
        raise RankExceededError(f"state size {int(mask.sum())} exceeds rank r={tab.schedule.r}")
    bits = ModelIndicator.from_mask(mask).bits
    bits = _sweep_bits(bits, X.p, tab.schedule.r, tab, rng.random(X.p).tolist())
    return ModelIndicator.from_bits(bits).mask(X.p)


def _initial_bits(rng: np.random.Generator, p: int, r: int) -> int:
    incl = min(0.5, r / (2.0 * p))
    draws = np.flatnonzero(rng.random(p) < incl)[:r]
    bits = 0
    for j in draws:
        bits |= 1 << int(j)
    return bits


def _inclusion_from_counts(counts: Dict[int, int], p: int) -> np.ndarray:
    total = sum(counts.values())
    freq = np.zeros(p)
    if total == 0:
        return freq
    for bits, count in counts.items():
        for j in ModelIndicator.from_bits(bits).indices:
            freq[j] += count
    return freq / total


def _run_chain(
    chain: int,
    table: PosteriorTable,
    cfg: GibbsConfig,
) -> Tuple[Dict[int, int], List[Tuple[int, List[float]]]]:
    p = table.X.p
    r = table.schedule.r
    rng = make_generator(cfg.seed, STREAM_GIBBS, chain)
    bits = _initial_bits(rng, p, r)
    kept = cfg.sweeps - cfg.burn_in
    step = max(1, kept // TRACE_POINTS)
    counts: Dict[int, int] = {}
    trace: List[Tuple[int, List[float]]] = []
    for sweep in range(cfg.sweeps):
        bits = _sweep_bits(bits, p, r, table, rng.random(p).tolist())
        if sweep < cfg.burn_in:
            continue
        counts[bits] = counts.get(bits, 0) + 1
        done = sweep - cfg.burn_in + 1
        if done % step == 0 or done == kept:
            trace.append((sweep + 1, _inclusion_from_counts(counts, p).tolist()))
    return counts, trace


def run_ssvs(
    X: DesignMatrix,
    y: np.ndarray,
    prior: PriorSpec,
    hp: HyperParams,
    cfg: GibbsConfig,
) -> Tuple[ChainSummary, SelectionResult]:
    """Runs cfg.chains independent chains and extracts the best visited model.

    The reported model has the lowest penalized criterion among all visited
    models; its visit frequency is reported alongside in top_models.
    """
    table = _table_for(X, y, prior, hp)
    results = ordered_map(lambda c: _run_chain(c, table, cfg), range(cfg.chains), cfg.workers)

    merged: Dict[int, int] = {}
    traces = []
    for counts, trace in results:
        for bits, count in counts.items():
            merged[bits] = merged.get(bits, 0) + count
        traces.append(trace)
    total = sum(merged.values())

    visited = sorted(merged, key=lambda b: (bin(b).count("1"), ModelIndicator.from_bits(b).indices))
    best_bits = visited[0]
    best_value = table.criterion(best_bits)
    for bits in visited[1:]:
        value = table.criterion(bits)
        if strictly_better(value, best_value):
            best_bits, best_value = bits, value

    ranked = sorted(
        merged.items(),
        key=lambda item: (-item[1], table.criterion(item[0]), ModelIndicator.from_bits(item[0]).indices),
    )
    top = [
        (ModelIndicator.from_bits(bits), count / total, table.criterion(bits))
        for bits, count in ranked[: cfg.top_k]
    ]
    summary = ChainSummary(
        visit_counts={model_label(ModelIndicator.from_bits(b)): c for b, c in merged.items()},
        top_models=top,
        inclusion_freq=_inclusion_from_counts(merged, X.p),
        accepted_sweeps=total,
        inclusion_trace=traces,
        chains=cfg.chains,
        sweeps=cfg.sweeps,
        burn_in=cfg.burn_in,
        seed=cfg.seed,
    )
    best_model = ModelIndicator.from_bits(best_bits)
    logging.info(
        "[SSVS] %d chains x %d sweeps, %d distinct models, best {%s} (frequency %.4f)",
        cfg.chains,
        cfg.sweeps,
        len(merged),
        best_model.key,
        merged[best_bits] / total,
    )
    result = build_result(X, y, best_model, table.schedule, len(merged), "ssvs", ())
    return summary, result
