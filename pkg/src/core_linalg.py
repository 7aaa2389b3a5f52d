"""Subset least squares, rank and projection helpers.

Every selector, diagnostic and simulator routine goes through the functions in
this module, so they are kept pure: inputs are never mutated and the arrays
stored on the returned dataclasses are read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla


COMPENSATED_SUM_THRESHOLD = 10_000


class DimensionError(ValueError):
    pass


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def default_rank_tol(n: int, p: int) -> float:
    return float(max(n, p)) * float(np.finfo(np.float64).eps)


def sum_squares(values: np.ndarray) -> float:
    vec = np.asarray(values, dtype=np.float64).ravel()
    if vec.size > COMPENSATED_SUM_THRESHOLD:
        return math.fsum((vec * vec).tolist())
    return float(vec @ vec)


def _rank_of(entries: np.ndarray, rank_tol: float) -> int:
    if entries.size == 0:
        return 0
    sv = sla.svdvals(entries)
    if sv.size == 0 or sv[0] <= 0.0:
        return 0
    return int(np.count_nonzero(sv > rank_tol * sv[0]))


@dataclass(frozen=True)
class ModelIndicator:
    """Sorted, duplicate-free set of zero-based predictor indices."""

    indices: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise DimensionError(f"Negative predictor index in {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DimensionError(f"Model indices must be strictly increasing: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ModelIndicator":
        values = [int(i) for i in indices]
        if len(set(values)) != len(values):
            raise DimensionError(f"Duplicate predictor index in {values}")
        return cls(tuple(sorted(values)))

    @classmethod
    def from_mask(cls, mask: Sequence[bool]) -> "ModelIndicator":
        return cls(tuple(int(j) for j, on in enumerate(mask) if on))

    @classmethod
    def from_bits(cls, bits: int) -> "ModelIndicator":
        out = []
        j = 0
        while bits:
            if bits & 1:
                out.append(j)
            bits >>= 1
            j += 1
        return cls(tuple(out))

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def bits(self) -> int:
        value = 0
        for j in self.indices:
            value |= 1 << j
        return value

    @property
    def key(self) -> str:
        return ",".join(str(j) for j in self.indices)

    def mask(self, p: int) -> np.ndarray:
        self.validate(p)
        d = np.zeros(p, dtype=bool)
        d[list(self.indices)] = True
        return d

    def validate(self, p: int) -> None:
        if self.indices and self.indices[-1] >= p:
            raise DimensionError(f"Model index {self.indices[-1]} out of range for p={p}")

    def with_index(self, j: int) -> "ModelIndicator":
        if j in self.indices:
            return self
        return ModelIndicator.of(self.indices + (int(j),))

    def without(self, j: int) -> "ModelIndicator":
        return ModelIndicator(tuple(i for i in self.indices if i != j))

    def __contains__(self, j: object) -> bool:
        return j in self.indices

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class DesignMatrix:
    entries: np.ndarray
    rank_tol: float
    r: int
    gram: np.ndarray = field(repr=False)
    column_names: Tuple[str, ...] = ()

    @classmethod
    def from_array(
        cls,
        entries: np.ndarray,
        rank_tol: Optional[float] = None,
        column_names: Optional[Sequence[str]] = None,
    ) -> "DesignMatrix":
        arr = np.asarray(entries, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"Design must be a nonempty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DimensionError("Design contains NaN or Inf entries")
        n, p = arr.shape
        tol = default_rank_tol(n, p) if rank_tol is None else float(rank_tol)
        if tol < 0:
            raise DimensionError("rank_tol must be nonnegative")
        names = tuple(str(c) for c in column_names) if column_names is not None else ()
        if names and len(names) != p:
            raise DimensionError(f"Expected {p} column names, got {len(names)}")
        frozen = _frozen(arr)
        return cls(
            entries=frozen,
            rank_tol=tol,
            r=_rank_of(frozen, tol),
            gram=_frozen(frozen.T @ frozen),
            column_names=names,
        )

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @property
    def p(self) -> int:
        return int(self.entries.shape[1])

    def name_of(self, j: int) -> str:
        if self.column_names:
            return self.column_names[j]
        return f"x{j + 1}"


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    fitted: np.ndarray
    rss: float


def compute_rank(X: DesignMatrix | np.ndarray, rank_tol: Optional[float] = None) -> int:
    """Number of singular values above rank_tol times the largest one."""
    if isinstance(X, DesignMatrix):
        if rank_tol is None:
            return X.r
        return _rank_of(X.entries, float(rank_tol))
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    tol = default_rank_tol(*arr.shape) if rank_tol is None else float(rank_tol)
    return _rank_of(arr, tol)


def _check_response(X: DesignMatrix, y: np.ndarray, label: str = "y") -> np.ndarray:
    vec = np.asarray(y, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != X.n:
        raise DimensionError(f"{label} has shape {vec.shape}, expected ({X.n},)")
    return vec


def least_squares_fit(X: DesignMatrix, y: np.ndarray, M: ModelIndicator) -> FitResult:
    """Minimum-norm least squares on the columns in M."""
    vec = _check_response(X, y)
    M.validate(X.p)
    beta = np.zeros(X.p)
    if M.size == 0:
        fitted = np.zeros(X.n)
        return FitResult(_frozen(beta), _frozen(fitted), sum_squares(vec))

    cols = list(M.indices)
    sub = X.entries[:, cols]
    coef, _, _, _ = sla.lstsq(sub, vec, cond=X.rank_tol, lapack_driver="gelsd")
    beta[cols] = coef
    fitted = sub @ coef
    return FitResult(_frozen(beta), _frozen(fitted), sum_squares(vec - fitted))


def rss_delta_drop(X: DesignMatrix, y: np.ndarray, M: ModelIndicator, j: int) -> float:
    """RSS(M without j) - RSS(M), clipped at zero."""
    if j not in M:
        raise DimensionError(f"Predictor {j} is not in model {{{M.key}}}")
    full = least_squares_fit(X, y, M)
    reduced = least_squares_fit(X, y, M.without(j))
    return max(reduced.rss - full.rss, 0.0)


def mean_projection(X: DesignMatrix, mu: np.ndarray, M: ModelIndicator) -> Tuple[np.ndarray, float]:
    vec = _check_response(X, mu, label="mu")
    fit = least_squares_fit(X, vec, M)
    return fit.fitted, sum_squares(vec - fit.fitted)


def saturated_representative(X: DesignMatrix) -> ModelIndicator:
    """First r linearly independent columns, scanned left to right."""
    chosen: list[int] = []
    rank = 0
    for j in range(X.p):
        if rank >= X.r:
            break
        trial = chosen + [j]
        trial_rank = _rank_of(X.entries[:, trial], X.rank_tol)
        if trial_rank > rank:
            chosen = trial
            rank = trial_rank
    return ModelIndicator(tuple(chosen))


def is_orthogonal_design(X: DesignMatrix, tol: float = 1e-10) -> bool:
    """True when X'X is diagonal (relative to its diagonal) with no zero columns."""
    diag = np.diag(X.gram)
    if np.any(diag <= 0.0):
        return False
    scale = np.sqrt(np.outer(diag, diag))
    off = np.abs(X.gram) / scale
    np.fill_diagonal(off, 0.0)
    return bool(np.max(off, initial=0.0) <= tol)


def center_for_intercept(entries: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Projects out an always-included constant column.

    Returns centered predictors and response plus the column means and the
    response mean needed to recover the intercept afterwards.
    """
    arr = np.asarray(entries, dtype=np.float64)
    vec = np.asarray(y, dtype=np.float64)
    x_mean = arr.mean(axis=0) if arr.shape[1] else np.zeros(0)
    y_mean = float(vec.mean())
    return arr - x_mean, vec - y_mean, x_mean, y_mean
