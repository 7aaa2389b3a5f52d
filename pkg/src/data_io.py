"""CSV ingestion and synthetic design construction."""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core_linalg import DesignMatrix, center_for_intercept
from seeding import STREAM_DESIGN, make_generator


RESPONSE_COLUMN = "y"
DESIGN_KINDS = ("orthonormal", "iid_gaussian", "equicorrelated", "custom")

_PARSER_LINE_RE = re.compile(r"line (\d+)")


class InputError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        text = f"line {line}: {message}" if line is not None else message
        super().__init__(text)


@dataclass(frozen=True)
class RegressionData:
    """Response and predictors as read from disk, intercept already projected out."""

    X: Optional[DesignMatrix]
    y: np.ndarray
    column_names: Tuple[str, ...]
    intercept: bool
    x_mean: np.ndarray
    y_mean: float

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def p(self) -> int:
        return len(self.column_names)


def _read_frame(path: str) -> pd.DataFrame:
    if not os.path.isfile(path):
        raise InputError(f"File not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            sep=",",
            header=None,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError as exc:
        raise InputError(f"{path} is empty; a header row is required") from exc
    except pd.errors.ParserError as exc:
        match = _PARSER_LINE_RE.search(str(exc))
        raise InputError(f"malformed row ({exc})", int(match.group(1)) if match else None) from exc
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not UTF-8: {exc}") from exc
    # header read as a row so duplicate names are not silently renamed
    header = [str(c).strip() for c in frame.iloc[0]]
    if len(set(header)) != len(header):
        raise InputError("duplicate column names in header", 1)
    frame = frame.iloc[1:].reset_index(drop=True)
    frame.columns = header
    return frame


def _numeric(frame: pd.DataFrame) -> np.ndarray:
    out = np.empty(frame.shape, dtype=np.float64)
    for col_pos, name in enumerate(frame.columns):
        raw = frame[name]
        values = pd.to_numeric(raw.str.strip(), errors="coerce")
        bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=np.float64, na_value=np.nan))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            cell = raw.iloc[row]
            # header is line 1
            raise InputError(f"non-numeric value {cell!r} in column {name!r}", row + 2)
        out[:, col_pos] = values.to_numpy(dtype=np.float64)
    return out


def read_regression_csv(
    path: str,
    intercept: bool = True,
    response: str = RESPONSE_COLUMN,
    rank_tol: Optional[float] = None,
) -> RegressionData:
    frame = _read_frame(path)
    if response not in frame.columns:
        raise InputError(f"response column {response!r} not found in header", 1)
    if frame.shape[0] == 0:
        raise InputError("no data rows")
    values = _numeric(frame)
    names = tuple(c for c in frame.columns if c != response)
    y = values[:, list(frame.columns).index(response)]
    entries = values[:, [i for i, c in enumerate(frame.columns) if c != response]]

    if intercept:
        entries, y, x_mean, y_mean = center_for_intercept(entries, y)
    else:
        x_mean, y_mean = np.zeros(len(names)), 0.0

    X = DesignMatrix.from_array(entries, rank_tol=rank_tol, column_names=names) if names else None
    logging.info(
        "[DATA] %s: n=%d, p=%d, rank=%s, intercept=%s",
        os.path.basename(path),
        y.shape[0],
        len(names),
        X.r if X is not None else 0,
        intercept,
    )
    return RegressionData(X=X, y=y, column_names=names, intercept=intercept, x_mean=x_mean, y_mean=y_mean)


def read_design_csv(path: str, rank_tol: Optional[float] = None) -> DesignMatrix:
    """Predictor matrix only; a response column, if present, is ignored."""
    frame = _read_frame(path)
    if RESPONSE_COLUMN in frame.columns:
        frame = frame.drop(columns=[RESPONSE_COLUMN])
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise InputError("design file needs at least one row and one predictor column")
    return DesignMatrix.from_array(_numeric(frame), rank_tol=rank_tol, column_names=list(frame.columns))


def intercept_of(data: RegressionData, beta_hat: np.ndarray) -> float:
    if not data.intercept:
        return 0.0
    return float(data.y_mean - data.x_mean @ np.asarray(beta_hat, dtype=np.float64))


def _unit_columns(arr: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(arr, axis=0)
    norms[norms == 0.0] = 1.0
    return arr / norms


def equicorrelation_matrix(p: int, rho: float) -> np.ndarray:
    return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))


def build_design(
    kind: str,
    n: int,
    p: int,
    rho: Optional[float] = None,
    seed: int = 0,
    custom: Optional[Sequence[Sequence[float]]] = None,
) -> np.ndarray:
    """Synthetic n x p design.

    orthonormal     first p columns of I_n (needs n >= p)
    iid_gaussian    N(0,1) entries, columns scaled to unit norm
    equicorrelated  unit columns with pairwise inner product rho; exact when
                    n >= p, otherwise Gaussian rows with that correlation,
                    columns scaled to unit norm
    custom          the supplied matrix
    """
    if n < 1 or p < 1:
        raise InputError(f"n and p must be positive, got n={n}, p={p}")
    if kind == "orthonormal":
        if n < p:
            raise InputError(f"orthonormal design needs n >= p, got n={n}, p={p}")
        return np.eye(n)[:, :p].copy()

    rng = make_generator(seed, STREAM_DESIGN)
    if kind == "iid_gaussian":
        return _unit_columns(rng.standard_normal((n, p)))

    if kind == "equicorrelated":
        if rho is None or not (-1.0 / max(p - 1, 1) < rho < 1.0) or not math.isfinite(rho):
            raise InputError(f"equicorrelated design needs -1/(p-1) < rho < 1, got {rho}")
        corr = equicorrelation_matrix(p, float(rho))
        chol = np.linalg.cholesky(corr)
        if n >= p:
            q, _ = np.linalg.qr(rng.standard_normal((n, p)))
            return q @ chol.T
        return _unit_columns(rng.standard_normal((n, p)) @ chol.T)

    if kind == "custom":
        if custom is None:
            raise InputError("custom design needs an explicit matrix")
        arr = np.asarray(custom, dtype=np.float64)
        if arr.shape != (n, p):
            raise InputError(f"custom design has shape {arr.shape}, expected ({n}, {p})")
        return arr.copy()

    raise InputError(f"Unknown design kind {kind!r}; expected one of {', '.join(DESIGN_KINDS)}")
