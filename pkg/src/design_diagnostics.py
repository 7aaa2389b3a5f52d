"""Sparse eigenvalues and multicollinearity functionals of a design matrix.

All quantities are computed on the unnormalized Gram matrix X'X. Exhaustive
enumeration is used whenever the subset count fits the budget; otherwise a
seeded random search with greedy swaps runs and the result is flagged
exact=False. Budgeted phi_min values are attained by some subset, so they
upper-bound the true minimum; budgeted phi_max values lower-bound the true
maximum.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from core_linalg import DesignMatrix, DimensionError, ModelIndicator, is_orthogonal_design
from parallel import chunked, ordered_map
from seeding import STREAM_DIAGNOSTICS, make_generator


DEFAULT_DIAG_BUDGET = 200_000
EIG_RTOL = 1e-10
CEIL_GUARD = 1e-9
INNER_EXHAUSTIVE_LIMIT = 512
INNER_SAMPLES = 64
CHUNK_SIZE = 1024

# second spawn key under STREAM_DIAGNOSTICS
_SEARCH_EIGS = 0
_SEARCH_TILDE = 1


class SingularGramError(ValueError):
    pass


class UndefinedFunctionalError(ValueError):
    def __init__(self, k: int, k_prime: int):
        self.k = int(k)
        self.k_prime = int(k_prime)
        super().__init__(
            f"tilde_phi[{k}] is undefined: k'={k_prime} >= k={k} leaves no proper submodel to remove"
        )


@dataclass(frozen=True)
class SparseSpectrum:
    k: int
    phi_min: float
    phi_max: float
    tau: float
    exact: bool
    subsets_evaluated: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "phi_min": float(self.phi_min),
            "phi_max": float(self.phi_max),
            "tau": float(self.tau),
            "exact": bool(self.exact),
            "subsets_evaluated": int(self.subsets_evaluated),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SparseSpectrum":
        return cls(
            k=int(data["k"]),
            phi_min=float(data["phi_min"]),
            phi_max=float(data["phi_max"]),
            tau=float(data["tau"]),
            exact=bool(data["exact"]),
            subsets_evaluated=int(data["subsets_evaluated"]),
        )


@dataclass(frozen=True)
class MulticollinearityProfile:
    k: int
    k_prime: int
    tilde_phi: float
    exact: bool
    inner_size: int = 0
    pairs_evaluated: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "k_prime": self.k_prime,
            "inner_size": self.inner_size,
            "tilde_phi": float(self.tilde_phi),
            "exact": bool(self.exact),
            "pairs_evaluated": int(self.pairs_evaluated),
        }


@dataclass(frozen=True)
class LambdaMatrix:
    matrix: np.ndarray
    min_eig: float
    local_indices: Tuple[int, ...]


@dataclass(frozen=True)
class AssumptionReport:
    name: str
    holds: bool
    exact: bool
    conditions: List[Dict[str, Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "holds": bool(self.holds),
            "exact": bool(self.exact),
            "conditions": [dict(c) for c in self.conditions],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class RateBounds:
    upper: float
    lower: float
    branch: str

    def to_dict(self) -> Dict[str, Any]:
        return {"upper": float(self.upper), "lower": float(self.lower), "branch": self.branch}


@dataclass(frozen=True)
class DesignClass:
    tau_r: float
    label: str
    threshold: float
    exact: bool
    note: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau_r": float(self.tau_r),
            "label": self.label,
            "threshold": float(self.threshold),
            "exact": bool(self.exact),
            "note": self.note,
        }


class SpectrumCache:
    """Sparse spectra of one design, computed at most once per k."""

    def __init__(
        self,
        X: DesignMatrix,
        budget: int = DEFAULT_DIAG_BUDGET,
        seed: int = 0,
        workers: Optional[int] = None,
    ):
        self.X = X
        self.budget = int(budget)
        self.seed = int(seed)
        self.workers = workers
        self._spectra: Dict[int, SparseSpectrum] = {}

    def get(self, k: int) -> SparseSpectrum:
        """Spectrum at size k, with sizes above r mapped onto r."""
        if k < 1:
            raise DimensionError(f"k must be at least 1, got {k}")
        if self.X.r < 1:
            raise DimensionError("Design has rank zero")
        base = min(int(k), self.X.r)
        spec = self._spectra.get(base)
        if spec is None:
            spec = sparse_eigs(self.X, base, self.budget, seed=self.seed, workers=self.workers)
            self._spectra[base] = spec
        if base == k:
            return spec
        return replace(spec, k=int(k))


def _extreme_eigs(sub: np.ndarray) -> Tuple[float, float]:
    vals = sla.eigvalsh(sub, check_finite=False)
    lo = float(vals[0])
    hi = float(vals[-1])
    if abs(lo) <= EIG_RTOL * abs(hi):
        lo = 0.0
    return lo, hi


def _subset_eigs(gram: np.ndarray, idx: Sequence[int]) -> Tuple[float, float]:
    cols = list(idx)
    return _extreme_eigs(gram[np.ix_(cols, cols)])


def _spectrum(k: int, lo: float, hi: float, exact: bool, evaluated: int) -> SparseSpectrum:
    lo = max(lo, 0.0)
    tau = lo / hi if hi > 0.0 else 0.0
    return SparseSpectrum(k=k, phi_min=lo, phi_max=hi, tau=min(tau, 1.0), exact=exact, subsets_evaluated=evaluated)


def _eigs_in_chunk(gram: np.ndarray, chunk: List[Tuple[int, ...]]) -> Tuple[float, float]:
    lo = math.inf
    hi = -math.inf
    for idx in chunk:
        a, b = _subset_eigs(gram, idx)
        lo = min(lo, a)
        hi = max(hi, b)
    return lo, hi


def _greedy_extreme(
    gram: np.ndarray,
    k: int,
    rng: np.random.Generator,
    budget: int,
    want_max: bool,
) -> Tuple[float, int]:
    """Random restarts with first-improvement single swaps."""
    p = gram.shape[0]
    sign = -1.0 if want_max else 1.0
    best = math.inf
    evaluated = 0
    while evaluated < budget:
        current = sorted(int(j) for j in rng.choice(p, size=k, replace=False))
        lo, hi = _subset_eigs(gram, current)
        value = sign * (hi if want_max else lo)
        evaluated += 1
        improved = True
        while improved and evaluated < budget:
            improved = False
            outside = [j for j in range(p) if j not in current]
            for pos in range(k):
                for j in outside:
                    trial = sorted(current[:pos] + current[pos + 1:] + [j])
                    lo, hi = _subset_eigs(gram, trial)
                    evaluated += 1
                    trial_value = sign * (hi if want_max else lo)
                    if trial_value < value:
                        current, value, improved = trial, trial_value, True
                        break
                    if evaluated >= budget:
                        break
                if improved or evaluated >= budget:
                    break
        best = min(best, value)
    return sign * best, evaluated


def sparse_eigs(
    X: DesignMatrix,
    k: int,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
) -> SparseSpectrum:
    """Extreme eigenvalues over all k x k principal submatrices of X'X."""
    if not 1 <= k <= X.p:
        raise DimensionError(f"k={k} must satisfy 1 <= k <= p={X.p}")
    gram = np.asarray(X.gram)

    if is_orthogonal_design(X):
        diag = np.diag(gram)
        return _spectrum(k, float(diag.min()), float(diag.max()), True, 0)

    count = math.comb(X.p, k)
    if count <= budget:
        chunks = chunked(itertools.combinations(range(X.p), k), CHUNK_SIZE)
        parts = ordered_map(lambda chunk: _eigs_in_chunk(gram, chunk), chunks, workers)
        lo = min(a for a, _ in parts)
        hi = max(b for _, b in parts)
        return _spectrum(k, lo, hi, True, count)

    half = max(1, int(budget) // 2)
    rng_min = make_generator(seed, STREAM_DIAGNOSTICS, _SEARCH_EIGS, k, 0)
    rng_max = make_generator(seed, STREAM_DIAGNOSTICS, _SEARCH_EIGS, k, 1)
    lo, n_lo = _greedy_extreme(gram, k, rng_min, half, want_max=False)
    hi, n_hi = _greedy_extreme(gram, k, rng_max, half, want_max=True)
    logging.warning(
        "[DIAG] C(%d,%d)=%d subsets exceed budget %d; spectrum at k=%d is a search bound",
        X.p,
        k,
        count,
        budget,
        k,
    )
    return _spectrum(k, lo, hi, False, n_lo + n_hi)


def tau_curve(
    X: DesignMatrix,
    k_max: int,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    cache: Optional[SpectrumCache] = None,
) -> List[SparseSpectrum]:
    """Spectra for k = 1..k_max; sizes above r repeat the size-r values."""
    if k_max < 1:
        raise DimensionError(f"k_max must be at least 1, got {k_max}")
    spectra = cache if cache is not None else SpectrumCache(X, budget, seed, workers)
    return [spectra.get(k) for k in range(1, int(k_max) + 1)]


def k_prime_from_tau(tau_2k: float, k: int) -> int:
    """ceil(tau[2k] k), floored at 1."""
    if k < 1:
        raise DimensionError(f"k must be at least 1, got {k}")
    return max(1, int(math.ceil(float(tau_2k) * k - CEIL_GUARD)))


def k_prime(
    X: DesignMatrix,
    k: int,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    cache: Optional[SpectrumCache] = None,
) -> int:
    if k < 1 or 2 * k > X.p:
        raise DimensionError(f"k={k} must satisfy 1 <= k and 2k <= p={X.p}")
    spectra = cache if cache is not None else SpectrumCache(X, budget, seed, workers)
    return k_prime_from_tau(spectra.get(2 * k).tau, k)


def _cholesky_inverse(gram_m: np.ndarray) -> np.ndarray:
    lo, hi = _extreme_eigs(gram_m)
    if hi <= 0.0 or lo <= EIG_RTOL * hi:
        raise SingularGramError(f"Gram submatrix is singular (eigenvalues in [{lo:.3g}, {hi:.3g}])")
    try:
        factor = sla.cho_factor(gram_m, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularGramError(f"Gram submatrix is not positive definite: {exc}") from exc
    inv = sla.cho_solve(factor, np.eye(gram_m.shape[0]), check_finite=False)
    return 0.5 * (inv + inv.T)


def lambda_matrix(X: DesignMatrix, M: ModelIndicator, M_sub: ModelIndicator) -> LambdaMatrix:
    """Block of (X_M'X_M)^-1 on the coordinates of M that M_sub leaves out.

    Rows and columns are addressed by position inside the sorted M. Times
    sigma^2 the block is the covariance of the least squares coefficients of
    M minus M_sub.
    """
    M.validate(X.p)
    M_sub.validate(X.p)
    extra = [j for j in M_sub.indices if j not in M]
    if extra:
        raise DimensionError(f"Submodel {{{M_sub.key}}} is not contained in {{{M.key}}}")
    local = tuple(pos for pos, j in enumerate(M.indices) if j not in M_sub)
    if not local:
        raise UndefinedFunctionalError(M.size, M_sub.size)
    cols = list(M.indices)
    inv = _cholesky_inverse(np.asarray(X.gram)[np.ix_(cols, cols)])
    block = inv[np.ix_(local, local)]
    min_eig = float(sla.eigvalsh(block, check_finite=False)[0])
    return LambdaMatrix(matrix=block, min_eig=min_eig, local_indices=local)


def _inner_max(
    inv: np.ndarray,
    k: int,
    inner: int,
    rng: Optional[np.random.Generator],
) -> Tuple[float, int, bool]:
    """max over removed sets of size inner of the smallest eigenvalue of the kept block."""
    keep = k - inner
    total = math.comb(k, inner)
    if total <= INNER_EXHAUSTIVE_LIMIT or rng is None:
        candidates = itertools.combinations(range(k), keep)
        exhaustive = True
    else:
        candidates = (
            tuple(sorted(int(v) for v in rng.choice(k, size=keep, replace=False))) for _ in range(INNER_SAMPLES)
        )
        exhaustive = False
    best = -math.inf
    seen = 0
    for kept in candidates:
        block = inv[np.ix_(kept, kept)]
        best = max(best, float(sla.eigvalsh(block, check_finite=False)[0]))
        seen += 1
    return best, seen, exhaustive


def _model_value(gram: np.ndarray, idx: Sequence[int], inner: int, rng: Optional[np.random.Generator]):
    cols = list(idx)
    try:
        inv = _cholesky_inverse(gram[np.ix_(cols, cols)])
    except SingularGramError:
        # unbounded coefficient variance; never the minimizer
        return math.inf, math.comb(len(cols), inner), True
    return _inner_max(inv, len(cols), inner, rng)


def _tilde_in_chunk(gram: np.ndarray, inner: int, chunk: List[Tuple[int, ...]]) -> Tuple[float, int]:
    best = math.inf
    seen = 0
    for idx in chunk:
        value, count, _ = _model_value(gram, idx, inner, None)
        best = min(best, value)
        seen += count
    return best, seen


def tilde_phi(
    X: DesignMatrix,
    k: int,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    inner_size: Optional[int] = None,
    cache: Optional[SpectrumCache] = None,
) -> MulticollinearityProfile:
    """min over size-k models M of max over size-k' submodels M' of the smallest
    eigenvalue of the coefficient-covariance block on M minus M'.

    inner_size replaces k' as the submodel size when given.
    """
    kp = k_prime(X, k, budget, seed, workers, cache)
    inner = kp if inner_size is None else int(inner_size)
    if inner < 0 or inner >= k:
        raise UndefinedFunctionalError(k, inner)
    gram = np.asarray(X.gram)

    if is_orthogonal_design(X):
        # keep the k - inner smallest squared norms inside M, pick M among the largest
        diag = np.sort(np.diag(gram))[::-1]
        value = 1.0 / float(diag[inner])
        return MulticollinearityProfile(k, kp, value, True, inner, 0)

    pairs = math.comb(X.p, k) * math.comb(k, inner)
    if pairs <= budget:
        chunks = chunked(itertools.combinations(range(X.p), k), CHUNK_SIZE)
        parts = ordered_map(lambda chunk: _tilde_in_chunk(gram, inner, chunk), chunks, workers)
        value = min(v for v, _ in parts)
        seen = sum(c for _, c in parts)
        return MulticollinearityProfile(k, kp, value, True, inner, seen)

    rng = make_generator(seed, STREAM_DIAGNOSTICS, _SEARCH_TILDE, k)
    value = math.inf
    seen = 0
    while seen < budget:
        idx = sorted(int(j) for j in rng.choice(X.p, size=k, replace=False))
        v, count, _ = _model_value(gram, idx, inner, rng)
        value = min(value, v)
        seen += max(count, 1)
    logging.warning("[DIAG] tilde_phi[%d] from %d sampled pairs (budget %d); value is not exact", k, seen, budget)
    return MulticollinearityProfile(k, kp, value, False, inner, seen)


def check_assumption_D(
    X: DesignMatrix,
    kappa1: int,
    kappa2: int,
    c1: float,
    c2: float,
    c3: float,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    cache: Optional[SpectrumCache] = None,
) -> AssumptionReport:
    """Multicollinearity conditions on the sizes kappa1..kappa2.

    D.1  c1 <= tau[2k] k <= k - 1
    D.2  tau[2 kappa2] >= (kappa2 / (p e))^c2
    D.3  phi_min[2k] tilde_phi[k] >= c3, with c3 <= 1
    """
    if not 1 <= kappa1 <= kappa2 or 2 * kappa2 > X.r:
        raise DimensionError(f"Need 1 <= kappa1={kappa1} <= kappa2={kappa2} <= r/2 = {X.r / 2}")
    if c3 > 1.0:
        raise ValueError(f"c3 must not exceed 1, got {c3}")
    spectra = cache if cache is not None else SpectrumCache(X, budget, seed, workers)
    conditions: List[Dict[str, Any]] = []
    notes: List[str] = []
    exact = True

    for k in range(int(kappa1), int(kappa2) + 1):
        spec = spectra.get(2 * k)
        exact = exact and spec.exact
        tk = spec.tau * k
        conditions.append(
            {"condition": "D.1", "k": k, "tau_2k": spec.tau, "value": tk, "holds": bool(c1 <= tk <= k - 1)}
        )
        row: Dict[str, Any] = {"condition": "D.3", "k": k, "phi_min_2k": spec.phi_min}
        try:
            prof = tilde_phi(X, k, budget, seed, workers, cache=spectra)
            exact = exact and prof.exact
            value = spec.phi_min * prof.tilde_phi
            row.update(
                {"k_prime": prof.k_prime, "tilde_phi": prof.tilde_phi, "value": value, "holds": bool(value >= c3)}
            )
        except UndefinedFunctionalError as exc:
            row.update({"k_prime": exc.k_prime, "tilde_phi": None, "value": None, "holds": False})
            notes.append(str(exc))
        conditions.append(row)

    spec2 = spectra.get(2 * int(kappa2))
    bound = (kappa2 / (X.p * math.e)) ** c2
    conditions.append(
        {"condition": "D.2", "k": int(kappa2), "tau_2k": spec2.tau, "bound": bound, "holds": bool(spec2.tau >= bound)}
    )
    if not exact:
        notes.append("some quantities come from a budgeted search and are not exact")
    return AssumptionReport("D", all(c["holds"] for c in conditions), exact, conditions, notes)


def check_assumption_B(
    X: DesignMatrix,
    beta: np.ndarray,
    c4: float,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    cache: Optional[SpectrumCache] = None,
) -> AssumptionReport:
    """max_j beta_j^2 <= c4 tau[2 p0] tilde_phi[p0] (ln(p/p0) + 1).

    The submodel size used for tilde_phi is min(k', p0 - 1) so that designs
    with k' = p0 still get a value.
    """
    b = np.asarray(beta, dtype=np.float64).ravel()
    if b.shape != (X.p,):
        raise DimensionError(f"beta has shape {b.shape}, expected ({X.p},)")
    p0 = int(np.count_nonzero(b))
    if p0 == 0:
        raise ValueError("beta is zero; the coefficient bound needs p0 >= 1")
    if 2 * p0 > X.p:
        raise DimensionError(f"2 p0 = {2 * p0} exceeds p = {X.p}")
    spectra = cache if cache is not None else SpectrumCache(X, budget, seed, workers)
    spec = spectra.get(2 * p0)
    kp = k_prime_from_tau(spec.tau, p0)
    prof = tilde_phi(X, p0, budget, seed, workers, inner_size=min(kp, p0 - 1), cache=spectra)
    lhs = float(np.max(b * b))
    rhs = float(c4 * spec.tau * prof.tilde_phi * (math.log(X.p / p0) + 1.0))
    exact = spec.exact and prof.exact
    row = {
        "condition": "B",
        "p0": p0,
        "lhs": lhs,
        "rhs": rhs,
        "slack": rhs - lhs,
        "tau_2p0": spec.tau,
        "tilde_phi": prof.tilde_phi,
        "inner_size": prof.inner_size,
        "holds": bool(lhs <= rhs),
    }
    notes = [] if exact else ["some quantities come from a budgeted search and are not exact"]
    return AssumptionReport("B", lhs <= rhs, exact, [row], notes)


def rate_bounds(
    p: int,
    p0: int,
    r: int,
    tau_2p0: Optional[float],
    tau_p0: Optional[float],
    sigma_sq: float,
    C1: float = 1.0,
    C2: float = 1.0,
) -> RateBounds:
    """Upper risk rate of the MAP selector and the minimax lower rate.

    upper = C1 sigma^2 min(p0 (ln(p/p0) + 1), r)
    lower = C2 sigma^2 tau[2 p0] p0 (ln(p/p0) + 1)   for p0 <= r/2
          = C2 sigma^2 tau[p0] r                     for r/2 < p0 <= r
    """
    if not 1 <= p0 <= r <= p:
        raise ValueError(f"Need 1 <= p0={p0} <= r={r} <= p={p}")
    if sigma_sq <= 0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    log_term = p0 * (math.log(p / p0) + 1.0)
    upper = C1 * sigma_sq * min(log_term, r)
    if 2 * p0 <= r:
        if tau_2p0 is None or not 0.0 <= tau_2p0 <= 1.0:
            raise ValueError(f"tau[2 p0] must lie in [0, 1], got {tau_2p0}")
        return RateBounds(upper, C2 * sigma_sq * tau_2p0 * log_term, "sparse")
    if tau_p0 is None or not 0.0 <= tau_p0 <= 1.0:
        raise ValueError(f"tau[p0] must lie in [0, 1], got {tau_p0}")
    return RateBounds(upper, C2 * sigma_sq * tau_p0 * r, "dense")


def classify_design(
    X: DesignMatrix,
    threshold: float,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    cache: Optional[SpectrumCache] = None,
) -> DesignClass:
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    spectra = cache if cache is not None else SpectrumCache(X, budget, seed, workers)
    spec = spectra.get(X.r)
    label = "nearly-orthogonal" if spec.tau >= threshold else "multicollinear"
    note = (
        "advisory: near-orthogonality is a property of a sequence of designs as p grows; "
        f"this label compares tau[r] of one matrix with c={threshold}"
    )
    return DesignClass(spec.tau, label, float(threshold), spec.exact, note)


def diagnose_report(
    X: DesignMatrix,
    k_max: Optional[int] = None,
    budget: int = DEFAULT_DIAG_BUDGET,
    seed: int = 0,
    workers: Optional[int] = None,
    threshold: float = 0.5,
    beta: Optional[np.ndarray] = None,
    sigma_sq: float = 1.0,
    c4: float = 1.0,
    assumption_d: Optional[Dict[str, float]] = None,
    C1: float = 1.0,
    C2: float = 1.0,
) -> Dict[str, Any]:
    """Bundle written by the diagnose command."""
    cache = SpectrumCache(X, budget, seed, workers)
    top = X.r if k_max is None else max(1, int(k_max))
    curve = tau_curve(X, top, cache=cache)

    profiles: List[Dict[str, Any]] = []
    for k in range(1, min(X.r // 2, X.p // 2, top) + 1):
        try:
            profiles.append(tilde_phi(X, k, budget, seed, workers, cache=cache).to_dict())
        except UndefinedFunctionalError as exc:
            profiles.append({"k": k, "k_prime": exc.k_prime, "tilde_phi": None, "undefined": str(exc)})

    report: Dict[str, Any] = {
        "n": X.n,
        "p": X.p,
        "r": X.r,
        "tau_curve": [s.tau for s in curve],
        "spectra": [s.to_dict() for s in curve],
        "profiles": profiles,
        "classification": classify_design(X, threshold, cache=cache).to_dict(),
    }
    if assumption_d:
        report["assumption_D"] = check_assumption_D(
            X,
            int(assumption_d["kappa1"]),
            int(assumption_d["kappa2"]),
            float(assumption_d["c1"]),
            float(assumption_d["c2"]),
            float(assumption_d["c3"]),
            budget,
            seed,
            workers,
            cache=cache,
        ).to_dict()
    if beta is not None:
        b = np.asarray(beta, dtype=np.float64).ravel()
        p0 = int(np.count_nonzero(b))
        if p0 >= 1 and 2 * p0 <= X.p:
            report["assumption_B"] = check_assumption_B(X, b, c4, budget, seed, workers, cache=cache).to_dict()
        if 1 <= p0 <= X.r:
            tau_2p0 = cache.get(2 * p0).tau if 2 * p0 <= X.r else None
            tau_p0 = cache.get(p0).tau
            report["rate_bounds"] = rate_bounds(X.p, p0, X.r, tau_2p0, tau_p0, sigma_sq, C1, C2).to_dict()
    inexact = [s.k for s in curve if not s.exact]
    if inexact:
        logging.warning("[DIAG] spectra for k=%s are budgeted search bounds", inexact)
    label = report["classification"]
    logging.info("[DIAG] p=%d r=%d, tau[r]=%.6g (%s)", X.p, X.r, label["tau_r"], label["label"])
    return report
