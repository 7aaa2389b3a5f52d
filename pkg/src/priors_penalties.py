from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, gammaln, logsumexp


PriorKind = Literal["binomial", "geometric", "uniform", "table"]
Criterion = Literal["AIC", "BIC", "RIC", "lambda"]


class PriorError(ValueError):
    pass


@dataclass(frozen=True)
class HyperParams:
    gamma: float
    sigma_sq: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise PriorError(f"gamma must be positive, got {self.gamma}")
        if not (math.isfinite(self.sigma_sq) and self.sigma_sq > 0):
            raise PriorError(f"sigma_sq must be positive, got {self.sigma_sq}")

    @property
    def scale(self) -> float:
        """2 sigma^2 (1 + 1/gamma), the factor in front of every penalty."""
        return 2.0 * self.sigma_sq * (1.0 + 1.0 / self.gamma)

    @property
    def shrink(self) -> float:
        return self.gamma / (self.gamma + 1.0)


@dataclass(frozen=True)
class PriorSpec:
    kind: PriorKind
    xi: Optional[float] = None
    q: Optional[float] = None
    weights: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "binomial":
            if self.xi is None or not (0.0 < float(self.xi) < 1.0):
                raise PriorError(f"binomial prior needs 0 < xi < 1, got {self.xi}")
        elif self.kind == "geometric":
            if self.q is None or not (0.0 < float(self.q) < 1.0):
                raise PriorError(f"geometric prior needs 0 < q < 1, got {self.q}")
        elif self.kind == "table":
            w = tuple(float(v) for v in self.weights)
            if not w:
                raise PriorError("table prior needs at least one weight")
            if any(not math.isfinite(v) or v < 0 for v in w):
                raise PriorError("table weights must be finite and nonnegative")
            if not any(v > 0 for v in w):
                raise PriorError("table weights must not all be zero")
            object.__setattr__(self, "weights", w)
        elif self.kind != "uniform":
            raise PriorError(f"Unknown prior kind: {self.kind}")

    @classmethod
    def binomial(cls, xi: float) -> "PriorSpec":
        return cls("binomial", xi=float(xi))

    @classmethod
    def geometric(cls, q: float) -> "PriorSpec":
        return cls("geometric", q=float(q))

    @classmethod
    def uniform(cls) -> "PriorSpec":
        return cls("uniform")

    @classmethod
    def table(cls, weights: Sequence[float]) -> "PriorSpec":
        return cls("table", weights=tuple(float(w) for w in weights))

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "binomial":
            out["xi"] = self.xi
        elif self.kind == "geometric":
            out["q"] = self.q
        elif self.kind == "table":
            out["weights"] = list(self.weights)
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PriorSpec":
        kind = str(data.get("kind", "")).strip().lower()
        if kind == "binomial":
            return cls.binomial(data["xi"])
        if kind == "geometric":
            return cls.geometric(data["q"])
        if kind == "uniform":
            return cls.uniform()
        if kind == "table":
            return cls.table(data.get("weights") or [])
        raise PriorError(f"Unknown prior kind: {data.get('kind')!r}")


@dataclass(frozen=True)
class PenaltySchedule:
    p: int
    r: int
    hp: HyperParams
    pen: np.ndarray
    log_prior: Optional[np.ndarray] = field(default=None)
    L: Optional[np.ndarray] = field(default=None)

    def log_prior_term(self, k: int) -> float:
        """Model-size part of the log posterior, -Pen(k) / (2 sigma^2 (1 + 1/gamma))."""
        return -float(self.pen[k]) / self.hp.scale

    def as_rows(self) -> List[Dict[str, float]]:
        rows = []
        for k in range(self.r + 1):
            lp = float(self.log_prior[k]) if self.log_prior is not None else float("nan")
            rows.append(
                {
                    "k": k,
                    "prior": math.exp(lp) if math.isfinite(lp) else float("nan"),
                    "log_prior": lp,
                    "L": float(self.L[k]) if self.L is not None else float("nan"),
                    "pen": float(self.pen[k]),
                }
            )
        return rows


@dataclass(frozen=True)
class PriorCheckReport:
    holds: bool
    violations: List[int]
    margins: List[float]
    c_gamma: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "violations": list(self.violations),
            "margins": [float(m) for m in self.margins],
            "c_gamma": self.c_gamma,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class XiCalibration:
    criterion: str
    lam: float
    xi: float
    xi_approx: float


def log_binomial(p: int, k: int) -> float:
    return float(gammaln(p + 1) - gammaln(k + 1) - gammaln(p - k + 1))


def _log_binomial_row(p: int, r: int) -> np.ndarray:
    k = np.arange(r + 1, dtype=np.float64)
    return gammaln(p + 1.0) - gammaln(k + 1.0) - gammaln(p - k + 1.0)


def _check_sizes(p: int, r: int) -> None:
    if p < 1:
        raise PriorError(f"p must be at least 1, got {p}")
    if r < 0 or r > p:
        raise PriorError(f"rank r={r} must satisfy 0 <= r <= p={p}")


def prior_log_weights(prior: PriorSpec, r: int, p: int) -> np.ndarray:
    """Normalized ln pi(k) on the support 0..r."""
    _check_sizes(p, r)
    k = np.arange(r + 1, dtype=np.float64)
    if prior.kind == "binomial":
        xi = float(prior.xi)
        raw = _log_binomial_row(p, r) + k * math.log(xi) + (p - k) * math.log1p(-xi)
    elif prior.kind == "geometric":
        raw = k * math.log(float(prior.q))
    elif prior.kind == "uniform":
        raw = np.zeros(r + 1)
    else:
        if len(prior.weights) != r + 1:
            raise PriorError(f"table prior has {len(prior.weights)} weights, expected r+1={r + 1}")
        w = np.asarray(prior.weights, dtype=np.float64)
        zero = np.flatnonzero(w <= 0.0)
        if zero.size:
            raise PriorError(f"prior mass is zero at k={int(zero[0])} inside the support 0..{r}")
        raw = np.log(w)
    out = raw - logsumexp(raw)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise PriorError(f"prior mass underflows to zero at k={bad}")
    return out


def penalty_schedule(p: int, r: int, prior: PriorSpec, hp: HyperParams) -> PenaltySchedule:
    """Complexity penalty Pen(0..r) induced by the size prior and the g-prior.

    Sizes below r carry the ln C(p,k) term; the saturated size r does not,
    because all size-r models collapse into a single one.
    """
    log_prior = prior_log_weights(prior, r, p)
    log_binom = _log_binomial_row(p, r)
    log_binom[r] = 0.0
    k = np.arange(r + 1, dtype=np.float64)
    pen = hp.scale * (log_binom - log_prior + 0.5 * k * math.log1p(hp.gamma))
    return PenaltySchedule(
        p=p,
        r=r,
        hp=hp,
        pen=pen,
        log_prior=log_prior,
        L=_L_from_log_prior(p, r, log_prior),
    )


def linear_penalty_schedule(p: int, r: int, lam: float, hp: HyperParams) -> PenaltySchedule:
    """Pen(k) = 2 sigma^2 lambda k, the classical fixed-lambda criteria."""
    _check_sizes(p, r)
    if not (math.isfinite(lam) and lam > 0):
        raise PriorError(f"lambda must be positive, got {lam}")
    pen = 2.0 * hp.sigma_sq * lam * np.arange(r + 1, dtype=np.float64)
    return PenaltySchedule(p=p, r=r, hp=hp, pen=pen)


def _L_from_log_prior(p: int, r: int, log_prior: np.ndarray) -> np.ndarray:
    L = np.empty(r + 1)
    # L_0 follows the oracle-inequality proof convention.
    L[0] = -2.0 * log_prior[0]
    for k in range(1, r):
        L[k] = (log_binomial(p, k) - log_prior[k]) / k
    if r >= 1:
        L[r] = -log_prior[r] / r
    return L


def compute_L(p: int, r: int, prior: PriorSpec) -> np.ndarray:
    return _L_from_log_prior(p, r, prior_log_weights(prior, r, p))


def c_gamma(gamma: float) -> float:
    return 8.0 * (gamma + 0.75) ** 2


def check_assumption_P(p: int, r: int, prior: PriorSpec, gamma: float) -> PriorCheckReport:
    """pi(k) <= C(p,k) exp(-c(gamma) k) for k < r and pi(r) <= exp(-c(gamma) r)."""
    if gamma <= 0:
        raise PriorError(f"gamma must be positive, got {gamma}")
    log_prior = prior_log_weights(prior, r, p)
    c = c_gamma(gamma)
    bound = _log_binomial_row(p, r) - c * np.arange(r + 1)
    bound[r] = -c * r
    margins = bound - log_prior
    violations = [int(k) for k in np.flatnonzero(margins < 0)]
    return PriorCheckReport(
        holds=not violations,
        violations=violations,
        margins=margins.tolist(),
        c_gamma=c,
    )


def check_minimax_prior(
    p: int,
    r: int,
    prior: PriorSpec,
    c1: float,
    c2: float,
    gamma: Optional[float] = None,
) -> PriorCheckReport:
    """Lower-tail conditions for simultaneous minimaxity on nearly-orthogonal designs.

    pi(k) >= (k/(pe))^(c1 k) for k = 1..r-1 and pi(r) >= exp(-c2 r).
    """
    log_prior = prior_log_weights(prior, r, p)
    margins: List[float] = []
    violations: List[int] = []
    for k in range(1, r + 1):
        if k < r:
            bound = c1 * k * (math.log(k) - math.log(p) - 1.0)
        else:
            bound = -c2 * r
        margin = float(log_prior[k] - bound)
        margins.append(margin)
        if margin < 0:
            violations.append(k)
    notes: List[str] = []
    c = None
    if gamma is not None:
        c = c_gamma(gamma)
        if c1 <= c or c2 <= c:
            notes.append(f"constants c1={c1}, c2={c2} do not exceed c(gamma)={c:.6g}")
    return PriorCheckReport(
        holds=not violations,
        violations=violations,
        margins=margins,
        c_gamma=c,
        notes=notes,
    )


def check_reduced_prior(p: int, r: int, prior: PriorSpec, k_primes: Sequence[int], c: float) -> PriorCheckReport:
    """pi(k') >= (k'/(pe))^(c k') for every supplied reduced size k'."""
    log_prior = prior_log_weights(prior, r, p)
    margins: List[float] = []
    violations: List[int] = []
    for kp in sorted(set(int(v) for v in k_primes)):
        if kp < 1 or kp > r:
            raise PriorError(f"reduced size k'={kp} outside 1..{r}")
        bound = c * kp * (math.log(kp) - math.log(p) - 1.0)
        margin = float(log_prior[kp] - bound)
        margins.append(margin)
        if margin < 0:
            violations.append(kp)
    return PriorCheckReport(holds=not violations, violations=violations, margins=margins)


def criterion_lambda(criterion: str, p: int, n: int, lam: Optional[float] = None) -> float:
    name = str(criterion or "").strip().upper()
    if name == "AIC":
        return 1.0
    if name == "BIC":
        if n < 2:
            raise PriorError("BIC needs n >= 2")
        return math.log(n) / 2.0
    if name == "RIC":
        if p < 2:
            raise PriorError("RIC needs p >= 2")
        return math.log(p)
    if name == "LAMBDA":
        if lam is None:
            raise PriorError("criterion 'lambda' needs an explicit lambda value")
        value = float(lam)
        if not (math.isfinite(value) and value > 0):
            raise PriorError(f"lambda must be positive and finite, got {lam}")
        return value
    raise PriorError(f"Unknown criterion: {criterion!r}")


def binomial_xi_for_criterion(
    criterion: str,
    p: int,
    n: int,
    gamma: float,
    lam: Optional[float] = None,
) -> XiCalibration:
    """Binomial prior parameter xi whose linear penalty has slope 2 sigma^2 lambda.

    Solves lambda = (1 + 1/gamma) ln(sqrt(1+gamma)(1-xi)/xi) exactly. The
    large-gamma approximation sqrt(gamma)/(exp(lambda)+sqrt(gamma)) is returned
    alongside for reporting.
    """
    if gamma <= 0:
        raise PriorError(f"gamma must be positive, got {gamma}")
    target = criterion_lambda(criterion, p, n, lam)
    root = math.sqrt(1.0 + gamma)
    a = target * gamma / (gamma + 1.0)
    # root / (root + e^a) as a logistic, finite for large a
    xi = float(expit(math.log(root) - a))
    approx = float(expit(0.5 * math.log(gamma) - target))
    return XiCalibration(criterion=str(criterion).upper(), lam=target, xi=xi, xi_approx=approx)
