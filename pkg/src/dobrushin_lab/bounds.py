"""Closed-form mgf and tail bounds for self-bounding functions under the
Dobrushin condition, and their specialisations to the application models.

Notation: ``V = a * E g + b`` is the variance proxy, ``eta = |A|_1`` the
column-sum norm of the interdependence matrix.  Every tail probability is
capped at 1.  Functions taking ``t`` or ``theta`` accept scalars or arrays.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError, HypothesisViolation

CONVEX_DISTANCE_DIVISOR = 26.1
INDEPENDENT_CONVEX_RATE = 0.25
SWR_CONVEX_DIVISOR = 16
TSP_DIVISOR = 1671
STEINER_DIVISOR = 520000
SWR_TSP_DIVISOR = 1024
TOUR_SQUARE_BUDGET = 64          # sum alpha_i^2 <= 64 C^2 for the tour witness
MST_SQUARE_BUDGET = 19680        # sum alpha_i^2 <= 19680 for the MST witness
_AC_BRACKET = (0.2, 0.4)


def _ret(x, like):
    return float(x) if np.ndim(like) == 0 else np.asarray(x, dtype=float)


def _nonneg(t, name="t"):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must be nonnegative")
    return arr


@dataclass(frozen=True)
class BoundSpec:
    a: float
    b: float
    mean_g: float
    norm1: float
    norm_inf: Optional[float] = None

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError("a and b must be nonnegative")
        if self.mean_g < 0:
            raise DomainError("E g must be nonnegative for a nonnegative g")
        if not 0 <= self.norm1 < 1:
            raise DomainError("the Dobrushin condition needs 0 <= |A|_1 < 1")
        if self.norm_inf is not None and self.norm_inf > 1:
            raise DomainError("the Dobrushin condition needs |A|_inf <= 1")

    @property
    def variance_proxy(self) -> float:
        return self.a * self.mean_g + self.b

    @property
    def gap(self) -> float:
        return 1.0 - self.norm1


@dataclass(frozen=True, eq=False)
class TailCurve:
    thresholds: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise DomainError("thresholds and values must be matching vectors")
        if np.any(np.diff(t) < 0):
            raise DomainError("thresholds must be ascending")
        if np.any(v > 1.0) or np.any(v < 0):
            raise DomainError("bound values must lie in [0, 1]")
        if np.any(np.diff(v) > 1e-15):
            raise DomainError("bound values must be nonincreasing in t")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "values", v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "bound"])
        for t, v in zip(self.thresholds, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> "TailCurve":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        return cls(np.array([float(r[0]) for r in rows]), np.array([float(r[1]) for r in rows]), label)


# --- moment generating function bounds ------------------------------------

def star_theta_max(s: BoundSpec) -> float:
    return math.inf if s.a == 0 else s.gap / s.a


def weak_theta_max(s: BoundSpec) -> float:
    return math.inf if s.a == 0 else s.gap / (2 * s.a)


def _theta_range(theta, hi):
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > hi):
        raise DomainError(f"theta must lie in [0, {hi}]")
    return th


def mgf_star_upper(theta, s: BoundSpec):
    """``V theta^2 / (2 (1 - eta - a theta))``; infinite at the right end of the range."""
    th = _theta_range(theta, star_theta_max(s))
    den = 2.0 * (s.gap - s.a * th)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(th == 0, 0.0, s.variance_proxy * th ** 2 / den)
    return _ret(out, theta)


def mgf_weak_upper(theta, s: BoundSpec):
    """``V theta^2 / (1 - eta - 2 a theta)``."""
    th = _theta_range(theta, weak_theta_max(s))
    den = s.gap - 2.0 * s.a * th
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(th == 0, 0.0, s.variance_proxy * th ** 2 / den)
    return _ret(out, theta)


def mgf_lower_derivative(theta, s: BoundSpec):
    """Lower bound on ``(log m)'(theta)`` for ``-(1 - eta)/(2a) <= theta <= 0``.

    Only meaningful for weakly *-self-bounding ``g`` with one-coordinate
    differences at most 1; exposed for plotting.
    """
    th = np.asarray(theta, dtype=float)
    lo = -weak_theta_max(s)
    if np.any(th > 0) or np.any(th < lo):
        raise DomainError(f"theta must lie in [{lo}, 0]")
    V = s.variance_proxy
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = V - th * s.a * V / (2.0 * (s.gap + 2.0 * s.a * th))
    out = -np.expm1(-th) * (2.0 / s.gap) * inner
    return _ret(out, theta)


# --- tail bounds -------------------------------------------------------------

def _exp_neg(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        ex = np.where(num == 0, 0.0, num / den)
    return np.minimum(1.0, np.exp(-ex))


def tail_upper_star(t, s: BoundSpec):
    """``exp(-(1 - eta) t^2 / (2 (V + a t)))``."""
    tt = _nonneg(t)
    return _ret(_exp_neg(s.gap * tt ** 2, 2.0 * (s.variance_proxy + s.a * tt)), t)


def tail_upper_weak(t, s: BoundSpec):
    """``exp(-(1 - eta) t^2 / (4 (V + a t)))``."""
    tt = _nonneg(t)
    return _ret(_exp_neg(s.gap * tt ** 2, 4.0 * (s.variance_proxy + s.a * tt)), t)


def lower_tail_regime(s: BoundSpec) -> str:
    return "gaussian" if s.a >= solve_ac() * s.gap else "bernstein"


def tail_lower(t, s: BoundSpec):
    """Lower-tail bound; the form depends on whether ``a >= a_c (1 - eta)``.

    Valid only when one-coordinate changes move ``g`` by at most 1, which the
    caller must ensure.
    """
    tt = _nonneg(t)
    V = s.variance_proxy
    if lower_tail_regime(s) == "gaussian":
        out = _exp_neg(s.gap * tt ** 2, 8.0 * V * np.ones_like(tt))
    else:
        out = _exp_neg(tt ** 2, 5.0 * V / s.gap + (2.0 / 3.0) * tt)
    return _ret(out, t)


def bernstein_tail(D: float, C: float, t):
    """``exp(-t^2 / (2 (D + C t)))``."""
    if D < 0 or C < 0:
        raise DomainError("D and C must be nonnegative")
    tt = _nonneg(t)
    return _ret(_exp_neg(tt ** 2, 2.0 * (D + C * tt)), t)


def chernoff_theta(D: float, C: float, t):
    """The exponent ``theta = t / (D + C t)`` used to turn an mgf bound into a tail bound."""
    tt = _nonneg(t)
    return _ret(tt / (D + C * tt), t)


def star_bernstein_parameters(s: BoundSpec) -> tuple:
    return s.variance_proxy / s.gap, s.a / s.gap


def weak_bernstein_parameters(s: BoundSpec) -> tuple:
    return 2.0 * s.variance_proxy / s.gap, 2.0 * s.a / s.gap


# --- the constant a_c ---------------------------------------------------------

def ac_residual(a: float) -> float:
    """``(exp(1/(4a)) - 1) / (1/(4a)) - 8/5``."""
    k = 1.0 / (4.0 * a)
    return math.expm1(k) / k - 1.6


_AC_CACHE: dict = {}


def solve_ac() -> float:
    if "ac" not in _AC_CACHE:
        _AC_CACHE["ac"] = bisect(ac_residual, *_AC_BRACKET, xtol=1e-12, rtol=4 * np.finfo(float).eps,
                                 maxiter=200)
    return _AC_CACHE["ac"]


def k_c() -> float:
    return 1.0 / (4.0 * solve_ac())


# --- convex distance ------------------------------------------------------------

def convex_distance_rate(norm1: float) -> float:
    if not 0 <= norm1 < 1:
        raise DomainError("need 0 <= |A|_1 < 1")
    return (1.0 - norm1) / CONVEX_DISTANCE_DIVISOR


def convex_distance_rhs(mu_S: float, norm1: float = 0.0) -> float:
    """Right side ``1 / mu(S)`` of the exponential convex distance inequality."""
    if not 0 < mu_S <= 1:
        raise DomainError("mu(S) must lie in (0, 1]")
    convex_distance_rate(norm1)
    return 1.0 / mu_S


def nonuniform_tail(t, C_budget: float, norm1: float):
    """``2 exp(-t^2 (1 - eta) / (26.1 C))`` for deviations from the median."""
    if C_budget <= 0:
        raise DomainError("C must be positive")
    tt = _nonneg(t)
    return _ret(np.minimum(1.0, 2.0 * np.exp(-tt ** 2 * convex_distance_rate(norm1) / C_budget)), t)


# --- application bounds ------------------------------------------------------------

class Application(str, Enum):
    TSP = "TSP"
    STEINER = "STEINER"
    CW_UP = "CW_UP"
    CW_LOW = "CW_LOW"
    SUBGRAPH_UP = "SUBGRAPH_UP"
    SUBGRAPH_LOW = "SUBGRAPH_LOW"
    SWR_CONVEX = "SWR_CONVEX"
    SWR_TSP = "SWR_TSP"


def _need(params, *names):
    missing = [n for n in names if n not in params]
    if missing:
        raise DomainError(f"missing parameters: {', '.join(missing)}")
    return [params[n] for n in names]


def _rho_ok(rho):
    if not 0 <= rho < 1:
        raise DomainError(f"hypothesis rho < 1 violated (rho = {rho})")


def cw_scale(beta: float, h: float, n: int) -> float:
    """``1 - tanh(h) + 4 / ((1 - beta) sqrt(n))``, an upper bound on ``2 E n_- / n``."""
    return 1.0 - math.tanh(h) + 4.0 / ((1.0 - beta) * math.sqrt(n))


def application_values(which, t, **params) -> np.ndarray:
    which = Application(which)
    tt = _nonneg(np.atleast_1d(t))
    if which is Application.TSP:
        rho, C = _need(params, "rho", "C_cost")
        _rho_ok(rho)
        if C < 1:
            raise DomainError("cost ratio C must be at least 1")
        out = 4.0 * np.exp(-tt ** 2 * (1 - rho) / (TSP_DIVISOR * C ** 2))
    elif which is Application.STEINER:
        (rho,) = _need(params, "rho")
        _rho_ok(rho)
        out = 4.0 * np.exp(-tt ** 2 * (1 - rho) / STEINER_DIVISOR)
    elif which in (Application.CW_UP, Application.CW_LOW):
        beta, h, n = _need(params, "beta", "h", "n")
        if not 0 <= beta < 1:
            raise DomainError(f"hypothesis 0 <= beta < 1 violated (beta = {beta})")
        if h < 0:
            raise DomainError(f"hypothesis h >= 0 violated (h = {h})")
        K = cw_scale(beta, h, n)
        if which is Application.CW_UP:
            out = np.exp(-n * (1 - beta) * tt ** 2 / (16.0 * K))
        else:
            out = np.exp(-n * (1 - beta) * tt ** 2 / (4.0 * K + 4.0 * tt))
    elif which in (Application.SUBGRAPH_UP, Application.SUBGRAPH_LOW):
        n, n_S, e_S, norm1, mean_N = _need(params, "n", "n_S", "e_S", "norm1", "mean_N")
        if not 0 <= norm1 < 1:
            raise DomainError(f"hypothesis |A|_1 < 1 violated (|A|_1 = {norm1})")
        scale = math.comb(n - 2, n_S - 2) * e_S
        if which is Application.SUBGRAPH_UP:
            out = _exp_neg((1 - norm1) * tt ** 2, 2.0 * scale * (mean_N + tt))
        else:
            out = _exp_neg((1 - norm1) * tt ** 2, 8.0 * scale * mean_N * np.ones_like(tt))
    elif which is Application.SWR_CONVEX:
        (C,) = _need(params, "C_budget")
        if C <= 0:
            raise DomainError("C must be positive")
        out = 4.0 * np.exp(-tt ** 2 / (SWR_CONVEX_DIVISOR * C))
    else:
        (C,) = _need(params, "C_cost")
        if C < 1:
            raise DomainError("cost ratio C must be at least 1")
        out = 4.0 * np.exp(-tt ** 2 / (SWR_TSP_DIVISOR * C ** 2))
    return np.minimum(1.0, out)


def application_tails(which, thresholds, **params) -> TailCurve:
    t = np.asarray(thresholds, dtype=float)
    return TailCurve(t, application_values(which, t, **params), Application(which).value)


def curve(fn, thresholds, *args, label: str = "") -> TailCurve:
    t = np.asarray(thresholds, dtype=float)
    return TailCurve(t, np.asarray(fn(t, *args), dtype=float), label)


# --- constant bookkeeping -------------------------------------------------------

class CompositionCheck(NamedTuple):
    name: str
    lhs: Fraction
    rhs: Fraction
    relation: str
    passed: bool


def constant_composition_checks() -> list:
    """Exact checks that the application constants follow from the generic ones."""
    d = Fraction(261, 10)
    out = []
    lhs = d * TOUR_SQUARE_BUDGET
    out.append(CompositionCheck("tsp", lhs, Fraction(TSP_DIVISOR), "<=", lhs <= TSP_DIVISOR))
    lhs = d * MST_SQUARE_BUDGET
    out.append(CompositionCheck("steiner", lhs, Fraction(STEINER_DIVISOR), "<=", lhs <= STEINER_DIVISOR))
    lhs = Fraction(SWR_CONVEX_DIVISOR * TOUR_SQUARE_BUDGET)
    out.append(CompositionCheck("swr_tsp", lhs, Fraction(SWR_TSP_DIVISOR), "==", lhs == SWR_TSP_DIVISOR))
    return out


def warn_if_outside(condition: bool, message: str) -> None:
    if not condition:
        warnings.warn(message, HypothesisViolation, stacklevel=2)
