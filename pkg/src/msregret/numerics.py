"""Numerical kernel: normal special functions, Gaussian quadrature, bracketed
root finding, and scalar maximization.

Every expectation in this package is an integral against a normal density, so
the quadrature interface is specialized to E[f(X)] with X ~ N(mean, sd^2).
Gauss-Hermite with the substitution x = mean + sqrt(2)*sd*z turns that into

    E[f(X)] ~= (1/sqrt(pi)) * sum_i w_i f(mean + sqrt(2)*sd*z_i),

which is exact for polynomials in x of degree <= 2k-1 at order k.  When two
successive orders disagree beyond a caller-supplied absolute tolerance the
routine escalates the order and finally falls back to piecewise adaptive
Simpson on [mean - 10*sd, mean + 10*sd].

All functions here are pure and deterministic; values may be shared freely
across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy import optimize, special

__all__ = [
    "DomainError",
    "ConvergenceError",
    "BracketError",
    "QuadratureSpec",
    "RngSeed",
    "DEFAULT_QUADRATURE",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "gaussian_expectation",
    "find_root",
    "maximize_scalar",
]

_SQRT2 = math.sqrt(2.0)
_SQRTPI = math.sqrt(math.pi)
_ESCALATION_ORDER = 256
_SIMPSON_HALF_WIDTH = 10.0  # integration window half-width in sd units


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iterative scheme failed to reach the requested tolerance."""


class BracketError(ValueError):
    """A root bracket does not actually bracket a sign change."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Hermite order and the tolerance governing the adaptive fallback.

    node_count is the base order; the fallback compares the base order against
    twice the base order and escalates when they disagree by more than
    fallback_abs_tol in absolute value.
    """

    node_count: int = 64
    fallback_abs_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.node_count < 16:
            raise DomainError(f"node_count must be >= 16, got {self.node_count}")
        if not self.fallback_abs_tol > 0:
            raise DomainError(
                f"fallback_abs_tol must be positive, got {self.fallback_abs_tol}"
            )


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit unsigned seed; equal seeds produce bit-identical streams."""

    seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must fit in 64 unsigned bits, got {self.seed}")


DEFAULT_QUADRATURE = QuadratureSpec()


def std_normal_cdf(x):
    """Standard normal CDF, absolute error <= 1e-12, saturating in the tails.

    Accepts a float or an ndarray and returns the same shape.
    """
    out = special.ndtr(x)
    return float(out) if np.ndim(x) == 0 else out


def std_normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def std_normal_quantile(p: float) -> float:
    """Inverse of std_normal_cdf on (0, 1).

    Raises DomainError outside the open interval.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {p}")
    return float(special.ndtri(p))


@lru_cache(maxsize=16)
def _gh_nodes(order: int) -> Tuple[np.ndarray, np.ndarray]:
    # roots_hermite stays finite at high orders where the power-basis
    # recurrence overflows
    z, w = special.roots_hermite(order)
    return z, w / _SQRTPI


def _gh_value(f: Callable, mean: float, sd: float, order: int) -> float:
    z, w = _gh_nodes(order)
    vals = np.asarray(f(mean + _SQRT2 * sd * z), dtype=float)
    return float(w @ vals)


def _scalar_call(f: Callable, x: float) -> float:
    # integrands are written against ndarray input; evaluate pointwise
    return float(np.asarray(f(np.array([x], dtype=float)))[0])


def _adaptive_simpson(f: Callable, a: float, b: float, tol: float) -> float:
    fa = _scalar_call(f, a)
    fb = _scalar_call(f, b)
    m = 0.5 * (a + b)
    fm = _scalar_call(f, m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recur(a, fa, m, fm, b, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = _scalar_call(f, lm)
        frm = _scalar_call(f, rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth <= 0:
            raise ConvergenceError(
                "adaptive Simpson fallback exhausted its recursion depth"
            )
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recur(a, fa, lm, flm, m, fm, left, tol / 2.0, depth - 1) + recur(
            m, fm, rm, frm, b, fb, right, tol / 2.0, depth - 1
        )

    return recur(a, fa, m, fm, b, fb, whole, tol, 48)


def gaussian_expectation(
    f: Callable,
    mean: float,
    sd: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """E[f(X)] with X ~ N(mean, sd^2) for a bounded (or normal-integrable) f.

    f must accept an ndarray of evaluation points and return values
    elementwise.  Gauss-Hermite at spec.node_count is compared against twice
    the order; on disagreement beyond spec.fallback_abs_tol the order
    escalates to 256 and finally to piecewise adaptive Simpson on
    [mean - 10*sd, mean + 10*sd].

    Raises ConvergenceError when even the fallback cannot certify the
    tolerance, DomainError for sd <= 0.
    """
    if not sd > 0:
        raise DomainError(f"sd must be positive, got {sd}")
    tol = spec.fallback_abs_tol
    v1 = _gh_value(f, mean, sd, spec.node_count)
    v2 = _gh_value(f, mean, sd, 2 * spec.node_count)
    if abs(v2 - v1) <= tol:
        return v2
    order = max(_ESCALATION_ORDER, 2 * spec.node_count)
    v3 = _gh_value(f, mean, sd, order)
    if abs(v3 - v2) <= tol:
        return v3

    def weighted(x: np.ndarray) -> np.ndarray:
        u = (np.asarray(x, dtype=float) - mean) / sd
        dens = np.exp(-0.5 * u * u) / (sd * math.sqrt(2.0 * math.pi))
        return np.asarray(f(x), dtype=float) * dens

    lo = mean - _SIMPSON_HALF_WIDTH * sd
    hi = mean + _SIMPSON_HALF_WIDTH * sd
    v4 = _adaptive_simpson(weighted, lo, hi, tol)
    if not math.isfinite(v4):
        raise ConvergenceError("adaptive Simpson fallback produced a non-finite value")
    return v4


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Brent root of a continuous f on [lo, hi] with f(lo)*f(hi) <= 0.

    Returns x with bracket width below tol.  Raises BracketError when the
    endpoint values share a sign.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"f({lo}) = {flo} and f({hi}) = {fhi} do not bracket a sign change"
        )
    return float(optimize.brentq(f, lo, hi, xtol=tol, maxiter=200))


def maximize_scalar(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10
) -> Tuple[float, float]:
    """(argmax, max) of f on [lo, hi] by golden section with parabolic steps.

    The caller supplies a bracket known to contain the maximizer; ties go to
    whichever maximizer the deterministic iteration lands on (the objectives
    in this package are unimodal on their brackets).
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    res = optimize.minimize_scalar(
        lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": tol}
    )
    x = float(res.x)
    # bounded Brent never evaluates the endpoints; check them explicitly
    best = (x, float(f(x)))
    for edge in (lo, hi):
        fe = float(f(edge))
        if fe > best[1]:
            best = (edge, fe)
    return best
