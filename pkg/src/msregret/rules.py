"""Treatment rules: maps from a scalar statistic to a treatment fraction.

A rule takes the observed statistic (for the Gaussian experiment, the sample
mean of the treated-arm outcomes, or a standardized version of it) and returns
the fraction of the population assigned to treatment, a value in [0, 1].
Singleton rules return only 0 or 1; fractional rules interpolate.  The module
also houses the generic Bayes first-order-condition solver for finitely
supported priors under power regret g(r) = r^alpha, and the closed-form
special case alpha = 2 (the tilted posterior probability matching rule).

All rule values are immutable, hashable, and evaluate as pure functions; they
accept a float or an ndarray statistic and return the matching type.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import special

from .numerics import (
    DomainError,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)

__all__ = [
    "PriorSupportError",
    "TreatmentRule",
    "EmpiricalSuccess",
    "Threshold",
    "HypothesisTest",
    "MinimaxMSR",
    "BayesFlatMSR",
    "PosteriorMatchFlat",
    "ComplementMix",
    "DiscretePrior",
    "DiscretePriorBayes",
    "psi",
    "evaluate",
    "solve_bayes_foc",
    "tilted_posterior_match_msr",
    "rule_to_dict",
    "rule_from_dict",
]

Stat = Union[float, np.ndarray]


class PriorSupportError(ValueError):
    """The (posterior) prior mass is one-sided, so the Bayes FOC has no interior root."""


def _match(value: np.ndarray, like: Stat) -> Stat:
    if np.ndim(like) == 0:
        return float(value)
    return value


def psi(x):
    """psi(x) = pdf(x) / (cdf(x) * (1 + x^2)), positive for all finite x.

    Evaluated through log-space so the cdf underflow for very negative x
    cancels against the pdf underflow.
    """
    x = np.asarray(x, dtype=float)
    log_pdf = -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)
    out = np.exp(log_pdf - special.log_ndtr(x)) / (1.0 + x * x)
    return float(out) if out.ndim == 0 else out


class TreatmentRule:
    """Base class; concrete rules are frozen dataclasses with an evaluate method."""

    kind: str = ""

    def evaluate(self, stat: Stat) -> Stat:
        raise NotImplementedError


@dataclass(frozen=True)
class EmpiricalSuccess(TreatmentRule):
    """Treat everyone iff the statistic is nonnegative."""

    kind = "empirical_success"

    def evaluate(self, stat: Stat) -> Stat:
        s = np.asarray(stat, dtype=float)
        return _match(np.where(s >= 0.0, 1.0, 0.0), stat)


@dataclass(frozen=True)
class Threshold(TreatmentRule):
    """Treat everyone iff the statistic reaches the threshold t."""

    t: float
    kind = "threshold"

    def evaluate(self, stat: Stat) -> Stat:
        s = np.asarray(stat, dtype=float)
        return _match(np.where(s >= self.t, 1.0, 0.0), stat)


@dataclass(frozen=True)
class HypothesisTest(TreatmentRule):
    """Treat everyone iff a one-sided size-alpha test on a standardized
    statistic rejects a zero effect, i.e. stat >= z_{1-alpha}."""

    alpha: float
    kind = "hypothesis_test"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 0.5:
            raise DomainError(f"alpha must lie in (0, 0.5), got {self.alpha}")

    @property
    def critical_value(self) -> float:
        return std_normal_quantile(1.0 - self.alpha)

    def evaluate(self, stat: Stat) -> Stat:
        s = np.asarray(stat, dtype=float)
        return _match(np.where(s >= self.critical_value, 1.0, 0.0), stat)


@dataclass(frozen=True)
class MinimaxMSR(TreatmentRule):
    """Minimax mean-square-regret rule: the logistic transform
    exp(2*tau_star*u) / (exp(2*tau_star*u) + 1) of u = stat / scale."""

    tau_star: float
    scale: float = 1.0
    kind = "minimax_msr"

    def __post_init__(self) -> None:
        if not self.tau_star > 0:
            raise DomainError(f"tau_star must be positive, got {self.tau_star}")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def evaluate(self, stat: Stat) -> Stat:
        u = np.asarray(stat, dtype=float) / self.scale
        return _match(special.expit(2.0 * self.tau_star * u), stat)


@dataclass(frozen=True)
class BayesFlatMSR(TreatmentRule):
    """Bayes mean-square-regret rule under a flat prior on the effect:
    cdf(u) * (1 + u * psi(u)) with u = stat / scale.

    Evaluated as cdf(u) + u * pdf(u) / (1 + u^2), the algebraically identical
    form that stays finite when cdf(u) underflows; the classic Mills bound
    keeps the value inside [0, 1] for every finite u.
    """

    scale: float = 1.0
    kind = "bayes_flat_msr"

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def evaluate(self, stat: Stat) -> Stat:
        u = np.asarray(stat, dtype=float) / self.scale
        out = std_normal_cdf(u) + u * std_normal_pdf(u) / (1.0 + u * u)
        return _match(np.clip(out, 0.0, 1.0), stat)


@dataclass(frozen=True)
class PosteriorMatchFlat(TreatmentRule):
    """Posterior probability matching under a flat prior: cdf(stat / scale)."""

    scale: float = 1.0
    kind = "posterior_match_flat"

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def evaluate(self, stat: Stat) -> Stat:
        u = np.asarray(stat, dtype=float) / self.scale
        return _match(np.asarray(std_normal_cdf(u)), stat)


@dataclass(frozen=True)
class ComplementMix(TreatmentRule):
    """Mixture of a base rule with its complement:
    (1 - lam) * base + lam * (1 - base)."""

    base: TreatmentRule
    lam: float
    kind = "complement_mix"

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"lam must lie in (0, 1), got {self.lam}")

    def evaluate(self, stat: Stat) -> Stat:
        b = np.asarray(self.base.evaluate(stat), dtype=float)
        return _match((1.0 - self.lam) * b + self.lam * (1.0 - b), stat)


@dataclass(frozen=True)
class DiscretePrior:
    """Finitely supported prior over the treatment effect.

    support is a tuple of (tau, weight) pairs with positive weights summing to
    one and distinct locations.  Use from_pairs to normalize raw weights.
    """

    support: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.support:
            raise DomainError("prior support must be nonempty")
        taus = [t for t, _ in self.support]
        weights = [w for _, w in self.support]
        if len(set(taus)) != len(taus):
            raise DomainError("prior support points must be distinct")
        if any(not w > 0 for w in weights):
            raise DomainError("prior weights must be positive")
        total = sum(weights)
        if abs(total - 1.0) > 1e-8:
            raise DomainError(f"prior weights must sum to 1, got {total}")

    @classmethod
    def from_pairs(cls, pairs) -> "DiscretePrior":
        pairs = [(float(t), float(w)) for t, w in pairs]
        total = sum(w for _, w in pairs)
        if not total > 0:
            raise DomainError("prior weights must have positive total mass")
        return cls(tuple((t, w / total) for t, w in pairs))

    @property
    def taus(self) -> np.ndarray:
        return np.array([t for t, _ in self.support])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.support])

    @property
    def two_sided(self) -> bool:
        taus = self.taus
        return bool((taus > 0).any() and (taus < 0).any())


@dataclass(frozen=True)
class DiscretePriorBayes(TreatmentRule):
    """Bayes rule for a finitely supported prior under power regret r^alpha_g,
    solving the posterior first-order condition at each statistic value."""

    prior: DiscretePrior
    alpha_g: float
    noise_sd: float
    kind = "discrete_prior_bayes"

    def __post_init__(self) -> None:
        if not self.alpha_g > 1:
            raise DomainError(f"alpha_g must exceed 1, got {self.alpha_g}")
        if not self.noise_sd > 0:
            raise DomainError(f"noise_sd must be positive, got {self.noise_sd}")

    def evaluate(self, stat: Stat) -> Stat:
        if np.ndim(stat) == 0:
            return solve_bayes_foc(self.prior, self.alpha_g, self.noise_sd, float(stat))
        flat = np.asarray(stat, dtype=float)
        out = np.array(
            [
                solve_bayes_foc(self.prior, self.alpha_g, self.noise_sd, s)
                for s in flat.ravel()
            ]
        )
        return out.reshape(flat.shape)


def evaluate(rule: TreatmentRule, stat: Stat) -> Stat:
    """Treatment fraction of rule at stat; in [0, 1] for every finite stat."""
    return rule.evaluate(stat)


def _posterior_weights(prior: DiscretePrior, noise_sd: float, stat: float) -> np.ndarray:
    taus = prior.taus
    logw = np.log(prior.weights) - 0.5 * ((stat - taus) / noise_sd) ** 2
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def _require_two_sided(taus: np.ndarray, weights: np.ndarray) -> None:
    # points at tau = 0 contribute no regret and drop out of the condition
    if not ((taus > 0) & (weights > 0)).any() or not ((taus < 0) & (weights > 0)).any():
        raise PriorSupportError(
            "posterior mass must be positive on both {tau > 0} and {tau < 0}"
        )


def solve_bayes_foc(
    prior: DiscretePrior, alpha_g: float, noise_sd: float, stat: float
) -> float:
    """Unique delta in (0, 1) solving the posterior first-order condition

        sum_i w_i(stat) * tau_i * g'(tau_i * (1{tau_i >= 0} - delta)) = 0

    with g(r) = r^alpha_g and w_i(stat) the Gaussian posterior weights.  The
    left side strictly decreases in delta, so a bisection bracket followed by
    Brent refinement pins the root.

    Raises PriorSupportError when the posterior mass is one-sided and
    DomainError for alpha_g <= 1 or noise_sd <= 0.
    """
    if not alpha_g > 1:
        raise DomainError(f"alpha_g must exceed 1, got {alpha_g}")
    if not noise_sd > 0:
        raise DomainError(f"noise_sd must be positive, got {noise_sd}")
    w = _posterior_weights(prior, noise_sd, stat)
    taus = prior.taus
    _require_two_sided(taus, w)
    pos = taus > 0
    neg = taus < 0
    wp, tp = w[pos], taus[pos]
    wn, tn = w[neg], -taus[neg]
    ex = alpha_g - 1.0

    def foc(delta: float) -> float:
        up = (wp * tp * (tp * (1.0 - delta)) ** ex).sum()
        down = (wn * tn * (tn * delta) ** ex).sum()
        return up - down

    lo, hi = 1e-12, 1.0 - 1e-12
    flo, fhi = foc(lo), foc(hi)
    if flo <= 0.0:
        return lo
    if fhi >= 0.0:
        return hi
    # a few bisection steps shrink the bracket before handing off to Brent
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        if foc(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    from scipy.optimize import brentq

    return float(brentq(foc, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200))


def tilted_posterior_match_msr(
    prior: DiscretePrior, noise_sd: float, stat: float
) -> float:
    """Closed-form mean-square-regret Bayes rule for a finitely supported
    prior: the tau^2-tilted posterior probability of a nonnegative effect,

        sum_{tau_i >= 0} w_i(stat) tau_i^2 / sum_i w_i(stat) tau_i^2.

    Agrees with solve_bayes_foc at alpha_g = 2 to 1e-10.
    """
    if not noise_sd > 0:
        raise DomainError(f"noise_sd must be positive, got {noise_sd}")
    w = _posterior_weights(prior, noise_sd, stat)
    taus = prior.taus
    _require_two_sided(taus, w)
    tilt = w * taus * taus
    return float(tilt[taus >= 0].sum() / tilt.sum())


# --- JSON mapping ----------------------------------------------------------

def rule_to_dict(rule: TreatmentRule) -> dict:
    """Plain-dict form {"kind": ..., ...params} used by the CLI payloads."""
    if isinstance(rule, EmpiricalSuccess):
        return {"kind": rule.kind}
    if isinstance(rule, Threshold):
        return {"kind": rule.kind, "t": rule.t}
    if isinstance(rule, HypothesisTest):
        return {"kind": rule.kind, "alpha": rule.alpha}
    if isinstance(rule, MinimaxMSR):
        return {"kind": rule.kind, "tau_star": rule.tau_star, "scale": rule.scale}
    if isinstance(rule, BayesFlatMSR):
        return {"kind": rule.kind, "scale": rule.scale}
    if isinstance(rule, PosteriorMatchFlat):
        return {"kind": rule.kind, "scale": rule.scale}
    if isinstance(rule, ComplementMix):
        return {"kind": rule.kind, "base": rule_to_dict(rule.base), "lam": rule.lam}
    if isinstance(rule, DiscretePriorBayes):
        return {
            "kind": rule.kind,
            "prior": [[t, w] for t, w in rule.prior.support],
            "alpha_g": rule.alpha_g,
            "noise_sd": rule.noise_sd,
        }
    raise DomainError(f"unknown rule type {type(rule).__name__}")


def rule_from_dict(data: dict) -> TreatmentRule:
    """Inverse of rule_to_dict."""
    kind = data.get("kind")
    if kind == "empirical_success":
        return EmpiricalSuccess()
    if kind == "threshold":
        return Threshold(t=float(data["t"]))
    if kind == "hypothesis_test":
        return HypothesisTest(alpha=float(data["alpha"]))
    if kind == "minimax_msr":
        return MinimaxMSR(
            tau_star=float(data["tau_star"]), scale=float(data.get("scale", 1.0))
        )
    if kind == "bayes_flat_msr":
        return BayesFlatMSR(scale=float(data.get("scale", 1.0)))
    if kind == "posterior_match_flat":
        return PosteriorMatchFlat(scale=float(data.get("scale", 1.0)))
    if kind == "complement_mix":
        return ComplementMix(base=rule_from_dict(data["base"]), lam=float(data["lam"]))
    if kind == "discrete_prior_bayes":
        prior = DiscretePrior(tuple((float(t), float(w)) for t, w in data["prior"]))
        return DiscretePriorBayes(
            prior=prior,
            alpha_g=float(data["alpha_g"]),
            noise_sd=float(data["noise_sd"]),
        )
    raise DomainError(f"unknown rule kind {kind!r}")
