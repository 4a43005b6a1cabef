"""Fractional rules that dominate threshold rules under power-law regret risk.

A threshold rule 1{Ybar >= t} takes only the values 0 and 1, so its regret at
effect tau is the two-valued step |tau| * 1{wrong side}, and every risk
functional of the form E[Reg^alpha_g] reduces to exact normal-CDF arithmetic:

    risk_singleton(tau)  = |tau|^alpha_g * P(wrong | tau)
    risk_fractional(tau) = |tau|^alpha_g * ((1-lam)^alpha_g * P(wrong | tau)
                                            + lam^alpha_g * P(right | tau))

for the mixture (1-lam) * base + lam * (1-base).  The wrong-side probability
P(wrong | tau) is Phi((t-tau)/sd) for tau > 0 and 1 - Phi((t-tau)/sd) for
tau < 0; over tau in [-tau_bar, tau_bar] it is minimized at the endpoints,
giving the two tail bounds p_plus and p_minus.  With m = min(p_plus, p_minus)
and r = m / (1-m), the mixing weight

    lambda_star = r^(1/(alpha_g-1)) / (1 + r^(1/(alpha_g-1)))

minimizes the mixed risk at the least-distinguishable state, and every
lam in (0, lambda_star] makes the margin risk_singleton - risk_fractional
strictly positive at all tau != 0 in the range (the margin is increasing in
P(wrong) and positive already at its minimum m).  verify_dominance certifies
a particular construction on a tau grid using the closed forms, so the check
is limited by grid resolution only, not quadrature error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .numerics import DomainError, std_normal_cdf
from .rules import ComplementMix, Threshold

__all__ = [
    "DominanceViolation",
    "DominanceCertificate",
    "tail_bounds",
    "lambda_star",
    "dominating_rule",
    "verify_dominance",
]

_MIN_MARGIN = -1e-12
_STRICT_MARGIN = 1e-12


class DominanceViolation(RuntimeError):
    """A margin on the verification grid fell below tolerance."""


def _wrong_probability(t: float, tau: np.ndarray, noise_sd: float) -> np.ndarray:
    """P(threshold rule picks the regret-incurring side | tau), elementwise."""
    below = std_normal_cdf((t - np.asarray(tau, dtype=float)) / noise_sd)
    return np.where(np.asarray(tau) > 0, below, 1.0 - below)


def tail_bounds(
    t: float, tau_bar: float, noise_sd: float, check: bool = False
) -> Tuple[float, float]:
    """Minimal wrong-side probabilities of 1{Ybar >= t} over the effect range.

    Returns (p_plus, p_minus): the infimum of P(wrong | tau) over tau in
    (0, tau_bar] and over tau in [-tau_bar, 0).  Both are attained at the
    endpoints +-tau_bar because each branch is monotone in tau; check=True
    re-minimizes on a 100-point grid and insists the endpoint value is the
    minimum to 1e-10.
    """
    if not tau_bar > 0:
        raise DomainError(f"tau_bar must be positive, got {tau_bar}")
    if not noise_sd > 0:
        raise DomainError(f"noise_sd must be positive, got {noise_sd}")
    p_plus = float(std_normal_cdf((t - tau_bar) / noise_sd))
    p_minus = float(1.0 - std_normal_cdf((t + tau_bar) / noise_sd))
    if check:
        pos = np.linspace(tau_bar / 100.0, tau_bar, 100)
        if float(_wrong_probability(t, pos, noise_sd).min()) < p_plus - 1e-10:
            raise DominanceViolation("positive-branch infimum not at tau_bar")
        if float(_wrong_probability(t, -pos, noise_sd).min()) < p_minus - 1e-10:
            raise DominanceViolation("negative-branch infimum not at -tau_bar")
    return p_plus, p_minus


def lambda_star(p_plus: float, p_minus: float, alpha_g: float) -> float:
    """Risk-minimizing mixing weight at the least-distinguishable state."""
    if not alpha_g > 1:
        raise DomainError(f"alpha_g must exceed 1, got {alpha_g}")
    m = min(p_plus, p_minus)
    if not 0.0 < m < 1.0:
        raise DomainError(
            f"tail bounds must lie strictly inside (0, 1), got ({p_plus}, {p_minus})"
        )
    q = (m / (1.0 - m)) ** (1.0 / (alpha_g - 1.0))
    return q / (1.0 + q)


def dominating_rule(
    t: float,
    tau_bar: float,
    alpha_g: float,
    noise_sd: float,
    shrink: float = 0.5,
) -> ComplementMix:
    """ComplementMix of 1{Ybar >= t} at weight shrink * lambda_star.

    Any shrink in (0, 1) yields strict dominance over the effect range; the
    default backs off to half the optimal weight.
    """
    if not 0.0 < shrink < 1.0:
        raise DomainError(f"shrink must lie in (0, 1), got {shrink}")
    p_plus, p_minus = tail_bounds(t, tau_bar, noise_sd)
    lam = shrink * lambda_star(p_plus, p_minus, alpha_g)
    return ComplementMix(base=Threshold(t), lam=lam)


@dataclass(frozen=True)
class DominanceCertificate:
    """Grid evidence that the fractional rule dominates the threshold rule.

    grid rows are (tau, risk_singleton, risk_fractional, margin) under the
    E[Reg^alpha_g] risk; margins must clear -1e-12 everywhere and +1e-12 away
    from tau = 0, where both risks vanish identically.
    """

    threshold_t: float
    tau_bar: float
    alpha_g: float
    lambda_star: float
    lambda_used: float
    grid: Tuple[Tuple[float, float, float, float], ...]

    @property
    def is_valid(self) -> bool:
        worst = min(row[3] for row in self.grid)
        strict = [row[3] for row in self.grid if row[0] != 0.0]
        return worst >= _MIN_MARGIN and (not strict or min(strict) > _STRICT_MARGIN)

    def to_csv(self) -> str:
        lines = ["tau,risk_singleton,risk_fractional,margin"]
        for tau, rs, rf, margin in self.grid:
            lines.append(f"{tau:.12g},{rs:.12g},{rf:.12g},{margin:.12g}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "threshold_t": self.threshold_t,
            "tau_bar": self.tau_bar,
            "alpha_g": self.alpha_g,
            "lambda_star": self.lambda_star,
            "lambda_used": self.lambda_used,
            "grid": [list(row) for row in self.grid],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DominanceCertificate":
        return cls(
            threshold_t=float(data["threshold_t"]),
            tau_bar=float(data["tau_bar"]),
            alpha_g=float(data["alpha_g"]),
            lambda_star=float(data["lambda_star"]),
            lambda_used=float(data["lambda_used"]),
            grid=tuple(
                (float(a), float(b), float(c), float(d)) for a, b, c, d in data["grid"]
            ),
        )


def verify_dominance(
    t: float,
    tau_bar: float,
    alpha_g: float,
    noise_sd: float,
    shrink: float = 0.5,
    grid_step: float = 0.01,
) -> DominanceCertificate:
    """Certify dominance of the shrunk mixture on a tau grid.

    Risks come from the closed forms, so a failed margin is a real property
    of the construction, not quadrature noise.  Raises DominanceViolation
    naming the offending tau when a margin dips below -1e-12 or a nonzero tau
    fails strict improvement.
    """
    if not grid_step > 0:
        raise DomainError(f"grid_step must be positive, got {grid_step}")
    p_plus, p_minus = tail_bounds(t, tau_bar, noise_sd)
    lam_opt = lambda_star(p_plus, p_minus, alpha_g)
    if not 0.0 < shrink < 1.0:
        raise DomainError(f"shrink must lie in (0, 1), got {shrink}")
    lam = shrink * lam_opt

    count = int(round(2.0 * tau_bar / grid_step)) + 1
    taus = np.linspace(-tau_bar, tau_bar, count)
    p_wrong = _wrong_probability(t, taus, noise_sd)
    mag = np.abs(taus) ** alpha_g
    risk_single = mag * p_wrong
    risk_frac = mag * (
        (1.0 - lam) ** alpha_g * p_wrong + lam**alpha_g * (1.0 - p_wrong)
    )
    # tau = 0 contributes zero risk on both sides regardless of p_wrong
    zero = taus == 0.0
    risk_single[zero] = 0.0
    risk_frac[zero] = 0.0
    margins = risk_single - risk_frac

    rows = tuple(
        (float(tau), float(rs), float(rf), float(mg))
        for tau, rs, rf, mg in zip(taus, risk_single, risk_frac, margins)
    )
    bad = [row for row in rows if row[3] < _MIN_MARGIN]
    if bad:
        raise DominanceViolation(
            f"margin {bad[0][3]!r} below tolerance at tau={bad[0][0]!r}"
        )
    weak = [row for row in rows if row[0] != 0.0 and row[3] <= _STRICT_MARGIN]
    if weak:
        raise DominanceViolation(
            f"margin {weak[0][3]!r} not strictly positive at tau={weak[0][0]!r}"
        )
    return DominanceCertificate(
        threshold_t=t,
        tau_bar=tau_bar,
        alpha_g=alpha_g,
        lambda_star=lam_opt,
        lambda_used=lam,
        grid=rows,
    )
