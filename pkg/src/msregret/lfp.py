"""Minimax calibration of the logistic fractional rule.

In the unit problem (statistic s ~ N(b, 1)) the candidate rule family is
delta_a(s) = expit(2 a s), the Bayes rule against a symmetric two-point prior
on {-a, +a}.  Define

    bayes_objective(a)       = a^2 / 2 * E_{s ~ N(a,1)}[expit(-2 a s)]
    frequentist_objective(a) = a^2 * E_{s ~ N(a,1)}[expit(-2 a s)^2]

The first is the Bayes mean square regret of delta_a against its own prior;
the second is the frequentist mean square regret of delta_a at effect a (and
by symmetry at -a).  Both are maximized at the same calibration a = tau_star,
and at that point the two-point prior on {-tau_star, +tau_star} is least
favorable: the Bayes risk of the prior equals the worst-case risk of the
rule, which certifies minimaxity of delta_{tau_star} among all rules.

solve_tau_star locates the common argmax; verify_saddle checks the
saddle-point equalities numerically and samples the two curves on a grid for
plotting.  The shipped constant lives in _constants.py, written by
write_constants from a fresh solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from .numerics import (
    DEFAULT_QUADRATURE,
    ConvergenceError,
    DomainError,
    QuadratureSpec,
    gaussian_expectation,
    maximize_scalar,
    _gh_nodes,
)
from .risk import GaussianExperiment, exact_risk, worst_case_msr
from .rules import MinimaxMSR

__all__ = [
    "SaddleViolation",
    "SaddleCertificate",
    "bayes_objective",
    "frequentist_objective",
    "solve_tau_star",
    "verify_saddle",
    "default_tau_star",
    "write_constants",
    "round_sig",
]

_SCAN_LO = 0.5
_SCAN_HI = 2.5
_SCAN_STEP = 1e-3


class SaddleViolation(RuntimeError):
    """Numerical saddle-point check failed."""


def bayes_objective(a: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Bayes MSR of expit(2 a s) against the symmetric two-point prior at +-a."""
    if a == 0.0:
        return 0.0
    val = gaussian_expectation(lambda s: expit(-2.0 * a * s), a, 1.0, spec)
    return 0.5 * a * a * val


def frequentist_objective(a: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """MSR of the rule expit(2 a s) at effect tau = a (equals the value at -a)."""
    if a == 0.0:
        return 0.0
    val = gaussian_expectation(lambda s: expit(-2.0 * a * s) ** 2, a, 1.0, spec)
    return a * a * val


def _objective_grid(kind: str, grid: np.ndarray) -> np.ndarray:
    # shared-node evaluation of either objective over a calibration grid
    z, w = _gh_nodes(2 * DEFAULT_QUADRATURE.node_count)
    a = grid[:, None]
    s = a + math.sqrt(2.0) * z[None, :]
    t = expit(-2.0 * a * s)
    if kind == "bayes":
        return 0.5 * grid * grid * (t @ w)
    return grid * grid * ((t * t) @ w)


def solve_tau_star(
    spec: QuadratureSpec = DEFAULT_QUADRATURE, tol: float = 1e-7
) -> float:
    """Common argmax of the Bayes and frequentist objectives.

    Coarse scan at step 1e-3 over [0.5, 2.5] for each objective, golden
    refinement of both, and an agreement check: the two argmaxes must land
    within 10 * tol of each other, otherwise the saddle structure is broken
    and we refuse to return a value.
    """
    grid = np.arange(_SCAN_LO, _SCAN_HI + _SCAN_STEP / 2, _SCAN_STEP)
    args = []
    for kind in ("bayes", "freq"):
        vals = _objective_grid(kind, grid)
        i = int(np.argmax(vals))
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, len(grid) - 1)])
        f = bayes_objective if kind == "bayes" else frequentist_objective
        arg, _ = maximize_scalar(lambda a: f(a, spec), lo, hi, tol=tol)
        args.append(arg)
    if abs(args[0] - args[1]) > 10.0 * tol:
        raise ConvergenceError(
            "bayes and frequentist calibrations disagree: "
            f"{args[0]!r} vs {args[1]!r}"
        )
    return args[0]


@dataclass(frozen=True)
class SaddleCertificate:
    """Numerical evidence that (two-point prior, logistic rule) is a saddle.

    curve_samples rows are (tau, bayes_objective(tau), frequentist MSR of the
    fixed rule at tau); the frequentist column must stay below worst_case_risk
    everywhere on the grid.
    """

    tau_star: float
    bayes_risk_at_lfp: float
    worst_case_risk: float
    argsup_tau: float
    objective_gap: float
    curve_samples: Tuple[Tuple[float, float, float], ...]

    @property
    def is_valid(self) -> bool:
        return (
            self.objective_gap <= 1e-6
            and abs(self.argsup_tau - self.tau_star) <= 1e-4
        )

    def to_csv(self) -> str:
        lines = ["tau,bayes_objective,frequentist_risk"]
        for tau, b, f in self.curve_samples:
            lines.append(f"{tau:.12g},{b:.12g},{f:.12g}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "tau_star": self.tau_star,
            "bayes_risk_at_lfp": self.bayes_risk_at_lfp,
            "worst_case_risk": self.worst_case_risk,
            "argsup_tau": self.argsup_tau,
            "objective_gap": self.objective_gap,
            "curve_samples": [list(row) for row in self.curve_samples],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SaddleCertificate":
        return cls(
            tau_star=float(data["tau_star"]),
            bayes_risk_at_lfp=float(data["bayes_risk_at_lfp"]),
            worst_case_risk=float(data["worst_case_risk"]),
            argsup_tau=float(data["argsup_tau"]),
            objective_gap=float(data["objective_gap"]),
            curve_samples=tuple(
                (float(a), float(b), float(c)) for a, b, c in data["curve_samples"]
            ),
        )


def verify_saddle(
    tau_star: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    grid_hi: float = 4.0,
    grid_step: float = 0.02,
) -> SaddleCertificate:
    """Check the saddle-point equalities for the rule expit(2 tau_star s).

    Bayes risk against the two-point prior must match the worst-case risk of
    the rule within 1e-6, the worst case must be attained at +-tau_star
    within 1e-4, and the frequentist risk curve sampled on [0, grid_hi] must
    never exceed the worst case.  Any failure raises SaddleViolation.
    """
    if not tau_star > 0:
        raise DomainError(f"tau_star must be positive, got {tau_star}")
    rule = MinimaxMSR(tau_star=tau_star)

    bayes = bayes_objective(tau_star, spec)
    worst = worst_case_msr(rule, 1.0, 1)
    gap = abs(bayes - worst.sup)

    taus = np.arange(0.0, grid_hi + grid_step / 2, grid_step)
    samples = []
    for tau in taus:
        b = bayes_objective(float(tau), spec)
        rep = exact_risk(rule, GaussianExperiment(float(tau), 1.0, 1), spec)
        samples.append((float(tau), b, rep.mean_square_regret))

    if gap > 1e-6:
        raise SaddleViolation(
            f"bayes risk {bayes!r} and worst-case risk {worst.sup!r} differ by {gap!r}"
        )
    overshoot = max(f - worst.sup for _, _, f in samples)
    if overshoot > 1e-8:
        worst_tau = max(samples, key=lambda row: row[2])[0]
        raise SaddleViolation(
            f"frequentist risk exceeds the worst case by {overshoot!r} at tau={worst_tau!r}"
        )
    return SaddleCertificate(
        tau_star=tau_star,
        bayes_risk_at_lfp=bayes,
        worst_case_risk=worst.sup,
        argsup_tau=abs(worst.argsup_tau),
        objective_gap=gap,
        curve_samples=tuple(samples),
    )


def round_sig(x: float, digits: int) -> float:
    """Round to a number of significant digits."""
    if x == 0.0 or not math.isfinite(x):
        return x
    exp = math.floor(math.log10(abs(x)))
    return round(x, digits - 1 - exp)


def _cached_tau_star() -> Optional[float]:
    try:
        from ._constants import TAU_STAR
    except ImportError:
        return None
    return float(TAU_STAR)


def default_tau_star() -> float:
    """Shipped calibration constant, or a fresh solve rounded to 6 significant
    digits when the constants module is absent (keeps output byte-identical
    across the two paths)."""
    cached = _cached_tau_star()
    if cached is not None:
        return cached
    return round_sig(solve_tau_star(), 6)


def write_constants(path: str) -> float:
    """Re-derive tau_star and write the constants module to path."""
    value = round_sig(solve_tau_star(), 6)
    text = (
        '"""Shipped numerical constants.\n\n'
        "Generated by msregret.lfp.write_constants; do not edit by hand.\n"
        '"""\n\n'
        f"TAU_STAR = {value!r}\n"
    )
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    return value
