"""Regret-risk functionals of treatment rules over Gaussian experiments.

The experiment observes a statistic Ybar ~ N(tau, sigma^2/n) with known sigma
and the untreated-arm mean normalized to zero.  Regret of a fraction d in a
state with effect tau is Reg = tau * (1{tau >= 0} - d), which is nonnegative;
welfare is W = tau * d.  The two differ by the constant tau * 1{tau >= 0}, so
the variance of regret equals the variance of welfare, and mean square regret
decomposes as (mean regret)^2 + variance of regret.  exact_risk computes the
regret moments and the welfare moments through separate integrals so that the
decomposition stays a genuine cross-check rather than an identity of the code.

exact_risk, tail_probability, simulate, and risk_curve feed the rule the raw
statistic Ybar.  worst_case_msr and worst_case_mean_regret treat the rule as a
map of the standardized statistic sqrt(n) * Ybar / sigma, solve the
sigma = n = 1 problem once, and scale the supremum by sigma^2/n (mean regret
scales by sigma/sqrt(n)); that is exactly how the worst case of a fixed rule
varies with the design.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.special import ndtri

from .numerics import (
    DEFAULT_QUADRATURE,
    DomainError,
    QuadratureSpec,
    RngSeed,
    gaussian_expectation,
    maximize_scalar,
    std_normal_cdf,
    _gh_nodes,
)
from .rules import (
    BayesFlatMSR,
    ComplementMix,
    DiscretePrior,
    EmpiricalSuccess,
    HypothesisTest,
    MinimaxMSR,
    PosteriorMatchFlat,
    Threshold,
    TreatmentRule,
)

__all__ = [
    "GaussianExperiment",
    "RiskReport",
    "SimulationSummary",
    "WorstCase",
    "regret",
    "exact_risk",
    "tail_probability",
    "worst_case_msr",
    "worst_case_mean_regret",
    "bayes_msr",
    "simulate",
    "risk_curve",
    "risk_curve_csv",
]

# worst-case scan setup: every regret objective vanishes at 0 and decays like
# a Gaussian tail past |b| = 8 on the standardized scale
_SCAN_LIMIT = 8.0
_SCAN_STEP = 0.01
_INDICATOR_ORDER = 512
_CHUNK = 1 << 16  # fixed substream width; not a parallelism knob


@dataclass(frozen=True)
class GaussianExperiment:
    """Statistic distribution Ybar ~ N(tau, sigma^2/n) with known sigma."""

    tau: float
    sigma: float
    n: int

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise DomainError(f"n must be an integer >= 1, got {self.n}")

    @property
    def stat_sd(self) -> float:
        return self.sigma / math.sqrt(self.n)


@dataclass(frozen=True)
class RiskReport:
    """Exact risk functionals of one (rule, experiment) pair."""

    mean_regret: float
    regret_variance: float
    mean_square_regret: float
    welfare_mean: float
    welfare_sd: float
    tail: Tuple[Tuple[float, float], ...] = ()

    def to_dict(self) -> dict:
        return {
            "mean_regret": self.mean_regret,
            "regret_variance": self.regret_variance,
            "mean_square_regret": self.mean_square_regret,
            "welfare_mean": self.welfare_mean,
            "welfare_sd": self.welfare_sd,
            "tail": [[t, p] for t, p in self.tail],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RiskReport":
        return cls(
            mean_regret=float(data["mean_regret"]),
            regret_variance=float(data["regret_variance"]),
            mean_square_regret=float(data["mean_square_regret"]),
            welfare_mean=float(data["welfare_mean"]),
            welfare_sd=float(data["welfare_sd"]),
            tail=tuple((float(t), float(p)) for t, p in data.get("tail", [])),
        )

    @property
    def regret_sd(self) -> float:
        return math.sqrt(self.regret_variance)


@dataclass(frozen=True)
class SimulationSummary:
    """Empirical analogues of the RiskReport fields with standard errors.

    Standard errors are sample sd / sqrt(replications); the sd entries carry
    delta-method errors, and tail rows are (threshold, probability, se).
    """

    replications: int
    seed: RngSeed
    mean_regret: float
    regret_variance: float
    mean_square_regret: float
    welfare_mean: float
    welfare_sd: float
    se_mean_regret: float
    se_mean_square_regret: float
    se_regret_sd: float
    se_welfare_mean: float
    se_welfare_sd: float
    tail: Tuple[Tuple[float, float, float], ...] = ()

    @property
    def regret_sd(self) -> float:
        return math.sqrt(self.regret_variance)

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "seed": self.seed.seed,
            "mean_regret": self.mean_regret,
            "regret_variance": self.regret_variance,
            "mean_square_regret": self.mean_square_regret,
            "welfare_mean": self.welfare_mean,
            "welfare_sd": self.welfare_sd,
            "se_mean_regret": self.se_mean_regret,
            "se_mean_square_regret": self.se_mean_square_regret,
            "se_regret_sd": self.se_regret_sd,
            "se_welfare_mean": self.se_welfare_mean,
            "se_welfare_sd": self.se_welfare_sd,
            "tail": [[t, p, s] for t, p, s in self.tail],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationSummary":
        return cls(
            replications=int(data["replications"]),
            seed=RngSeed(int(data["seed"])),
            mean_regret=float(data["mean_regret"]),
            regret_variance=float(data["regret_variance"]),
            mean_square_regret=float(data["mean_square_regret"]),
            welfare_mean=float(data["welfare_mean"]),
            welfare_sd=float(data["welfare_sd"]),
            se_mean_regret=float(data["se_mean_regret"]),
            se_mean_square_regret=float(data["se_mean_square_regret"]),
            se_regret_sd=float(data["se_regret_sd"]),
            se_welfare_mean=float(data["se_welfare_mean"]),
            se_welfare_sd=float(data["se_welfare_sd"]),
            tail=tuple(
                (float(t), float(p), float(s)) for t, p, s in data.get("tail", [])
            ),
        )


class WorstCase(NamedTuple):
    sup: float
    argsup_tau: float
    saturated: bool


def regret(rule_output: float, tau: float) -> float:
    """Welfare gap to the oracle action: tau * (1{tau >= 0} - rule_output) >= 0."""
    ind = 1.0 if tau >= 0 else 0.0
    return tau * (ind - rule_output)


def _step_params(rule: TreatmentRule):
    """(cutoff, low_value, high_value) for rules piecewise constant in the
    statistic, None otherwise.

    Two-valued rules make every risk functional a two-outcome sum, so their
    moments reduce to exact normal-CDF arithmetic; quadrature on the
    discontinuous integrand would waste its convergence rate.
    """
    if isinstance(rule, EmpiricalSuccess):
        return 0.0, 0.0, 1.0
    if isinstance(rule, Threshold):
        return rule.t, 0.0, 1.0
    if isinstance(rule, HypothesisTest):
        return rule.critical_value, 0.0, 1.0
    if isinstance(rule, ComplementMix):
        base = _step_params(rule.base)
        if base is None:
            return None
        cut, lo, hi = base
        lam = rule.lam
        return cut, (1 - lam) * lo + lam * (1 - lo), (1 - lam) * hi + lam * (1 - hi)
    return None


def exact_risk(
    rule: TreatmentRule,
    exp: GaussianExperiment,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    tail_thresholds: Sequence[float] = (),
) -> RiskReport:
    """Risk report for one rule at one state.

    Regret moments come from integrating Reg and Reg^2; welfare moments from
    integrating the fraction and its square.  Piecewise-constant rules skip
    quadrature in favor of the exact two-outcome sums.  Tail entries are
    computed by tail_probability for each requested threshold.
    """
    tau = exp.tau
    sd = exp.stat_sd
    ind = 1.0 if tau >= 0 else 0.0
    step = _step_params(rule)

    if tau == 0.0:
        m1 = m2 = 0.0
        w_mean = 0.0
        w_var = 0.0
    elif step is not None:
        cut, vlo, vhi = step
        p_hi = 1.0 - float(std_normal_cdf((cut - tau) / sd))
        p_lo = 1.0 - p_hi
        e_frac = vlo * p_lo + vhi * p_hi
        e_frac2 = vlo * vlo * p_lo + vhi * vhi * p_hi
        m1 = tau * (ind - vlo) * p_lo + tau * (ind - vhi) * p_hi
        m2 = (tau * (ind - vlo)) ** 2 * p_lo + (tau * (ind - vhi)) ** 2 * p_hi
        w_mean = tau * e_frac
        w_var = max(tau * tau * (e_frac2 - e_frac * e_frac), 0.0)
    else:

        def frac(y: np.ndarray) -> np.ndarray:
            return np.asarray(rule.evaluate(y), dtype=float)

        e_frac = gaussian_expectation(frac, tau, sd, spec)
        e_frac2 = gaussian_expectation(lambda y: frac(y) ** 2, tau, sd, spec)
        m1 = gaussian_expectation(lambda y: tau * (ind - frac(y)), tau, sd, spec)
        m2 = gaussian_expectation(lambda y: (tau * (ind - frac(y))) ** 2, tau, sd, spec)
        w_mean = tau * e_frac
        w_var = max(tau * tau * (e_frac2 - e_frac * e_frac), 0.0)

    tail = tuple(
        (float(c), tail_probability(rule, exp, float(c), spec)) for c in tail_thresholds
    )
    return RiskReport(
        mean_regret=m1,
        regret_variance=w_var,
        mean_square_regret=m2,
        welfare_mean=w_mean,
        welfare_sd=math.sqrt(w_var),
        tail=tail,
    )


def _monotone_nondecreasing(rule: TreatmentRule) -> bool:
    if isinstance(
        rule,
        (
            EmpiricalSuccess,
            Threshold,
            HypothesisTest,
            MinimaxMSR,
            BayesFlatMSR,
            PosteriorMatchFlat,
        ),
    ):
        return True
    if isinstance(rule, ComplementMix):
        # mixing weight above 1/2 flips the direction
        return rule.lam <= 0.5 and _monotone_nondecreasing(rule.base)
    return False


def tail_probability(
    rule: TreatmentRule,
    exp: GaussianExperiment,
    threshold: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """P(Reg > threshold) under the experiment.

    For rules that are nondecreasing in the statistic the event inverts
    exactly: regret crosses the threshold where the fraction crosses
    1 - threshold/tau (tau > 0) or threshold/|tau| (tau < 0), and the crossing
    point is located by bisection, so the result is a single normal CDF value.
    Other rules fall back to indicator quadrature at a fixed high order.
    """
    if threshold < 0:
        raise DomainError(f"threshold must be >= 0, got {threshold}")
    tau = exp.tau
    sd = exp.stat_sd
    if tau == 0.0:
        return 0.0
    ind = 1.0 if tau >= 0 else 0.0

    step = _step_params(rule)
    if step is not None:
        cut, vlo, vhi = step
        p_hi = 1.0 - float(std_normal_cdf((cut - tau) / sd))
        out = 0.0
        if tau * (ind - vlo) > threshold:
            out += 1.0 - p_hi
        if tau * (ind - vhi) > threshold:
            out += p_hi
        return out

    if _monotone_nondecreasing(rule):
        if tau > 0:
            # Reg > c  <=>  frac(Y) < 1 - c/tau
            q = 1.0 - threshold / tau
            if q <= 0.0:
                return 0.0
            below = True
        else:
            # Reg > c  <=>  frac(Y) > c/|tau|
            q = threshold / abs(tau)
            if q >= 1.0:
                return 0.0
            below = False
        lo = tau - 60.0 * sd
        hi = tau + 60.0 * sd
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(rule.evaluate(mid)) < q:
                lo = mid
            else:
                hi = mid
        cut = 0.5 * (lo + hi)
        p_below = std_normal_cdf((cut - tau) / sd)
        return p_below if below else 1.0 - p_below

    z, w = _gh_nodes(_INDICATOR_ORDER)
    y = tau + math.sqrt(2.0) * sd * z
    frac = np.asarray(rule.evaluate(y), dtype=float)
    ind = 1.0 if tau >= 0 else 0.0
    reg = tau * (ind - frac)
    return float(w @ (reg > threshold))


def _unit_curve(rule: TreatmentRule, power: int, b: np.ndarray) -> np.ndarray:
    """Vectorized unit-problem objective over standardized effects b.

    power 1: b * E[1{b>=0} - frac(s)]; power 2: b^2 * E[(1{b>=0} - frac(s))^2],
    with s ~ N(b, 1) on shared Gauss-Hermite nodes, or the exact two-outcome
    sum for piecewise-constant rules.
    """
    ind = (b >= 0.0).astype(float)
    step = _step_params(rule)
    if step is not None:
        cut, vlo, vhi = step
        p_hi = 1.0 - np.asarray(std_normal_cdf(cut - b), dtype=float)
        dlo = ind - vlo
        dhi = ind - vhi
        if power == 1:
            return b * (dlo * (1.0 - p_hi) + dhi * p_hi)
        return b * b * (dlo * dlo * (1.0 - p_hi) + dhi * dhi * p_hi)
    z, w = _gh_nodes(2 * DEFAULT_QUADRATURE.node_count)
    s = b[:, None] + math.sqrt(2.0) * z[None, :]
    frac = np.asarray(rule.evaluate(s), dtype=float)
    diff = ind[:, None] - frac
    if power == 1:
        return b * (diff @ w)
    return b * b * ((diff * diff) @ w)


def _unit_objective(rule: TreatmentRule, power: int, spec: QuadratureSpec):
    def obj(b: float) -> float:
        report = exact_risk(rule, GaussianExperiment(float(b), 1.0, 1), spec)
        return report.mean_regret if power == 1 else report.mean_square_regret

    return obj


@lru_cache(maxsize=128)
def _unit_worst(rule: TreatmentRule, power: int) -> Tuple[float, float, bool]:
    """Supremum of the unit-problem objective over b in [-8, 8].

    Coarse 0.01-spaced scan first so an interior peak cannot be missed, then
    golden-section refinement around the best grid point.
    """
    grid = np.arange(-_SCAN_LIMIT, _SCAN_LIMIT + _SCAN_STEP / 2, _SCAN_STEP)
    vals = _unit_curve(rule, power, grid)
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    obj = _unit_objective(rule, power, DEFAULT_QUADRATURE)
    arg, val = maximize_scalar(obj, float(lo), float(hi), tol=1e-10)
    saturated = abs(arg) >= _SCAN_LIMIT - 2 * _SCAN_STEP
    return arg, val, saturated


def worst_case_msr(rule: TreatmentRule, sigma: float, n: int) -> WorstCase:
    """sup over tau of the mean square regret of a rule applied to the
    standardized statistic; equals (sigma^2/n) times the unit-problem value,
    attained at argsup_tau = (sigma/sqrt(n)) times the unit argsup.

    saturated flags a supremum that sat on the scan bracket edge (degenerate
    rules whose risk grows along one tail).
    """
    exp = GaussianExperiment(0.0, sigma, n)
    arg, val, saturated = _unit_worst(rule, 2)
    scale = exp.stat_sd
    return WorstCase(sup=val * scale * scale, argsup_tau=arg * scale, saturated=saturated)


def worst_case_mean_regret(rule: TreatmentRule, sigma: float, n: int) -> WorstCase:
    """sup over tau of mean regret on the standardized scale; scales by
    sigma/sqrt(n)."""
    exp = GaussianExperiment(0.0, sigma, n)
    arg, val, saturated = _unit_worst(rule, 1)
    scale = exp.stat_sd
    return WorstCase(sup=val * scale, argsup_tau=arg * scale, saturated=saturated)


def bayes_msr(
    rule: TreatmentRule,
    prior: DiscretePrior,
    sigma: float,
    n: int,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Prior-weighted mean square regret, sum_i w_i * MSR(rule, tau_i)."""
    total = 0.0
    for tau, w in prior.support:
        report = exact_risk(rule, GaussianExperiment(tau, sigma, n), spec)
        total += w * report.mean_square_regret
    return total


def _normal_draws(seed: RngSeed, count: int) -> np.ndarray:
    """count standard normals, bit-reproducible and order-independent.

    Draw r comes from the r-th 64-bit word of a Philox stream whose counter
    is initialized to the fixed-width chunk index holding r, mapped through
    the inverse normal CDF.  The chunk width is an implementation constant,
    so the draws do not depend on how work is batched or parallelized.
    """
    out = np.empty(count, dtype=float)
    for chunk in range(0, (count + _CHUNK - 1) // _CHUNK):
        start = chunk * _CHUNK
        stop = min(start + _CHUNK, count)
        gen = np.random.Philox(key=seed.seed, counter=[0, 0, 0, chunk])
        words = gen.random_raw(stop - start)
        u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        out[start:stop] = ndtri(u)
    return out


def simulate(
    rule: TreatmentRule,
    exp: GaussianExperiment,
    replications: int,
    seed: RngSeed,
    tail_thresholds: Sequence[float] = (),
) -> SimulationSummary:
    """Monte Carlo analogue of exact_risk; deterministic given the seed."""
    if replications < 2:
        raise DomainError(f"need at least 2 replications, got {replications}")
    tau = exp.tau
    ind = 1.0 if tau >= 0 else 0.0
    y = tau + exp.stat_sd * _normal_draws(seed, replications)
    frac = np.asarray(rule.evaluate(y), dtype=float)
    reg = tau * (ind - frac)
    welfare = tau * frac
    r = float(replications)

    mean_reg = float(reg.mean())
    var_reg = float(reg.var(ddof=1))
    sd_reg = math.sqrt(var_reg)
    reg2 = reg * reg
    msr = float(reg2.mean())
    w_mean = float(welfare.mean())
    w_sd = float(welfare.std(ddof=1))

    se_mean = sd_reg / math.sqrt(r)
    se_msr = float(reg2.std(ddof=1)) / math.sqrt(r)
    # delta method for the sd: se(s) = se(s^2) / (2 s)
    centered2 = (reg - mean_reg) ** 2
    se_var = float(centered2.std(ddof=1)) / math.sqrt(r)
    se_sd = se_var / (2.0 * sd_reg) if sd_reg > 0 else 0.0

    tail = []
    for c in tail_thresholds:
        p = float((reg > c).mean())
        tail.append((float(c), p, math.sqrt(p * (1.0 - p) / r)))

    return SimulationSummary(
        replications=replications,
        seed=seed,
        mean_regret=mean_reg,
        regret_variance=var_reg,
        mean_square_regret=msr,
        welfare_mean=w_mean,
        welfare_sd=w_sd,
        se_mean_regret=se_mean,
        se_mean_square_regret=se_msr,
        se_regret_sd=se_sd,
        se_welfare_mean=se_mean,  # welfare and regret differ by a constant
        se_welfare_sd=se_sd,
        tail=tuple(tail),
    )


def risk_curve(
    rule: TreatmentRule,
    tau_grid: Sequence[float],
    sigma: float,
    n: int,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> List[Tuple[float, RiskReport]]:
    """exact_risk along a grid of effects, for the curve emitters."""
    return [
        (float(tau), exact_risk(rule, GaussianExperiment(float(tau), sigma, n), spec))
        for tau in tau_grid
    ]


def risk_curve_csv(curve: Sequence[Tuple[float, RiskReport]]) -> str:
    """CSV rendering with header tau,mean_regret,regret_sd,msr,welfare_mean,welfare_sd."""
    lines = ["tau,mean_regret,regret_sd,msr,welfare_mean,welfare_sd"]
    for tau, rep in curve:
        lines.append(
            f"{tau:.12g},{rep.mean_regret:.12g},{rep.regret_sd:.12g},"
            f"{rep.mean_square_regret:.12g},{rep.welfare_mean:.12g},{rep.welfare_sd:.12g}"
        )
    return "\n".join(lines) + "\n"
