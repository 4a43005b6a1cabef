"""Least-squares effect estimation feeding the fractional rules.

The model is Y = tau * D + beta' X + e with e ~ N(0, sigma^2), binary
treatment D, and homogeneous effect tau.  The fit reports the treatment
coefficient with its classical standard error and maps the resulting
t-statistic through the minimax and flat-prior fractional rules.  The
t-statistic plays the role of the standardized statistic: it is centered at
the standardized effect with unit noise, so the unit-problem rules apply to
it directly.

The error variance uses the maximum-likelihood divisor n by default; pass
unbiased=True for the degrees-of-freedom correction.  The fit runs through a
QR factorization of the design [D | X], never forming the normal equations.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from .lfp import default_tau_star
from .numerics import DomainError
from .rules import BayesFlatMSR, MinimaxMSR

__all__ = [
    "InputError",
    "RankError",
    "Dataset",
    "RegressionResult",
    "fit",
    "fraction_from_tstat",
    "load_dataset_csv",
]


class InputError(ValueError):
    """Malformed data: shape mismatch, non-numeric cell, or missing column."""


class RankError(RuntimeError):
    """Design matrix is numerically rank deficient."""


@dataclass(frozen=True)
class Dataset:
    """Outcomes, binary treatment indicators, and covariate columns.

    covariates may have zero columns (known-control designs regress on the
    treatment indicator alone); when covariates are used, the intercept is
    one of their columns.  covariate_names label the columns for diagnostics.
    """

    outcomes: np.ndarray
    treatments: np.ndarray
    covariates: np.ndarray
    covariate_names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        y = np.asarray(self.outcomes, dtype=float)
        d = np.asarray(self.treatments, dtype=float)
        x = np.asarray(self.covariates, dtype=float)
        if x.size == 0:
            x = x.reshape(y.shape[0] if y.ndim == 1 else 0, 0)
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "treatments", d)
        object.__setattr__(self, "covariates", x)
        if y.ndim != 1:
            raise InputError(f"outcomes must be one-dimensional, got shape {y.shape}")
        if d.ndim != 1:
            raise InputError(f"treatments must be one-dimensional, got shape {d.shape}")
        if x.ndim != 2:
            raise InputError(f"covariates must be two-dimensional, got shape {x.shape}")
        n = y.shape[0]
        if d.shape[0] != n or x.shape[0] != n:
            raise InputError(
                f"length mismatch: {n} outcomes, {d.shape[0]} treatments, "
                f"{x.shape[0]} covariate rows"
            )
        names = self.covariate_names
        if names and len(names) != x.shape[1]:
            raise InputError(
                f"{x.shape[1]} covariate columns but {len(names)} names"
            )
        if not np.all(np.isfinite(y)):
            raise InputError("outcomes contain non-finite values")
        if not np.all(np.isfinite(x)):
            raise InputError("covariates contain non-finite values")
        if not np.all((d == 0.0) | (d == 1.0)):
            bad = d[~((d == 0.0) | (d == 1.0))][0]
            raise InputError(f"treatments must be 0 or 1, got {bad}")
        if n <= 1 + x.shape[1]:
            raise InputError(
                f"need more observations ({n}) than regressors ({1 + x.shape[1]})"
            )

    @property
    def n_obs(self) -> int:
        return int(self.outcomes.shape[0])

    @property
    def design(self) -> np.ndarray:
        """Design matrix [D | X] with the treatment column first."""
        return np.hstack([self.treatments[:, None], self.covariates])

    @property
    def column_names(self) -> Tuple[str, ...]:
        names = self.covariate_names or tuple(
            f"x{j}" for j in range(self.covariates.shape[1])
        )
        return ("d",) + tuple(names)


@dataclass(frozen=True)
class RegressionResult:
    """Treatment fit plus the implied treatment fractions.

    beta_hat holds the covariate coefficients in design order; the fractions
    evaluate the minimax and flat-prior Bayes rules at the t-statistic.
    """

    tau_hat: float
    beta_hat: Tuple[float, ...]
    sigma2_hat: float
    se_tau: float
    t_stat: float
    delta_minimax: float
    delta_bayes: float
    n_obs: int
    tau_star: float

    def to_dict(self) -> dict:
        return {
            "tau_hat": self.tau_hat,
            "beta_hat": list(self.beta_hat),
            "sigma2_hat": self.sigma2_hat,
            "se_tau": self.se_tau,
            "t_stat": self.t_stat,
            "delta_minimax": self.delta_minimax,
            "delta_bayes": self.delta_bayes,
            "n_obs": self.n_obs,
            "tau_star": self.tau_star,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionResult":
        return cls(
            tau_hat=float(data["tau_hat"]),
            beta_hat=tuple(float(b) for b in data["beta_hat"]),
            sigma2_hat=float(data["sigma2_hat"]),
            se_tau=float(data["se_tau"]),
            t_stat=float(data["t_stat"]),
            delta_minimax=float(data["delta_minimax"]),
            delta_bayes=float(data["delta_bayes"]),
            n_obs=int(data["n_obs"]),
            tau_star=float(data["tau_star"]),
        )


def fraction_from_tstat(
    t_stat: float, tau_star: Optional[float] = None
) -> Tuple[float, float]:
    """(minimax fraction, flat-prior Bayes fraction) at a t-statistic."""
    if tau_star is None:
        tau_star = default_tau_star()
    mm = float(MinimaxMSR(tau_star=tau_star).evaluate(t_stat))
    by = float(BayesFlatMSR().evaluate(t_stat))
    return mm, by


def fit(
    data: Dataset,
    tau_star: Optional[float] = None,
    unbiased: bool = False,
) -> RegressionResult:
    """Least squares of outcomes on [D | X], fractions from the t-statistic.

    The variance of the treatment coefficient is sigma2_hat times the leading
    diagonal entry of (Z'Z)^-1, extracted from the R factor without forming
    the inverse.
    """
    if tau_star is None:
        tau_star = default_tau_star()
    if not tau_star > 0:
        raise DomainError(f"tau_star must be positive, got {tau_star}")
    z = data.design
    y = data.outcomes
    n, k = z.shape

    q, r = np.linalg.qr(z, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * diag.max():
        j = int(np.argmin(diag))
        raise RankError(
            f"design is rank deficient near column {data.column_names[j]!r}"
        )
    coef = solve_triangular(r, q.T @ y)
    resid = y - z @ coef
    rss = float(resid @ resid)
    dof = n - k if unbiased else n
    sigma2 = rss / dof

    e0 = np.zeros(k)
    e0[0] = 1.0
    row = solve_triangular(r, e0, trans="T")
    inv00 = float(row @ row)
    se = math.sqrt(sigma2 * inv00)
    if se == 0.0:
        raise RankError("zero standard error; outcomes fit exactly")
    t_stat = float(coef[0]) / se
    mm, by = fraction_from_tstat(t_stat, tau_star)
    return RegressionResult(
        tau_hat=float(coef[0]),
        beta_hat=tuple(float(c) for c in coef[1:]),
        sigma2_hat=sigma2,
        se_tau=se,
        t_stat=t_stat,
        delta_minimax=mm,
        delta_bayes=by,
        n_obs=n,
        tau_star=tau_star,
    )


def load_dataset_csv(path: str, intercept: bool = True) -> Dataset:
    """Read a dataset from CSV with required columns y and d.

    The header must contain exactly one column named y (outcome) and one
    named d (treatment); every other column is a numeric covariate, kept in
    file order.  An intercept column of ones is appended last unless
    intercept=False.  Malformed cells raise InputError naming the file line
    and column.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file, expected a header row") from None
        names = [cell.strip() for cell in header]
        if names.count("y") != 1:
            raise InputError(
                f"{path}: header must contain exactly one column 'y', got {names!r}"
            )
        if names.count("d") != 1:
            raise InputError(
                f"{path}: header must contain exactly one column 'd', got {names!r}"
            )
        y_pos = names.index("y")
        d_pos = names.index("d")
        cov_pos = [i for i in range(len(names)) if i not in (y_pos, d_pos)]

        ys = []
        ds = []
        rows = []
        for line_no, cells in enumerate(reader, start=2):
            if not cells or all(cell.strip() == "" for cell in cells):
                continue
            if len(cells) != len(names):
                raise InputError(
                    f"{path}: line {line_no} has {len(cells)} cells, expected {len(names)}"
                )
            parsed = []
            for pos in [y_pos, d_pos] + cov_pos:
                cell = cells[pos].strip()
                try:
                    value = float(cell)
                except ValueError:
                    raise InputError(
                        f"{path}: line {line_no}, column {names[pos]!r}: "
                        f"not a number: {cell!r}"
                    ) from None
                if not math.isfinite(value):
                    raise InputError(
                        f"{path}: line {line_no}, column {names[pos]!r}: "
                        f"non-finite value {cell!r}"
                    )
                parsed.append(value)
            if parsed[1] not in (0.0, 1.0):
                raise InputError(
                    f"{path}: line {line_no}, column 'd': must be 0 or 1, "
                    f"got {cells[d_pos].strip()!r}"
                )
            ys.append(parsed[0])
            ds.append(parsed[1])
            rows.append(parsed[2:])

    if not ys:
        raise InputError(f"{path}: no data rows")
    covs = np.asarray(rows, dtype=float).reshape(len(ys), len(cov_pos))
    cov_names = [names[i] for i in cov_pos]
    if intercept:
        covs = np.hstack([covs, np.ones((covs.shape[0], 1))])
        cov_names.append("intercept")
    return Dataset(
        outcomes=np.asarray(ys, dtype=float),
        treatments=np.asarray(ds, dtype=float),
        covariates=covs,
        covariate_names=tuple(cov_names),
    )
