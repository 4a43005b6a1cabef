"""Treatment choice under mean square regret.

A statistical decision problem: after observing an estimate of a treatment
effect, commit a fraction of the population to treatment.  Judging rules by
the mean square of their regret (rather than its mean) makes deliberately
fractional allocations optimal; this package computes those rules, their
exact and simulated risk, minimax calibrations with saddle certificates,
dominance constructions over threshold rules, sample-size plans, and the
regression front end that feeds a t-statistic into the rules.
"""
from .numerics import (
    BracketError,
    ConvergenceError,
    DEFAULT_QUADRATURE,
    DomainError,
    QuadratureSpec,
    RngSeed,
    find_root,
    gaussian_expectation,
    maximize_scalar,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from .rules import (
    BayesFlatMSR,
    ComplementMix,
    DiscretePrior,
    DiscretePriorBayes,
    EmpiricalSuccess,
    HypothesisTest,
    MinimaxMSR,
    PosteriorMatchFlat,
    PriorSupportError,
    Threshold,
    TreatmentRule,
    evaluate,
    psi,
    rule_from_dict,
    rule_to_dict,
    solve_bayes_foc,
    tilted_posterior_match_msr,
)
from .risk import (
    GaussianExperiment,
    RiskReport,
    SimulationSummary,
    WorstCase,
    bayes_msr,
    exact_risk,
    regret,
    risk_curve,
    risk_curve_csv,
    simulate,
    tail_probability,
    worst_case_mean_regret,
    worst_case_msr,
)
from .lfp import (
    SaddleCertificate,
    SaddleViolation,
    bayes_objective,
    default_tau_star,
    frequentist_objective,
    round_sig,
    solve_tau_star,
    verify_saddle,
    write_constants,
)
from .dominance import (
    DominanceCertificate,
    DominanceViolation,
    dominating_rule,
    lambda_star,
    tail_bounds,
    verify_dominance,
)
from .planning import (
    EsComparison,
    HtComparison,
    SampleSizePlan,
    compare_vs_es,
    compare_vs_ht,
    es_epsilon_optimal_n,
    es_mean_regret_unit,
    es_msr_unit,
    ht_msr_unit,
    ht_power_n,
    minimax_msr_unit,
    n_for_msr_target,
    plan_es_epsilon,
    plan_ht_power,
    plan_worst_msr,
)
from .regression import (
    Dataset,
    InputError,
    RankError,
    RegressionResult,
    fit,
    fraction_from_tstat,
    load_dataset_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BracketError",
    "ConvergenceError",
    "DEFAULT_QUADRATURE",
    "DomainError",
    "QuadratureSpec",
    "RngSeed",
    "find_root",
    "gaussian_expectation",
    "maximize_scalar",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "BayesFlatMSR",
    "ComplementMix",
    "DiscretePrior",
    "DiscretePriorBayes",
    "EmpiricalSuccess",
    "HypothesisTest",
    "MinimaxMSR",
    "PosteriorMatchFlat",
    "PriorSupportError",
    "Threshold",
    "TreatmentRule",
    "evaluate",
    "psi",
    "rule_from_dict",
    "rule_to_dict",
    "solve_bayes_foc",
    "tilted_posterior_match_msr",
    "GaussianExperiment",
    "RiskReport",
    "SimulationSummary",
    "WorstCase",
    "bayes_msr",
    "exact_risk",
    "regret",
    "risk_curve",
    "risk_curve_csv",
    "simulate",
    "tail_probability",
    "worst_case_mean_regret",
    "worst_case_msr",
    "SaddleCertificate",
    "SaddleViolation",
    "bayes_objective",
    "default_tau_star",
    "frequentist_objective",
    "round_sig",
    "solve_tau_star",
    "verify_saddle",
    "write_constants",
    "DominanceCertificate",
    "DominanceViolation",
    "dominating_rule",
    "lambda_star",
    "tail_bounds",
    "verify_dominance",
    "EsComparison",
    "HtComparison",
    "SampleSizePlan",
    "compare_vs_es",
    "compare_vs_ht",
    "es_epsilon_optimal_n",
    "es_mean_regret_unit",
    "es_msr_unit",
    "ht_msr_unit",
    "ht_power_n",
    "minimax_msr_unit",
    "n_for_msr_target",
    "plan_es_epsilon",
    "plan_ht_power",
    "plan_worst_msr",
    "Dataset",
    "InputError",
    "RankError",
    "RegressionResult",
    "fit",
    "fraction_from_tstat",
    "load_dataset_csv",
]
