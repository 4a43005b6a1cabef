"""Calibration solver, the two equivalent objectives, and the saddle check."""
import math

import numpy as np
import pytest

import oracles
from msregret import (
    DomainError,
    GaussianExperiment,
    MinimaxMSR,
    QuadratureSpec,
    SaddleCertificate,
    SaddleViolation,
    bayes_objective,
    default_tau_star,
    exact_risk,
    frequentist_objective,
    round_sig,
    solve_tau_star,
    verify_saddle,
    write_constants,
)
from msregret import _constants
from msregret.lfp import _objective_grid

# frozen from oracles.py: independent refinement of both programs
ORACLE_ARGMAX = 1.228141128368002
ORACLE_VALUE = 0.11987899265878338


class TestObjectives:
    def test_zero_is_zero(self):
        assert bayes_objective(0.0) == 0.0
        assert frequentist_objective(0.0) == 0.0

    def test_match_adaptive_oracle(self):
        for a in (0.5, 1.0, 1.2285, 2.0):
            assert abs(bayes_objective(a) - oracles.bayes_objective(a)) < 1e-9
            assert abs(
                frequentist_objective(a) - oracles.frequentist_objective(a)
            ) < 1e-9

    def test_pointwise_identity(self):
        # posterior odds at the two-point prior turn one integrand into the
        # other, so the two programs share values everywhere, not just at
        # the optimum
        for a in (0.3, 0.7, 1.2285, 1.9, 3.0):
            assert abs(bayes_objective(a) - frequentist_objective(a)) < 1e-10

    def test_frequentist_is_the_rule_risk(self):
        # different code path: the generic risk integrator at tau = a
        for a in (0.6, 1.22814, 1.8):
            rule = MinimaxMSR(tau_star=a)
            rep = exact_risk(rule, GaussianExperiment(a, 1.0, 1))
            assert abs(frequentist_objective(a) - rep.mean_square_regret) < 1e-10

    def test_vanishes_in_both_limits(self):
        assert frequentist_objective(8.0) < 1e-10
        assert frequentist_objective(0.01) < 1e-3


class TestSolve:
    def test_value_and_location(self, tau_star_solved):
        assert abs(tau_star_solved - 1.23) <= 0.01
        assert abs(tau_star_solved - ORACLE_ARGMAX) < 1e-6
        assert abs(frequentist_objective(tau_star_solved) - ORACLE_VALUE) < 1e-10

    def test_dense_grid_confirmation(self, tau_star_solved):
        # a 1e-4-spaced sweep of the whole bracket cannot find a better point
        grid = np.arange(0.5, 2.5 + 5e-5, 1e-4)
        vals = _objective_grid("freq", grid)
        best = float(grid[int(np.argmax(vals))])
        assert abs(best - tau_star_solved) < 2e-4
        assert vals.max() <= frequentist_objective(tau_star_solved) + 1e-9

    def test_node_count_stability(self, tau_star_solved):
        coarse = solve_tau_star(QuadratureSpec(node_count=64))
        fine = solve_tau_star(QuadratureSpec(node_count=128))
        assert abs(coarse - fine) < 1e-6
        assert abs(coarse - tau_star_solved) < 1e-6

    def test_objective_agreement_at_the_optimum(self, tau_star_solved):
        assert abs(
            bayes_objective(tau_star_solved) - frequentist_objective(tau_star_solved)
        ) < 1e-8


class TestVerifySaddle:
    def test_certificate_at_the_solved_constant(self, tau_star_solved):
        cert = verify_saddle(tau_star_solved)
        assert cert.is_valid
        assert abs(cert.bayes_risk_at_lfp - 0.1199) < 1e-3
        assert abs(cert.worst_case_risk - 0.1199) < 1e-3
        assert cert.objective_gap <= 1e-6
        assert abs(cert.argsup_tau - tau_star_solved) <= 1e-4
        assert len(cert.curve_samples) == 201
        worst = cert.worst_case_risk
        assert all(f <= worst + 1e-8 for _, _, f in cert.curve_samples)

    def test_certificate_at_the_shipped_constant(self):
        cert = verify_saddle(default_tau_star())
        assert cert.is_valid

    def test_miscalibrated_rule_rejected(self):
        with pytest.raises(SaddleViolation):
            verify_saddle(0.5)
        with pytest.raises(SaddleViolation):
            verify_saddle(2.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            verify_saddle(0.0)

    def test_csv_and_dict_round_trip(self, tau_star_solved):
        cert = verify_saddle(tau_star_solved, grid_hi=1.0, grid_step=0.5)
        lines = cert.to_csv().strip().split("\n")
        assert lines[0] == "tau,bayes_objective,frequentist_risk"
        assert len(lines) == 4
        back = SaddleCertificate.from_dict(cert.to_dict())
        assert back == cert

    def test_validity_predicate(self):
        good = SaddleCertificate(1.0, 0.1, 0.1, 1.0, 0.0, ())
        assert good.is_valid
        assert not SaddleCertificate(1.0, 0.1, 0.1, 1.0, 1e-5, ()).is_valid
        assert not SaddleCertificate(1.0, 0.1, 0.1, 1.001, 0.0, ()).is_valid


class TestRoundSig:
    def test_examples(self):
        assert round_sig(1.2281411, 6) == 1.22814
        assert round_sig(0.00123456, 3) == 0.00123
        assert round_sig(987654.0, 2) == 990000.0
        assert round_sig(0.0, 6) == 0.0
        assert round_sig(-1.2281411, 6) == -1.22814


class TestShippedConstant:
    def test_matches_a_fresh_solve(self, tau_star_solved):
        assert _constants.TAU_STAR == round_sig(tau_star_solved, 6)
        assert default_tau_star() == _constants.TAU_STAR

    def test_write_constants_reproduces_the_shipped_module(self, tmp_path):
        out = tmp_path / "_constants.py"
        value = write_constants(str(out))
        assert value == _constants.TAU_STAR
        shipped = open(_constants.__file__, encoding="ascii").read()
        assert out.read_text(encoding="ascii") == shipped

    def test_missing_cache_falls_back_to_a_rounded_solve(self, monkeypatch):
        import msregret.lfp as lfp

        monkeypatch.setattr(lfp, "_cached_tau_star", lambda: None)
        assert lfp.default_tau_star() == _constants.TAU_STAR
