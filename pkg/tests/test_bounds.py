"""Tests for the recovery conditions, tail bounds and their Monte Carlo checks."""

import math

import numpy as np
import pytest

from permreg.config import BoundConstants
from permreg.errors import InvalidArgumentError, OutOfScopeError, OutOfValidityError
from permreg.bounds import (
    chi2_lower_tail_bound,
    dense_lemma7_eigs,
    lemma7_covariance_eigs,
    lemma7_matrix,
    prop1_side_info,
    projection_tail_bound,
    thm1_sufficient,
    thm2_converse,
    thm3_approx_converse,
    verify_chi2_bound_mc,
    verify_projection_bound_mc,
)
from permreg.permutation import fixed_point_probability, printed_fixed_point_probability


class TestSufficientCondition:
    def test_rhs(self):
        report = thm1_sufficient(100, 1, 1e5, 1.0)
        assert report.rhs == pytest.approx((100 / 99 + 1) * math.log(100))
        assert report.rhs == pytest.approx(9.2569, abs=1e-3)
        assert report.snr_threshold == pytest.approx(math.exp(report.rhs))
        assert report.satisfied

    def test_below_threshold(self):
        assert not thm1_sufficient(100, 1, 1e4, 1.0).satisfied

    def test_zero_snr(self):
        report = thm1_sufficient(100, 1, 0.0, 1.0)
        assert report.lhs == -math.inf
        assert not report.satisfied

    def test_monotone_in_snr(self):
        verdicts = [thm1_sufficient(50, 3, s, 0.5).satisfied for s in np.logspace(0, 10, 40)]
        assert verdicts == sorted(verdicts)

    def test_constants(self):
        loose = thm1_sufficient(100, 1, 1e3, 0.5)
        tight = thm1_sufficient(100, 1, 1e3, 0.5, BoundConstants(c1=0.1))
        assert tight.rhs < loose.rhs

    @pytest.mark.parametrize("kwargs", [
        {"n": 10, "d": 10, "snr": 1.0, "epsilon": 1.0},
        {"n": 10, "d": 1, "snr": 1.0, "epsilon": 0.0},
        {"n": 9, "d": 1, "snr": 1.0, "epsilon": 3.0},
        {"n": 10, "d": 1, "snr": -1.0, "epsilon": 1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            thm1_sufficient(**kwargs)


class TestConverse:
    def test_threshold(self):
        report = thm2_converse(100, 12.5, 1.0)
        assert report.snr_threshold == pytest.approx(100 / math.e**2 - 1)
        assert report.satisfied
        assert not thm2_converse(100, 12.6, 1.0).satisfied

    def test_delta_range(self):
        with pytest.raises(InvalidArgumentError):
            thm2_converse(100, 1.0, 2.0)
        with pytest.raises(InvalidArgumentError):
            thm2_converse(100, 1.0, 0.0)

    def test_verdict_line(self):
        line = thm2_converse(100, 1.0, 1.0).verdict()
        assert line.startswith("thm2: SATISFIED")
        assert "snr threshold" in line


class TestSideInformation:
    def test_n9(self):
        report = prop1_side_info(9, 0.1)
        assert report.rhs == pytest.approx(8 / 9 * math.log(9 / 8))
        assert report.snr_threshold == pytest.approx(math.expm1(report.rhs))
        assert report.satisfied
        assert not prop1_side_info(9, 0.2).satisfied

    def test_out_of_scope(self):
        with pytest.raises(OutOfScopeError):
            prop1_side_info(8, 0.1)


class TestApproximateConverse:
    def test_largest_distortion(self):
        report = thm3_approx_converse(100, 0.0, 99)
        assert report.rhs == pytest.approx(2 / 100 * math.log(1 / math.e))
        assert report.rhs == pytest.approx(-0.02)
        assert not report.satisfied
        assert report.snr_threshold is None

    def test_moderate_distortion(self):
        report = thm3_approx_converse(100, 1.0, 10)
        assert report.rhs == pytest.approx(0.91 * math.log(91 / (2 * math.e)), rel=1e-12)
        assert report.satisfied

    @pytest.mark.parametrize("D", [2, 100])
    def test_distortion_range(self, D):
        with pytest.raises(InvalidArgumentError):
            thm3_approx_converse(100, 1.0, D)


class TestChiSquareBound:
    def test_values(self):
        assert chi2_lower_tail_bound(2, 2.0) == pytest.approx(1.0)
        assert chi2_lower_tail_bound(3, 0.0) == 0.0
        assert chi2_lower_tail_bound(2, 0.5) == pytest.approx(0.25 * math.exp(0.75), abs=1e-12)
        assert chi2_lower_tail_bound(1, 0.5) == pytest.approx(math.sqrt(0.5 * math.exp(0.5)))

    def test_outside_validity(self):
        with pytest.raises(OutOfValidityError):
            chi2_lower_tail_bound(2, 3.0)

    @pytest.mark.parametrize("ell", [1, 2, 5, 10])
    def test_nondecreasing_in_p(self, ell):
        values = [chi2_lower_tail_bound(ell, p) for p in np.linspace(0.0, ell, 200)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0)

    def test_bad_dof(self):
        with pytest.raises(InvalidArgumentError):
            chi2_lower_tail_bound(0, 0.5)

    @pytest.mark.parametrize("ell", [1, 2, 5, 10])
    def test_monte_carlo(self, rng, ell):
        report = verify_chi2_bound_mc(ell, np.linspace(ell / 20, ell, 20), 20_000, rng)
        assert report.passed
        for check in report.checks:
            assert check.exact <= check.bound + 1e-12

    def test_needs_enough_samples(self, rng):
        with pytest.raises(InvalidArgumentError):
            verify_chi2_bound_mc(2, [1.0], 100, rng)


class TestProjectionBound:
    def test_value(self):
        assert projection_tail_bound(10, 2, 2.0) == pytest.approx(2 * 0.75**4)
        assert projection_tail_bound(10, 2, 2.0) == pytest.approx(0.6328125)

    def test_beyond_support(self):
        assert projection_tail_bound(10, 2, 6.0) == 0.0

    def test_beta_not_above_one(self):
        with pytest.raises(OutOfValidityError):
            projection_tail_bound(10, 2, 1.0)

    @pytest.mark.parametrize("n,d", [(10, 2), (50, 5)])
    def test_monte_carlo(self, rng, n, d):
        report = verify_projection_bound_mc(n, d, np.linspace(1.1, min(4.0, n / d), 12), 20_000, rng)
        assert report.passed
        doc = report.to_dict()
        assert doc["violations"] == 0
        assert all(isinstance(c["violated"], bool) for c in doc["checks"])


class TestCovarianceSpectrum:
    @pytest.mark.parametrize("n", [2, 5, 12])
    def test_closed_form_matches_dense(self, n):
        for hbar in range(2, n + 1):
            spec = lemma7_covariance_eigs(n, 1.0, hbar)
            eigs = dense_lemma7_eigs(n, hbar)
            assert eigs[0] == pytest.approx(spec.lambda1, rel=1e-9)
            assert np.allclose(eigs[1:], spec.lambda_rest, rtol=1e-9)
            assert float(np.prod(eigs)) == pytest.approx(spec.det_normalized, rel=1e-9)
            assert spec.det_normalized <= spec.det_normalized_bound * (1 + 1e-9)

    def test_matrix_off_diagonal_uses_alternative_probability(self):
        Y = lemma7_matrix(4, 2)
        assert Y[0, 0] == 1.0
        assert Y[0, 1] == pytest.approx(printed_fixed_point_probability(4, 2))
        assert Y[0, 1] != pytest.approx(fixed_point_probability(4, 2))

    def test_det_bound_scales_with_snr(self):
        spec = lemma7_covariance_eigs(6, 3.0, 3)
        assert spec.det_bound == pytest.approx(3.0**6 * spec.det_normalized_bound)

    def test_hbar_range(self):
        with pytest.raises(InvalidArgumentError):
            lemma7_covariance_eigs(5, 1.0, 1)


class TestConverseMonotonicity:
    """Lowering snr never turns a satisfied non-recovery condition into an unsatisfied one."""

    SNR_GRID = np.logspace(-3, 6, 60)

    @staticmethod
    def _assert_true_then_false(verdicts):
        assert verdicts == sorted(verdicts, reverse=True)
        assert verdicts[0] and not verdicts[-1]

    @pytest.mark.parametrize("n,delta", [(20, 1.0), (100, 0.5), (1000, 1.5)])
    def test_thm2(self, n, delta):
        self._assert_true_then_false([thm2_converse(n, s, delta).satisfied for s in self.SNR_GRID])

    @pytest.mark.parametrize("n", [9, 50, 1000])
    def test_prop1(self, n):
        self._assert_true_then_false([prop1_side_info(n, s).satisfied for s in self.SNR_GRID])

    @pytest.mark.parametrize("n,D", [(100, 10), (100, 50), (500, 3)])
    def test_thm3(self, n, D):
        self._assert_true_then_false([thm3_approx_converse(n, s, D).satisfied for s in self.SNR_GRID])
