"""Tests for instance synthesis, projection residuals and the instance codec."""

import itertools
import math

import numpy as np
import pytest

from permreg.errors import DegenerateDesignError, InvalidArgumentError
from permreg.model import (
    delta_statistic,
    gamma_of,
    gamma_ratio,
    generate_instance,
    instance_from_dict,
    instance_to_dict,
    is_identifiable_regime,
    least_squares_fit,
    load_instance,
    projection_residual,
    save_instance,
    snr_for_gamma,
    snr_of,
)
from permreg.permutation import Permutation, sample_uniform


class TestGenerateInstance:
    def test_noiseless(self):
        inst = generate_instance(6, 2, [1.0, -2.0], 0.0, seed=3)
        assert np.array_equal(inst.w, np.zeros(6))
        assert np.allclose(inst.y, inst.pi_star.apply(inst.A @ inst.x_star))

    def test_identity_scalar(self):
        inst = generate_instance(5, 1, [2.0], 0.0, pi_star="identity", seed=1)
        assert np.array_equal(inst.y, 2.0 * inst.A[:, 0])
        assert inst.pi_star == Permutation.identity(5)

    def test_explicit_permutation(self):
        p = Permutation((1, 0, 2, 3))
        inst = generate_instance(4, 1, [1.0], 0.5, pi_star=p, seed=0)
        assert inst.pi_star == p
        assert inst.reconstruction_error() == 0.0

    def test_bitwise_deterministic(self):
        a = generate_instance(20, 3, [1.0, 2.0, 3.0], 1.0, seed=42)
        b = generate_instance(20, 3, [1.0, 2.0, 3.0], 1.0, seed=42)
        assert np.array_equal(a.A, b.A)
        assert np.array_equal(a.w, b.w)
        assert np.array_equal(a.y, b.y)
        assert a.pi_star == b.pi_star

    def test_seeds_differ(self):
        a = generate_instance(20, 1, [1.0], 1.0, seed=1)
        b = generate_instance(20, 1, [1.0], 1.0, seed=2)
        assert not np.array_equal(a.A, b.A)

    def test_d_not_below_n(self):
        with pytest.raises(InvalidArgumentError):
            generate_instance(3, 3, [1.0, 1.0, 1.0], 1.0)

    def test_negative_sigma(self):
        with pytest.raises(InvalidArgumentError):
            generate_instance(5, 1, [1.0], -0.1)

    def test_wrong_x_star_shape(self):
        with pytest.raises(InvalidArgumentError):
            generate_instance(5, 2, [1.0], 1.0)

    def test_design_statistics(self):
        inst = generate_instance(20_000, 2, [1.0, 1.0], 1.0, seed=7)
        assert np.abs(inst.A.mean(axis=0)).max() < 0.05
        assert np.abs(inst.A.var(axis=0) - 1).max() < 0.05
        assert abs(inst.w.var() - 1) < 0.05


class TestSnrAndGamma:
    def test_snr_99_at_n10(self):
        assert gamma_ratio(10, 99.0) == pytest.approx(2.0)

    def test_zero_snr(self):
        assert gamma_ratio(10, 0.0) == 0.0

    def test_infinite_snr(self):
        assert gamma_ratio(10, math.inf) == math.inf

    def test_inverse(self):
        assert snr_for_gamma(10, 8.0) == pytest.approx(1e8 - 1)

    def test_of_instance(self):
        inst = generate_instance(10, 1, [3.0], 0.5, seed=0)
        assert snr_of(inst) == pytest.approx(36.0)
        assert gamma_of(inst) == pytest.approx(math.log(37.0) / math.log(10))

    def test_noiseless_is_infinite(self):
        inst = generate_instance(10, 1, [3.0], 0.0, seed=0)
        assert snr_of(inst) == math.inf

    def test_small_n(self):
        with pytest.raises(InvalidArgumentError):
            gamma_ratio(1, 5.0)

    def test_identifiable_regime(self):
        assert is_identifiable_regime(4, 2)
        assert not is_identifiable_regime(3, 2)


class TestProjectionResidual:
    def test_single_column(self):
        y = np.array([0.0, 3.0])
        a = np.array([1.0, 0.0])
        assert projection_residual(y, a, Permutation.identity(2)) == pytest.approx(9.0)
        assert projection_residual(y, a, Permutation((1, 0))) == pytest.approx(0.0)

    def test_agrees_with_lstsq(self, rng):
        for _ in range(50):
            n, d = 12, 3
            A = rng.standard_normal((n, d))
            y = rng.standard_normal(n)
            p = sample_uniform(n, rng)
            PA = p.apply(A)
            x, *_ = np.linalg.lstsq(PA, y, rcond=None)
            r = y - PA @ x
            assert projection_residual(y, A, p) == pytest.approx(float(r @ r), rel=1e-9)
            assert np.allclose(least_squares_fit(y, A, p), x)

    def test_invariant_under_column_mixing(self, rng):
        A = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        p = sample_uniform(10, rng)
        U, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        assert projection_residual(y, A @ U, p) == pytest.approx(projection_residual(y, A, p), rel=1e-9)

    def test_rank_deficient(self):
        A = np.ones((5, 2))
        with pytest.raises(DegenerateDesignError):
            projection_residual(np.arange(5.0), A, Permutation.identity(5))
        with pytest.raises(DegenerateDesignError):
            least_squares_fit(np.arange(5.0), A, Permutation((4, 3, 2, 1, 0)))

    def test_fit_recovers_noiseless_coefficients(self, rng):
        A = rng.standard_normal((8, 3))
        x = np.array([1.5, -2.0, 0.25])
        p = sample_uniform(8, rng)
        assert np.allclose(least_squares_fit(p.apply(A) @ x, A, p), x)

    def test_size_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            projection_residual(np.zeros(4), np.ones(5), Permutation.identity(5))
        with pytest.raises(InvalidArgumentError):
            least_squares_fit(np.zeros(4), np.ones(5), Permutation.identity(5))


class TestDeltaStatistic:
    def test_zero_at_truth(self, make_instance):
        inst = make_instance(10, 2)
        stats = delta_statistic(inst, inst.pi_star)
        assert stats.delta == pytest.approx(0.0, abs=1e-9)
        assert stats.t_pi == pytest.approx(0.0, abs=1e-6 * float(inst.signal @ inst.signal))

    @pytest.mark.parametrize("n", [10, 50])
    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_residual_identity(self, make_instance, rng, n, d):
        for seed in range(100):
            inst = make_instance(n, d, seed=seed)
            stats = delta_statistic(inst, sample_uniform(n, rng))
            assert stats.residual_identity_holds
            assert stats.t_pi >= 0

    def test_noiseless_unique_in_identifiable_regime(self, make_instance):
        n, d = 6, 2
        assert is_identifiable_regime(n, d)
        inst = make_instance(n, d, sigma=0.0, seed=4)
        for m in itertools.permutations(range(n)):
            p = Permutation(m)
            if p == inst.pi_star:
                continue
            assert delta_statistic(inst, p).delta > 1e-8

    def test_t_pi_nonnegative(self, make_instance, rng):
        inst = make_instance(15, 3, seed=9)
        for _ in range(1000):
            assert delta_statistic(inst, sample_uniform(15, rng)).t_pi >= 0


class TestInstanceCodec:
    def test_lossless_through_file(self, make_instance, tmp_path):
        inst = make_instance(8, 2, seed=5)
        path = tmp_path / "inst.json"
        save_instance(inst, path)
        back = load_instance(path)
        assert back.pi_star == inst.pi_star
        assert back.sigma == inst.sigma
        for name in ("A", "x_star", "w", "y"):
            assert np.array_equal(getattr(back, name), getattr(inst, name))

    def test_plain_floats_accepted(self, make_instance):
        doc = instance_to_dict(make_instance(4, 1, seed=1))
        doc["sigma"] = 1.0
        assert instance_from_dict(doc).sigma == 1.0

    def test_malformed(self):
        with pytest.raises(InvalidArgumentError, match="malformed"):
            instance_from_dict({"n": 3})
