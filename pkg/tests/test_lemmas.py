"""Tests for the lemma verification suite."""

import json

import numpy as np
import pytest

from permreg.lemmas import (
    run_lemma_suite,
    verify_hamming_ball_fixed_point,
    verify_independent_partition,
    verify_lemma7,
)


def test_fixed_point_check_uses_exact_probability(rng):
    check = verify_hamming_ball_fixed_point(4, 2, 20_000, rng)
    assert check.passed
    assert check.detail["expected"] == 0.75
    assert check.detail["printed"] == 0.625
    assert abs(check.detail["empirical"] - check.detail["printed"]) > 0.05


def test_independent_partition_check(rng):
    check = verify_independent_partition(200, 3, 30, rng)
    assert check.passed
    assert check.detail["failures"] == 0


def test_lemma7_check():
    check = verify_lemma7(8)
    assert check.passed
    assert check.detail["worst_relative_error"] < 1e-9


@pytest.mark.slow
def test_full_suite_passes(capsys):
    checks = run_lemma_suite(samples=10_000, seed=3, verbose=True)
    assert all(c.passed for c in checks)
    names = {c.name for c in checks}
    assert {"chi2_tail", "proj_tail", "hamming_ball_fixed_point",
            "independent_partition", "lemma7_eigs"} <= names
    json.dumps([c.to_dict() for c in checks])
    err = capsys.readouterr().err
    assert "Lemma verification" in err
    assert "checks passed" in err


def test_suite_is_seeded():
    a = verify_hamming_ball_fixed_point(6, 3, 2_000, np.random.default_rng(5))
    b = verify_hamming_ball_fixed_point(6, 3, 2_000, np.random.default_rng(5))
    assert a == b
