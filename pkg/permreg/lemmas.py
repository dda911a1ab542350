"""Numerical and Monte Carlo checks of the supporting lemmas, run as one suite."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import (
    dense_lemma7_eigs,
    lemma7_covariance_eigs,
    verify_chi2_bound_mc,
    verify_projection_bound_mc,
)
from .permutation import (
    fixed_point_probability,
    independent_partition,
    is_independent_set,
    printed_fixed_point_probability,
    sample_derangement,
    sample_hamming_ball_generative,
)

FIXED_POINT_TOL = 0.01
EIG_RTOL = 1e-9


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    params: dict
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def verify_hamming_ball_fixed_point(n: int, hbar: int, samples: int,
                                    rng: np.random.Generator) -> LemmaCheck:
    """Empirical P(pi(i) = i) under the two-step sampler, pooled over positions."""
    fixed = 0
    for _ in range(samples):
        p = sample_hamming_ball_generative(n, hbar, rng)
        fixed += int(np.count_nonzero(p.array == np.arange(n)))
        if not np.count_nonzero(p.array != np.arange(n)) <= hbar:
            return LemmaCheck("hamming_ball_fixed_point", {"n": n, "hbar": hbar}, False,
                              {"error": f"sample {p.map} outside the Hamming ball"})
    empirical = fixed / (samples * n)
    expected = fixed_point_probability(n, hbar)
    return LemmaCheck(
        name="hamming_ball_fixed_point",
        params={"n": n, "hbar": hbar, "samples": samples},
        passed=abs(empirical - expected) <= FIXED_POINT_TOL,
        detail={"empirical": empirical, "expected": expected,
                "printed": printed_fixed_point_probability(n, hbar)},
    )


def verify_independent_partition(trials: int, k_min: int, k_max: int,
                                 rng: np.random.Generator) -> LemmaCheck:
    """Three independent parts of size >= floor(k/3) for random derangements."""
    failures = []
    for _ in range(trials):
        k = int(rng.integers(k_min, k_max + 1))
        p = sample_derangement(k, rng)
        parts = independent_partition(p).parts
        covered = sorted(v for part in parts for v in part) == list(range(k))
        independent = all(is_independent_set(p, part) for part in parts)
        big_enough = min(len(part) for part in parts) >= k // 3
        if not (covered and independent and big_enough):
            failures.append(p.to_list())
    return LemmaCheck(
        name="independent_partition",
        params={"trials": trials, "k_min": k_min, "k_max": k_max},
        passed=not failures,
        detail={"failures": len(failures), "first_failure": failures[0] if failures else None},
    )


def verify_lemma7(n_max: int = 12) -> LemmaCheck:
    """Closed-form eigenvalues, determinant and determinant bound against dense eigensolves."""
    worst = 0.0
    bad = []
    for n in range(2, n_max + 1):
        for hbar in range(2, n + 1):
            spec = lemma7_covariance_eigs(n, 1.0, hbar)
            eigs = dense_lemma7_eigs(n, hbar)
            err = max(abs(eigs[0] - spec.lambda1) / spec.lambda1,
                      float(np.max(np.abs(eigs[1:] - spec.lambda_rest))) / spec.lambda_rest)
            det_dense = float(np.prod(eigs))
            err = max(err, abs(det_dense - spec.det_normalized) / spec.det_normalized)
            worst = max(worst, err)
            if err > EIG_RTOL or spec.det_normalized > spec.det_normalized_bound * (1 + EIG_RTOL):
                bad.append((n, hbar))
    return LemmaCheck(
        name="lemma7_eigs",
        params={"n_max": n_max},
        passed=not bad,
        detail={"worst_relative_error": worst, "failures": bad},
    )


def _from_report(report) -> LemmaCheck:
    return LemmaCheck(name=report.name, params=report.params, passed=report.passed,
                      detail={"violations": report.violations,
                              "checks": [asdict(c) for c in report.checks]})


def run_lemma_suite(samples: int = 100_000, seed: int = 0, verbose: bool = False) -> list[LemmaCheck]:
    """Tail bounds, fixed-point probability, independent partition and covariance spectrum."""
    def say(msg):
        if verbose:
            print(msg, file=sys.stderr)

    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]
    checks: list[LemmaCheck] = []

    say("=== Lemma verification ===\n")
    say("--- chi-square lower tail ---")
    for ell in (1, 2, 5, 10):
        grid = np.linspace(ell / 20, ell, 20)
        checks.append(_from_report(verify_chi2_bound_mc(ell, grid, samples, streams[0])))
        say(f"  ell={ell}: {'ok' if checks[-1].passed else 'VIOLATED'}")

    say("--- random projection tail ---")
    for n, d in ((10, 2), (50, 5)):
        betas = np.linspace(1.1, min(4.0, n / d), 12)
        checks.append(_from_report(verify_projection_bound_mc(n, d, betas, samples, streams[1])))
        say(f"  n={n}, d={d}: {'ok' if checks[-1].passed else 'VIOLATED'}")

    say("--- Hamming-ball fixed points ---")
    for n, hbar in ((10, 2), (10, 5)):
        checks.append(verify_hamming_ball_fixed_point(n, hbar, samples, streams[2]))
        say(f"  n={n}, hbar={hbar}: empirical {checks[-1].detail['empirical']:.4f}"
            f" vs {checks[-1].detail['expected']:.4f}")

    say("--- independent partition ---")
    checks.append(verify_independent_partition(1000, 3, 50, streams[3]))
    say(f"  failures: {checks[-1].detail['failures']}")

    say("--- covariance spectrum ---")
    checks.append(verify_lemma7(12))
    say(f"  worst relative error: {checks[-1].detail['worst_relative_error']:.3g}")

    failed = [c.name for c in checks if not c.passed]
    say(f"\n{len(checks) - len(failed)}/{len(checks)} checks passed"
        + (f"; failed: {', '.join(failed)}" if failed else ""))
    return checks

