"""Closed-form recovery conditions and tail bounds, plus Monte Carlo checks of the tail bounds.

All logarithms are natural. The theorem conditions involve absolute
constants that are never pinned down; they are taken from BoundConstants
(default 1) and every verdict holds only up to those constants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as spla
from scipy import stats

from .config import BoundConstants
from .errors import InvalidArgumentError, OutOfScopeError, OutOfValidityError

# Slack, in binomial standard errors, allowed before a Monte Carlo point counts as a violation
MC_SLACK_SE = 3.0
MIN_MC_SAMPLES = 10_000


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict
    lhs: float
    rhs: float
    satisfied: bool
    guarantee: str
    snr_threshold: float | None = None  # snr at which the inequality flips

    def to_dict(self) -> dict:
        return asdict(self)

    def verdict(self) -> str:
        state = "SATISFIED" if self.satisfied else "not satisfied"
        line = f"{self.name}: {state} (lhs={self.lhs:.6g}, rhs={self.rhs:.6g})"
        if self.snr_threshold is not None:
            line += f"; snr threshold {self.snr_threshold:.6g}"
        if self.satisfied:
            line += f" => {self.guarantee}"
        return line


def _log(x: float) -> float:
    return -math.inf if x == 0 else math.log(x)


def _check_snr(snr: float) -> None:
    if not snr >= 0:
        raise InvalidArgumentError(f"snr must be >= 0, got {snr}")


def thm1_sufficient(n: int, d: int, snr: float, epsilon: float,
                    constants: BoundConstants | None = None) -> BoundReport:
    """log snr >= (c1 n/(n-d) + eps) log n  =>  P(MLE fails) <= c2 n^(-2 eps)."""
    c = constants or BoundConstants()
    if not 1 <= d < n:
        raise InvalidArgumentError(f"need 1 <= d < n, got n={n}, d={d}")
    if not 0 < epsilon < math.sqrt(n):
        raise InvalidArgumentError(f"epsilon must be in (0, sqrt(n)), got {epsilon}")
    if c.c1 <= 0:
        raise InvalidArgumentError(f"c1 must be > 0, got {c.c1}")
    _check_snr(snr)
    rhs = (c.c1 * n / (n - d) + epsilon) * math.log(n)
    lhs = _log(snr)
    return BoundReport(
        name="thm1",
        inputs={"n": n, "d": d, "snr": snr, "epsilon": epsilon, "c1": c.c1, "c2": c.c2},
        lhs=lhs,
        rhs=rhs,
        satisfied=lhs >= rhs,
        guarantee=(f"P(MLE != truth) <= c2 n^(-2 eps) = {c.c2 * n ** (-2 * epsilon):.3g}"
                   " (up to absolute constants)"),
        snr_threshold=math.exp(rhs) if rhs < 700 else math.inf,
    )


def thm2_converse(n: int, snr: float, delta: float,
                  constants: BoundConstants | None = None) -> BoundReport:
    """2 + log(1 + snr) <= (2 - delta) log n  =>  every estimator fails w.p. >= 1 - c3 e^(-c4 n delta)."""
    c = constants or BoundConstants()
    if not 0 < delta < 2:
        raise InvalidArgumentError(f"delta must be in (0, 2), got {delta}")
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    _check_snr(snr)
    lhs = 2 + math.log1p(snr)
    rhs = (2 - delta) * math.log(n)
    return BoundReport(
        name="thm2",
        inputs={"n": n, "snr": snr, "delta": delta, "c3": c.c3, "c4": c.c4},
        lhs=lhs,
        rhs=rhs,
        satisfied=lhs <= rhs,
        guarantee=(f"P(any estimator fails) >= 1 - c3 exp(-c4 n delta) = "
                   f"{1 - c.c3 * math.exp(-c.c4 * n * delta):.6g} (up to absolute constants)"),
        snr_threshold=math.expm1(rhs - 2),
    )


def prop1_side_info(n: int, snr: float) -> BoundReport:
    """log(1 + snr) <= (8/9) log(n/8)  =>  error >= 1/2 even knowing d_H(P*, I) <= 2."""
    if n < 9:
        raise OutOfScopeError(f"side-information converse requires n >= 9, got n={n}")
    _check_snr(snr)
    lhs = math.log1p(snr)
    rhs = 8 / 9 * math.log(n / 8)
    return BoundReport(
        name="prop1",
        inputs={"n": n, "snr": snr},
        lhs=lhs,
        rhs=rhs,
        satisfied=lhs <= rhs,
        guarantee="P(any estimator fails) >= 1/2, even given d_H(P*, I) <= 2",
        snr_threshold=math.expm1(rhs),
    )


def thm3_approx_converse(n: int, snr: float, D: int) -> BoundReport:
    """log(1 + snr) <= ((n-D+1)/n) log((n-D+1)/(2e))  =>  P(d_H(P_hat, P*) >= D) >= 1/2."""
    if not 2 < D <= n - 1:
        raise InvalidArgumentError(f"D must satisfy 2 < D <= n-1, got D={D}, n={n}")
    _check_snr(snr)
    m = n - D + 1
    lhs = math.log1p(snr)
    rhs = m / n * math.log(m / (2 * math.e))
    return BoundReport(
        name="thm3",
        inputs={"n": n, "snr": snr, "D": D},
        lhs=lhs,
        rhs=rhs,
        satisfied=lhs <= rhs,
        guarantee=f"P(d_H(estimate, truth) >= {D}) >= 1/2 for any estimator",
        snr_threshold=math.expm1(rhs) if rhs >= 0 else None,
    )


def chi2_lower_tail_bound(ell: int, p: float) -> float:
    """(p/ell * exp(1 - p/ell))^(ell/2), a bound on P(Z_ell <= p) for p in [0, ell]."""
    if ell < 1:
        raise InvalidArgumentError(f"degrees of freedom must be >= 1, got {ell}")
    if p < 0:
        raise InvalidArgumentError(f"p must be >= 0, got {p}")
    if p > ell:
        raise OutOfValidityError(f"chi-square lower tail bound holds for p <= ell={ell}, got p={p}")
    if p == 0:
        return 0.0
    r = p / ell
    return (r * math.exp(1 - r)) ** (ell / 2)


def projection_tail_bound(n: int, d: int, beta: float) -> float:
    """beta^(d/2) (1 + (1-beta) d/(n-d))^((n-d)/2), bounding P(||P x||^2 >= beta d/n ||x||^2)."""
    if beta <= 1:
        raise OutOfValidityError(f"projection tail bound holds for beta > 1, got {beta}")
    if not 1 <= d < n:
        raise InvalidArgumentError(f"need 1 <= d < n, got n={n}, d={d}")
    base = 1 + (1 - beta) * d / (n - d)
    if base <= 0:
        # beta >= n/d: the event needs ||P x|| > ||x||, which never happens
        return 0.0
    return beta ** (d / 2) * base ** ((n - d) / 2)


@dataclass(frozen=True)
class CovarianceSpectrum:
    n: int
    hbar: int
    lambda1: float
    lambda_rest: float
    det_bound: float  # (sigma^2 + ||x*||^2)^n (1 + n) (hbar/n)^(n-1)

    @property
    def det_normalized(self) -> float:
        return self.lambda1 * self.lambda_rest ** (self.n - 1)

    @property
    def det_normalized_bound(self) -> float:
        return (1 + self.n) * (self.hbar / self.n) ** (self.n - 1)


def lemma7_matrix(n: int, hbar: int) -> np.ndarray:
    """Normalized covariance: unit diagonal, off-diagonal (n - hbar)/n + hbar/n^2."""
    off = (n - hbar) / n + hbar / n**2
    Y = np.full((n, n), off)
    np.fill_diagonal(Y, 1.0)
    return Y


def lemma7_covariance_eigs(n: int, snr_plus: float, hbar: int) -> CovarianceSpectrum:
    if not 2 <= hbar <= n:
        raise InvalidArgumentError(f"hbar must be in [2, {n}], got {hbar}")
    lambda1 = 1 + (n - hbar) * (n - 1) / n + hbar * (n - 1) / n**2
    lambda_rest = hbar / n - hbar / n**2
    det_bound = snr_plus**n * (1 + n) * (hbar / n) ** (n - 1)
    return CovarianceSpectrum(n=n, hbar=hbar, lambda1=lambda1, lambda_rest=lambda_rest,
                              det_bound=det_bound)


def dense_lemma7_eigs(n: int, hbar: int) -> np.ndarray:
    """Eigenvalues of lemma7_matrix by a dense symmetric eigensolve, descending."""
    return spla.eigh(lemma7_matrix(n, hbar), eigvals_only=True)[::-1]


# --- Monte Carlo verifiers ---

@dataclass(frozen=True)
class TailCheck:
    point: float
    empirical: float
    bound: float
    stderr: float
    exact: float
    violated: bool


@dataclass(frozen=True)
class VerificationReport:
    name: str
    params: dict
    checks: list[TailCheck] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(c.violated for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"name": self.name, "params": self.params, "passed": self.passed,
                "violations": self.violations, "checks": [asdict(c) for c in self.checks]}


def _binomial_stderr(freq: float, samples: int) -> float:
    return math.sqrt(freq * (1 - freq) / samples)


def verify_chi2_bound_mc(ell: int, p_grid, samples: int, rng: np.random.Generator) -> VerificationReport:
    """Compare the empirical CDF of chi-square draws against chi2_lower_tail_bound."""
    if samples < MIN_MC_SAMPLES:
        raise InvalidArgumentError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    draws = np.sort(rng.chisquare(ell, size=samples))
    checks = []
    for p in p_grid:
        p = float(p)
        freq = np.searchsorted(draws, p, side="right") / samples
        bound = chi2_lower_tail_bound(ell, p)
        se = _binomial_stderr(freq, samples)
        checks.append(TailCheck(point=p, empirical=float(freq), bound=bound, stderr=se,
                                exact=float(stats.chi2.cdf(p, ell)),
                                violated=bool(freq > bound + MC_SLACK_SE * se)))
    return VerificationReport(name="chi2_tail", params={"ell": ell, "samples": samples}, checks=checks)


def verify_projection_bound_mc(n: int, d: int, beta_grid, samples: int,
                               rng: np.random.Generator) -> VerificationReport:
    """Empirical P(||P x||^2 >= beta d/n ||x||^2) for a random d-dim projection.

    By rotation invariance this equals the squared norm of the first d
    coordinates of a uniform unit vector, a Beta(d/2, (n-d)/2) variable.
    """
    if samples < MIN_MC_SAMPLES:
        raise InvalidArgumentError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    g = rng.standard_normal((samples, n))
    sq = g * g
    ratio = sq[:, :d].sum(axis=1) / sq.sum(axis=1)
    checks = []
    for beta in beta_grid:
        beta = float(beta)
        threshold = beta * d / n
        freq = float(np.mean(ratio >= threshold))
        bound = projection_tail_bound(n, d, beta)
        se = _binomial_stderr(freq, samples)
        checks.append(TailCheck(point=beta, empirical=freq, bound=bound, stderr=se,
                                exact=float(stats.beta.sf(threshold, d / 2, (n - d) / 2)),
                                violated=bool(freq > bound + MC_SLACK_SE * se)))
    return VerificationReport(name="proj_tail", params={"n": n, "d": d, "samples": samples},
                              checks=checks)
