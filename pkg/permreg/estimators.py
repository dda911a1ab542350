"""Permutation estimators: sort-based MLE (d=1), exhaustive MLE, oracle, alternating minimization."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import DEFAULT_BRUTE_MAX_N, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS, SearchConfig
from .errors import DegenerateDesignError, InvalidArgumentError, SearchRefusedError
from .model import (
    ProblemInstance,
    _as_design,
    least_squares_fit,
    orthonormal_basis,
    projection_residual,
)
from .permutation import Permutation, hamming_distance, sample_uniform

# Candidate maps scored per vectorized batch during exhaustive search
_BATCH = 40320


@dataclass(frozen=True)
class EstimationResult:
    pi_hat: Permutation
    x_hat: np.ndarray
    objective: float
    exact: bool
    method: str
    iterations: int = 0
    hamming_to_truth: int | None = None
    history: tuple[float, ...] = field(default=(), repr=False)

    def with_truth(self, pi_star: Permutation) -> EstimationResult:
        return replace(self, hamming_to_truth=hamming_distance(self.pi_hat, pi_star))

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "pi_hat": self.pi_hat.to_list(),
            "x_hat": [float(v) for v in self.x_hat],
            "objective": float(self.objective),
            "exact": self.exact,
            "iterations": self.iterations,
            "hamming_to_truth": self.hamming_to_truth,
        }


def _rank_match(y: np.ndarray, b: np.ndarray) -> Permutation:
    """Map pairing the k-th smallest entry of b with the k-th smallest of y.

    Ties are ordered by original index (stable sort).
    """
    order_y = np.argsort(y, kind="stable")
    order_b = np.argsort(b, kind="stable")
    m = np.empty(len(y), dtype=np.intp)
    m[order_y] = order_b
    return Permutation.from_array(m)


def _finish(y, A, pi_hat: Permutation, method: str, exact: bool, **extra) -> EstimationResult:
    return EstimationResult(
        pi_hat=pi_hat,
        x_hat=least_squares_fit(y, A, pi_hat),
        objective=projection_residual(y, A, pi_hat),
        exact=exact,
        method=method,
        **extra,
    )


def sort_mle_d1(y, a) -> EstimationResult:
    """Exact MLE for d = 1 in O(n log n).

    Sorts a (and -a) according to y and keeps whichever candidate has the
    larger |a_P^T y|; an exact tie goes to the +a candidate.
    """
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float).ravel()
    if a.shape != y.shape:
        raise InvalidArgumentError(f"size mismatch: a has {a.size}, y has {y.size}")
    if not np.any(a):
        raise DegenerateDesignError("a is identically zero; every permutation has the same objective")

    pi_1 = _rank_match(y, a)
    pi_2 = _rank_match(y, -a)
    score_1 = abs(pi_1.apply(a) @ y)
    score_2 = abs(pi_2.apply(a) @ y)
    pi_hat = pi_1 if score_1 >= score_2 else pi_2
    return _finish(y, a, pi_hat, "sort1d", exact=True)


def _best_with_first(y: np.ndarray, Q: np.ndarray, first: int) -> tuple[float, tuple[int, ...]]:
    """Best map among those with map[0] == first, scanned in lexicographic order."""
    n = len(y)
    yy = float(y @ y)
    rest = [v for v in range(n) if v != first]
    it = itertools.permutations(rest)
    best: tuple[float, tuple[int, ...]] = (math.inf, ())
    while True:
        chunk = list(itertools.islice(it, _BATCH))
        if not chunk:
            break
        M = np.empty((len(chunk), n), dtype=np.intp)
        M[:, 0] = first
        M[:, 1:] = chunk
        proj = np.einsum("i,bid->bd", y, Q[M])
        obj = yy - np.einsum("bd,bd->b", proj, proj)
        k = int(np.argmin(obj))
        if obj[k] < best[0]:
            best = (float(obj[k]), tuple(int(v) for v in M[k]))
    return best


def brute_force_mle(y, A, max_n: int = DEFAULT_BRUTE_MAX_N, workers: int = 1) -> EstimationResult:
    """Exhaustive MLE over all n! permutations.

    For a candidate P the projector onto range(P A) has basis Q[P], where Q is
    the QR basis of A, so one factorization serves every candidate. The search
    is split by the value of map[0]; blocks are reduced by (objective, map) so
    any worker count returns the same answer.
    """
    y = np.asarray(y, dtype=float)
    A = _as_design(A)
    n = y.shape[0]
    if A.shape[0] != n:
        raise InvalidArgumentError(f"size mismatch: y has {n}, A has {A.shape[0]} rows")
    if n > max_n:
        raise SearchRefusedError(f"brute force limited to n <= {max_n}, got n={n} ({math.factorial(n)} candidates)")
    Q = orthonormal_basis(A)

    firsts = range(n)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_best_with_first, itertools.repeat(y), itertools.repeat(Q), firsts))
    else:
        blocks = [_best_with_first(y, Q, f) for f in firsts]

    _, best_map = min(blocks)
    return _finish(y, A, Permutation(best_map), "brute", exact=True)


def oracle_x_estimator(y, A, x_star) -> EstimationResult:
    """argmin_P ||y - P A x*||^2 with x* known: a 1-D assignment solved by rank matching."""
    y = np.asarray(y, dtype=float)
    A = _as_design(A)
    b = A @ np.atleast_1d(np.asarray(x_star, dtype=float))
    if b.shape != y.shape:
        raise InvalidArgumentError(f"size mismatch: A x* has {b.size}, y has {y.size}")
    return _finish(y, A, _rank_match(y, b), "oracle", exact=True)


def _altmin_run(y: np.ndarray, A: np.ndarray, start: Permutation,
                max_iters: int) -> tuple[Permutation, list[float]]:
    pi = start
    history = [projection_residual(y, A, pi)]
    for _ in range(max_iters):
        x = least_squares_fit(y, A, pi)
        nxt = _rank_match(y, A @ x)
        if nxt == pi:
            break
        pi = nxt
        history.append(projection_residual(y, A, pi))
    return pi, history


def alternating_min(y, A, restarts: int = DEFAULT_RESTARTS, max_iters: int = DEFAULT_MAX_ITERS,
                    rng: np.random.Generator | None = None) -> EstimationResult:
    """Heuristic for general d: alternate a least-squares fit and an exact rank matching.

    The first run starts at the identity, the remaining ones at uniform random
    permutations. Each run's objective is non-increasing; the best run is kept.
    """
    y = np.asarray(y, dtype=float)
    A = _as_design(A)
    n = y.shape[0]
    if restarts < 1:
        raise InvalidArgumentError(f"restarts must be >= 1, got {restarts}")
    orthonormal_basis(A)  # rank check
    rng = rng if rng is not None else np.random.default_rng(0)

    best_pi, best_hist = None, None
    for r in range(restarts):
        start = Permutation.identity(n) if r == 0 else sample_uniform(n, rng)
        pi, hist = _altmin_run(y, A, start, max_iters)
        if best_hist is None or hist[-1] < best_hist[-1]:
            best_pi, best_hist = pi, hist

    return _finish(y, A, best_pi, "altmin", exact=False,
                   iterations=len(best_hist) - 1, history=tuple(best_hist))


def run_estimator(method: str, instance: ProblemInstance, search: SearchConfig | None = None,
                  rng: np.random.Generator | None = None, workers: int = 1) -> EstimationResult:
    """Dispatch by method id and attach the Hamming distance to the truth."""
    search = search or SearchConfig()
    y, A = instance.y, instance.A
    if method == "sort1d":
        if instance.d != 1:
            raise InvalidArgumentError(f"sort1d requires d=1, got d={instance.d}")
        result = sort_mle_d1(y, A[:, 0])
    elif method == "brute":
        result = brute_force_mle(y, A, max_n=search.brute_max_n, workers=workers)
    elif method == "oracle":
        result = oracle_x_estimator(y, A, instance.x_star)
    elif method == "altmin":
        result = alternating_min(y, A, restarts=search.restarts,
                                 max_iters=search.max_iters, rng=rng)
    else:
        raise InvalidArgumentError(f"unknown estimator '{method}'")
    return result.with_truth(instance.pi_star)
