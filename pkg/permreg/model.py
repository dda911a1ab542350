"""Observation model y = P* A x* + w: instance synthesis and projection residuals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as spla

from .config import RANK_RTOL
from .errors import DegenerateDesignError, InvalidArgumentError
from .permutation import Permutation, sample_uniform

# Relative tolerance for the residual identity ||Pperp_* y||^2 == ||Pperp_* w||^2
IDENTITY_RTOL = 1e-8


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    d: int
    A: np.ndarray
    x_star: np.ndarray
    pi_star: Permutation
    sigma: float
    w: np.ndarray
    y: np.ndarray
    seed: int

    @property
    def signal(self) -> np.ndarray:
        """Noiseless permuted measurements P* A x*."""
        return self.pi_star.apply(self.A @ self.x_star)

    def reconstruction_error(self) -> float:
        return float(np.max(np.abs(self.y - (self.signal + self.w)), initial=0.0))


@dataclass(frozen=True)
class ResidualStatistics:
    objective: float        # ||Pperp_P y||^2
    delta: float            # objective - ||Pperp_* y||^2
    t_pi: float             # ||Pperp_P P* A x*||^2
    truth_objective: float  # ||Pperp_* y||^2
    noise_objective: float  # ||Pperp_* w||^2

    @property
    def residual_identity_holds(self) -> bool:
        scale = max(abs(self.truth_objective), abs(self.noise_objective), 1e-300)
        return abs(self.truth_objective - self.noise_objective) <= IDENTITY_RTOL * scale + 1e-12


def is_identifiable_regime(n: int, d: int) -> bool:
    """n >= 2d: noiseless instances with a generic design have a unique solution."""
    return n >= 2 * d


def _seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent substreams for the design, the noise and the permutation."""
    a_seq, w_seq, pi_seq = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(a_seq), np.random.default_rng(w_seq), np.random.default_rng(pi_seq)


def generate_instance(n: int, d: int, x_star, sigma: float,
                      pi_star: Permutation | str = "random", seed: int = 0) -> ProblemInstance:
    """Draw A with i.i.d. N(0,1) entries and w ~ N(0, sigma^2 I), then assemble y."""
    if not 1 <= d < n:
        raise InvalidArgumentError(f"need 1 <= d < n, got n={n}, d={d}")
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be >= 0, got {sigma}")
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    if x_star.shape != (d,):
        raise InvalidArgumentError(f"x_star must have shape ({d},), got {x_star.shape}")

    a_rng, w_rng, pi_rng = _seed_streams(seed)
    A = a_rng.standard_normal((n, d))
    w = sigma * w_rng.standard_normal(n)

    if isinstance(pi_star, str):
        if pi_star == "random":
            pi_star = sample_uniform(n, pi_rng)
        elif pi_star == "identity":
            pi_star = Permutation.identity(n)
        else:
            raise InvalidArgumentError(f"unknown pi_star mode '{pi_star}'")
    if pi_star.size != n:
        raise InvalidArgumentError(f"pi_star has size {pi_star.size}, expected {n}")

    y = pi_star.apply(A @ x_star) + w
    return ProblemInstance(n=n, d=d, A=A, x_star=x_star, pi_star=pi_star,
                           sigma=float(sigma), w=w, y=y, seed=seed)


def snr_of(instance: ProblemInstance) -> float:
    """||x*||^2 / sigma^2, infinite for a noiseless instance."""
    energy = float(instance.x_star @ instance.x_star)
    if instance.sigma == 0:
        return math.inf
    return energy / instance.sigma**2


def gamma_ratio(n: int, snr: float) -> float:
    """log(1 + snr) / log(n), natural logarithms."""
    if n < 2:
        raise InvalidArgumentError(f"gamma needs n >= 2, got {n}")
    if math.isinf(snr):
        return math.inf
    return math.log1p(snr) / math.log(n)


def gamma_of(instance: ProblemInstance) -> float:
    return gamma_ratio(instance.n, snr_of(instance))


def snr_for_gamma(n: int, gamma: float) -> float:
    """Invert gamma_ratio: the snr with log(1 + snr) = gamma log(n)."""
    return math.expm1(gamma * math.log(n))


def check_full_column_rank(A: np.ndarray) -> None:
    s = spla.svdvals(np.atleast_2d(A))
    if s.size == 0 or s[0] == 0 or s[-1] <= RANK_RTOL * s[0] or A.shape[1] > A.shape[0]:
        raise DegenerateDesignError(
            f"design of shape {A.shape} is rank deficient (singular values {s})")


def orthonormal_basis(A: np.ndarray) -> np.ndarray:
    """Q factor (n x d) of the economic QR factorization of a full-rank A."""
    A = np.asarray(A, dtype=float).reshape(A.shape[0], -1)
    check_full_column_rank(A)
    Q, _ = spla.qr(A, mode="economic")
    return Q


def _as_design(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return A.reshape(-1, 1) if A.ndim == 1 else A


def residual_against_basis(y: np.ndarray, Q: np.ndarray) -> float:
    r = y - Q @ (Q.T @ y)
    return float(r @ r)


def projection_residual(y, A, p: Permutation) -> float:
    """||Pperp y||^2 for the column space of the row-permuted design P A."""
    y = np.asarray(y, dtype=float)
    A = _as_design(A)
    if A.shape[0] != y.shape[0] or p.size != y.shape[0]:
        raise InvalidArgumentError(
            f"size mismatch: y has {y.shape[0]}, A has {A.shape[0]} rows, p has size {p.size}")
    return residual_against_basis(y, orthonormal_basis(p.apply(A)))


def least_squares_fit(y, A, p: Permutation) -> np.ndarray:
    """argmin_x ||y - P A x||^2 by back substitution on the economic QR of P A."""
    y = np.asarray(y, dtype=float)
    PA = p.apply(_as_design(A))
    if PA.shape[0] != y.shape[0]:
        raise InvalidArgumentError(f"size mismatch: y has {y.shape[0]}, A has {PA.shape[0]} rows")
    check_full_column_rank(PA)
    Q, R = spla.qr(PA, mode="economic")
    return spla.solve_triangular(R, Q.T @ y)


def delta_statistic(instance: ProblemInstance, p: Permutation) -> ResidualStatistics:
    A = instance.A
    Q_truth = orthonormal_basis(instance.pi_star.apply(A))
    Q_p = orthonormal_basis(p.apply(A))
    objective = residual_against_basis(instance.y, Q_p)
    truth_objective = residual_against_basis(instance.y, Q_truth)
    return ResidualStatistics(
        objective=objective,
        delta=objective - truth_objective,
        t_pi=residual_against_basis(instance.signal, Q_p),
        truth_objective=truth_objective,
        noise_objective=residual_against_basis(instance.w, Q_truth),
    )


# --- JSON codec ---

def _encode_floats(arr) -> list[str]:
    return [float(v).hex() for v in np.asarray(arr, dtype=float).ravel()]


def _decode_floats(values) -> np.ndarray:
    return np.array([float.fromhex(v) if isinstance(v, str) else float(v) for v in values])


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "n": instance.n,
        "d": instance.d,
        "seed": instance.seed,
        "sigma": float(instance.sigma).hex(),
        "x_star": _encode_floats(instance.x_star),
        "pi_star": instance.pi_star.to_list(),
        "A": _encode_floats(instance.A),  # row-major
        "w": _encode_floats(instance.w),
        "y": _encode_floats(instance.y),
    }


def instance_from_dict(doc: dict) -> ProblemInstance:
    try:
        n, d = int(doc["n"]), int(doc["d"])
        sigma = doc["sigma"]
        sigma = float.fromhex(sigma) if isinstance(sigma, str) else float(sigma)
        A = _decode_floats(doc["A"]).reshape(n, d)
        return ProblemInstance(
            n=n, d=d, A=A,
            x_star=_decode_floats(doc["x_star"]),
            pi_star=Permutation(tuple(doc["pi_star"])),
            sigma=sigma,
            w=_decode_floats(doc["w"]),
            y=_decode_floats(doc["y"]),
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, TypeError) as e:
        raise InvalidArgumentError(f"malformed instance document: {e}") from e


def save_instance(instance: ProblemInstance, path: Path) -> None:
    path.write_text(json.dumps(instance_to_dict(instance), indent=2))


def load_instance(path: Path) -> ProblemInstance:
    with open(path, "r") as f:
        return instance_from_dict(json.load(f))
