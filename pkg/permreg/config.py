"""Configuration models for estimators, bounds and Monte Carlo experiments."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, field_validator, model_validator

from .errors import ConfigError

EstimatorName = Literal["sort1d", "brute", "oracle", "altmin"]

# Default cap for exhaustive search: 10! ~ 3.6M residuals
DEFAULT_BRUTE_MAX_N = 10
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITERS = 100

# Numerical rank tolerance, relative to the largest singular value
RANK_RTOL = 1e-10


class SearchConfig(BaseModel):
    brute_max_n: int = DEFAULT_BRUTE_MAX_N
    restarts: int = DEFAULT_RESTARTS
    max_iters: int = DEFAULT_MAX_ITERS


class BoundConstants(BaseModel):
    """Absolute constants the theorems leave unspecified."""

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0


class ExperimentConfig(BaseModel):
    n_grid: list[int] = [100]
    d: int = 1
    gamma_grid: list[float] = [2.0, 3.0, 4.0, 5.0, 6.0]
    trials: int = 200
    sigma: float = 1.0  # 0 = noiseless marker, snr reported as infinite
    estimator: EstimatorName = "sort1d"
    search: SearchConfig = SearchConfig()
    distortion_D: int | None = None
    side_info_hbar: int | None = None
    master_seed: int = 0
    output_path: Path | None = None
    workers: int = 1
    verbose: bool = False

    @field_validator("trials")
    @classmethod
    def _trials_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"trials must be >= 1, got {v}")
        return v

    @field_validator("gamma_grid")
    @classmethod
    def _gammas_nonnegative(cls, v: list[float]) -> list[float]:
        bad = [g for g in v if not g >= 0 or not math.isfinite(g)]
        if bad:
            raise ValueError(f"gamma values must be finite and >= 0, got {bad}")
        return v

    @field_validator("sigma")
    @classmethod
    def _sigma_nonnegative(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"sigma must be >= 0, got {v}")
        return v

    @field_validator("workers")
    @classmethod
    def _workers_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"workers must be >= 1, got {v}")
        return v

    @model_validator(mode="after")
    def _norms_finite(self) -> ExperimentConfig:
        for n in self.n_grid:
            if n < 2:
                raise ValueError(f"grid sizes must be >= 2, got {n}")
            for gamma in self.gamma_grid:
                if not math.isfinite(self.x_star_norm(n, gamma)):
                    raise ValueError(f"||x*|| overflows at n={n}, gamma={gamma}")
        return self

    @property
    def signal_scale(self) -> float:
        """Noise scale used to set ||x*||; the noiseless marker falls back to 1."""
        return self.sigma if self.sigma > 0 else 1.0

    def x_star_norm(self, n: int, gamma: float) -> float:
        """||x*|| such that log(1 + ||x*||^2/sigma^2) / log(n) == gamma."""
        try:
            return self.signal_scale * math.sqrt(math.expm1(gamma * math.log(n)))
        except OverflowError:
            return math.inf

    def snr(self, n: int, gamma: float) -> float:
        if self.sigma == 0:
            return math.inf
        return math.expm1(gamma * math.log(n))

    def check_estimator(self) -> None:
        """Reject estimator/dimension combinations before any trial runs."""
        if self.estimator == "sort1d" and self.d != 1:
            raise ConfigError(f"sort1d requires d=1, got d={self.d}")
        for n in self.n_grid:
            if self.d >= n:
                raise ConfigError(f"d must be < n, got d={self.d}, n={n}")
            if self.estimator == "brute" and n > self.search.brute_max_n:
                raise ConfigError(
                    f"brute requires n <= {self.search.brute_max_n}, got n={n}")
            if self.side_info_hbar is not None and not 2 <= self.side_info_hbar <= n:
                raise ConfigError(
                    f"side_info_hbar must be in [2, {n}], got {self.side_info_hbar}")

    def check_distortion(self) -> None:
        D = self.distortion_D
        if D is None:
            raise ConfigError("distortion experiment needs distortion_D")
        for n in self.n_grid:
            if not 2 < D <= n - 1:
                raise ConfigError(f"distortion_D must satisfy 2 < D <= n-1, got D={D}, n={n}")
