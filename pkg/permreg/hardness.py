"""Reduction from PARTITION to solvability of y_P = A x, checked by enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import InvalidArgumentError, SearchRefusedError
from .permutation import Permutation

FEASIBILITY_TOL = 1e-9
DEFAULT_MAX_D = 3
SUBSET_MAX_D = 20


@dataclass(frozen=True)
class PartitionInstance:
    b: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(v) for v in self.b)
        if not b:
            raise InvalidArgumentError("PARTITION instance needs at least one integer")
        if min(b) < 1:
            raise InvalidArgumentError(f"PARTITION entries must be positive integers, got {b}")
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class ReductionOutput:
    y: np.ndarray  # length 2d + 1
    A: np.ndarray  # (2d + 1) x 2d

    @property
    def d(self) -> int:
        return self.A.shape[1] // 2

    def to_dict(self) -> dict:
        return {"y": self.y.tolist(), "A": self.A.tolist()}


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: tuple[Permutation, np.ndarray] | None
    criteria_agree: bool  # echelon-form and least-squares tests agreed on every candidate
    candidates: int

    def to_dict(self) -> dict:
        doc = {"feasible": self.feasible, "criteria_agree": self.criteria_agree,
               "candidates": self.candidates, "witness": None}
        if self.witness is not None:
            pi, x = self.witness
            doc["witness"] = {"pi": pi.to_list(), "x": [float(v) for v in x]}
        return doc


@dataclass(frozen=True)
class PartitionResult:
    exists: bool
    subset: tuple[int, ...] | None  # 0-based indices into b


def reduce_partition(inst: PartitionInstance) -> ReductionOutput:
    """y = (b, 0, ..., 0); A = [I_2d ; (1_d, -1_d)]."""
    d = inst.d
    y = np.zeros(2 * d + 1, dtype=np.int64)
    y[:d] = inst.b
    A = np.zeros((2 * d + 1, 2 * d), dtype=np.int64)
    A[: 2 * d] = np.eye(2 * d, dtype=np.int64)
    A[2 * d, :d] = 1
    A[2 * d, d:] = -1
    return ReductionOutput(y=y, A=A)


def echelon_criterion(v: np.ndarray, d: int) -> bool:
    """Solvability of v = A x from the row echelon form: first d minus next d equals the last."""
    return int(v[:d].sum()) - int(v[d: 2 * d].sum()) == int(v[2 * d])


def feasibility_check(out: ReductionOutput, max_d: int = DEFAULT_MAX_D) -> FeasibilityResult:
    """Decide whether some permutation P and vector x solve y_P = A x.

    Every map is tried: the permuted vectors are fit against A by least
    squares in one batch and accepted when the max residual is below
    FEASIBILITY_TOL. The echelon-form criterion is evaluated alongside.
    """
    d = out.d
    if d > max_d:
        raise SearchRefusedError(f"feasibility enumeration limited to d <= {max_d}, got d={d}")
    n = 2 * d + 1
    A = out.A.astype(float)
    maps = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    V = out.y[maps].astype(float)  # row k is y permuted by maps[k]

    Q, R = spla.qr(A, mode="economic")
    X = spla.solve_triangular(R, Q.T @ V.T).T
    residual = np.max(np.abs(X @ A.T - V), axis=1)
    ls_ok = residual < FEASIBILITY_TOL

    echelon_ok = np.array([echelon_criterion(v, d) for v in out.y[maps]])
    hits = np.flatnonzero(ls_ok)
    witness = None
    if hits.size:
        k = int(hits[0])
        witness = (Permutation.from_array(maps[k]), X[k])
    return FeasibilityResult(
        feasible=bool(hits.size),
        witness=witness,
        criteria_agree=bool(np.array_equal(ls_ok, echelon_ok)),
        candidates=len(maps),
    )


def partition_brute_force(inst: PartitionInstance) -> PartitionResult:
    """Exhaustive subset search; the witness is the side holding the last element."""
    d = inst.d
    if d > SUBSET_MAX_D:
        raise SearchRefusedError(f"subset enumeration limited to d <= {SUBSET_MAX_D}, got d={d}")
    total = sum(inst.b)
    if total % 2:
        return PartitionResult(exists=False, subset=None)
    for mask in range(1 << d):
        chosen = [i for i in range(d) if mask >> i & 1]
        if 2 * sum(inst.b[i] for i in chosen) == total:
            if d - 1 not in chosen:
                chosen = [i for i in range(d) if i not in chosen]
            return PartitionResult(exists=True, subset=tuple(chosen))
    return PartitionResult(exists=False, subset=None)
