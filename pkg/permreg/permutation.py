"""Permutations: representation, Hamming metric, cycles, samplers, ball counting.

Action convention used everywhere in permreg: a permutation with map ``m``
sends a vector ``v`` to ``v'`` with ``v'[i] = v[m[i]]``. The matrix form has
``P[i, m[i]] = 1`` so that ``P @ v`` agrees with the array action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, SearchRefusedError, UnsupportedSizeError

# Largest n for which the exact Hamming ball is sampled by rejection
REJECTION_MAX_N = 8


@dataclass(frozen=True)
class Permutation:
    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(len(m))):
            raise InvalidArgumentError(f"not a bijection on 0..{len(m) - 1}: {m}")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    @classmethod
    def from_array(cls, arr) -> Permutation:
        return cls(tuple(int(v) for v in np.asarray(arr).ravel()))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> Permutation:
        m = list(range(n))
        m[i], m[j] = m[j], m[i]
        return cls(tuple(m))

    @property
    def size(self) -> int:
        return len(self.map)

    def __len__(self) -> int:
        return len(self.map)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.map, dtype=np.intp)
        arr.setflags(write=False)
        return arr

    def apply(self, v):
        """Permute the leading axis: rows of a matrix, entries of a vector."""
        v = np.asarray(v)
        if v.shape[0] != self.size:
            raise InvalidArgumentError(f"length {v.shape[0]} does not match permutation size {self.size}")
        return v[self.array]

    def inverse(self) -> Permutation:
        inv = np.empty(self.size, dtype=np.intp)
        inv[self.array] = np.arange(self.size)
        return Permutation.from_array(inv)

    def matrix(self) -> np.ndarray:
        P = np.zeros((self.size, self.size))
        P[np.arange(self.size), self.array] = 1.0
        return P

    def fixed_points(self) -> list[int]:
        return [i for i, v in enumerate(self.map) if i == v]

    def is_derangement(self) -> bool:
        return not self.fixed_points()

    def to_list(self) -> list[int]:
        return list(self.map)


@dataclass(frozen=True)
class CyclePartition:
    """Cycles of a permutation and, once filled, three independent vertex sets."""

    cycles: tuple[tuple[int, ...], ...]
    fixed_points: tuple[int, ...] = ()
    parts: tuple[tuple[int, ...], ...] | None = field(default=None)

    @property
    def cycle_lengths(self) -> list[int]:
        return sorted(len(c) for c in self.cycles)

    @property
    def part_sizes(self) -> tuple[int, ...]:
        if self.parts is None:
            return ()
        return tuple(len(p) for p in self.parts)


def _check_same_size(p: Permutation, q: Permutation) -> None:
    if p.size != q.size:
        raise InvalidArgumentError(f"size mismatch: {p.size} vs {q.size}")


def hamming_distance(p: Permutation, q: Permutation) -> int:
    """Number of positions where the two maps disagree."""
    _check_same_size(p, q)
    return int(np.count_nonzero(p.array != q.array))


def cycle_decomposition(p: Permutation) -> CyclePartition:
    """Split ``p`` into its non-trivial cycles and its fixed points."""
    seen = [False] * p.size
    cycles = []
    fixed = []
    for start in range(p.size):
        if seen[start]:
            continue
        if p.map[start] == start:
            seen[start] = True
            fixed.append(start)
            continue
        cycle = []
        v = start
        while not seen[v]:
            seen[v] = True
            cycle.append(v)
            v = p.map[v]
        cycles.append(tuple(cycle))
    return CyclePartition(cycles=tuple(cycles), fixed_points=tuple(fixed))


def _cycle_buckets(cycle: tuple[int, ...]) -> list[list[int]]:
    """Round-robin a cycle over three buckets with no two neighbours together."""
    buckets: list[list[int]] = [[], [], []]
    L = len(cycle)
    for t, v in enumerate(cycle):
        b = t % 3
        # last vertex would share bucket 0 with the first one
        if t == L - 1 and L % 3 == 1:
            b = 1
        buckets[b].append(v)
    return buckets


def independent_partition(p: Permutation) -> CyclePartition:
    """Partition a derangement's vertices into three independent sets of G_p.

    Each cycle is walked in order and its vertices are assigned round-robin;
    a cycle's largest bucket is then merged into the globally smallest part,
    which keeps the part sizes within one of each other, so every part has at
    least floor(k/3) vertices.
    """
    k = p.size
    if k < 3:
        raise UnsupportedSizeError(f"independent partition needs k >= 3 moved points, got {k}")
    if not p.is_derangement():
        raise InvalidArgumentError(
            f"expected a derangement, found fixed points {p.fixed_points()[:5]}")

    decomposition = cycle_decomposition(p)
    parts: list[list[int]] = [[], [], []]
    for cycle in decomposition.cycles:
        buckets = sorted(_cycle_buckets(cycle), key=len, reverse=True)
        order = sorted(range(3), key=lambda j: len(parts[j]))
        for bucket, j in zip(buckets, order):
            parts[j].extend(bucket)

    return CyclePartition(
        cycles=decomposition.cycles,
        fixed_points=decomposition.fixed_points,
        parts=tuple(tuple(sorted(part)) for part in parts),
    )


def is_independent_set(p: Permutation, vertices) -> bool:
    """True if no edge {i, p(i)} of the incidence graph has both ends in ``vertices``."""
    members = set(vertices)
    return all(p.map[i] not in members for i in members)


def sample_uniform(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform permutation of size ``n`` (Fisher-Yates via the numpy generator)."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return Permutation.from_array(rng.permutation(n))


def sample_derangement(k: int, rng: np.random.Generator) -> Permutation:
    """Uniform derangement of size ``k`` by rejection (acceptance ~ 1/e)."""
    if k < 2:
        raise InvalidArgumentError(f"derangements need k >= 2, got {k}")
    while True:
        arr = rng.permutation(k)
        if np.all(arr != np.arange(k)):
            return Permutation.from_array(arr)


def sample_hamming_ball_generative(n: int, hbar: int, rng: np.random.Generator) -> Permutation:
    """Pick ``hbar`` positions uniformly, then permute them uniformly.

    Every output lies within Hamming distance ``hbar`` of the identity. The
    process is not uniform over the ball: see ``fixed_point_probability``.
    """
    if not 2 <= hbar <= n:
        raise InvalidArgumentError(f"hbar must be in [2, {n}], got {hbar}")
    chosen = rng.choice(n, size=hbar, replace=False)
    m = np.arange(n)
    m[chosen] = chosen[rng.permutation(hbar)]
    return Permutation.from_array(m)


def sample_hamming_ball_uniform(n: int, hbar: int, rng: np.random.Generator) -> Permutation:
    """Uniform draw from the exact Hamming ball by rejection; small n only."""
    if n > REJECTION_MAX_N:
        raise SearchRefusedError(f"rejection sampling limited to n <= {REJECTION_MAX_N}, got {n}")
    if not 0 <= hbar <= n:
        raise InvalidArgumentError(f"hbar must be in [0, {n}], got {hbar}")
    ident = np.arange(n)
    while True:
        arr = rng.permutation(n)
        if np.count_nonzero(arr != ident) <= hbar:
            return Permutation.from_array(arr)


def fixed_point_probability(n: int, hbar: int) -> float:
    """P(pi(i) = i) under the generative process: (n - hbar)/n + 1/n."""
    return (n - hbar) / n + 1 / n


def printed_fixed_point_probability(n: int, hbar: int) -> float:
    """(n - hbar)/n + hbar/n^2: undercounts the chosen positions that land on themselves."""
    return (n - hbar) / n + hbar / n**2


def derangement_numbers(k_max: int) -> list[int]:
    """D_0..D_k_max via D_k = (k-1)(D_{k-1} + D_{k-2})."""
    D = [1, 0]
    for k in range(2, k_max + 1):
        D.append((k - 1) * (D[k - 1] + D[k - 2]))
    return D[: k_max + 1]


@dataclass(frozen=True)
class BallCardinality:
    exact: int
    printed: int  # C(n, hbar) * hbar!, an over-count of ordered choices


def hamming_ball_cardinality(n: int, hbar: int) -> BallCardinality:
    if not 0 <= hbar <= n:
        raise InvalidArgumentError(f"hbar must be in [0, {n}], got {hbar}")
    D = derangement_numbers(hbar)
    exact = sum(math.comb(n, k) * D[k] for k in range(hbar + 1))
    return BallCardinality(exact=exact, printed=math.comb(n, hbar) * math.factorial(hbar))
