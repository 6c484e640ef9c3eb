"""Exact linear algebra over GF(2): vectors, subspaces, duals, enumeration.

Vectors are fixed-length bit strings. Coordinate 0 is the leftmost character
in every textual encoding, and is stored as the most significant bit of the
backing integer so that lexicographic order on strings equals numeric order
on packed values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "F2Vec",
    "F2Subspace",
    "rref",
    "sample_subspace",
    "dual",
    "enumerate_subspace",
    "rand_bits",
]


def rand_bits(rng: np.random.Generator, n: int) -> int:
    """Uniform n-bit integer from a numpy Generator (n up to 128)."""
    out = 0
    remaining = n
    while remaining > 0:
        take = min(remaining, 32)
        out = (out << take) | int(rng.integers(0, 1 << take))
        remaining -= take
    return out


@dataclass(frozen=True, order=True)
class F2Vec:
    """A vector in GF(2)^n; immutable, hashable, ordered lexicographically."""

    n: int
    val: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative length")
        if not 0 <= self.val < (1 << self.n):
            raise ValueError(f"value {self.val} out of range for {self.n} bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "F2Vec":
        bits = list(bits)
        val = 0
        for b in bits:
            val = (val << 1) | (b & 1)
        return cls(len(bits), val)

    @classmethod
    def from_str(cls, s: str) -> "F2Vec":
        if s and set(s) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {s!r}")
        return cls(len(s), int(s, 2) if s else 0)

    @classmethod
    def zero(cls, n: int) -> "F2Vec":
        return cls(n, 0)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "F2Vec":
        return cls(n, rand_bits(rng, n))

    def __str__(self) -> str:
        return format(self.val, f"0{self.n}b") if self.n else ""

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.val >> (self.n - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        return (self[i] for i in range(self.n))

    def __xor__(self, other: "F2Vec") -> "F2Vec":
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return F2Vec(self.n, self.val ^ other.val)

    def dot(self, other: "F2Vec") -> int:
        """Inner product mod 2."""
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return (self.val & other.val).bit_count() & 1

    def concat(self, other: "F2Vec") -> "F2Vec":
        return F2Vec(self.n + other.n, (self.val << other.n) | other.val)

    def is_zero(self) -> bool:
        return self.val == 0


@dataclass(frozen=True)
class F2Subspace:
    """A subspace of GF(2)^n held as a canonical reduced row-echelon basis.

    Pivot columns strictly increase down the basis and each pivot column
    contains a single 1, so equal spans always produce identical bases.
    """

    ambient_dim: int
    basis: tuple[F2Vec, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __post_init__(self):
        last_pivot = -1
        for row in self.basis:
            if row.n != self.ambient_dim:
                raise ValueError("basis row length differs from ambient dimension")
            if row.is_zero():
                raise ValueError("zero row in basis")
            pivot = self.ambient_dim - row.val.bit_length()
            if pivot <= last_pivot:
                raise ValueError("basis rows not in echelon order")
            for other in self.basis:
                if other is not row and other[pivot]:
                    raise ValueError("basis not fully reduced")
            last_pivot = pivot

    def contains(self, v: F2Vec) -> bool:
        """Membership test by reduction against the RREF basis."""
        if v.n != self.ambient_dim:
            raise ValueError(f"length mismatch: {v.n} vs ambient {self.ambient_dim}")
        r = v.val
        for row in self.basis:
            pivot_mask = 1 << (row.val.bit_length() - 1)
            if r & pivot_mask:
                r ^= row.val
        return r == 0

    def enumerate(self) -> list[F2Vec]:
        """All 2^dim elements, ordered by lexicographic coefficient vector.

        The first element is always the zero vector.
        """
        return enumerate_subspace(self)

    def to_json(self) -> list[str]:
        return [str(row) for row in self.basis]

    @classmethod
    def from_json(cls, ambient_dim: int, rows: Sequence[str]) -> "F2Subspace":
        vecs = [F2Vec.from_str(r) for r in rows]
        for v in vecs:
            if v.n != ambient_dim:
                raise ValueError("serialized row length differs from ambient dimension")
        return rref(vecs, ambient_dim=ambient_dim)


def rref(rows: Sequence[F2Vec], ambient_dim: int | None = None) -> F2Subspace:
    """Span of the given rows with a canonical RREF basis.

    Equal spans yield identical bases. `ambient_dim` is required when
    `rows` is empty.
    """
    if ambient_dim is None:
        if not rows:
            raise ValueError("ambient_dim required for empty row set")
        ambient_dim = rows[0].n
    vals = []
    for row in rows:
        if row.n != ambient_dim:
            raise ValueError(f"mismatched row lengths: {row.n} vs {ambient_dim}")
        vals.append(row.val)

    basis: list[int] = []  # kept sorted by descending pivot position
    for v in vals:
        for b in basis:
            if v & (1 << (b.bit_length() - 1)):
                v ^= b
        if v:
            basis.append(v)
            basis.sort(key=lambda x: -x)
    # back-substitute to clear entries above each pivot
    for i in range(len(basis) - 1, -1, -1):
        pivot_mask = 1 << (basis[i].bit_length() - 1)
        for j in range(i):
            if basis[j] & pivot_mask:
                basis[j] ^= basis[i]
    return F2Subspace(ambient_dim, tuple(F2Vec(ambient_dim, v) for v in basis))


def sample_subspace(n: int, d: int, rng: np.random.Generator) -> F2Subspace:
    """Uniformly random d-dimensional subspace of GF(2)^n.

    Rejection-samples random d x n matrices until full rank; every subspace
    has the same number of ordered full-rank bases, so the span is exactly
    uniform. Deterministic given the generator state.
    """
    if d > n:
        raise ValueError(f"target dimension {d} exceeds ambient dimension {n}")
    if d == 0:
        return F2Subspace(n, ())
    while True:
        rows = [F2Vec.random(n, rng) for _ in range(d)]
        sub = rref(rows, ambient_dim=n)
        if sub.dim == d:
            return sub


def dual(space: F2Subspace) -> F2Subspace:
    """The dual (orthogonal complement) A-perp = {v : v.a = 0 for all a in A}."""
    n = space.ambient_dim
    pivots = [n - row.val.bit_length() for row in space.basis]
    pivot_set = set(pivots)
    free_cols = [c for c in range(n) if c not in pivot_set]
    # for each free column f, the kernel vector has a 1 at f and at every
    # pivot column whose basis row has a 1 at f
    out = []
    for f in free_cols:
        val = 1 << (n - 1 - f)
        for p, row in zip(pivots, space.basis):
            if row[f]:
                val |= 1 << (n - 1 - p)
        out.append(F2Vec(n, val))
    return rref(out, ambient_dim=n)


def enumerate_subspace(space: F2Subspace) -> list[F2Vec]:
    """Materialize all 2^dim elements; refuses above dim 20."""
    if space.dim > 20:
        raise ValueError(f"dimension {space.dim} too large to enumerate")
    d = space.dim
    n = space.ambient_dim
    out = []
    for k in range(1 << d):
        v = 0
        for i in range(d):
            if (k >> (d - 1 - i)) & 1:
                v ^= space.basis[i].val
        out.append(F2Vec(n, v))
    return out
