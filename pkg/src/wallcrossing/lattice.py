# src/wallcrossing/lattice.py
"""
電荷格 Γ 與其整數反對稱配對 ⟨−,−⟩，以及 quadratic refinement σ: Γ → {±1}
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import InputError, NotSkew

logger = logging.getLogger(__name__)

Charge = Tuple[int, ...]


def as_charge(gamma: Iterable[int], rank: int) -> Charge:
    out = tuple(int(v) for v in gamma)
    if len(out) != rank:
        raise InputError(f"charge {out} has length {len(out)}, lattice rank is {rank}")
    return out


@dataclass(frozen=True)
class ChargeLattice:
    pairing: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = [list(r) for r in self.pairing]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InputError("pairing must be a non-empty square matrix")
        for r in rows:
            for v in r:
                if int(v) != v:
                    raise InputError(f"pairing entries must be integers, got {v!r}")
        for i in range(n):
            for j in range(n):
                if rows[i][j] != -rows[j][i]:
                    raise NotSkew(f"pairing is not skew-symmetric at ({i + 1},{j + 1})")
        object.__setattr__(self, "pairing", tuple(tuple(int(v) for v in r) for r in rows))

    @classmethod
    def of(cls, pairing: Sequence[Sequence[int]]) -> "ChargeLattice":
        return cls(tuple(tuple(r) for r in pairing))

    @classmethod
    def standard(cls, rank: int) -> "ChargeLattice":
        """⟨e_i, e_{i+1}⟩ = 1 for the first pair, zero otherwise (rank 2: the A2 quiver)."""
        M = [[0] * rank for _ in range(rank)]
        if rank >= 2:
            M[0][1], M[1][0] = 1, -1
        return cls.of(M)

    @property
    def rank(self) -> int:
        return len(self.pairing)

    def basis(self, i: int) -> Charge:
        return tuple(1 if k == i else 0 for k in range(self.rank))

    def pair(self, a: Sequence[int], b: Sequence[int]) -> int:
        a, b = as_charge(a, self.rank), as_charge(b, self.rank)
        return sum(a[i] * self.pairing[i][j] * b[j] for i in range(self.rank) for j in range(self.rank))


@dataclass(frozen=True)
class QuadraticRefinement:
    """σ(Σ a_i e_i) = Π σ(e_i)^{a_i} · (−1)^{Σ_{i<j} a_i a_j ⟨e_i, e_j⟩}."""

    lattice: ChargeLattice
    basis_values: Tuple[int, ...]

    def __post_init__(self) -> None:
        vals = tuple(int(v) for v in self.basis_values)
        if len(vals) != self.lattice.rank:
            raise InputError(f"σ needs {self.lattice.rank} basis values, got {len(vals)}")
        if any(v not in (1, -1) for v in vals):
            raise InputError(f"σ values must be ±1, got {vals}")
        object.__setattr__(self, "basis_values", vals)

    def __call__(self, gamma: Sequence[int]) -> int:
        a = as_charge(gamma, self.lattice.rank)
        M = self.lattice.pairing
        sign = 1
        for i, ai in enumerate(a):
            if ai % 2:
                sign *= self.basis_values[i]
        cross = sum(a[i] * a[j] * M[i][j] for i in range(len(a)) for j in range(i + 1, len(a)))
        return -sign if cross % 2 else sign

    def consistency_defect(self, samples: int = 100, seed: int = 0, bound: int = 5) -> int:
        """Number of random pairs violating σ(γ+γ′) = (−1)^{⟨γ,γ′⟩} σ(γ) σ(γ′)."""
        rng = np.random.default_rng(seed)
        bad = 0
        for _ in range(samples):
            g = tuple(int(v) for v in rng.integers(-bound, bound + 1, self.lattice.rank))
            h = tuple(int(v) for v in rng.integers(-bound, bound + 1, self.lattice.rank))
            lhs = self(tuple(x + y for x, y in zip(g, h)))
            rhs = (-1) ** (self.lattice.pair(g, h) % 2) * self(g) * self(h)
            if lhs != rhs:
                bad += 1
        if bad:
            logger.warning(f"[WALL] σ violates the refinement rule on {bad}/{samples} pairs")
        return bad


def make_refinement(lattice: ChargeLattice, values: Optional[Sequence[int]] = None) -> QuadraticRefinement:
    return QuadraticRefinement(lattice, tuple(values) if values is not None else (-1,) * lattice.rank)
