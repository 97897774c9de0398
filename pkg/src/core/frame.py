# src/core/frame.py
"""
Darboux 座標框架與 X = T_M 上的點
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
import sympy

from src.core.errors import InputError, NonInvertible, NotSkew

IntMatrix = Tuple[Tuple[int, ...], ...]
RationalMatrix = Tuple[Tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class DarbouxFrame:
    """Integral symplectic matrix ω on the n = 2d dimensional base and η = ω⁻¹ (exact)."""

    d: int
    omega: IntMatrix
    eta: RationalMatrix
    omega_array: np.ndarray = field(init=False, repr=False, compare=False)
    eta_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        om = np.array(self.omega, dtype=float)
        et = np.array([[float(v) for v in row] for row in self.eta], dtype=float)
        om.setflags(write=False)
        et.setflags(write=False)
        object.__setattr__(self, "omega_array", om)
        object.__setattr__(self, "eta_array", et)

    @property
    def n(self) -> int:
        return 2 * self.d

    def is_block(self) -> bool:
        """ω_pq = 0 unless |p − q| = d (coordinate block shape, any nonzero scale)."""
        for p in range(self.n):
            for q in range(self.n):
                if abs(p - q) != self.d and self.omega[p][q] != 0:
                    return False
        return all(self.omega[p][p + self.d] != 0 for p in range(self.d))

    def check_point(self, x: "XPoint") -> None:
        if len(x.z) != self.n or len(x.theta) != self.n:
            raise InputError(
                f"XPoint has lengths ({len(x.z)}, {len(x.theta)}), frame expects n = {self.n}"
            )

    def pairing(self, a: Sequence[complex], b: Sequence[complex]) -> complex:
        return complex(np.asarray(a) @ self.omega_array @ np.asarray(b))


def default_omega(d: int) -> IntMatrix:
    n = 2 * d
    rows = []
    for p in range(n):
        row = []
        for q in range(n):
            if q - p == d:
                row.append(1)
            elif p - q == d:
                row.append(-1)
            else:
                row.append(0)
        rows.append(tuple(row))
    return tuple(rows)


def make_frame(d: int, omega: Optional[Sequence[Sequence[int]]] = None) -> DarbouxFrame:
    if not isinstance(d, int) or d < 1:
        raise InputError(f"half-dimension d must be a positive integer, got {d!r}")
    n = 2 * d
    if omega is None:
        om = default_omega(d)
    else:
        rows = [list(r) for r in omega]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InputError(f"omega must be {n}x{n} for d = {d}")
        for r in rows:
            for v in r:
                if Fraction(v).denominator != 1:
                    raise InputError(f"omega entries must be integers, got {v!r}")
        om = tuple(tuple(int(v) for v in r) for r in rows)

    for p in range(n):
        for q in range(n):
            if om[p][q] != -om[q][p]:
                raise NotSkew(f"omega is not skew-symmetric at ({p + 1},{q + 1})")

    m = sympy.Matrix(om)
    if m.det() == 0:
        raise NonInvertible("omega has zero determinant")
    inv = m.inv()
    eta = tuple(tuple(_to_fraction(inv[p, q]) for q in range(n)) for p in range(n))
    return DarbouxFrame(d=d, omega=om, eta=eta)


def _to_fraction(value: object) -> Fraction:
    r = sympy.Rational(value)
    return Fraction(int(r.p), int(r.q))


def scaled_frame(frame: DarbouxFrame, factor: int) -> DarbouxFrame:
    return make_frame(frame.d, [[factor * v for v in row] for row in frame.omega])


@dataclass(frozen=True)
class XPoint:
    """Point (z, θ) of X = T_M in induced coordinates."""

    z: Tuple[complex, ...]
    theta: Tuple[complex, ...]

    @classmethod
    def of(cls, z: Sequence[complex], theta: Sequence[complex]) -> "XPoint":
        if len(z) != len(theta):
            raise InputError(f"z and theta lengths differ: {len(z)} != {len(theta)}")
        return cls(tuple(complex(v) for v in z), tuple(complex(v) for v in theta))

    @classmethod
    def from_vector(cls, v: Sequence[complex]) -> "XPoint":
        arr = np.asarray(v, dtype=complex)
        n = arr.size // 2
        return cls.of(arr[:n], arr[n:])

    @property
    def n(self) -> int:
        return len(self.z)

    def as_vector(self) -> np.ndarray:
        return np.array(self.z + self.theta, dtype=complex)

    def shifted(self, index: int, h: complex) -> "XPoint":
        v = self.as_vector()
        v[index] += h
        return XPoint.from_vector(v)

    def with_theta(self, theta: Sequence[complex]) -> "XPoint":
        return XPoint.of(self.z, theta)

    def with_z(self, z: Sequence[complex]) -> "XPoint":
        return XPoint.of(z, self.theta)
