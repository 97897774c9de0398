# src/core/jet.py
"""
截斷多變數 Taylor 算術 (higher-order forward mode)

A TaylorJet holds the normalised Taylor coefficients c[α] = ∂^α f / α! of a function of
`nvars` variables for every multi-index with |α| ≤ order. Arithmetic on jets propagates them
exactly through the expression tree; products use a precomputed index table per space.
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from src.core.frame import XPoint

MultiIndex = Tuple[int, ...]
Scalar = Union[int, float, complex]


class JetSpace:
    """Monomial ordering and multiplication table for (nvars, order)."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        monomials: List[MultiIndex] = []
        for deg in range(order + 1):
            for combo in combinations_with_replacement(range(nvars), deg):
                alpha = [0] * nvars
                for v in combo:
                    alpha[v] += 1
                monomials.append(tuple(alpha))
        self.monomials = monomials
        self.index: Dict[MultiIndex, int] = {m: k for k, m in enumerate(monomials)}
        self.size = len(monomials)
        self.degree = np.array([sum(m) for m in monomials])
        self.factorial = np.array(
            [math.prod(math.factorial(a) for a in m) for m in monomials], dtype=float
        )

        left, right, out = [], [], []
        for i, a in enumerate(monomials):
            room = order - self.degree[i]
            for j, b in enumerate(monomials):
                if self.degree[j] > room:
                    break
                left.append(i)
                right.append(j)
                out.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._left = np.array(left, dtype=np.intp)
        self._right = np.array(right, dtype=np.intp)
        self._out = np.array(out, dtype=np.intp)

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[self._left] * b[self._right]
        re = np.bincount(self._out, weights=prod.real, minlength=self.size)
        im = np.bincount(self._out, weights=prod.imag, minlength=self.size)
        return re + 1j * im

    def multi_index(self, variables: Sequence[int]) -> MultiIndex:
        alpha = [0] * self.nvars
        for v in variables:
            alpha[v] += 1
        return tuple(alpha)


@lru_cache(maxsize=32)
def jet_space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


class TaylorJet:
    __slots__ = ("space", "coef")

    def __init__(self, space: JetSpace, coef: np.ndarray):
        self.space = space
        self.coef = coef

    @classmethod
    def constant(cls, space: JetSpace, value: Scalar) -> "TaylorJet":
        c = np.zeros(space.size, dtype=complex)
        c[0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space: JetSpace, k: int, value: Scalar) -> "TaylorJet":
        c = np.zeros(space.size, dtype=complex)
        c[0] = value
        if space.order >= 1:
            c[space.index[space.multi_index([k])]] = 1.0
        return cls(space, c)

    @property
    def value(self) -> complex:
        return complex(self.coef[0])

    def _lift(self, other: Union["TaylorJet", Scalar]) -> "TaylorJet":
        if isinstance(other, TaylorJet):
            return other
        return TaylorJet.constant(self.space, other)

    # -- ring operations --
    def __add__(self, other):
        return TaylorJet(self.space, self.coef + self._lift(other).coef)

    __radd__ = __add__

    def __sub__(self, other):
        return TaylorJet(self.space, self.coef - self._lift(other).coef)

    def __rsub__(self, other):
        return TaylorJet(self.space, self._lift(other).coef - self.coef)

    def __neg__(self):
        return TaylorJet(self.space, -self.coef)

    def __mul__(self, other):
        if not isinstance(other, TaylorJet):
            return TaylorJet(self.space, self.coef * complex(other))
        return TaylorJet(self.space, self.space.multiply(self.coef, other.coef))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TaylorJet):
            return TaylorJet(self.space, self.coef / complex(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * complex(other)

    def __pow__(self, k):
        if isinstance(k, int):
            if k < 0:
                return self.reciprocal() ** (-k)
            result = TaylorJet.constant(self.space, 1.0)
            base = self
            while k:
                if k & 1:
                    result = result * base
                k >>= 1
                if k:
                    base = base * base
            return result
        return self.power(k)

    # -- analytic functions via the Taylor series of f at the constant term --
    def _compose(self, derivs: Sequence[complex]) -> "TaylorJet":
        """Σ_k derivs[k]·u^k with u = self − value (nilpotent); derivs[k] = f^(k)(a0)/k!."""
        u = TaylorJet(self.space, self.coef.copy())
        u.coef[0] = 0.0
        result = TaylorJet.constant(self.space, derivs[-1])
        for c in reversed(derivs[:-1]):
            result = result * u + c
        return result

    def reciprocal(self) -> "TaylorJet":
        a0 = self.value
        return self._compose([(-1) ** k / a0 ** (k + 1) for k in range(self.space.order + 1)])

    def exp(self) -> "TaylorJet":
        e = cmath.exp(self.value)
        return self._compose([e / math.factorial(k) for k in range(self.space.order + 1)])

    def log(self) -> "TaylorJet":
        a0 = self.value
        derivs = [cmath.log(a0)]
        derivs += [(-1) ** (k + 1) / (k * a0 ** k) for k in range(1, self.space.order + 1)]
        return self._compose(derivs)

    def power(self, p) -> "TaylorJet":
        """a^p for a jet exponent or a non-integer constant exponent."""
        if isinstance(p, TaylorJet):
            return (p * self.log()).exp()
        a0 = self.value
        p = complex(p)
        derivs = []
        binom = 1.0 + 0j
        for k in range(self.space.order + 1):
            derivs.append(binom * cmath.exp((p - k) * cmath.log(a0)))
            binom = binom * (p - k) / (k + 1)
        return self._compose(derivs)

    def __rpow__(self, base):
        return (self * cmath.log(complex(base))).exp()


def jet_exp(a):
    return a.exp() if isinstance(a, TaylorJet) else cmath.exp(a)


def jet_log(a):
    return a.log() if isinstance(a, TaylorJet) else cmath.log(a)


def jet_power(a, b):
    if isinstance(a, TaylorJet):
        return a.power(b)
    if isinstance(b, TaylorJet):
        return b.__rpow__(a)
    return cmath.exp(b * cmath.log(a))


@dataclass(frozen=True)
class Jet:
    """All mixed partials of W up to `order` at `point`; keys are multi-indices over 2n variables."""

    point: XPoint
    order: int
    space: JetSpace
    coef: np.ndarray

    @property
    def n(self) -> int:
        return self.point.n

    @property
    def value(self) -> complex:
        return complex(self.coef[0])

    def partial(self, *variables: int) -> complex:
        """∂^k W / ∂x_{v1}…∂x_{vk}; variable index v in 0..2n−1 (z block first, then θ)."""
        if len(variables) > self.order:
            raise ValueError(f"order {len(variables)} exceeds jet order {self.order}")
        k = self.space.index[self.space.multi_index(variables)]
        return complex(self.coef[k] * self.space.factorial[k])

    @property
    def partials(self) -> Dict[MultiIndex, complex]:
        return {
            m: complex(self.coef[k] * self.space.factorial[k])
            for k, m in enumerate(self.space.monomials)
        }

    def theta_hessian(self) -> np.ndarray:
        n = self.n
        h = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(i, n):
                h[i, j] = h[j, i] = self.partial(n + i, n + j)
        return h

    def theta_z_mixed(self) -> np.ndarray:
        """M[i, j] = ∂²W/∂θ_i∂z_j."""
        n = self.n
        return np.array([[self.partial(n + i, j) for j in range(n)] for i in range(n)])

    def theta_third(self) -> np.ndarray:
        n = self.n
        out = np.empty((n, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    out[i, j, k] = self.partial(n + i, n + j, n + k)
        return out

    def theta_theta_z(self) -> np.ndarray:
        """T[i, j, k] = ∂³W/∂θ_i∂θ_j∂z_k."""
        n = self.n
        out = np.empty((n, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    out[i, j, k] = self.partial(n + i, n + j, k)
        return out
