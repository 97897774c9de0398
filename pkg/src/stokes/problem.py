# src/stokes/problem.py
"""
線性 Stokes 問題 y′ = (U/ε² + V/ε)·y - 特徵基底、Stokes rays、形式級數解

Everything downstream works in the U-eigenbasis, where U = diag(u) and V is replaced by
Ṽ = P⁻¹VP. Ṽ must have zero diagonal (no formal monodromy factor).
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from src.config.config_loader import tolerance
from src.core.errors import DegenerateEigenvalues, InputError, NonZeroDiagonal, StokesAngle

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def _as_square(name: str, M: Sequence[Sequence[complex]]) -> np.ndarray:
    arr = np.array(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class StokesProblem:
    U: np.ndarray
    V: np.ndarray
    u: np.ndarray = field(init=False, repr=False)
    P: np.ndarray = field(init=False, repr=False)
    P_inv: np.ndarray = field(init=False, repr=False)
    V_eig: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        U = _as_square("U", self.U)
        V = _as_square("V", self.V)
        if U.shape != V.shape:
            raise InputError(f"U and V shapes differ: {U.shape} != {V.shape}")
        n = U.shape[0]
        if np.count_nonzero(U - np.diag(np.diag(U))) == 0:
            u, P = np.diag(U).copy(), np.eye(n, dtype=complex)
        else:
            u, P = np.linalg.eig(U)
        scale = max(1.0, float(np.max(np.abs(u))))
        for i in range(n):
            for j in range(i + 1, n):
                if abs(u[i] - u[j]) <= tolerance("root_separation") * scale:
                    raise DegenerateEigenvalues(f"eigenvalues u_{i + 1} and u_{j + 1} coincide ({u[i]})")
        P_inv = np.linalg.inv(P)
        V_eig = P_inv @ V @ P
        vscale = max(1.0, float(np.max(np.abs(V_eig))))
        diag = np.max(np.abs(np.diag(V_eig)))
        if diag > tolerance("exact_identity") * vscale:
            raise NonZeroDiagonal(f"V has diagonal entries up to {diag:.3e} in the U-eigenbasis")
        np.fill_diagonal(V_eig, 0.0)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "P_inv", P_inv)
        object.__setattr__(self, "V_eig", V_eig)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    def to_eigenbasis(self, M: np.ndarray) -> np.ndarray:
        return self.P_inv @ M @ self.P

    def from_eigenbasis(self, M: np.ndarray) -> np.ndarray:
        return self.P @ M @ self.P_inv


@dataclass(frozen=True)
class StokesRay:
    """ℝ₊·(u_i − u_j) for every generating pair (0-based)."""

    angle: float
    pairs: Tuple[Tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {"angle": self.angle, "pairs": [list(p) for p in self.pairs]}


def _wrap(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    return a + TWO_PI if a < 0 else a


def angle_distance(a: float, b: float) -> float:
    d = abs(_wrap(a) - _wrap(b))
    return min(d, TWO_PI - d)


def stokes_rays(P: StokesProblem) -> List[StokesRay]:
    guard = tolerance("stokes_angle_guard")
    found: List[Tuple[float, List[Tuple[int, int]]]] = []
    for i in range(P.n):
        for j in range(P.n):
            if i == j:
                continue
            angle = _wrap(cmath.phase(P.u[i] - P.u[j]))
            for entry in found:
                if angle_distance(entry[0], angle) <= guard:
                    entry[1].append((i, j))
                    break
            else:
                found.append((angle, [(i, j)]))
    rays = [StokesRay(a, tuple(sorted(pairs))) for a, pairs in sorted(found, key=lambda e: e[0])]
    logger.debug(f"[STOKES] {len(rays)} Stokes rays at {[round(r.angle, 6) for r in rays]}")
    return rays


def check_admissible(P: StokesProblem, phi: float) -> None:
    guard = tolerance("stokes_angle_guard")
    for ray in stokes_rays(P):
        if angle_distance(ray.angle, phi) <= guard:
            raise StokesAngle(f"angle {phi} lies on the Stokes ray {ray.angle} (pairs {ray.pairs})")


def neighbour_gaps(rays: Sequence[StokesRay], k: int) -> Tuple[float, float]:
    """Angular distance from ray k to the previous and the next ray, going round the circle."""
    m = len(rays)
    if m == 1:
        return TWO_PI, TWO_PI
    prev_gap = _wrap(rays[k].angle - rays[(k - 1) % m].angle)
    next_gap = _wrap(rays[(k + 1) % m].angle - rays[k].angle)
    return prev_gap, next_gap


def base_angle(rays: Sequence[StokesRay]) -> float:
    """Midpoint of the gap that contains angle 0, so the sorted rays run counterclockwise from it."""
    if not rays:
        return 0.0
    last = rays[-1].angle - TWO_PI
    return _wrap((last + rays[0].angle) / 2.0)


def formal_series(P: StokesProblem, order: int, *, dps: Optional[int] = None) -> List[np.ndarray]:
    """Coefficients F_0 = Id, F_1, … of F(ε) = Φ(ε)·exp(U/ε) in the eigenbasis.

    With dps set the coefficients are computed as mpmath matrices at that precision.
    """
    if order < 0:
        raise InputError(f"series order must be non-negative, got {order}")
    n = P.n
    if dps is not None:
        with mpmath.workdps(dps):
            u = [mpmath.mpc(v) for v in P.u]
            Vt = mpmath.matrix([[mpmath.mpc(P.V_eig[i, j]) for j in range(n)] for i in range(n)])
            terms = [mpmath.eye(n)]
            for m in range(order):
                prev = terms[-1]
                rhs = m * prev - Vt * prev
                nxt = mpmath.matrix(n, n)
                for i in range(n):
                    for j in range(n):
                        if i != j:
                            nxt[i, j] = rhs[i, j] / (u[i] - u[j])
                for i in range(n):
                    nxt[i, i] = sum(Vt[i, l] * nxt[l, i] for l in range(n) if l != i) / (m + 1)
                terms.append(nxt)
            return terms

    diff = P.u[:, None] - P.u[None, :]
    np.fill_diagonal(diff, 1.0)
    Vt = P.V_eig
    terms = [np.eye(n, dtype=complex)]
    for m in range(order):
        prev = terms[-1]
        nxt = (m * prev - Vt @ prev) / diff
        np.fill_diagonal(nxt, 0.0)
        nxt[np.diag_indices(n)] = np.einsum("il,li->i", Vt, nxt) / (m + 1)
        terms.append(nxt)
    return terms
