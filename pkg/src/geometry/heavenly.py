# src/geometry/heavenly.py
"""
Heavenly 方程殘差、ν-pencil 水平提升、平坦性 (Lie bracket) 與 W 的三種對稱檢查

Direction indices are 0-based; vectors are in the basis (∂z_1..∂z_n, ∂θ_1..∂θ_n).
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import InputError
from src.core.frame import DarbouxFrame, XPoint
from src.core.plebanski import PlebanskiFunction, eval_jet

logger = logging.getLogger(__name__)

HOMOGENEITY_SAMPLES: Tuple[complex, ...] = (2.0, 1.0 + 1.0j, 1.0 / 3.0)


@dataclass(frozen=True)
class PencilLift:
    """h_ε(∂z_i) for every base direction; columns[i] is a 2n-vector."""

    epsilon_inv: complex
    columns: Tuple[np.ndarray, ...]

    def matrix(self) -> np.ndarray:
        return np.column_stack(self.columns)


def _check(W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint) -> None:
    frame.check_point(x)
    if W.n != frame.n:
        raise InputError(f"W is defined for n = {W.n}, frame has n = {frame.n}")


def heavenly_residual(W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint) -> np.ndarray:
    """R_ij = W_θiz_j − W_θjz_i − Σ η_pq W_θiθp W_θjθq, filled from the upper triangle."""
    _check(W, frame, x)
    jet = eval_jet(W, x, 2)
    H = jet.theta_hessian()
    M = jet.theta_z_mixed()
    Q = H @ frame.eta_array @ H
    n = frame.n
    R = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            R[i, j] = M[i, j] - M[j, i] - Q[i, j]
            R[j, i] = -R[i, j]
    return R


def _lift_block(frame: DarbouxFrame, H: np.ndarray) -> np.ndarray:
    """A[q, i] = Σ_p η_pq H_ip, the θ-block of h(∂z_i)."""
    return frame.eta_array.T @ H


def lift_horizontal(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    x: XPoint,
    epsilon_inv: complex,
    i: int,
) -> np.ndarray:
    _check(W, frame, x)
    n = frame.n
    if not 0 <= i < n:
        raise InputError(f"direction index {i} outside 0..{n - 1}")
    H = eval_jet(W, x, 2).theta_hessian()
    col = np.zeros(2 * n, dtype=complex)
    col[i] = 1.0
    col[n:] = _lift_block(frame, H)[:, i]
    col[n + i] += epsilon_inv
    return col


def pencil_lift(
    W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint, epsilon_inv: complex
) -> PencilLift:
    _check(W, frame, x)
    n = frame.n
    A = _lift_block(frame, eval_jet(W, x, 2).theta_hessian())
    cols = []
    for i in range(n):
        col = np.zeros(2 * n, dtype=complex)
        col[i] = 1.0
        col[n:] = A[:, i]
        col[n + i] += epsilon_inv
        cols.append(col)
    return PencilLift(epsilon_inv=complex(epsilon_inv), columns=tuple(cols))


def flatness_defect(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    x: XPoint,
    epsilon_inv: complex,
    i: int,
    j: int,
) -> np.ndarray:
    """[h_ε(∂z_i), h_ε(∂z_j)] from third derivatives of W; the z-block is identically zero."""
    _check(W, frame, x)
    n = frame.n
    for k in (i, j):
        if not 0 <= k < n:
            raise InputError(f"direction index {k} outside 0..{n - 1}")
    jet = eval_jet(W, x, 3)
    H = jet.theta_hessian()
    T3 = jet.theta_third()
    Tz = jet.theta_theta_z()
    C = _lift_block(frame, H) + epsilon_inv * np.eye(n)  # C[:, i] = θ-coefficients of h_ε(∂z_i)

    def derivative(a: int, b: int) -> np.ndarray:
        # h_ε(∂z_a) applied to the θ-coefficients of h_ε(∂z_b)
        grad = Tz[b, :, a] + T3[b] @ C[:, a]
        return frame.eta_array.T @ grad

    out = np.zeros(2 * n, dtype=complex)
    out[n:] = derivative(i, j) - derivative(j, i)
    return out


def max_flatness_defect(
    W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint, epsilon_inv: complex
) -> float:
    n = frame.n
    best = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            best = max(best, float(np.max(np.abs(flatness_defect(W, frame, x, epsilon_inv, i, j)))))
    return best


@dataclass(frozen=True)
class SymmetryReport:
    periodic_defect: float
    homogeneity_defect: float
    oddness_defect: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def check_symmetries(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    samples: Iterable[XPoint],
    lattice: Optional[Sequence[Sequence[int]]] = None,
    weights: Sequence[complex] = HOMOGENEITY_SAMPLES,
) -> SymmetryReport:
    n = frame.n
    basis = [list(v) for v in (lattice if lattice is not None else np.eye(n, dtype=int))]
    for v in basis:
        if len(v) != n:
            raise InputError(f"lattice vector {v} has length {len(v)}, expected {n}")
    periodic = homogeneity = oddness = 0.0
    for x in samples:
        _check(W, frame, x)
        w0 = W.evaluate(x)
        theta = np.array(x.theta)
        for k in basis:
            shifted = x.with_theta(theta + 2j * math.pi * np.array(k, dtype=float))
            periodic = max(periodic, abs(W.evaluate(shifted) - w0))
        for t in weights:
            scaled = x.with_z(np.array(x.z) * t)
            homogeneity = max(homogeneity, abs(W.evaluate(scaled) - w0 / t))
        oddness = max(oddness, abs(W.evaluate(x.with_theta(-theta)) + w0))
    report = SymmetryReport(periodic, homogeneity, oddness)
    logger.debug(f"[HEAVENLY] symmetry defects {report}")
    return report


def heavenly_family_member(
    W: PlebanskiFunction, frame: DarbouxFrame, samples: Iterable[XPoint], tol: float
) -> bool:
    """True iff the heavenly residual vanishes (within tol) on every sample."""
    worst = 0.0
    for x in samples:
        worst = max(worst, float(np.max(np.abs(heavenly_residual(W, frame, x)))))
    return worst <= tol


def grid_report(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    points: List[XPoint],
    epsilon_invs: Sequence[complex] = (0.0, 1.0, 1.0j),
) -> Dict[str, float]:
    """Max residual and max flatness defect over the regular points of a grid."""
    max_res = 0.0
    max_flat = 0.0
    used = 0
    for x in points:
        if not W.regular(x):
            continue
        used += 1
        max_res = max(max_res, float(np.max(np.abs(heavenly_residual(W, frame, x)))))
        for e in epsilon_invs:
            max_flat = max(max_flat, max_flatness_defect(W, frame, x, e))
    if used < len(points):
        logger.warning(f"[HEAVENLY] skipped {len(points) - used} irregular grid points")
    return {"max_residual": max_res, "max_flatness_defect": max_flat, "points": used}
