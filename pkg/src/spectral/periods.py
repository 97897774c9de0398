# src/spectral/periods.py
"""
週期 z_γ = ∮_γ √Q dx、交點矩陣 (intersection pairing) 與週期座標的 Jacobian 秩
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec

from src.config.config_loader import tolerance
from src.core.errors import InputError, NonTransverse, RepeatedRoot, RootCollision, ToleranceUnreachable
from src.spectral.curve import SpectralData, branch_points
from src.spectral.cycles import Cycle, CycleBranch, winding_numbers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PeriodVector:
    cycles: Tuple[Cycle, ...]
    values: Tuple[complex, ...]
    errors: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "periods": [
                {"cycle": c.name, "sheet": c.label, "value": v, "error": e}
                for c, v, e in zip(self.cycles, self.values, self.errors)
            ]
        }


def _integrate(branch: CycleBranch, tol: float) -> Tuple[complex, float]:
    segs = branch.cycle.segments()
    total = 0j
    err = 0.0
    per_segment = 0.5 * tol / len(segs)
    for k, (a, b) in enumerate(segs):
        delta = b - a

        def f(s: float, k: int = k, delta: complex = delta) -> np.ndarray:
            v = branch.value(k, s) * delta
            return np.array([v.real, v.imag])

        res, est = quad_vec(f, 0.0, 1.0, epsabs=per_segment, epsrel=0.0, quadrature="gk21", limit=4000)
        total += complex(res[0], res[1])
        err += float(est)
    return total, err


def _period(data: SpectralData, cycle: Cycle, tol: float, start: Optional[complex] = None) -> Tuple[complex, float]:
    branch = CycleBranch(data, cycle, start)
    value, err = _integrate(branch, tol)
    if err > tol:
        raise ToleranceUnreachable(
            f"period over cycle {cycle.name or '?'} has error estimate {err:.3e} above tolerance {tol:.3e}"
        )
    return value, err


def period(data: SpectralData, cycle: Cycle, tol: Optional[float] = None) -> complex:
    tol = tolerance("period_tol") if tol is None else tol
    value, err = _period(data, cycle, tol)
    logger.debug(f"[SPECTRAL] period over {cycle.name or '?'} = {value} (error {err:.2e})")
    return value


def period_vector(data: SpectralData, cycles: Sequence[Cycle], tol: Optional[float] = None) -> PeriodVector:
    tol = tolerance("period_tol") if tol is None else tol
    values, errors = [], []
    for c in cycles:
        v, e = _period(data, c, tol)
        values.append(v)
        errors.append(e)
    return PeriodVector(tuple(cycles), tuple(values), tuple(errors))


def _crossing(a0: complex, a1: complex, b0: complex, b1: complex) -> Optional[Tuple[float, float, float]]:
    """(s, t, sin angle) for a crossing of the half-open segments [a0, a1) and [b0, b1)."""
    da, db = a1 - a0, b1 - b0
    cross = (da.conjugate() * db).imag
    scale = abs(da) * abs(db)
    w = b0 - a0
    if abs(cross) <= 1e-14 * scale:
        collinear = abs((da.conjugate() * w).imag) <= 1e-14 * abs(da) * max(abs(w), 1e-300)
        if collinear:
            proj = [((p - a0) * da.conjugate()).real / abs(da) ** 2 for p in (b0, b1)]
            if max(proj) >= 0.0 and min(proj) <= 1.0:
                raise NonTransverse("two cycles overlap along a segment")
        return None
    s = (w.conjugate() * db).imag / cross
    t = (w.conjugate() * da).imag / cross
    if 0.0 <= s < 1.0 and 0.0 <= t < 1.0:
        return s, t, cross / scale
    return None


def _same_geometry(a: Cycle, b: Cycle) -> bool:
    return set(a.vertices) == set(b.vertices)


def intersection_pair(data: SpectralData, a: Cycle, b: Cycle) -> int:
    if _same_geometry(a, b):
        return 0
    guard = tolerance("crossing_angle")
    ba, bb = CycleBranch(data, a), CycleBranch(data, b)
    total = 0
    for i, (a0, a1) in enumerate(a.segments()):
        for j, (b0, b1) in enumerate(b.segments()):
            hit = _crossing(a0, a1, b0, b1)
            if hit is None:
                continue
            s, t, sine = hit
            if abs(sine) < guard:
                raise NonTransverse(
                    f"cycles {a.name or '?'} and {b.name or '?'} cross at angle {abs(sine):.2e} near {a0 + s * (a1 - a0)}"
                )
            ya, yb = ba.value(i, s), bb.value(j, t)
            if abs(ya - yb) < abs(ya + yb):
                total += 1 if sine > 0 else -1
    return total


def intersection_matrix(data: SpectralData, cycles: Sequence[Cycle]) -> np.ndarray:
    n = len(cycles)
    M = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            M[i, j] = intersection_pair(data, cycles[i], cycles[j])
            M[j, i] = -M[i, j]
    logger.debug(f"[SPECTRAL] intersection matrix {M.tolist()}")
    return M


def default_directions(data: SpectralData) -> List[np.ndarray]:
    """Unit deformations of the coefficients below the two leading ones."""
    d = data.degree
    out = []
    for k in range(max(1, d - 1)):
        e = np.zeros(d + 1, dtype=complex)
        e[k] = 1.0
        out.append(e)
    return out


def _match_roots(old: Sequence[complex], new: Sequence[complex]) -> List[complex]:
    """Continue each branch point to its nearest perturbed root."""
    remaining = list(new)
    matched = []
    for r in old:
        k = int(np.argmin([abs(r - q) for q in remaining]))
        matched.append(remaining.pop(k))
    return matched


def _perturbed(data: SpectralData, direction: np.ndarray, h: float, cycles: Sequence[Cycle]) -> SpectralData:
    coeffs = np.asarray(data.coefficients, dtype=complex) + h * direction
    try:
        moved = branch_points(coeffs)
    except RepeatedRoot as e:
        raise RootCollision(f"a step of {h:.1e} merges branch points") from e
    matched = _match_roots(data.branch_points, moved.branch_points)
    limit = 0.25 * data.min_separation()
    drift = max(abs(r - q) for r, q in zip(data.branch_points, matched))
    if drift > limit:
        raise RootCollision(f"a step of {h:.1e} moves branch points by {drift:.3e}, beyond {limit:.3e}")
    continued = SpectralData(moved.coefficients, tuple(matched), moved.resolved)
    for c in cycles:
        if winding_numbers(continued, c) != winding_numbers(data, c):
            raise RootCollision(f"a branch point crossed cycle {c.name or '?'} under the deformation")
    return continued


def period_jacobian(
    data: SpectralData,
    cycles: Sequence[Cycle],
    tol: Optional[float] = None,
    directions: Optional[Sequence[Sequence[complex]]] = None,
    step: Optional[float] = None,
) -> np.ndarray:
    """∂z_i/∂(deformation k) by central differences, sheets continued from the unperturbed start."""
    tol = tolerance("period_tol") if tol is None else tol
    h = tolerance("jacobian_step") if step is None else step
    dirs = [np.asarray(d, dtype=complex) for d in (directions or default_directions(data))]
    for d in dirs:
        if d.shape != (data.degree + 1,):
            raise InputError(f"deformation direction has length {d.shape[0]}, expected {data.degree + 1}")
    starts = [CycleBranch(data, c).start for c in cycles]
    J = np.zeros((len(cycles), len(dirs)), dtype=complex)
    for k, d in enumerate(dirs):
        plus = _perturbed(data, d, h, cycles)
        minus = _perturbed(data, d, -h, cycles)
        for i, c in enumerate(cycles):
            zp, _ = _period(plus, c, tol, starts[i])
            zm, _ = _period(minus, c, tol, starts[i])
            J[i, k] = (zp - zm) / (2.0 * h)
    return J


def period_jacobian_rank(
    data: SpectralData,
    cycles: Sequence[Cycle],
    tol: Optional[float] = None,
    directions: Optional[Sequence[Sequence[complex]]] = None,
    step: Optional[float] = None,
) -> int:
    J = period_jacobian(data, cycles, tol, directions, step)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    rank = int(np.sum(sv > tolerance("jacobian_rank_rtol") * sv[0]))
    logger.info(f"[SPECTRAL] period Jacobian singular values {np.round(sv, 12).tolist()}, rank {rank}")
    return rank
