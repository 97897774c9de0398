# src/geometry/lagrangian.py
"""
座標型 Lagrangian 子流形 B = {z_fixed = const}: good 判定、ζ 非退化、法叢聯絡與其平坦性
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.config.config_loader import tolerance
from src.core.errors import FrameMismatch, InputError, NonLagrangianBlock, StepFailure
from src.core.frame import DarbouxFrame, XPoint
from src.core.plebanski import PlebanskiFunction, eval_jet
from src.geometry.heavenly import lift_horizontal

logger = logging.getLogger(__name__)


def default_real_structure(free: Sequence[int], fixed: Sequence[int], n: int) -> np.ndarray:
    """Antilinear structure exchanging the free block with the fixed block, c(v) = C·conj(v)."""
    C = np.zeros((n, n))
    for a, b in zip(free, fixed):
        C[a, b] = C[b, a] = 1.0
    return C


@dataclass(frozen=True)
class CoordinateLagrangian:
    """B ⊂ M cut out by z_k = values[k] for k in `fixed`; its coordinates are the free z's."""

    frame: DarbouxFrame
    values: Tuple[complex, ...]
    fixed: Tuple[int, ...] = ()
    real_structure: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        frame = self.frame
        if not frame.is_block():
            raise FrameMismatch("coordinate Lagrangians need a frame with ω_pq ≠ 0 only for |p − q| = d")
        d, n = frame.d, frame.n
        fixed = tuple(self.fixed) if self.fixed else tuple(range(d, n))
        if len(fixed) != d or len(set(fixed)) != d or not all(0 <= k < n for k in fixed):
            raise NonLagrangianBlock(f"fixed block {fixed} must be {d} distinct indices in 0..{n - 1}")
        if len(self.values) != d:
            raise InputError(f"expected {d} fixed values, got {len(self.values)}")
        free = tuple(k for k in range(n) if k not in fixed)
        om = frame.omega_array
        if np.any(om[np.ix_(free, free)] != 0):
            raise NonLagrangianBlock(f"ω does not vanish on the tangent block {free}")
        C = self.real_structure
        if C is None:
            C = default_real_structure(free, fixed, n)
        C = np.asarray(C, dtype=complex)
        if C.shape != (n, n) or np.max(np.abs(C @ np.conj(C) - np.eye(n))) > tolerance("exact_identity"):
            raise InputError("real structure matrix C must be n×n with C·conj(C) = Id")
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "values", tuple(complex(v) for v in self.values))
        object.__setattr__(self, "real_structure", C)

    @property
    def d(self) -> int:
        return self.frame.d

    @property
    def free(self) -> Tuple[int, ...]:
        return tuple(k for k in range(self.frame.n) if k not in self.fixed)

    def contains(self, x: XPoint, atol: float = 0.0) -> bool:
        return all(abs(x.z[k] - v) <= atol for k, v in zip(self.fixed, self.values))

    def assemble(self, base: Sequence[complex], lift: Sequence[complex], normal: Sequence[complex]) -> XPoint:
        n = self.frame.n
        z = np.zeros(n, dtype=complex)
        th = np.zeros(n, dtype=complex)
        z[list(self.free)] = base
        z[list(self.fixed)] = self.values
        th[list(self.free)] = lift
        th[list(self.fixed)] = normal
        return XPoint.of(z, th)


@dataclass(frozen=True)
class NormalPoint:
    base: Tuple[complex, ...]
    normal: Tuple[complex, ...]

    @classmethod
    def of(cls, base: Sequence[complex], normal: Sequence[complex]) -> "NormalPoint":
        if len(base) != len(normal):
            raise InputError(f"base and normal lengths differ: {len(base)} != {len(normal)}")
        return cls(tuple(complex(v) for v in base), tuple(complex(v) for v in normal))


def _on_block(W: PlebanskiFunction, B: CoordinateLagrangian, x: XPoint) -> None:
    B.frame.check_point(x)
    if W.n != B.frame.n:
        raise InputError(f"W is defined for n = {W.n}, frame has n = {B.frame.n}")
    if not B.contains(x):
        raise InputError(f"point z = {x.z} does not lie over B (fixed {B.fixed} = {B.values})")


def good_defect(W: PlebanskiFunction, B: CoordinateLagrangian, x: XPoint) -> np.ndarray:
    """∂³W/∂θ_i∂θ_j∂θ_k over the tangent block of B; B is good at x iff this vanishes."""
    _on_block(W, B, x)
    T3 = eval_jet(W, x, 3).theta_third()
    free = list(B.free)
    return T3[np.ix_(free, free, free)]


def good_defect4(W: PlebanskiFunction, B: CoordinateLagrangian, x: XPoint) -> np.ndarray:
    """Fourth vertical derivatives of W|_{X_B} along the tangent block (chart-invariant form)."""
    _on_block(W, B, x)
    jet = eval_jet(W, x, 4)
    n = B.frame.n
    free = B.free
    d = len(free)
    out = np.empty((d, d, d, d), dtype=complex)
    for idx in itertools.product(range(d), repeat=4):
        out[idx] = jet.partial(*(n + free[k] for k in idx))
    return out


def fiber_verdict(
    W: PlebanskiFunction, B: CoordinateLagrangian, samples: Iterable[XPoint], tol: float
) -> Dict[str, float]:
    """Max of both good-Lagrangian defects over fibre samples."""
    third = fourth = 0.0
    for x in samples:
        third = max(third, float(np.max(np.abs(good_defect(W, B, x)))))
        fourth = max(fourth, float(np.max(np.abs(good_defect4(W, B, x)))))
    return {
        "max_good_defect": third,
        "max_good_defect4": fourth,
        "good": third <= tol,
        "good4": fourth <= tol,
    }


def nondegenerate(B: CoordinateLagrangian, frame: Optional[DarbouxFrame] = None) -> bool:
    """ζ(u, v) = i·ω(u, C·conj v) restricted to T_B is non-degenerate."""
    frame = B.frame if frame is None else frame
    if not frame.is_block():
        raise FrameMismatch("nondegeneracy is only decided for block frames")
    free = list(B.free)
    zeta = 1j * (frame.omega_array @ B.real_structure)[np.ix_(free, free)]
    sv = np.linalg.svd(zeta, compute_uv=False)
    ok = bool(sv.min() > tolerance("kernel") * max(1.0, sv.max()))
    logger.debug(f"[LAGRANGIAN] ζ|_B singular values {sv}")
    return ok


def normal_connection(
    W: PlebanskiFunction,
    B: CoordinateLagrangian,
    y: NormalPoint,
    direction: int,
    lift: Sequence[complex],
) -> np.ndarray:
    """k-projection (fixed θ components) of h(∂z_direction) at the assembled point."""
    d = B.d
    if not 0 <= direction < d:
        raise InputError(f"base direction {direction} outside 0..{d - 1}")
    if len(y.base) != d or len(y.normal) != d or len(lift) != d:
        raise InputError(f"base, normal and lift must all have length {d}")
    x = B.assemble(y.base, lift, y.normal)
    n = B.frame.n
    col = lift_horizontal(W, B.frame, x, 0.0, B.free[direction])
    return col[[n + k for k in B.fixed]]


def lift_defect(
    W: PlebanskiFunction,
    B: CoordinateLagrangian,
    y: NormalPoint,
    direction: int,
    lifts: Sequence[Sequence[complex]],
) -> float:
    values = [normal_connection(W, B, y, direction, lift) for lift in lifts]
    ref = values[0]
    return max((float(np.max(np.abs(v - ref))) for v in values[1:]), default=0.0)


def holonomy_defect(
    W: PlebanskiFunction,
    B: CoordinateLagrangian,
    y: NormalPoint,
    directions: Tuple[int, int],
    step: Optional[float] = None,
    lift: Optional[Sequence[complex]] = None,
) -> float:
    """Displacement of the normal coordinates around a square loop of side `step`, divided by step²."""
    h = tolerance("holonomy_step") if step is None else step
    d = B.d
    a, b = directions
    if a == b or not (0 <= a < d and 0 <= b < d):
        raise InputError(f"holonomy needs two distinct base directions in 0..{d - 1}, got {directions}")
    lift = [0.0] * d if lift is None else list(lift)
    base = np.array(y.base, dtype=complex)
    normal = np.array(y.normal, dtype=complex)
    edges: List[Tuple[int, float]] = [(a, h), (b, h), (a, -h), (b, -h)]
    for direction, length in edges:
        start = base.copy()

        def rhs(s: float, state: np.ndarray) -> np.ndarray:
            here = start.copy()
            here[direction] += s * length
            return length * normal_connection(W, B, NormalPoint.of(here, state), direction, lift)

        sol = solve_ivp(rhs, (0.0, 1.0), normal, method="RK45", rtol=1e-11, atol=1e-13)
        if sol.status != 0:
            raise StepFailure(f"holonomy edge integration failed: {sol.message}")
        normal = sol.y[:, -1]
        base[direction] += length
    displacement = float(np.max(np.abs(normal - np.array(y.normal))))
    logger.debug(f"[LAGRANGIAN] plaquette {directions} step {h}: displacement {displacement:.3e}")
    return displacement / (h * h)
