# src/stokes/solutions.py
"""
Canonical (BJL) solutions, Stokes factors 與 monodromy 一致性檢查

Each column j of the canonical solution Φ_φ is carried as G_j(ε) = Φ_φ[:, j]·exp(u_j/ε), which
satisfies G′ = (U − u_j)·G/ε² + Ṽ·G/ε and tends to e_j as ε → 0 in H(φ). It is started from the
formal series at a small anchor on the ray of H(φ) where column j is most recessive, integrated
radially to the target radius and then along an arc to the target angle.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from src.config.config_loader import tolerance
from src.config.settings import KitSettings
from src.core.errors import InputError, StepFailure
from src.stokes.problem import (
    StokesProblem,
    StokesRay,
    angle_distance,
    base_angle,
    check_admissible,
    formal_series,
    neighbour_gaps,
    stokes_rays,
)

logger = logging.getLogger(__name__)

SERIES_ORDER = 60
RECESSIVE_MARGIN = math.pi / 12
PRECISIONS = ("double", "extended")


def _signed_offset(angle: float, center: float) -> float:
    """angle − center reduced to (−π, π]."""
    d = math.fmod(angle - center, 2.0 * math.pi)
    if d > math.pi:
        d -= 2.0 * math.pi
    elif d <= -math.pi:
        d += 2.0 * math.pi
    return d


# ---------------------------------------------------------------------------
# path pieces: dG/dt = (a(t)·A0 + b(t)·A1)·G for t ∈ [0, 1]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Radial:
    """Straight segment in s = 1/ε; dG/ds = A0·G + A1·G/s."""

    s0: complex
    s1: complex

    def coefficients(self, t: Any, lib: Any) -> Tuple[Any, Any]:
        ds = self.s1 - self.s0
        return ds, ds / (self.s0 + t * ds)


@dataclass(frozen=True)
class _Arc:
    """ε = radius·exp(iα), α from alpha0 to alpha1; dG/dε = −A0·G/ε² − A1·G/ε."""

    radius: float
    alpha0: float
    alpha1: float

    def coefficients(self, t: Any, lib: Any) -> Tuple[Any, Any]:
        dalpha = self.alpha1 - self.alpha0
        eps = self.radius * lib.exp(1j * (self.alpha0 + t * dalpha))
        return -1j * dalpha / eps, -1j * dalpha


def _propagate(piece: Any, A0: np.ndarray, A1: np.ndarray, G0: np.ndarray, tol: float) -> np.ndarray:
    shape = G0.shape

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        a, b = piece.coefficients(t, cmath)
        return ((a * A0 + b * A1) @ y.reshape(shape)).ravel()

    sol = solve_ivp(rhs, (0.0, 1.0), G0.astype(complex).ravel(), method="RK45", rtol=tol, atol=tol * 1e-3)
    if sol.status != 0:
        raise StepFailure(f"canonical-solution integration failed on {piece}: {sol.message}")
    return sol.y[:, -1].reshape(shape)


def _propagate_mp(piece: Any, A0: np.ndarray, A1: np.ndarray, G0: np.ndarray, dps: int) -> np.ndarray:
    """Extended-precision propagation with mpmath's Taylor integrator on the real/imaginary split."""
    n = A0.shape[0]
    columns = G0.reshape(n, -1)
    out = np.empty(columns.shape, dtype=complex)
    with mpmath.workdps(dps):
        A0m = mpmath.matrix([[mpmath.mpc(A0[i, k]) for k in range(n)] for i in range(n)])
        A1m = mpmath.matrix([[mpmath.mpc(A1[i, k]) for k in range(n)] for i in range(n)])

        def F(t: Any, y: List[Any]) -> List[Any]:
            vec = mpmath.matrix([mpmath.mpc(y[k], y[k + n]) for k in range(n)])
            a, b = piece.coefficients(t, mpmath)
            d = (a * A0m + b * A1m) * vec
            return [mpmath.re(d[k]) for k in range(n)] + [mpmath.im(d[k]) for k in range(n)]

        for c in range(columns.shape[1]):
            y0 = [mpmath.mpf(v.real) for v in columns[:, c]] + [mpmath.mpf(v.imag) for v in columns[:, c]]
            end = mpmath.odefun(F, 0, y0)(1)
            out[:, c] = [complex(end[k]) + 1j * complex(end[k + n]) for k in range(n)]
    return out.reshape(G0.shape)


class _Integrator:
    def __init__(self, tol: float, precision: str, dps: int):
        if precision not in PRECISIONS:
            raise InputError(f"precision must be one of {PRECISIONS}, got {precision!r}")
        self.tol = tol
        self.precision = precision
        self.dps = dps

    def __call__(self, piece: Any, A0: np.ndarray, A1: np.ndarray, G0: np.ndarray) -> np.ndarray:
        if self.precision == "extended":
            return _propagate_mp(piece, A0, A1, G0, self.dps)
        return _propagate(piece, A0, A1, G0, self.tol)


def _integrator(tol: Optional[float], precision: str, dps: Optional[int]) -> _Integrator:
    return _Integrator(
        tolerance("stokes_tol") if tol is None else tol,
        precision,
        KitSettings().extended_dps if dps is None else dps,
    )


# ---------------------------------------------------------------------------
# canonical solutions
# ---------------------------------------------------------------------------

def recessive_direction(P: StokesProblem, phi: float, j: int) -> float:
    """Ray of H(φ) (away from its edges) where exp(−u_j/ε) is most recessive against the others."""
    if P.n == 1:
        return phi
    offsets = np.linspace(-math.pi / 2 + RECESSIVE_MARGIN, math.pi / 2 - RECESSIVE_MARGIN, 181)
    others = [i for i in range(P.n) if i != j]
    best, best_score = phi, math.inf
    for off in offsets:
        psi = phi + off
        rot = cmath.exp(-1j * psi)
        score = max(((P.u[i] - P.u[j]) * rot).real / abs(P.u[i] - P.u[j]) for i in others)
        if score < best_score:
            best, best_score = psi, score
    if best_score >= 0:
        logger.warning(f"[STOKES] column {j + 1} is not recessive on any ray of H({phi:.4f}); best score {best_score:.3f}")
    return best


def _anchor(series: Sequence[np.ndarray], j: int, psi: float, radius: float, tol: float) -> Tuple[complex, np.ndarray]:
    """Anchor ε_a on the ray ψ and the truncated series value of column j there."""
    r = radius / 2.0
    for _ in range(60):
        eps_a = r * cmath.exp(1j * psi)
        value = series[0][:, j].astype(complex)
        for m in range(1, len(series)):
            term = series[m][:, j] * eps_a ** m
            if np.max(np.abs(term)) <= tol * 1e-2:
                return eps_a, value
            value = value + term
        r /= 2.0
    raise StepFailure(f"no anchor radius brings the formal series of column {j + 1} below {tol:.1e}")


def _canonical_columns(
    P: StokesProblem,
    phi: float,
    eps: complex,
    integ: _Integrator,
    anchor_scale: float = 1.0,
) -> np.ndarray:
    """G(ε) with G[:, j] = Φ_φ(ε)[:, j]·exp(u_j/ε), in the eigenbasis."""
    n = P.n
    radius = abs(eps)
    alpha_off = _signed_offset(cmath.phase(eps), phi)
    if abs(alpha_off) >= math.pi / 2:
        raise InputError(f"ε = {eps} is outside the half-plane H({phi})")
    series = formal_series(P, SERIES_ORDER)
    G = np.empty((n, n), dtype=complex)
    for j in range(n):
        A0 = -(np.diag(P.u) - P.u[j] * np.eye(n))
        A1 = -P.V_eig
        psi = recessive_direction(P, phi, j)
        eps_a, g = _anchor(series, j, psi, radius * anchor_scale, integ.tol)
        if np.count_nonzero(P.V_eig):
            g = integ(_Radial(1.0 / eps_a, 1.0 / (radius * cmath.exp(1j * psi))), A0, A1, g)
            psi_off = _signed_offset(psi, phi)
            if abs(psi_off - alpha_off) > 0:
                g = integ(_Arc(radius, phi + psi_off, phi + alpha_off), A0, A1, g)
        G[:, j] = g
    return G


def normalized_solution(
    P: StokesProblem,
    phi: float,
    eps: complex,
    *,
    tol: Optional[float] = None,
    precision: str = "double",
    dps: Optional[int] = None,
    anchor_scale: float = 1.0,
) -> np.ndarray:
    """Φ_φ(ε)·exp(U/ε) in the original basis; tends to Id as ε → 0 in H(φ)."""
    check_admissible(P, phi)
    if eps == 0:
        raise InputError("ε must be nonzero")
    G = _canonical_columns(P, phi, complex(eps), _integrator(tol, precision, dps), anchor_scale)
    return P.from_eigenbasis(G)


def canonical_solution(
    P: StokesProblem,
    phi: float,
    eps: complex,
    *,
    tol: Optional[float] = None,
    precision: str = "double",
    dps: Optional[int] = None,
    anchor_scale: float = 1.0,
) -> np.ndarray:
    check_admissible(P, phi)
    if eps == 0:
        raise InputError("ε must be nonzero")
    eps = complex(eps)
    G = _canonical_columns(P, phi, eps, _integrator(tol, precision, dps), anchor_scale)
    phi_eig = G * np.exp(-P.u / eps)[None, :]
    return P.from_eigenbasis(phi_eig)


def canonical_defect(P: StokesProblem, phi: float, eps: complex, **kwargs: Any) -> float:
    """max |Φ_φ(ε)·exp(U/ε) − Id|."""
    return float(np.max(np.abs(normalized_solution(P, phi, eps, **kwargs) - np.eye(P.n))))


def anchor_agreement(P: StokesProblem, phi: float, eps: complex, **kwargs: Any) -> float:
    """Relative difference of the canonical solution computed from anchors r and r/2."""
    a = normalized_solution(P, phi, eps, **kwargs)
    b = normalized_solution(P, phi, eps, anchor_scale=0.5, **kwargs)
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a))))


def solution_residual(P: StokesProblem, phi: float, eps: complex, step: float = 1e-3, **kwargs: Any) -> float:
    """Relative ODE residual ‖Φ′ − (U/ε² + V/ε)Φ‖ with Φ′ by Richardson-extrapolated central differences."""
    eps = complex(eps)

    def central(h: float) -> np.ndarray:
        d = h * eps
        return (canonical_solution(P, phi, eps + d, **kwargs) - canonical_solution(P, phi, eps - d, **kwargs)) / (2 * d)

    deriv = (4.0 * central(step / 2) - central(step)) / 3.0
    Phi = canonical_solution(P, phi, eps, **kwargs)
    A = P.U / eps ** 2 + P.V / eps
    scale = float(np.max(np.abs(A))) * float(np.max(np.abs(Phi)))
    return float(np.max(np.abs(deriv - A @ Phi))) / max(scale, 1e-300)


# ---------------------------------------------------------------------------
# Stokes factors and monodromy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StokesFactor:
    ray: StokesRay
    matrix: np.ndarray  # original basis
    matrix_eig: np.ndarray = field(repr=False)

    def unipotency_defect(self) -> float:
        n = self.matrix.shape[0]
        N = np.linalg.matrix_power(self.matrix_eig - np.eye(n), n)
        return float(np.max(np.abs(N)))

    def to_dict(self) -> Dict[str, Any]:
        return {"ray": self.ray.to_dict(), "matrix": self.matrix}


def _straddle(rays: Sequence[StokesRay], k: int) -> Tuple[float, float]:
    prev_gap, next_gap = neighbour_gaps(rays, k)
    delta = min(prev_gap / 2.0, next_gap / 2.0, math.pi / 4)
    ell = rays[k].angle
    return ell - delta, ell + delta


def _factor_eig(P: StokesProblem, rays: Sequence[StokesRay], k: int, radius: float, integ: _Integrator) -> np.ndarray:
    phi_minus, phi_plus = _straddle(rays, k)
    eps = radius * cmath.exp(1j * rays[k].angle)
    G_minus = _canonical_columns(P, phi_minus, eps, integ)
    G_plus = _canonical_columns(P, phi_plus, eps, integ)
    core = np.linalg.solve(G_minus, G_plus)
    # Φ± = G±·exp(−U/ε): S_ij = core_ij·exp((u_i − u_j)/ε)
    return core * np.exp((P.u[:, None] - P.u[None, :]) / eps)


def stokes_factor(
    P: StokesProblem,
    ray: StokesRay,
    *,
    radius: Optional[float] = None,
    tol: Optional[float] = None,
    precision: str = "double",
    dps: Optional[int] = None,
) -> StokesFactor:
    """S(ℓ) = Φ_{φ−}(ε)⁻¹·Φ_{φ+}(ε) at ε = radius·exp(iℓ), φ± straddling ℓ."""
    rays = stokes_rays(P)
    matches = [k for k, r in enumerate(rays) if angle_distance(r.angle, ray.angle) <= tolerance("stokes_angle_guard")]
    if not matches:
        raise InputError(f"{ray.angle} is not a Stokes ray of this problem")
    radius = tolerance("stokes_eval_radius") if radius is None else radius
    S_eig = _factor_eig(P, rays, matches[0], radius, _integrator(tol, precision, dps))
    return StokesFactor(ray=rays[matches[0]], matrix=P.from_eigenbasis(S_eig), matrix_eig=S_eig)


def _loop_monodromy(P: StokesProblem, base: float, radius: float, integ: _Integrator) -> np.ndarray:
    """Y(ε) continued once counterclockwise round |ε| = radius from Y = Id at the base angle."""
    n = P.n
    A0 = -np.diag(P.u)
    A1 = -P.V_eig
    return integ(_Arc(radius, base, base + 2.0 * math.pi), A0, A1, np.eye(n, dtype=complex))


@dataclass(frozen=True)
class MonodromyCheck:
    base_angle: float
    connection: np.ndarray
    product: np.ndarray
    defect: float


def monodromy_check(
    P: StokesProblem,
    *,
    radius: Optional[float] = None,
    tol: Optional[float] = None,
    precision: str = "double",
    dps: Optional[int] = None,
    factors: Optional[Sequence[StokesFactor]] = None,
) -> MonodromyCheck:
    """Connection matrix C with Φ_base = Φ_base^{ccw}·C against S(ℓ₁)·S(ℓ₂)⋯S(ℓ_m)."""
    integ = _integrator(tol, precision, dps)
    radius = tolerance("stokes_eval_radius") if radius is None else radius
    rays = stokes_rays(P)
    n = P.n
    if not rays:
        eye = np.eye(n, dtype=complex)
        return MonodromyCheck(0.0, eye, eye, 0.0)
    base = base_angle(rays)
    eps_b = radius * cmath.exp(1j * base)
    G = _canonical_columns(P, base, eps_b, integ)
    Phi_b = G * np.exp(-P.u / eps_b)[None, :]
    M = _loop_monodromy(P, base, radius, integ)
    connection = np.linalg.solve(M @ Phi_b, Phi_b)
    if factors is None:
        mats = [_factor_eig(P, rays, k, radius, integ) for k in range(len(rays))]
    else:
        mats = [f.matrix_eig for f in factors]
    product = np.eye(n, dtype=complex)
    for S in mats:
        product = product @ S
    defect = float(np.max(np.abs(connection - product)))
    logger.info(f"[STOKES] monodromy defect {defect:.3e} at radius {radius}")
    return MonodromyCheck(base, connection, product, defect)


def monodromy_consistency(P: StokesProblem, **kwargs: Any) -> float:
    return monodromy_check(P, **kwargs).defect


@dataclass(frozen=True)
class StokesData:
    rays: List[StokesRay]
    factors: List[StokesFactor]
    monodromy_defect: float
    max_unipotency_defect: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rays": [r.to_dict() for r in self.rays],
            "factors": [f.to_dict() for f in self.factors],
            "monodromy_defect": self.monodromy_defect,
            "max_unipotency_defect": self.max_unipotency_defect,
        }


def stokes_data(
    P: StokesProblem,
    *,
    radius: Optional[float] = None,
    tol: Optional[float] = None,
    precision: str = "double",
    dps: Optional[int] = None,
) -> StokesData:
    rays = stokes_rays(P)
    factors = [stokes_factor(P, r, radius=radius, tol=tol, precision=precision, dps=dps) for r in rays]
    check = monodromy_check(P, radius=radius, tol=tol, precision=precision, dps=dps, factors=factors)
    unip = max((f.unipotency_defect() for f in factors), default=0.0)
    return StokesData(rays=rays, factors=factors, monodromy_defect=check.defect, max_unipotency_defect=unip)
