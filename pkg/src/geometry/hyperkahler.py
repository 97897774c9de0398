# src/geometry/hyperkahler.py
"""
由 W 建構逐點的 complex hyperkähler 結構 (g, I, J, K) 與其形式 Ω_I, Ω_±，並驗證定義恆等式
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from src.config.config_loader import tolerance
from src.core.errors import DegenerateFrame, InputError, PoleAtZeroSection
from src.core.frame import DarbouxFrame, XPoint
from src.core.plebanski import PlebanskiFunction, eval_jet
from src.geometry.heavenly import heavenly_residual, pencil_lift

logger = logging.getLogger(__name__)

FORM_NAMES = ("I", "plus", "minus")


@dataclass(frozen=True)
class HKStructure:
    point: XPoint
    g: np.ndarray
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    horizontal: np.ndarray  # 2n×n, columns h(∂z_i)

    @property
    def n(self) -> int:
        return self.point.n


@dataclass(frozen=True)
class FormTriple:
    Omega_I: np.ndarray
    Omega_plus: np.ndarray
    Omega_minus: np.ndarray

    def select(self, which: str) -> np.ndarray:
        if which == "I":
            return self.Omega_I
        if which == "plus":
            return self.Omega_plus
        if which == "minus":
            return self.Omega_minus
        raise InputError(f"unknown form {which!r}; expected one of {FORM_NAMES}")


def build_hk(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    x: XPoint,
    *,
    residual_tol: Optional[float] = None,
) -> HKStructure:
    n = frame.n
    residual_tol = tolerance("exact_identity") if residual_tol is None else residual_tol
    res = float(np.max(np.abs(heavenly_residual(W, frame, x)))) if n > 1 else 0.0
    if res > residual_tol:
        logger.warning(f"[HK] heavenly residual {res:.3e} at {x} exceeds {residual_tol:.1e}")

    Hcols = pencil_lift(W, frame, x, 0.0).matrix()
    Vcols = np.vstack([np.zeros((n, n)), np.eye(n)]).astype(complex)
    B = np.hstack([Hcols, Vcols])  # basis change (h_1..h_n, v_1..v_n) -> standard
    if abs(np.linalg.det(B[:n, :n])) == 0.0:
        raise DegenerateFrame("horizontal and vertical subspaces intersect")
    Binv = np.linalg.inv(B)

    eye = np.eye(n)
    zero = np.zeros((n, n))
    I_hv = np.block([[-1j * eye, zero], [zero, 1j * eye]])
    J_hv = np.block([[zero, eye], [-eye, zero]]).astype(complex)
    om = frame.omega_array
    G_hv = np.block([[zero, om / 2.0], [om.T / 2.0, zero]]).astype(complex)

    I = B @ I_hv @ Binv
    J = B @ J_hv @ Binv
    g = Binv.T @ G_hv @ Binv
    return HKStructure(point=x, g=g, I=I, J=J, K=I @ J, horizontal=Hcols)


def forms(hk: HKStructure, frame: Optional[DarbouxFrame] = None) -> FormTriple:
    """Ω_I(w1, w2) = g(I w1, w2), Ω_±(w1, w2) = g((J ± iK) w1, w2)."""
    if frame is not None:
        frame.check_point(hk.point)

    def form(A: np.ndarray) -> np.ndarray:
        return A.T @ hk.g

    return FormTriple(
        Omega_I=form(hk.I),
        Omega_plus=form(hk.J + 1j * hk.K),
        Omega_minus=form(hk.J - 1j * hk.K),
    )


def twisted_form(hk: Union[HKStructure, FormTriple], s: complex, t: complex) -> np.ndarray:
    """Ω(s, t) = s²Ω_− − 2istΩ_I + t²Ω_+."""
    if s == 0 and t == 0:
        raise InputError("(s, t) must not both vanish")
    ft = forms(hk) if isinstance(hk, HKStructure) else hk
    return s * s * ft.Omega_minus - 2j * s * t * ft.Omega_I + t * t * ft.Omega_plus


# ---------------------------------------------------------------------------
# identity suites
# ---------------------------------------------------------------------------

def _norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def quaternion_defect(hk: HKStructure) -> float:
    one = np.eye(2 * hk.n)
    return max(
        _norm(hk.I @ hk.I + one),
        _norm(hk.J @ hk.J + one),
        _norm(hk.K @ hk.K + one),
        _norm(hk.I @ hk.J @ hk.K + one),
    )


def metric_defect(hk: HKStructure) -> float:
    worst = max(_norm(hk.g - hk.g.T), 0.0)
    for A in (hk.I, hk.J, hk.K):
        worst = max(worst, _norm(A.T @ hk.g @ A - hk.g))
    return worst


def pullback_defect(hk: HKStructure, frame: DarbouxFrame) -> float:
    """Ω_− = π*(ω) and 2iΩ_I = Σ ω_pq dz_p∧dθ_q at the matrix level."""
    n = frame.n
    ft = forms(hk, frame)
    om = frame.omega_array
    zero = np.zeros((n, n))
    pull = np.block([[om, zero], [zero, zero]])
    canonical = np.block([[zero, om], [om, zero]])
    return max(_norm(ft.Omega_minus - pull), _norm(2j * ft.Omega_I - canonical))


def recover_horizontal(hk: HKStructure) -> np.ndarray:
    """The −i eigenspace of I, normalised to unit z-block (columns h(∂z_i))."""
    n = hk.n
    E = scipy.linalg.null_space(hk.I + 1j * np.eye(2 * n))
    if E.shape[1] != n:
        raise DegenerateFrame(f"-i eigenspace of I has dimension {E.shape[1]}, expected {n}")
    return E @ np.linalg.inv(E[:n, :])


def involution_defect(W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint) -> float:
    """Under θ ↦ −θ: I invariant, g, J, K anti-invariant (pushforward diag(1, −1))."""
    n = frame.n
    P = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    a = build_hk(W, frame, x)
    b = build_hk(W, frame, x.with_theta(-np.array(x.theta)))
    return max(
        _norm(P @ b.I @ P - a.I),
        _norm(P @ b.J @ P + a.J),
        _norm(P @ b.K @ P + a.K),
        _norm(P.T @ b.g @ P + a.g),
    )


def homogeneity_flow_defect(
    W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint, t: complex
) -> float:
    """Weights under z ↦ tz: g → 1, I → 0, J + iK → −1, J − iK → +1."""
    n = frame.n
    D = np.diag(np.concatenate([np.full(n, t, dtype=complex), np.ones(n, dtype=complex)]))
    Dinv = np.linalg.inv(D)
    here = build_hk(W, frame, x)
    there = build_hk(W, frame, x.with_z(np.array(x.z) * t))
    plus_here = here.J + 1j * here.K
    minus_here = here.J - 1j * here.K
    plus_there = there.J + 1j * there.K
    minus_there = there.J - 1j * there.K
    return max(
        _norm(D.T @ there.g @ D - t * here.g),
        _norm(Dinv @ there.I @ D - here.I),
        _norm(Dinv @ plus_there @ D - plus_here / t),
        _norm(Dinv @ minus_there @ D - t * minus_here),
    )


# ---------------------------------------------------------------------------
# closedness by finite-difference exterior derivative
# ---------------------------------------------------------------------------

def form_field(W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint, which: str) -> np.ndarray:
    return forms(build_hk(W, frame, x), frame).select(which)


def closedness_defect(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    x: XPoint,
    which: str,
    step: Optional[float] = None,
) -> float:
    """max |(dΩ)_abc| with ∂_a by central differences along the (holomorphic) coordinates."""
    if which not in FORM_NAMES:
        raise InputError(f"unknown form {which!r}; expected one of {FORM_NAMES}")
    h = tolerance("fd_step") if step is None else step
    m = 2 * frame.n
    grads: List[np.ndarray] = []
    for a in range(m):
        plus = form_field(W, frame, x.shifted(a, h), which)
        minus = form_field(W, frame, x.shifted(a, -h), which)
        grads.append((plus - minus) / (2 * h))
    worst = 0.0
    for a in range(m):
        for b in range(a + 1, m):
            for c in range(b + 1, m):
                d = grads[a][b, c] + grads[b][c, a] + grads[c][a, b]
                worst = max(worst, abs(d))
    return worst


# ---------------------------------------------------------------------------
# linear Joyce connection
# ---------------------------------------------------------------------------

def linear_joyce(
    W: PlebanskiFunction, frame: DarbouxFrame, z: Sequence[complex]
) -> np.ndarray:
    """Γ[q][i][j] = Σ_p η_qp ∂³W/∂θ_i∂θ_j∂θ_p at θ = 0."""
    n = frame.n
    x = XPoint.of(z, [0.0] * n)
    frame.check_point(x)
    if not W.regular(x):
        raise PoleAtZeroSection(f"W is not regular on the zero section at z = {tuple(z)}")
    T3 = eval_jet(W, x, 3).theta_third()
    return np.einsum("qp,ijp->qij", frame.eta_array, T3)


def joyce_or_pole(
    W: PlebanskiFunction, frame: DarbouxFrame, z: Sequence[complex]
) -> Union[np.ndarray, str]:
    try:
        return linear_joyce(W, frame, z)
    except PoleAtZeroSection:
        logger.info(f"[HK] zero section is singular at z = {tuple(z)}")
        return "pole-at-zero-section"


def suite(W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint) -> Dict[str, float]:
    hk = build_hk(W, frame, x)
    return {
        "quaternion_defect": quaternion_defect(hk),
        "metric_defect": metric_defect(hk),
        "pullback_defect": pullback_defect(hk, frame),
        "reconstruction_defect": _norm(recover_horizontal(hk) - hk.horizontal),
    }
