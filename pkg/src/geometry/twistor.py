# src/geometry/twistor.py
"""
Twistor distribution 與 twistor line 的特徵 ODE 數值積分

z 固定、θ 沿 ε 的路徑流動:
    dθ_q/dε = −z_q/ε² − (1/ε)·Σ_{i,p} η_pq z_i ∂²W/∂θ_i∂θ_p
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.integrate import RK45

from src.config.config_loader import tolerance
from src.core.errors import InputError, NearZeroEpsilon, StepFailure
from src.core.expression import evaluate_complex, parse_expression, point_env
from src.core.frame import DarbouxFrame, XPoint
from src.core.plebanski import PlebanskiFunction, eval_jet
from src.geometry.heavenly import pencil_lift
from src.geometry.hyperkahler import build_hk, forms, twisted_form

logger = logging.getLogger(__name__)

Observable = Union[str, Callable[[complex, np.ndarray, np.ndarray], complex]]

# RK45 spends six right-hand-side evaluations per attempted step.
_RK45_STAGES = 6


def _segment_distance_to_zero(a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(a)
    s = -(a * d.conjugate()).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(a + s * d)


@dataclass(frozen=True)
class EpsilonPath:
    """Polyline in ℂ* through the given waypoints."""

    waypoints: Tuple[complex, ...]

    def __post_init__(self) -> None:
        if len(self.waypoints) < 2:
            raise InputError("an ε path needs at least two waypoints")
        for k, (a, b) in enumerate(self.segments()):
            if _segment_distance_to_zero(a, b) == 0.0:
                raise InputError(f"segment {k} of the ε path passes through 0")

    @classmethod
    def of(cls, waypoints: Sequence[complex]) -> "EpsilonPath":
        return cls(tuple(complex(w) for w in waypoints))

    @classmethod
    def parse(cls, text: str) -> "EpsilonPath":
        try:
            return cls.of([complex(w.strip().replace("i", "j")) for w in text.split(",") if w.strip()])
        except ValueError as e:
            raise InputError(f"malformed ε path {text!r}") from e

    def segments(self) -> List[Tuple[complex, complex]]:
        return list(zip(self.waypoints[:-1], self.waypoints[1:]))

    def reversed(self) -> "EpsilonPath":
        return EpsilonPath(tuple(reversed(self.waypoints)))

    def min_distance_to_zero(self) -> float:
        return min(_segment_distance_to_zero(a, b) for a, b in self.segments())


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    evaluations: int
    tolerance: float


@dataclass(frozen=True)
class TwistorTrajectory:
    z: Tuple[complex, ...]
    epsilons: np.ndarray
    thetas: np.ndarray  # one row per sample
    stats: IntegratorStats = field(compare=False)

    @property
    def samples(self) -> List[Tuple[complex, np.ndarray]]:
        return [(complex(e), th) for e, th in zip(self.epsilons, self.thetas)]

    @property
    def final_theta(self) -> np.ndarray:
        return self.thetas[-1]

    def rows(self) -> List[List[float]]:
        """CSV rows eps_re, eps_im, theta1_re, theta1_im, ..."""
        out = []
        for e, th in zip(self.epsilons, self.thetas):
            row = [float(e.real), float(e.imag)]
            for v in th:
                row += [float(v.real), float(v.imag)]
            out.append(row)
        return out


def _drift(W: PlebanskiFunction, frame: DarbouxFrame, z: np.ndarray, eps: complex, theta: np.ndarray) -> np.ndarray:
    H = eval_jet(W, XPoint.of(z, theta), 2).theta_hessian()
    # Σ_{i,p} η_pq z_i H_ip
    coupling = frame.eta_array.T @ (H @ z)
    return -z / eps ** 2 - coupling / eps


def twistor_flow(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    x: XPoint,
    path: EpsilonPath,
    tol: Optional[float] = None,
) -> TwistorTrajectory:
    frame.check_point(x)
    tol = tolerance("twistor_tol") if tol is None else tol
    z = np.array(x.z, dtype=complex)
    nonzero = [abs(v) for v in z if v != 0]
    radius = tolerance("near_zero_epsilon_factor") * (min(nonzero) if nonzero else 1.0)
    if path.min_distance_to_zero() < radius:
        raise NearZeroEpsilon(
            f"ε path comes within {path.min_distance_to_zero():.3e} of 0 (guard radius {radius:.3e})"
        )
    W.require_regular(x)

    eps_samples: List[complex] = [path.waypoints[0]]
    theta_samples: List[np.ndarray] = [np.array(x.theta, dtype=complex)]
    steps = rejected = evaluations = 0
    theta = theta_samples[0]
    for a, b in path.segments():
        delta = b - a

        calls = [0]

        def rhs(s: float, th: np.ndarray) -> np.ndarray:
            calls[0] += 1
            return delta * _drift(W, frame, z, a + s * delta, th)

        solver = RK45(rhs, 0.0, theta, 1.0, rtol=tol, atol=tol * 1e-3)
        taken = 0
        while solver.status == "running":
            before = calls[0]
            message = solver.step()
            if solver.status == "failed":
                raise StepFailure(f"twistor integration failed on segment {a} -> {b}: {message}")
            # every RK45 attempt, accepted or not, costs the same number of evaluations
            attempts = (calls[0] - before) // _RK45_STAGES
            rejected += max(0, attempts - 1)
            taken += 1
            eps_samples.append(a + solver.t * delta)
            theta_samples.append(np.array(solver.y, dtype=complex))
        steps += taken
        evaluations += calls[0]
        theta = theta_samples[-1]
        logger.debug(f"[TWISTOR] segment {a} -> {b}: {taken} steps, {calls[0]} evaluations")

    stats = IntegratorStats(steps=steps, rejected=rejected, evaluations=evaluations, tolerance=tol)
    return TwistorTrajectory(
        z=tuple(complex(v) for v in z),
        epsilons=np.array(eps_samples, dtype=complex),
        thetas=np.array(theta_samples, dtype=complex),
        stats=stats,
    )


def _observable_fn(coordinate: Observable, n: int) -> Callable[[complex, np.ndarray, np.ndarray], complex]:
    if callable(coordinate):
        return coordinate
    tree = parse_expression(coordinate, n, allow_eps=True).tree

    def fn(eps: complex, z: np.ndarray, theta: np.ndarray) -> complex:
        env = point_env(tuple(z), tuple(theta))
        env["eps"] = eps
        return evaluate_complex(tree, env)

    return fn


def conserved_coordinate_defect(
    W: PlebanskiFunction,
    frame: DarbouxFrame,
    traj: TwistorTrajectory,
    coordinate: Observable,
) -> float:
    fn = _observable_fn(coordinate, frame.n)
    z = np.array(traj.z)
    ref = fn(complex(traj.epsilons[0]), z, traj.thetas[0])
    return max(abs(fn(complex(e), z, th) - ref) for e, th in zip(traj.epsilons, traj.thetas))


def conserved_coordinates(z: Sequence[complex], theta: Sequence[complex], eps: complex) -> np.ndarray:
    """x_i = θ_i − z_i/ε, the preferred coordinates of the flat model."""
    return np.asarray(theta, dtype=complex) - np.asarray(z, dtype=complex) / eps


def torus_shift(z: Sequence[complex], theta: Sequence[complex], eps: complex) -> np.ndarray:
    """θ_i ↦ θ_i + z_i/ε."""
    return np.asarray(theta, dtype=complex) + np.asarray(z, dtype=complex) / eps


def twisted_form_kernel_defect(
    W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint, s: complex, t: complex
) -> float:
    """max |Ω(s, t)(s·v(e_i) + t·h(e_i), u)| over directions i and basis vectors u."""
    hk = build_hk(W, frame, x)
    omega = twisted_form(forms(hk, frame), s, t)
    n = frame.n
    V = np.vstack([np.zeros((n, n)), np.eye(n)])
    span = s * V + t * hk.horizontal
    return float(np.max(np.abs(omega.T @ span)))


def kernel_span_defect(W: PlebanskiFunction, frame: DarbouxFrame, x: XPoint, eps: complex) -> float:
    """ker Ω(1, ε) against the span of the ε-pencil lift; both directions, dimension n each."""
    if eps == 0:
        raise InputError("ε must be nonzero")
    n = frame.n
    hk = build_hk(W, frame, x)
    omega = twisted_form(forms(hk, frame), 1.0, eps)
    kernel = scipy.linalg.null_space(omega, rcond=tolerance("kernel"))
    if kernel.shape[1] != n:
        logger.warning(f"[TWISTOR] kernel of Ω(1, {eps}) has dimension {kernel.shape[1]}, expected {n}")
        return float("inf")
    lift = pencil_lift(W, frame, x, 1.0 / eps).matrix()
    coeffs, *_ = np.linalg.lstsq(lift, kernel, rcond=None)
    into_span = float(np.max(np.abs(lift @ coeffs - kernel)))
    annihilated = float(np.max(np.abs(omega @ lift))) / max(1.0, float(np.max(np.abs(lift))))
    return max(into_span, annihilated)
