# src/spectral/curve.py
"""
Hyperelliptic spectral curve y² = Q(x) - 分支點 (branch points)

Q is given by its coefficients in ascending order, Q(x) = Σ c_k x^k.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from src.config.config_loader import tolerance
from src.core.errors import InputError, RepeatedRoot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralData:
    coefficients: Tuple[complex, ...]
    branch_points: Tuple[complex, ...]
    resolved: bool = True

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> complex:
        return self.coefficients[-1]

    def Q(self, x: complex) -> complex:
        return complex(npoly.polyval(x, self.coefficients))

    def scale(self) -> float:
        return max(1.0, max(abs(r) for r in self.branch_points))

    def min_separation(self) -> float:
        roots = self.branch_points
        return min(
            (abs(roots[i] - roots[j]) for i in range(len(roots)) for j in range(i + 1, len(roots))),
            default=float("inf"),
        )

    def to_dict(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "branch_points": list(self.branch_points),
            "resolved": self.resolved,
        }


def _polish(coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """One Newton step per root."""
    deriv = npoly.polyder(coeffs)
    out = roots.copy()
    for k, r in enumerate(roots):
        d = npoly.polyval(r, deriv)
        if d != 0:
            out[k] = r - npoly.polyval(r, coeffs) / d
    return out


def branch_points(Q: Sequence[complex]) -> SpectralData:
    coeffs = np.trim_zeros(np.asarray(Q, dtype=complex), "b")
    if coeffs.size == 0:
        raise InputError("Q must be a nonzero polynomial")
    if not np.all(np.isfinite(coeffs)):
        raise InputError("Q has non-finite coefficients")
    if coeffs.size < 3:
        raise InputError(f"Q must have degree at least 2, got degree {coeffs.size - 1}")

    roots = _polish(coeffs, npoly.polyroots(coeffs).astype(complex))
    scale = max(1.0, float(np.max(np.abs(roots))))
    sep = tolerance("root_separation")
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) <= sep * scale:
                raise RepeatedRoot(f"roots {roots[i]:.6g} and {roots[j]:.6g} of Q are not separated")
    ordered = sorted((complex(r) for r in roots), key=lambda r: (round(r.real, 9), round(r.imag, 9)))
    logger.debug(f"[SPECTRAL] degree {coeffs.size - 1}, branch points {ordered}")
    return SpectralData(tuple(complex(c) for c in coeffs), tuple(ordered), True)


def scale_curve(data: SpectralData, t: complex) -> SpectralData:
    """Q ↦ t²Q; branch points are unchanged and every period scales by t."""
    if t == 0:
        raise InputError("scale factor must be nonzero")
    return SpectralData(tuple(t * t * c for c in data.coefficients), data.branch_points, data.resolved)
