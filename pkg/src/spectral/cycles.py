# src/spectral/cycles.py
"""
閉合折線 cycles 與 √Q 的連續分支追蹤

A cycle is a closed polyline with a starting sheet label. Sheet "+" means the principal square
root of Q at the first vertex; "−" is its negative. Along each straight segment every factor
x − r_k stays inside a half-plane, so √Q is tracked as a product of rotated principal roots and
the overall sign is matched at each vertex.

Cycle files hold one cycle per line: the sheet label, then the vertices (`a+bi`), separated by
commas or blanks. `#` starts a comment.
"""

import cmath
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.config.config_loader import tolerance
from src.core.errors import InputError, OddCycle, TooClose
from src.spectral.curve import SpectralData

logger = logging.getLogger(__name__)

_IMAG_ONLY = re.compile(r"^([+-]?)i$")


def parse_complex(token: str) -> complex:
    t = token.strip().replace(" ", "")
    m = _IMAG_ONLY.match(t)
    if m:
        return complex(0, -1 if m.group(1) == "-" else 1)
    t = re.sub(r"(?<=[+-])i$", "1i", t).replace("i", "j")
    try:
        return complex(t)
    except ValueError as e:
        raise InputError(f"malformed complex number {token!r}") from e


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


@dataclass(frozen=True)
class Cycle:
    vertices: Tuple[complex, ...]
    sheet: int = 1
    name: str = ""

    def __post_init__(self) -> None:
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts = verts[:-1]
        if len(verts) < 3:
            raise InputError(f"cycle {self.name or '?'} needs at least three distinct vertices")
        if self.sheet not in (1, -1):
            raise InputError(f"sheet must be +1 or -1, got {self.sheet!r}")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def of(cls, vertices: Sequence[complex], sheet: str = "+", name: str = "") -> "Cycle":
        if sheet not in ("+", "-"):
            raise InputError(f"sheet label must be '+' or '-', got {sheet!r}")
        return cls(tuple(vertices), 1 if sheet == "+" else -1, name)

    @property
    def label(self) -> str:
        return "+" if self.sheet == 1 else "-"

    def segments(self) -> List[Tuple[complex, complex]]:
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    def flipped(self) -> "Cycle":
        return Cycle(self.vertices, -self.sheet, self.name)

    def reversed(self) -> "Cycle":
        """Same loop, opposite orientation, same starting vertex."""
        v = self.vertices
        return Cycle((v[0],) + tuple(reversed(v[1:])), self.sheet, self.name)

    def to_line(self) -> str:
        return f"{self.label} " + ", ".join(format_complex(z) for z in self.vertices)


def read_cycle_file(path: str) -> List[Cycle]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8-sig")
    except OSError as e:
        raise InputError(f"cannot read cycle file {p}") from e
    cycles = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, _, rest = line.partition(" ")
        tokens = [t for t in re.split(r"[,\s]+", rest) if t]
        try:
            cycles.append(Cycle.of([parse_complex(t) for t in tokens], label, name=f"{p.name}:{lineno}"))
        except InputError as e:
            raise InputError(f"{p}:{lineno}: {e}") from e
    if not cycles:
        raise InputError(f"cycle file {p} holds no cycles")
    logger.info(f"[SPECTRAL] read {len(cycles)} cycles from {p}")
    return cycles


def write_cycle_file(path: str, cycles: Sequence[Cycle]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text("".join(c.to_line() + "\n" for c in cycles), encoding="utf-8")
    return p


def _segment_distance(a: complex, b: complex, r: complex) -> float:
    d = b - a
    if d == 0:
        return abs(a - r)
    s = min(1.0, max(0.0, ((r - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(a + s * d - r)


def check_clearance(data: SpectralData, cycle: Cycle) -> float:
    guard = tolerance("branch_guard") * data.scale()
    dist = min(_segment_distance(a, b, r) for a, b in cycle.segments() for r in data.branch_points)
    if dist <= guard:
        raise TooClose(f"cycle {cycle.name or '?'} passes within {dist:.3e} of a branch point")
    return dist


def winding_numbers(data: SpectralData, cycle: Cycle) -> Tuple[int, ...]:
    """Winding number of the cycle around each branch point."""
    check_clearance(data, cycle)
    out = []
    for r in data.branch_points:
        total = sum(cmath.phase((b - r) / (a - r)) for a, b in cycle.segments())
        out.append(int(round(total / (2.0 * math.pi))))
    return tuple(out)


def sheet_parity(data: SpectralData, cycle: Cycle) -> str:
    """'even' when √Q returns to its starting sheet, 'odd' when the lift joins the two sheets."""
    total = sum(winding_numbers(data, cycle))
    return "odd" if total % 2 else "even"


class CycleBranch:
    """Continuous √Q along a cycle."""

    def __init__(self, data: SpectralData, cycle: Cycle, start: Optional[complex] = None):
        if sheet_parity(data, cycle) == "odd":
            raise OddCycle(f"cycle {cycle.name or '?'} does not close on the double cover")
        self.data = data
        self.cycle = cycle
        self.roots = np.array(data.branch_points, dtype=complex)
        self.sqrt_lead = cmath.sqrt(data.leading)
        self._rotations: List[np.ndarray] = []
        self._signs: List[int] = []

        segs = self._segments = cycle.segments()
        v0 = segs[0][0]
        ref = cmath.sqrt(data.Q(v0)) * cycle.sheet if start is None else start
        prev = None
        for k, (a, b) in enumerate(segs):
            mid = 0.5 * (a + b)
            self._rotations.append(np.angle(mid - self.roots))
            self._signs.append(1)
            here = self.value(k, 0.0)
            target = ref if prev is None else prev
            if abs(here - target) > abs(here + target):
                self._signs[k] = -1
            prev = self.value(k, 1.0)
        self.start = self.value(0, 0.0)

    def value(self, k: int, s: float) -> complex:
        return complex(self.values(k, np.array([s]))[0])

    def values(self, k: int, s: np.ndarray) -> np.ndarray:
        a, b = self._segments[k]
        x = a + np.asarray(s)[..., None] * (b - a)
        alpha = self._rotations[k]
        w = (x - self.roots) * np.exp(-1j * alpha)
        factors = np.exp(0.5j * alpha) * np.sqrt(w)
        return self._signs[k] * self.sqrt_lead * np.prod(factors, axis=-1)


def _ellipse(a: complex, b: complex, margin: float, vertices: int) -> List[complex]:
    centre = 0.5 * (a + b)
    direction = (b - a) / abs(b - a)
    major = 0.5 * abs(b - a) + margin
    angles = 2.0 * np.pi * (np.arange(vertices) + 0.5) / vertices
    return [complex(centre + direction * (major * np.cos(t) + 1j * margin * np.sin(t))) for t in angles]


def standard_cycles(data: SpectralData, vertices: int = 64) -> List[Cycle]:
    """Counterclockwise ellipses around consecutive branch points (no canonicity claim)."""
    roots = data.branch_points
    cycles = []
    for k in range(len(roots) - 1):
        a, b = roots[k], roots[k + 1]
        others = [r for j, r in enumerate(roots) if j not in (k, k + 1)]
        clearance = min((_segment_distance(a, b, r) for r in others), default=float("inf"))
        margin = 0.4 * min(abs(b - a), clearance)
        cycles.append(Cycle(tuple(_ellipse(a, b, margin, vertices)), 1, f"cut{k + 1}"))
    logger.debug(f"[SPECTRAL] {len(cycles)} standard cycles")
    return cycles
