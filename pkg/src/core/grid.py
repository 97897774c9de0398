# src/core/grid.py
"""Sample grids of XPoints for the CLI checks."""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors import InputError
from src.core.frame import XPoint

logger = logging.getLogger(__name__)

GRID_KINDS = ("theta", "full", "random")


@dataclass(frozen=True)
class GridSpec:
    """`theta:LO:HI:K`, `full:LO:HI:K` or `random:COUNT:RADIUS`."""

    kind: str
    lo: float = -0.5
    hi: float = 0.5
    count: int = 3
    radius: float = 0.5

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.strip().split(":")
        kind = parts[0]
        try:
            if kind in ("theta", "full") and len(parts) == 4:
                return cls(kind, float(parts[1]), float(parts[2]), int(parts[3]))
            if kind == "random" and len(parts) == 3:
                return cls(kind, count=int(parts[1]), radius=float(parts[2]))
        except ValueError as e:
            raise InputError(f"malformed grid spec {text!r}") from e
        raise InputError(
            f"malformed grid spec {text!r}; expected theta:LO:HI:K, full:LO:HI:K or random:COUNT:RADIUS"
        )


def sample_points(
    spec: GridSpec,
    n: int,
    *,
    seed: int = 0,
    z0: Optional[Sequence[complex]] = None,
) -> List[XPoint]:
    base_z = tuple(complex(v) for v in (z0 if z0 is not None else [1.0] * n))
    if len(base_z) != n:
        raise InputError(f"base point z0 has length {len(base_z)}, expected {n}")

    if spec.kind == "theta":
        axis = np.linspace(spec.lo, spec.hi, spec.count)
        pts = [XPoint.of(base_z, th) for th in itertools.product(axis, repeat=n)]
    elif spec.kind == "full":
        axis = np.linspace(spec.lo, spec.hi, spec.count)
        pts = [
            XPoint.of(np.add(base_z, v[:n]), v[n:])
            for v in itertools.product(axis, repeat=2 * n)
        ]
    elif spec.kind == "random":
        rng = np.random.default_rng(seed)
        pts = []
        for _ in range(spec.count):
            dz = spec.radius * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
            th = spec.radius * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
            pts.append(XPoint.of(np.add(base_z, dz), th))
    else:
        raise InputError(f"unknown grid kind {spec.kind!r}")
    logger.debug(f"[GRID] {spec.kind} grid with {len(pts)} points (n = {n})")
    return pts
