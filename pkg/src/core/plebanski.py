# src/core/plebanski.py
"""
Plebański 函數 W(z, θ) - 文字載入、求值、正則性判斷、精確導數 jet
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, FrozenSet, Optional

import numpy as np

from src.config.config_loader import tolerance
from src.core.errors import InputError, Overflow, PoleHit
from src.core.expression import (
    ParsedExpression,
    evaluate_complex,
    evaluate_tree,
    parse_expression,
    point_env,
    singular_margin,
)
from src.core.frame import XPoint
from src.core.jet import Jet, TaylorJet, jet_exp, jet_log, jet_power, jet_space

logger = logging.getLogger(__name__)

MAX_JET_ORDER = 4


@dataclass(frozen=True)
class PlebanskiFunction:
    """W over variables z1..zn, t1..tn with declared symmetry flags and a pole-free predicate."""

    expression: ParsedExpression
    n: int
    guard: float = field(default_factory=lambda: tolerance("regularity_guard"))
    predicate: Optional[Callable[[XPoint], bool]] = field(default=None, compare=False)

    @classmethod
    def from_text(
        cls,
        text: str,
        n: int,
        *,
        predicate: Optional[Callable[[XPoint], bool]] = None,
        guard: Optional[float] = None,
    ) -> "PlebanskiFunction":
        parsed = parse_expression(text, n)
        if guard is None:
            return cls(parsed, n, predicate=predicate)
        return cls(parsed, n, guard=guard, predicate=predicate)

    @property
    def flags(self) -> FrozenSet[str]:
        return self.expression.flags

    @property
    def source(self) -> str:
        return self.expression.source

    def _check(self, x: XPoint) -> None:
        if x.n != self.n:
            raise InputError(f"XPoint has n = {x.n}, W is defined for n = {self.n}")

    def regular(self, x: XPoint) -> bool:
        self._check(x)
        if self.predicate is not None and not self.predicate(x):
            return False
        return singular_margin(self.expression.tree, point_env(x.z, x.theta)) > self.guard

    def require_regular(self, x: XPoint) -> None:
        if not self.regular(x):
            raise PoleHit(f"point z={x.z}, theta={x.theta} is outside the pole-free region of W", x)

    def evaluate(self, x: XPoint) -> complex:
        self.require_regular(x)
        value = evaluate_complex(self.expression.tree, point_env(x.z, x.theta))
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise Overflow(f"W is not finite at z={x.z}, theta={x.theta}")
        return value


def load_plebanski(path: str, n: int) -> PlebanskiFunction:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8-sig")
    except OSError as e:
        raise InputError(f"cannot read expression file {p}") from e
    W = PlebanskiFunction.from_text(text, n)
    logger.info(f"[JET] loaded W from {p} (flags: {sorted(W.flags)})")
    return W


def eval_jet(W: PlebanskiFunction, x: XPoint, max_order: int) -> Jet:
    if not 0 <= max_order <= MAX_JET_ORDER:
        raise InputError(f"max_order must be in 0..{MAX_JET_ORDER}, got {max_order}")
    W.require_regular(x)
    n = W.n
    space = jet_space(2 * n, max_order)
    env = {}
    for k in range(n):
        env[f"z{k + 1}"] = TaylorJet.variable(space, k, x.z[k])
        env[f"t{k + 1}"] = TaylorJet.variable(space, n + k, x.theta[k])
    result = evaluate_tree(W.expression.tree, env, exp=jet_exp, log=jet_log, power=jet_power)
    if not isinstance(result, TaylorJet):
        result = TaylorJet.constant(space, result)
    coef = np.array(result.coef, dtype=complex)
    if not np.all(np.isfinite(coef)):
        raise Overflow(f"non-finite derivative of W at z={x.z}, theta={x.theta}")
    coef.setflags(write=False)
    return Jet(point=x, order=max_order, space=space, coef=coef)
