# src/core/expression.py
"""
Plebański 函數的文字格式 - tokenizer, recursive-descent parser, expression tree

Grammar (right-associative ^):
    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' unary)?
    atom  := number | name | func '(' expr ')' | '(' expr ')'

Names: z1..zN, t1..tN (t = θ), optionally eps; constants i, pi; functions exp, log.
Numbers are kept exact (Fraction); constant sub-trees are folded exactly when possible.
"""

import cmath
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Tuple, Union

from src.core.errors import ExpressionSyntaxError

logger = logging.getLogger(__name__)

Number = Union[Fraction, complex]

FUNCTIONS = ("exp", "log")
SYMMETRY_FLAGS = ("periodic", "homogeneous", "odd")

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()])"
)
_VAR_RE = re.compile(r"^(z|t)([1-9][0-9]*)$")


# ---------------------------------------------------------------------------
# Tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Number


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Func]


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class ParsedExpression:
    """Parsed expression text plus the directives found next to it."""

    tree: Node
    source: str
    flags: FrozenSet[str]

    def variables(self) -> FrozenSet[str]:
        return frozenset(_collect_vars(self.tree))

    def max_index(self) -> int:
        best = 0
        for name in self.variables():
            m = _VAR_RE.match(name)
            if m:
                best = max(best, int(m.group(2)))
        return best


def _collect_vars(node: Node) -> List[str]:
    if isinstance(node, Var):
        return [node.name]
    if isinstance(node, Const):
        return []
    if isinstance(node, (Neg, Func)):
        return _collect_vars(node.arg)
    return _collect_vars(node.left) + _collect_vars(node.right)


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    lines = text.splitlines() or [""]
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0]
        if line.lstrip().startswith("@"):
            continue
        pos = 0
        while pos < len(line):
            m = _TOKEN_RE.match(line, pos)
            if m is None:
                raise ExpressionSyntaxError(f"unexpected character {line[pos]!r}", line_no, pos + 1)
            kind = m.lastgroup or ""
            if kind != "ws":
                tok_text = m.group(kind)
                if tok_text == "**":
                    tok_text = "^"
                tokens.append(Token(kind, tok_text, line_no, pos + 1))
            pos = m.end()
    tokens.append(Token("end", "", len(lines), len(lines[-1]) + 1))
    return tokens


def _read_flags(text: str) -> FrozenSet[str]:
    flags = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped.startswith("@"):
            continue
        head, _, rest = stripped.partition(" ")
        if head != "@flags":
            raise ExpressionSyntaxError(f"unknown directive {head!r}", line_no, raw.index("@") + 1)
        for word in rest.replace(",", " ").split():
            if word not in SYMMETRY_FLAGS:
                raise ExpressionSyntaxError(
                    f"unknown symmetry flag {word!r}", line_no, raw.index(word) + 1
                )
            flags.add(word)
    return frozenset(flags)


class _Parser:
    def __init__(self, tokens: List[Token], n: Optional[int], allow_eps: bool):
        self.tokens = tokens
        self.pos = 0
        self.n = n
        self.allow_eps = allow_eps

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, message: str, tok: Optional[Token] = None) -> ExpressionSyntaxError:
        t = tok or self.tok
        return ExpressionSyntaxError(message, t.line, t.column)

    def _advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def _expect(self, text: str) -> Token:
        if self.tok.text != text:
            found = self.tok.text or "end of input"
            raise self._fail(f"expected {text!r}, found {found!r}")
        return self._advance()

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self._fail("empty expression")
        node = self.expr()
        if self.tok.kind != "end":
            raise self._fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self._advance().text
            node = _fold(BinOp(op, node, self.term()))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self._advance().text
            node = _fold(BinOp(op, node, self.unary()))
        return node

    def unary(self) -> Node:
        if self.tok.text == "-":
            self._advance()
            return _fold(Neg(self.unary()))
        if self.tok.text == "+":
            self._advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.text == "^":
            self._advance()
            return _fold(BinOp("^", base, self.unary()))
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "number":
            self._advance()
            return Const(Fraction(t.text))
        if t.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if t.kind == "name":
            self._advance()
            if t.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return _fold(Func(t.text, arg))
            if t.text == "i":
                return Const(1j)
            if t.text == "pi":
                return Const(complex(math.pi))
            if t.text == "eps":
                if not self.allow_eps:
                    raise self._fail("variable 'eps' is only allowed in observables", t)
                return Var("eps")
            m = _VAR_RE.match(t.text)
            if m is None:
                raise self._fail(f"unknown name {t.text!r}", t)
            if self.n is not None and int(m.group(2)) > self.n:
                raise self._fail(f"variable {t.text!r} exceeds n = {self.n}", t)
            return Var(t.text)
        found = t.text or "end of input"
        raise self._fail(f"unexpected {found!r}")


def parse_expression(
    text: str, n: Optional[int] = None, *, allow_eps: bool = False
) -> ParsedExpression:
    flags = _read_flags(text)
    tree = _Parser(tokenize(text), n, allow_eps).parse()
    logger.debug(f"[EXPR] parsed expression with flags {sorted(flags)}")
    return ParsedExpression(tree=tree, source=text, flags=flags)


# ---------------------------------------------------------------------------
# Constant folding (exact where the inputs are exact)
# ---------------------------------------------------------------------------

def _fold(node: Node) -> Node:
    if isinstance(node, Neg) and isinstance(node.arg, Const):
        return Const(-node.arg.value)
    if isinstance(node, BinOp) and isinstance(node.left, Const) and isinstance(node.right, Const):
        a, b = node.left.value, node.right.value
        if node.op == "+":
            return Const(a + b)
        if node.op == "-":
            return Const(a - b)
        if node.op == "*":
            return Const(a * b)
        if node.op == "/" and b != 0:
            return Const(a / b)
        if node.op == "^" and isinstance(b, Fraction) and b.denominator == 1 and isinstance(a, Fraction):
            if a != 0 or b >= 0:
                return Const(a ** int(b))
    return node


# ---------------------------------------------------------------------------
# Evaluation over any scalar-like algebra (complex numbers or Taylor jets)
# ---------------------------------------------------------------------------

def integer_exponent(node: Node) -> Optional[int]:
    if isinstance(node, Const) and isinstance(node.value, Fraction) and node.value.denominator == 1:
        return int(node.value)
    return None


def _c(value: Number) -> complex:
    return complex(value)


def evaluate_tree(
    node: Node,
    env: Dict[str, Any],
    *,
    exp: Callable[[Any], Any],
    log: Callable[[Any], Any],
    power: Callable[[Any, Any], Any],
    guard: Optional[Callable[[str, Any], None]] = None,
) -> Any:
    """Post-order evaluation; `guard(kind, value)` sees every denominator / log / pow base."""

    def ev(nd: Node) -> Any:
        if isinstance(nd, Const):
            return _c(nd.value)
        if isinstance(nd, Var):
            return env[nd.name]
        if isinstance(nd, Neg):
            return -ev(nd.arg)
        if isinstance(nd, Func):
            a = ev(nd.arg)
            if nd.name == "exp":
                return exp(a)
            if guard:
                guard("log", a)
            return log(a)
        a = ev(nd.left)
        if nd.op == "^":
            k = integer_exponent(nd.right)
            if k is not None:
                if k < 0 and guard:
                    guard("pow", a)
                return a ** k
            b = ev(nd.right)
            if guard:
                guard("pow", a)
            return power(a, b)
        b = ev(nd.right)
        if nd.op == "+":
            return a + b
        if nd.op == "-":
            return a - b
        if nd.op == "*":
            return a * b
        if guard:
            guard("div", b)
        return a / b

    return ev(node)


def evaluate_complex(node: Node, env: Dict[str, complex]) -> complex:
    return complex(
        evaluate_tree(
            node,
            env,
            exp=cmath.exp,
            log=cmath.log,
            power=lambda a, b: cmath.exp(b * cmath.log(a)),
        )
    )


def singular_margin(node: Node, env: Dict[str, complex]) -> float:
    """Smallest |value| over denominators, log arguments and negative/non-integer pow bases."""
    margins: List[float] = [math.inf]

    def guard(kind: str, value: Any) -> None:
        margins.append(abs(complex(value)))

    try:
        evaluate_tree(
            node,
            env,
            exp=cmath.exp,
            log=lambda a: cmath.log(a) if a != 0 else complex(0.0),
            power=lambda a, b: cmath.exp(b * cmath.log(a)) if a != 0 else complex(0.0),
            guard=guard,
        )
    except (ZeroDivisionError, OverflowError, ValueError):
        return 0.0
    return min(margins)


def point_env(z: Tuple[complex, ...], theta: Tuple[complex, ...]) -> Dict[str, complex]:
    env: Dict[str, complex] = {}
    for k, v in enumerate(z, start=1):
        env[f"z{k}"] = v
    for k, v in enumerate(theta, start=1):
        env[f"t{k}"] = v
    return env
