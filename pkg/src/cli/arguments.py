# src/cli/arguments.py
"""命令列參數的小型解析器 - 複數向量、矩陣、索引清單"""

import json
from typing import Any, List, Optional, Sequence, Tuple

from src.config.settings import RunConfig
from src.core.errors import InputError
from src.spectral.cycles import parse_complex


def parse_vector(text: str) -> List[complex]:
    """`1, -0.5, 2+1i` → complex list."""
    items = [t for t in text.replace(";", ",").split(",") if t.strip()]
    if not items:
        raise InputError(f"empty vector {text!r}")
    return [parse_complex(t) for t in items]


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise InputError(f"expected comma-separated integers, got {text!r}") from e


def _entry(value: Any) -> complex:
    if isinstance(value, str):
        return parse_complex(value)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise InputError(f"matrix entries must be numbers or 'a+bi' strings, got {value!r}")


def parse_matrix(text: str) -> List[List[complex]]:
    """JSON rows, entries numbers or `a+bi` strings."""
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"matrix is not valid JSON: {text!r}") from e
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError(f"matrix must be a JSON list of rows, got {text!r}")
    return [[_entry(v) for v in r] for r in rows]


def parse_int_matrix(text: str) -> List[List[int]]:
    rows = parse_matrix(text)
    out = []
    for r in rows:
        row = []
        for v in r:
            if v.imag != 0 or v.real != int(v.real):
                raise InputError(f"expected an integer matrix, got entry {v}")
            row.append(int(v.real))
        out.append(row)
    return out


def option(config: RunConfig, name: str, default: Optional[Any] = None) -> Any:
    value = config.options.get(name)
    return default if value is None else value


def require_input(config: RunConfig, name: str) -> str:
    path = config.inputs.get(name)
    if not path:
        raise InputError(f"subcommand '{config.subcommand}' needs --{name}")
    return path


def pad(values: Sequence[complex], n: int, fill: complex = 0.0) -> List[complex]:
    vals = list(values)
    if len(vals) > n:
        raise InputError(f"expected at most {n} values, got {len(vals)}")
    return vals + [fill] * (n - len(vals))


def parse_point(text: str, n: int) -> Tuple[List[complex], List[complex]]:
    """`z_1..z_n` or `z_1..z_n, θ_1..θ_n`; θ defaults to 0."""
    values = parse_vector(text)
    if len(values) == n:
        return values, [0.0] * n
    if len(values) == 2 * n:
        return values[:n], values[n:]
    raise InputError(f"a point needs {n} values of z or {2 * n} values of z and θ, got {len(values)}")


def parse_square(text: str) -> List[List[complex]]:
    """A JSON square matrix, or a comma list read as the diagonal."""
    if text.lstrip().startswith("["):
        rows = parse_matrix(text)
        if any(len(r) != len(rows) for r in rows):
            raise InputError(f"expected a square matrix, got {text!r}")
        return rows
    diag = parse_vector(text)
    return [[diag[i] if i == j else 0.0 for j in range(len(diag))] for i in range(len(diag))]
