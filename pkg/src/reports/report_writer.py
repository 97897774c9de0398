# src/reports/report_writer.py
"""
報告輸出 - report.json (含 conventions 區塊與 schema 驗證) 與 CSV 軌跡
"""

import csv
import dataclasses
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import jsonschema
import numpy as np

from src.config.config_loader import load_conventions, load_json_config

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]


def _float(x: float) -> Union[float, str]:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    # 15 significant digits keep reports stable across platforms
    return float(format(x, ".15g"))


def to_jsonable(obj: Any) -> Any:
    """complex → [re, im], Fraction → "p/q", arrays → lists, dataclasses through to_dict/asdict."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


@dataclasses.dataclass(frozen=True)
class Check:
    name: str
    value: Number
    tolerance: Number
    ok: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": to_jsonable(self.value),
            "tolerance": to_jsonable(self.tolerance),
            "ok": self.ok,
        }


@dataclasses.dataclass
class Report:
    subcommand: str
    precision: str = "double"
    seed: int = 0
    tolerances: Dict[str, float] = dataclasses.field(default_factory=dict)
    results: Dict[str, Any] = dataclasses.field(default_factory=dict)
    checks: List[Check] = dataclasses.field(default_factory=list)

    def check(self, name: str, value: Number, tolerance: Number) -> Check:
        """Record a defect; exact (Fraction) defects pass only at zero."""
        if isinstance(value, Fraction):
            ok = value == 0
        else:
            ok = bool(np.isfinite(value)) and float(value) <= float(tolerance)
        c = Check(name, value, tolerance, ok)
        self.checks.append(c)
        if not ok:
            logger.warning(f"[REPORT] check '{name}' failed: {value} > {tolerance}")
        return c

    def require(self, name: str, passed: bool) -> Check:
        """Record a yes/no verdict as a 0/1 check."""
        return self.check(name, 0.0 if passed else 1.0, 0.5)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> List[Check]:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "ok": self.ok,
            "precision": self.precision,
            "seed": self.seed,
            "tolerances": to_jsonable(self.tolerances),
            "conventions": load_conventions(),
            "results": to_jsonable(self.results),
            "checks": [c.to_dict() for c in self.checks],
        }

    def summary(self) -> str:
        failed = self.failed()
        if not failed:
            return f"{self.subcommand}: ok ({len(self.checks)} checks)"
        names = ", ".join(c.name for c in failed)
        return f"{self.subcommand}: {len(failed)}/{len(self.checks)} checks failed ({names})"


def render_report(report: Report) -> str:
    payload = report.to_dict()
    try:
        jsonschema.validate(instance=payload, schema=load_json_config("report_schema.json"))
    except jsonschema.ValidationError as e:
        raise RuntimeError(f"report does not match its schema: {e.message}") from e
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class ReportWriter:
    def __init__(self, output_dir: Union[str, Path] = "out"):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_report(self, report: Report, name: str = "report.json") -> Path:
        path = self.output_dir / name
        path.write_text(render_report(report), encoding="utf-8")
        logger.info(f"[REPORT] wrote {path} ({'ok' if report.ok else 'defects above tolerance'})")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.output_dir / name
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
        logger.info(f"[REPORT] wrote {path}")
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.output_dir / name
        path.write_text(text, encoding="utf-8")
        return path


def trajectory_header(n: int) -> List[str]:
    cols = ["eps_re", "eps_im"]
    for i in range(1, n + 1):
        cols += [f"theta{i}_re", f"theta{i}_im"]
    return cols


def read_report(path: Union[str, Path]) -> Optional[Dict[str, Any]]:
    p = Path(path)
    if not p.exists():
        return None
    return json.loads(p.read_text(encoding="utf-8"))
