import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

logger = logging.getLogger(__name__)

_CONFIG_CACHE: Dict[str, Any] = {}


def load_json_config(rel_path: str) -> Dict[str, Any]:
    if rel_path in _CONFIG_CACHE:
        return _CONFIG_CACHE[rel_path]

    base = Path(__file__).resolve().parent
    p = base / rel_path
    try:
        with open(p, "r", encoding="utf-8-sig") as f:
            data = json.load(f)
    except (FileNotFoundError, json.JSONDecodeError) as e:
        raise RuntimeError(f"Failed to load or parse config file at {p}") from e

    _CONFIG_CACHE[rel_path] = data
    return data


def load_tolerances(overrides: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    """預設容差 + 呼叫端覆寫 (覆寫必須是已知名稱)"""
    merged = {k: float(v) for k, v in load_json_config("tolerances.json").items()}
    for name, value in (overrides or {}).items():
        if name not in merged:
            raise KeyError(f"Unknown tolerance '{name}'")
        merged[name] = float(value)
    return merged


def tolerance(name: str) -> float:
    tols = load_json_config("tolerances.json")
    if name not in tols:
        raise KeyError(f"Unknown tolerance '{name}'")
    return float(tols[name])


def load_conventions() -> Dict[str, str]:
    return dict(load_json_config("conventions.json"))


def clear_cache() -> None:
    """Clears the module-level cache. Useful for testing."""
    _CONFIG_CACHE.clear()
