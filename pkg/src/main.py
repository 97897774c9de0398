# src/main.py
"""
joycekit - Joyce 結構驗證工具組 主程式入口

    joycekit heavenly-check --w W.txt --d 1 --grid theta:-0.5:0.5:5
    joycekit wallcross --order 12
    joycekit periods --q "1,0,-1"

Exit codes: 0 when every check is within tolerance, 1 when a defect exceeds it (or a numerical
step fails), 2 on input errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

# Add project root to Python path
ROOT_DIR = Path(__file__).resolve().parent.parent
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from src.cli.handlers import handler_for  # noqa: E402
from src.cli.selftest import selftest  # noqa: E402
from src.config.settings import KitSettings, RunConfig  # noqa: E402
from src.core.errors import ComputationError, ExpressionSyntaxError, InputError  # noqa: E402
from src.reports.report_writer import Report, ReportWriter  # noqa: E402

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_DEFECT, EXIT_INPUT = 0, 1, 2

# CLI flags that name input files
_INPUT_FLAGS = {"w": "w", "rays": "rays", "cycles": "cycles"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="joycekit", description="Joyce structure verification toolkit")
    parser.add_argument("--output", help="output directory (default: JOYCEKIT_OUTPUT_DIR or ./out)")
    parser.add_argument("--seed", type=int, help="seed for sampling grids")
    parser.add_argument("--precision", choices=("double", "extended"),
                        help="precision mode (default: JOYCEKIT_PRECISION or double)")
    parser.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                        help="override a named tolerance; repeatable")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def geometry(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--w", required=True, help="expression file for W(z, θ)")
        p.add_argument("--frame", "--d", dest="d", type=int, default=1, help="half-dimension d (n = 2d)")
        p.add_argument("--omega", help="integral symplectic matrix as JSON rows")
        p.add_argument("--z0", help="base z for grids, e.g. '1,1'")
        return p

    p = geometry("heavenly-check", "heavenly residual and pencil flatness on a grid")
    p.add_argument("--grid", default="theta:-0.5:0.5:5")
    p = geometry("hk-verify", "complex hyperkähler identities and closedness")
    p.add_argument("--grid", default="random:4:0.3")
    p = geometry("lagrangian-check", "good-Lagrangian verdict for a coordinate block")
    p.add_argument("--fix", "--values", dest="values", help="values of the d fixed z coordinates, e.g. '1,1'")
    p.add_argument("--fixed", help="0-based fixed z indices (default: the last d), e.g. '2,3'")
    p.add_argument("--grid", default="random:6:0.3", help="fibre samples around B")
    p = geometry("twistor", "integrate a twistor line along an ε path")
    p.add_argument("--x", help="point of X: n values of z, optionally followed by n values of θ")
    p.add_argument("--z", default="1")
    p.add_argument("--theta", default="0")
    p.add_argument("--path", default="1,0.25", help="ε waypoints, e.g. '1,0.5+0.5i,0.25'")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("stokes", help="Stokes rays, factors and monodromy of y' = (U/ε² + V/ε)y")
    p.add_argument("--u", "--U", dest="u", help="U as JSON rows, or its eigenvalues '1,-1' for a diagonal U")
    p.add_argument("--v", "--V", dest="v", help="V as JSON rows (default: 0)")
    p.add_argument("--radius", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("wallcross", help="pentagon identity and ray-content automorphisms")
    p.add_argument("--rank", type=int)
    p.add_argument("--pairing", help="integer skew pairing as JSON rows (overrides the ray file)")
    p.add_argument("--rays", help="ray-content JSON file")
    p.add_argument("--order", type=int, help="truncation order N (default: ray file order or 12)")

    p = sub.add_parser("periods", help="periods of √Q dx on y² = Q(x)")
    p.add_argument("--q", default="1,0,-1", help="coefficients of Q, constant term first")
    p.add_argument("--cycles", help="cycle file (default: ellipses around consecutive roots)")
    p.add_argument("--tol", type=float)

    sub.add_parser("selftest", help="run the acceptance suite")
    return parser


def _parse_tolerances(items: List[str]) -> Dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"tolerance override {item!r} must read NAME=VALUE")
        try:
            out[name.strip()] = float(value)
        except ValueError as e:
            raise InputError(f"tolerance override {item!r} has a non-numeric value") from e
    return out


def config_from_args(args: argparse.Namespace, settings: Optional[KitSettings] = None) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None}
    inputs = {key: str(values.pop(flag)) for flag, key in _INPUT_FLAGS.items() if flag in values}
    subcommand = values.pop("subcommand")
    overrides = _parse_tolerances(values.pop("tolerance", []))
    output = values.pop("output", None)
    seed = values.pop("seed", None)
    precision = values.pop("precision", None)
    try:
        config = RunConfig.from_settings(
            subcommand,
            settings=settings,
            inputs=inputs,
            options=values,
            tolerances=overrides,
            output_dir=Path(output) if output else None,
            seed=seed,
        )
        if precision:
            config = RunConfig.model_validate({**config.model_dump(), "precision": precision})
        return config
    except ValidationError as e:
        raise InputError(f"invalid run configuration: {e.errors()[0]['msg']}") from e


def run(config: RunConfig) -> int:
    """Dispatch one subcommand, write report.json, return the exit code."""
    try:
        config.resolved_tolerances()
    except KeyError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return EXIT_INPUT
    report = Report(
        subcommand=config.subcommand,
        precision=config.precision,
        seed=config.seed,
        tolerances=config.resolved_tolerances(),
    )
    writer = ReportWriter(config.output_dir)
    handler = selftest if config.subcommand == "selftest" else handler_for(config.subcommand)
    if handler is None:
        print(f"error: unknown subcommand '{config.subcommand}'", file=sys.stderr)
        return EXIT_INPUT
    try:
        handler(config, report, writer)
    except ExpressionSyntaxError as e:
        print(f"error: malformed expression, {e}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as e:
        logger.error(f"[CLI] computation failed ({type(e).__name__}): {e}")
        report.results["error"] = f"{type(e).__name__}: {e}"
        report.require("computation_completed", False)
    writer.write_report(report)
    logger.info(f"[CLI] {report.summary()}")
    return EXIT_OK if report.ok else EXIT_DEFECT


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    settings = KitSettings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args, settings)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    code = run(config)
    if code != EXIT_INPUT:
        print(f"{config.subcommand}: {'ok' if code == EXIT_OK else 'defects above tolerance'} -> {config.output_dir / 'report.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
