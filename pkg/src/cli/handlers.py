# src/cli/handlers.py
"""
子命令處理器 - 每個處理器讀取 RunConfig，把結果與檢查寫進 Report

Checks carry their tolerance; the exit code is decided from them by `src.main.run`.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.cli.arguments import (
    option,
    pad,
    parse_int_list,
    parse_int_matrix,
    parse_matrix,
    parse_point,
    parse_square,
    parse_vector,
    require_input,
)
from src.config.settings import RunConfig
from src.core.errors import ComputationError, InputError
from src.core.frame import DarbouxFrame, XPoint, make_frame
from src.core.grid import GridSpec, sample_points
from src.core.plebanski import PlebanskiFunction, load_plebanski
from src.geometry import heavenly, hyperkahler, lagrangian, twistor
from src.reports.report_writer import Report, ReportWriter, trajectory_header
from src.reports.svg_plots import stokes_rays_svg, trajectory_svg
from src.spectral.curve import branch_points
from src.spectral.cycles import read_cycle_file, sheet_parity, standard_cycles, write_cycle_file
from src.spectral.periods import intersection_matrix, period_jacobian_rank, period_vector
from src.stokes.problem import StokesProblem
from src.stokes.solutions import stokes_data
from src.wallcrossing.automorphism import (
    load_ray_file,
    parse_ray_data,
    pentagon_check,
    poisson_defect,
)

logger = logging.getLogger(__name__)

Handler = Callable[[RunConfig, Report, ReportWriter], None]


def _frame_and_w(config: RunConfig) -> Tuple[DarbouxFrame, PlebanskiFunction]:
    d = int(option(config, "d", 1))
    omega = option(config, "omega")
    frame = make_frame(d, parse_int_matrix(omega) if omega else None)
    W = load_plebanski(require_input(config, "w"), frame.n)
    return frame, W


def _z0(config: RunConfig, n: int) -> List[complex]:
    text = option(config, "z0")
    return pad(parse_vector(text), n, 1.0) if text else [1.0] * n


def _regular_points(config: RunConfig, W: PlebanskiFunction, frame: DarbouxFrame, default: str) -> List[XPoint]:
    spec = GridSpec.parse(option(config, "grid", default))
    points = [x for x in sample_points(spec, frame.n, seed=config.seed, z0=_z0(config, frame.n)) if W.regular(x)]
    if not points:
        raise InputError(f"no regular points of W on the grid {spec}")
    return points


# ---------------------------------------------------------------------------
# heavenly-check
# ---------------------------------------------------------------------------

def heavenly_check(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    tols = config.resolved_tolerances()
    frame, W = _frame_and_w(config)
    spec = GridSpec.parse(option(config, "grid", "theta:-0.5:0.5:5"))
    points = sample_points(spec, frame.n, seed=config.seed, z0=_z0(config, frame.n))
    stats = heavenly.grid_report(W, frame, points)
    report.results.update({"W": W.source, "grid": option(config, "grid", "theta:-0.5:0.5:5"), **stats})
    report.require("regular_points", stats["points"] > 0)
    report.check("heavenly_residual", stats["max_residual"], tols["exact_identity"])
    report.check("flatness_defect", stats["max_flatness_defect"], tols["flatness"])

    regular = [x for x in points if W.regular(x)][:8]
    try:
        sym = heavenly.check_symmetries(W, frame, regular)
    except ComputationError as e:
        # shifted or rescaled samples can leave the pole-free region
        report.results["symmetry_defects"] = f"{type(e).__name__}: {e}"
        for flag in sorted(W.flags):
            report.require(f"{flag}_defect", False)
        return
    report.results["symmetry_defects"] = sym.to_dict()
    named = {"periodic": sym.periodic_defect, "homogeneous": sym.homogeneity_defect, "odd": sym.oddness_defect}
    for flag in sorted(W.flags):
        if flag in named:
            report.check(f"{flag}_defect", named[flag], tols["flatness"])


# ---------------------------------------------------------------------------
# hk-verify
# ---------------------------------------------------------------------------

def hk_verify(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    tols = config.resolved_tolerances()
    frame, W = _frame_and_w(config)
    points = _regular_points(config, W, frame, "random:4:0.3")
    worst: Dict[str, float] = {}
    for x in points:
        for name, value in hyperkahler.suite(W, frame, x).items():
            worst[name] = max(worst.get(name, 0.0), value)
    for name in sorted(worst):
        report.check(name, worst[name], tols["exact_identity"])

    h = tols["fd_step"]
    x0 = points[0]
    closed: Dict[str, float] = {}
    halved: Dict[str, float] = {}
    for which in hyperkahler.FORM_NAMES:
        coarse = hyperkahler.closedness_defect(W, frame, x0, which, step=h)
        fine = hyperkahler.closedness_defect(W, frame, x0, which, step=h / 2)
        closed[which], halved[which] = coarse, fine
        report.check(f"closedness_{which}", coarse, tols["finite_difference"])
        report.require(f"closedness_{which}_decay", closedness_decays(coarse, fine))
    report.results.update({name: worst[name] for name in sorted(worst)})
    report.results["closedness"] = closed
    report.results["closedness_half_step"] = halved

    if "odd" in W.flags:
        report.check("involution_defect", max(hyperkahler.involution_defect(W, frame, x) for x in points), tols["exact_identity"])
    if "homogeneous" in W.flags:
        report.check(
            "homogeneity_flow_defect",
            max(hyperkahler.homogeneity_flow_defect(W, frame, x, 1.3) for x in points),
            tols["flatness"],
        )
    report.results["joyce_connection"] = hyperkahler.joyce_or_pole(W, frame, _z0(config, frame.n))
    report.results["points"] = len(points)


def closedness_decays(coarse: float, fine: float, floor: float = 1e-10) -> bool:
    """Halving the step divides an O(step²) defect by about four; defects at round-off level pass."""
    if coarse <= floor and fine <= floor:
        return True
    return fine <= coarse / 3.0


# ---------------------------------------------------------------------------
# lagrangian-check
# ---------------------------------------------------------------------------

def lagrangian_check(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    tols = config.resolved_tolerances()
    frame, W = _frame_and_w(config)
    d = frame.d
    fixed_text = option(config, "fixed")
    fixed = tuple(parse_int_list(fixed_text)) if fixed_text else ()
    values_text = option(config, "values")
    values = parse_vector(values_text) if values_text else [1.0] * d
    B = lagrangian.CoordinateLagrangian(frame, tuple(values), fixed)

    spec = GridSpec.parse(option(config, "grid", "random:6:0.3"))
    fixed_idx = list(B.fixed)
    samples = []
    for x in sample_points(spec, frame.n, seed=config.seed, z0=_z0(config, frame.n)):
        z = np.array(x.z, dtype=complex)
        z[fixed_idx] = B.values
        x = x.with_z(z)
        if W.regular(x):
            samples.append(x)
    if not samples:
        raise InputError(f"no regular fibre samples over B on the grid {spec}")

    verdict = lagrangian.fiber_verdict(W, B, samples, tols["exact_identity"])
    ok_nondeg = lagrangian.nondegenerate(B)
    report.results.update(
        {"fixed": list(B.fixed), "values": list(B.values), "verdict": verdict, "nondegenerate": ok_nondeg}
    )
    report.require("nondegenerate", ok_nondeg)
    if verdict["good"]:
        y = lagrangian.NormalPoint.of([1.0] * d, [0.1] * d)
        lifts = [[0.0] * d, [0.3] * d, [-0.2 + 0.1j] * d]
        lift_def = max(lagrangian.lift_defect(W, B, y, k, lifts) for k in range(d))
        report.check("lift_independence", lift_def, tols["exact_identity"])
        if d >= 2:
            hol = lagrangian.holonomy_defect(W, B, y, (0, 1))
            report.results["holonomy_defect"] = hol
            report.check("plaquette_holonomy", hol, tols["finite_difference"])


# ---------------------------------------------------------------------------
# twistor
# ---------------------------------------------------------------------------

def twistor_line(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    tols = config.resolved_tolerances()
    frame, W = _frame_and_w(config)
    n = frame.n
    point = option(config, "x")
    if point:
        z, theta = parse_point(point, n)
    else:
        z = pad(parse_vector(option(config, "z", "1")), n, 1.0)
        theta = pad(parse_vector(option(config, "theta", "0")), n, 0.0)
    path = twistor.EpsilonPath.parse(option(config, "path", "1,0.25"))
    tol = float(option(config, "tol", tols["twistor_tol"]))
    x = XPoint.of(z, theta)

    traj = twistor.twistor_flow(W, frame, x, path, tol)
    back = twistor.twistor_flow(W, frame, XPoint.of(z, traj.final_theta), path.reversed(), tol)
    reversibility = float(np.max(np.abs(back.final_theta - np.array(theta))))
    report.check("reversibility", reversibility, 10 * tol)
    report.results.update(
        {
            "path": list(path.waypoints),
            "final_theta": traj.final_theta,
            "stats": traj.stats,
            "samples": len(traj.epsilons),
        }
    )
    for which, (s, t) in {"kernel_s1_t0": (1.0, 0.0), "kernel_s1_t1": (1.0, 1.0)}.items():
        report.check(which, twistor.twisted_form_kernel_defect(W, frame, x, s, t), tols["kernel"])

    writer.write_csv("twistor.csv", trajectory_header(n), traj.rows())
    writer.write_text("twistor.svg", trajectory_svg(traj.thetas, title=f"twistor line, path {option(config, 'path', '1,0.25')}"))


# ---------------------------------------------------------------------------
# stokes
# ---------------------------------------------------------------------------

def _stokes_problem(config: RunConfig) -> StokesProblem:
    u_text = option(config, "u")
    if not u_text:
        raise InputError("stokes needs --u (a diagonal matrix or its eigenvalues)")
    U = np.array(parse_square(u_text))
    v_text = option(config, "v")
    V = np.array(parse_matrix(v_text)) if v_text else np.zeros_like(U)
    return StokesProblem(U, V)


def stokes(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    tols = config.resolved_tolerances()
    P = _stokes_problem(config)
    radius = float(option(config, "radius", tols["stokes_eval_radius"]))
    data = stokes_data(P, radius=radius, tol=float(option(config, "tol", tols["stokes_tol"])), precision=config.precision)
    report.results.update({"eigenvalues": P.u, "radius": radius, **data.to_dict()})
    report.check("monodromy_consistency", data.monodromy_defect, tols["monodromy"])
    report.check("unipotency", data.max_unipotency_defect, tols["stokes_unipotency"])
    writer.write_text(
        "stokes_rays.svg",
        stokes_rays_svg([r.angle for r in data.rays], [",".join(f"{i + 1}{j + 1}" for i, j in r.pairs) for r in data.rays]),
    )


# ---------------------------------------------------------------------------
# wallcross
# ---------------------------------------------------------------------------

def wallcross(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    order = int(option(config, "order", 12))
    pent = pentagon_check(order)
    report.results["pentagon"] = pent.to_dict()
    report.check("pentagon_defect", pent.defect, 0)

    rays_path = config.inputs.get("rays")
    pairing_text = option(config, "pairing")
    if not rays_path:
        return
    setup = load_ray_file(rays_path)
    if pairing_text:
        raw = {
            "pairing": parse_int_matrix(pairing_text),
            "sigma": list(setup.sigma.basis_values),
            "cone": [list(c) for c in setup.cone.generators],
            "rays": [[{"gamma": list(g), "omega": om} for g, om in ray] for ray in setup.rays],
        }
        setup = parse_ray_data(raw)
    rank = option(config, "rank")
    if rank is not None and int(rank) != setup.lattice.rank:
        raise InputError(f"--rank {rank} does not match the pairing of rank {setup.lattice.rank}")
    order = int(option(config, "order", setup.order or 12))
    product = setup.product(order)
    report.results["automorphism"] = product.to_dict()
    report.check("poisson_defect", poisson_defect(product), 0)
    report.check("sigma_consistency", float(setup.sigma.consistency_defect(seed=config.seed)), 0.5)


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

def periods(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    tols = config.resolved_tolerances()
    data = branch_points(parse_vector(option(config, "q", "1,0,-1")))
    tol = float(option(config, "tol", tols["period_tol"]))
    cycles_path = config.inputs.get("cycles")
    if cycles_path:
        cycles = read_cycle_file(cycles_path)
    else:
        cycles = standard_cycles(data)
        write_cycle_file(str(writer.output_dir / "cycles.txt"), cycles)
    parities = [sheet_parity(data, c) for c in cycles]
    report.results.update({"curve": data.to_dict(), "parities": parities})
    report.require("cycles_close", all(p == "even" for p in parities))
    if any(p == "odd" for p in parities):
        return
    vec = period_vector(data, cycles, tol)
    M = intersection_matrix(data, cycles)
    rank = period_jacobian_rank(data, cycles, tol)
    report.results.update({**vec.to_dict(), "intersection_matrix": M, "jacobian_rank": rank})
    report.check("period_error", max(vec.errors), tol)
    report.require("intersection_skew", bool(np.all(M == -M.T)))


HANDLERS: Dict[str, Handler] = {
    "heavenly-check": heavenly_check,
    "hk-verify": hk_verify,
    "lagrangian-check": lagrangian_check,
    "twistor": twistor_line,
    "stokes": stokes,
    "wallcross": wallcross,
    "periods": periods,
}


def handler_for(subcommand: str) -> Optional[Handler]:
    return HANDLERS.get(subcommand)
