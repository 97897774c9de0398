# src/cli/selftest.py
"""
selftest - 內建驗收套件，逐項寫入同一份報告

Every check records its tolerance. Nothing time-dependent goes into the report, so two runs with
the same seed produce byte-identical files; wall times are only logged.
"""

import logging
import math
import time
from fractions import Fraction
from typing import Callable, List

import numpy as np
from scipy.special import beta

from src.config.settings import RunConfig
from src.core.frame import XPoint, make_frame
from src.core.grid import GridSpec, sample_points
from src.core.plebanski import PlebanskiFunction
from src.geometry import heavenly, hyperkahler, lagrangian, twistor
from src.reports.report_writer import Report, ReportWriter
from src.spectral.curve import branch_points, scale_curve
from src.spectral.cycles import Cycle, standard_cycles
from src.spectral.periods import intersection_matrix, period, period_jacobian_rank
from src.stokes.problem import StokesProblem, stokes_rays
from src.stokes.solutions import anchor_agreement, monodromy_check, stokes_factor
from src.wallcrossing.automorphism import (
    automorphism_defect,
    commutator_defect,
    compose,
    identity,
    inverse,
    pentagon_check,
    poisson_defect,
    wall_automorphism,
)
from src.wallcrossing.lattice import ChargeLattice, make_refinement

logger = logging.getLogger(__name__)


def _heavenly(report: Report) -> None:
    for d, text, grid in ((1, "t1^3", "theta:-0.5:0.5:5"), (2, "t1^3 + 2*t2^3", "theta:-0.5:0.5:3")):
        frame = make_frame(d)
        W = PlebanskiFunction.from_text(text, frame.n)
        stats = heavenly.grid_report(W, frame, sample_points(GridSpec.parse(grid), frame.n))
        report.check(f"heavenly.residual.d{d}", stats["max_residual"], 1e-12)
        report.check(f"heavenly.flatness.d{d}", stats["max_flatness_defect"], 1e-10)


def _hyperkahler(report: Report) -> None:
    frame = make_frame(2)
    W = PlebanskiFunction.from_text("t1^3 + 2*t2^3", frame.n)
    points = sample_points(GridSpec.parse("random:3:0.3"), frame.n, seed=report.seed)
    worst = {}
    for x in points:
        for name, value in hyperkahler.suite(W, frame, x).items():
            worst[name] = max(worst.get(name, 0.0), value)
    for name in sorted(worst):
        report.check(f"hk.{name}", worst[name], 1e-12)
    for which in hyperkahler.FORM_NAMES:
        coarse = hyperkahler.closedness_defect(W, frame, points[0], which, step=1e-3)
        report.check(f"hk.closedness_{which}", coarse, 1e-6)


def _lagrangian(report: Report) -> None:
    frame = make_frame(1)
    B = lagrangian.CoordinateLagrangian(frame, (1.0,))
    samples = [B.assemble([1.0 + 0.1 * k], [0.2 - 0.1 * k], [0.1 * k]) for k in range(3)]
    good = lagrangian.fiber_verdict(PlebanskiFunction.from_text("t2^3/6", 2), B, samples, 1e-12)
    bad = lagrangian.fiber_verdict(PlebanskiFunction.from_text("t1^3/6", 2), B, samples, 1e-12)
    report.require("lagrangian.good_case_declared_good", bool(good["good"]))
    report.require("lagrangian.bad_case_declared_not_good", not bad["good"])
    report.require("lagrangian.nondegenerate", lagrangian.nondegenerate(B))
    W = PlebanskiFunction.from_text("t2^3/6", 2)
    y = lagrangian.NormalPoint.of([1.0], [0.1])
    report.check("lagrangian.lift_independence", lagrangian.lift_defect(W, B, y, 0, [[0.0], [0.3], [-0.2 + 0.1j]]), 1e-12)

    frame2 = make_frame(2)
    flat = PlebanskiFunction.from_text("z1*z2*t1^2/2 + z1^2*t1*t2/2", frame2.n)
    B2 = lagrangian.CoordinateLagrangian(frame2, (1.0, 1.0))
    y2 = lagrangian.NormalPoint.of([1.0, 0.5], [0.1, -0.1])
    report.check("lagrangian.plaquette_holonomy", lagrangian.holonomy_defect(flat, B2, y2, (0, 1), step=1e-2), 1e-6)


def _twistor(report: Report) -> None:
    tol = 1e-9
    frame = make_frame(1)
    W = PlebanskiFunction.from_text("0", frame.n)
    z = np.array([1.0, 0.5 + 0.2j])
    theta0 = np.array([0.1, -0.3j])
    path = twistor.EpsilonPath.of([1.0, 0.25])
    traj = twistor.twistor_flow(W, frame, XPoint.of(z, theta0), path, tol)
    exact = theta0 + z * (1 / 0.25 - 1 / 1.0)
    report.check("twistor.closed_form", float(np.max(np.abs(traj.final_theta - exact))), 10 * tol)
    drift = max(
        float(np.max(np.abs(twistor.conserved_coordinates(z, th, e) - twistor.conserved_coordinates(z, theta0, 1.0))))
        for e, th in traj.samples
    )
    report.check("twistor.conserved_coordinate_drift", drift, 10 * tol)
    back = twistor.twistor_flow(W, frame, XPoint.of(z, traj.final_theta), path.reversed(), tol)
    report.check("twistor.reversibility", float(np.max(np.abs(back.final_theta - theta0))), 10 * tol)
    shift = twistor.torus_shift(z, theta0 - z / 1.0, 0.25)
    report.check("twistor.torus_shift_agreement", float(np.max(np.abs(traj.final_theta - shift))), 10 * tol)

    cubic = PlebanskiFunction.from_text("t1^3 + 2*t2^3", 4)
    frame2 = make_frame(2)
    x = XPoint.of([1.0, 0.8, 1.2, 0.9], [0.1, 0.2, -0.1, 0.05])
    kernel = max(twistor.twisted_form_kernel_defect(cubic, frame2, x, s, t) for s, t in ((1, 0), (0, 1), (1, 0.5j)))
    report.check("twistor.twisted_form_kernel", kernel, 1e-10)


def _stokes(report: Report) -> None:
    trivial = StokesProblem(np.diag([1.0, -1.0]), np.zeros((2, 2)))
    ident = max(
        float(np.max(np.abs(stokes_factor(trivial, r).matrix - np.eye(2)))) for r in stokes_rays(trivial)
    )
    report.check("stokes.trivial_factors", ident, 1e-8)
    P = StokesProblem(np.diag([1.0, -1.0]), np.array([[0.0, 0.5], [0.5, 0.0]]))
    check = monodromy_check(P)
    report.check("stokes.monodromy_consistency", check.defect, 1e-4)
    unip = max(stokes_factor(P, r).unipotency_defect() for r in stokes_rays(P))
    report.check("stokes.unipotency", unip, 1e-6)
    report.check("stokes.anchor_agreement", anchor_agreement(P, math.pi / 2, 0.5j), 1e-7)


def _wallcrossing(report: Report) -> None:
    pent = pentagon_check(12)
    report.check("wall.pentagon_N12", pent.defect, Fraction(0))
    report.results["pentagon_bracketing"] = pent.bracketing

    lattice = ChargeLattice.of([[0, 0, 1], [0, 0, 1], [-1, -1, 0]])
    sigma = make_refinement(lattice)
    a = wall_automorphism(lattice, sigma, [((1, 0, 0), 1)], 8)
    b = wall_automorphism(lattice, sigma, [((0, 1, 0), 1)], 8)
    report.check("wall.uncoupled_commutation_N8", commutator_defect(a, b), Fraction(0))

    std = ChargeLattice.standard(2)
    s = make_refinement(std, (-1, -1))
    single = wall_automorphism(std, s, [((1, 0), 1)], 8)
    report.check("wall.poisson_single_ray_N8", poisson_defect(single), Fraction(0))
    minus = wall_automorphism(std, s, [((1, 0), -1)], 8)
    report.check("wall.inverse_by_negated_omega", automorphism_defect(compose(single, minus), identity(std, s, 8)), Fraction(0))
    report.check("wall.compose_with_inverse", automorphism_defect(compose(single, inverse(single)), identity(std, s, 8)), Fraction(0))
    corrupted = single.with_image(0, single.images[0] + single.ring.gens[0])
    report.require("wall.corrupted_coefficient_detected", poisson_defect(corrupted) > 0)


def _periods(report: Report) -> None:
    quad = branch_points([1.0, 0.0, -1.0])
    rect = Cycle.of([-2 - 1j, 2 - 1j, 2 + 1j, -2 + 1j], "+")
    p = period(quad, rect, 1e-10)
    report.check("periods.quadratic_pi", abs(p - math.pi), 1e-10)
    report.check("periods.anti_invariance", abs(period(quad, rect.flipped(), 1e-10) + p), 1e-14)

    cubic = branch_points([0.0, -1.0, 0.0, 1.0])
    cycles = standard_cycles(cubic)
    right = period(cubic, cycles[1], 1e-10)
    report.check("periods.cubic_beta", abs(abs(right) - beta(0.75, 1.5)), 1e-8)
    report.check("periods.cubic_beta_phase", abs(right.real), 1e-8)
    angles = 2.0 * math.pi * (np.arange(48) + 0.5) / 48
    wide = Cycle(tuple(0.5 + 0.75 * np.cos(angles) + 0.3j * np.sin(angles)), 1, "wide")
    deformed = period(cubic, wide, 1e-10)
    report.check("periods.contour_deformation", min(abs(deformed - right), abs(deformed + right)), 2e-10)
    report.check("periods.scaling", abs(period(scale_curve(cubic, 2.0), cycles[1], 1e-10) - 2.0 * right), 1e-9)
    M = intersection_matrix(cubic, cycles)
    report.require("periods.intersection_unimodular", abs(int(M[0, 1])) == 1 and int(M[1, 0]) == -int(M[0, 1]))
    report.require("periods.jacobian_rank_2", period_jacobian_rank(cubic, cycles, 1e-10) == 2)


SECTIONS: List[Callable[[Report], None]] = [_heavenly, _hyperkahler, _lagrangian, _twistor, _stokes, _wallcrossing, _periods]


def selftest(config: RunConfig, report: Report, writer: ReportWriter) -> None:
    for section in SECTIONS:
        started = time.perf_counter()
        section(report)
        logger.info(f"[CLI] selftest {section.__name__.lstrip('_')} took {time.perf_counter() - started:.2f}s")
