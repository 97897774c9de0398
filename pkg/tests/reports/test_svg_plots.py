import math

import numpy as np

from src.reports.svg_plots import stokes_rays_svg, trajectory_svg


def test_trajectory_one_trace_per_component():
    thetas = np.array([[0, 1j], [1, 1 + 1j], [2, 2 + 2j]])
    svg = trajectory_svg(thetas, title="line")
    assert "<svg" in svg
    assert svg.rstrip().endswith("</svg>")
    assert 'id="theta1"' in svg
    assert 'id="theta2"' in svg
    assert 'id="theta3"' not in svg
    assert "line" in svg


def test_degenerate_trajectory_is_drawable():
    svg = trajectory_svg(np.zeros((4, 1), dtype=complex))
    assert 'id="theta1_start"' in svg


def test_rendering_is_deterministic():
    thetas = np.exp(1j * np.linspace(0, 1, 20))[:, None]
    assert trajectory_svg(thetas) == trajectory_svg(thetas)


def test_stokes_rays_labelled():
    svg = stokes_rays_svg([0.0, math.pi], labels=["12"])
    assert 'id="ray1"' in svg
    assert 'id="ray2"' in svg
    assert "12" in svg
    assert "ray 2" in svg
