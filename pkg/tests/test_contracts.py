"""
Tests the contract between the CLI handlers and the numerical modules,
so that renamed functions or changed signatures fail here instead of at run time.
"""
import inspect
import typing
from fractions import Fraction

import numpy as np
import pytest

from src.cli.handlers import handler_for
from src.config.settings import SUBCOMMANDS
from src.core.frame import DarbouxFrame, XPoint
from src.core.plebanski import PlebanskiFunction
from src.geometry import heavenly, twistor
from src.spectral import periods
from src.spectral.curve import SpectralData
from src.spectral.cycles import Cycle
from src.stokes import solutions
from src.stokes.problem import StokesProblem
from src.wallcrossing import automorphism


@pytest.mark.contract
def test_every_subcommand_has_a_handler():
    for name in SUBCOMMANDS:
        if name == "selftest":
            continue
        assert callable(handler_for(name)), f"no handler for '{name}'"
    assert handler_for("no-such-command") is None


@pytest.mark.contract
def test_heavenly_residual_signature():
    hints = typing.get_type_hints(heavenly.heavenly_residual)
    assert hints["W"] is PlebanskiFunction
    assert hints["frame"] is DarbouxFrame
    assert hints["x"] is XPoint
    assert hints["return"] is np.ndarray


@pytest.mark.contract
def test_twistor_flow_tolerance_is_optional():
    """
    Ensures twistor_flow falls back to the configured tolerance when none is passed.
    """
    sig = inspect.signature(twistor.twistor_flow)
    assert list(sig.parameters)[:4] == ["W", "frame", "x", "path"]
    assert sig.parameters["tol"].default is None
    assert typing.get_type_hints(twistor.twistor_flow)["return"] is twistor.TwistorTrajectory


@pytest.mark.contract
def test_stokes_data_options_are_keyword_only():
    sig = inspect.signature(solutions.stokes_data)
    assert typing.get_type_hints(solutions.stokes_data)["P"] is StokesProblem
    for name in ("radius", "tol", "precision", "dps"):
        assert sig.parameters[name].kind is inspect.Parameter.KEYWORD_ONLY
    assert sig.parameters["precision"].default == "double"


@pytest.mark.contract
def test_pentagon_check_is_exact():
    hints = typing.get_type_hints(automorphism.pentagon_defect)
    assert hints["order"] is int
    assert hints["return"] is Fraction
    assert inspect.signature(automorphism.pentagon_check).parameters["omegas"].default == (1, 1, 1)


@pytest.mark.contract
def test_period_signature():
    hints = typing.get_type_hints(periods.period)
    assert hints["data"] is SpectralData
    assert hints["cycle"] is Cycle
    assert hints["return"] is complex
    assert inspect.signature(periods.period).parameters["tol"].default is None
