"""
BDD tests for periods and intersections on y² = Q(x).
"""
from pathlib import Path

import numpy as np
import pytest
from pytest_bdd import given, parsers, scenarios, then, when

from src.config import config_loader
from src.core.errors import InputError
from src.spectral.curve import branch_points
from src.spectral.cycles import read_cycle_file, standard_cycles
from src.spectral.periods import intersection_matrix, period_vector

pytestmark = pytest.mark.bdd

SAMPLES = Path(__file__).resolve().parents[1] / "src" / "config" / "samples"

scenarios("spectral_periods.feature")


@pytest.fixture(autouse=True)
def clear_config_cache():
    config_loader.clear_cache()
    yield
    config_loader.clear_cache()


@pytest.fixture
def context():
    return {}


def _coefficients(text):
    return [float(x) for x in text.split(",")]


# Given steps
@given(parsers.parse('the curve with coefficients "{q}"'))
def curve(context, q):
    context["data"] = branch_points(_coefficients(q))


@given(parsers.parse('the cycle file "{name}"'))
def cycle_file(context, name):
    context["cycles"] = read_cycle_file(str(SAMPLES / name))


@given("the standard cycles")
def the_standard_cycles(context):
    context["cycles"] = standard_cycles(context["data"])


# When steps
@when("the periods are computed")
def compute_periods(context):
    context["periods"] = period_vector(context["data"], context["cycles"])


@when("the intersection matrix is computed")
def compute_intersections(context):
    context["matrix"] = intersection_matrix(context["data"], context["cycles"])


@when(parsers.parse('the curve with coefficients "{q}" is loaded'))
def load_curve(context, q):
    try:
        branch_points(_coefficients(q))
    except InputError as e:
        context["error"] = e


# Then steps
@then(parsers.parse("period {index:d} is within {tol:g} of {expected:g}"))
def period_close(context, index, tol, expected):
    assert abs(context["periods"].values[index - 1] - expected) <= tol


@then("the matrix is antisymmetric")
def antisymmetric(context):
    M = context["matrix"]
    assert np.array_equal(M, -M.T)


@then(parsers.parse("entry {i:d},{j:d} has absolute value {value:d}"))
def matrix_entry(context, i, j, value):
    assert abs(context["matrix"][i - 1, j - 1]) == value


@then(parsers.parse('an input error mentioning "{text}" is raised'))
def input_error(context, text):
    assert "error" in context
    assert text in str(context["error"])
