import math

import numpy as np
import pytest

from src.config import config_loader
from src.core.errors import InputError, PoleHit
from src.core.frame import XPoint
from src.core.plebanski import PlebanskiFunction, eval_jet, load_plebanski


@pytest.fixture(autouse=True)
def clear_config_cache():
    config_loader.clear_cache()
    yield
    config_loader.clear_cache()


class TestEvaluate:
    def test_polynomial_value(self):
        W = PlebanskiFunction.from_text("z1*t1^2", 2)
        assert W.evaluate(XPoint.of([2, 0], [3, 0])) == pytest.approx(18.0)

    def test_source_and_flags(self):
        W = PlebanskiFunction.from_text("@flags odd\nt1^3", 2)
        assert "t1^3" in W.source
        assert W.flags == frozenset({"odd"})

    def test_dimension_mismatch(self):
        W = PlebanskiFunction.from_text("t1^3", 2)
        with pytest.raises(InputError):
            W.evaluate(XPoint.of([1], [0]))


class TestRegularity:
    def test_pole_is_not_regular(self):
        W = PlebanskiFunction.from_text("t1^2/z1", 2)
        assert W.regular(XPoint.of([1, 1], [0, 0]))
        assert not W.regular(XPoint.of([0, 1], [0, 0]))

    def test_guard_band_around_pole(self):
        W = PlebanskiFunction.from_text("t1^2/z1", 2)
        assert not W.regular(XPoint.of([1e-9, 1], [0, 0]))

    def test_log_argument_guarded(self):
        W = PlebanskiFunction.from_text("log(z1)*t1^2", 2)
        assert not W.regular(XPoint.of([0, 1], [0, 0]))

    def test_evaluate_raises_pole_hit(self):
        W = PlebanskiFunction.from_text("1/z2", 2)
        x = XPoint.of([1, 0], [0, 0])
        with pytest.raises(PoleHit) as excinfo:
            W.evaluate(x)
        assert excinfo.value.point == x

    def test_user_predicate_is_conjoined(self):
        W = PlebanskiFunction.from_text("t1^3", 2, predicate=lambda x: x.z[0].real > 0)
        assert W.regular(XPoint.of([1, 1], [0, 0]))
        assert not W.regular(XPoint.of([-1, 1], [0, 0]))


class TestJet:
    def test_cubic_derivatives(self):
        """
        Tests the θ-Hessian and third θ-derivatives of t1^3 against the closed form.
        """
        # Arrange
        W = PlebanskiFunction.from_text("t1^3", 2)
        x = XPoint.of([1, 1], [0.5, 0])

        # Act
        jet = eval_jet(W, x, 3)

        # Assert
        H = jet.theta_hessian()
        assert H[0, 0] == pytest.approx(3.0)
        assert np.allclose(H[1], 0.0)
        assert jet.theta_third()[0, 0, 0] == pytest.approx(6.0)

    def test_exponential_mixed_partials(self):
        W = PlebanskiFunction.from_text("exp(z1*t1)", 1)
        jet = eval_jet(W, XPoint.of([1], [0]), 3)
        assert jet.partial(1, 1) == pytest.approx(1.0)
        assert jet.partial(0, 1) == pytest.approx(1.0)
        assert jet.partial(0, 0) == pytest.approx(0.0)
        assert jet.partial(1, 1, 1) == pytest.approx(1.0)

    def test_logarithm_partials(self):
        W = PlebanskiFunction.from_text("log(z1)*t1^2", 1)
        jet = eval_jet(W, XPoint.of([2], [1]), 2)
        assert jet.partial(0) == pytest.approx(0.5)
        assert jet.partial(1, 1) == pytest.approx(2 * math.log(2))

    def test_fractional_power(self):
        W = PlebanskiFunction.from_text("z1^(1/2)*t1", 1)
        jet = eval_jet(W, XPoint.of([4], [1]), 2)
        assert jet.partial(0) == pytest.approx(0.25)
        assert jet.partial(0, 0) == pytest.approx(-1 / 32)

    def test_theta_z_mixed_orientation(self):
        W = PlebanskiFunction.from_text("z2*t1^2/2", 2)
        M = eval_jet(W, XPoint.of([1, 1], [0.5, 0]), 2).theta_z_mixed()
        assert M[0, 1] == pytest.approx(0.5)
        assert M[1, 0] == pytest.approx(0.0)

    def test_order_out_of_range(self):
        W = PlebanskiFunction.from_text("t1", 1)
        with pytest.raises(InputError):
            eval_jet(W, XPoint.of([1], [0]), 5)

    def test_jet_at_pole(self):
        W = PlebanskiFunction.from_text("1/t1", 1)
        with pytest.raises(PoleHit):
            eval_jet(W, XPoint.of([1], [0]), 2)


class TestLoad:
    def test_load_from_file(self, tmp_path):
        path = tmp_path / "w.txt"
        path.write_text("# flat\n0\n", encoding="utf-8")
        W = load_plebanski(str(path), 2)
        assert W.evaluate(XPoint.of([1, 1], [0, 0])) == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError) as excinfo:
            load_plebanski(str(tmp_path / "missing.txt"), 2)
        assert "cannot read" in str(excinfo.value)


def _random_quintic(rng: np.random.Generator, n: int) -> str:
    names = [f"z{k + 1}" for k in range(n)] + [f"t{k + 1}" for k in range(n)]
    terms = []
    for _ in range(12):
        powers = rng.multinomial(int(rng.integers(1, 6)), [1 / len(names)] * len(names))
        factors = [f"{v}^{p}" for v, p in zip(names, powers) if p]
        terms.append(f"({rng.uniform(-1, 1):.6f})*" + "*".join(factors))
    return " + ".join(terms)


def _central_difference(W: PlebanskiFunction, x: XPoint, lower: tuple, v: int, h: float = 1e-3) -> complex:
    """Five-point stencil for ∂_v applied to the jet partial `lower`."""
    def f(s: float) -> complex:
        return eval_jet(W, x.shifted(v, s), len(lower)).partial(*lower)

    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


class TestJetAgainstFiniteDifferences:
    POINTS = [([1.1, 0.7], [0.3, -0.4]), ([0.8, 1.3], [-0.2, 0.5]), ([1.5, 0.9], [0.1, 0.2])]
    MULTI_INDICES = [(0,), (3,), (0, 2), (1, 3), (2, 2), (0, 1, 3), (2, 3, 3), (1, 1, 2)]

    @pytest.mark.parametrize("text", [
        pytest.param(_random_quintic(np.random.default_rng(5), 2), id="random-quintic"),
        pytest.param("exp(z1*t2)*log(z2) + t1^2*exp(-t2)/z1 + log(z1 + t1^2)", id="exp-log"),
    ])
    @pytest.mark.parametrize("z, theta", POINTS)
    def test_partials_match_five_point_stencil(self, text, z, theta):
        """
        Tests that jet partials of orders 1 to 3 agree with a central difference of the next lower order.
        """
        # Arrange
        W = PlebanskiFunction.from_text(text, 2)
        x = XPoint.of(z, theta)

        # Act
        jet = eval_jet(W, x, 3)

        # Assert
        for multi in self.MULTI_INDICES:
            expected = _central_difference(W, x, multi[:-1], multi[-1])
            assert jet.partial(*multi) == pytest.approx(expected, rel=1e-6, abs=1e-9), multi
