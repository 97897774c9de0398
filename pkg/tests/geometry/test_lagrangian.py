import numpy as np
import pytest

from src.config import config_loader
from src.core.errors import FrameMismatch, InputError, NonLagrangianBlock
from src.core.frame import XPoint, make_frame
from src.core.plebanski import PlebanskiFunction
from src.geometry import lagrangian as lag

FLAT_W = "z1*z2*t1^2/2 + z1^2*t1*t2/2"


@pytest.fixture(autouse=True)
def clear_config_cache():
    config_loader.clear_cache()
    yield
    config_loader.clear_cache()


@pytest.fixture
def block_d2():
    return lag.CoordinateLagrangian(make_frame(2), values=(1.0, 0.5))


class TestCoordinateLagrangian:
    def test_default_fixed_block(self, block_d2):
        assert block_d2.fixed == (2, 3)
        assert block_d2.free == (0, 1)
        assert block_d2.values == (1 + 0j, 0.5 + 0j)

    def test_non_isotropic_block_rejected(self):
        """
        Tests that fixing z_1, z_3 leaves a tangent block on which ω does not vanish.
        """
        with pytest.raises(NonLagrangianBlock) as excinfo:
            lag.CoordinateLagrangian(make_frame(2), values=(1.0, 1.0), fixed=(0, 2))
        assert "does not vanish" in str(excinfo.value)

    def test_repeated_fixed_index(self):
        with pytest.raises(NonLagrangianBlock):
            lag.CoordinateLagrangian(make_frame(2), values=(1.0, 1.0), fixed=(2, 2))

    def test_wrong_number_of_values(self):
        with pytest.raises(InputError):
            lag.CoordinateLagrangian(make_frame(2), values=(1.0,))

    def test_non_block_frame(self):
        omega = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
        with pytest.raises(FrameMismatch):
            lag.CoordinateLagrangian(make_frame(2, omega), values=(1.0, 1.0))

    def test_bad_real_structure(self):
        with pytest.raises(InputError):
            lag.CoordinateLagrangian(make_frame(1), values=(1.0,), real_structure=2 * np.eye(2))

    def test_assemble_and_contains(self, block_d2):
        x = block_d2.assemble([2.0, 3.0], [0.1, 0.2], [0.3, 0.4])
        assert x.z == (2, 3, 1, 0.5)
        assert x.theta == (0.1, 0.2, 0.3, 0.4)
        assert block_d2.contains(x)
        assert not block_d2.contains(x.with_z([2.0, 3.0, 1.0, 0.6]))

    def test_normal_point_lengths(self):
        with pytest.raises(InputError):
            lag.NormalPoint.of([1.0, 2.0], [0.0])


class TestGood:
    def test_cubic_in_normal_direction_is_good(self):
        """
        Tests that a cubic in the fixed-block θ leaves the tangent-block third derivatives zero.
        """
        # Arrange
        B = lag.CoordinateLagrangian(make_frame(1), values=(1.0,))
        W = PlebanskiFunction.from_text("t2^3/6", 2)
        samples = [B.assemble([1.0], [t], [0.2]) for t in (-0.5, 0.0, 0.5)]

        # Act
        verdict = lag.fiber_verdict(W, B, samples, 1e-12)

        # Assert
        assert verdict["good"] is True
        assert verdict["good4"] is True
        assert verdict["max_good_defect"] == 0.0

    def test_cubic_in_tangent_direction_is_not_good(self):
        B = lag.CoordinateLagrangian(make_frame(1), values=(1.0,))
        W = PlebanskiFunction.from_text("t1^3/6", 2)
        defect = lag.good_defect(W, B, B.assemble([1.0], [0.0], [0.0]))
        assert defect.shape == (1, 1, 1)
        assert defect[0, 0, 0] == pytest.approx(1.0)
        verdict = lag.fiber_verdict(W, B, [B.assemble([1.0], [0.3], [0.0])], 1e-12)
        assert verdict["good"] is False
        assert verdict["good4"] is True

    def test_quartic_fails_fourth_order_only(self):
        B = lag.CoordinateLagrangian(make_frame(1), values=(1.0,))
        W = PlebanskiFunction.from_text("t1^4/24", 2)
        verdict = lag.fiber_verdict(W, B, [B.assemble([1.0], [0.0], [0.0])], 1e-12)
        assert verdict["good"] is True
        assert verdict["max_good_defect4"] == pytest.approx(1.0)

    def test_point_off_block(self):
        B = lag.CoordinateLagrangian(make_frame(1), values=(1.0,))
        W = PlebanskiFunction.from_text("t1^3", 2)
        with pytest.raises(InputError) as excinfo:
            lag.good_defect(W, B, XPoint.of([1.0, 2.0], [0.0, 0.0]))
        assert "does not lie over B" in str(excinfo.value)


class TestNondegenerate:
    def test_default_real_structure(self):
        B = lag.CoordinateLagrangian(make_frame(1), values=(1.0,))
        assert lag.nondegenerate(B)

    def test_identity_real_structure_is_degenerate(self):
        B = lag.CoordinateLagrangian(make_frame(1), values=(1.0,), real_structure=np.eye(2))
        assert not lag.nondegenerate(B)

    def test_default_structure_d2(self, block_d2):
        assert lag.nondegenerate(block_d2)


class TestNormalConnection:
    def test_flat_example_is_lift_independent(self, block_d2):
        W = PlebanskiFunction.from_text(FLAT_W, 4)
        y = lag.NormalPoint.of([1.0, 0.7], [0.1, -0.2])
        assert lag.lift_defect(W, block_d2, y, 0, [[0, 0], [0.5, -0.3], [1j, 0.2]]) <= 1e-14

    def test_tangent_cubic_depends_on_lift(self, block_d2):
        W = PlebanskiFunction.from_text("t1^3", 4)
        y = lag.NormalPoint.of([1.0, 1.0], [0.0, 0.0])
        assert lag.lift_defect(W, block_d2, y, 0, [[0, 0], [0.5, 0]]) == pytest.approx(3.0)

    def test_flat_example_has_trivial_holonomy(self, block_d2):
        """
        Tests that the normal connection of the flat example transports around a plaquette
        without displacement.
        """
        # Arrange
        W = PlebanskiFunction.from_text(FLAT_W, 4)
        y = lag.NormalPoint.of([1.0, 0.7], [0.1, -0.2])

        # Act
        defect = lag.holonomy_defect(W, block_d2, y, (0, 1))

        # Assert
        assert defect <= 1e-6

    def test_curved_example_has_holonomy(self, block_d2):
        """∮ z2 dz1 around the plaquette is −step², so the curvature reads 1."""
        W = PlebanskiFunction.from_text("z2*t1^2/2", 4)
        y = lag.NormalPoint.of([1.0, 0.7], [0.0, 0.0])
        assert lag.holonomy_defect(W, block_d2, y, (0, 1), step=0.05) == pytest.approx(1.0, rel=1e-6)

    def test_holonomy_needs_distinct_directions(self, block_d2):
        W = PlebanskiFunction.from_text(FLAT_W, 4)
        with pytest.raises(InputError):
            lag.holonomy_defect(W, block_d2, lag.NormalPoint.of([1.0, 1.0], [0.0, 0.0]), (0, 0))

    def test_direction_out_of_range(self, block_d2):
        W = PlebanskiFunction.from_text(FLAT_W, 4)
        with pytest.raises(InputError):
            lag.normal_connection(W, block_d2, lag.NormalPoint.of([1.0, 1.0], [0.0, 0.0]), 2, [0, 0])
