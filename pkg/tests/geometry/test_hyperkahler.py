import numpy as np
import pytest

from src.config import config_loader
from src.core.errors import InputError
from src.core.frame import XPoint, make_frame
from src.core.plebanski import PlebanskiFunction
from src.geometry import hyperkahler as hkmod


@pytest.fixture(autouse=True)
def clear_config_cache():
    config_loader.clear_cache()
    yield
    config_loader.clear_cache()


@pytest.fixture
def cubic_d2():
    frame = make_frame(2)
    W = PlebanskiFunction.from_text("t1^3 + 2*t2^3", frame.n)
    x = XPoint.of([1.0, 0.8, 1.2, 0.9], [0.2, -0.1, 0.15, 0.3])
    return frame, W, x


class TestStructure:
    def test_identity_suite_on_solution(self, cubic_d2):
        """
        Tests that the pointwise structure built from a solution satisfies the quaternion,
        metric, pullback and reconstruction identities.
        """
        # Arrange
        frame, W, x = cubic_d2

        # Act
        defects = hkmod.suite(W, frame, x)

        # Assert
        assert set(defects) == {"quaternion_defect", "metric_defect", "pullback_defect", "reconstruction_defect"}
        assert all(v <= 1e-10 for v in defects.values()), defects

    def test_recovered_horizontal_is_minus_i_eigenspace(self, cubic_d2):
        frame, W, x = cubic_d2
        hk = hkmod.build_hk(W, frame, x)
        H = hkmod.recover_horizontal(hk)
        assert np.allclose(H[: frame.n, :], np.eye(frame.n), atol=1e-12)
        assert np.allclose(hk.I @ H, -1j * H, atol=1e-10)

    def test_horizontal_columns_are_minus_i_eigenvectors(self, cubic_d2):
        frame, W, x = cubic_d2
        hk = hkmod.build_hk(W, frame, x)
        assert np.allclose(hk.I @ hk.horizontal, -1j * hk.horizontal)

    def test_non_solution_still_builds_with_warning(self, caplog):
        frame = make_frame(2)
        W = PlebanskiFunction.from_text("t1^3 + t3^3", frame.n)
        x = XPoint.of([1, 1, 1, 1], [0.5, 0, 0.5, 0])
        with caplog.at_level("WARNING"):
            hk = hkmod.build_hk(W, frame, x)
        assert hk.n == 4
        assert "heavenly residual" in caplog.text

    def test_zero_function_forms(self):
        frame = make_frame(1)
        W = PlebanskiFunction.from_text("0", 2)
        hk = hkmod.build_hk(W, frame, XPoint.of([1, 1], [0, 0]))
        assert hkmod.pullback_defect(hk, frame) <= 1e-14
        assert hkmod.quaternion_defect(hk) <= 1e-14


class TestForms:
    def test_twisted_form_endpoints(self, cubic_d2):
        frame, W, x = cubic_d2
        ft = hkmod.forms(hkmod.build_hk(W, frame, x), frame)
        assert np.allclose(hkmod.twisted_form(ft, 1, 0), ft.Omega_minus)
        assert np.allclose(hkmod.twisted_form(ft, 0, 1), ft.Omega_plus)

    def test_twisted_form_needs_nonzero_pair(self, cubic_d2):
        frame, W, x = cubic_d2
        with pytest.raises(InputError):
            hkmod.twisted_form(hkmod.build_hk(W, frame, x), 0, 0)

    def test_unknown_form_name(self, cubic_d2):
        frame, W, x = cubic_d2
        ft = hkmod.forms(hkmod.build_hk(W, frame, x))
        with pytest.raises(InputError) as excinfo:
            ft.select("J")
        assert "unknown form" in str(excinfo.value)

    @pytest.mark.parametrize("which", ["I", "plus", "minus"])
    def test_forms_are_closed(self, cubic_d2, which):
        frame, W, x = cubic_d2
        assert hkmod.closedness_defect(W, frame, x, which) <= 1e-6

    def test_closedness_defect_is_second_order_in_step(self):
        """
        Tests that halving the step divides the closedness defect by four for a transcendental solution.
        """
        # Arrange
        frame = make_frame(1)
        W = PlebanskiFunction.from_text("exp(t1)/z1", 2)
        x = XPoint.of([1.2, 0.9], [0.3, -0.2])

        # Act
        pairs = {
            which: (hkmod.closedness_defect(W, frame, x, which, step=0.05), hkmod.closedness_defect(W, frame, x, which, step=0.025))
            for which in hkmod.FORM_NAMES
        }

        # Assert
        scaling = [coarse / fine for coarse, fine in pairs.values() if coarse > 1e-10]
        assert scaling, pairs
        assert all(3.6 <= r <= 4.4 for r in scaling), pairs
        assert all(fine <= 1e-2 for _, fine in pairs.values())

    def test_closedness_rejects_unknown_form(self, cubic_d2):
        frame, W, x = cubic_d2
        with pytest.raises(InputError):
            hkmod.closedness_defect(W, frame, x, "K")


class TestSymmetryFlows:
    def test_odd_function_involution(self, cubic_d2):
        frame, W, x = cubic_d2
        assert hkmod.involution_defect(W, frame, x) <= 1e-10

    @pytest.mark.parametrize("t", [2.0, 1.0 + 1.0j])
    def test_homogeneous_function_scaling_weights(self, t):
        """t1^3/z1 has weight −1 under z ↦ tz, so the structure scales with the documented weights."""
        frame = make_frame(1)
        W = PlebanskiFunction.from_text("t1^3/z1", 2)
        x = XPoint.of([1.0, 1.5], [0.3, -0.2])
        assert hkmod.homogeneity_flow_defect(W, frame, x, t) <= 1e-10

    def test_non_homogeneous_function_scaling(self):
        frame = make_frame(1)
        W = PlebanskiFunction.from_text("z2*t1^3", 2)
        x = XPoint.of([1.0, 1.0], [0.5, 0.0])
        assert hkmod.homogeneity_flow_defect(W, frame, x, 2.0) > 1e-3


class TestLinearJoyce:
    def test_cubic_christoffel(self):
        """
        Tests that Γ[q][i][j] = Σ_p η_qp W_θiθjθp at θ = 0 for W = t1^3.
        """
        # Arrange
        frame = make_frame(1)
        W = PlebanskiFunction.from_text("t1^3", 2)

        # Act
        gamma = hkmod.linear_joyce(W, frame, [1.0, 1.0])

        # Assert
        assert gamma.shape == (2, 2, 2)
        assert gamma[1][0][0] == pytest.approx(6.0)
        assert gamma[0][0][0] == pytest.approx(0.0)

    def test_pole_on_zero_section(self):
        frame = make_frame(1)
        W = PlebanskiFunction.from_text("1/t2", 2)
        assert hkmod.joyce_or_pole(W, frame, [1.0, 1.0]) == "pole-at-zero-section"
