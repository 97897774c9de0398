import math

import numpy as np
import pytest

from src.config import config_loader
from src.core.errors import InputError, StokesAngle
from src.stokes.problem import StokesProblem, StokesRay, stokes_rays
from src.stokes import solutions as sol


@pytest.fixture(autouse=True)
def clear_config_cache():
    config_loader.clear_cache()
    yield
    config_loader.clear_cache()


@pytest.fixture
def terminating():
    """The formal series stops at F_1, so Φ(ε)·exp(U/ε) = Id + F_1·ε exactly."""
    return StokesProblem(np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def generic():
    return StokesProblem(np.diag([1.0, -1.0]), np.array([[0.0, 0.5], [0.5, 0.0]]))


class TestCanonicalSolution:
    @pytest.mark.parametrize("eps, expected", [(0.5j, 0.25), (0.25j, 0.125)])
    def test_terminating_series_is_exact(self, terminating, eps, expected):
        """
        Tests that the canonical solution reproduces Id + F_1·ε when the formal series terminates.
        """
        # Act
        defect = sol.canonical_defect(terminating, math.pi / 2, eps)

        # Assert
        assert defect == pytest.approx(expected, rel=1e-6)

    def test_normalized_solution_matches_closed_form(self, terminating):
        eps = 0.4 * np.exp(0.3j + 1j * math.pi / 2)
        F1 = np.array([[0.5, -0.5], [0.5, -0.5]])
        got = sol.normalized_solution(terminating, math.pi / 2, eps)
        assert np.max(np.abs(got - (np.eye(2) + F1 * eps))) <= 1e-7

    def test_canonical_solution_solves_the_system(self, terminating):
        assert sol.solution_residual(terminating, math.pi / 2, 0.5j) <= 1e-5

    def test_anchor_independence(self, generic):
        assert sol.anchor_agreement(generic, math.pi / 2, 0.5j) <= 1e-7

    def test_tends_to_identity(self, generic):
        small = sol.canonical_defect(generic, math.pi / 2, 0.05j)
        large = sol.canonical_defect(generic, math.pi / 2, 0.5j)
        assert small < large
        assert small <= 0.05

    def test_stokes_angle_rejected(self, terminating):
        with pytest.raises(StokesAngle):
            sol.canonical_solution(terminating, 0.0, 0.5j)

    def test_outside_half_plane(self, terminating):
        with pytest.raises(InputError) as excinfo:
            sol.canonical_solution(terminating, math.pi / 2, -0.5j)
        assert "outside the half-plane" in str(excinfo.value)

    def test_zero_epsilon(self, terminating):
        with pytest.raises(InputError):
            sol.normalized_solution(terminating, math.pi / 2, 0)

    def test_unknown_precision(self, terminating):
        with pytest.raises(InputError) as excinfo:
            sol.canonical_solution(terminating, math.pi / 2, 0.5j, precision="quad")
        assert "precision" in str(excinfo.value)


class TestStokesFactors:
    def test_terminating_series_has_trivial_factors(self, terminating):
        """
        Tests that a convergent formal solution gives identity Stokes factors on every ray.
        """
        for ray in stokes_rays(terminating):
            # Act
            factor = sol.stokes_factor(terminating, ray)

            # Assert
            assert np.max(np.abs(factor.matrix - np.eye(2))) <= 1e-8

    def test_generic_factors_are_unipotent_and_nontrivial(self, generic):
        rays = stokes_rays(generic)
        factors = [sol.stokes_factor(generic, r) for r in rays]
        for f in factors:
            assert f.unipotency_defect() <= 1e-6
            assert np.max(np.abs(f.matrix - np.eye(2))) > 1e-3
        # the ray at angle 0 carries (u_1 − u_2), so only the (1, 2) entry may be nonzero
        assert abs(factors[0].matrix_eig[1, 0]) <= 1e-8
        assert abs(factors[1].matrix_eig[0, 1]) <= 1e-8

    def test_not_a_stokes_ray(self, generic):
        with pytest.raises(InputError):
            sol.stokes_factor(generic, StokesRay(1.0, ((0, 1),)))

    def test_factor_dict(self, generic):
        ray = stokes_rays(generic)[0]
        data = sol.stokes_factor(generic, ray).to_dict()
        assert data["ray"]["pairs"] == [[0, 1]]
        assert data["matrix"].shape == (2, 2)


class TestMonodromy:
    def test_monodromy_equals_ordered_product(self, generic):
        """
        Tests that the loop monodromy of the base solution equals the counterclockwise product of factors.
        """
        # Act
        check = sol.monodromy_check(generic)

        # Assert
        assert check.base_angle == pytest.approx(3 * math.pi / 2)
        assert check.defect <= 1e-4

    def test_trivial_factors_give_trivial_connection(self, terminating):
        check = sol.monodromy_check(terminating)
        assert np.max(np.abs(check.connection - np.eye(2))) <= 1e-6

    def test_stokes_data_summary(self, generic):
        data = sol.stokes_data(generic)
        assert len(data.rays) == len(data.factors) == 2
        assert data.monodromy_defect <= 1e-4
        assert data.max_unipotency_defect <= 1e-6
        assert set(data.to_dict()) == {"rays", "factors", "monodromy_defect", "max_unipotency_defect"}

    @pytest.mark.slow
    def test_extended_precision_agrees(self, generic):
        ray = stokes_rays(generic)[0]
        double = sol.stokes_factor(generic, ray)
        extended = sol.stokes_factor(generic, ray, precision="extended", dps=20)
        assert np.max(np.abs(double.matrix - extended.matrix)) <= 1e-7


class TestSolutionResidual:
    @pytest.fixture
    def on_recessive_ray(self, generic):
        """ε on the anchor ray of column 1, so that column is carried radially only."""
        psi = sol.recessive_direction(generic, math.pi / 2, 0)
        return 0.5 * np.exp(1j * psi)

    def test_radial_piece(self, generic, on_recessive_ray):
        assert sol.solution_residual(generic, math.pi / 2, on_recessive_ray) <= 1e-5

    @pytest.mark.parametrize("eps", [0.5j, 0.3 * np.exp(1j * (math.pi / 2 + 0.4)), 0.6 * np.exp(1j * (math.pi / 2 - 0.6))])
    def test_arc_piece(self, generic, eps):
        """
        Tests that the canonical solution solves dΦ/dε = (U/ε² + V/ε)Φ after the radial leg and an arc.
        """
        # Act
        residual = sol.solution_residual(generic, math.pi / 2, eps)

        # Assert
        assert residual <= 1e-5

    @pytest.mark.slow
    @pytest.mark.parametrize("use_recessive_ray", [True, False])
    def test_extended_precision(self, generic, on_recessive_ray, use_recessive_ray):
        eps = on_recessive_ray if use_recessive_ray else 0.5j
        residual = sol.solution_residual(generic, math.pi / 2, eps, precision="extended", dps=20)
        assert residual <= 1e-5
