from fractions import Fraction

import numpy as np
import pytest

from src.core.errors import InputError, NonInvertible, NotSkew
from src.core.frame import XPoint, default_omega, make_frame, scaled_frame


class TestMakeFrame:
    def test_default_frame_d1(self):
        """The default ω pairs z_1 with z_2, and η = ω⁻¹ is exact."""
        # Act
        frame = make_frame(1)

        # Assert
        assert frame.omega == ((0, 1), (-1, 0))
        assert frame.eta == ((Fraction(0), Fraction(-1)), (Fraction(1), Fraction(0)))
        assert frame.n == 2

    def test_eta_is_inverse(self):
        frame = make_frame(2)
        product = frame.omega_array @ frame.eta_array
        assert np.array_equal(product, np.eye(4))

    def test_default_frame_is_block(self):
        assert make_frame(3).is_block()

    def test_non_block_frame(self):
        omega = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
        assert not make_frame(2, omega).is_block()

    def test_not_skew(self):
        with pytest.raises(NotSkew) as excinfo:
            make_frame(1, [[0, 1], [1, 0]])
        assert "(1,2)" in str(excinfo.value)

    def test_singular_omega(self):
        omega = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
        with pytest.raises(NonInvertible):
            make_frame(2, omega)

    def test_non_integer_entries(self):
        with pytest.raises(InputError) as excinfo:
            make_frame(1, [[0, 0.5], [-0.5, 0]])
        assert "integers" in str(excinfo.value)

    def test_wrong_shape(self):
        with pytest.raises(InputError):
            make_frame(2, [[0, 1], [-1, 0]])

    @pytest.mark.parametrize("d", [0, -1, 1.5])
    def test_bad_half_dimension(self, d):
        with pytest.raises(InputError):
            make_frame(d)

    def test_scaled_frame_scales_eta_inversely(self):
        frame = scaled_frame(make_frame(1), 2)
        assert frame.omega == ((0, 2), (-2, 0))
        assert frame.eta[0][1] == Fraction(-1, 2)

    def test_pairing(self):
        frame = make_frame(1)
        assert frame.pairing([1, 0], [0, 1]) == 1
        assert frame.pairing([0, 1], [1, 0]) == -1

    def test_default_omega_shape(self):
        omega = default_omega(2)
        assert omega[0][2] == 1 and omega[2][0] == -1
        assert omega[0][1] == 0


class TestXPoint:
    def test_length_mismatch(self):
        with pytest.raises(InputError):
            XPoint.of([1, 2], [0])

    def test_vector_roundtrip_and_shift(self):
        # Arrange
        x = XPoint.of([1, 2], [0.5, -0.5])

        # Act
        y = x.shifted(3, 0.25j)

        # Assert
        assert y.z == x.z
        assert y.theta == (0.5 + 0j, -0.5 + 0.25j)
        assert XPoint.from_vector(x.as_vector()) == x

    def test_frame_checks_point_length(self):
        with pytest.raises(InputError):
            make_frame(2).check_point(XPoint.of([1, 2], [0, 0]))
