"""
Unit tests for domain geometry, Green functions and conformal maps.
"""
import math

import numpy as np
import pytest

from liouville.errors import (
    BoundaryProximityError,
    CoincidentPointsError,
    InsufficientModesError,
    OutOfDomainError,
    PoleError,
    UnsupportedDomainError,
)
from liouville.geometry import (
    as_point,
    as_points,
    conformal_radius,
    contains,
    distance_to_boundary,
    extrapolated_log_radius,
    field_log_radius,
    green_function,
    map_apply,
    map_derivative_modulus,
    square_log_radius,
    to_field_coordinates,
)
from liouville.models import ConformalMap, Direction

# 4 sqrt(pi) / Gamma(1/4)^2
SQUARE_CENTRE_RADIUS = 4.0 * math.sqrt(math.pi) / math.gamma(0.25) ** 2


class TestPoints:
    """Test point coercion and boundary distances."""

    def test_pairs_and_complex_agree(self):
        """(x, y) pairs should coerce to x + iy."""
        assert as_point((0.2, 0.7)) == 0.2 + 0.7j
        assert as_point(0.2 + 0.7j) == 0.2 + 0.7j
        np.testing.assert_array_equal(as_points([[0.1, 0.2], [0.3, 0.4]]), [0.1 + 0.2j, 0.3 + 0.4j])

    def test_square_distance(self, square):
        """Distance to the square boundary is the smallest coordinate gap."""
        assert distance_to_boundary(square, 0.2 + 0.7j) == pytest.approx(0.2)
        assert distance_to_boundary(square, 1.2 + 0.5j) < 0.0

    def test_disc_distance(self, disc):
        """Distance to the circle is 1 - |z|."""
        assert distance_to_boundary(disc, 0.5j) == pytest.approx(0.5)
        assert not contains(disc, 1.0 + 0.0j)


class TestGreenFunction:
    """Test Green functions on the disc and the square."""

    def test_disc_value(self, disc):
        """G(0, 1/2) on the disc should be log 2."""
        assert green_function(disc, 0.0, 0.5) == pytest.approx(math.log(2.0))

    def test_square_symmetric(self, square):
        """G(x, y) = G(y, x)."""
        x, y = 0.3 + 0.4j, 0.6 + 0.8j
        assert green_function(square, x, y) == pytest.approx(green_function(square, y, x), abs=1e-12)

    def test_square_positive_and_vanishing_at_boundary(self, square):
        """Interior values are positive and tend to zero at the boundary."""
        assert green_function(square, 0.5 + 0.5j, 0.3 + 0.6j) > 0.0
        assert green_function(square, 0.5 + 0.5j, 0.5 + 1e-6j) == pytest.approx(0.0, abs=1e-4)

    def test_square_log_singularity(self, square):
        """G(z, z + d) + log d should approach log R(z)."""
        z, d = 0.4 + 0.3j, 1e-5
        value = green_function(square, z, z + d) + math.log(d)
        assert value == pytest.approx(float(square_log_radius(z)), abs=1e-3)

    def test_truncated_sum_close_to_exact(self, square):
        """The 4096-mode sum should match the image series away from the diagonal."""
        x, y = 0.3 + 0.4j, 0.6 + 0.7j
        exact = green_function(square, x, y)
        truncated = green_function(square, x, y, n_modes=4096)
        assert truncated == pytest.approx(exact, abs=0.02)

    def test_coincident_points_raise(self, square):
        """Equal points should raise CoincidentPointsError."""
        with pytest.raises(CoincidentPointsError):
            green_function(square, 0.5 + 0.5j, 0.5 + 0.5j)

    def test_outside_point_raises(self, square):
        """Points outside the domain should raise OutOfDomainError."""
        with pytest.raises(OutOfDomainError):
            green_function(square, 0.5 + 0.5j, 1.5 + 0.5j)


class TestConformalRadius:
    """Test conformal radii."""

    def test_square_centre(self, square):
        """R at the centre of the unit square is 4 sqrt(pi) / Gamma(1/4)^2."""
        assert conformal_radius(square, 0.5 + 0.5j) == pytest.approx(SQUARE_CENTRE_RADIUS, abs=1e-6)

    def test_square_symmetries(self, square):
        """R is invariant under the symmetries of the square."""
        base = conformal_radius(square, 0.2 + 0.35j)
        for z in (0.8 + 0.35j, 0.35 + 0.2j, 0.2 + 0.65j):
            assert conformal_radius(square, z) == pytest.approx(base, rel=1e-10)

    def test_disc_formula(self, disc):
        """R(z) = 1 - |z|^2 on the disc."""
        assert conformal_radius(disc, 0.0) == pytest.approx(1.0)
        assert conformal_radius(disc, 0.5j) == pytest.approx(0.75)

    def test_few_modes_rejected(self, square):
        """A coarse truncation cannot resolve the radius."""
        with pytest.raises(InsufficientModesError):
            conformal_radius(square, 0.5 + 0.5j, n_modes=256)

    @pytest.mark.parametrize("n_modes", [256 ** 2, 512 ** 2])
    def test_mode_sum_matches_closed_form_at_centre(self, square, n_modes):
        """The truncated estimate reproduces the exact centre radius to 0.01."""
        value = conformal_radius(square, 0.5 + 0.5j, n_modes=n_modes)
        assert value == pytest.approx(SQUARE_CENTRE_RADIUS, abs=0.01)

    def test_mode_sum_matches_closed_form_off_centre(self, square):
        """Off the centre the estimate follows the image series."""
        z = 0.3 + 0.6j
        estimate = extrapolated_log_radius(square, z, n_modes=512 ** 2)
        assert float(estimate) == pytest.approx(float(square_log_radius(z)), abs=0.02)

    def test_mode_sum_stable_across_truncations(self, square):
        """256^2 and 512^2 modes agree to 0.01."""
        coarse = conformal_radius(square, 0.5 + 0.5j, n_modes=256 ** 2)
        fine = conformal_radius(square, 0.5 + 0.5j, n_modes=512 ** 2)
        assert abs(coarse - fine) < 0.01

    def test_mode_sum_disc_rejected(self, disc):
        """The mode-sum estimate is square-only."""
        with pytest.raises(UnsupportedDomainError):
            extrapolated_log_radius(disc, 0.0, n_modes=4096)

    def test_extrapolation_near_boundary_rejected(self, square):
        """Offsets leaving the domain should raise BoundaryProximityError."""
        with pytest.raises(BoundaryProximityError):
            extrapolated_log_radius(square, 0.5 + 0.001j, n_modes=4096)

    def test_disc_host_radius(self, disc):
        """The disc origin sits at the host centre, scaled by 3."""
        assert to_field_coordinates(disc, 0.0) == pytest.approx(0.5 + 0.5j)
        expected = math.log(SQUARE_CENTRE_RADIUS) + math.log(3.0)
        assert float(field_log_radius(disc, 0.0)) == pytest.approx(expected, abs=1e-6)


class TestConformalMaps:
    """Test map evaluation and derivatives."""

    def test_inverse_undoes_forward(self):
        """psi(phi(z)) = z for a disc automorphism."""
        cmap = ConformalMap.disc_automorphism(0.3 + 0.2j, 0.7)
        z = -0.4 + 0.25j
        w = map_apply(cmap, z, Direction.FORWARD)
        assert abs(w) < 1.0
        assert map_apply(cmap, w, Direction.INVERSE) == pytest.approx(z)

    def test_derivative_matches_difference_quotient(self):
        """|phi'(z)| should match a central difference."""
        cmap = ConformalMap.disc_automorphism(0.3 + 0.2j, 0.7)
        z, h = 0.1 - 0.2j, 1e-6
        numeric = abs(map_apply(cmap, z + h) - map_apply(cmap, z - h)) / (2 * h)
        assert map_derivative_modulus(cmap, z) == pytest.approx(numeric, rel=1e-6)
        w = map_apply(cmap, z)
        assert map_derivative_modulus(cmap, w, Direction.INVERSE) == pytest.approx(1.0 / numeric, rel=1e-6)

    def test_rotation_derivative_is_one(self):
        """Rotations have |phi'| identically 1."""
        cmap = ConformalMap.rotation_by(math.pi / 3)
        values = map_derivative_modulus(cmap, np.array([0.1j, 0.5, -0.3 + 0.2j]))
        np.testing.assert_array_equal(values, 1.0)
        assert map_apply(cmap, 0.5) == pytest.approx(0.5 * complex(math.cos(math.pi / 3), math.sin(math.pi / 3)))

    def test_affine_map(self):
        """Affine maps scale derivatives by the scale factor."""
        cmap = ConformalMap.affine(scale=2.0, rotation=0.0, translation=1.0j)
        assert map_apply(cmap, 0.5) == pytest.approx(1.0 + 1.0j)
        assert map_derivative_modulus(cmap, 0.5, Direction.INVERSE) == pytest.approx(0.5)

    def test_pole_raises(self):
        """Evaluating at 1 / conj(a) should raise PoleError."""
        cmap = ConformalMap.disc_automorphism(0.5, 0.0)
        with pytest.raises(PoleError):
            map_apply(cmap, 2.0)
