"""Spectral Gaussian Free Field sampling and exact circle averages.

The field lives on the unit square as h = sum_i coeff_i e_i. Circle
averages are exact: the mean of a Dirichlet eigenfunction over a circle
of radius eps is J0(sqrt(lambda) eps) times its value at the centre.
Disc domains evaluate the square field through geometry.to_field_coordinates.
"""

import logging
import math
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import j0

from liouville import spectral
from liouville.errors import (
    BoundaryProximityError,
    ModeRangeError,
    UnsupportedDomainError,
    ValidationError,
)
from liouville.geometry import (
    as_points,
    distance_to_boundary,
    field_scale,
    require_interior,
    to_field_coordinates,
)
from liouville.models import CircleAverageEvaluator, DomainKind, DomainSpec, SpectralGFF
from liouville.rng import Purpose, substream

logger = logging.getLogger(__name__)

MIN_MODES = 64
TAIL_THRESHOLD = 0.02


def sample_gff(domain: DomainSpec, n_modes: int, seed: int, replicate: int = 0) -> SpectralGFF:
    """Draw a truncated GFF on the unit square.

    Args:
        domain: Must be the unit square
        n_modes: Number of modes (at least 64)
        seed: Root seed
        replicate: Replicate index selecting the field substream

    Returns:
        SpectralGFF with coeff_i = X_i sqrt(2 pi / lambda_i)

    Raises:
        UnsupportedDomainError: For the unit disc
        ValidationError: If n_modes < 64
    """
    if domain.kind is not DomainKind.UNIT_SQUARE:
        raise UnsupportedDomainError(
            "fields are sampled on the unit square; disc experiments restrict a square field"
        )
    if n_modes < MIN_MODES:
        raise ValidationError(f"n_modes must be at least {MIN_MODES}, got {n_modes}")
    m, n = spectral.mode_table(n_modes)
    normals = substream(seed, replicate, Purpose.FIELD).standard_normal(n_modes)
    coeff = normals * np.sqrt(2.0 * np.pi / spectral.eigenvalues(m, n))
    return SpectralGFF(domain, m, n, coeff, seed, replicate)


def project_field(field: SpectralGFF, n: int) -> SpectralGFF:
    """Orthogonal projection h^n onto the first n modes."""
    if not 1 <= n <= field.n_modes:
        raise ModeRangeError(f"projection index must lie in 1..{field.n_modes}, got {n}")
    if n == field.n_modes:
        return field
    return SpectralGFF(field.domain, field.m[:n], field.n[:n], field.coeff[:n],
                       field.seed, field.replicate)


def circle_average_evaluator(field: SpectralGFF, epsilon: float,
                             domain: Optional[DomainSpec] = None) -> CircleAverageEvaluator:
    """Precompute the attenuated coefficient table for radius epsilon.

    Args:
        field: Sampled field
        epsilon: Circle radius in units of `domain`; 0 evaluates h itself
        domain: Domain whose points are evaluated (defaults to the field's)
    """
    if epsilon < 0.0:
        raise ValidationError(f"epsilon must be non-negative, got {epsilon}")
    domain = domain or field.domain
    host_radius = epsilon * field_scale(domain)
    attenuation = j0(np.sqrt(field.eigenvalues) * host_radius)
    # e_mn = 2 sin sin
    table = spectral.scatter(field.m, field.n, 2.0 * field.coeff * attenuation)
    return CircleAverageEvaluator(field, float(epsilon), domain, attenuation, table)


def circle_average(evaluator: CircleAverageEvaluator, z) -> Union[float, np.ndarray]:
    """h_eps(z) for one point or an array of points.

    Raises:
        BoundaryProximityError: If the circle of radius eps leaves the domain
    """
    points = as_points(z)
    if np.any(distance_to_boundary(evaluator.domain, points) <= evaluator.epsilon):
        raise BoundaryProximityError(
            f"circle of radius {evaluator.epsilon} leaves the {evaluator.domain.kind.value}"
        )
    values = spectral.contract(evaluator.table, to_field_coordinates(evaluator.domain, points))
    return float(values) if np.ndim(values) == 0 else values


def evaluate_field(field: SpectralGFF, z) -> Union[float, np.ndarray]:
    """Pointwise value of the truncated field."""
    points = as_points(z)
    require_interior(field.domain, points)
    return circle_average(circle_average_evaluator(field, 0.0), points)


def evaluate_grid(field: SpectralGFF, grid_n: int, epsilon: float = 0.0,
                  domain: Optional[DomainSpec] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate h (or h_eps) at the cell centres of a grid_n x grid_n lattice.

    For the disc the lattice covers [-1, 1]^2. Cells whose centre is not
    farther than eps from the boundary are left out.

    Returns:
        (x, y, value) arrays over the kept cells, row-major in y then x
    """
    domain = domain or field.domain
    centres = (np.arange(grid_n) + 0.5) / grid_n
    if domain.kind is DomainKind.UNIT_DISC:
        centres = 2.0 * centres - 1.0
    gx, gy = np.meshgrid(centres, centres)
    points = (gx + 1j * gy).ravel()
    keep = distance_to_boundary(domain, points) > epsilon
    points = points[keep]
    values = circle_average(circle_average_evaluator(field, epsilon, domain), points)
    return points.real, points.imag, np.atleast_1d(values)


@lru_cache(maxsize=32)
def _variance_table(n_modes: int, host_radius: float) -> np.ndarray:
    m, n = spectral.mode_table(n_modes)
    lam = spectral.eigenvalues(m, n)
    # e_mn^2 = 4 sin^2 sin^2
    return spectral.scatter(m, n, 4.0 * (2.0 * np.pi / lam) * j0(np.sqrt(lam) * host_radius) ** 2)


def variance_tail(epsilon: float, n_modes: int, domain: Optional[DomainSpec] = None) -> float:
    """Estimated variance missing from an n_modes truncation at radius epsilon.

    With K = sqrt(lambda_max) and mode density k dk / (2 pi), the missing
    part is about int_{K eps}^inf J0(u)^2 / u du ~ 1 / (pi K eps).
    """
    scale = field_scale(domain) if domain is not None else 1.0
    m, n = spectral.mode_table(n_modes)
    k_max = math.sqrt(float(spectral.eigenvalues(m[-1:], n[-1:])[0]))
    return 1.0 / (math.pi * k_max * epsilon * scale)


def circle_average_variance(domain: DomainSpec, z, epsilon: float,
                            n_modes: int, warn: bool = True) -> Union[float, np.ndarray]:
    """Analytic Var h_eps(z) of the n_modes truncation.

    sum (2 pi / lambda) J0(sqrt(lambda) eps)^2 e_mn(z)^2, which tends to
    -log eps + log R(z; D) as n_modes grows. A warning is logged when the
    estimated tail exceeds 0.02 and `warn` is set.

    Raises:
        BoundaryProximityError: If the circle leaves the domain
    """
    points = as_points(z)
    if np.any(distance_to_boundary(domain, points) <= epsilon):
        raise BoundaryProximityError(f"circle of radius {epsilon} leaves the {domain.kind.value}")
    tail = variance_tail(epsilon, n_modes, domain)
    if warn and tail > TAIL_THRESHOLD:
        logger.warning(
            f"Variance truncation tail {tail:.4f} exceeds {TAIL_THRESHOLD} "
            f"(eps={epsilon}, n_modes={n_modes})"
        )
    host = to_field_coordinates(domain, points)
    values = spectral.contract(_variance_table(n_modes, epsilon * field_scale(domain)), host, host)
    return float(values) if np.ndim(values) == 0 else values


def circle_average_covariance(domain: DomainSpec, z, w, epsilon: float,
                              n_modes: int) -> Union[float, np.ndarray]:
    """Analytic Cov(h_eps(z), h_eps(w)) of the n_modes truncation."""
    zs, ws = as_points(z), as_points(w)
    if np.any(distance_to_boundary(domain, zs) <= epsilon) or \
            np.any(distance_to_boundary(domain, ws) <= epsilon):
        raise BoundaryProximityError(f"circle of radius {epsilon} leaves the {domain.kind.value}")
    table = _variance_table(n_modes, epsilon * field_scale(domain))
    values = spectral.contract(table, to_field_coordinates(domain, zs), to_field_coordinates(domain, ws))
    return float(values) if np.ndim(values) == 0 else values
