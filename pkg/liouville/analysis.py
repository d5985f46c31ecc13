"""Dimension formulas, thick-point covers and the rotation check of the clock law.

Reference values:
- kpz_dimension: root in [0, 1] of d0 + d^2 gamma^2/2 - d (2 + gamma^2/2) = 0
- thick_dim_formula: (2 - alpha^2/2) / (2 - alpha gamma + gamma^2/2), clamped at 0
- hmp_dimension: (2 - alpha^2/2) v 0
"""

import logging
import math
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.stats import ks_2samp, norm

from liouville.brownian import position_at, sample_path
from liouville.clock import clock_process, clock_value_at
from liouville.errors import (
    NoRootError,
    ScaleFinerThanPathError,
    UnsupportedMapError,
    ValidationError,
)
from liouville.geometry import distance_to_boundary, map_apply, map_derivative_modulus
from liouville.gff import circle_average, circle_average_evaluator, circle_average_variance, sample_gff
from liouville.models import (
    BrownianPath,
    ClockProcess,
    ConformalCheckReport,
    ConformalMap,
    CoverDimension,
    Direction,
    DomainSpec,
    SpectralGFF,
    ThickPointCover,
    ThickScale,
    VarianceMode,
)

logger = logging.getLogger(__name__)

KS_LEVEL = 0.05


def kpz_dimension(d0: float, gamma: float) -> float:
    """Quantum dimension d of a set with Euclidean dimension d0.

    Uses the cancellation-free form of the smaller root,
    d = 2 d0 / ((2 + a) + sqrt((2 + a)^2 - 4 a d0)) with a = gamma^2 / 2,
    which reduces to d0 / 2 at gamma = 0.
    """
    if not 0.0 <= d0 <= 2.0:
        raise ValidationError(f"d0 must lie in [0, 2], got {d0}")
    if not 0.0 <= gamma < 2.0:
        raise ValidationError(f"gamma must lie in [0, 2), got {gamma}")
    a = 0.5 * gamma ** 2
    discriminant = (2.0 + a) ** 2 - 4.0 * a * d0
    if discriminant < 0.0:
        raise NoRootError(f"no real KPZ root for d0={d0}, gamma={gamma}")
    d = 2.0 * d0 / ((2.0 + a) + math.sqrt(discriminant))
    if not 0.0 <= d <= 1.0 + 1e-12:
        raise NoRootError(f"KPZ root {d} outside [0, 1]")
    return d


def kpz_inverse(d: float, gamma: float) -> float:
    """d0 = d (2 + gamma^2/2) - d^2 gamma^2 / 2."""
    a = 0.5 * gamma ** 2
    return d * (2.0 + a) - a * d * d


def thick_dim_formula(alpha: float, gamma: float) -> float:
    """Time dimension of the alpha-thick set; exactly 1 at alpha = gamma."""
    numerator = 2.0 - 0.5 * alpha ** 2
    if numerator <= 0.0:
        return 0.0
    return numerator / (numerator + 0.5 * (alpha - gamma) ** 2)


def hmp_dimension(alpha: float) -> float:
    if alpha < 0.0:
        raise ValidationError(f"alpha must be non-negative, got {alpha}")
    return max(2.0 - 0.5 * alpha ** 2, 0.0)


def liouville_q(gamma: float) -> float:
    """Q = gamma / 2 + 2 / gamma."""
    if gamma <= 0.0:
        raise ValidationError(f"Q needs gamma > 0, got {gamma}")
    return 0.5 * gamma + 2.0 / gamma


def conformal_offset(cmap: ConformalMap, gamma: float) -> Callable[[np.ndarray], np.ndarray]:
    """Deterministic shift Q log|psi'(z)| of the transported field."""
    q_value = liouville_q(gamma)

    def offset(points: np.ndarray) -> np.ndarray:
        return q_value * np.log(map_derivative_modulus(cmap, points, Direction.INVERSE))

    return offset


# Thick-point covers

def scale_exponent_for(alpha: float, eta: float) -> float:
    """K = 3 / (eta (2 - alpha^2 / 2))."""
    numerator = 2.0 - 0.5 * alpha ** 2
    if eta <= 0.0:
        raise ValidationError(f"eta must be positive, got {eta}")
    if numerator <= 0.0:
        raise ValidationError(f"alpha={alpha} >= 2 leaves the scale exponent undefined; pass one explicitly")
    return 3.0 / (eta * numerator)


def build_thick_cover(field: SpectralGFF, path: BrownianPath, clock: ClockProcess,
                      alpha: float, delta: float, eta: float, n_range: Iterable[int],
                      scale_exponent: Optional[float] = None) -> ThickPointCover:
    """Cover of the quantum times spent near alpha-thick points.

    For each admissible r_n = n**-K, the net t_nj = j r_n^2 (j >= 1, t_nj within
    min(1, duration)) is tested against h_{r_n}(B(t_nj)) >= (alpha - delta) log(1/r_n);
    selected times contribute [mu(t_nj - r_n^2), mu(t_nj + r_n^2)]. Each scale also
    records the Gaussian-tail mean of its selection count, summed over the tested
    net points with the analytic variance of h_{r_n} there.

    Args:
        field: Field used by the clock
        path: Path used by the clock
        clock: Clock built on `path`
        alpha: Thickness level
        delta: Threshold slack (> 0)
        eta: Exponent slack (> 0)
        n_range: Scale indices n >= 2
        scale_exponent: Override for K

    Raises:
        ScaleFinerThanPathError: If no scale has r_n^2 >= dt
    """
    if clock.path is not path:
        raise ValidationError("clock must be built on the given path")
    if delta <= 0.0:
        raise ValidationError(f"delta must be positive, got {delta}")
    exponent = scale_exponent if scale_exponent is not None else scale_exponent_for(alpha, eta)
    domain = path.domain if path.domain is not None else field.domain
    end = min(1.0, path.duration)
    cover = ThickPointCover(alpha, clock.gamma, delta, eta, exponent,
                            partial_coverage=path.duration < 1.0)
    if cover.partial_coverage:
        logger.info(f"Path stopped at {path.duration:.4g}; covering [0, {end:.4g}] only")

    for n in sorted(n_range):
        if n < 2:
            raise ValidationError(f"scale indices start at 2, got {n}")
        radius = float(n) ** -exponent
        spacing = radius ** 2
        if spacing < path.dt:
            cover.skipped_scales.append(n)
            continue
        count = int(math.floor(end / spacing + 1e-9))
        times = spacing * np.arange(1, count + 1)
        points = position_at(path, times) if count else np.empty(0, dtype=complex)
        inside = distance_to_boundary(domain, points) > radius
        dropped = int(np.count_nonzero(~inside))
        if dropped:
            logger.debug(f"Scale n={n}: dropped {dropped} net time(s) near the boundary")
        indices = np.flatnonzero(inside)
        threshold = (alpha - delta) * math.log(1.0 / radius)
        if indices.size:
            values = np.atleast_1d(circle_average(circle_average_evaluator(field, radius, domain),
                                                  points[indices]))
            variances = np.atleast_1d(circle_average_variance(domain, points[indices], radius,
                                                              field.n_modes, warn=False))
            expected = float(np.sum(norm.sf(threshold / np.sqrt(variances))))
        else:
            values = np.empty(0)
            expected = 0.0
        keep = values >= threshold
        chosen_times = times[indices[keep]]
        lower = clock_value_at(clock, np.clip(chosen_times - spacing, 0.0, path.duration))
        upper = clock_value_at(clock, np.clip(chosen_times + spacing, 0.0, path.duration))
        intervals = np.column_stack([lower, upper]) if chosen_times.size else np.empty((0, 2))
        cover.scales.append(ThickScale(n, radius, count, indices[keep] + 1, values[keep],
                                       intervals, dropped, expected))

    if cover.skipped_scales:
        logger.info(f"Skipped scales with r_n^2 < dt: {cover.skipped_scales}")
    if not cover.scales:
        raise ScaleFinerThanPathError(
            f"every scale in n_range has r_n^2 below dt={path.dt} (K={exponent:.3f})"
        )
    return cover


def cover_sums(cover: ThickPointCover, q_grid: Sequence[float]) -> dict:
    """sum over selected intervals of diam^q for each q."""
    diameters = cover.diameters()
    return {float(q): float(np.sum(diameters ** q)) for q in q_grid}


def cover_dimension_estimate(cover: ThickPointCover, q_grid: Sequence[float],
                             threshold: float = 1.0) -> CoverDimension:
    """Smallest q on the grid whose cover sum falls below `threshold`.

    Returns 1.0 when no grid value qualifies and 0.0 with the empty flag
    set for an empty cover.
    """
    for q in q_grid:
        if not 0.0 < q <= 1.0:
            raise ValidationError(f"q values must lie in (0, 1], got {q}")
    if cover.diameters().size == 0:
        return CoverDimension(0.0, True, {})
    sums = cover_sums(cover, sorted(q_grid))
    for q, total in sums.items():
        if total < threshold:
            return CoverDimension(q, False, sums)
    return CoverDimension(1.0, False, sums)


# Rotation check

def total_clock(field: SpectralGFF, path: BrownianPath, gamma: float, k: int,
                variance_mode: VarianceMode = VarianceMode.ANALYTIC_MODE_SUM) -> float:
    return clock_process(field, path, gamma, k, variance_mode).total


def conformal_clock_check(gamma: float, k: int, theta: float, n_replicates: int, seed: int,
                          start=0.3, margin: float = 0.1, n_modes: int = 512 ** 2,
                          dt: Optional[float] = None, max_time: float = 1.0,
                          shared_seeds: bool = False, cmap: Optional[ConformalMap] = None,
                          mapper: Callable = map) -> ConformalCheckReport:
    """Compare total clocks on the disc from z0 and from its rotation.

    Sample (i) starts at z0; sample (ii) starts at e^{i theta} z0 and is pulled
    back by the rotation, which leaves the total quantum time unchanged.
    Without shared seeds the second sample uses replicates n..2n-1.

    Raises:
        UnsupportedMapError: If the map is not a rotation
    """
    cmap = cmap or ConformalMap.rotation_by(theta)
    if not cmap.is_rotation:
        raise UnsupportedMapError("only rotations are supported by the conformal check")
    q_value = liouville_q(gamma)
    domain = DomainSpec.disc(margin)
    square = DomainSpec.square()
    step = dt if dt is not None else 0.25 ** k / 16.0
    z0 = complex(start)
    z1 = complex(map_apply(cmap, z0, Direction.FORWARD))
    shift = 0 if shared_seeds else n_replicates

    def run(replicate: int):
        totals = []
        for origin, index in ((z0, replicate), (z1, replicate + shift)):
            field = sample_gff(square, n_modes, seed, index)
            path = sample_path(domain, origin, step, max_time, seed, index)
            totals.append(total_clock(field, path, gamma, k))
        return totals

    samples = np.asarray(list(mapper(run, range(n_replicates))))
    direct, rotated = samples[:, 0], samples[:, 1]
    result = ks_2samp(direct, rotated)
    report = ConformalCheckReport(theta, gamma, q_value, float(result.statistic),
                                  float(result.pvalue), bool(result.pvalue < KS_LEVEL),
                                  direct, rotated)
    logger.info(f"KS statistic {report.statistic:.4f}, p={report.pvalue:.4f}, reject={report.reject}")
    return report
