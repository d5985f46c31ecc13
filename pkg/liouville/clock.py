"""The Liouville clock along a Brownian path.

mu_eps(t) = int_0^{t ^ T} exp(gamma h_eps(B_s) - gamma^2/2 Var h_eps(B_s)) ds

is integrated by the trapezoid rule at the path's sample times. The
inverse clock interpolates linearly, so Z_eps = B(mu_eps^-1) is continuous.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from liouville.brownian import net_times, position_at
from liouville.errors import (
    DtTooCoarseError,
    EpsilonExceedsMarginError,
    TauBeyondRangeError,
    ValidationError,
)
from liouville.geometry import distance_to_boundary, field_log_radius
from liouville.gff import (
    TAIL_THRESHOLD,
    circle_average,
    circle_average_evaluator,
    circle_average_variance,
    variance_tail,
)
from liouville.models import (
    BrownianPath,
    ClockProcess,
    DomainSpec,
    LBMTrajectory,
    SpectralGFF,
    VarianceMode,
)

logger = logging.getLogger(__name__)

Offset = Callable[[np.ndarray], np.ndarray]

DT_FACTOR = 16.0


def _domain_of(field: SpectralGFF, path: BrownianPath) -> DomainSpec:
    return path.domain if path.domain is not None else field.domain


def check_clock_inputs(path: BrownianPath, gamma: float, k: int,
                       domain: DomainSpec) -> float:
    """Validate gamma, eps = 2**-k and dt; return eps."""
    if not 0.0 <= gamma < 2.0:
        raise ValidationError(f"gamma must lie in [0, 2), got {gamma}")
    epsilon = 2.0 ** -k
    if epsilon > domain.inner_margin:
        raise EpsilonExceedsMarginError(
            f"eps=2**-{k}={epsilon} exceeds the margin {domain.inner_margin}"
        )
    if path.dt > epsilon ** 2 / DT_FACTOR * (1.0 + 1e-12):
        raise DtTooCoarseError(f"dt={path.dt} exceeds eps**2/16={epsilon ** 2 / DT_FACTOR}")
    return epsilon


def _guard(domain: DomainSpec, points: np.ndarray, epsilon: float,
           fallback: complex) -> np.ndarray:
    """Replace points whose eps-circle leaves the domain by `fallback`."""
    outside = distance_to_boundary(domain, points) <= epsilon
    if not np.any(outside):
        return points
    points = points.copy()
    points[outside] = fallback
    return points


def _fallback(path: BrownianPath) -> complex:
    return complex(path.positions[max(path.stop_index - 1, 0)])


def integrand(field: SpectralGFF, domain: DomainSpec, points: np.ndarray, gamma: float,
              epsilon: float, variance_mode: VarianceMode,
              log_radius: Optional[np.ndarray] = None,
              offset: Optional[Offset] = None) -> np.ndarray:
    """exp(gamma (h_eps + offset) - gamma^2/2 Var) at points whose circles fit."""
    evaluator = circle_average_evaluator(field, epsilon, domain)
    h = np.atleast_1d(circle_average(evaluator, points))
    if offset is not None:
        h = h + offset(points)
    if variance_mode is VarianceMode.ANALYTIC_MODE_SUM:
        variance = circle_average_variance(domain, points, epsilon, field.n_modes, warn=False)
    elif variance_mode is VarianceMode.CONFORMAL_RADIUS_FORMULA:
        radius_term = field_log_radius(domain, points) if log_radius is None else log_radius
        variance = -math.log(epsilon) + radius_term
    else:
        variance = -math.log(epsilon)
    return np.exp(gamma * h - 0.5 * gamma ** 2 * np.asarray(variance))


def clock_process(field: SpectralGFF, path: BrownianPath, gamma: float, k: int,
                  variance_mode: VarianceMode = VarianceMode.ANALYTIC_MODE_SUM,
                  offset: Optional[Offset] = None,
                  log_radius: Optional[np.ndarray] = None) -> ClockProcess:
    """Sample mu_eps(i dt) for i = 0..stop_index.

    Args:
        field: Sampled field (restricted to the path's domain)
        path: Stopped Brownian path
        gamma: Coupling constant in [0, 2)
        k: Dyadic level, eps = 2**-k
        variance_mode: Variance convention in the integrand
        offset: Optional deterministic function added to h_eps
        log_radius: Precomputed log conformal radius along the path
            (CONFORMAL_RADIUS_FORMULA only)

    Returns:
        ClockProcess with nondecreasing values, values[0] = 0

    Raises:
        EpsilonExceedsMarginError: If eps is larger than the margin
        DtTooCoarseError: If dt > eps**2 / 16
    """
    domain = _domain_of(field, path)
    epsilon = check_clock_inputs(path, gamma, k, domain)
    if gamma == 0.0 and offset is None:
        values = path.dt * np.arange(path.stop_index + 1, dtype=float)
        return ClockProcess(path, gamma, k, values, variance_mode)

    if variance_mode is VarianceMode.ANALYTIC_MODE_SUM:
        tail = variance_tail(epsilon, field.n_modes, domain)
        if tail > TAIL_THRESHOLD:
            logger.debug(f"Clock variance tail {tail:.4f} at eps={epsilon}, n_modes={field.n_modes}")

    # only the stop point can sit within eps of the boundary
    points = _guard(domain, path.positions, epsilon, _fallback(path))
    if log_radius is not None:
        log_radius = np.where(points == path.positions, log_radius,
                              log_radius[max(path.stop_index - 1, 0)])
    f = integrand(field, domain, points, gamma, epsilon, variance_mode, log_radius, offset)
    values = cumulative_trapezoid(f, dx=path.dt, initial=0.0)
    return ClockProcess(path, gamma, k, values, variance_mode)


def clock_value_at(clock: ClockProcess, t) -> np.ndarray:
    """mu_eps(t) by linear interpolation, constant after the stopping time."""
    return np.interp(t, clock.times, clock.values)


def inverse_clock(clock: ClockProcess, tau):
    """mu_eps^-1(tau) = inf{s : mu_eps(s) > tau}, interpolated linearly.

    tau equal to the final clock value maps to the stopping time.

    Raises:
        TauBeyondRangeError: If tau is outside [0, final clock value]
    """
    tau_arr = np.asarray(tau, dtype=float)
    values = clock.values
    if np.any(tau_arr < 0.0) or np.any(tau_arr > clock.total):
        raise TauBeyondRangeError(f"tau outside [0, {clock.total}]")
    upper = np.searchsorted(values, tau_arr, side="right")
    last = values.size - 1
    at_end = upper > last
    upper = np.clip(upper, 1, last if last > 0 else 1)
    lower = upper - 1
    if last == 0:
        result = np.zeros_like(tau_arr)
    else:
        rise = values[upper] - values[lower]
        safe = np.where(rise > 0.0, rise, 1.0)
        result = clock.path.dt * (lower + np.where(rise > 0.0, (tau_arr - values[lower]) / safe, 0.0))
        result = np.where(at_end, clock.path.duration, result)
    return float(result) if result.ndim == 0 else result


def lbm_trajectory(path: BrownianPath, clock: ClockProcess, quantum_dt: float) -> LBMTrajectory:
    """Z_eps(j quantum_dt) = B(mu_eps^-1(j quantum_dt)) up to the total quantum time."""
    if quantum_dt <= 0.0:
        raise ValidationError(f"quantum_dt must be positive, got {quantum_dt}")
    count = int(math.floor(clock.total / quantum_dt + 1e-12)) + 1
    taus = np.minimum(quantum_dt * np.arange(count), clock.total)
    euclidean = np.atleast_1d(inverse_clock(clock, taus))
    points = position_at(path, np.minimum(euclidean, path.duration))
    return LBMTrajectory(quantum_dt, points, euclidean, clock.total)


def dyadic_totals(field: SpectralGFF, path: BrownianPath, gamma: float, levels: Sequence[int],
                  horizon: Optional[float] = None,
                  variance_mode: VarianceMode = VarianceMode.CONFORMAL_RADIUS_FORMULA) -> np.ndarray:
    """Clock values at a common Euclidean horizon for each dyadic level."""
    domain = _domain_of(field, path)
    end = path.duration if horizon is None else min(horizon, path.duration)
    log_radius = None
    if variance_mode is VarianceMode.CONFORMAL_RADIUS_FORMULA and gamma > 0.0:
        log_radius = field_log_radius(domain, path.positions)
    totals = []
    for k in levels:
        clock = clock_process(field, path, gamma, k, variance_mode, log_radius=log_radius)
        totals.append(float(clock_value_at(clock, end)))
    return np.asarray(totals)


def cauchy_diagnostic(field: SpectralGFF, path: BrownianPath, gamma: float, k_min: int,
                      k_max: int, horizon: Optional[float] = None) -> np.ndarray:
    """|alpha_{k+1} - alpha_k| for k = k_min..k_max-1 at a fixed horizon."""
    if k_max <= k_min:
        raise ValidationError(f"k_max must exceed k_min, got {k_min}..{k_max}")
    totals = dyadic_totals(field, path, gamma, range(k_min, k_max + 1), horizon)
    return np.abs(np.diff(totals))


def net_estimators(field: SpectralGFF, path: BrownianPath, gamma: float, k: int,
                   s_offset: float = 0.0) -> Tuple[float, float]:
    """Net sums X_k(s) and Y_k(s) of exp(h-bar) at levels k and k + 1.

    X_k(s) = 4**-k sum_{t in S_k^s} exp(gamma h_{2^-k}(B_t) + gamma^2/2 log 2^-k);
    Y_k uses radius 2**-(k+1) on the same net.

    Raises:
        NetFinerThanPathError: If 4**-k < dt
    """
    domain = _domain_of(field, path)
    if not 0.0 <= gamma < 2.0:
        raise ValidationError(f"gamma must lie in [0, 2), got {gamma}")
    if 2.0 ** -k > domain.inner_margin:
        raise EpsilonExceedsMarginError(f"eps=2**-{k} exceeds the margin {domain.inner_margin}")
    spacing = 4.0 ** -k
    times, _ = net_times(path, spacing, s_offset)
    points = position_at(path, times)
    sums = []
    for level in (k, k + 1):
        epsilon = 2.0 ** -level
        if gamma == 0.0:
            sums.append(spacing * times.size)
            continue
        guarded = _guard(domain, points, epsilon, _fallback(path))
        f = integrand(field, domain, guarded, gamma, epsilon, VarianceMode.NORMALIZED)
        sums.append(float(spacing * np.sum(f)))
    return sums[0], sums[1]


def is_strictly_increasing_on_net(clock: ClockProcess, spacing: float) -> bool:
    """True if mu increases strictly between consecutive net times j * spacing."""
    times, _ = net_times(clock.path, spacing, horizon=clock.path.duration)
    return bool(np.all(np.diff(clock_value_at(clock, times)) > 0.0))
