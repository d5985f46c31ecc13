"""Exact-scaling auxiliary field and moment estimators.

The auxiliary covariance is

    c_eps(x, y) = log+(1 / (|x - y| v eps)) + phi(|x - y| / eps),
    phi(u) = sqrt((1 - u)+),

so c_eps(x, x) = -log eps + 1 and c_{l eps}(l x, l y) = log(1/l) + c_eps(x, y)
whenever |x - y| <= 1 and eps <= 1. This module also carries the
Gaussian-mollified log kernel, the moment exponent zeta(q) and Monte-Carlo
estimators of E[(int exp(X-bar_eps(B_s)) 1_S ds)^q].
"""

import logging
import math
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh

from liouville.brownian import sample_path
from liouville.errors import (
    BudgetExceededError,
    CoincidentPointsError,
    NotPositiveSemidefiniteError,
    QuadratureError,
    ValidationError,
)
from liouville.geometry import as_points
from liouville.gff import circle_average_covariance
from liouville.models import AuxFieldKernel, DomainSpec, MomentEstimate
from liouville.rng import Purpose, substream

logger = logging.getLogger(__name__)

MAX_POINTS = 2000
PSD_TOLERANCE = 1e-8
QUADRATURE_TOLERANCE = 1e-6
GAUSS_CUTOFF = 12.0

# S is the unit square, paths stop on leaving S' = [-1, 2]^2
OUTER_LOW, OUTER_HIGH = -1.0, 2.0


def bump(u):
    """phi(u) = sqrt((1 - u)+)."""
    return np.sqrt(np.maximum(1.0 - np.asarray(u, dtype=float), 0.0))


def aux_covariance(x, y, epsilon: float):
    """c_eps(x, y); broadcasts over point arrays."""
    if epsilon <= 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    r = np.abs(as_points(x) - as_points(y))
    value = np.maximum(-np.log(np.maximum(r, epsilon)), 0.0) + bump(r / epsilon)
    return float(value) if np.ndim(value) == 0 else value


def scaling_residual(x, y, epsilon: float, lam: float):
    """c_{l eps}(l x, l y) - c_eps(x, y) - log(1 / l); zero when |x - y| <= 1, eps <= 1."""
    if not 0.0 < lam <= 1.0:
        raise ValidationError(f"scale factor must lie in (0, 1], got {lam}")
    zx, zy = as_points(x), as_points(y)
    scaled = aux_covariance(lam * zx, lam * zy, lam * epsilon)
    return np.asarray(scaled) - np.asarray(aux_covariance(zx, zy, epsilon)) + math.log(lam)


def _factor(covariance: np.ndarray) -> np.ndarray:
    """Square root of a covariance matrix by eigendecomposition."""
    eigenvalues, vectors = eigh(covariance)
    top = float(eigenvalues[-1]) if eigenvalues.size else 0.0
    if eigenvalues.size and eigenvalues[0] < -PSD_TOLERANCE * max(top, 0.0):
        raise NotPositiveSemidefiniteError(
            f"covariance has eigenvalue {eigenvalues[0]:.3e} (max {top:.3e})"
        )
    return vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def sample_aux_field(points, epsilon: float, seed: int, replicate: int = 0,
                     n_draws: Optional[int] = None) -> np.ndarray:
    """Joint Gaussian draw(s) of the auxiliary field at the given points.

    Args:
        points: Pairwise-distinct points (at most 2000)
        epsilon: Kernel scale
        seed: Root seed
        replicate: Replicate index selecting the aux substream
        n_draws: Number of independent draws; None for a single draw

    Returns:
        Array of shape (len(points),) or (n_draws, len(points))

    Raises:
        BudgetExceededError: If more than 2000 points are requested
        NotPositiveSemidefiniteError: If the covariance is not PSD
    """
    pts = np.atleast_1d(as_points(points))
    if pts.size > MAX_POINTS:
        raise BudgetExceededError(f"{pts.size} points exceed the dense budget of {MAX_POINTS}")
    if np.unique(pts).size != pts.size:
        raise CoincidentPointsError("auxiliary field points must be pairwise distinct")
    root = _factor(aux_covariance(pts[:, None], pts[None, :], epsilon))
    rng = substream(seed, replicate, Purpose.AUX)
    draws = rng.standard_normal((pts.size, 1 if n_draws is None else n_draws))
    values = (root @ draws).T
    return values[0] if n_draws is None else values


# Mollified kernel

def _log_plus_circle_mean(rho: float, radius: np.ndarray, order: int) -> np.ndarray:
    """Mean of log+ |z - radius e^{i phi}| over phi, |z| = rho."""
    out = np.zeros_like(radius)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    for index, a in enumerate(radius):
        if a + rho <= 1.0:
            continue
        if rho == 0.0 or a == 0.0:
            out[index] = max(math.log(max(a, rho)), 0.0)
            continue
        cos_star = (rho * rho + a * a - 1.0) / (2.0 * rho * a)
        start = math.acos(min(max(cos_star, -1.0), 1.0))
        phi = start + (math.pi - start) * 0.5 * (nodes + 1.0)
        distance_sq = rho * rho + a * a - 2.0 * rho * a * np.cos(phi)
        out[index] = 0.5 * (math.pi - start) * np.sum(weights * 0.5 * np.log(distance_sq)) / math.pi
    return out


def _mollified(rho: float, epsilon: float, order: int) -> float:
    def radial(s: float) -> float:
        a = epsilon * s
        inner = -math.log(max(rho, a)) if max(rho, a) > 0.0 else 0.0
        plus = _log_plus_circle_mean(rho, np.array([a]), order)[0]
        return s * math.exp(-0.5 * s * s) * (inner + plus)

    kinks = [b / epsilon for b in (rho, abs(1.0 - rho), 1.0 + rho) if 0.0 < b / epsilon < GAUSS_CUTOFF]
    value, error = quad(radial, 0.0, GAUSS_CUTOFF, points=sorted(set(kinks)) or None,
                        limit=200, epsabs=1e-11, epsrel=1e-11)
    if error > QUADRATURE_TOLERANCE:
        raise QuadratureError(f"radial quadrature error estimate {error:.2e}")
    return value


def mollified_covariance(x, y, epsilon: float) -> float:
    """(f * theta_eps)(x - y) with f = log+(1/|.|) and a Gaussian theta_eps.

    Polar quadrature: the circle mean of log(1/|z - w|) is log(1/max(|z|, a))
    and the circle mean of log+|z - w| is integrated by Gauss-Legendre.

    Raises:
        QuadratureError: If two refinement levels differ by more than 1e-6
    """
    if epsilon <= 0.0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    rho = float(abs(complex(as_points(x)) - complex(as_points(y))))
    coarse = _mollified(rho, epsilon, 48)
    fine = _mollified(rho, epsilon, 96)
    if abs(fine - coarse) > QUADRATURE_TOLERANCE:
        raise QuadratureError(f"refinement levels differ by {abs(fine - coarse):.2e}")
    return fine


def mollifier_sandwich(epsilon: float, radii: Iterable[float]) -> Tuple[float, float]:
    """Constants (c1, c2) with log+(1/r) - c1 <= (f * theta_eps)(r) <= log+(1/r) + c2 on the sweep."""
    gaps = []
    for r in radii:
        exact = max(-math.log(r), 0.0)
        gaps.append(mollified_covariance(0.0, complex(r), epsilon) - exact)
    gaps = np.asarray(gaps)
    return float(max(-gaps.min(), 0.0)), float(max(gaps.max(), 0.0))


# zeta(q)

def zeta(q, gamma: float):
    """zeta(q) = q^2 gamma^2 / 2 - q (2 + gamma^2 / 2) + 2, factored as (q - 1)(q gamma^2/2 - 2)."""
    q = np.asarray(q, dtype=float)
    value = (q - 1.0) * (0.5 * q * gamma ** 2 - 2.0)
    return float(value) if value.ndim == 0 else value


def zeta_derivative_at_one(gamma: float) -> float:
    return 0.5 * gamma ** 2 - 2.0


def zeta_minimizer(gamma: float) -> float:
    """Vertex of the parabola; infinite for gamma = 0."""
    if gamma == 0.0:
        return math.inf
    return (2.0 + 0.5 * gamma ** 2) / gamma ** 2


def zeta_min_on_interval(gamma: float, low: float = 1.0, high: float = 2.0) -> Tuple[float, float]:
    """(q, zeta(q)) minimising zeta over [low, high]."""
    q = min(max(zeta_minimizer(gamma), low), high)
    return q, zeta(q, gamma)


# Moment estimators

def _occupation_path(start: complex, dt: float, horizon: float, seed: int, replicate: int) -> np.ndarray:
    """Path positions before leaving S' (or the horizon), at spacing dt."""
    path = sample_path(None, start, dt, horizon, seed, replicate)
    positions = path.positions
    outside = (positions.real <= OUTER_LOW) | (positions.real >= OUTER_HIGH) | \
              (positions.imag <= OUTER_LOW) | (positions.imag >= OUTER_HIGH)
    exits = np.flatnonzero(outside)
    return positions[:exits[0]] if exits.size else positions


def _in_unit_square(points: np.ndarray) -> np.ndarray:
    return (points.real >= 0.0) & (points.real <= 1.0) & (points.imag >= 0.0) & (points.imag <= 1.0)


def _checkerboard(points: np.ndarray, weights: np.ndarray, depth: int, q: float) -> Tuple[float, float]:
    """Diagonal and cross terms of (sum_i d_i^{q/2})^2 over the (even, even) squares."""
    side = 2 ** depth
    cx = np.clip(np.floor(points.real * side), 0, side - 1).astype(np.int64)
    cy = np.clip(np.floor(points.imag * side), 0, side - 1).astype(np.int64)
    chosen = (cx % 2 == 0) & (cy % 2 == 0)
    d = np.bincount(cx[chosen] * side + cy[chosen], weights=weights[chosen], minlength=side * side)
    diagonal = float(np.sum(d ** q))
    cross = float(np.sum(d ** (0.5 * q)) ** 2 - diagonal)
    return diagonal, max(cross, 0.0)


def _moment_replicate(gamma: float, q: float, epsilon: float, depth: int, seed: int,
                      start: complex, horizon: float, max_points: int, replicate: int):
    dt = 0.25 * epsilon ** 2
    positions = _occupation_path(start, dt, horizon, seed, replicate)
    points = positions[_in_unit_square(positions)]
    if gamma == 0.0:
        weights = np.full(points.size, dt)
    else:
        if points.size > max_points:
            raise BudgetExceededError(
                f"replicate {replicate}: {points.size} net points in S exceed {max_points}; "
                "lower the horizon"
            )
        field = sample_aux_field(points, epsilon, seed, replicate) if points.size else np.empty(0)
        sigma_sq = AuxFieldKernel(epsilon).sigma_sq
        weights = dt * np.exp(gamma * field - 0.5 * gamma ** 2 * sigma_sq)
    total = float(np.sum(weights))
    diagonal, cross = _checkerboard(points, weights, depth, q)
    return total ** q, diagonal, cross


def moment_estimator(gamma: float, q: float, epsilon: float, m: int, n_replicates: int,
                     seed: int, start=0.5 + 0.5j, horizon: float = 1.0,
                     max_points: int = MAX_POINTS,
                     mapper: Callable = map) -> MomentEstimate:
    """Monte-Carlo estimate of E[(int_0^T exp(X-bar_eps(B_s)) 1_S(B_s) ds)^q].

    The integral is a net sum with spacing eps^2 / 4 along a path started
    at `start` and stopped on leaving [-1, 2]^2 or at `horizon`.

    Args:
        gamma: Coupling constant
        q: Moment order in (1, 2)
        epsilon: Auxiliary field scale in [2**-6, 2**-3]
        m: Checkerboard depth (squares of side 2**-m)
        n_replicates: Number of replicates
        seed: Root seed
        start: Starting point inside S
        horizon: Euclidean time cap
        max_points: Point budget per replicate
        mapper: map-like callable used to run replicates

    Raises:
        BudgetExceededError: If a replicate has too many points in S
    """
    if not 1.0 < q < 2.0:
        raise ValidationError(f"q must lie in (1, 2), got {q}")
    if not 0.0 <= gamma < 2.0:
        raise ValidationError(f"gamma must lie in [0, 2), got {gamma}")
    if not 2.0 ** -6 <= epsilon <= 2.0 ** -3:
        raise ValidationError(f"epsilon must lie in [2**-6, 2**-3], got {epsilon}")
    if m < 1 or n_replicates < 1:
        raise ValidationError("m and n_replicates must be positive")
    if max_points > MAX_POINTS:
        raise BudgetExceededError(f"max_points {max_points} exceeds {MAX_POINTS}")

    z0 = complex(as_points(start))

    def run(replicate: int):
        return _moment_replicate(gamma, q, epsilon, m, seed, z0, horizon, max_points, replicate)

    rows = np.asarray(list(mapper(run, range(n_replicates))), dtype=float)
    values = rows[:, 0]
    stderr = float(values.std(ddof=1) / math.sqrt(n_replicates)) if n_replicates > 1 else 0.0
    return MomentEstimate(q, gamma, epsilon, m, float(values.mean()), stderr, n_replicates,
                          float(rows[:, 1].mean()), float(rows[:, 2].mean()), seed)


def occupation_moment(q: float, dt: float, n_replicates: int, seed: int,
                      start=0.5 + 0.5j, horizon: float = 1.0) -> Tuple[float, float]:
    """Direct estimate of E[(time in S before leaving S')^q] with its standard error."""
    z0 = complex(as_points(start))
    values = []
    for replicate in range(n_replicates):
        positions = _occupation_path(z0, dt, horizon, seed, replicate)
        values.append((dt * np.count_nonzero(_in_unit_square(positions))) ** q)
    values = np.asarray(values)
    stderr = float(values.std(ddof=1) / math.sqrt(n_replicates)) if n_replicates > 1 else 0.0
    return float(values.mean()), stderr


# Covariance comparison

def covariance_gap(points, epsilon: float, n_modes: int,
                   domain: Optional[DomainSpec] = None) -> Tuple[float, float]:
    """Constants (a, b) with c_eps - a <= Cov(h_eps(x), h_eps(y)) <= c_eps + b on the point set."""
    domain = domain or DomainSpec()
    pts = np.atleast_1d(as_points(points))
    field_cov = circle_average_covariance(domain, pts[:, None], pts[None, :], epsilon, n_modes)
    gap = np.asarray(field_cov) - aux_covariance(pts[:, None], pts[None, :], epsilon)
    return float(max(-gap.min(), 0.0)), float(max(gap.max(), 0.0))


def chaos_moment(covariance: np.ndarray, q: float, gamma: float, weights: Sequence[float],
                 n_draws: int, seed: int) -> Tuple[float, float]:
    """E[(sum_i w_i exp(gamma Y_i - gamma^2/2 Var Y_i))^q] for Y ~ N(0, covariance).

    Returns:
        (mean, standard error) over n_draws draws
    """
    covariance = np.asarray(covariance, dtype=float)
    root = _factor(covariance)
    draws = root @ substream(seed, 0, Purpose.AUX).standard_normal((covariance.shape[0], n_draws))
    exponent = gamma * draws - 0.5 * gamma ** 2 * np.diag(covariance)[:, None]
    totals = np.asarray(weights, dtype=float) @ np.exp(exponent)
    values = totals ** q
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_draws))
