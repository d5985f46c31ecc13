"""Stopped planar Brownian paths and their net statistics.

The margin is tested only at grid times, so exit times overshoot by
O(sqrt(dt)); positions stay aligned with the clock integrand.
"""

import logging
import math
from collections import defaultdict
from typing import Optional, Tuple

import numpy as np

from liouville.errors import (
    LagExceedsDurationError,
    NetFinerThanPathError,
    StartTooCloseError,
    ValidationError,
)
from liouville.geometry import as_point, distance_to_boundary, require_interior
from liouville.models import BrownianPath, DomainSpec
from liouville.rng import Purpose, substream

logger = logging.getLogger(__name__)

NET_HORIZON = 1.0


def sample_path(domain: Optional[DomainSpec], start, dt: float, max_time: float,
                seed: int, replicate: int = 0) -> BrownianPath:
    """Sample B(i dt) from `start` until the margin or max_time is reached.

    Args:
        domain: Stopping domain, or None for free planar motion
        start: Starting point
        dt: Time step
        max_time: Time horizon; n_steps = round(max_time / dt)
        seed: Root seed
        replicate: Replicate index selecting the path substream

    Returns:
        BrownianPath holding positions up to and including stop_index

    Raises:
        StartTooCloseError: If the start lies within the stopping margin
    """
    if dt <= 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if max_time < 0.0:
        raise ValidationError(f"max_time must be non-negative, got {max_time}")
    z0 = as_point(start)
    if domain is not None:
        require_interior(domain, z0)
        if distance_to_boundary(domain, z0) <= domain.inner_margin:
            raise StartTooCloseError(
                f"start {z0} is within the margin {domain.inner_margin} of the boundary"
            )

    n_steps = int(round(max_time / dt))
    steps = substream(seed, replicate, Purpose.PATH).standard_normal((n_steps, 2)) * math.sqrt(dt)
    positions = np.empty(n_steps + 1, dtype=complex)
    positions[0] = z0
    positions[1:] = z0 + np.cumsum(steps[:, 0] + 1j * steps[:, 1])

    stop_index = n_steps
    if domain is not None:
        hits = np.flatnonzero(distance_to_boundary(domain, positions) <= domain.inner_margin)
        if hits.size:
            stop_index = int(hits[0])
            positions = positions[:stop_index + 1]
    logger.debug(f"Sampled path replicate={replicate}: stop_index={stop_index}/{n_steps}")
    return BrownianPath(z0, dt, positions, stop_index, n_steps, seed, replicate, domain)


def path_from_positions(positions, dt: float, domain: Optional[DomainSpec] = None) -> BrownianPath:
    """Wrap given positions (e.g. a synthetic or rotated path) as a BrownianPath."""
    positions = np.asarray(positions, dtype=complex)
    last = positions.size - 1
    return BrownianPath(complex(positions[0]), dt, positions, last, last, domain=domain)


def position_at(path: BrownianPath, t) -> np.ndarray:
    """Linearly interpolated position at Euclidean time(s) t within the path."""
    t = np.asarray(t, dtype=float)
    times = path.times
    if np.any(t < 0.0) or np.any(t > path.duration * (1.0 + 1e-12)):
        raise ValidationError(f"time outside [0, {path.duration}]")
    return np.interp(t, times, path.positions.real) + 1j * np.interp(t, times, path.positions.imag)


def net_times(path: BrownianPath, spacing: float, offset: float = 0.0,
              horizon: float = NET_HORIZON) -> Tuple[np.ndarray, bool]:
    """Times offset + j * spacing inside [0, min(horizon, duration)].

    Returns:
        (times, partial) where partial flags a path shorter than the horizon

    Raises:
        NetFinerThanPathError: If spacing < dt
    """
    if spacing < path.dt * (1.0 - 1e-12):
        raise NetFinerThanPathError(f"net spacing {spacing} is finer than dt={path.dt}")
    if not 0.0 <= offset < spacing:
        raise ValidationError(f"offset must lie in [0, {spacing}), got {offset}")
    end = min(horizon, path.duration)
    partial = path.duration < horizon
    if partial:
        logger.debug(f"Net covers [0, {end:.6g}] only; path stopped before {horizon}")
    count = int(math.floor((end - offset) / spacing + 1e-9)) + 1 if end >= offset else 0
    return offset + spacing * np.arange(count), partial


def net_positions(path: BrownianPath, k: int, s_offset: float = 0.0) -> np.ndarray:
    """Positions of the path on the dyadic net S_k^s = [0, 1] ∩ (s + 4**-k Z)."""
    times, _ = net_times(path, 4.0 ** -k, s_offset)
    return position_at(path, times)


def _cells(points: np.ndarray, side: float) -> dict:
    keys = np.stack([np.floor(points.real / side), np.floor(points.imag / side)], axis=1).astype(np.int64)
    buckets = defaultdict(list)
    for index, key in enumerate(map(tuple, keys)):
        buckets[key].append(index)
    return {key: np.asarray(value) for key, value in buckets.items()}


def pair_count(path: BrownianPath, k: int, s_offset: float = 0.0) -> int:
    """Ordered net pairs (t, t') with |B_t - B_t'| <= 2**-k, diagonal included.

    Points are hashed into cells of side 2**-k and only the 3 x 3
    neighbourhood of each cell is compared.
    """
    radius = 2.0 ** -k
    points = net_positions(path, k, s_offset)
    cells = _cells(points, radius)
    total = 0
    for (cx, cy), members in cells.items():
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                others = cells.get((cx + dx, cy + dy))
                if others is None:
                    continue
                gaps = np.abs(points[members][:, None] - points[others][None, :])
                total += int(np.count_nonzero(gaps <= radius))
    return total


def pair_count_bruteforce(path: BrownianPath, k: int, s_offset: float = 0.0) -> int:
    """O(n^2) reference for pair_count."""
    radius = 2.0 ** -k
    points = net_positions(path, k, s_offset)
    total = 0
    for lo in range(0, points.size, 1024):
        gaps = np.abs(points[lo:lo + 1024][:, None] - points[None, :])
        total += int(np.count_nonzero(gaps <= radius))
    return total


def modulus_of_continuity(path: BrownianPath, lag: float) -> float:
    """sup_i |B((i + w) dt) - B(i dt)| with w = floor(lag / dt).

    Raises:
        LagExceedsDurationError: If the lag is longer than the stopped path
    """
    if lag < path.dt * (1.0 - 1e-12):
        raise ValidationError(f"lag {lag} is shorter than dt={path.dt}")
    window = int(math.floor(lag / path.dt + 1e-9))
    if window > path.stop_index:
        raise LagExceedsDurationError(f"lag {lag} exceeds the path duration {path.duration}")
    positions = path.positions
    return float(np.max(np.abs(positions[window:] - positions[:positions.size - window])))


def levy_envelope(lag: float) -> float:
    """sqrt(2 lag log(1 / lag)), the Levy modulus at small lags."""
    return math.sqrt(2.0 * lag * math.log(1.0 / lag))
