"""Dirichlet sine modes of the unit square.

Helpers shared by the Green function and the field sampler:
- mode_table: the first n modes (m, n) ordered by eigenvalue
- weight tables scattered on the (m, n) grid
- chunked contractions sum_mn sin(m pi x) W[m, n] sin(n pi y)
"""

from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

CHUNK = 2048


@lru_cache(maxsize=16)
def mode_table(n_modes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return the first n_modes index pairs ordered by (m^2 + n^2, m, n).

    Args:
        n_modes: Number of modes to keep

    Returns:
        Read-only integer arrays (m, n)
    """
    if n_modes < 1:
        raise ValueError(f"n_modes must be positive, got {n_modes}")
    side = int(np.ceil(np.sqrt(4.0 * n_modes / np.pi))) + 2
    while True:
        grid = np.arange(1, side + 1)
        m, n = np.meshgrid(grid, grid, indexing="ij")
        m, n = m.ravel(), n.ravel()
        s = m * m + n * n
        # every mode with s <= side**2 lies inside the grid
        if np.count_nonzero(s <= side * side) >= n_modes:
            break
        side += max(2, side // 8)
    order = np.lexsort((n, m, s))[:n_modes]
    m_sorted, n_sorted = m[order].copy(), n[order].copy()
    m_sorted.setflags(write=False)
    n_sorted.setflags(write=False)
    return m_sorted, n_sorted


def eigenvalues(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    return np.pi ** 2 * (m.astype(float) ** 2 + n.astype(float) ** 2)


def scatter(m: np.ndarray, n: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Lay per-mode values out on a dense (max m, max n) table."""
    table = np.zeros((int(m.max()), int(n.max())))
    np.add.at(table, (m - 1, n - 1), values)
    return table


def sine_table(t: np.ndarray, size: int) -> np.ndarray:
    """sin(k pi t) for k = 1..size, shape (len(t), size)."""
    return np.sin(np.pi * np.outer(t, np.arange(1, size + 1)))


def contract(table: np.ndarray, z: np.ndarray, w: Optional[np.ndarray] = None) -> np.ndarray:
    """Evaluate a bilinear sine sum at complex points.

    With w None this is sum_mn W[m, n] sin(m pi x) sin(n pi y); otherwise
    sum_mn W[m, n] sin(m pi x) sin(m pi x') sin(n pi y) sin(n pi y') with
    (x, y) from z and (x', y') from w.
    """
    z = np.asarray(z, dtype=complex)
    if w is not None:
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
    size_m, size_n = table.shape
    flat_z = z.ravel()
    flat_w = None if w is None else w.ravel()
    out = np.empty(flat_z.size)
    for lo in range(0, flat_z.size, CHUNK):
        hi = min(lo + CHUNK, flat_z.size)
        sx = sine_table(flat_z[lo:hi].real, size_m)
        sy = sine_table(flat_z[lo:hi].imag, size_n)
        if flat_w is not None:
            sx *= sine_table(flat_w[lo:hi].real, size_m)
            sy *= sine_table(flat_w[lo:hi].imag, size_n)
        out[lo:hi] = np.einsum("pn,pn->p", sx @ table, sy)
    if z.ndim == 0:
        return out[0]
    return out.reshape(z.shape)
