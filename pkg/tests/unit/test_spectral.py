"""
Unit tests for the sine-mode helpers.
"""
import numpy as np
import pytest

from liouville.spectral import contract, eigenvalues, mode_table, scatter


class TestModeTable:
    """Test mode ordering."""

    def test_first_modes_in_eigenvalue_order(self):
        """Should list (1,1), (1,2), (2,1), (2,2), (1,3) first."""
        m, n = mode_table(5)
        assert m.tolist() == [1, 1, 2, 2, 1]
        assert n.tolist() == [1, 2, 1, 2, 3]

    def test_eigenvalues_nondecreasing(self):
        """Eigenvalues should never decrease along the table."""
        m, n = mode_table(4096)
        assert np.all(np.diff(eigenvalues(m, n)) >= 0.0)

    def test_table_is_read_only(self):
        """Cached arrays should not be writable."""
        m, _ = mode_table(64)
        with pytest.raises(ValueError):
            m[0] = 5

    def test_rejects_empty_table(self):
        """Zero modes should raise ValueError."""
        with pytest.raises(ValueError):
            mode_table(0)


class TestContract:
    """Test bilinear sine sums."""

    def test_single_mode(self):
        """A unit weight at (1, 1) should give sin(pi x) sin(pi y)."""
        table = scatter(np.array([1]), np.array([1]), np.array([1.0]))
        value = contract(table, 0.25 + 0.5j)
        assert value == pytest.approx(np.sin(np.pi * 0.25))

    def test_scalar_input_gives_scalar(self):
        """0-d input should return a scalar, arrays keep their shape."""
        table = scatter(np.array([1, 2]), np.array([1, 1]), np.array([1.0, 0.5]))
        assert np.ndim(contract(table, 0.3 + 0.3j)) == 0
        points = np.full((3, 4), 0.3 + 0.3j)
        assert contract(table, points).shape == (3, 4)

    def test_chunking_matches_direct_sum(self):
        """Sums over more points than one chunk should match the direct formula."""
        m, n = mode_table(20)
        weights = np.linspace(1.0, 2.0, 20)
        table = scatter(m, n, weights)
        points = np.linspace(0.01, 0.99, 5000) + 0.37j
        direct = np.sin(np.pi * np.outer(points.real, m)) * np.sin(np.pi * np.outer(points.imag, n)) @ weights
        np.testing.assert_allclose(contract(table, points), direct, atol=1e-12)
