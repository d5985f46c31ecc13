"""
Shared pytest configuration and fixtures for all tests.
"""
import sys
import pytest

from liouville.brownian import sample_path
from liouville.gff import sample_gff
from liouville.models import DomainSpec

# dt = eps**2 / 16 for eps = 2**-4
SMALL_DT = 2.0 ** -12


@pytest.fixture
def liouville_cmd():
    """
    Returns the command to run liouville.

    On Windows, subprocess.run() doesn't automatically find executables
    in the venv's Scripts directory, so we use 'python -m liouville'
    which works reliably across all platforms.
    """
    return [sys.executable, '-m', 'liouville']


@pytest.fixture
def square():
    return DomainSpec.square()


@pytest.fixture
def disc():
    return DomainSpec.disc()


@pytest.fixture
def small_field(square):
    """A cheap 256-mode field on the unit square."""
    return sample_gff(square, 256, seed=7, replicate=0)


@pytest.fixture
def short_path(square):
    """A path from the centre of the square, long enough for k = 4 clocks."""
    return sample_path(square, 0.5 + 0.5j, SMALL_DT, 0.02, seed=7, replicate=0)
