"""
Liouville - Simulate Liouville Brownian motion and check its properties numerically.

A library and CLI that samples truncated Gaussian free fields on the unit
square and disc, runs Brownian paths through them, integrates the Liouville
clock, and checks positivity, conformal covariance, KPZ dimension relations
and multifractal moment scaling on finite samples.
"""

__version__ = "1.0.0"
__author__ = "Liouville Team"

# Expose main components
from liouville.cli import main

__all__ = ["main", "__version__"]
