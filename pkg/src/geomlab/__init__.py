"""geomlab: numerical curvature, boundary geometry and first-variation
checks on chart-described compact manifolds with boundary."""

__version__ = "0.1.0"
