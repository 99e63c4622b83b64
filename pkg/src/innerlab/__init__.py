"""innerlab: numerics for inner functions, curvature -4 metrics, and singular measures."""

__version__ = "0.1.0"
