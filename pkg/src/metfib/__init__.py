"""Metric fibrations over finite metric spaces: validation, construction and classification."""

from .errors import ParseError, ValidationError
from .metric_core import INF, FiniteMetricSpace, Flavor, WeightedGraph

__all__ = ["INF", "FiniteMetricSpace", "Flavor", "ParseError", "ValidationError", "WeightedGraph"]
__version__ = "0.1.0"
