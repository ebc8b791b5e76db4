"""Least-perimeter partitions of the unit disk into regions of prescribed areas."""

from .geometry import ArcEdge, MobiusMap, Point
from .graph import PartitionGraph
from .solver import AreaTargets, solve, solve_three_areas, solve_two_areas
from .standard import StandardGraph, check_stationary

__all__ = [
    "ArcEdge",
    "AreaTargets",
    "MobiusMap",
    "PartitionGraph",
    "Point",
    "StandardGraph",
    "check_stationary",
    "solve",
    "solve_three_areas",
    "solve_two_areas",
]
__version__ = "0.1.0"
