"""Fully dynamic connectivity for intersection graphs of axis-aligned squares."""

from .conflict_tree import Box5, ConflictTree
from .engine import Engine, UpdateStats
from .geometry import Cell, Rect, Square, scale5, storing_cell
from .hlt import DynamicConnectivity, ProxyGraph
from .quadtree import Quadtree

__all__ = [
    "Box5",
    "Cell",
    "ConflictTree",
    "DynamicConnectivity",
    "Engine",
    "ProxyGraph",
    "Quadtree",
    "Rect",
    "Square",
    "UpdateStats",
    "scale5",
    "storing_cell",
]
