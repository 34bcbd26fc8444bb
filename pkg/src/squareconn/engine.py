"""Dynamic connectivity of square intersection graphs.

:class:`Engine` keeps the compressed quadtree with containment marks, the
per-cell square sets, the per-pair maximal matchings and a proxy graph over
storing cells. Two squares are connected exactly when their representative
storing cells are connected in the proxy graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Optional

from .geometry import Cell, Square, storing_cell
from .hlt import ProxyGraph
from .matching import MatchingEngine
from .quadtree import NEIGHBORHOOD, Quadtree, neighborhood
from .registry import Registry


@dataclass
class UpdateStats:
    op: str
    id: Hashable
    contained: int
    perimeter: int
    inverse: int
    psi: float
    new_storing_cell: bool


class Engine:
    def __init__(self) -> None:
        self.squares: dict[Hashable, Square] = {}
        self.sides: dict[int, int] = {}
        self._d_min: Optional[int] = None
        self._d_max: Optional[int] = None
        self.quadtree = Quadtree()
        self.registry = Registry()
        self.matching = MatchingEngine(self.registry)
        self.proxy = ProxyGraph()
        self.last_update: Optional[UpdateStats] = None
        self.updates = 0

    # -- aspect ratio -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.squares)

    @property
    def psi(self) -> float:
        if len(self.squares) < 2:
            return 1.0
        return self._d_max / self._d_min

    def _add_side(self, s: int) -> None:
        self.sides[s] = self.sides.get(s, 0) + 1
        self._d_min = s if self._d_min is None else min(self._d_min, s)
        self._d_max = s if self._d_max is None else max(self._d_max, s)

    def _remove_side(self, s: int) -> None:
        left = self.sides[s] - 1
        if left:
            self.sides[s] = left
            return
        del self.sides[s]
        if not self.sides:
            self._d_min = self._d_max = None
        else:
            if s == self._d_min:
                self._d_min = min(self.sides)
            if s == self._d_max:
                self._d_max = max(self.sides)

    # -- updates ------------------------------------------------------------

    def insert(self, id: Hashable, x: int, y: int, side: int) -> None:
        """Insert the square ``[x, x+side] x [y, y+side]`` under ``id``."""
        if id in self.squares:
            raise KeyError(f"duplicate square id {id!r}")
        self.insert_square(Square.from_input(id, x, y, side))

    def insert_square(self, sq: Square) -> None:
        if sq.id in self.squares:
            raise KeyError(f"duplicate square id {sq.id!r}")
        psi_before = self.psi
        self.squares[sq.id] = sq
        self._add_side(sq.side)

        qt, reg = self.quadtree, self.registry
        c = storing_cell(sq)
        qt.ensure_cells(neighborhood(sq), NEIGHBORHOOD)
        fresh = reg.add_square(sq, c)
        if fresh:
            qt.set_storing(c, True)
            self.proxy.add_vertex(c)

        contained = reg.report_contained_cells(sq)
        for cell in contained:
            qt.add_to_counter(cell, 1)
        if fresh:
            reg.recompute_ancestor_counters(c, qt)

        perimeter = reg.perimeter_of_square(sq)
        inverse = reg.inverse_perimeter(c)
        self.matching.on_square_inserted(sq, c, perimeter, inverse)
        self._apply_proxy_changes()

        self.updates += 1
        self.last_update = UpdateStats(
            "insert", sq.id, len(contained), len(perimeter), len(inverse), max(psi_before, self.psi), fresh
        )

    def delete(self, id: Hashable) -> None:
        sq = self.squares.get(id)
        if sq is None:
            raise KeyError(f"unknown square id {id!r}")
        psi_before = self.psi
        qt, reg = self.quadtree, self.registry
        c = storing_cell(sq)

        perimeter = reg.perimeter_of_square(sq)
        contained = reg.report_contained_cells(sq)
        for cell in contained:
            qt.add_to_counter(cell, -1)
        self.matching.on_square_deleted(sq, c, perimeter)

        stopped = reg.remove_square(sq, c)
        if stopped:
            self.matching.drop_cell(c)
            reg.clear_ancestor_counters(c, qt)
            qt.set_storing(c, False)
        self._apply_proxy_changes()
        if stopped:
            self.proxy.remove_vertex(c)
        qt.release_cells(neighborhood(sq), NEIGHBORHOOD)

        del self.squares[id]
        self._remove_side(sq.side)
        self.updates += 1
        self.last_update = UpdateStats(
            "delete", id, len(contained), len(perimeter), 0, max(psi_before, self.psi), stopped
        )

    def _apply_proxy_changes(self) -> None:
        on, off = self.matching.flush()
        for c1, c2 in off:
            self.proxy.deactivate(c1, c2)
        for c1, c2 in on:
            self.proxy.activate(c1, c2)

    # -- queries ------------------------------------------------------------

    def representative(self, id: Hashable) -> Cell:
        """Proxy vertex standing in for a square."""
        sq = self.squares.get(id)
        if sq is None:
            raise KeyError(f"unknown square id {id!r}")
        c = storing_cell(sq)
        top = self.quadtree.highest_marked_ancestor(c, include_self=True)
        if top is None:
            return c
        return storing_cell(self.registry.find_marking_square(top))

    def connected(self, a: Hashable, b: Hashable) -> bool:
        ra = self.representative(a)
        rb = self.representative(b)
        return a == b or self.proxy.connected(ra, rb)

    # -- introspection ------------------------------------------------------

    def stats(self, deep: bool = False) -> dict:
        out = {
            "n": self.n,
            "psi": self.psi,
            "nodes": len(self.quadtree),
            "storing_cells": len(self.registry.trees),
            "z_star": self.matching.edge_count,
            "pairs": len(self.matching.pairs),
            "proxy_vertices": self.proxy.vertex_count,
            "proxy_edges": self.proxy.edge_count,
            "rematches": self.matching.rematches,
        }
        if deep:
            out["conflict_entries"] = self.registry.conflict_entries()
        return out

    def dump_state(self) -> str:
        """Deterministic text snapshot of all component states."""
        lines = ["# quadtree", self.quadtree.dump(), "# pairs"]
        for key in sorted(self.matching.pairs):
            p = self.matching.pairs[key]
            lines.append(f"{key} red={p.r_count} edges={p.edges}")
        lines.append("# proxy")
        lines.extend(f"{k} {v}" for k, v in sorted(self.proxy.refs.items()))
        return "\n".join(lines)

    def check_invariants(self) -> None:
        self.quadtree.check_invariants()
        self.proxy.check_invariants()
        for c, t in self.registry.trees.items():
            assert self.quadtree.node(c).is_storing
            t.check_invariants()
        assert set(self.proxy.conn.vertices) == set(self.registry.trees)
        active = {}
        for c1, c2 in self.matching.active_pairs():
            k = (c1, c2) if c1 <= c2 else (c2, c1)
            active[k] = active.get(k, 0) + 1
        assert active == self.proxy.refs, "proxy edges disagree with active pairs"
