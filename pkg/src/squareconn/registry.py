"""Per-cell square sets and the geometric queries built on the storing cells.

``Registry`` owns one :class:`ConflictTree` per storing cell (its stored
squares) and an index of the storing cells themselves. The cell index keeps,
for every dyadic cell that has a storing descendant, the number of storing
cells below it; dyadic recursions prune on that count.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .conflict_tree import (
    ConflictTree,
    boxes_and,
    boxes_boundary_intersecting,
    boxes_containing,
    boxes_min_side,
)
from .geometry import (
    Cell,
    Rect,
    Square,
    boundary_intersects,
    contains,
    morton_key,
    scale5,
    storing_cell,
    window,
)

TOP_LEVEL = 44  # world coordinates stay below 2^43


def _children(c: Cell) -> tuple[Cell, Cell, Cell, Cell]:
    lv, x, y = c.level - 1, c.ix << 1, c.iy << 1
    return Cell(lv, x, y), Cell(lv, x + 1, y), Cell(lv, x, y + 1), Cell(lv, x + 1, y + 1)


def _positive_overlap(a: Rect, b: Rect) -> bool:
    return a.x_lo < b.x_hi and b.x_lo < a.x_hi and a.y_lo < b.y_hi and b.y_lo < a.y_hi


def _canonical(cells) -> list[Cell]:
    return sorted(set(cells), key=morton_key)


class StoringCellIndex:
    """The set of storing cells with per-level lookup and subtree counts."""

    def __init__(self) -> None:
        self.by_level: dict[int, set[tuple[int, int]]] = {}
        self.below: dict[Cell, int] = {}
        self._levels: list[int] = []

    def __len__(self) -> int:
        return sum(len(s) for s in self.by_level.values())

    def __contains__(self, c: Cell) -> bool:
        s = self.by_level.get(c.level)
        return s is not None and (c.ix, c.iy) in s

    def __iter__(self) -> Iterator[Cell]:
        for lv in self._levels:
            for ix, iy in self.by_level[lv]:
                yield Cell(lv, ix, iy)

    @property
    def levels(self) -> list[int]:
        return self._levels

    def add(self, c: Cell) -> None:
        s = self.by_level.get(c.level)
        if s is None:
            s = self.by_level[c.level] = set()
            self._levels = sorted(self.by_level)
        s.add((c.ix, c.iy))
        below = self.below
        lv, x, y = c
        while lv <= TOP_LEVEL:
            k = Cell(lv, x, y)
            below[k] = below.get(k, 0) + 1
            lv, x, y = lv + 1, x >> 1, y >> 1

    def remove(self, c: Cell) -> None:
        s = self.by_level[c.level]
        s.remove((c.ix, c.iy))
        if not s:
            del self.by_level[c.level]
            self._levels = sorted(self.by_level)
        below = self.below
        lv, x, y = c
        while lv <= TOP_LEVEL:
            k = Cell(lv, x, y)
            n = below[k] - 1
            if n:
                below[k] = n
            else:
                del below[k]
            lv, x, y = lv + 1, x >> 1, y >> 1

    def count_below(self, c: Cell) -> int:
        """Storing cells contained in ``c`` (including ``c``)."""
        return self.below.get(c, 0)

    def at_level_meeting(self, level: int, k: Rect) -> list[Cell]:
        """Storing cells of ``level`` whose 5x-scaling meets ``k``."""
        s = self.by_level.get(level)
        if not s:
            return []
        xs, ys = window(k, level)
        if len(xs) * len(ys) <= len(s):
            return [Cell(level, ix, iy) for iy in ys for ix in xs if (ix, iy) in s]
        return sorted(
            (Cell(level, ix, iy) for ix, iy in s if ix in xs and iy in ys),
            key=lambda c: (c.iy, c.ix),
        )

    @property
    def max_level(self) -> int:
        return self._levels[-1] if self._levels else -1

    @property
    def min_level(self) -> int:
        return self._levels[0] if self._levels else -1


class Registry:
    def __init__(self) -> None:
        self.trees: dict[Cell, ConflictTree] = {}
        self.cells = StoringCellIndex()

    # -- membership ---------------------------------------------------------

    def is_storing(self, c: Cell) -> bool:
        return c in self.trees

    def tree(self, c: Cell) -> ConflictTree:
        return self.trees[c]

    def add_square(self, sq: Square, c: Optional[Cell] = None) -> bool:
        """Store ``sq`` at its cell; returns True when the cell starts storing."""
        c = c or storing_cell(sq)
        t = self.trees.get(c)
        fresh = t is None
        if fresh:
            t = self.trees[c] = ConflictTree()
            self.cells.add(c)
        t.insert(sq)
        return fresh

    def remove_square(self, sq: Square, c: Optional[Cell] = None) -> bool:
        """Remove ``sq``; returns True when its cell stops storing."""
        c = c or storing_cell(sq)
        t = self.trees[c]
        t.delete(sq.id)
        if len(t) == 0:
            del self.trees[c]
            self.cells.remove(c)
            return True
        return False

    # -- containment set ----------------------------------------------------

    def report_contained_cells(self, sq: Square) -> list[Cell]:
        """Maximal dyadic cells inside ``sq`` that contain a storing cell."""
        below = self.cells.below
        if not below:
            return []
        top = storing_cell(sq).level + 1
        rect = sq.rect
        h = 1 << top
        out = []
        stack = [
            Cell(top, ix, iy)
            for iy in range(rect.y_lo // h, (rect.y_hi - 1) // h + 1)
            for ix in range(rect.x_lo // h, (rect.x_hi - 1) // h + 1)
        ]
        while stack:
            q = stack.pop()
            if q not in below:
                continue
            qr = q.rect
            if contains(rect, qr):
                out.append(q)
            elif q.level > 0 and _positive_overlap(rect, qr):
                stack.extend(_children(q))
        return _canonical(out)

    # -- perimeter ----------------------------------------------------------

    def perimeter_of_square(self, sq: Square) -> list[Cell]:
        """Storing cells no larger than ``sq`` whose 5x-scaling meets its boundary."""
        below = self.cells.below
        if not below:
            return []
        rect = sq.rect
        top = sq.side.bit_length() - 1
        floor = self.cells.min_level
        storing = self.cells
        out = []
        xs, ys = window(rect, top)
        stack = [Cell(top, ix, iy) for iy in ys for ix in xs]
        while stack:
            q = stack.pop()
            if q not in below or not boundary_intersects(scale5(q), rect):
                continue
            if q in storing:
                out.append(q)
            if q.level > floor:
                stack.extend(_children(q))
        return _canonical(out)

    # -- uphill candidates --------------------------------------------------

    def uphill_containment_candidates(self, c: Cell) -> list[Cell]:
        """Storing cells whose squares could contain ``c`` or one of its ancestors.

        Level ``level(c) - 1`` is included: a square wide enough to contain ``c``
        can be stored one level below it.
        """
        out = []
        for lv in self.cells.levels:
            if lv < c.level - 1:
                continue
            if lv < c.level:
                k = c.rect
            else:
                d = lv - c.level
                k = Cell(lv, c.ix >> d, c.iy >> d).rect
            out.extend(self.cells.at_level_meeting(lv, k))
        return out

    def _holders(self, c: Cell) -> Iterator[Cell]:
        # storing cells whose 5x-scaling contains c, by level then (iy, ix)
        r = c.rect
        by_level = self.cells.by_level
        for lv in self.cells.levels:
            if lv < c.level - 1:
                continue
            s = by_level[lv]
            h = 1 << lv
            x0, x1 = max(0, -((3 * h - r.x_hi) // h)), (r.x_lo + 2 * h) // h
            y0, y1 = max(0, -((3 * h - r.y_hi) // h)), (r.y_lo + 2 * h) // h
            for iy in range(y0, y1 + 1):
                for ix in range(x0, x1 + 1):
                    if (ix, iy) in s:
                        yield Cell(lv, ix, iy)

    def counter_value(self, c: Cell) -> int:
        """Number of stored squares containing ``c`` but not its parent."""
        inner = boxes_containing(c.rect)
        outer = boxes_containing(c.parent().rect)
        total = 0
        for z in self._holders(c):
            t = self.trees[z]
            total += t.count(inner) - t.count(outer)
        return total

    def lowest_shared_level(self, c: Cell) -> int:
        """Lowest level at which an ancestor of ``c`` holds a storing cell other than ``c``."""
        below = self.cells.below
        own = 1 if c in self.cells else 0
        lv, x, y = c
        while lv <= TOP_LEVEL:
            if below.get(Cell(lv, x, y), 0) > own:
                return lv
            lv, x, y = lv + 1, x >> 1, y >> 1
        return TOP_LEVEL + 1

    def recompute_ancestor_counters(self, c: Cell, quadtree) -> list[Cell]:
        """Recount the ancestors of a newly storing cell that held no other storing cell.

        Returns the cells whose counters were rewritten.
        """
        stop = min(self.lowest_shared_level(c), self.cells.max_level + 2)
        touched = []
        lv, x, y = c
        while lv < stop:
            a = Cell(lv, x, y)
            quadtree.set_counter(a, self.counter_value(a))
            touched.append(a)
            lv, x, y = lv + 1, x >> 1, y >> 1
        return touched

    def clear_ancestor_counters(self, c: Cell, quadtree) -> None:
        """Zero the counters above a cell that stopped storing, up to the next storing cell."""
        node = quadtree.get(c)
        if node is None:
            return
        below = self.cells.below
        chain = [node]
        p = node.parent
        while p is not None:
            chain.append(p)
            p = p.parent
        for n in chain:
            if n.cell in below:
                break
            if n.mark_count:
                quadtree.set_counter(n.cell, 0)

    # -- inverse perimeter --------------------------------------------------

    def perimeter_count(self, z: Cell, c: Cell) -> int:
        """Squares stored at ``z`` that have ``c`` on their perimeter."""
        t = self.trees.get(z)
        if t is None:
            return 0
        return t.count(
            boxes_and(boxes_min_side(c.size), boxes_boundary_intersecting(scale5(c)))
        )

    def inverse_perimeter(self, c: Cell) -> dict[Cell, int]:
        """Storing cells ``Z`` with ``c`` on the perimeter of a square in ``Z``.

        Maps each such cell to the number of its squares that have ``c`` on the
        perimeter. ``c`` itself is included when it qualifies.
        """
        k = scale5(c)
        out = {}
        for lv in self.cells.levels:
            if lv < c.level - 1:
                continue
            for z in self.cells.at_level_meeting(lv, k):
                n = self.perimeter_count(z, c)
                if n:
                    out[z] = n
        return out

    # -- representative ----------------------------------------------------

    def find_marking_square(self, c: Cell) -> Square:
        """Some stored square that contains ``c`` but not its parent."""
        inner = boxes_containing(c.rect)
        outer = boxes_containing(c.parent().rect)
        for z in self._holders(c):
            t = self.trees[z]
            if t.count(inner) == t.count(outer):
                continue
            skip = {s.id for s in t.report_all(outer)}
            for s in t.report_all(inner):
                if s.id not in skip:
                    return s
        raise LookupError(f"no stored square marks {c}")

    # -- introspection ------------------------------------------------------

    def squares_at(self, c: Cell) -> list[Square]:
        t = self.trees.get(c)
        return [] if t is None else sorted(t, key=lambda s: s.id)

    def conflict_entries(self) -> int:
        return sum(t.count_entries() for t in self.trees.values())

