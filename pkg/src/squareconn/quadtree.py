"""Compressed quadtree over the absolute dyadic grid.

Nodes live in a dict keyed by :class:`Cell`. A node exists while it has a
presence reason (a refcount per tag, a positive mark count, or a stored
square) or while it is the lowest common ancestor of two existing subtrees.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .geometry import Cell, Square, cell_at as _cell_at, cell_contains_cell, lca, morton_key, storing_cell

NEIGHBORHOOD = "neighborhood"
CONTAINMENT = "containment"
STRUCTURAL = "structural"
TAGS = (NEIGHBORHOOD, CONTAINMENT, STRUCTURAL)
_SLOT = {tag: i for i, tag in enumerate(TAGS)}


class QuadtreeNode:
    __slots__ = ("cell", "parent", "children", "reasons", "mark_count", "is_storing")

    def __init__(self, cell: Cell) -> None:
        self.cell = cell
        self.parent: Optional[QuadtreeNode] = None
        self.children: list[Optional[QuadtreeNode]] = [None, None, None, None]
        self.reasons = [0, 0, 0]  # refcount per tag, in TAGS order
        self.mark_count = 0
        self.is_storing = False

    @property
    def required(self) -> bool:
        r = self.reasons
        return bool(self.mark_count or self.is_storing or r[0] or r[1] or r[2])

    @property
    def presence_reasons(self) -> set[str]:
        return {tag for tag, n in zip(TAGS, self.reasons) if n > 0}

    def child_count(self) -> int:
        return 4 - self.children.count(None)

    def __repr__(self) -> str:
        return f"QuadtreeNode({self.cell}, marks={self.mark_count}, storing={self.is_storing})"


def _quadrant(outer: Cell, inner: Cell) -> int:
    shift = outer[0] - 1 - inner[0]
    return ((inner[2] >> shift) & 1) << 1 | ((inner[1] >> shift) & 1)


def neighborhood(sq: Square) -> list[Cell]:
    """5x5 block of same-level cells around the storing cell, clipped to the quadrant."""
    c = storing_cell(sq)
    return [
        Cell(c.level, ix, iy)
        for iy in range(max(0, c.iy - 2), c.iy + 3)
        for ix in range(max(0, c.ix - 2), c.ix + 3)
    ]


def cell_at(level: int, point: tuple[int, int]) -> Cell:
    return _cell_at(level, point[0], point[1])


class Quadtree:
    def __init__(self) -> None:
        self.nodes: dict[Cell, QuadtreeNode] = {}
        self.root: Optional[QuadtreeNode] = None

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, cell: Cell) -> bool:
        return cell in self.nodes

    def node(self, cell: Cell) -> QuadtreeNode:
        return self.nodes[cell]

    def get(self, cell: Cell) -> Optional[QuadtreeNode]:
        return self.nodes.get(cell)

    # -- structure ----------------------------------------------------------

    def _attach(self, parent: QuadtreeNode, child: QuadtreeNode) -> None:
        lv, _, _ = parent.cell
        clv, cx, cy = child.cell
        shift = lv - 1 - clv
        parent.children[((cy >> shift) & 1) << 1 | ((cx >> shift) & 1)] = child
        child.parent = parent

    def _new(self, cell: Cell) -> QuadtreeNode:
        node = QuadtreeNode(cell)
        self.nodes[cell] = node
        return node

    def _materialize(self, cell: Cell) -> QuadtreeNode:
        nodes = self.nodes
        node = nodes.get(cell)
        if node is not None:
            return node
        node = self._new(cell)
        root = self.root
        if root is None:
            self.root = node
            return node
        # lowest existing strict ancestor, found by walking up the grid
        lv, x, y = cell
        top = root.cell.level
        v = None
        while lv < top:
            lv, x, y = lv + 1, x >> 1, y >> 1
            v = nodes.get((lv, x, y))
            if v is not None:
                break
        if v is None:
            top = lca(root.cell, cell)
            if top == cell:
                self._attach(node, root)
                self.root = node
                return node
            joint = self._new(top)
            self._attach(joint, root)
            self._attach(joint, node)
            self.root = joint
            return node
        q = _quadrant(v.cell, cell)
        c = v.children[q]
        if c is None:
            self._attach(v, node)
            return node
        top = lca(c.cell, cell)
        if top == cell:
            self._attach(v, node)
            self._attach(node, c)
            return node
        joint = self._new(top)
        self._attach(v, joint)
        self._attach(joint, c)
        self._attach(joint, node)
        return node

    def _cleanup(self, node: Optional[QuadtreeNode]) -> None:
        while node is not None and not node.required:
            kids = [c for c in node.children if c is not None]
            parent = node.parent
            if len(kids) >= 2:
                return
            del self.nodes[node.cell]
            if len(kids) == 1:
                child = kids[0]
                if parent is None:
                    child.parent = None
                    self.root = child
                else:
                    self._attach(parent, child)
                return
            if parent is None:
                self.root = None
                return
            parent.children[_quadrant(parent.cell, node.cell)] = None
            node = parent

    def ensure_cells(self, cells: Iterable[Cell], reason: str) -> None:
        slot = _SLOT[reason]
        nodes = self.nodes
        for cell in cells:
            node = nodes.get(cell) or self._materialize(cell)
            node.reasons[slot] += 1

    def release_cells(self, cells: Iterable[Cell], reason: str) -> None:
        slot = _SLOT[reason]
        for cell in cells:
            node = self.nodes.get(cell)
            if node is None or node.reasons[slot] <= 0:
                raise KeyError(f"{cell} holds no {reason!r} reference")
            node.reasons[slot] -= 1
            if not node.required:
                self._cleanup(node)

    # -- storing flag and marks ---------------------------------------------

    def set_storing(self, cell: Cell, flag: bool) -> None:
        node = self._materialize(cell) if flag else self.nodes[cell]
        node.is_storing = flag
        if not flag:
            self._cleanup(node)

    def mark(self, cell: Cell, delta: int) -> None:
        node = self.nodes.get(cell)
        if node is None:
            raise KeyError(f"cannot mark missing cell {cell}")
        self.add_to_counter(cell, delta)

    def mark_count(self, cell: Cell) -> int:
        node = self.nodes.get(cell)
        return 0 if node is None else node.mark_count

    def set_counter(self, cell: Cell, value: int) -> None:
        """Set the mark count, keeping the containment reason in step with it."""
        node = self.nodes.get(cell)
        if node is None:
            if value == 0:
                return
            node = self._materialize(cell)
        had = node.mark_count > 0
        node.mark_count = value
        if value > 0 and not had:
            node.reasons[1] += 1
        elif value == 0 and had:
            node.reasons[1] -= 1
            self._cleanup(node)

    def add_to_counter(self, cell: Cell, delta: int) -> None:
        value = self.mark_count(cell) + delta
        if value < 0:
            raise ValueError(f"mark count of {cell} would drop below zero")
        self.set_counter(cell, value)

    def highest_marked_ancestor(self, cell: Cell, include_self: bool = False) -> Optional[Cell]:
        node = self.nodes.get(cell)
        if node is None:
            raise KeyError(f"{cell} is not in the tree")
        best = cell if include_self and node.mark_count > 0 else None
        node = node.parent
        while node is not None:
            if node.mark_count > 0:
                best = node.cell
            node = node.parent
        return best

    def ancestors(self, cell: Cell) -> Iterator[QuadtreeNode]:
        """Existing strict ancestors, bottom up."""
        node = self.nodes[cell].parent
        while node is not None:
            yield node
            node = node.parent

    # -- introspection ------------------------------------------------------

    def marked_cells(self) -> dict[Cell, int]:
        return {c: n.mark_count for c, n in self.nodes.items() if n.mark_count}

    def dump(self) -> str:
        lines = []
        for cell in sorted(self.nodes, key=morton_key):
            n = self.nodes[cell]
            lines.append(f"{cell.level} {cell.ix} {cell.iy} {n.mark_count} {int(n.is_storing)}")
        return "\n".join(lines)

    def height(self) -> int:
        best = 0
        stack = [(self.root, 1)] if self.root else []
        while stack:
            node, depth = stack.pop()
            best = max(best, depth)
            stack.extend((c, depth + 1) for c in node.children if c is not None)
        return best

    def check_invariants(self) -> None:
        seen = 0
        if self.root is None:
            assert not self.nodes
            return
        assert self.root.parent is None
        stack = [self.root]
        while stack:
            node = stack.pop()
            seen += 1
            assert self.nodes[node.cell] is node
            kids = [c for c in node.children if c is not None]
            if not node.required:
                assert len(kids) >= 2, f"{node.cell} is unneeded"
            if node.mark_count:
                assert node.reasons[1] == 1
            for q, c in enumerate(node.children):
                if c is None:
                    continue
                assert c.parent is node
                assert cell_contains_cell(node.cell, c.cell) and node.cell != c.cell
                assert _quadrant(node.cell, c.cell) == q
                stack.append(c)
        assert seen == len(self.nodes)


def closure(cells: Iterable[Cell]) -> set[Cell]:
    """Cells plus all pairwise lowest common ancestors (the compressed tree node set)."""
    base = sorted(set(cells), key=morton_key)
    out = set(base)
    # LCAs of Morton-adjacent pairs generate the full pairwise closure
    for a, b in zip(base, base[1:]):
        out.add(lca(a, b))
    return out
