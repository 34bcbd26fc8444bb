"""Dominance-searchable square sets with per-node conflict-set counts.

Each stored item is a point in five coordinates ``(s, l, r, b, t)``: side,
x-extent and y-extent. Points live in a five-level nested range tree: every
internal node of a level-``d`` tree carries an associated level-``d+1`` tree
over the points of its subtree, and every internal node of a last-level tree
stores ``size`` (m_v) plus a sparse map ``set id -> count`` (m_{v,i}).

Subtrees holding at most ``BUCKET`` points are kept as flat sorted buckets and
scanned linearly. Trees are weight balanced: a subtree is rebuilt from scratch
when one child outgrows ``ALPHA`` of its parent.

An orthogonal query is a list of :class:`Box5`. ``find_excluding`` returns an
item in the union of the boxes that is not a member of a given conflict set,
using the count test ``m_v > m_{v,i}`` to steer the descent.
"""

from __future__ import annotations

from bisect import insort
from operator import itemgetter
from typing import Any, Hashable, Iterable, NamedTuple, Optional, Sequence

from .geometry import Rect

S, L, R, B, T = range(5)
NDIM = 5
BUCKET = 12
ALPHA = 0.75

_KEYS = [itemgetter(d, 5) for d in range(NDIM)]


class Box5(NamedTuple):
    """Closed per-coordinate bounds over ``(s, l, r, b, t)``; ``None`` is unbounded."""

    lo: tuple
    hi: tuple

    def is_empty(self) -> bool:
        return any(a is not None and b is not None and a > b for a, b in zip(self.lo, self.hi))

    def contains_point(self, p: Sequence[int]) -> bool:
        for d in range(NDIM):
            a = self.lo[d]
            if a is not None and p[d] < a:
                return False
            b = self.hi[d]
            if b is not None and p[d] > b:
                return False
        return True


EVERYTHING = Box5((None,) * NDIM, (None,) * NDIM)


def box(**bounds: int) -> Box5:
    """Build a box from keywords like ``l_max=3, r_min=5``."""
    lo = [None] * NDIM
    hi = [None] * NDIM
    names = "slrbt"
    for key, value in bounds.items():
        coord, kind = key.split("_")
        d = names.index(coord)
        if kind == "min":
            lo[d] = value
        elif kind == "max":
            hi[d] = value
        else:
            raise ValueError(key)
    return Box5(tuple(lo), tuple(hi))


def square_key(sq) -> tuple[int, int, int, int, int]:
    return (sq.x_hi - sq.x_lo, sq.x_lo, sq.x_hi, sq.y_lo, sq.y_hi)


# -- query builders -----------------------------------------------------------


def _meet(a: Box5, b: Box5) -> Box5:
    lo = tuple(
        y if x is None else x if y is None else max(x, y) for x, y in zip(a.lo, b.lo)
    )
    hi = tuple(
        y if x is None else x if y is None else min(x, y) for x, y in zip(a.hi, b.hi)
    )
    return Box5(lo, hi)


def boxes_and(a: Iterable[Box5], b: Iterable[Box5]) -> list[Box5]:
    """Pairwise intersection of two box unions."""
    b = list(b)
    out = []
    for x in a:
        for y in b:
            z = _meet(x, y)
            if not z.is_empty():
                out.append(z)
    return out


def _minus_one(a: Box5, b: Box5) -> list[Box5]:
    # a \ b as disjoint boxes; integer coordinates, so "< v" is "<= v - 1"
    if _meet(a, b).is_empty():
        return [a]
    out = []
    lo, hi = list(a.lo), list(a.hi)
    for d in range(NDIM):
        if b.lo[d] is not None and (lo[d] is None or lo[d] < b.lo[d]):
            piece_hi = list(hi)
            piece_hi[d] = b.lo[d] - 1
            out.append(Box5(tuple(lo), tuple(piece_hi)))
            lo[d] = b.lo[d]
        if b.hi[d] is not None and (hi[d] is None or hi[d] > b.hi[d]):
            piece_lo = list(lo)
            piece_lo[d] = b.hi[d] + 1
            out.append(Box5(tuple(piece_lo), tuple(hi)))
            hi[d] = b.hi[d]
    return [x for x in out if not x.is_empty()]


def boxes_minus(a: Iterable[Box5], b: Iterable[Box5]) -> list[Box5]:
    """Set difference of two box unions, as disjoint boxes (when ``a`` is disjoint)."""
    current = list(a)
    for y in b:
        nxt = []
        for x in current:
            nxt.extend(_minus_one(x, y))
        current = nxt
    return current


_ANY = None


def boxes_intersecting(q: Rect) -> list[Box5]:
    """Stored extents whose closed region meets ``q``."""
    return [Box5((_ANY, _ANY, q.x_lo, _ANY, q.y_lo), (_ANY, q.x_hi, _ANY, q.y_hi, _ANY))]


def boxes_containing(q: Rect) -> list[Box5]:
    """Stored extents that contain ``q``."""
    return [Box5((_ANY, _ANY, q.x_hi, _ANY, q.y_hi), (_ANY, q.x_lo, _ANY, q.y_lo, _ANY))]


def boxes_strictly_containing(q: Rect) -> list[Box5]:
    """Stored extents whose open interior contains ``q``."""
    return [
        Box5((_ANY, _ANY, q.x_hi + 1, _ANY, q.y_hi + 1), (_ANY, q.x_lo - 1, _ANY, q.y_lo - 1, _ANY))
    ]


def boxes_within(q: Rect) -> list[Box5]:
    """Stored extents lying inside ``q``."""
    return [Box5((_ANY, q.x_lo, _ANY, q.y_lo, _ANY), (_ANY, _ANY, q.x_hi, _ANY, q.y_hi))]


def boxes_within_interior(q: Rect) -> list[Box5]:
    """Stored extents lying in the open interior of ``q``."""
    return [
        Box5((_ANY, q.x_lo + 1, _ANY, q.y_lo + 1, _ANY), (_ANY, _ANY, q.x_hi - 1, _ANY, q.y_hi - 1))
    ]


def boxes_boundary_intersecting(k: Rect) -> list[Box5]:
    """Stored squares whose boundary meets ``k``."""
    return boxes_minus(boxes_intersecting(k), boxes_strictly_containing(k))


def boxes_meeting_boundary_of(q: Rect) -> list[Box5]:
    """Stored extents that meet the boundary of ``q``."""
    return boxes_minus(boxes_intersecting(q), boxes_within_interior(q))


def boxes_min_side(s_min: int) -> list[Box5]:
    return [Box5((s_min, _ANY, _ANY, _ANY, _ANY), (_ANY,) * NDIM)]


def boxes_max_side(s_max: int) -> list[Box5]:
    return [Box5((_ANY,) * NDIM, (s_max, _ANY, _ANY, _ANY, _ANY))]


# -- tree ---------------------------------------------------------------------


class _Node:
    __slots__ = ("split", "left", "right", "size", "assoc", "counts", "items")

    def __init__(self) -> None:
        self.split = None
        self.left = None
        self.right = None
        self.size = 0
        self.assoc = None
        self.counts = None
        self.items = None  # sorted point list when the node is a bucket


def _bucket(points: list) -> _Node:
    node = _Node()
    node.items = points
    node.size = len(points)
    return node


class ConflictTree:
    """A set of keyed items plus named conflict subsets with range counts.

    Items are any objects with an ``id`` attribute; their five-coordinate key
    defaults to :func:`square_key`. Ids must be mutually comparable (they break
    coordinate ties and order reports).
    """

    def __init__(self, key=square_key) -> None:
        self._key = key
        self._root = _bucket([])
        self._points: dict[Hashable, tuple] = {}
        self._payload: dict[Hashable, Any] = {}
        self._member: dict[Hashable, dict] = {}
        self._set_size: dict[Hashable, int] = {}
        self.rebuilds = 0

    # -- bookkeeping --------------------------------------------------------

    def __len__(self) -> int:
        return len(self._points)

    def __contains__(self, item_id) -> bool:
        return item_id in self._points

    def __iter__(self):
        return iter(self._payload.values())

    def get(self, item_id):
        return self._payload[item_id]

    def set_size(self, set_id) -> int:
        return self._set_size.get(set_id, 0)

    def sets_of(self, item_id) -> tuple:
        return tuple(self._member[item_id])

    def members(self, set_id) -> list:
        return sorted(i for i, sets in self._member.items() if set_id in sets)

    @property
    def total_memberships(self) -> int:
        return sum(self._set_size.values())

    # -- building -----------------------------------------------------------

    def _build(self, points: list, d: int) -> _Node:
        # points sorted by the level-d key
        n = len(points)
        if n <= BUCKET:
            return _bucket(points)
        node = _Node()
        node.size = n
        mid = n >> 1
        node.split = _KEYS[d](points[mid - 1])
        node.left = self._build(points[:mid], d)
        node.right = self._build(points[mid:], d)
        if d < NDIM - 1:
            node.assoc = self._build(sorted(points, key=_KEYS[d + 1]), d + 1)
        else:
            counts: dict = {}
            member = self._member
            for p in points:
                for sid in member[p[5]]:
                    counts[sid] = counts.get(sid, 0) + 1
            node.counts = counts
        return node

    def _collect(self, node: _Node, out: list) -> list:
        stack = [node]
        while stack:
            v = stack.pop()
            if v.items is not None:
                out.extend(v.items)
            else:
                stack.append(v.right)
                stack.append(v.left)
        return out

    def _rebuild(self, points: list, d: int) -> _Node:
        self.rebuilds += 1
        points.sort(key=_KEYS[d])
        return self._build(points, d)

    # -- updates ------------------------------------------------------------

    def insert(self, item, key: Optional[tuple] = None) -> None:
        item_id = item.id
        if item_id in self._points:
            raise KeyError(f"duplicate item {item_id!r}")
        p = tuple(key if key is not None else self._key(item)) + (item_id,)
        if len(p) != NDIM + 1:
            raise ValueError("keys must have five coordinates")
        self._points[item_id] = p
        self._payload[item_id] = item
        self._member[item_id] = {}
        self._root = self._insert(self._root, 0, p)

    def _insert(self, node: _Node, d: int, p: tuple) -> _Node:
        if node.items is not None:
            insort(node.items, p, key=_KEYS[d])
            node.size += 1
            if node.size > BUCKET:
                return self._build(node.items, d)
            return node
        k = _KEYS[d](p)
        go_left = k <= node.split
        child = node.left if go_left else node.right
        if child.size + 1 > ALPHA * (node.size + 1):
            points = self._collect(node, [p])
            return self._rebuild(points, d)
        node.size += 1
        if d < NDIM - 1:
            node.assoc = self._insert(node.assoc, d + 1, p)
        else:
            counts = node.counts
            for sid in self._member[p[5]]:
                counts[sid] = counts.get(sid, 0) + 1
        if go_left:
            node.left = self._insert(node.left, d, p)
        else:
            node.right = self._insert(node.right, d, p)
        return node

    def delete(self, item_id) -> None:
        """Remove an item and all of its conflict-set memberships."""
        if item_id not in self._points:
            raise KeyError(f"unknown item {item_id!r}")
        for sid in list(self._member[item_id]):
            self.leave(item_id, sid)
        p = self._points.pop(item_id)
        del self._payload[item_id]
        del self._member[item_id]
        self._root = self._delete(self._root, 0, p)

    def _delete(self, node: _Node, d: int, p: tuple) -> _Node:
        if node.items is not None:
            node.items.remove(p)
            node.size -= 1
            return node
        if node.size - 1 <= BUCKET:
            points = [q for q in self._collect(node, []) if q is not p]
            points.sort(key=_KEYS[d])
            return _bucket(points)
        k = _KEYS[d](p)
        go_left = k <= node.split
        other = node.right if go_left else node.left
        if other.size > ALPHA * (node.size - 1):
            points = [q for q in self._collect(node, []) if q is not p]
            return self._rebuild(points, d)
        node.size -= 1
        if d < NDIM - 1:
            node.assoc = self._delete(node.assoc, d + 1, p)
        # member sets are already empty here (delete() leaves all sets first)
        if go_left:
            node.left = self._delete(node.left, d, p)
        else:
            node.right = self._delete(node.right, d, p)
        return node

    def join(self, item_id, set_id) -> None:
        sets = self._member[item_id]
        if set_id in sets:
            raise KeyError(f"{item_id!r} already in set {set_id!r}")
        sets[set_id] = None
        self._set_size[set_id] = self._set_size.get(set_id, 0) + 1
        self._adjust(self._root, 0, self._points[item_id], set_id, 1)

    def leave(self, item_id, set_id) -> None:
        sets = self._member[item_id]
        if set_id not in sets:
            raise KeyError(f"{item_id!r} not in set {set_id!r}")
        del sets[set_id]
        left = self._set_size[set_id] - 1
        if left:
            self._set_size[set_id] = left
        else:
            del self._set_size[set_id]
        self._adjust(self._root, 0, self._points[item_id], set_id, -1)

    def _adjust(self, node: _Node, d: int, p: tuple, sid, delta: int) -> None:
        last = NDIM - 1
        keyf = _KEYS[d]
        k = keyf(p)
        while node.items is None:
            if d < last:
                self._adjust(node.assoc, d + 1, p, sid, delta)
            else:
                counts = node.counts
                c = counts.get(sid, 0) + delta
                if c:
                    counts[sid] = c
                else:
                    del counts[sid]
            node = node.left if k <= node.split else node.right

    # -- queries ------------------------------------------------------------

    def find_excluding(self, boxes: Iterable[Box5], set_id=None):
        """Some stored item in the union of ``boxes`` that is not in ``set_id``."""
        if set_id is not None and set_id not in self._set_size:
            set_id = None
        for bx in boxes:
            hit = self._find(self._root, 0, bx, set_id)
            if hit is not None:
                return self._payload[hit[5]]
        return None

    def count(self, boxes: Iterable[Box5]) -> int:
        """Number of stored items in the union of (disjoint) ``boxes``."""
        return sum(self._count(self._root, 0, bx) for bx in boxes)

    def report_all(self, boxes: Iterable[Box5]) -> list:
        out: list = []
        for bx in boxes:
            self._report(self._root, 0, bx, out)
        ids = sorted({p[5] for p in out})
        return [self._payload[i] for i in ids]

    def _scan_find(self, items, bx: Box5, sid):
        member = self._member
        for p in items:
            if bx.contains_point(p) and (sid is None or sid not in member[p[5]]):
                return p
        return None

    def _find(self, node: _Node, d: int, bx: Box5, sid):
        if node.size == 0:
            return None
        lo, hi = bx.lo[d], bx.hi[d]
        if lo is None and hi is None:
            return self._find_full(node, d, bx, sid)
        return self._find_range(node, d, None, None, lo, hi, bx, sid)

    def _find_range(self, node, d, blo, bhi, lo, hi, bx, sid):
        if node.items is not None:
            return self._scan_find(node.items, bx, sid)
        if (lo is not None and bhi is not None and bhi[0] < lo) or (
            hi is not None and blo is not None and blo[0] > hi
        ):
            return None
        if (lo is None or (blo is not None and blo[0] >= lo)) and (
            hi is None or (bhi is not None and bhi[0] <= hi)
        ):
            return self._find_full(node, d, bx, sid)
        hit = self._find_range(node.left, d, blo, node.split, lo, hi, bx, sid)
        if hit is not None:
            return hit
        return self._find_range(node.right, d, node.split, bhi, lo, hi, bx, sid)

    def _find_full(self, node, d, bx, sid):
        # every point under node satisfies coordinates 0..d
        if node.items is not None:
            return self._scan_find(node.items, bx, sid)
        if d < NDIM - 1:
            return self._find(node.assoc, d + 1, bx, sid)
        return self._descend(node, sid)

    def _descend(self, node, sid):
        member = self._member
        while True:
            if node.items is not None:
                for p in node.items:
                    if sid is None or sid not in member[p[5]]:
                        return p
                return None
            if sid is None:
                node = node.left
                continue
            if node.size <= node.counts.get(sid, 0):
                return None
            left = node.left
            if left.items is not None:
                for p in left.items:
                    if sid not in member[p[5]]:
                        return p
                node = node.right
            elif left.size > left.counts.get(sid, 0):
                node = left
            else:
                node = node.right

    def _count(self, node, d, bx) -> int:
        if node.size == 0:
            return 0
        lo, hi = bx.lo[d], bx.hi[d]
        if lo is None and hi is None:
            return self._count_full(node, d, bx)
        return self._count_range(node, d, None, None, lo, hi, bx)

    def _count_range(self, node, d, blo, bhi, lo, hi, bx) -> int:
        if node.items is not None:
            return sum(1 for p in node.items if bx.contains_point(p))
        if (lo is not None and bhi is not None and bhi[0] < lo) or (
            hi is not None and blo is not None and blo[0] > hi
        ):
            return 0
        if (lo is None or (blo is not None and blo[0] >= lo)) and (
            hi is None or (bhi is not None and bhi[0] <= hi)
        ):
            return self._count_full(node, d, bx)
        return self._count_range(node.left, d, blo, node.split, lo, hi, bx) + self._count_range(
            node.right, d, node.split, bhi, lo, hi, bx
        )

    def _count_full(self, node, d, bx) -> int:
        if node.items is not None:
            return sum(1 for p in node.items if bx.contains_point(p))
        for e in range(d + 1, NDIM):
            if bx.lo[e] is not None or bx.hi[e] is not None:
                return self._count(node.assoc, d + 1, bx)
        return node.size

    def _report(self, node, d, bx, out) -> None:
        if node.size == 0:
            return
        lo, hi = bx.lo[d], bx.hi[d]
        if lo is None and hi is None:
            self._report_full(node, d, bx, out)
        else:
            self._report_range(node, d, None, None, lo, hi, bx, out)

    def _report_range(self, node, d, blo, bhi, lo, hi, bx, out) -> None:
        if node.items is not None:
            out.extend(p for p in node.items if bx.contains_point(p))
            return
        if (lo is not None and bhi is not None and bhi[0] < lo) or (
            hi is not None and blo is not None and blo[0] > hi
        ):
            return
        if (lo is None or (blo is not None and blo[0] >= lo)) and (
            hi is None or (bhi is not None and bhi[0] <= hi)
        ):
            self._report_full(node, d, bx, out)
            return
        self._report_range(node.left, d, blo, node.split, lo, hi, bx, out)
        self._report_range(node.right, d, node.split, bhi, lo, hi, bx, out)

    def _report_full(self, node, d, bx, out) -> None:
        if node.items is not None:
            out.extend(p for p in node.items if bx.contains_point(p))
            return
        for e in range(d + 1, NDIM):
            if bx.lo[e] is not None or bx.hi[e] is not None:
                self._report(node.assoc, d + 1, bx, out)
                return
        self._collect(node, out)

    # -- diagnostics --------------------------------------------------------

    def count_entries(self) -> int:
        """Stored count entries: one ``m_v`` per last-level node plus every ``m_{v,i}``."""
        total = 0
        stack = [(self._root, 0)]
        while stack:
            node, d = stack.pop()
            if node.items is not None:
                continue
            if d < NDIM - 1:
                stack.append((node.assoc, d + 1))
            else:
                total += 1 + len(node.counts)
            stack.append((node.left, d))
            stack.append((node.right, d))
        return total

    def height(self) -> int:
        def h(node):
            return 1 if node.items is not None else 1 + max(h(node.left), h(node.right))

        return h(self._root)

    def check_invariants(self) -> None:
        """Recount every node from its leaves; raise AssertionError on drift."""
        everything = sorted(self._points.values(), key=_KEYS[0])
        self._check(self._root, 0, everything)
        sizes: dict = {}
        for sets in self._member.values():
            for sid in sets:
                sizes[sid] = sizes.get(sid, 0) + 1
        assert sizes == self._set_size, "set sizes drifted"

    def _check(self, node: _Node, d: int, expected: list) -> None:
        got = sorted(self._collect(node, []), key=_KEYS[d])
        assert got == expected, f"level {d} subtree holds the wrong points"
        assert node.size == len(expected)
        if node.items is not None:
            assert node.items == sorted(node.items, key=_KEYS[d]), "bucket out of order"
            return
        assert node.size > BUCKET
        for p in self._collect(node.left, []):
            assert _KEYS[d](p) <= node.split
        for p in self._collect(node.right, []):
            assert _KEYS[d](p) > node.split
        if d < NDIM - 1:
            self._check(node.assoc, d + 1, sorted(expected, key=_KEYS[d + 1]))
        else:
            counts: dict = {}
            for p in expected:
                for sid in self._member[p[5]]:
                    counts[sid] = counts.get(sid, 0) + 1
            assert counts == node.counts, "m_{v,i} drifted"
        left_pts = [p for p in expected if _KEYS[d](p) <= node.split]
        right_pts = [p for p in expected if _KEYS[d](p) > node.split]
        self._check(node.left, d, left_pts)
        self._check(node.right, d, right_pts)
