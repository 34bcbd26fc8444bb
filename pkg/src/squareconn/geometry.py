"""Exact integer geometry for closed axis-aligned squares and dyadic cells.

Input coordinates are multiplied by ``WORLD_SCALE`` on ingestion so that
square centers and cells grown by a factor five about their center always
land on integers. Every predicate treats regions as closed sets.
"""

from __future__ import annotations

from typing import Hashable, NamedTuple, Optional, Union

WORLD_SCALE = 4
COORD_LIMIT = 1 << 40  # input units


class Rect(NamedTuple):
    """Closed rectangle in world units; may be degenerate."""

    x_lo: int
    x_hi: int
    y_lo: int
    y_hi: int


class Cell(NamedTuple):
    """Dyadic cell ``[ix*2^level, (ix+1)*2^level] x [iy*2^level, (iy+1)*2^level]``."""

    level: int
    ix: int
    iy: int

    @property
    def size(self) -> int:
        return 1 << self.level

    @property
    def rect(self) -> Rect:
        return cell_rect(self)

    def parent(self) -> "Cell":
        return Cell(self.level + 1, self.ix >> 1, self.iy >> 1)


class Square(NamedTuple):
    """A closed square stored in world units.

    Build instances with :meth:`from_input`, which validates and scales.
    """

    id: Hashable
    x_lo: int
    x_hi: int
    y_lo: int
    y_hi: int

    @classmethod
    def from_input(cls, id: Hashable, x: int, y: int, side: int) -> "Square":
        for name, value in (("x", x), ("y", y), ("side", side)):
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError(f"{name} must be an integer, got {value!r}")
        if side < 1:
            raise ValueError(f"side must be >= 1, got {side}")
        if x < 0 or y < 0:
            raise ValueError("squares must lie in the positive quadrant")
        if x + side > COORD_LIMIT or y + side > COORD_LIMIT:
            raise ValueError(f"square exceeds coordinate limit 2^40: ({x}, {y}, {side})")
        s = WORLD_SCALE
        return cls(id, x * s, (x + side) * s, y * s, (y + side) * s)

    @property
    def side(self) -> int:
        return self.x_hi - self.x_lo

    @property
    def rect(self) -> Rect:
        return Rect(self.x_lo, self.x_hi, self.y_lo, self.y_hi)

    @property
    def center(self) -> tuple[int, int]:
        return (self.x_lo + self.x_hi) >> 1, (self.y_lo + self.y_hi) >> 1

    def to_input(self) -> tuple[int, int, int]:
        s = WORLD_SCALE
        return self.x_lo // s, self.y_lo // s, self.side // s


Region = Union[Square, Rect]


def cell_rect(c: Cell) -> Rect:
    h = 1 << c.level
    return Rect(c.ix * h, (c.ix + 1) * h, c.iy * h, (c.iy + 1) * h)


def scale5(c: Cell) -> Rect:
    """The cell grown by a factor five about its own center."""
    h = 1 << c.level
    return Rect(c.ix * h - 2 * h, c.ix * h + 3 * h, c.iy * h - 2 * h, c.iy * h + 3 * h)


def _fitting(lo: int, hi: int, center: int, h: int) -> Optional[int]:
    # smallest grid index whose [i*h, (i+1)*h] contains center and lies in [lo, hi]
    i = center // h
    candidates = (i - 1, i) if center % h == 0 and i > 0 else (i,)
    for j in candidates:
        if lo <= j * h and (j + 1) * h <= hi:
            return j
    return None


def storing_cell(sq: Square) -> Cell:
    """Largest dyadic cell containing the center of ``sq`` and contained in it.

    Ties between equally large cells (center on grid lines) go to the
    bottom-left cell.
    """
    cx, cy = sq.center
    level = sq.side.bit_length() - 1
    while level >= 0:
        h = 1 << level
        ix = _fitting(sq.x_lo, sq.x_hi, cx, h)
        if ix is not None:
            iy = _fitting(sq.y_lo, sq.y_hi, cy, h)
            if iy is not None:
                return Cell(level, ix, iy)
        level -= 1
    raise AssertionError(f"no storing cell for {sq!r}")  # unreachable for valid squares


def cell_at(level: int, x: int, y: int, bottom_left: bool = True) -> Cell:
    """Level-``level`` grid cell containing the point; bottom-left on ties."""
    ix, iy = x >> level, y >> level
    if bottom_left:
        h = 1 << level
        if x % h == 0 and ix > 0:
            ix -= 1
        if y % h == 0 and iy > 0:
            iy -= 1
    return Cell(level, ix, iy)


def intersects(a: Region, b: Region) -> bool:
    return a.x_lo <= b.x_hi and b.x_lo <= a.x_hi and a.y_lo <= b.y_hi and b.y_lo <= a.y_hi


def contains(a: Region, b: Region) -> bool:
    """True iff ``b`` lies inside ``a`` (closed)."""
    return a.x_lo <= b.x_lo and b.x_hi <= a.x_hi and a.y_lo <= b.y_lo and b.y_hi <= a.y_hi


def strictly_interior(k: Region, sq: Region) -> bool:
    """True iff ``k`` lies in the open interior of ``sq``."""
    return sq.x_lo < k.x_lo and k.x_hi < sq.x_hi and sq.y_lo < k.y_lo and k.y_hi < sq.y_hi


def boundary_intersects(k: Region, sq: Region) -> bool:
    """True iff ``k`` meets the boundary of ``sq``."""
    return intersects(k, sq) and not strictly_interior(k, sq)


def cell_contains_cell(outer: Cell, inner: Cell) -> bool:
    d = outer.level - inner.level
    return d >= 0 and inner.ix >> d == outer.ix and inner.iy >> d == outer.iy


def lca(a: Cell, b: Cell) -> Cell:
    """Smallest dyadic cell that is an ancestor-or-self of both cells."""
    level = max(a.level, b.level)
    ax, ay = a.ix >> (level - a.level), a.iy >> (level - a.level)
    bx, by = b.ix >> (level - b.level), b.iy >> (level - b.level)
    k = ((ax ^ bx) | (ay ^ by)).bit_length()
    return Cell(level + k, ax >> k, ay >> k)


def morton_key(c: Cell) -> tuple[int, int]:
    """Sort key placing cells in quadtree pre-order (ancestors first)."""
    x, y = c.ix << c.level, c.iy << c.level
    code = 0
    bit = 0
    while x or y:
        code |= (x & 1) << (2 * bit) | (y & 1) << (2 * bit + 1)
        x >>= 1
        y >>= 1
        bit += 1
    return code, -c.level


def window(rect: Rect, level: int) -> tuple[range, range]:
    """Index ranges of level-``level`` cells whose 5x-scaling meets ``rect``.

    Indices are clipped to the positive quadrant.
    """
    h = 1 << level
    x0 = max(0, -((3 * h - rect.x_lo) // h))
    x1 = (rect.x_hi + 2 * h) // h
    y0 = max(0, -((3 * h - rect.y_lo) // h))
    y1 = (rect.y_hi + 2 * h) // h
    return range(x0, x1 + 1), range(y0, y1 + 1)
