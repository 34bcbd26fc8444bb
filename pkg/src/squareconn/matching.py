"""Maximal bichromatic matchings between squares of two storing cells.

For an ordered pair of storing cells ``(c1, c2)`` the red side is the set of
squares at ``c1`` that have ``c2`` on their perimeter, and the blue side is
every square at ``c2``. Matched squares are kept as named conflict sets in the
two cells' trees, so an unmatched partner is found with one
``find_excluding`` query.
"""

from __future__ import annotations

from typing import Hashable, Iterable, Optional

from .conflict_tree import (
    Box5,
    boxes_and,
    boxes_boundary_intersecting,
    boxes_intersecting,
    boxes_min_side,
)
from .geometry import Cell, Square, scale5
from .registry import Registry

PairKey = tuple[Cell, Cell]


def eligibility_boxes(c2: Cell) -> list[Box5]:
    """Squares that have ``c2`` on their perimeter."""
    return boxes_and(boxes_min_side(c2.size), boxes_boundary_intersecting(scale5(c2)))


class MatchingPair:
    __slots__ = ("c1", "c2", "r_to_b", "b_to_r", "r_count", "eligible")

    def __init__(self, c1: Cell, c2: Cell, r_count: int = 0) -> None:
        self.c1 = c1
        self.c2 = c2
        self.r_to_b: dict[Hashable, Hashable] = {}
        self.b_to_r: dict[Hashable, Hashable] = {}
        self.r_count = r_count
        self.eligible = eligibility_boxes(c2)

    @property
    def key(self) -> PairKey:
        return (self.c1, self.c2)

    @property
    def r_set_id(self):
        return ("r", self.c2)

    @property
    def b_set_id(self):
        return ("b", self.c1)

    @property
    def edges(self) -> list[tuple[Hashable, Hashable]]:
        return sorted(self.r_to_b.items())

    def __len__(self) -> int:
        return len(self.r_to_b)

    def __repr__(self) -> str:
        return f"MatchingPair({self.c1} -> {self.c2}, edges={len(self)}, red={self.r_count})"


class MatchingEngine:
    def __init__(self, registry: Registry) -> None:
        self.registry = registry
        self.pairs: dict[PairKey, MatchingPair] = {}
        self.by_c1: dict[Cell, dict[Cell, None]] = {}
        self.by_c2: dict[Cell, dict[Cell, None]] = {}
        self.edge_count = 0
        self.rematches = 0
        self._was_active: dict[PairKey, bool] = {}

    # -- pair bookkeeping ---------------------------------------------------

    def _touch(self, pair: MatchingPair) -> None:
        if pair.key not in self._was_active:
            self._was_active[pair.key] = bool(pair.r_to_b)

    def _create(self, c1: Cell, c2: Cell, r_count: int) -> MatchingPair:
        pair = MatchingPair(c1, c2, r_count)
        self.pairs[pair.key] = pair
        self.by_c1.setdefault(c1, {})[c2] = None
        self.by_c2.setdefault(c2, {})[c1] = None
        self._touch(pair)
        return pair

    def _destroy(self, pair: MatchingPair) -> None:
        self._touch(pair)
        for g, r in list(pair.r_to_b.items()):
            self._unlink(pair, g, r)
        del self.pairs[pair.key]
        for index, a, b in ((self.by_c1, pair.c1, pair.c2), (self.by_c2, pair.c2, pair.c1)):
            row = index[a]
            del row[b]
            if not row:
                del index[a]

    def _link(self, pair: MatchingPair, g: Hashable, r: Hashable) -> None:
        pair.r_to_b[g] = r
        pair.b_to_r[r] = g
        trees = self.registry.trees
        trees[pair.c1].join(g, pair.r_set_id)
        trees[pair.c2].join(r, pair.b_set_id)
        self.edge_count += 1

    def _unlink(self, pair: MatchingPair, g: Hashable, r: Hashable) -> None:
        del pair.r_to_b[g]
        del pair.b_to_r[r]
        trees = self.registry.trees
        trees[pair.c1].leave(g, pair.r_set_id)
        trees[pair.c2].leave(r, pair.b_set_id)
        self.edge_count -= 1

    def pairs_touching(self, c: Cell) -> list[MatchingPair]:
        out = [self.pairs[(c, c2)] for c2 in self.by_c1.get(c, ())]
        out.extend(self.pairs[(c1, c)] for c1 in self.by_c2.get(c, ()))
        return out

    # -- matching primitives ------------------------------------------------

    def try_match_b_side(self, pair: MatchingPair, rho: Square) -> Optional[Square]:
        """Match a blue square to some unmatched eligible red square it meets."""
        if rho.id in pair.b_to_r:
            raise ValueError(f"{rho.id!r} is already matched in {pair}")
        self._touch(pair)
        t1 = self.registry.trees[pair.c1]
        boxes = boxes_and(pair.eligible, boxes_intersecting(rho.rect))
        g = t1.find_excluding(boxes, pair.r_set_id)
        if g is not None:
            self._link(pair, g.id, rho.id)
        return g

    def try_match_r_side(self, pair: MatchingPair, g: Square) -> Optional[Square]:
        """Match an eligible red square to some unmatched blue square it meets."""
        if g.id in pair.r_to_b:
            raise ValueError(f"{g.id!r} is already matched in {pair}")
        self._touch(pair)
        t2 = self.registry.trees[pair.c2]
        rho = t2.find_excluding(boxes_intersecting(g.rect), pair.b_set_id)
        if rho is not None:
            self._link(pair, g.id, rho.id)
        return rho

    def unmatch_and_rematch(self, pair: MatchingPair, sq: Square, side: str) -> Optional[Square]:
        """Drop the edge at ``sq`` and offer its partner a new match.

        ``sq`` stays in its conflict set during the partner's query, so it can
        never be chosen again; it leaves the set afterwards.
        """
        self._touch(pair)
        trees = self.registry.trees
        if side == "r":
            partner = pair.r_to_b.get(sq.id)
            if partner is None:
                raise ValueError(f"{sq.id!r} is not matched in {pair}")
            del pair.r_to_b[sq.id]
            del pair.b_to_r[partner]
            self.edge_count -= 1
            trees[pair.c2].leave(partner, pair.b_set_id)
            found = self.try_match_b_side(pair, trees[pair.c2].get(partner))
            trees[pair.c1].leave(sq.id, pair.r_set_id)
        elif side == "b":
            partner = pair.b_to_r.get(sq.id)
            if partner is None:
                raise ValueError(f"{sq.id!r} is not matched in {pair}")
            del pair.b_to_r[sq.id]
            del pair.r_to_b[partner]
            self.edge_count -= 1
            trees[pair.c1].leave(partner, pair.r_set_id)
            found = self.try_match_r_side(pair, trees[pair.c1].get(partner))
            trees[pair.c2].leave(sq.id, pair.b_set_id)
        else:
            raise ValueError(f"side must be 'r' or 'b', got {side!r}")
        self.rematches += 1
        return found

    # -- update hooks -------------------------------------------------------

    def on_square_inserted(
        self, sq: Square, c: Cell, perimeter: Iterable[Cell], inverse: dict[Cell, int]
    ) -> None:
        """Offer a freshly stored square to every pair it now belongs to."""
        for c2 in perimeter:
            if c2 == c:
                continue
            pair = self.pairs.get((c, c2))
            if pair is None:
                pair = self._create(c, c2, 0)
            pair.r_count += 1
            self.try_match_r_side(pair, sq)
        trees = self.registry.trees
        for z, n in inverse.items():
            if z == c:
                continue
            pair = self.pairs.get((z, c))
            if pair is None:
                pair = self._create(z, c, n)
                for rho in sorted(trees[c], key=lambda s: s.id):
                    self.try_match_b_side(pair, rho)
            else:
                self.try_match_b_side(pair, sq)

    def on_square_deleted(self, sq: Square, c: Cell, perimeter: Iterable[Cell]) -> None:
        """Detach a square that is about to leave cell ``c``; rematch its partners."""
        for c2 in perimeter:
            if c2 == c:
                continue
            pair = self.pairs[(c, c2)]
            self._touch(pair)
            if sq.id in pair.r_to_b:
                self.unmatch_and_rematch(pair, sq, "r")
            pair.r_count -= 1
            if pair.r_count == 0:
                self._destroy(pair)
        for c1 in list(self.by_c2.get(c, ())):
            pair = self.pairs[(c1, c)]
            if sq.id in pair.b_to_r:
                self.unmatch_and_rematch(pair, sq, "b")

    def drop_cell(self, c: Cell) -> None:
        """Destroy every pair involving a cell that stopped storing squares."""
        for pair in self.pairs_touching(c):
            if pair.key in self.pairs:
                self._destroy(pair)

    def flush(self) -> tuple[list[PairKey], list[PairKey]]:
        """Pairs whose edge set became nonempty / empty since the last flush."""
        on, off = [], []
        for key, was in self._was_active.items():
            pair = self.pairs.get(key)
            now = pair is not None and bool(pair.r_to_b)
            if now and not was:
                on.append(key)
            elif was and not now:
                off.append(key)
        self._was_active.clear()
        return on, off

    def active_pairs(self) -> list[PairKey]:
        return [k for k, p in self.pairs.items() if p.r_to_b]
