"""Brute-force reference answers, recomputed from scratch on every call."""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Iterable, Mapping, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import Cell, Square, boundary_intersects, contains, intersects, morton_key, scale5, storing_cell


def intersection_labels(squares: list[Square]) -> np.ndarray:
    """Component label of each square in the intersection graph."""
    n = len(squares)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    a = np.array([(s.x_lo, s.x_hi, s.y_lo, s.y_hi) for s in squares], dtype=np.int64)
    xl, xh, yl, yh = a.T
    hit = (
        (xl[:, None] <= xh[None, :])
        & (xl[None, :] <= xh[:, None])
        & (yl[:, None] <= yh[None, :])
        & (yl[None, :] <= yh[:, None])
    )
    rows, cols = np.nonzero(hit)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels


def o_connected(squares: Iterable[Square], a: Hashable, b: Hashable) -> bool:
    squares = list(squares)
    index = {s.id: i for i, s in enumerate(squares)}
    if a not in index or b not in index:
        raise KeyError(f"unknown square id ({a!r}, {b!r})")
    labels = intersection_labels(squares)
    return bool(labels[index[a]] == labels[index[b]])


class OracleState:
    """A plain list of squares with cached component labels."""

    def __init__(self) -> None:
        self.squares: dict[Hashable, Square] = {}
        self._labels: Optional[dict[Hashable, int]] = None

    def insert(self, sq: Square) -> None:
        if sq.id in self.squares:
            raise KeyError(f"duplicate square id {sq.id!r}")
        self.squares[sq.id] = sq
        self._labels = None

    def delete(self, id: Hashable) -> None:
        del self.squares[id]
        self._labels = None

    def connected(self, a: Hashable, b: Hashable) -> bool:
        if a not in self.squares or b not in self.squares:
            raise KeyError(f"unknown square id ({a!r}, {b!r})")
        if self._labels is None:
            sqs = list(self.squares.values())
            labels = intersection_labels(sqs)
            self._labels = {s.id: int(l) for s, l in zip(sqs, labels)}
        return self._labels[a] == self._labels[b]


def storing_cells_of(squares: Iterable[Square]) -> dict[Cell, list[Square]]:
    out: dict[Cell, list[Square]] = {}
    for s in squares:
        out.setdefault(storing_cell(s), []).append(s)
    return out


def o_perimeter(sq: Square, storing: Iterable[Cell]) -> list[Cell]:
    return sorted(
        (c for c in set(storing) if c.size <= sq.side and boundary_intersects(scale5(c), sq.rect)),
        key=morton_key,
    )


def o_contained_cells(sq: Square, storing: Iterable[Cell]) -> list[Cell]:
    rect = sq.rect
    out = set()
    for d in storing:
        if not contains(rect, d.rect):
            continue
        while contains(rect, d.parent().rect):
            d = d.parent()
        out.add(d)
    return sorted(out, key=morton_key)


def o_inverse_perimeter(c: Cell, stored: Mapping[Cell, Iterable[Square]]) -> dict[Cell, int]:
    """For every storing cell, how many of its squares have ``c`` on their perimeter."""
    k = scale5(c)
    out = {}
    for z, sqs in stored.items():
        n = sum(1 for g in sqs if g.side >= c.size and boundary_intersects(k, g.rect))
        if n:
            out[z] = n
    return out


def o_counters(squares: Iterable[Square]) -> Counter:
    squares = list(squares)
    storing = list(storing_cells_of(squares))
    out: Counter = Counter()
    for s in squares:
        out.update(o_contained_cells(s, storing))
    return out


def o_check_matchings(engine) -> list[str]:
    """Validity, maximality and bookkeeping problems of every matching pair."""
    problems = []
    stored = {c: list(t) for c, t in engine.registry.trees.items()}
    storing = list(stored)
    pairs = engine.matching.pairs

    expected: dict = {}
    for c1, sqs in stored.items():
        for g in sqs:
            for c2 in o_perimeter(g, storing):
                if c2 != c1:
                    expected[(c1, c2)] = expected.get((c1, c2), 0) + 1
    if set(expected) != set(pairs):
        missing = sorted(set(expected) - set(pairs))
        extra = sorted(set(pairs) - set(expected))
        problems.append(f"pair universe mismatch: missing={missing[:5]} extra={extra[:5]}")

    for key, pair in pairs.items():
        c1, c2 = key
        if c1 not in stored or c2 not in stored:
            problems.append(f"{key}: endpoint cell is not storing")
            continue
        if expected.get(key, 0) != pair.r_count:
            problems.append(f"{key}: red count {pair.r_count} != {expected.get(key, 0)}")
        reds = {g.id: g for g in stored[c1] if g.side >= c2.size and boundary_intersects(scale5(c2), g.rect)}
        blues = {r.id: r for r in stored[c2]}
        if len(set(pair.r_to_b.values())) != len(pair.r_to_b) or pair.b_to_r != {
            r: g for g, r in pair.r_to_b.items()
        }:
            problems.append(f"{key}: edge maps are not a matching")
        for g, r in pair.r_to_b.items():
            if g not in reds:
                problems.append(f"{key}: matched {g!r} is not an eligible red square")
            elif r not in blues:
                problems.append(f"{key}: matched {r!r} is not stored at the blue cell")
            elif not intersects(reds[g], blues[r]):
                problems.append(f"{key}: edge ({g!r}, {r!r}) joins disjoint squares")
        free_r = [g for i, g in reds.items() if i not in pair.r_to_b]
        free_b = [r for i, r in blues.items() if i not in pair.b_to_r]
        for g in free_r:
            for r in free_b:
                if intersects(g, r):
                    problems.append(f"{key}: free squares {g.id!r} and {r.id!r} intersect")
                    break
        t1, t2 = engine.registry.trees[c1], engine.registry.trees[c2]
        if t1.members(pair.r_set_id) != sorted(pair.r_to_b):
            problems.append(f"{key}: red conflict set differs from matched squares")
        if t2.members(pair.b_set_id) != sorted(pair.b_to_r):
            problems.append(f"{key}: blue conflict set differs from matched squares")
    return problems
