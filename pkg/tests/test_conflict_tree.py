import random

from hypothesis import given, settings, strategies as st
import pytest

from squareconn.conflict_tree import (
    EVERYTHING,
    NDIM,
    Box5,
    ConflictTree,
    box,
    boxes_and,
    boxes_boundary_intersecting,
    boxes_containing,
    boxes_intersecting,
    boxes_max_side,
    boxes_meeting_boundary_of,
    boxes_min_side,
    boxes_minus,
    boxes_strictly_containing,
    boxes_within,
    boxes_within_interior,
    square_key,
)
from squareconn.geometry import Rect, Square, boundary_intersects, contains, intersects, strictly_interior


def sq(id, x_lo, x_hi, y_lo, y_hi):
    return Square(id, x_lo, x_hi, y_lo, y_hi)


def scan(items, boxes):
    return sorted(
        (s for s in items if any(b.contains_point(square_key(s)) for b in boxes)), key=lambda s: s.id
    )


G1 = sq(1, 0, 4, 0, 4)
G2 = sq(2, 6, 10, 0, 4)


def tree_of(*items):
    t = ConflictTree()
    for s in items:
        t.insert(s)
    return t


# -- examples -------------------------------------------------------------------


def test_insert_delete_roundtrip():
    t = tree_of(G1)
    t.delete(1)
    assert len(t) == 0
    assert t.count([EVERYTHING]) == 0
    assert t.count_entries() == 0


def test_root_count_after_bulk_insert():
    rng = random.Random(0)
    t = ConflictTree()
    for i in range(100):
        x, y, s = rng.randint(0, 50), rng.randint(0, 50), rng.randint(1, 9)
        t.insert(sq(i, x, x + s, y, y + s))
    assert t.count([EVERYTHING]) == 100
    t.check_invariants()


def test_duplicate_and_missing_are_errors():
    t = tree_of(G1)
    with pytest.raises(KeyError):
        t.insert(G1)
    with pytest.raises(KeyError):
        t.delete(99)
    with pytest.raises(KeyError):
        t.join(99, "A")
    t.join(1, "A")
    with pytest.raises(KeyError):
        t.join(1, "A")
    with pytest.raises(KeyError):
        t.leave(1, "B")


def test_delete_leaves_all_sets():
    t = tree_of(G1, G2)
    for name in "ABC":
        t.join(1, name)
    t.join(2, "A")
    t.delete(1)
    assert [t.set_size(n) for n in "ABC"] == [1, 0, 0]
    assert t.members("A") == [2]
    t.check_invariants()


def test_join_leave_roundtrip():
    t = tree_of(*(sq(i, i, i + 3, 0, 3) for i in range(1, 60)))
    base = t.count_entries()
    t.join(1, "R")
    t.join(2, "R")
    assert t.count_entries() > base
    assert t.set_size("R") == 2
    t.leave(1, "R")
    t.leave(2, "R")
    assert t.set_size("R") == 0
    assert t.total_memberships == 0
    assert t.count_entries() == base
    t.check_invariants()


def test_find_excluding_examples():
    t = tree_of(G1, G2)
    q = boxes_intersecting(Rect(3, 7, 3, 7))
    t.join(1, "R1")
    assert t.find_excluding(q, "R1") == G2
    t.join(2, "R1")
    assert t.find_excluding(q, "R1") is None
    assert t.find_excluding(q, "unknown") is not None
    assert ConflictTree().find_excluding([EVERYTHING]) is None


def test_count_examples():
    t = tree_of(G1, G2)
    assert t.count(boxes_containing(Rect(3, 4, 3, 4))) == 1
    assert ConflictTree().count([EVERYTHING]) == 0
    assert t.count([EVERYTHING]) == 2
    assert t.report_all([EVERYTHING]) == [G1, G2]
    assert t.report_all(boxes_containing(Rect(40, 41, 40, 41))) == []


def test_builder_examples():
    a = sq(1, 0, 4, 0, 4)
    b = sq(2, 2, 6, 0, 4)
    t = tree_of(a, b)
    q = boxes_minus(boxes_intersecting(Rect(3, 4, 3, 4)), boxes_containing(Rect(3, 4, 3, 4)))
    assert t.count(q) == 0
    big = tree_of(sq(1, 0, 8, 0, 8))
    assert big.count(boxes_boundary_intersecting(Rect(1, 6, 1, 6))) == 0
    assert big.count(boxes_boundary_intersecting(Rect(6, 11, 6, 11))) == 1


def test_box_keywords():
    assert box(l_max=3, s_min=2) == Box5((2, None, None, None, None), (None, 3, None, None, None))
    with pytest.raises(ValueError):
        box(l_mid=1)


# -- builders against direct predicates -----------------------------------------

coords = st.integers(-3, 14)
rects = st.builds(
    lambda a, b, c, d: Rect(min(a, b), max(a, b), min(c, d), max(c, d)), coords, coords, coords, coords
)
squares = st.builds(lambda x, y, s: Square(0, x, x + s, y, y + s), coords, coords, st.integers(0, 8))


@settings(max_examples=400)
@given(rects, squares, st.integers(0, 8))
def test_builders_match_predicates(q, s, side):
    p = square_key(s)

    def hit(boxes):
        return sum(b.contains_point(p) for b in boxes)

    assert hit(boxes_intersecting(q)) == intersects(q, s)
    assert hit(boxes_containing(q)) == contains(s, q)
    assert hit(boxes_strictly_containing(q)) == strictly_interior(q, s)
    assert hit(boxes_within(q)) == contains(q, s)
    assert hit(boxes_within_interior(q)) == strictly_interior(s, q)
    assert hit(boxes_boundary_intersecting(q)) == boundary_intersects(q, s)
    assert hit(boxes_meeting_boundary_of(q)) == boundary_intersects(s, q)
    assert hit(boxes_min_side(side)) == (s.side >= side)
    assert hit(boxes_max_side(side)) == (s.side <= side)
    both = boxes_and(boxes_min_side(side), boxes_boundary_intersecting(q))
    assert hit(both) == (s.side >= side and boundary_intersects(q, s))


# -- randomized equivalence with a linear scan ------------------------------------


def random_box(rng):
    lo, hi = [None] * NDIM, [None] * NDIM
    for d in range(NDIM):
        r = rng.random()
        if r < 0.3:
            lo[d] = rng.randint(-2, 30)
        elif r < 0.6:
            hi[d] = rng.randint(-2, 30)
        elif r < 0.7:
            lo[d] = hi[d] = rng.randint(0, 30)
        elif r < 0.8:
            lo[d] = rng.randint(0, 30)
            hi[d] = lo[d] + rng.randint(-3, 10)
    return Box5(tuple(lo), tuple(hi))


def random_query(rng):
    k = rng.random()
    r = Rect(*sorted(rng.sample(range(-2, 32), 2)), *sorted(rng.sample(range(-2, 32), 2)))
    if k < 0.25:
        return [random_box(rng)]
    if k < 0.45:
        return boxes_boundary_intersecting(r)
    if k < 0.6:
        return boxes_and(boxes_min_side(rng.randint(0, 8)), boxes_boundary_intersecting(r))
    if k < 0.75:
        return boxes_minus(boxes_intersecting(r), boxes_containing(r))
    if k < 0.9:
        return boxes_containing(r)
    return boxes_intersecting(r)


def run_random_cases(seed, cases):
    rng = random.Random(seed)
    done = 0
    while done < cases:
        t = ConflictTree()
        live: dict = {}
        sets: dict = {}
        next_id = 0
        for _ in range(rng.randint(0, 60)):
            op = rng.random()
            if op < 0.55 or not live:
                x, y, s = rng.randint(0, 24), rng.randint(0, 24), rng.randint(0, 8)
                item = Square(next_id, x, x + s, y, y + s)
                t.insert(item)
                live[next_id] = item
                sets[next_id] = set()
                next_id += 1
            elif op < 0.7:
                i = rng.choice(sorted(live))
                t.delete(i)
                del live[i]
                del sets[i]
            elif op < 0.9:
                i = rng.choice(sorted(live))
                name = rng.choice("ABC")
                if name in sets[i]:
                    t.leave(i, name)
                    sets[i].discard(name)
                else:
                    t.join(i, name)
                    sets[i].add(name)
            else:
                for name in "ABC":
                    for i in list(live):
                        if name in sets[i] and rng.random() < 0.5:
                            t.leave(i, name)
                            sets[i].discard(name)
        for _ in range(20):
            boxes = random_query(rng)
            expected = scan(live.values(), boxes)
            assert t.count(boxes) == len(expected)
            assert t.report_all(boxes) == expected
            name = rng.choice(["A", "B", "C", None, "empty"])
            allowed = [s for s in expected if name is None or name not in sets[s.id]]
            found = t.find_excluding(boxes, name)
            if allowed:
                assert found in allowed
            else:
                assert found is None
            done += 1
        for name in "ABC":
            assert t.members(name) == sorted(i for i in live if name in sets[i])
        t.check_invariants()


def test_random_cases_against_linear_scan():
    run_random_cases(seed=11, cases=2000)


def test_determinism():
    def run():
        rng = random.Random(5)
        t = ConflictTree()
        for i in range(80):
            x, y = rng.randint(0, 20), rng.randint(0, 20)
            t.insert(Square(i, x, x + 3, y, y + 3))
        return [t.find_excluding(boxes_intersecting(Rect(q, q + 2, 5, 9))) for q in range(20)]

    assert run() == run()


def test_large_tree_rebuilds_and_stays_balanced():
    rng = random.Random(3)
    t = ConflictTree()
    for i in range(2000):
        t.insert(Square(i, i, i + 4, 0, 4))
    for i in rng.sample(range(2000), 1500):
        t.delete(i)
    t.check_invariants()
    assert t.height() <= 40
    assert t.count([EVERYTHING]) == 500
