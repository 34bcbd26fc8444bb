import random

import pytest

from squareconn.engine import Engine
from squareconn.geometry import Cell, Square, contains, scale5, storing_cell
from squareconn.oracle import (
    o_contained_cells,
    o_counters,
    o_inverse_perimeter,
    o_perimeter,
    storing_cells_of,
)
from squareconn.quadtree import Quadtree
from squareconn.registry import Registry


def registry_with(*squares):
    reg = Registry()
    for s in squares:
        reg.add_square(s)
    return reg


def inp(id, x, y, side):
    return Square.from_input(id, x, y, side)


# -- containment set --------------------------------------------------------------


def test_contained_cells_lifts_to_maximal_ancestor():
    reg = registry_with(inp("d", 2, 2, 1))
    assert storing_cell(inp("d", 2, 2, 1)) == Cell(2, 2, 2)
    assert reg.report_contained_cells(inp("s", 1, 1, 4)) == [Cell(3, 1, 1)]


def test_contained_cells_empty_registry():
    assert Registry().report_contained_cells(inp("s", 1, 1, 4)) == []
    reg = registry_with(inp("far", 500, 500, 1))
    assert reg.report_contained_cells(inp("s", 1, 1, 4)) == []


def test_nested_storing_cells_reported_once():
    reg = registry_with(inp("a", 0, 0, 1), inp("b", 0, 0, 2))
    assert reg.report_contained_cells(inp("s", 0, 0, 3)) == [Cell(3, 0, 0)]


# -- perimeter --------------------------------------------------------------------


def test_perimeter_includes_cell_crossing_boundary():
    d = inp("d", 2, 2, 1)
    reg = registry_with(d)
    sq = inp("s", 0, 0, 2)
    assert scale5(storing_cell(d)) == (0, 20, 0, 20)
    assert reg.perimeter_of_square(sq) == [Cell(2, 2, 2)]


def test_perimeter_excludes_interior_cell():
    reg = registry_with(inp("d", 10, 10, 1))
    assert reg.perimeter_of_square(inp("s", 0, 0, 40)) == []


def test_perimeter_excludes_larger_cell():
    reg = registry_with(inp("big", 0, 0, 16))
    sq = inp("s", 15, 15, 2)
    assert Cell(6, 0, 0) not in reg.perimeter_of_square(sq)
    assert reg.perimeter_of_square(sq) == []


# -- inverse perimeter -------------------------------------------------------------


def test_inverse_perimeter_big_square_near_small_cell():
    big = inp("g", 0, 0, 16)
    small = inp("c", 15, 4, 1)
    reg = registry_with(big, small)
    c = storing_cell(small)
    # a square always has its own storing cell on its perimeter
    assert reg.inverse_perimeter(c) == {storing_cell(big): 1, c: 1}


def test_inverse_perimeter_empty_when_interior():
    big = inp("g", 0, 0, 64)
    small = inp("c", 30, 30, 1)
    reg = registry_with(big, small)
    c = storing_cell(small)
    assert reg.inverse_perimeter(c) == {c: 1}


def test_inverse_perimeter_size_filter():
    a = inp("a", 0, 0, 1)
    b = inp("b", 1, 0, 16)
    reg = registry_with(a, b)
    assert storing_cell(a) not in reg.inverse_perimeter(storing_cell(b))


# -- counters and representatives -------------------------------------------------


def test_recompute_counter_single_container():
    e = Engine()
    e.insert("g", 0, 0, 16)
    e.insert("c", 5, 5, 1)
    c = storing_cell(e.squares["c"])
    marked = e.quadtree.marked_cells()
    expected = dict(o_counters(e.squares.values()))
    assert marked == expected
    tops = [a for a in expected if a != storing_cell(e.squares["g"]) and a.level >= c.level]
    assert len(tops) == 1 and expected[tops[0]] == 1


def test_counter_two_overlapping_congruent_squares():
    e = Engine()
    e.insert("g1", 0, 0, 16)
    e.insert("g2", 0, 0, 16)
    e.insert("c", 5, 5, 1)
    counts = e.quadtree.marked_cells()
    c = storing_cell(e.squares["c"])
    assert counts == dict(o_counters(e.squares.values()))
    lifted = [a for a, n in counts.items() if n == 2 and a.level > c.level - 1]
    assert lifted


def test_recompute_on_empty_registry_is_zero():
    reg = Registry()
    qt = Quadtree()
    assert reg.counter_value(Cell(3, 1, 1)) == 0
    reg.add_square(inp("s", 1, 1, 4))
    qt.set_storing(Cell(3, 1, 1), True)
    reg.recompute_ancestor_counters(Cell(3, 1, 1), qt)
    assert qt.marked_cells() == {Cell(3, 1, 1): 1}


def test_find_marking_square_examples():
    e = Engine()
    e.insert(2, 0, 0, 16)
    e.insert(1, 0, 0, 16)
    e.insert(3, 5, 5, 1)
    top = e.quadtree.highest_marked_ancestor(storing_cell(e.squares[3]), include_self=True)
    assert e.registry.find_marking_square(top).id == 1
    e.delete(1)
    assert e.registry.find_marking_square(top).id == 2
    e.delete(2)
    with pytest.raises(LookupError):
        e.registry.find_marking_square(top)


def test_uphill_candidates_examples():
    reg = registry_with(inp("a", 3, 3, 2))
    c = storing_cell(inp("a", 3, 3, 2))
    assert reg.uphill_containment_candidates(c) == [c]
    assert set(reg.uphill_containment_candidates(Cell(0, 0, 0))) <= {c}


# -- randomized comparison against the definitions --------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_registry_queries_match_definitions(seed):
    rng = random.Random(seed)
    e = Engine()
    live = []
    for step in range(120):
        if live and rng.random() < 0.3:
            e.delete(live.pop(rng.randrange(len(live))))
        else:
            e.insert(step, rng.randint(0, 80), rng.randint(0, 80), rng.choice([1, 1, 2, 4, 9, 30]))
            live.append(step)
        squares = list(e.squares.values())
        storing = list(storing_cells_of(squares))
        reg = e.registry
        assert set(reg.trees) == set(storing)
        stored = {z: list(t) for z, t in reg.trees.items()}
        for sq in rng.sample(squares, min(4, len(squares))):
            assert reg.perimeter_of_square(sq) == o_perimeter(sq, storing)
            assert reg.report_contained_cells(sq) == o_contained_cells(sq, storing)
            c = storing_cell(sq)
            assert reg.inverse_perimeter(c) == o_inverse_perimeter(c, stored)
            cands = set(reg.uphill_containment_candidates(c))
            for z, sqs in stored.items():
                for g in sqs:
                    a = c
                    while a.level <= g.side.bit_length():
                        if a in o_contained_cells(g, storing):
                            assert z in cands
                        a = a.parent()
        assert e.quadtree.marked_cells() == dict(o_counters(squares))
        for a in e.quadtree.marked_cells():
            g = reg.find_marking_square(a)
            assert contains(g, a.rect) and not contains(g, a.parent().rect)
