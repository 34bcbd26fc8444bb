from squareconn.engine import Engine
from squareconn.geometry import Cell, Square
from squareconn.oracle import (
    OracleState,
    intersection_labels,
    o_check_matchings,
    o_connected,
    o_contained_cells,
    o_counters,
    o_inverse_perimeter,
    o_perimeter,
    storing_cells_of,
)

A = Square.from_input("A", 0, 0, 4)
B = Square.from_input("B", 3, 3, 4)
CELL_A, CELL_B = Cell(4, 0, 0), Cell(3, 2, 2)


def test_chain_connectivity():
    a = Square.from_input("a", 0, 0, 2)
    b = Square.from_input("b", 1, 1, 2)
    c = Square.from_input("c", 3, 3, 2)
    assert o_connected([a, b, c], "a", "c")
    assert not o_connected([a, c], "a", "c")
    assert o_connected([a], "a", "a")
    assert list(intersection_labels([])) == []


def test_oracle_state_caches_and_invalidates():
    o = OracleState()
    o.insert(A)
    o.insert(B)
    assert o.connected("A", "B")
    o.delete("B")
    o.insert(Square.from_input("B", 50, 50, 1))
    assert not o.connected("A", "B")


def test_worked_pair_sets():
    storing = list(storing_cells_of([A, B]))
    assert set(storing) == {CELL_A, CELL_B}
    assert o_perimeter(A, storing) == [CELL_A, CELL_B]
    assert o_contained_cells(A, storing) == [CELL_A]
    assert o_contained_cells(B, storing) == [CELL_B]
    assert o_inverse_perimeter(CELL_B, {CELL_A: [A], CELL_B: [B]}) == {CELL_A: 1, CELL_B: 1}
    assert dict(o_counters([A, B])) == {CELL_A: 1, CELL_B: 1}


def test_empty_inputs():
    assert o_perimeter(A, []) == []
    assert o_contained_cells(A, []) == []
    assert o_inverse_perimeter(CELL_A, {}) == {}
    assert not o_counters([])


def test_fresh_matching_passes_and_corruption_fails():
    e = Engine()
    e.insert_square(A)
    e.insert_square(B)
    assert o_check_matchings(e) == []
    pair = e.matching.pairs[(CELL_A, CELL_B)]
    pair.r_to_b.clear()
    pair.b_to_r.clear()
    problems = o_check_matchings(e)
    assert any("free squares" in p for p in problems)
    assert any("conflict set" in p for p in problems)


def test_bogus_edge_is_reported():
    e = Engine()
    e.insert_square(A)
    e.insert_square(B)
    e.insert("far", 90, 90, 1)
    pair = e.matching.pairs[(CELL_A, CELL_B)]
    pair.r_to_b["A"] = "far"
    pair.b_to_r.pop("B")
    pair.b_to_r["far"] = "A"
    assert any("not stored at the blue cell" in p for p in o_check_matchings(e))
