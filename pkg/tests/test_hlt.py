import random

import pytest

from squareconn.hlt import DynamicConnectivity, ProxyGraph, join2, iter_nodes, split, _Node, _check_node, root_of


def components(vertices, edges):
    """Union-find recompute from scratch."""
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return {v: find(v) for v in vertices}


def proxy_with(*names):
    g = ProxyGraph()
    for n in names:
        g.add_vertex(n)
    return g


def test_vertex_lifecycle():
    g = proxy_with("a")
    with pytest.raises(KeyError):
        g.add_vertex("a")
    g.add_vertex("b")
    g.activate("a", "b")
    with pytest.raises(ValueError):
        g.remove_vertex("a")
    g.deactivate("a", "b")
    g.remove_vertex("a")
    g.remove_vertex("b")
    assert g.vertex_count == 0 and g.edge_count == 0


def test_path_then_cut():
    g = proxy_with("a", "b", "c")
    g.activate("a", "b")
    g.activate("b", "c")
    assert g.connected("a", "c")
    g.deactivate("b", "c")
    assert not g.connected("a", "c")
    assert g.connected("a", "b")


def test_refcount_keeps_edge_until_last_release():
    g = proxy_with("a", "b")
    g.activate("a", "b")
    g.activate("b", "a")
    assert g.refs == {("a", "b"): 2}
    with pytest.raises(ValueError):
        g.activate("a", "b")
    g.deactivate("a", "b")
    assert g.connected("a", "b")
    g.deactivate("b", "a")
    assert not g.connected("a", "b")
    with pytest.raises(ValueError):
        g.deactivate("a", "b")


def test_query_basics_and_errors():
    g = proxy_with("a", "b")
    assert g.connected("a", "a")
    assert not g.connected("a", "b")
    with pytest.raises(KeyError):
        g.connected("a", "zz")
    with pytest.raises(KeyError):
        g.activate("a", "zz")


def test_self_loop_rejected():
    d = DynamicConnectivity()
    d.add_vertex(1)
    with pytest.raises(ValueError):
        d.insert_edge(1, 1)


def test_cycle_replacement_edge_found():
    d = DynamicConnectivity()
    for v in range(6):
        d.add_vertex(v)
    for v in range(6):
        d.insert_edge(v, (v + 1) % 6)
    d.check_invariants()
    d.delete_edge(0, 1)
    assert d.connected(0, 1)
    d.check_invariants()
    d.delete_edge(3, 4)
    assert d.connected(1, 3) and d.connected(4, 0)
    assert not d.connected(1, 4)
    d.check_invariants()


def test_weight_balanced_sequence_split_join():
    nodes = [_Node(vertex=i) for i in range(200)]
    t = None
    for n in nodes:
        t = join2(t, n)
    for n in iter_nodes(t):
        _check_node(n)
    assert [n.vertex for n in iter_nodes(t)] == list(range(200))
    left, right = split(nodes[77])
    assert [n.vertex for n in iter_nodes(left)] == list(range(77))
    assert [n.vertex for n in iter_nodes(right)] == list(range(78, 200))
    assert nodes[77].parent is None and nodes[77].size == 1
    for part in (left, right):
        for n in iter_nodes(part):
            _check_node(n)
    whole = join2(join2(right, left), nodes[77])
    assert root_of(nodes[0]) is whole
    order = [n.vertex for n in iter_nodes(whole)]
    assert order == list(range(78, 200)) + list(range(77)) + [77]


def churn(n_vertices, ops, seed, check_every=1):
    rng = random.Random(seed)
    d = DynamicConnectivity()
    for v in range(n_vertices):
        d.add_vertex(v)
    edges = set()
    for step in range(ops):
        if edges and rng.random() < 0.45:
            e = rng.choice(sorted(edges))
            edges.remove(e)
            d.delete_edge(*e)
        else:
            a, b = rng.sample(range(n_vertices), 2)
            e = (min(a, b), max(a, b))
            if e in edges:
                continue
            edges.add(e)
            d.insert_edge(*e)
        if step % check_every == 0:
            comp = components(range(n_vertices), edges)
            for _ in range(5):
                u, v = rng.randrange(n_vertices), rng.randrange(n_vertices)
                assert d.connected(u, v) == (comp[u] == comp[v])
            d.check_invariants()
    return d


def test_random_churn_small_graph():
    churn(30, 1500, seed=1)


def test_random_churn_200_vertices():
    d = churn(200, 2000, seed=2, check_every=50)
    assert d.edge_touches >= 0
