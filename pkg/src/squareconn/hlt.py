"""Fully dynamic connectivity with level-tiered spanning forests.

Each level keeps a spanning forest as Euler tours. A tour is a sequence of
one node per vertex plus two arc nodes per tree edge, stored in a weight
balanced binary tree that supports split and join. Subtree flags locate tree
edges whose level equals the forest level and vertices that own non-tree
edges at that level; deleting a tree edge searches the smaller side for a
replacement, promoting every edge it inspects without success.
"""

from __future__ import annotations

from typing import Hashable, Iterator, Optional

ALPHA = 0.25  # weight balance parameter; join is valid for ALPHA <= 1 - 1/sqrt(2)


class _Node:
    __slots__ = ("left", "right", "parent", "size", "vcnt", "tflag", "nflag", "own_t", "own_n", "vertex", "arc")

    def __init__(self, vertex=None, arc=None) -> None:
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None
        self.parent: Optional[_Node] = None
        self.size = 1
        self.vertex = vertex
        self.arc = arc
        self.vcnt = 1 if arc is None else 0
        self.own_t = False
        self.own_n = False
        self.tflag = False
        self.nflag = False


def _size(t: Optional[_Node]) -> int:
    return t.size if t is not None else 0


def _update(n: _Node) -> None:
    l, r = n.left, n.right
    size = 1
    vcnt = 1 if n.arc is None else 0
    tf, nf = n.own_t, n.own_n
    if l is not None:
        size += l.size
        vcnt += l.vcnt
        tf = tf or l.tflag
        nf = nf or l.nflag
    if r is not None:
        size += r.size
        vcnt += r.vcnt
        tf = tf or r.tflag
        nf = nf or r.nflag
    n.size, n.vcnt, n.tflag, n.nflag = size, vcnt, tf, nf


def _refresh(n: Optional[_Node]) -> None:
    while n is not None:
        _update(n)
        n = n.parent


def _set_left(n: _Node, c: Optional[_Node]) -> None:
    n.left = c
    if c is not None:
        c.parent = n


def _set_right(n: _Node, c: Optional[_Node]) -> None:
    n.right = c
    if c is not None:
        c.parent = n


def _like(wa: int, wb: int) -> bool:
    total = wa + wb
    return ALPHA * total <= wa and ALPHA * total <= wb


def _rotate_left(x: _Node) -> _Node:
    y = x.right
    _set_right(x, y.left)
    _set_left(y, x)
    _update(x)
    _update(y)
    return y


def _rotate_right(x: _Node) -> _Node:
    y = x.left
    _set_left(x, y.right)
    _set_right(y, x)
    _update(x)
    _update(y)
    return y


def _node3(l: Optional[_Node], k: _Node, r: Optional[_Node]) -> _Node:
    _set_left(k, l)
    _set_right(k, r)
    _update(k)
    return k


def _join_right(tl: Optional[_Node], k: _Node, tr: Optional[_Node]) -> _Node:
    if tl is None or _like(tl.size + 1, _size(tr) + 1):
        return _node3(tl, k, tr)
    l = tl.left
    t2 = _join_right(tl.right, k, tr)
    _set_right(tl, t2)
    _update(tl)
    wl = _size(l) + 1
    if _like(wl, t2.size + 1):
        return tl
    wl1 = _size(t2.left) + 1
    if _like(wl, wl1) and _like(wl + wl1, _size(t2.right) + 1):
        return _rotate_left(tl)
    _set_right(tl, _rotate_right(t2))
    return _rotate_left(tl)


def _join_left(tl: Optional[_Node], k: _Node, tr: Optional[_Node]) -> _Node:
    if tr is None or _like(_size(tl) + 1, tr.size + 1):
        return _node3(tl, k, tr)
    r = tr.right
    t2 = _join_left(tl, k, tr.left)
    _set_left(tr, t2)
    _update(tr)
    wr = _size(r) + 1
    if _like(wr, t2.size + 1):
        return tr
    wr1 = _size(t2.right) + 1
    if _like(wr, wr1) and _like(wr + wr1, _size(t2.left) + 1):
        return _rotate_right(tr)
    _set_left(tr, _rotate_left(t2))
    return _rotate_right(tr)


def join3(tl: Optional[_Node], k: _Node, tr: Optional[_Node]) -> _Node:
    """Concatenate ``tl``, the detached node ``k`` and ``tr``."""
    wl, wr = _size(tl) + 1, _size(tr) + 1
    if _like(wl, wr):
        t = _node3(tl, k, tr)
    elif wl > wr:
        t = _join_right(tl, k, tr)
    else:
        t = _join_left(tl, k, tr)
    t.parent = None
    return t


def join2(tl: Optional[_Node], tr: Optional[_Node]) -> Optional[_Node]:
    if tl is None:
        return tr
    if tr is None:
        return tl
    m = tl
    while m.right is not None:
        m = m.right
    rest, _ = split(m)
    return join3(rest, m, tr)


def split(x: _Node) -> tuple[Optional[_Node], Optional[_Node]]:
    """Cut the sequence around ``x``; returns (before, after) and leaves ``x`` alone."""
    left, right = x.left, x.right
    if left is not None:
        left.parent = None
    if right is not None:
        right.parent = None
    p = x.parent
    came_right = p is not None and p.right is x
    x.left = x.right = x.parent = None
    _update(x)
    while p is not None:
        pp = p.parent
        p_right = pp is not None and pp.right is p
        if came_right:
            pl = p.left
            if pl is not None:
                pl.parent = None
            p.left = p.right = p.parent = None
            left = join3(pl, p, left)
        else:
            pr = p.right
            if pr is not None:
                pr.parent = None
            p.left = p.right = p.parent = None
            right = join3(right, p, pr)
        p, came_right = pp, p_right
    return left, right


def root_of(n: _Node) -> _Node:
    while n.parent is not None:
        n = n.parent
    return n


def rank(n: _Node) -> int:
    r = _size(n.left)
    while n.parent is not None:
        p = n.parent
        if p.right is n:
            r += _size(p.left) + 1
        n = p
    return r


def iter_nodes(t: Optional[_Node]) -> Iterator[_Node]:
    stack = []
    while stack or t is not None:
        while t is not None:
            stack.append(t)
            t = t.left
        t = stack.pop()
        yield t
        t = t.right


def _find_flag(t: _Node, attr_sub: str, attr_own: str) -> Optional[_Node]:
    # leftmost node with its own flag set, guided by subtree flags
    if not getattr(t, attr_sub):
        return None
    while True:
        l = t.left
        if l is not None and getattr(l, attr_sub):
            t = l
        elif getattr(t, attr_own):
            return t
        else:
            t = t.right


class EulerTourForest:
    """One level's spanning forest."""

    def __init__(self, level: int) -> None:
        self.level = level
        self.vnode: dict[Hashable, _Node] = {}
        self.arcs: dict[tuple, _Node] = {}

    def node(self, u) -> _Node:
        n = self.vnode.get(u)
        if n is None:
            n = self.vnode[u] = _Node(vertex=u)
        return n

    def drop_vertex(self, u) -> None:
        n = self.vnode.pop(u, None)
        if n is not None:
            assert n.parent is None and n.left is None and n.right is None, "vertex is not isolated"

    def connected(self, u, v) -> bool:
        if u == v:
            return True
        a, b = self.vnode.get(u), self.vnode.get(v)
        if a is None or b is None:
            return False
        return root_of(a) is root_of(b)

    def tree_root(self, u) -> _Node:
        return root_of(self.node(u))

    def tree_size(self, u) -> int:
        n = self.vnode.get(u)
        return 1 if n is None else root_of(n).vcnt

    def _reroot(self, u) -> _Node:
        n = self.node(u)
        before, after = split(n)
        return join2(join3(None, n, after), before)

    def link(self, u, v, tagged: bool) -> None:
        tu = self._reroot(u)
        tv = self._reroot(v)
        a1 = _Node(arc=(u, v))
        a2 = _Node(arc=(v, u))
        a1.own_t = tagged
        _update(a1)
        self.arcs[(u, v)] = a1
        self.arcs[(v, u)] = a2
        join3(join3(tu, a1, tv), a2, None)

    def cut(self, u, v) -> None:
        a1 = self.arcs.pop((u, v))
        a2 = self.arcs.pop((v, u))
        if rank(a1) > rank(a2):
            a1, a2 = a2, a1
        head, rest = split(a1)
        _mid, tail = split(a2)
        join2(head, tail)

    def set_tag(self, u, v, tagged: bool) -> None:
        a = self.arcs[(u, v)]
        b = self.arcs[(v, u)]
        a.own_t = tagged
        b.own_t = False
        _refresh(a)
        _refresh(b)

    def set_nontree(self, u, flag: bool) -> None:
        n = self.node(u)
        if n.own_n != flag:
            n.own_n = flag
            _refresh(n)

    def tagged_arc(self, u) -> Optional[tuple]:
        n = self.vnode.get(u)
        if n is None:
            return None
        hit = _find_flag(root_of(n), "tflag", "own_t")
        return None if hit is None else hit.arc

    def vertex_with_nontree(self, u):
        n = self.vnode.get(u)
        if n is None:
            return None
        hit = _find_flag(root_of(n), "nflag", "own_n")
        return None if hit is None else hit.vertex

    def tours(self) -> list[list[_Node]]:
        roots = {}
        for n in list(self.vnode.values()) + list(self.arcs.values()):
            r = root_of(n)
            roots[id(r)] = r
        return [list(iter_nodes(r)) for r in roots.values()]


def _key(u, v) -> tuple:
    return (u, v) if u <= v else (v, u)


class DynamicConnectivity:
    """Holm, de Lichtenberg and Thorup style connectivity over hashable, ordered vertex ids."""

    def __init__(self) -> None:
        self.forests: list[EulerTourForest] = [EulerTourForest(0)]
        self.adj: list[dict] = [{}]
        self.edge_level: dict[tuple, int] = {}
        self.is_tree: dict[tuple, bool] = {}
        self.vertices: dict[Hashable, None] = {}
        self.max_vertices = 0
        self.edge_touches = 0

    # -- vertices -----------------------------------------------------------

    def add_vertex(self, u) -> None:
        if u in self.vertices:
            raise KeyError(f"vertex {u!r} already present")
        self.vertices[u] = None
        self.max_vertices = max(self.max_vertices, len(self.vertices))

    def remove_vertex(self, u) -> None:
        if u not in self.vertices:
            raise KeyError(f"unknown vertex {u!r}")
        for adj in self.adj:
            if adj.get(u):
                raise ValueError(f"vertex {u!r} still has edges")
        if self.forests[0].tree_size(u) > 1:
            raise ValueError(f"vertex {u!r} still has edges")
        for f in self.forests:
            f.drop_vertex(u)
        for adj in self.adj:
            adj.pop(u, None)
        del self.vertices[u]

    def _level(self, i: int) -> EulerTourForest:
        while len(self.forests) <= i:
            self.forests.append(EulerTourForest(len(self.forests)))
            self.adj.append({})
        return self.forests[i]

    # -- edges --------------------------------------------------------------

    def has_edge(self, u, v) -> bool:
        return _key(u, v) in self.edge_level

    def _add_nontree(self, i: int, u, v) -> None:
        f = self._level(i)
        adj = self.adj[i]
        for a, b in ((u, v), (v, u)):
            row = adj.get(a)
            if row is None:
                row = adj[a] = {}
            row[b] = None
            if len(row) == 1:
                f.set_nontree(a, True)

    def _remove_nontree(self, i: int, u, v) -> None:
        f = self.forests[i]
        adj = self.adj[i]
        for a, b in ((u, v), (v, u)):
            row = adj[a]
            del row[b]
            if not row:
                del adj[a]
                f.set_nontree(a, False)

    def insert_edge(self, u, v) -> None:
        if u == v:
            raise ValueError("self loops are not supported")
        if u not in self.vertices or v not in self.vertices:
            raise KeyError(f"unknown vertex in edge ({u!r}, {v!r})")
        k = _key(u, v)
        if k in self.edge_level:
            raise KeyError(f"edge {k!r} already present")
        self.edge_level[k] = 0
        f0 = self.forests[0]
        if f0.connected(u, v):
            self.is_tree[k] = False
            self._add_nontree(0, u, v)
        else:
            self.is_tree[k] = True
            f0.link(k[0], k[1], tagged=True)

    def delete_edge(self, u, v) -> None:
        k = _key(u, v)
        if k not in self.edge_level:
            raise KeyError(f"no edge {k!r}")
        lvl = self.edge_level.pop(k)
        tree = self.is_tree.pop(k)
        if not tree:
            self._remove_nontree(lvl, u, v)
            return
        for i in range(lvl + 1):
            self.forests[i].cut(k[0], k[1])
        for i in range(lvl, -1, -1):
            if self._replace(i, k[0], k[1]):
                return

    def _replace(self, i: int, u, v) -> bool:
        f = self.forests[i]
        if f.tree_size(u) > f.tree_size(v):
            u, v = v, u
        # u is on the smaller side: promote its level-i tree edges
        up = self._level(i + 1)
        while True:
            arc = f.tagged_arc(u)
            if arc is None:
                break
            a, b = arc
            ek = _key(a, b)
            f.set_tag(a, b, False)
            self.edge_level[ek] = i + 1
            up.link(ek[0], ek[1], tagged=True)
            self.edge_touches += 1
        adj = self.adj[i]
        while True:
            y = f.vertex_with_nontree(u)
            if y is None:
                return False
            for w in list(adj[y]):
                self.edge_touches += 1
                ek = _key(y, w)
                self._remove_nontree(i, y, w)
                if f.connected(w, v):
                    self.is_tree[ek] = True
                    self.edge_level[ek] = i
                    for j in range(i):
                        self.forests[j].link(ek[0], ek[1], tagged=False)
                    f.link(ek[0], ek[1], tagged=True)
                    return True
                self.edge_level[ek] = i + 1
                self._add_nontree(i + 1, y, w)

    # -- queries ------------------------------------------------------------

    def connected(self, u, v) -> bool:
        if u not in self.vertices or v not in self.vertices:
            raise KeyError(f"unknown vertex ({u!r}, {v!r})")
        return self.forests[0].connected(u, v)

    def component_size(self, u) -> int:
        return self.forests[0].tree_size(u)

    @property
    def edge_count(self) -> int:
        return len(self.edge_level)

    # -- diagnostics --------------------------------------------------------

    def check_invariants(self) -> None:
        n = max(self.max_vertices, 1)
        for i, f in enumerate(self.forests):
            for tour in f.tours():
                for node in tour:
                    _check_node(node)
                verts = [x.vertex for x in tour if x.arc is None]
                arcs = [x.arc for x in tour if x.arc is not None]
                assert len(arcs) == 2 * (len(verts) - 1), f"level {i} tour is not a tree"
                assert len(verts) <= n >> i, f"level {i} tree of {len(verts)} vertices exceeds bound"
                members = set(verts)
                for a, b in arcs:
                    assert a in members and b in members
                    ek = _key(a, b)
                    assert self.is_tree.get(ek) and self.edge_level[ek] >= i
                    tagged = f.arcs[(a, b)].own_t or f.arcs[(b, a)].own_t
                    assert tagged == (self.edge_level[ek] == i), "tree edge tag disagrees with level"
        for ek, lvl in self.edge_level.items():
            a, b = ek
            if self.is_tree[ek]:
                for i in range(len(self.forests)):
                    assert ((a, b) in self.forests[i].arcs) == (i <= lvl)
            else:
                assert b in self.adj[lvl].get(a, {}) and a in self.adj[lvl].get(b, {})
                assert self.forests[lvl].connected(a, b), "non-tree edge spans two level trees"
        for i, adj in enumerate(self.adj):
            for a, row in adj.items():
                assert row
                assert self.forests[i].vnode[a].own_n
                for b in row:
                    assert self.edge_level[_key(a, b)] == i and not self.is_tree[_key(a, b)]


def _check_node(n: _Node) -> None:
    l, r = n.left, n.right
    for c in (l, r):
        if c is not None:
            assert c.parent is n
    size = 1 + _size(l) + _size(r)
    assert n.size == size
    vcnt = (1 if n.arc is None else 0) + (l.vcnt if l else 0) + (r.vcnt if r else 0)
    assert n.vcnt == vcnt
    assert n.tflag == (n.own_t or (l is not None and l.tflag) or (r is not None and r.tflag))
    assert n.nflag == (n.own_n or (l is not None and l.nflag) or (r is not None and r.nflag))
    assert _like(_size(l) + 1, _size(r) + 1), "weight balance violated"


class ProxyGraph:
    """Undirected graph with per-pair reference counts over a connectivity structure."""

    def __init__(self) -> None:
        self.conn = DynamicConnectivity()
        self.refs: dict[tuple, int] = {}

    def add_vertex(self, u) -> None:
        self.conn.add_vertex(u)

    def remove_vertex(self, u) -> None:
        self.conn.remove_vertex(u)

    def __contains__(self, u) -> bool:
        return u in self.conn.vertices

    def activate(self, u, v) -> None:
        if u not in self.conn.vertices or v not in self.conn.vertices:
            raise KeyError(f"unknown vertex in ({u!r}, {v!r})")
        k = _key(u, v)
        n = self.refs.get(k, 0)
        if n >= 2:
            raise ValueError(f"pair {k!r} is already active in both orientations")
        self.refs[k] = n + 1
        if n == 0:
            self.conn.insert_edge(u, v)

    def deactivate(self, u, v) -> None:
        k = _key(u, v)
        n = self.refs.get(k, 0)
        if n == 0:
            raise ValueError(f"pair {k!r} is not active")
        if n == 1:
            del self.refs[k]
            self.conn.delete_edge(u, v)
        else:
            self.refs[k] = n - 1

    def connected(self, u, v) -> bool:
        return self.conn.connected(u, v)

    @property
    def vertex_count(self) -> int:
        return len(self.conn.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.refs)

    def check_invariants(self) -> None:
        assert set(self.refs) == set(self.conn.edge_level)
        self.conn.check_invariants()
