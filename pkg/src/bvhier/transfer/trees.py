"""Isomorphism classes of trees whose internal vertices have valence >= 3.

A tree is stored as its skeleton (the subtree spanned by internal vertices)
together with the number of leaves hanging off each internal vertex.  The
automorphism group of the full tree is the colored-skeleton automorphism
group extended by all permutations of leaves at a common vertex, so
``aut = aut_skeleton * prod(leaves[v]!)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Optional

import networkx as nx


@dataclass(frozen=True)
class Tree:
    n_internal: int
    edges: tuple  # skeleton edges between internal vertices 0..n_internal-1
    leaves: tuple  # leaves[v] = number of leaves at internal vertex v
    aut: int
    aut_skeleton: int

    @property
    def n_leaves(self) -> int:
        return sum(self.leaves)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def valence(self, v: int) -> int:
        return self.leaves[v] + sum(v in e for e in self.edges)

    def adjacency(self) -> list:
        adj = [[] for _ in range(self.n_internal)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def to_graph(self) -> nx.Graph:
        """Full tree with leaf nodes ``("leaf", v, j)``."""
        g = nx.Graph()
        for v in range(self.n_internal):
            g.add_node(v, kind="internal")
        g.add_edges_from(self.edges)
        for v, cnt in enumerate(self.leaves):
            for j in range(cnt):
                g.add_node(("leaf", v, j), kind="leaf")
                g.add_edge(v, ("leaf", v, j))
        return g


# ---- canonical forms ---------------------------------------------------

def _rooted(adj, colors, v, parent):
    """AHU code and automorphism count of the subtree rooted at ``v``."""
    kids = [_rooted(adj, colors, c, v) for c in adj[v] if c != parent]
    kids.sort(key=lambda t: t[0])
    code = (colors[v], tuple(k[0] for k in kids))
    aut = prod(k[1] for k in kids)
    for mult in Counter(k[0] for k in kids).values():
        aut *= factorial(mult)
    return code, aut


def _centers(adj) -> list:
    n = len(adj)
    if n <= 2:
        return list(range(n))
    deg = [len(a) for a in adj]
    layer = [v for v in range(n) if deg[v] <= 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for u in adj[v]:
                deg[u] -= 1
                if deg[u] == 1:
                    nxt.append(u)
        layer = nxt
    return layer


def canonical_form(adj, colors) -> tuple:
    """``(canonical code, automorphism count)`` of a vertex-colored tree."""
    centers = _centers(adj)
    if len(centers) == 1:
        return _rooted(adj, colors, centers[0], None)
    a, b = centers
    ca, aa = _rooted(adj, colors, a, b)
    cb, ab = _rooted(adj, colors, b, a)
    if ca == cb:
        return ("edge", ca, cb), 2 * aa * ab
    lo, hi = sorted([ca, cb])
    return ("edge", lo, hi), aa * ab


# ---- enumeration -------------------------------------------------------

@lru_cache(maxsize=None)
def skeletons(m: int) -> tuple:
    """Nonisomorphic unlabeled trees on ``m`` vertices, as edge tuples."""
    if m == 1:
        return ((),)
    if m == 2:
        return (((0, 1),),)
    return tuple(tuple(sorted(g.edges())) for g in nx.nonisomorphic_trees(m))


def _leaf_distributions(n: int, degrees: list):
    need = [max(0, 3 - d) for d in degrees]
    spare = n - sum(need)
    if spare < 0:
        return
    m = len(degrees)

    def rec(i, left, acc):
        if i == m - 1:
            yield tuple(acc + [need[i] + left])
            return
        for x in range(left + 1):
            yield from rec(i + 1, left - x, acc + [need[i] + x])

    yield from rec(0, spare, [])


def enumerate_trees(n_leaves: int, max_internal: Optional[int] = None) -> list:
    """Every isomorphism class with ``n_leaves`` leaves and at most ``max_internal`` internal vertices."""
    if n_leaves < 1:
        raise ValueError("n_leaves must be positive")
    top = n_leaves - 2 if max_internal is None else min(max_internal, n_leaves - 2)
    out = []
    for m in range(1, top + 1):
        for edges in skeletons(m):
            adj = [[] for _ in range(m)]
            for a, b in edges:
                adj[a].append(b)
                adj[b].append(a)
            seen = set()
            for leaves in _leaf_distributions(n_leaves, [len(a) for a in adj]):
                code, aut_s = canonical_form(adj, leaves)
                if code in seen:
                    continue
                seen.add(code)
                aut = aut_s * prod(factorial(x) for x in leaves)
                out.append(Tree(m, edges, leaves, aut, aut_s))
    return out


def weighted_count(trees) -> Fraction:
    return sum((Fraction(1, t.aut) for t in trees), Fraction(0))
