"""Tree-level homotopy transfer of an interaction along contraction data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..diffring import DiffPoly
from .contraction import Contraction, induced_symplectic, propagator_kernel
from .spaces import (
    CheckReport,
    ShiftedSymplectic,
    arity_at_most,
    arity_part,
    arities,
    kernel_pairing,
    pullback,
    rename_copy,
)
from .trees import Tree, enumerate_trees, skeletons

LEAF, CHILD, OWN = 0, 1, 2


def evaluate_tree(tree: Tree, I: DiffPoly, A, space, parts: Optional[dict] = None) -> DiffPoly:
    """Contract copies of ``I`` along the skeleton of ``tree`` with kernel ``A``.

    Vertex ``v`` carries the arity ``valence(v)`` part of ``I``.  Subtrees are
    folded into their parents leaf-up; a finished subtree keeps the root's
    unused slots in the CHILD copy so the next edge can only reach them.
    Edge orientation: the child is the left argument of the kernel.
    The result is not divided by any symmetry factor.
    """
    if parts is None:
        parts = {}
    adj = tree.adjacency()

    def part(n):
        if n not in parts:
            parts[n] = arity_part(I, n)
        return parts[n]

    def fold(v, parent):
        T = rename_copy(part(tree.valence(v)), LEAF, OWN)
        if not T.terms:
            return T
        for c in adj[v]:
            if c == parent:
                continue
            C = fold(c, v)
            if not C.terms:
                return DiffPoly()
            T = kernel_pairing(C, T, A, space, f_copy=CHILD, g_copy=OWN)
            T = rename_copy(T, CHILD, LEAF)
            if not T.terms:
                return T
        return rename_copy(T, OWN, CHILD)

    return rename_copy(fold(0, None), CHILD, LEAF)


def tree_sum(I: DiffPoly, A, space, arity_cap: int) -> DiffPoly:
    """``sum_Gamma w_Gamma / |Aut Gamma|`` over trees with at most ``arity_cap`` leaves.

    In polynomial form the per-vertex ``1/leaves!`` factors come for free,
    so each class contributes its contraction divided by the colored
    skeleton automorphism count only.
    """
    out = DiffPoly()
    parts: dict = {}
    present = set(arities(I))
    for n in range(1, arity_cap + 1):
        for tree in enumerate_trees(n):
            if any(tree.valence(v) not in present for v in range(tree.n_internal)):
                continue
            w = evaluate_tree(tree, I, A, space, parts)
            if w.terms:
                out = out + w * Fraction(1, tree.aut_skeleton)
    return out


def skeleton_sum(I: DiffPoly, A, space, arity_cap: int) -> DiffPoly:
    """Cross-check: full ``I`` at every vertex of unlabeled skeletons, weight ``1/|Aut S|``."""
    from .trees import canonical_form

    out = DiffPoly()
    low = min(arities(I), default=3)
    for m in range(1, max(arity_cap - 1, 1)):
        for edges in skeletons(m):
            adj = [[] for _ in range(m)]
            for a, b in edges:
                adj[a].append(b)
                adj[b].append(a)
            _, aut = canonical_form(adj, [0] * m)

            def fold(v, parent):
                T = rename_copy(I, LEAF, OWN)
                for c in adj[v]:
                    if c != parent:
                        T = kernel_pairing(fold(c, v), T, A, space, f_copy=CHILD, g_copy=OWN)
                        T = rename_copy(T, CHILD, LEAF)
                return rename_copy(T, OWN, CHILD)

            if m * (low - 2) + 2 > arity_cap:
                continue
            w = rename_copy(fold(0, None), CHILD, LEAF)
            out = out + arity_at_most(w, arity_cap) * Fraction(1, aut)
    return out


def flow_sum(I: DiffPoly, A, space, arity_cap: int) -> DiffPoly:
    """Cross-check: ``W_{k+1} = 1/(k+1) * 1/2 sum_{a+b=k} <W_a, W_b>_A``."""
    W = [arity_at_most(I, arity_cap)]
    k = 0
    while True:
        nxt = DiffPoly()
        for a in range(k + 1):
            nxt = nxt + kernel_pairing(W[a], W[k - a], A, space)
        nxt = arity_at_most(nxt, arity_cap) * Fraction(1, 2 * (k + 1))
        if not nxt.terms:
            break
        W.append(nxt)
        k += 1
    out = DiffPoly()
    for w in W:
        out = out + w
    return out


@dataclass
class TransferResult:
    I_H: DiffPoly
    W: DiffPoly  # tree sum before restriction to H
    target: ShiftedSymplectic
    arity_cap: int
    lost_arities: list = field(default_factory=list)

    def cme_residual(self) -> DiffPoly:
        return arity_at_most(self.target.cme_residual(self.I_H), self.arity_cap)


def transfer_interaction(
    I: DiffPoly, c: Contraction, s: ShiftedSymplectic, arity_cap: int, method: str = "trees"
) -> TransferResult:
    if arity_cap < 3:
        raise ValueError("arity cap must be at least 3")
    low = [n for n in arities(I) if n < 3]
    if low:
        raise ValueError(f"interaction has components of arity {low}; arity >= 3 is required")
    A = propagator_kernel(c, s)
    space = c.E.space
    if method == "trees":
        W = tree_sum(I, A, space, arity_cap)
    elif method == "skeletons":
        W = skeleton_sum(I, A, space, arity_cap)
    elif method == "flow":
        W = flow_sum(I, A, space, arity_cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    I_H = pullback(W, space, c.H, c.i)
    lost = sorted(n for n in arities(I) if n > arity_cap)
    return TransferResult(I_H, W, induced_symplectic(c, s), arity_cap, lost)
