"""Fixture generators: cotangent theories of dg Lie algebras and products."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..diffring import DiffPoly, rational_str
from .contraction import (
    Contraction,
    collapse_pairs,
    hodge_contraction,
    relative_contraction,
    tensor_pairing,
)
from .spaces import DGSpace, GradedSpace, ShiftedSymplectic, coord_index


class FixtureError(ValueError):
    pass


@dataclass
class DGLieAlgebra:
    """Graded Lie algebra ``[t_a, t_b] = sum_c C[(a, b)][c] t_c`` with ``d t_a = sum_b D[b][a] t_b``.

    ``brackets`` need only list one ordering of each pair; the other is
    filled in by graded antisymmetry.
    """

    labels: tuple
    degrees: tuple
    brackets: dict
    D: Optional[list] = None

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.degrees = tuple(int(x) for x in self.degrees)
        n = len(self.labels)
        if len(self.degrees) != n:
            raise FixtureError("labels and degrees differ in length")
        full: dict = {}
        for (a, b), out in self.brackets.items():
            out = {c: Fraction(v) for c, v in out.items() if Fraction(v)}
            for c in out:
                if self.degrees[c] != self.degrees[a] + self.degrees[b]:
                    raise FixtureError(
                        f"[{self.labels[a]}, {self.labels[b]}] cannot land in {self.labels[c]}: degrees disagree"
                    )
            sign = -1 if (self.degrees[a] * self.degrees[b]) & 1 else 1
            mirrored = {c: -sign * v for c, v in out.items()}
            if (a, b) in full and full[(a, b)] != out:
                raise FixtureError(f"conflicting brackets for ({self.labels[a]}, {self.labels[b]})")
            full[(a, b)] = out
            if a == b:
                if out != mirrored:
                    raise FixtureError(f"[{self.labels[a]}, {self.labels[a]}] violates graded antisymmetry")
            else:
                if (b, a) in self.brackets and {
                    c: Fraction(v) for c, v in self.brackets[(b, a)].items() if Fraction(v)
                } != mirrored:
                    raise FixtureError(f"brackets of ({self.labels[a]}, {self.labels[b]}) are not antisymmetric")
                full[(b, a)] = mirrored
        self.brackets = {k: v for k, v in full.items() if v}
        if self.D is None:
            self.D = [[Fraction(0)] * n for _ in range(n)]
        self.D = [[Fraction(x) for x in row] for row in self.D]
        for b in range(n):
            for a in range(n):
                if self.D[b][a] and self.degrees[b] != self.degrees[a] + 1:
                    raise FixtureError("differential must raise degree by one")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def bracket(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for a, va in x.items():
            for b, vb in y.items():
                for c, v in self.brackets.get((a, b), {}).items():
                    out[c] = out.get(c, 0) + va * vb * v
        return {c: v for c, v in out.items() if v}

    def d(self, x: dict) -> dict:
        out: dict = {}
        for a, va in x.items():
            for b in range(self.dim):
                if self.D[b][a]:
                    out[b] = out.get(b, 0) + va * self.D[b][a]
        return {c: v for c, v in out.items() if v}

    def jacobi_violations(self) -> list:
        """Basis triples where the graded Jacobi identity fails."""
        deg = self.degrees
        bad = []
        n = self.dim
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    A, B, C = {a: 1}, {b: 1}, {c: 1}
                    lhs = self.bracket(A, self.bracket(B, C))
                    r1 = self.bracket(self.bracket(A, B), C)
                    r2 = self.bracket(B, self.bracket(A, C))
                    sign = -1 if (deg[a] * deg[b]) & 1 else 1
                    tot = dict(lhs)
                    for k, v in r1.items():
                        tot[k] = tot.get(k, 0) - v
                    for k, v in r2.items():
                        tot[k] = tot.get(k, 0) - sign * v
                    if any(tot.values()):
                        bad.append((a, b, c))
        return bad

    def derivation_violations(self) -> list:
        deg = self.degrees
        bad = []
        for a in range(self.dim):
            for b in range(self.dim):
                A, B = {a: 1}, {b: 1}
                lhs = self.d(self.bracket(A, B))
                r = self.bracket(self.d(A), B)
                s2 = self.bracket(A, self.d(B))
                sign = -1 if deg[a] & 1 else 1
                tot = dict(lhs)
                for k, v in r.items():
                    tot[k] = tot.get(k, 0) - v
                for k, v in s2.items():
                    tot[k] = tot.get(k, 0) - sign * v
                if any(tot.values()):
                    bad.append((a, b))
        dd = [[sum(self.D[c][b] * self.D[b][a] for b in range(self.dim)) for a in range(self.dim)] for c in range(self.dim)]
        if any(any(row) for row in dd):
            bad.append("d^2")
        return bad


def cotangent_fixture(g: DGLieAlgebra):
    """``E = g[1] + g*[-2]`` with ``omega(e_a, f^a) = 1`` and the Chevalley-Eilenberg cubic.

    Coordinates ``u^a`` on ``e_a`` (degree ``1 - |t_a|``) and ``v_a`` on
    ``f^a``.  ``I = 1/2 sum (-1)^{|t_b|} C^c_{ab} v_c u^a u^b``; ``Q`` is
    ``d`` on ``g[1]`` and minus its signed transpose on ``g*[-2]``.
    """
    n = g.dim
    deg_e = [d - 1 for d in g.degrees]
    deg_f = [2 - d for d in g.degrees]
    space = GradedSpace(
        tuple(f"u_{l}" for l in g.labels) + tuple(f"v_{l}" for l in g.labels),
        tuple(deg_e + deg_f),
    )
    N = 2 * n
    Q = [[Fraction(0)] * N for _ in range(N)]
    for a in range(n):
        for b in range(n):
            if g.D[b][a]:
                Q[b][a] = g.D[b][a]
                Q[n + a][n + b] = -(-1) ** (deg_e[a] & 1) * g.D[b][a]
    omega = [[Fraction(0)] * N for _ in range(N)]
    for a in range(n):
        omega[a][n + a] = Fraction(1)
        omega[n + a][a] = Fraction(-1)
    s = ShiftedSymplectic(DGSpace(space, Q), omega)
    I = DiffPoly()
    for (a, b), out in g.brackets.items():
        sign = -1 if g.degrees[b] & 1 else 1
        for c, v in out.items():
            term = space.variable(n + c) * space.variable(a) * space.variable(b)
            I = I + term * (Fraction(sign, 2) * v)
    return s, I


# ---- named algebras -----------------------------------------------------

def abelian(n: int = 2) -> DGLieAlgebra:
    return DGLieAlgebra(tuple(f"t{i}" for i in range(n)), (0,) * n, {})


def heisenberg() -> DGLieAlgebra:
    return DGLieAlgebra(("x", "y", "z"), (0, 0, 0), {(0, 1): {2: 1}})


def broken_heisenberg() -> DGLieAlgebra:
    """Heisenberg plus ``[y, z] = y``; ``J(x, y, z) = z`` so Jacobi fails."""
    return DGLieAlgebra(("x", "y", "z"), (0, 0, 0), {(0, 1): {2: 1}, (1, 2): {1: 1}})


def sl2() -> DGLieAlgebra:
    return DGLieAlgebra(("h", "e", "f"), (0, 0, 0), {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}})


def massey() -> DGLieAlgebra:
    """``[a1, b] = w = dc``, ``[a2, c] = e``.

    Cohomology is spanned by ``a1, a2, b, e``; the transferred ternary
    bracket ``l3(a1, a2, b)`` is a nonzero multiple of ``e``.
    """
    D = [[0] * 6 for _ in range(6)]
    D[4][3] = 1
    return DGLieAlgebra(
        ("a1", "a2", "b", "c", "w", "e"), (0, 0, 0, -1, 0, -1), {(0, 2): {4: 1}, (1, 3): {5: 1}}, D
    )


def ternary_with_differential() -> DGLieAlgebra:
    """Collapsing ``c -> w`` leaves ``k -> e`` behind, so on the smaller complex
    the ternary bracket ``l3(a1, a2, b) ~ k`` and ``d l3`` cancels ``[[a1, a2], b]``."""
    labels = ("a1", "a2", "b", "y", "c", "w", "k", "e")
    ix = {l: i for i, l in enumerate(labels)}
    D = [[0] * 8 for _ in range(8)]
    D[ix["w"]][ix["c"]] = 1
    D[ix["e"]][ix["k"]] = 1
    br = {
        (ix["a1"], ix["b"]): {ix["w"]: 1},
        (ix["a2"], ix["c"]): {ix["k"]: 1},
        (ix["a2"], ix["w"]): {ix["e"]: 1},
        (ix["a1"], ix["a2"]): {ix["y"]: 1},
        (ix["b"], ix["y"]): {ix["e"]: 1},
    }
    return DGLieAlgebra(labels, (0, 0, 0, 0, -1, 0, -1, 0), br, D)


def cotangent_collapse(g: DGLieAlgebra, s: ShiftedSymplectic, pairs) -> Contraction:
    """Collapse ``(x, y)`` pairs of ``g`` (``d x = y``) in both halves of the cotangent space."""
    n = g.dim
    index = {l: i for i, l in enumerate(g.labels)}
    out = []
    for x, y in pairs:
        x, y = index.get(x, x), index.get(y, y)
        out += [(x, y), (n + y, n + x)]
    return collapse_pairs(s.dg, out)


def tensor_cdga(h: DGLieAlgebra, degrees, product: dict, d: dict, names=None) -> DGLieAlgebra:
    """``h (x) A`` for a degree-zero Lie algebra ``h`` and a cdga ``A``.

    ``product[(p, q)] = (r, coeff)`` and ``d[p] = (r, coeff)``.
    """
    if any(h.degrees):
        raise FixtureError("tensor_cdga expects a degree-zero Lie algebra")
    na = len(degrees)
    names = names or [str(p) for p in range(na)]
    idx = lambda t, p: t * na + p  # noqa: E731
    labels = tuple(f"{t}{names[p]}" for t in h.labels for p in range(na))
    degs = tuple(degrees[p] for _ in h.labels for p in range(na))
    br: dict = {}
    for (s, t), out in h.brackets.items():
        for (p, q), (r, m) in product.items():
            key = (idx(s, p), idx(t, q))
            tgt = br.setdefault(key, {})
            for c, v in out.items():
                tgt[idx(c, r)] = tgt.get(idx(c, r), 0) + v * m
    n = len(labels)
    D = [[0] * n for _ in range(n)]
    for t in range(h.dim):
        for p, (r, m) in d.items():
            D[idx(t, r)][idx(t, p)] = m
    # the table above already covers both orderings; rebuild without mirroring
    g = DGLieAlgebra.__new__(DGLieAlgebra)
    g.labels, g.degrees = labels, degs
    g.brackets = {k: {c: Fraction(v) for c, v in out.items() if v} for k, out in br.items()}
    g.brackets = {k: v for k, v in g.brackets.items() if v}
    g.D = [[Fraction(x) for x in row] for row in D]
    return g


def acyclic_tensor(h: DGLieAlgebra) -> DGLieAlgebra:
    """``h (x) {1, th}`` with ``d th = 1``: an acyclic dg Lie algebra."""
    return tensor_cdga(h, [0, -1], {(0, 0): (0, 1), (0, 1): (1, 1), (1, 0): (1, 1)}, {1: (0, 1)}, ["", "'"])


def acyclic_extension(g: DGLieAlgebra):
    """Cotangent theory of ``g`` plus a 2-dim acyclic summand the interaction ignores."""
    s0, I = cotangent_fixture(g)
    sp0 = s0.space
    n0 = sp0.dim
    space = sp0.direct_sum(GradedSpace(("p", "q"), (0, 1)))
    N = n0 + 2
    Q = [[Fraction(0)] * N for _ in range(N)]
    omega = [[Fraction(0)] * N for _ in range(N)]
    for r in range(n0):
        for c in range(n0):
            Q[r][c] = s0.Q[r][c]
            omega[r][c] = s0.omega[r][c]
    Q[n0 + 1][n0] = Fraction(1)
    omega[n0][n0 + 1] = Fraction(1)
    omega[n0 + 1][n0] = Fraction(-1)
    return ShiftedSymplectic(DGSpace(space, Q), omega), I


@dataclass
class CDGA:
    """Finite cdga with a top-degree integral.

    ``product[(p, q)] = (r, coeff)``, ``d[p] = (r, coeff)``, and the integral
    is the coefficient of basis vector ``top``.
    """

    names: tuple
    degrees: tuple
    product: dict
    d: dict
    top: int

    def pairing(self) -> list:
        n = len(self.names)
        om = [[Fraction(0)] * n for _ in range(n)]
        for (p, q), (r, m) in self.product.items():
            if r == self.top:
                om[p][q] = Fraction(m)
        return om

    def dg(self) -> DGSpace:
        n = len(self.names)
        Q = [[Fraction(0)] * n for _ in range(n)]
        for p, (r, m) in self.d.items():
            Q[r][p] = Fraction(m)
        return DGSpace(GradedSpace(self.names, self.degrees), Q)


def torus_with_pair() -> CDGA:
    """``H*(T^3) = Lambda(t1, t2, t3)`` plus an acyclic pair ``s -> ds`` with ``s ds = vol``."""
    subsets = [()] + [c for k in (1, 2, 3) for c in combinations((1, 2, 3), k)]
    names = tuple(["1" if not c else "t" + "".join(map(str, c)) for c in subsets] + ["s", "ds"])
    degrees = tuple([len(c) for c in subsets] + [1, 2])
    idx = {c: i for i, c in enumerate(subsets)}
    prod_: dict = {}
    for a in subsets:
        for b in subsets:
            if set(a) & set(b):
                continue
            seq = list(a) + list(b)
            inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
            prod_[(idx[a], idx[b])] = (idx[tuple(sorted(seq))], -1 if inversions & 1 else 1)
    s, ds, vol = len(subsets), len(subsets) + 1, idx[(1, 2, 3)]
    for x in (s, ds):
        prod_[(0, x)] = (x, 1)
        prod_[(x, 0)] = (x, 1)
    prod_[(s, ds)] = (vol, 1)
    prod_[(ds, s)] = (vol, 1)
    return CDGA(names, degrees, prod_, {s: (ds, 1)}, vol)


def chern_simons_product(h: DGLieAlgebra, kappa, A: Optional[CDGA] = None):
    """Cubic Chern-Simons theory on ``A (x) h[1]`` and its relative contraction.

    ``E_X = A`` carries the integration pairing (nonzero on degrees summing
    to 3) and ``E_Y = h[1]`` the invariant form ``kappa``.  The contraction
    of ``A`` removes the pairs in ``A.d``; the relative contraction is
    ``(i (x) 1, pi (x) 1, P (x) 1)``.  Returns ``(s, I, cx, Y, rc)``.
    """
    if any(h.degrees):
        raise FixtureError("Chern-Simons product expects a degree-zero Lie algebra")
    A = A or torus_with_pair()
    X = A.dg()
    cx = collapse_pairs(X, [(p, r) for p, (r, _) in A.d.items()])
    ny = h.dim
    Ysp = GradedSpace(tuple(h.labels), (-1,) * ny)
    Y = DGSpace(Ysp, [[0] * ny for _ in range(ny)])
    omega = tensor_pairing(X.space, A.pairing(), Ysp, kappa)
    rc = relative_contraction(cx, Y)
    s = ShiftedSymplectic(rc.E, omega)
    space = rc.E.space
    # f_{abc} = kappa(t_a, [t_b, t_c])
    f: dict = {}
    for (b, c), out in h.brackets.items():
        for e, v in out.items():
            for a in range(ny):
                k = Fraction(kappa[a][e])
                if k:
                    f[(a, b, c)] = f.get((a, b, c), 0) + k * v
    n = len(A.names)
    I = DiffPoly()
    for p in range(n):
        for q in range(n):
            pq = A.product.get((p, q))
            if pq is None:
                continue
            for r in range(n):
                full = A.product.get((pq[0], r))
                if full is None or full[0] != A.top:
                    continue
                m = Fraction(pq[1] * full[1], 6)
                for (a, b, c), v in f.items():
                    term = space.variable(p * ny + a) * space.variable(q * ny + b) * space.variable(r * ny + c)
                    I = I + term * (m * v)
    return s, I, cx, Y, rc


# ---- JSON ---------------------------------------------------------------

def dgla_from_json(obj: dict) -> DGLieAlgebra:
    try:
        labels = [b[0] for b in obj["basis"]]
        degrees = [int(b[1]) for b in obj["basis"]]
        index = {l: i for i, l in enumerate(labels)}
        brackets = {}
        for e in obj.get("brackets", []):
            brackets[(index[e["a"]], index[e["b"]])] = {index[k]: Fraction(v) for k, v in e["out"].items()}
        n = len(labels)
        D = [[Fraction(0)] * n for _ in range(n)]
        for e in obj.get("differential", []):
            for k, v in e["to"].items():
                D[index[k]][index[e["from"]]] = Fraction(v)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, FixtureError):
            raise
        raise FixtureError(f"malformed dg Lie algebra: {exc}") from exc
    return DGLieAlgebra(labels, degrees, brackets, D)


def dgla_to_json(g: DGLieAlgebra) -> dict:
    out = {"basis": [[l, d] for l, d in zip(g.labels, g.degrees)], "brackets": [], "differential": []}
    for (a, b) in sorted(g.brackets):
        if a <= b:
            out["brackets"].append(
                {
                    "a": g.labels[a],
                    "b": g.labels[b],
                    "out": {g.labels[c]: rational_str(v) for c, v in sorted(g.brackets[(a, b)].items())},
                }
            )
    for a in range(g.dim):
        to = {g.labels[b]: rational_str(g.D[b][a]) for b in range(g.dim) if g.D[b][a]}
        if to:
            out["differential"].append({"from": g.labels[a], "to": to})
    return out


def _matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def poly_from_json(terms, space: GradedSpace) -> DiffPoly:
    index = {l: i for i, l in enumerate(space.labels)}
    items = []
    for t in terms:
        items.append((Fraction(t["coeff"]), [space.x(index[v]) for v in t["vars"]]))
    return DiffPoly.from_terms(items)


def poly_to_json(p: DiffPoly, space: GradedSpace) -> list:
    return [
        {"coeff": rational_str(p.terms[f]), "vars": [space.labels[coord_index(c)] for c in f]}
        for f in sorted(p.terms)
    ]


@dataclass
class TransferFixture:
    name: str
    s: ShiftedSymplectic
    I: DiffPoly
    contraction: Contraction
    expect_cme: Optional[bool] = None


def fixture_from_json(obj: dict) -> TransferFixture:
    """Fixture kinds: ``dgla`` (cotangent theory, Hodge contraction),
    ``explicit`` (basis, Q, omega, interaction, optional contraction),
    ``chern_simons`` (product via a relative contraction)."""
    kind = obj.get("kind", "dgla")
    name = obj.get("name", kind)
    expect = obj.get("expect_cme")
    try:
        if kind == "dgla":
            g = dgla_from_json(obj["algebra"])
            s, I = cotangent_fixture(g)
            if obj.get("acyclic_extension"):
                s, I = acyclic_extension(g)
            collapse = obj.get("collapse")
            c = cotangent_collapse(g, s, collapse) if collapse else hodge_contraction(s.dg)
        elif kind == "explicit":
            space = GradedSpace(tuple(b[0] for b in obj["basis"]), tuple(int(b[1]) for b in obj["basis"]))
            s = ShiftedSymplectic(DGSpace(space, _matrix(obj["Q"])), _matrix(obj["omega"]))
            I = poly_from_json(obj.get("interaction", []), space)
            cd = obj.get("contraction", "hodge")
            if cd == "hodge":
                c = hodge_contraction(s.dg)
            else:
                H = GradedSpace(tuple(b[0] for b in cd["basis"]), tuple(int(b[1]) for b in cd["basis"]))
                c = Contraction(s.dg, H, _matrix(cd["i"]), _matrix(cd["pi"]), _matrix(cd["P"]), cd.get("QH"))
        elif kind == "chern_simons":
            h = dgla_from_json(obj["algebra"])
            s, I, _, _, c = chern_simons_product(h, _matrix(obj["kappa"]))
        elif kind == "builtin":
            return builtin_fixtures()[obj["name"]]
        else:
            raise FixtureError(f"unknown fixture kind {kind!r}")
    except (KeyError, TypeError, IndexError) as exc:
        raise FixtureError(f"malformed fixture: {exc}") from exc
    return TransferFixture(name, s, I, c, expect)


def load_fixture(path) -> TransferFixture:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FixtureError(f"invalid JSON: {exc}") from exc
    return fixture_from_json(obj)


KILLING_SL2 = [[2, 0, 0], [0, 0, 1], [0, 1, 0]]


def builtin_fixtures() -> dict:
    out = {}

    def add(name, s, I, c, expect=True):
        out[name] = TransferFixture(name, s, I, c, expect)

    for name, g in [
        ("heisenberg", heisenberg()),
        ("sl2", sl2()),
        ("massey", massey()),
        ("acyclic_sl2", acyclic_tensor(sl2())),
        ("abelian", abelian(2)),
    ]:
        s, I = cotangent_fixture(g)
        add(name, s, I, hodge_contraction(s.dg))
    s, I = acyclic_extension(heisenberg())
    add("heisenberg_acyclic_extension", s, I, hodge_contraction(s.dg))
    g = ternary_with_differential()
    s, I = cotangent_fixture(g)
    add("ternary_partial", s, I, cotangent_collapse(g, s, [("c", "w")]))
    s, I, _, _, rc = chern_simons_product(sl2(), KILLING_SL2)
    add("chern_simons_torus", s, I, rc)
    g = broken_heisenberg()
    s, I = cotangent_fixture(g)
    add("broken_heisenberg", s, I, hodge_contraction(s.dg), expect=False)
    return out
