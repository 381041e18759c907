"""Finite-dimensional (-1)-shifted symplectic dg spaces and their functionals.

A functional is a polynomial in coordinates ``x^i`` dual to the basis
vector ``e_i``; ``x^i`` has degree ``-d_i`` and parity ``d_i mod 2``.  The
polynomial ``F(x)`` stores the Taylor components as ``F_n(x, ..., x)/n!``,
so the arity-``n`` part of the polynomial is the symmetric form ``F_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import sympy

from ..diffring import DiffPoly, derivation, partial_derivative, right_partial_derivative, substitute
from .. import kernels

COPY_SHIFT = 20


def coord(index: int, degree: int, copy: int = 0) -> int:
    """Code of ``x^index`` (copy 0) or of its shadow in another copy."""
    return (((copy << COPY_SHIFT) | index) << 1) | (degree & 1)


def coord_index(code: int) -> int:
    return (code >> 1) & ((1 << COPY_SHIFT) - 1)


def coord_copy(code: int) -> int:
    return code >> (COPY_SHIFT + 1)


def to_matrix(rows, shape=None) -> sympy.Matrix:
    if shape is None:
        shape = (len(rows), len(rows[0]) if rows else 0)
    flat = [sympy.Rational(str(Fraction(x))) for row in rows for x in row]
    return sympy.Matrix(shape[0], shape[1], flat)


def fractions_of(m: sympy.Matrix) -> list:
    return [[Fraction(int(m[i, j].p), int(m[i, j].q)) for j in range(m.cols)] for i in range(m.rows)]


@dataclass(frozen=True)
class GradedSpace:
    labels: tuple
    degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if len(self.labels) != len(self.degrees):
            raise ValueError("labels and degrees differ in length")

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def x(self, i: int, copy: int = 0) -> int:
        return coord(i, self.degrees[i], copy)

    def variable(self, i: int, copy: int = 0) -> DiffPoly:
        return DiffPoly({(self.x(i, copy),): Fraction(1)})

    def monomial_degree(self, f: tuple) -> int:
        return -sum(self.degrees[coord_index(c)] for c in f)

    def poly_degrees(self, p: DiffPoly) -> set:
        return {self.monomial_degree(f) for f in p.terms}

    def format(self, p: DiffPoly) -> str:
        if not p.terms:
            return "0"
        parts = []
        for f in sorted(p.terms):
            c = p.terms[f]
            names = [f"x[{self.labels[coord_index(x)]}]" for x in f]
            parts.append(" * ".join([str(c)] + names))
        return " + ".join(parts)

    def direct_sum(self, other: "GradedSpace") -> "GradedSpace":
        return GradedSpace(self.labels + other.labels, self.degrees + other.degrees)


@dataclass(frozen=True)
class DGSpace:
    space: GradedSpace
    Q: tuple  # Q[k][i]: coefficient of e_k in Q e_i

    def __post_init__(self):
        q = tuple(tuple(Fraction(x) for x in row) for row in self.Q)
        n = self.space.dim
        if len(q) != n or any(len(r) != n for r in q):
            raise ValueError("Q has the wrong shape")
        object.__setattr__(self, "Q", q)

    def problems(self) -> list:
        out = []
        d = self.space.degrees
        n = self.space.dim
        for k in range(n):
            for i in range(n):
                if self.Q[k][i] and d[k] != d[i] + 1:
                    out.append(f"Q does not raise degree by one on ({self.space.labels[k]}, {self.space.labels[i]})")
        q = to_matrix(self.Q)
        if not (q * q).is_zero_matrix:
            out.append("Q^2 != 0")
        return out


@dataclass
class CheckReport:
    failures: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def expect(self, cond: bool, message: str):
        self.checked += 1
        if not cond:
            self.failures.append(message)

    def merge(self, other: "CheckReport", prefix: str = "") -> "CheckReport":
        self.checked += other.checked
        self.failures.extend(prefix + f for f in other.failures)
        return self


class ShiftedSymplectic:
    """``(E, Q, omega)`` with ``omega(e_i, e_j) = Omega[i][j]`` of degree -1.

    The BV bracket is ``{F, G} = sum (F <d_i) W^{ij} (d_j> G)`` with
    ``W = Omega^{-1}``, a right derivative on ``F`` and a left one on ``G``.
    The kernel ``K0^{ij} = (-1)^{d_i} W^{ij}`` is the graded symmetric
    element of ``Sym^2(E)`` inverting ``omega``.
    """

    def __init__(self, dg: DGSpace, omega):
        self.dg = dg
        self.space = dg.space
        self.omega = tuple(tuple(Fraction(x) for x in row) for row in omega)
        n = self.space.dim
        if len(self.omega) != n or any(len(r) != n for r in self.omega):
            raise ValueError("omega has the wrong shape")
        m = to_matrix(self.omega)
        self.invertible = m.det() != 0
        self.W = fractions_of(m.inv()) if self.invertible else None

    @property
    def Q(self):
        return self.dg.Q

    @property
    def K0(self) -> list:
        d = self.space.degrees
        return [[(-1) ** (d[i] & 1) * self.W[i][j] for j in range(len(d))] for i in range(len(d))]

    # ---- operations on functionals ---------------------------------
    def bracket(self, F: DiffPoly, G: DiffPoly) -> DiffPoly:
        return kernel_pairing(F, G, self.W, self.space)

    def apply_Q(self, F: DiffPoly) -> DiffPoly:
        return apply_linear_vector_field(F, self.Q, self.space)

    def cme_residual(self, I: DiffPoly) -> DiffPoly:
        return self.apply_Q(I) + self.bracket(I, I) * Fraction(1, 2)


def kernel_pairing(F: DiffPoly, G: DiffPoly, A, space: GradedSpace, f_copy: int = 0, g_copy: int = 0) -> DiffPoly:
    """``sum_ij (F <d_i) A[i][j] (d_j> G)``; ``F`` differentiated in ``f_copy``, ``G`` in ``g_copy``."""
    n = space.dim
    out = DiffPoly()
    right = {}
    for i in range(n):
        r = right_partial_derivative(F, space.x(i, f_copy))
        if r.terms:
            right[i] = r
    if not right:
        return out
    left = {}
    for j in range(n):
        l = partial_derivative(G, space.x(j, g_copy))
        if l.terms:
            left[j] = l
    for i, r in right.items():
        row = A[i]
        for j, l in left.items():
            c = row[j]
            if c:
                out = out + (r * l) * c
    return out


def apply_linear_vector_field(F: DiffPoly, Q, space: GradedSpace) -> DiffPoly:
    """Odd derivation ``x^k -> sum_i Q[k][i] x^i`` dual to ``Q``."""
    n = space.dim
    images = {}
    for k in range(n):
        img = DiffPoly()
        for i in range(n):
            if Q[k][i]:
                img = img + space.variable(i) * Q[k][i]
        images[space.x(k)] = img
    return derivation(F, lambda code: images.get(code), odd=True)


def verify_shifted_symplectic(s: ShiftedSymplectic) -> CheckReport:
    rep = CheckReport()
    sp = s.space
    d = sp.degrees
    n = sp.dim
    lab = sp.labels
    for msg in s.dg.problems():
        rep.expect(False, msg)
    rep.checked += 1
    for i in range(n):
        for j in range(n):
            w = s.omega[i][j]
            if w:
                rep.expect(d[i] + d[j] == 1, f"omega({lab[i]}, {lab[j]}) pairs degrees {d[i]} + {d[j]} != 1")
            sign = -1 if (d[i] * d[j]) & 1 else 1
            rep.expect(w == -sign * s.omega[j][i], f"omega not graded antisymmetric on ({lab[i]}, {lab[j]})")
    rep.expect(s.invertible, "omega is degenerate")
    if not s.invertible:
        return rep
    Q = s.Q
    # omega(Q a, b) = -(-1)^{|a|} omega(a, Q b)
    for a in range(n):
        for b in range(n):
            lhs = sum(Q[k][a] * s.omega[k][b] for k in range(n))
            rhs = sum(Q[k][b] * s.omega[a][k] for k in range(n))
            sign = -1 if d[a] & 1 else 1
            rep.expect(lhs == -sign * rhs, f"Q not skew self-adjoint on ({lab[a]}, {lab[b]})")
    K = s.K0
    for i in range(n):
        for j in range(n):
            if K[i][j]:
                rep.expect(d[i] + d[j] == 1, f"K0 component ({lab[i]}, {lab[j]}) has the wrong degree")
            sign = -1 if (d[i] * d[j]) & 1 else 1
            rep.expect(K[i][j] == sign * K[j][i], f"K0 not graded symmetric on ({lab[i]}, {lab[j]})")
    # omega(K0(-, e_j), e_k): sum_j K0^{ij} (-1)^{d_i} omega_jk = delta_ik
    for i in range(n):
        for k in range(n):
            v = sum(K[i][j] * s.omega[j][k] for j in range(n)) * (-1) ** (d[i] & 1)
            rep.expect(v == (1 if i == k else 0), f"K0 does not invert omega at ({lab[i]}, {lab[k]})")
    # (Q x 1 + 1 x Q) K0 = 0 with the Koszul sign on the second slot
    for p in range(n):
        for q in range(n):
            v = Fraction(0)
            for i in range(n):
                for j in range(n):
                    kij = K[i][j]
                    if not kij:
                        continue
                    if j == q and Q[p][i]:
                        v += Q[p][i] * kij
                    if i == p and Q[q][j]:
                        v += (-1) ** (d[i] & 1) * Q[q][j] * kij
            rep.expect(v == 0, f"(Q x 1 + 1 x Q) K0 != 0 at ({lab[p]}, {lab[q]})")
    return rep


# ---- functionals -------------------------------------------------------

def arity_part(F: DiffPoly, n: int) -> DiffPoly:
    return F.filter(lambda f: len(f) == n)


def arity_at_most(F: DiffPoly, n: int) -> DiffPoly:
    return F.filter(lambda f: len(f) <= n)


def arities(F: DiffPoly) -> list:
    return sorted({len(f) for f in F.terms})


def rename_copy(F: DiffPoly, src: int, dst: int) -> DiffPoly:
    """Move every coordinate of copy ``src`` into copy ``dst``."""
    out: dict = {}
    for f, c in F.terms.items():
        moved = [((dst << COPY_SHIFT) | coord_index(x)) << 1 | (x & 1) if coord_copy(x) == src else x for x in f]
        sign, g = kernels.canonicalize(moved)
        if sign:
            v = out.get(g, 0) + sign * c
            if v:
                out[g] = v
            else:
                out.pop(g, None)
    return DiffPoly(out)


def pullback(F: DiffPoly, src: GradedSpace, dst: GradedSpace, imat) -> DiffPoly:
    """Restrict along ``i: dst -> src``: ``x^k = sum_a i[k][a] y^a``."""
    images = {}
    for k in range(src.dim):
        img = DiffPoly()
        for a in range(dst.dim):
            if imat[k][a]:
                if (src.degrees[k] - dst.degrees[a]) != 0:
                    raise ValueError("inclusion must preserve degree")
                img = img + dst.variable(a) * imat[k][a]
        images[src.x(k)] = img
    return substitute(F, lambda code: images[code])


def polarize(F: DiffPoly, space: GradedSpace, slots: Sequence[int]) -> Fraction:
    """``F_n(e_{s_1}, ..., e_{s_n})`` for the arity-``n`` part, by iterated derivatives.

    Derivatives are taken from the left in order ``s_1, ..., s_n``.
    """
    p = arity_part(F, len(slots))
    for s in slots:
        p = partial_derivative(p, space.x(s))
        if not p.terms:
            return Fraction(0)
    return p.constant_term()
