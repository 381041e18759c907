"""Local functionals: densities modulo total z-derivatives.

Equality in the quotient is decided by variational (Euler) derivatives over
every bosonic and fermionic generator base.  Stationary constants behave as
scalars; monomials built only from them are "constants" and are excluded
from densities, which makes "all Euler entries vanish" equivalent to "is a
total derivative".  :func:`find_antiderivative` is an independent check of
that equivalence by exact linear algebra.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from itertools import combinations_with_replacement, combinations
from typing import Iterable, Optional

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .diffring import (
    DER_STEP,
    DiffPoly,
    Generator,
    Kind,
    base_code,
    der_of,
    encode,
    kind_of,
    partial_derivative,
    total_z_derivative,
)


class ConstantTermError(ValueError):
    """A density contained a term with no field factor."""


class InconsistencyError(RuntimeError):
    """Euler entries vanish but no antiderivative exists: an internal bug."""


def _is_field(code: int) -> bool:
    return kind_of(code) != Kind.C


def _base_of(base) -> int:
    if isinstance(base, Generator):
        return encode(base.kind, base.alpha, base.level, 0)
    if isinstance(base, int):
        return base_code(base)
    kind, alpha, level = base
    return encode(kind, alpha, level, 0)


def constant_part(p: DiffPoly) -> DiffPoly:
    return p.filter(lambda f: not any(_is_field(c) for c in f))


def check_density(p: DiffPoly) -> DiffPoly:
    if constant_part(p).terms:
        raise ConstantTermError(f"density has a constant term: {constant_part(p)}")
    return p


def field_bases(p: DiffPoly) -> set:
    return {base_code(c) for f in p.terms for c in f if _is_field(c)}


def euler_derivative(p: DiffPoly, base) -> DiffPoly:
    """``sum_m (-d/dz)^m  d p / d(d^m base)`` with left derivatives."""
    bc = _base_of(base)
    top = max((der_of(c) for f in p.terms for c in f if base_code(c) == bc), default=-1)
    # Horner form: P_0 - d(P_1 - d(P_2 - ...))
    out = DiffPoly()
    for m in range(top, -1, -1):
        if out.terms:
            out = -total_z_derivative(out)
        out = out + partial_derivative(p, bc + m * DER_STEP)
    return out


def euler_tuple(p: DiffPoly) -> dict:
    """Non-zero Euler entries keyed by base code."""
    out = {}
    for bc in sorted(field_bases(p)):
        e = euler_derivative(p, bc)
        if e.terms:
            out[bc] = e
    return out


class LocalFunctional:
    """``oint dz rep`` with its cached Euler tuple."""

    __slots__ = ("rep", "_euler")

    def __init__(self, rep: DiffPoly):
        self.rep = check_density(rep)
        self._euler = None

    @property
    def euler(self) -> dict:
        if self._euler is None:
            self._euler = euler_tuple(self.rep)
        return self._euler

    def is_zero(self) -> bool:
        return not self.euler

    def parity(self):
        return self.rep.parity()

    def __add__(self, other):
        return LocalFunctional(self.rep + _rep(other))

    def __sub__(self, other):
        return LocalFunctional(self.rep - _rep(other))

    def __neg__(self):
        return LocalFunctional(-self.rep)

    def __mul__(self, c):
        return LocalFunctional(self.rep * Fraction(c))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (LocalFunctional, DiffPoly)):
            return functionals_equal(self, other)
        if other == 0:
            return self.is_zero()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"LocalFunctional({self.rep})"


def _rep(x) -> DiffPoly:
    return x.rep if isinstance(x, LocalFunctional) else x


def as_functional(x) -> LocalFunctional:
    return x if isinstance(x, LocalFunctional) else LocalFunctional(x)


def functionals_equal(l1, l2) -> bool:
    e1, e2 = as_functional(l1).euler, as_functional(l2).euler
    return e1 == e2


def is_total_derivative(p: DiffPoly) -> bool:
    return as_functional(p).is_zero()


# ---- antiderivative oracle ------------------------------------------

def _grading_key(f: tuple):
    """(multiset of bases with der cleared, total derivative weight)."""
    return tuple(sorted(base_code(c) for c in f)), sum(der_of(c) for c in f)


def _der_choices(bc: int, mult: int, budget: int, odd: bool):
    """All ways to give ``mult`` copies of base ``bc`` derivative orders."""
    if kind_of(bc) == Kind.C:
        yield (bc,) * mult, 0
        return
    pick = combinations if odd else combinations_with_replacement
    for ders in pick(range(budget + 1), mult):
        s = sum(ders)
        if s <= budget:
            yield tuple(bc + d * DER_STEP for d in ders), s


def _candidates(bases: tuple, weight: int):
    groups = defaultdict(int)
    for bc in bases:
        groups[bc] += 1
    items = sorted(groups.items())

    def rec(i, budget, acc):
        if i == len(items):
            if budget == 0:
                yield tuple(acc)
            return
        bc, mult = items[i]
        for codes, s in _der_choices(bc, mult, budget, bool(bc & 1)):
            yield from rec(i + 1, budget - s, acc + list(codes))

    yield from rec(0, weight, [])


def _solve(columns: list, target: dict) -> Optional[list]:
    """Exact solve of ``sum_j x_j columns[j] = target`` over QQ."""
    rows = sorted(set(target).union(*[set(c) for c in columns]))
    index = {r: i for i, r in enumerate(rows)}
    n = len(columns)
    data = [[QQ(0)] * (n + 1) for _ in rows]
    for j, col in enumerate(columns):
        for r, v in col.items():
            data[index[r]][j] = QQ(v.numerator, v.denominator)
    for r, v in target.items():
        data[index[r]][n] = QQ(v.numerator, v.denominator)
    mat = DomainMatrix(data, (len(rows), n + 1), QQ)
    rref, pivots = mat.rref()
    if n in pivots:
        return None
    sol = [Fraction(0)] * n
    dense = rref.to_Matrix()
    for row, col in enumerate(pivots):
        v = dense[row, n]
        sol[col] = Fraction(int(v.p), int(v.q))
    return sol


def find_antiderivative(p: DiffPoly, degree_bound: Optional[int] = None) -> Optional[DiffPoly]:
    """Find ``W`` with ``d/dz W == p`` or return ``None``.

    ``d/dz`` preserves the multiset of generator bases and raises the total
    derivative weight by one, so each graded piece of ``p`` is solved
    separately against every monomial of weight one less.  That search space
    is complete; if ``p`` has vanishing Euler entries and no solution is
    found, :class:`InconsistencyError` is raised.
    """
    check_density(p)
    if degree_bound is not None and p.degree() > degree_bound:
        return None
    pieces = defaultdict(dict)
    for f, c in p.terms.items():
        pieces[_grading_key(f)][f] = c
    result = DiffPoly()
    for (bases, weight), target in sorted(pieces.items()):
        found = None
        if weight > 0:
            cands = list(_candidates(bases, weight - 1))
            columns = []
            keep = []
            for mono in cands:
                dz = total_z_derivative(DiffPoly.from_terms([(1, mono)]))
                if dz.terms:
                    columns.append(dz.terms)
                    keep.append(mono)
            if columns:
                sol = _solve(columns, target)
                if sol is not None:
                    found = DiffPoly.from_terms(
                        (x, mono) for x, mono in zip(sol, keep) if x
                    )
        if found is None:
            if not euler_tuple(p):
                raise InconsistencyError(
                    f"Euler entries vanish but no antiderivative for piece {bases}, weight {weight}"
                )
            return None
        result = result + found
    return result


# ---- normal form -----------------------------------------------------

def _elimination_key(f: tuple):
    return sorted(((der_of(c), c) for c in f), reverse=True)


def canonical_representative(p: DiffPoly) -> DiffPoly:
    """Unique density in the class of ``p`` modulo ``d/dz``.

    Each graded piece is reduced against the row-reduced image of ``d/dz``.
    Monomials whose top factor carries the most derivatives are eliminated
    first, so the result is what repeated integration by parts produces.
    """
    check_density(p)
    pieces = defaultdict(dict)
    for f, c in p.terms.items():
        pieces[_grading_key(f)][f] = c
    out = {}
    for (bases, weight), target in sorted(pieces.items()):
        images = []
        if weight > 0:
            for mono in _candidates(bases, weight - 1):
                dz = total_z_derivative(DiffPoly.from_terms([(1, mono)]))
                if dz.terms:
                    images.append(dz.terms)
        if not images:
            out.update(target)
            continue
        monos = sorted(set(target).union(*images), key=_elimination_key, reverse=True)
        col = {m: j for j, m in enumerate(monos)}
        data = [[QQ(0)] * len(monos) for _ in images]
        for i, img in enumerate(images):
            for m, v in img.items():
                data[i][col[m]] = QQ(v.numerator, v.denominator)
        rref, pivots = DomainMatrix(data, (len(images), len(monos)), QQ).rref()
        dense = rref.to_Matrix()
        vec = [Fraction(0)] * len(monos)
        for m, v in target.items():
            vec[col[m]] = Fraction(v)
        for row, j in enumerate(pivots):
            c = vec[j]
            if c:
                for k in range(j, len(monos)):
                    v = dense[row, k]
                    if v:
                        vec[k] -= c * Fraction(int(v.p), int(v.q))
        for j, c in enumerate(vec):
            if c:
                out[monos[j]] = c
    return DiffPoly(out)
