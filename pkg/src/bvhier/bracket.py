"""Hydrodynamic Poisson bracket on local functionals and the odd differential.

``{S1, S2} = sum g^{ab} oint E_a(L1) d/dz E_b(L2)`` where ``E_a`` is the
Euler derivative along ``b^a_0``.  Only level-0 bosonic bases contribute.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import sympy

from .diffring import (
    DiffPoly,
    Kind,
    decode,
    encode,
    derivation,
    total_z_derivative,
)
from .localfunc import LocalFunctional, as_functional, euler_derivative


def _frac(x) -> Fraction:
    return Fraction(x) if not isinstance(x, sympy.Rational) else Fraction(int(x.p), int(x.q))


@dataclass(frozen=True)
class Metric:
    g: tuple
    g_inv: tuple = field(default=None)

    def __post_init__(self):
        g = tuple(tuple(Fraction(x) for x in row) for row in self.g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("metric must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("metric must be symmetric")
        m = sympy.Matrix(n, n, lambda i, j: sympy.Rational(g[i][j].numerator, g[i][j].denominator))
        if m.det() == 0:
            raise ValueError("metric must be invertible")
        inv = m.inv()
        object.__setattr__(self, "g", g)
        object.__setattr__(
            self, "g_inv", tuple(tuple(_frac(inv[i, j]) for j in range(n)) for i in range(n))
        )

    @property
    def dim(self) -> int:
        return len(self.g)

    @classmethod
    def identity(cls, n: int = 1) -> "Metric":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def bracket_density(l1, l2, metric: Metric) -> DiffPoly:
    """Pre-reduction density ``sum g^{ab} E_a(L1) * d/dz E_b(L2)``."""
    r1 = l1.rep if isinstance(l1, LocalFunctional) else l1
    r2 = l2.rep if isinstance(l2, LocalFunctional) else l2
    n = metric.dim
    e1 = [euler_derivative(r1, (Kind.B, a, 0)) for a in range(n)]
    de2 = [total_z_derivative(euler_derivative(r2, (Kind.B, b, 0))) for b in range(n)]
    out = DiffPoly()
    for a in range(n):
        if not e1[a].terms:
            continue
        for b in range(n):
            c = metric.g_inv[a][b]
            if c and de2[b].terms:
                out = out + (e1[a] * de2[b]) * c
    return out


def poisson_bracket(l1, l2, metric: Metric) -> LocalFunctional:
    return LocalFunctional(bracket_density(l1, l2, metric))


def _delta_image(code: int) -> Optional[DiffPoly]:
    g = decode(code)
    if g.kind != Kind.B or g.level == 0:
        return None
    return DiffPoly.generator(Kind.ETA, g.alpha, g.level - 1, g.der + 1)


def delta(p) -> DiffPoly:
    """Odd derivation ``b^a_k -> d/dz eta^a_{k-1}``, killing ``eta``, ``c`` and ``b^a_0``."""
    rep = p.rep if isinstance(p, LocalFunctional) else p
    return derivation(rep, _delta_image, odd=True)


def _parity(x) -> int:
    rep = x.rep if isinstance(x, LocalFunctional) else x
    par = rep.parity()
    if par is None:
        raise ValueError("graded identities need parity-homogeneous inputs")
    return par


@dataclass
class DGLAReport:
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, inputs: Sequence, residual: LocalFunctional):
        self.checked += 1
        if not residual.is_zero():
            self.failures.append((name, tuple(inputs), residual))


def antisymmetry_residual(a, b, metric: Metric) -> LocalFunctional:
    pa, pb = _parity(a), _parity(b)
    s = -1 if (pa * pb) & 1 else 1
    return poisson_bracket(a, b, metric) + poisson_bracket(b, a, metric) * s


def jacobi_residual(a, b, c, metric: Metric) -> LocalFunctional:
    """``(-1)^{ac}{a,{b,c}} + (-1)^{ba}{b,{c,a}} + (-1)^{cb}{c,{a,b}}``."""
    pa, pb, pc = _parity(a), _parity(b), _parity(c)

    def sgn(x, y):
        return -1 if (x * y) & 1 else 1

    br = lambda x, y: bracket_density(x, y, metric)  # noqa: E731
    total = (
        br(a, br(b, c)) * sgn(pa, pc)
        + br(b, br(c, a)) * sgn(pb, pa)
        + br(c, br(a, b)) * sgn(pc, pb)
    )
    return LocalFunctional(total)


def delta_compatibility_residual(a, b, metric: Metric) -> LocalFunctional:
    """``delta{a,b} - {delta a, b} - (-1)^{|a|}{a, delta b}``."""
    pa = _parity(a)
    lhs = delta(bracket_density(a, b, metric))
    rhs = bracket_density(delta(a), b, metric)
    second = bracket_density(a, delta(b), metric)
    rhs = rhs - second if pa else rhs + second
    return LocalFunctional(lhs - rhs)


def check_dgla(samples: Iterable, metric: Metric) -> DGLAReport:
    """Exact check of the dg Lie algebra axioms on sample tuples.

    Each sample is a tuple of one to three densities.  Pairs are checked for
    antisymmetry, delta-compatibility and well-definedness (bracket with a
    total derivative vanishes); triples additionally for Jacobi; every entry
    for ``delta o delta == 0``.
    """
    report = DGLAReport()
    for sample in samples:
        reps = [x.rep if isinstance(x, LocalFunctional) else x for x in sample]
        for r in reps:
            report.record("delta^2", (r,), LocalFunctional(delta(delta(r))))
        if len(reps) >= 2:
            a, b = reps[0], reps[1]
            report.record("antisymmetry", (a, b), antisymmetry_residual(a, b, metric))
            report.record("delta-compatibility", (a, b), delta_compatibility_residual(a, b, metric))
            exact = total_z_derivative(a)
            if exact.terms:
                report.record("well-defined", (exact, b), poisson_bracket(exact, b, metric))
        if len(reps) >= 3:
            report.record("jacobi", tuple(reps[:3]), jacobi_residual(*reps[:3], metric))
    return report
