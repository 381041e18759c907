"""Contraction data ``(i, pi, P)`` from a dg space onto a smaller complex."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import sympy

from .spaces import CheckReport, DGSpace, GradedSpace, ShiftedSymplectic, fractions_of, to_matrix


def _zeros(r, c):
    return [[Fraction(0)] * c for _ in range(r)]


def _identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


@dataclass
class Contraction:
    """``i: H -> E``, ``pi: E -> H`` and the homotopy ``P: E -> E`` of degree -1.

    Matrices act on column vectors: ``i[k][a]`` is the ``e_k`` coefficient
    of ``i(h_a)``.  ``QH`` is the differential on ``H`` (zero for a
    contraction onto cohomology).
    """

    E: DGSpace
    H: GradedSpace
    i: list
    pi: list
    P: list
    QH: Optional[list] = None

    def __post_init__(self):
        frac = lambda m: [[Fraction(x) for x in row] for row in m]  # noqa: E731
        self.i, self.pi, self.P = frac(self.i), frac(self.pi), frac(self.P)
        self.QH = _zeros(self.H.dim, self.H.dim) if self.QH is None else frac(self.QH)

    @property
    def H_dg(self) -> DGSpace:
        return DGSpace(self.H, self.QH)


def verify_contraction(c: Contraction) -> CheckReport:
    rep = CheckReport()
    n, m = c.E.space.dim, c.H.dim
    dE, dH = c.E.space.degrees, c.H.degrees
    shapes = (
        len(c.i) == n and all(len(r) == m for r in c.i)
        and len(c.pi) == m and all(len(r) == n for r in c.pi)
        and len(c.P) == n and all(len(r) == n for r in c.P)
    )
    rep.expect(shapes, "contraction matrices have the wrong shape")
    if not shapes:
        return rep
    for k in range(n):
        for a in range(m):
            if c.i[k][a]:
                rep.expect(dE[k] == dH[a], "i does not preserve degree")
            if c.pi[a][k]:
                rep.expect(dE[k] == dH[a], "pi does not preserve degree")
        for j in range(n):
            if c.P[k][j]:
                rep.expect(dE[k] == dE[j] - 1, "P does not have degree -1")
    Q = to_matrix(c.E.Q)
    QH = to_matrix(c.QH, (m, m))
    i, pi, P = to_matrix(c.i, (n, m)), to_matrix(c.pi, (m, n)), to_matrix(c.P)
    rep.expect((QH * QH).is_zero_matrix, "QH^2 != 0")
    rep.expect(pi * i == sympy.eye(m), "pi i != 1")
    rep.expect(sympy.eye(n) - i * pi == Q * P + P * Q, "1 - i pi != QP + PQ")
    rep.expect((P * P).is_zero_matrix, "P^2 != 0")
    rep.expect((pi * P).is_zero_matrix, "pi P != 0")
    rep.expect((P * i).is_zero_matrix, "P i != 0")
    rep.expect(Q * i == i * QH, "i is not a chain map")
    rep.expect(pi * Q == QH * pi, "pi is not a chain map")
    return rep


def propagator_kernel(c: Contraction, s: ShiftedSymplectic) -> list:
    """Kernel ``A = P W`` paired between two vertices along an internal edge.

    Orientation: the edge operator is ``sum (F <d_i) A^{ij} (d_j> G)`` with
    the same slot conventions as the BV bracket, whose kernel is ``W``.
    """
    A = to_matrix(c.P) * to_matrix(s.W)
    return fractions_of(A)


def induced_symplectic(c: Contraction, s: ShiftedSymplectic) -> ShiftedSymplectic:
    """``omega_H(h_a, h_b) = omega(i h_a, i h_b)`` with differential ``QH``."""
    i = to_matrix(c.i, (c.E.space.dim, c.H.dim))
    om = i.T * to_matrix(s.omega) * i
    return ShiftedSymplectic(c.H_dg, fractions_of(om))


def verify_compatibility(c: Contraction, s: ShiftedSymplectic) -> CheckReport:
    """Pairing compatibility: ``omega(P a, b) = (-1)^{|a|} omega(a, P b)``,
    ``i pi`` self-adjoint and the induced pairing nondegenerate."""
    rep = CheckReport()
    d = c.E.space.degrees
    n = c.E.space.dim
    om = s.omega
    P = c.P
    m = c.H.dim
    ip = to_matrix(c.i, (n, m)) * to_matrix(c.pi, (m, n))
    for a in range(n):
        for b in range(n):
            lhs = sum(P[k][a] * om[k][b] for k in range(n))
            rhs = sum(P[k][b] * om[a][k] for k in range(n))
            sign = -1 if d[a] & 1 else 1
            rep.expect(lhs == sign * rhs, f"P not compatible with omega at ({a}, {b})")
            l2 = sum(ip[k, a] * om[k][b] for k in range(n))
            r2 = sum(ip[k, b] * om[a][k] for k in range(n))
            rep.expect(l2 == r2, f"i pi not self-adjoint at ({a}, {b})")
    rep.expect(induced_symplectic(c, s).invertible, "induced pairing on H is degenerate")
    return rep


def hodge_contraction(dg: DGSpace, labels: Optional[list] = None) -> Contraction:
    """Contraction onto harmonic representatives for the standard inner product.

    With ``L = Q Q^T + Q^T Q`` and its pseudo-inverse ``L+``: ``P = Q^T L+``
    and ``i`` spans ``ker L``; ``pi`` is the orthogonal projection.
    """
    n = dg.space.dim
    Q = to_matrix(dg.Q)
    L = Q * Q.T + Q.T * Q
    Lp = L.pinv()
    P = Q.T * Lp
    kernel = L.nullspace()
    degs = []
    for v in kernel:
        ds = {dg.space.degrees[k] for k in range(n) if v[k] != 0}
        if len(ds) != 1:
            raise ValueError("harmonic vector is not homogeneous")
        degs.append(ds.pop())
    if kernel:
        i = sympy.Matrix.hstack(*kernel)
        pi = (i.T * i).inv() * i.T
    else:
        i = sympy.zeros(n, 0)
        pi = sympy.zeros(0, n)
    if labels is None:
        labels = []
        for v in kernel:
            k = next(k for k in range(n) if v[k] != 0)
            labels.append(f"[{dg.space.labels[k]}]")
    H = GradedSpace(tuple(labels), tuple(degs))
    m = len(kernel)
    return Contraction(
        dg, H,
        fractions_of(i) if m else [[] for _ in range(n)],
        fractions_of(pi) if m else [],
        fractions_of(P),
    )


def identity_contraction(dg: DGSpace) -> Contraction:
    n = dg.space.dim
    return Contraction(dg, dg.space, _identity(n), _identity(n), _zeros(n, n), [list(r) for r in dg.Q])


# ---- tensor products ----------------------------------------------------

def tensor_space(X: GradedSpace, Y: GradedSpace) -> GradedSpace:
    labels = tuple(f"{x}*{y}" for x in X.labels for y in Y.labels)
    degrees = tuple(dx + dy for dx in X.degrees for dy in Y.degrees)
    return GradedSpace(labels, degrees)


def tensor_map(A, B, a_degrees_in, b_degree: int, Y_in: GradedSpace):
    """Matrix of ``A (x) B`` on basis ``x_k (x) y_l``; ``B`` of degree ``b_degree``.

    Koszul rule: ``(A (x) B)(x (x) y) = (-1)^{|B||x|} A x (x) B y``.
    """
    ra, ca = len(A), len(A[0]) if A else 0
    rb, cb = len(B), len(B[0]) if B else 0
    out = _zeros(ra * rb, ca * cb)
    for p in range(ra):
        for k in range(ca):
            if not A[p][k]:
                continue
            sign = -1 if (b_degree * a_degrees_in[k]) & 1 else 1
            for q in range(rb):
                for l in range(cb):
                    if B[q][l]:
                        out[p * rb + q][k * cb + l] = sign * A[p][k] * B[q][l]
    return out


def tensor_dg(X: DGSpace, Y: DGSpace) -> DGSpace:
    nx, ny = X.space.dim, Y.space.dim
    qx = tensor_map(X.Q, _identity(ny), X.space.degrees, 0, Y.space)
    qy = tensor_map(_identity(nx), Y.Q, X.space.degrees, 1, Y.space)
    Q = [[qx[r][c] + qy[r][c] for c in range(nx * ny)] for r in range(nx * ny)]
    return DGSpace(tensor_space(X.space, Y.space), Q)


def tensor_pairing(X: GradedSpace, omega_x, Y: GradedSpace, omega_y) -> list:
    """``omega(x (x) y, x' (x) y') = (-1)^{|y||x'|} omega_X(x, x') omega_Y(y, y')``."""
    nx, ny = X.dim, Y.dim
    out = _zeros(nx * ny, nx * ny)
    for a in range(nx):
        for b in range(nx):
            wx = Fraction(omega_x[a][b])
            if not wx:
                continue
            for p in range(ny):
                for q in range(ny):
                    wy = Fraction(omega_y[p][q])
                    if wy:
                        sign = -1 if (Y.degrees[p] * X.degrees[b]) & 1 else 1
                        out[a * ny + p][b * ny + q] = sign * wx * wy
    return out


def relative_contraction(cx: Contraction, Y: DGSpace) -> Contraction:
    """``(i (x) 1, pi (x) 1, P (x) 1)`` on ``E_X (x) E_Y``; ``H = H_X (x) E_Y``."""
    ny = Y.space.dim
    one = _identity(ny)
    E = tensor_dg(cx.E, Y)
    H = tensor_dg(cx.H_dg, Y)
    i = tensor_map(cx.i, one, cx.H.degrees, 0, Y.space)
    pi = tensor_map(cx.pi, one, cx.E.space.degrees, 0, Y.space)
    P = tensor_map(cx.P, one, cx.E.space.degrees, 0, Y.space)
    return Contraction(E, H.space, i, pi, P, [list(r) for r in H.Q])


def collapse_pairs(dg: DGSpace, pairs) -> Contraction:
    """Contract the acyclic pairs ``(x, y)`` with ``Q e_x = q e_y`` and keep the rest.

    ``P e_y = e_x / q``; ``i`` and ``pi`` are inclusion and projection of the
    remaining basis vectors.  Side conditions are not guaranteed; check the
    result with :func:`verify_contraction`.
    """
    n = dg.space.dim
    gone = set()
    P = _zeros(n, n)
    for x, y in pairs:
        q = dg.Q[y][x]
        if not q:
            raise ValueError(f"Q does not map basis vector {x} onto {y}")
        P[x][y] = 1 / Fraction(q)
        gone.update((x, y))
    keep = [k for k in range(n) if k not in gone]
    H = GradedSpace(
        tuple(dg.space.labels[k] for k in keep), tuple(dg.space.degrees[k] for k in keep)
    )
    i = [[Fraction(int(k == keep[a])) for a in range(len(keep))] for k in range(n)]
    pi = [[Fraction(int(k == keep[a])) for k in range(n)] for a in range(len(keep))]
    QH = [[dg.Q[r][c] for c in keep] for r in keep]
    return Contraction(dg, H, i, pi, P, QH)
