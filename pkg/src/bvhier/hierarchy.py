"""Master functional, its Maurer-Cartan residual and the stationary hierarchy."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bracket import Metric, bracket_density, delta
from .diffring import (
    DiffPoly,
    Kind,
    TruncationPolicy,
    decode,
    encode,
    kind_of,
    level_of,
    partial_derivative,
    substitute,
)
from .localfunc import LocalFunctional
from .tft import PhaseSpaceData, big_phase_series, series_window


@dataclass
class MasterFunctional:
    """``I = sum_{k,a} oint eta^a_k <<O^(k)_a>>_0(b)`` truncated by ``t``.

    ``components[(k, a)]`` holds the series multiplying ``eta^a_k``.
    ``extra_max_level`` is the highest ``b`` level kept inside the series;
    0 means only the stationary data was built.
    """

    I: LocalFunctional
    components: dict
    truncation: TruncationPolicy
    dim: int
    extra_max_level: int

    @property
    def window(self) -> int:
        return self.truncation.max_insertions

    @property
    def max_factors(self) -> int:
        """Largest monomial size (eta plus b factors) whose coefficients are complete."""
        return min(self.truncation.max_insertions, self.truncation.max_degree + 1)


def build_master(
    d: PhaseSpaceData, t: TruncationPolicy, extra_max_level: Optional[int] = None
) -> MasterFunctional:
    top = t.max_level if extra_max_level is None else extra_max_level
    components = {}
    rep = DiffPoly()
    for k in range(t.max_level + 1):
        for a in range(d.dim):
            s = big_phase_series(d, [(k, a)], t, extra_max_level=top)
            if s.terms:
                components[(k, a)] = s
                rep = rep + DiffPoly.generator(Kind.ETA, a, k) * s
    return MasterFunctional(LocalFunctional(rep), components, t, d.dim, top)


# ---- Maurer-Cartan -------------------------------------------------------

@dataclass
class MCReport:
    """``delta I + 1/2 {I, I}`` split into graded pieces.

    A piece is keyed by the number of factors ``T`` of its monomials and is
    trusted when ``T <= max_factors`` and no ``eta`` has level above
    ``max_eta_level``.  ``degree`` of a piece is ``T - 3``, the number of
    correlator insertions beyond three, so it is directly comparable with
    the polynomial degree reported by the TRR check.
    """

    residual: LocalFunctional
    max_factors: int
    max_eta_level: int
    inside: DiffPoly
    outside: DiffPoly
    failing_degrees: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failing_degrees

    @property
    def window_degree(self) -> int:
        return self.max_factors - 3


def _in_window(f: tuple, max_factors: int, max_eta_level: int) -> bool:
    if len(f) > max_factors:
        return False
    return all(
        kind_of(c) != Kind.ETA or level_of(c) <= max_eta_level for c in f
    )


def mc_density(m: MasterFunctional, g: Metric) -> DiffPoly:
    rep = m.I.rep
    return delta(rep) + bracket_density(rep, rep, g) * Fraction(1, 2)


def mc_residual(m: MasterFunctional, g: Metric) -> MCReport:
    """Exact MC residual restricted to the verified window.

    Truncating ``b`` at level ``K`` drops ``delta b_{K+1} = d eta_K``, so
    pieces containing ``eta_K`` are excluded; monomials with more than
    ``max_factors`` factors need correlators beyond the truncation.
    """
    if m.extra_max_level < m.truncation.max_level:
        raise ValueError("MC residual needs the master functional with all b levels")
    if g.dim != m.dim:
        raise ValueError("metric dimension does not match the phase space")
    dens = mc_density(m, g)
    top_eta = m.truncation.max_level - 1
    inside = dens.filter(lambda f: _in_window(f, m.max_factors, top_eta))
    outside = dens.filter(lambda f: not _in_window(f, m.max_factors, top_eta))
    # d/dz preserves the multiset of generator bases, so each graded piece
    # is a functional on its own.
    pieces = defaultdict(dict)
    for f, c in inside.terms.items():
        pieces[len(f)][f] = c
    failing = sorted(
        n - 3 for n, terms in pieces.items() if not LocalFunctional(DiffPoly(terms)).is_zero()
    )
    return MCReport(LocalFunctional(dens), m.max_factors, top_eta, inside, outside, failing)


# ---- stationary sector -------------------------------------------------

@dataclass
class StationaryHamiltonian:
    k: int
    alpha: int
    G: DiffPoly
    window: int  # b-degree to which G is complete

    @property
    def functional(self) -> LocalFunctional:
        return LocalFunctional(self.G)


@dataclass
class StationaryRestriction:
    hamiltonians: list
    I_S: DiffPoly
    bracket_direct: DiffPoly  # {I_S, I_S} computed by bracketing I_S with itself
    bracket_expanded: DiffPoly  # sum c_k c_m {G_k, G_m}

    @property
    def consistent(self) -> bool:
        return LocalFunctional(self.bracket_direct - self.bracket_expanded).is_zero()


def _stationary_image(code: int) -> Optional[DiffPoly]:
    g = decode(code)
    if g.kind == Kind.B:
        return DiffPoly() if g.level > 0 else None
    if g.kind == Kind.ETA:
        if g.der > 0:
            return DiffPoly()
        return DiffPoly.generator(Kind.C, g.alpha, g.level)
    return None


def stationary_restrict(m: MasterFunctional, g: Optional[Metric] = None) -> StationaryRestriction:
    """Set ``b_{>0} = 0`` and ``eta^a_k = c^a_k``; read off ``G_{k,a}``.

    With a metric, ``{I_S, I_S}`` is computed directly and via the
    Hamiltonians so the two can be compared.
    """
    i_s = substitute(m.I.rep, _stationary_image)
    hams = []
    for k in range(m.truncation.max_level + 1):
        for a in range(m.dim):
            G = partial_derivative(i_s, encode(Kind.C, a, k))
            win = series_window([(k, a)], m.truncation)
            hams.append(StationaryHamiltonian(k, a, G, win))
    direct = expanded = DiffPoly()
    if g is not None:
        direct = bracket_density(i_s, i_s, g)
        for h1 in hams:
            c1 = DiffPoly.generator(Kind.C, h1.alpha, h1.k)
            for h2 in hams:
                br = bracket_density(h1.G, h2.G, g)
                if br.terms:
                    c2 = DiffPoly.generator(Kind.C, h2.alpha, h2.k)
                    expanded = expanded + c1 * c2 * br
    return StationaryRestriction(hams, i_s, direct, expanded)


def stationary_hamiltonians(d: PhaseSpaceData, t: TruncationPolicy) -> list:
    """``G_{k,a}`` for ``k <= t.max_level`` built from level-0 extras only."""
    return stationary_restrict(build_master(d, t, extra_max_level=0)).hamiltonians


@dataclass
class CommutationMatrix:
    hamiltonians: list
    densities: list  # densities[i][j] = pre-reduction density of {G_i, G_j}
    entries: list  # LocalFunctional

    @property
    def nonzero(self) -> list:
        n = len(self.hamiltonians)
        return [(i, j) for i in range(n) for j in range(n) if not self.entries[i][j].is_zero()]

    @property
    def ok(self) -> bool:
        return not self.nonzero


def commutation_matrix(hams: list, g: Metric) -> CommutationMatrix:
    dens = [[bracket_density(h1.G, h2.G, g) for h2 in hams] for h1 in hams]
    entries = [[LocalFunctional(x) for x in row] for row in dens]
    return CommutationMatrix(list(hams), dens, entries)
