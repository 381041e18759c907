"""Genus-zero correlators, big-phase-space generating series and TRR checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .bracket import Metric
from .diffring import DiffPoly, Kind, TruncationPolicy, encode, rational_str


class PhaseSpaceError(ValueError):
    pass


class DimensionError(PhaseSpaceError):
    """Basis, metric or insertion indices disagree in dimension."""


def insertion_key(pairs: Iterable) -> tuple:
    """Canonical multiset of ``(level, alpha)`` insertions."""
    return tuple(sorted((int(k), int(a)) for k, a in pairs))


def multinomial(total: int, parts: Sequence[int]) -> int:
    if sum(parts) != total or any(p < 0 for p in parts):
        return 0
    out = factorial(total)
    for p in parts:
        out //= factorial(p)
    return out


class PureGravity:
    """``<P^(k1) ... P^(kn)>_0 = (n-3)! / prod k_i!`` when ``sum k_i = n - 3``."""

    name = "pure_gravity"

    def __call__(self, key: tuple) -> Fraction:
        n = len(key)
        if n < 3:
            return Fraction(0)
        return Fraction(multinomial(n - 3, [k for k, _ in key]))

    def to_json_obj(self) -> dict:
        return {"source": "pure_gravity"}


class Table:
    """Finite table of correlators; missing keys are zero."""

    name = "table"

    def __init__(self, entries: Mapping):
        self.entries = {}
        for key, value in entries.items():
            value = Fraction(value)
            key = insertion_key(key)
            if value and len(key) >= 3:
                self.entries[key] = value

    def __call__(self, key: tuple) -> Fraction:
        return self.entries.get(key, Fraction(0))

    def to_json_obj(self) -> dict:
        return {
            "source": "table",
            "entries": [
                {"ins": [list(p) for p in key], "value": rational_str(v)}
                for key, v in sorted(self.entries.items())
            ],
        }


@dataclass
class PhaseSpaceData:
    dim: int
    names: list
    identity: int
    metric: Metric
    provider: object
    _series_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.metric.dim != self.dim or len(self.names) != self.dim:
            raise DimensionError("basis, metric and dim disagree")
        if isinstance(self.provider, PureGravity) and self.dim != 1:
            raise PhaseSpaceError("pure gravity requires a one-dimensional phase space")
        if not 0 <= self.identity < self.dim:
            raise PhaseSpaceError("identity index out of range")

    def correlator(self, key) -> Fraction:
        key = insertion_key(key)
        for _, a in key:
            if not 0 <= a < self.dim:
                raise DimensionError(f"basis index {a} out of range")
        if len(key) < 3:
            return Fraction(0)
        return self.provider(key)

    def metric_mismatches(self) -> list:
        """Pairs where the declared metric differs from ``<O_a O_b P>_0``."""
        out = []
        for a in range(self.dim):
            for b in range(self.dim):
                c = self.correlator([(0, a), (0, b), (0, self.identity)])
                if c != self.metric.g[a][b]:
                    out.append((a, b, c, self.metric.g[a][b]))
        return out

    # ---- (de)serialization ----------------------------------------
    @classmethod
    def from_json_obj(cls, obj: dict) -> "PhaseSpaceData":
        try:
            dim = int(obj["dim"])
            names = list(obj.get("basis") or [f"O{i}" for i in range(dim)])
            ident = obj.get("identity", names[0])
            identity = names.index(ident) if isinstance(ident, str) else int(ident)
            metric = Metric([[Fraction(x) for x in row] for row in obj["metric"]])
            src = obj["correlators"]
            if src["source"] == "pure_gravity":
                provider = PureGravity()
            elif src["source"] == "table":
                provider = Table(
                    {insertion_key(e["ins"]): Fraction(e["value"]) for e in src["entries"]}
                )
            else:
                raise PhaseSpaceError(f"unknown correlator source {src['source']!r}")
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, PhaseSpaceError):
                raise
            raise PhaseSpaceError(f"malformed phase-space data: {exc}") from exc
        return cls(dim, names, identity, metric, provider)

    @classmethod
    def load(cls, path) -> "PhaseSpaceData":
        return cls.from_json_obj(json.loads(Path(path).read_text()))

    def to_json_obj(self) -> dict:
        return {
            "dim": self.dim,
            "basis": list(self.names),
            "identity": self.names[self.identity],
            "metric": [[rational_str(x) for x in row] for row in self.metric.g],
            "correlators": self.provider.to_json_obj(),
        }


def pure_gravity() -> PhaseSpaceData:
    return PhaseSpaceData(1, ["P"], 0, Metric.identity(1), PureGravity())


def tabulate(d: PhaseSpaceData, max_insertions: int, max_level: int) -> Table:
    """Snapshot every correlator with ``n <= max_insertions``, levels ``<= max_level``."""
    atoms = [(k, a) for k in range(max_level + 1) for a in range(d.dim)]
    entries = {}
    for n in range(3, max_insertions + 1):
        for key in combinations_with_replacement(atoms, n):
            v = d.correlator(key)
            if v:
                entries[key] = v
    return Table(entries)


def with_table(d: PhaseSpaceData, table: Table) -> PhaseSpaceData:
    return PhaseSpaceData(d.dim, list(d.names), d.identity, d.metric, table)


# ---- generating series -------------------------------------------------

def series_window(fixed, t: TruncationPolicy) -> int:
    """Polynomial degree up to which ``big_phase_series(fixed)`` is complete."""
    return min(t.max_insertions - len(fixed), t.max_degree)


def big_phase_series(
    d: PhaseSpaceData, fixed, t: TruncationPolicy, extra_max_level: Optional[int] = None
) -> DiffPoly:
    """``<<fixed>>_0(b)`` truncated to the window of ``t``.

    Each multiset of extra insertions contributes
    ``correlator(fixed + extra) * prod b^{r}/r!``.  Extra insertions have
    level at most ``extra_max_level`` (default ``t.max_level``); passing 0
    gives the series already restricted to ``b_{>0} = 0``.
    """
    fixed = insertion_key(fixed)
    top_level = t.max_level if extra_max_level is None else extra_max_level
    cache_key = (fixed, t.max_insertions, top_level, t.max_degree)
    cached = d._series_cache.get(cache_key)
    if cached is not None:
        return cached
    atoms = [(k, a) for k in range(top_level + 1) for a in range(d.dim)]
    top = series_window(fixed, t)
    terms = {}
    for r in range(max(top, -1) + 1):
        for extra in combinations_with_replacement(atoms, r):
            value = d.correlator(fixed + extra)
            if not value:
                continue
            weight = 1
            run = 1
            for i in range(1, r):
                if extra[i] == extra[i - 1]:
                    run += 1
                    weight *= run
                else:
                    run = 1
            codes = tuple(encode(Kind.B, a, k) for k, a in extra)
            terms[tuple(sorted(codes))] = value / weight
    out = DiffPoly(terms)
    d._series_cache[cache_key] = out
    return out


def degree_filter(p: DiffPoly, max_degree: int) -> DiffPoly:
    return p.filter(lambda f: len(f) <= max_degree)


@dataclass
class TRRResult:
    indices: tuple  # ((i, alpha), (j, beta), (k, gamma))
    window: int
    residual: DiffPoly  # LHS - RHS on degrees <= window
    unverified: DiffPoly  # LHS - RHS beyond the window (truncation artefacts)

    @property
    def ok(self) -> bool:
        return not self.residual.terms

    @property
    def failing_degrees(self) -> list:
        return sorted({len(f) for f in self.residual.terms})


def check_trr(d: PhaseSpaceData, i, j, k, alpha, beta, gamma, t: TruncationPolicy) -> TRRResult:
    """Residual of the genus-zero topological recursion relation.

    ``<<O^(i+1)_a O^(j)_b O^(k)_c>> - sum <<O^(i)_a O^(0)_r>> g^{rs} <<O^(0)_s O^(j)_b O^(k)_c>>``
    Coefficients are trusted up to degree ``min(N, D + 3) - 3``.
    """
    lhs = big_phase_series(d, [(i + 1, alpha), (j, beta), (k, gamma)], t)
    rhs = DiffPoly()
    for r in range(d.dim):
        left = big_phase_series(d, [(i, alpha), (0, r)], t)
        if not left.terms:
            continue
        for s in range(d.dim):
            c = d.metric.g_inv[r][s]
            if not c:
                continue
            right = big_phase_series(d, [(0, s), (j, beta), (k, gamma)], t)
            rhs = rhs + (left * right) * c
    window = min(t.max_insertions, t.max_degree + 3) - 3
    full = lhs - rhs
    inside = degree_filter(full, window)
    outside = full.filter(lambda f: len(f) > window)
    return TRRResult(((i, alpha), (j, beta), (k, gamma)), window, inside, outside)


@dataclass
class TRRReport:
    window: int
    results: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def failing_degrees(self) -> list:
        return sorted({deg for r in self.results for deg in r.failing_degrees})


def check_trr_all(d: PhaseSpaceData, t: TruncationPolicy, max_index_level: Optional[int] = None) -> TRRReport:
    top = t.max_level if max_index_level is None else max_index_level
    results = []
    for i in range(top + 1):
        for j in range(top + 1):
            for k in range(j, top + 1):
                for a in range(d.dim):
                    for b_ in range(d.dim):
                        for c in range(d.dim):
                            if j == k and c < b_:
                                continue
                            results.append(check_trr(d, i, j, k, a, b_, c, t))
    window = results[0].window if results else 0
    return TRRReport(window, results)
