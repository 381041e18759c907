"""Exact graded differential polynomial ring.

Generators are the symbols ``d^m b[alpha][k]`` (even), ``d^m eta[alpha][k]``
(odd) and the stationary odd constants ``c[alpha][k]`` which are annihilated
by the total derivative ``d = d/dz``.  Coefficients are ``Fraction``.

Each generator is packed into one integer code so that integer order is the
canonical order ``(kind, alpha, level, der)`` and bit 0 is the parity; the
monomial kernels in :mod:`bvhier.kernels` work on tuples of such codes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple, Optional

from . import kernels

_KIND_SHIFT = 49
_ALPHA_SHIFT = 33
_LEVEL_SHIFT = 17
_DER_SHIFT = 1
_FIELD_MASK = (1 << 16) - 1
DER_STEP = 1 << _DER_SHIFT


class Kind(IntEnum):
    B = 0
    ETA = 1
    C = 2


_KIND_NAMES = {Kind.B: "b", Kind.ETA: "eta", Kind.C: "c"}
_KIND_BY_NAME = {v: k for k, v in _KIND_NAMES.items()}

# codes at or above this are constants for d/dz
FROZEN_FROM = int(Kind.C) << _KIND_SHIFT


class Generator(NamedTuple):
    kind: Kind
    alpha: int
    level: int
    der: int = 0

    @property
    def odd(self) -> bool:
        return self.kind != Kind.B

    @property
    def code(self) -> int:
        return encode(self.kind, self.alpha, self.level, self.der)

    @property
    def base(self) -> tuple:
        return (self.kind, self.alpha, self.level)

    def __str__(self):
        name = f"{_KIND_NAMES[self.kind]}[{self.alpha}][{self.level}]"
        return f"d^{self.der}({name})" if self.der else name


def encode(kind, alpha, level, der=0) -> int:
    if alpha < 0 or level < 0 or der < 0:
        raise ValueError("generator indices must be non-negative")
    if max(alpha, level, der) > _FIELD_MASK:
        raise ValueError("generator index too large")
    if kind == Kind.C and der:
        raise ValueError("stationary constants carry no z-derivatives")
    return (
        (int(kind) << _KIND_SHIFT)
        | (alpha << _ALPHA_SHIFT)
        | (level << _LEVEL_SHIFT)
        | (der << _DER_SHIFT)
        | (1 if kind != Kind.B else 0)
    )


def decode(code: int) -> Generator:
    return Generator(
        Kind(code >> _KIND_SHIFT),
        (code >> _ALPHA_SHIFT) & _FIELD_MASK,
        (code >> _LEVEL_SHIFT) & _FIELD_MASK,
        (code >> _DER_SHIFT) & _FIELD_MASK,
    )


def base_code(code: int) -> int:
    """Code of the underlying generator with the derivative order cleared."""
    return code & ~(_FIELD_MASK << _DER_SHIFT)


def der_of(code: int) -> int:
    return (code >> _DER_SHIFT) & _FIELD_MASK


def kind_of(code: int) -> Kind:
    return Kind(code >> _KIND_SHIFT)


def level_of(code: int) -> int:
    return (code >> _LEVEL_SHIFT) & _FIELD_MASK


class Monomial(NamedTuple):
    coeff: Fraction
    factors: tuple  # canonical tuple of codes

    @property
    def generators(self) -> tuple:
        return tuple(decode(c) for c in self.factors)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    sign, factors = kernels.mul(a.factors, b.factors)
    if not sign:
        return Monomial(Fraction(0), ())
    return Monomial(sign * a.coeff * b.coeff, factors)


def _accumulate(terms: dict, factors: tuple, coeff) -> None:
    c = terms.get(factors)
    c = coeff if c is None else c + coeff
    if c:
        terms[factors] = c
    else:
        terms.pop(factors, None)


class DiffPoly:
    """Sparse polynomial ``{canonical factor tuple: Fraction}``.

    Treated as immutable once built; the constructor trusts its input, use
    :meth:`from_terms` for unnormalized data.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[dict] = None):
        self.terms = terms if terms is not None else {}
        self._hash = None

    @classmethod
    def from_terms(cls, items: Iterable) -> "DiffPoly":
        """Build from ``(coeff, sequence of codes or Generators)`` pairs."""
        terms: dict = {}
        for coeff, seq in items:
            codes = [g.code if isinstance(g, Generator) else int(g) for g in seq]
            sign, factors = kernels.canonicalize(codes)
            if sign:
                _accumulate(terms, factors, sign * Fraction(coeff))
        return cls(terms)

    @classmethod
    def constant(cls, c) -> "DiffPoly":
        c = Fraction(c)
        return cls({(): c} if c else {})

    @classmethod
    def generator(cls, kind, alpha, level, der=0) -> "DiffPoly":
        return cls({(encode(kind, alpha, level, der),): Fraction(1)})

    # ---- arithmetic -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, DiffPoly):
            other = DiffPoly.constant(other)
        if len(other.terms) > len(self.terms):
            self, other = other, self
        terms = dict(self.terms)
        for f, c in other.terms.items():
            _accumulate(terms, f, c)
        return DiffPoly(terms)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({f: -c for f, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffPoly):
            other = DiffPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            c = Fraction(other)
            if not c:
                return DiffPoly()
            return DiffPoly({f: c * v for f, v in self.terms.items()})
        terms: dict = {}
        mul = kernels.mul
        for fa, ca in self.terms.items():
            for fb, cb in other.terms.items():
                sign, f = mul(fa, fb)
                if sign:
                    _accumulate(terms, f, sign * ca * cb)
        return DiffPoly(terms)

    def __rmul__(self, other):
        # scalars are even, so left and right scalar multiplication agree
        return self.__mul__(other)

    def __truediv__(self, other):
        return self * (1 / Fraction(other))

    def __pow__(self, n: int):
        out = DiffPoly.constant(1)
        for _ in range(n):
            out = out * self
        return out

    # ---- comparison -------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, DiffPoly):
            other = DiffPoly.constant(other)
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        for f in sorted(self.terms):
            yield Monomial(self.terms[f], f)

    def __repr__(self):
        return f"DiffPoly({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # ---- structure --------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def parity(self) -> Optional[int]:
        """0 or 1 for homogeneous polynomials, None for mixed (0 for zero)."""
        ps = {sum(c & 1 for c in f) & 1 for f in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def max_der(self) -> int:
        return max((der_of(c) for f in self.terms for c in f), default=0)

    def degree(self) -> int:
        return max((len(f) for f in self.terms), default=0)

    def generators(self) -> set:
        return {c for f in self.terms for c in f}

    def filter(self, keep: Callable[[tuple], bool]) -> "DiffPoly":
        return DiffPoly({f: c for f, c in self.terms.items() if keep(f)})


def gen(kind, alpha=0, level=0, der=0) -> DiffPoly:
    return DiffPoly.generator(kind, alpha, level, der)


def b(alpha=0, level=0, der=0) -> DiffPoly:
    return DiffPoly.generator(Kind.B, alpha, level, der)


def eta(alpha=0, level=0, der=0) -> DiffPoly:
    return DiffPoly.generator(Kind.ETA, alpha, level, der)


def const_odd(alpha=0, level=0) -> DiffPoly:
    return DiffPoly.generator(Kind.C, alpha, level)


# ---- operations ------------------------------------------------------

def partial_derivative(p: DiffPoly, g) -> DiffPoly:
    """Left partial derivative by the single symbol ``g``."""
    code = g.code if isinstance(g, Generator) else int(g)
    terms: dict = {}
    lp = kernels.left_partial
    for f, c in p.terms.items():
        k, rest = lp(f, code)
        if k:
            _accumulate(terms, rest, k * c)
    return DiffPoly(terms)


def right_partial_derivative(p: DiffPoly, g) -> DiffPoly:
    code = g.code if isinstance(g, Generator) else int(g)
    terms: dict = {}
    rp = kernels.right_partial
    for f, c in p.terms.items():
        k, rest = rp(f, code)
        if k:
            _accumulate(terms, rest, k * c)
    return DiffPoly(terms)


def total_z_derivative(p: DiffPoly, times: int = 1) -> DiffPoly:
    """``d/dz`` extended by Leibniz; stationary constants are killed."""
    zd = kernels.z_derivative
    for _ in range(times):
        terms: dict = {}
        for f, c in p.terms.items():
            for k, g in zd(f, DER_STEP, FROZEN_FROM):
                _accumulate(terms, g, k * c)
        p = DiffPoly(terms)
    return p


def derivation(p: DiffPoly, image: Callable[[int], Optional[DiffPoly]], odd: bool) -> DiffPoly:
    """Apply the (graded) derivation fixed by ``image`` on generators.

    ``image(code)`` returns the image of a single generator or ``None`` for
    zero.  An odd derivation picks up ``(-1)`` for every odd factor it
    passes.
    """
    out: dict = {}
    mul = kernels.mul
    for f, c in p.terms.items():
        odd_before = 0
        for idx, x in enumerate(f):
            img = image(x)
            if img is not None and img.terms:
                sign0 = -1 if (odd and odd_before & 1) else 1
                left, right = f[:idx], f[idx + 1:]
                for fi, ci in img.terms.items():
                    s1, g = mul(left, fi)
                    if not s1:
                        continue
                    s2, g = mul(g, right)
                    if s2:
                        _accumulate(out, g, sign0 * s1 * s2 * c * ci)
            odd_before += x & 1
    return DiffPoly(out)


def substitute(p: DiffPoly, image: Callable[[int], Optional[DiffPoly]]) -> DiffPoly:
    """Ring homomorphism replacing each generator by ``image(code)``.

    ``image`` returning ``None`` keeps the generator.  Images must preserve
    parity for the result to be well defined.
    """
    out = DiffPoly()
    cache: dict = {}
    for f, c in p.terms.items():
        term = DiffPoly.constant(c)
        for x in f:
            if x not in cache:
                img = image(x)
                cache[x] = DiffPoly({(x,): Fraction(1)}) if img is None else img
            term = term * cache[x]
            if not term.terms:
                break
        out = out + term
    return out


@dataclass(frozen=True)
class TruncationPolicy:
    max_insertions: int = 8
    max_level: int = 3
    max_degree: int = 8
    max_der: int = 2

    def __post_init__(self):
        if self.max_insertions < 3:
            raise ValueError("max_insertions must be at least 3")
        if self.max_level < 0 or self.max_der < 0:
            raise ValueError("max_level and max_der must be non-negative")
        if self.max_degree < 1:
            raise ValueError("max_degree must be positive")

    @classmethod
    def parse(cls, text: str) -> "TruncationPolicy":
        """Parse ``"N,K,D,M"``."""
        parts = [int(x) for x in text.split(",")]
        if len(parts) != 4:
            raise ValueError("truncation must be N,K,D,M")
        return cls(*parts)

    def as_list(self) -> list:
        return [self.max_insertions, self.max_level, self.max_degree, self.max_der]


def truncate(p: DiffPoly, t: TruncationPolicy) -> DiffPoly:
    def keep(f):
        if len(f) > t.max_degree:
            return False
        for c in f:
            if level_of(c) > t.max_level or der_of(c) > t.max_der:
                return False
        return True

    return p.filter(keep)


# ---- serialization ---------------------------------------------------

def rational_str(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_text(p: DiffPoly) -> str:
    """Canonical text form ``coeff * d^m(b[alpha][k]) * ...`` joined by ``+``."""
    if not p.terms:
        return "0"
    parts = []
    for f in sorted(p.terms):
        items = [rational_str(p.terms[f])] + [str(decode(x)) for x in f]
        parts.append(" * ".join(items))
    return " + ".join(parts)


_FACTOR_RE = re.compile(r"^(?:d\^(\d+)\()?(b|eta|c)\[(\d+)\]\[(\d+)\]\)?$")


def from_text(text: str) -> DiffPoly:
    text = text.strip()
    if text == "0":
        return DiffPoly()
    items = []
    for term in text.split(" + "):
        pieces = [s.strip() for s in term.split(" * ")]
        coeff = Fraction(pieces[0])
        seq = []
        for piece in pieces[1:]:
            m = _FACTOR_RE.match(piece)
            if not m:
                raise ValueError(f"cannot parse factor {piece!r}")
            der, kind, alpha, level = m.groups()
            seq.append(encode(_KIND_BY_NAME[kind], int(alpha), int(level), int(der or 0)))
        items.append((coeff, seq))
    return DiffPoly.from_terms(items)


def to_json_obj(p: DiffPoly) -> list:
    out = []
    for f in sorted(p.terms):
        factors = []
        for x in f:
            g = decode(x)
            factors.append([_KIND_NAMES[g.kind], g.alpha, g.level, g.der])
        out.append({"coeff": rational_str(p.terms[f]), "factors": factors})
    return out


def from_json_obj(obj: list) -> DiffPoly:
    items = []
    for term in obj:
        seq = []
        for kind, alpha, level, der in term["factors"]:
            k = _KIND_BY_NAME[kind] if isinstance(kind, str) else Kind(kind)
            seq.append(encode(k, alpha, level, der))
        items.append((Fraction(term["coeff"]), seq))
    return DiffPoly.from_terms(items)


def to_json(p: DiffPoly) -> str:
    return json.dumps(to_json_obj(p), separators=(",", ":"))


def from_json(text: str) -> DiffPoly:
    return from_json_obj(json.loads(text))
