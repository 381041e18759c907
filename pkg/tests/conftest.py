import importlib
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bvhier import _kernels_py
from bvhier.diffring import DiffPoly, Kind, encode

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def _implementations():
    impls = [_kernels_py]
    try:
        impls.append(importlib.import_module("bvhier._kernels"))
    except ImportError:
        pass
    return impls


KERNEL_IMPLS = _implementations()


@pytest.fixture(params=KERNEL_IMPLS, ids=lambda m: m.IMPLEMENTATION)
def kernel_impl(request):
    return request.param


def generator_codes(kinds=(Kind.B, Kind.ETA), alphas=1, levels=2, max_der=2):
    return st.builds(
        lambda k, a, l, d: encode(k, a, l, 0 if k == Kind.C else d),
        st.sampled_from(kinds),
        st.integers(0, alphas - 1),
        st.integers(0, levels - 1),
        st.integers(0, max_der),
    )


def densities(kinds=(Kind.B,), alphas=1, levels=1, max_der=2, max_degree=5, max_terms=4, even=None):
    """Random densities without constant terms.

    ``even=True`` keeps only monomials with an even number of odd factors,
    ``even=False`` only odd ones, so the result has a definite parity.
    """
    coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(bool)
    mono = st.lists(generator_codes(kinds, alphas, levels, max_der), min_size=1, max_size=max_degree)
    if even is not None:
        want = 0 if even else 1
        mono = mono.filter(lambda m: sum(c & 1 for c in m) % 2 == want)
    return st.lists(st.tuples(coeff, mono), min_size=1, max_size=max_terms).map(
        lambda items: DiffPoly.from_terms(items)
    )


def frac(x) -> Fraction:
    return Fraction(x)
