import json
from fractions import Fraction
from itertools import product
from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvhier.bracket import Metric
from bvhier.diffring import DiffPoly, Kind, TruncationPolicy, b, encode, partial_derivative
from bvhier.tft import (
    DimensionError,
    PhaseSpaceData,
    PhaseSpaceError,
    PureGravity,
    Table,
    big_phase_series,
    check_trr,
    check_trr_all,
    insertion_key,
    pure_gravity,
    series_window,
    tabulate,
    with_table,
)

PG = pure_gravity()
P = lambda k: (k, 0)  # noqa: E731


def oracle_multinomial(levels):
    n = len(levels)
    if n < 3 or sum(levels) != n - 3:
        return 0
    out = factorial(n - 3)
    for k in levels:
        out //= factorial(k)
    return out


def oracle_series(d, fixed, n_max, level_max):
    """Expand ``<fixed exp(sum b O)>`` over ordered insertion tuples."""
    atoms = [(k, a) for k in range(level_max + 1) for a in range(d.dim)]
    out = DiffPoly()
    for r in range(n_max - len(fixed) + 1):
        for seq in product(atoms, repeat=r):
            v = d.correlator(list(fixed) + list(seq))
            if v:
                mono = DiffPoly.constant(Fraction(v, factorial(r)))
                for k, a in seq:
                    mono = mono * b(a, k)
                out = out + mono
    return out


def test_correlator_examples():
    assert PG.correlator([P(0)] * 3) == 1
    assert PG.correlator([P(1), P(0), P(0), P(0)]) == 1
    assert PG.correlator([P(1), P(0), P(0)]) == 0
    assert PG.correlator([P(0), P(0)]) == 0


@pytest.mark.parametrize("n", range(0, 11))
def test_pure_gravity_matches_multinomial(n):
    for levels in product(range(4), repeat=min(n, 6)) if n <= 6 else [(0,) * (n - 3) + (1, 1, 1), (n - 3,) + (0,) * (n - 1)]:
        assert PG.correlator([P(k) for k in levels]) == oracle_multinomial(levels)


@given(st.lists(st.integers(0, 4), min_size=3, max_size=9), st.randoms())
def test_pure_gravity_is_symmetric(levels, rnd):
    shuffled = list(levels)
    rnd.shuffle(shuffled)
    assert PG.correlator([P(k) for k in levels]) == PG.correlator([P(k) for k in shuffled])


def test_pure_gravity_requires_dimension_one():
    with pytest.raises(PhaseSpaceError):
        PhaseSpaceData(2, ["a", "b"], 0, Metric.identity(2), PureGravity())


def test_dimension_errors():
    with pytest.raises(DimensionError):
        PhaseSpaceData(2, ["a"], 0, Metric.identity(2), Table({}))
    with pytest.raises(DimensionError):
        PG.correlator([(0, 0), (0, 0), (0, 1)])


def test_table_drops_zero_and_short_keys():
    t = Table({((0, 0), (0, 0)): 5, ((0, 0),) * 3: 0, ((0, 0),) * 3 + ((1, 0),): "3/2"})
    assert list(t.entries.values()) == [Fraction(3, 2)]
    assert t(insertion_key([(1, 0), (0, 0), (0, 0), (0, 0)])) == Fraction(3, 2)


def test_json_round_trip(tmp_path):
    obj = {"dim": 1, "basis": ["P"], "identity": "P", "metric": [["1"]], "correlators": {"source": "pure_gravity"}}
    d = PhaseSpaceData.from_json_obj(obj)
    assert d.to_json_obj() == obj
    tab = with_table(d, tabulate(d, 6, 2))
    path = tmp_path / "t.json"
    path.write_text(json.dumps(tab.to_json_obj()))
    again = PhaseSpaceData.load(path)
    assert again.provider.entries == tab.provider.entries


@pytest.mark.parametrize(
    "obj",
    [
        {"dim": 1},
        {"dim": 1, "metric": [["1"]], "correlators": {"source": "oracle"}},
        {"dim": 1, "metric": [["x"]], "correlators": {"source": "pure_gravity"}},
    ],
)
def test_malformed_phase_space(obj):
    with pytest.raises(PhaseSpaceError):
        PhaseSpaceData.from_json_obj(obj)


@pytest.mark.parametrize("k", range(9))
def test_stationary_series_is_kdv_hamiltonian(k):
    t = TruncationPolicy(12, k, 12, 2)
    s = big_phase_series(PG, [P(k)], t, extra_max_level=0)
    assert s == b(0, 0) ** (k + 2) * Fraction(1, factorial(k + 2))


def test_free_energy_starts_cubic():
    t = TruncationPolicy(3, 0, 8, 2)
    assert big_phase_series(PG, [], t) == b(0, 0) ** 3 * Fraction(1, 6)
    t = TruncationPolicy(8, 3, 8, 2)
    assert min(len(f) for f in big_phase_series(PG, [], t).terms) == 3


def test_constant_term_is_three_point_function():
    two = with_table(
        PhaseSpaceData(2, ["a", "b"], 0, Metric([[0, 1], [1, 0]]), Table({})),
        Table({((0, 0), (0, 1), (0, 1)): 7}),
    )
    s = big_phase_series(two, [(0, 0), (0, 1), (0, 1)], TruncationPolicy(6, 1, 6, 2))
    assert s.constant_term() == 7


@pytest.mark.parametrize("fixed", [[], [P(0)], [P(1), P(0)], [P(2), P(0), P(1)]])
def test_series_matches_ordered_expansion(fixed):
    t = TruncationPolicy(7, 2, 7, 2)
    assert big_phase_series(PG, fixed, t) == oracle_series(PG, fixed, 7, 2)


@pytest.mark.parametrize("fixed,extra", [([], (0, 0)), ([P(0)], (1, 0)), ([P(1), P(0)], (2, 0))])
def test_derivative_rule(fixed, extra):
    t = TruncationPolicy(9, 3, 9, 2)
    lhs = partial_derivative(big_phase_series(PG, fixed, t), encode(Kind.B, extra[1], extra[0]))
    rhs = big_phase_series(PG, fixed + [extra], t)
    win = series_window(fixed + [extra], t)
    cut = lambda p: p.filter(lambda f: len(f) <= win)  # noqa: E731
    assert cut(lhs) == cut(rhs)


def test_trr_low_order_coefficients():
    t = TruncationPolicy(8, 3, 8, 2)
    r = check_trr(PG, 0, 0, 0, 0, 0, 0, t)
    assert r.ok and r.window == 5
    lhs = big_phase_series(PG, [P(1), P(0), P(0)], t)
    assert lhs.constant_term() == 0
    assert partial_derivative(lhs, encode(Kind.B, 0, 0)).constant_term() == 1


def test_pure_gravity_trr_on_full_window():
    rep = check_trr_all(PG, TruncationPolicy(10, 3, 10, 2))
    assert rep.window == 7
    assert rep.ok, rep.failing_degrees
    assert len(rep.results) == 4 * 10


def test_perturbed_table_breaks_trr():
    t = TruncationPolicy(8, 3, 8, 2)
    tab = tabulate(PG, 9, 4)
    entries = dict(tab.entries)
    entries[((0, 0), (0, 0), (0, 0), (1, 0))] = Fraction(2)
    bad = with_table(PG, Table(entries))
    rep = check_trr_all(bad, t)
    assert not rep.ok
    assert rep.failing_degrees == [1, 2, 3, 4, 5]
    assert check_trr_all(with_table(PG, tab), t).ok


def test_unverified_terms_are_separated():
    r = check_trr(PG, 0, 0, 0, 0, 0, 0, TruncationPolicy(5, 1, 5, 2))
    assert r.window == 2
    assert all(len(f) > 2 for f in r.unverified.terms)
