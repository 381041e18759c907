from fractions import Fraction
from math import factorial
from pathlib import Path

import pytest

from bvhier.bracket import Metric
from bvhier.diffring import Kind, TruncationPolicy, b, encode, eta, kind_of, partial_derivative
from bvhier.hierarchy import (
    build_master,
    commutation_matrix,
    mc_residual,
    stationary_hamiltonians,
    stationary_restrict,
)
from bvhier.tft import PhaseSpaceData, Table, check_trr_all, pure_gravity, tabulate, with_table

DATA = Path(__file__).resolve().parent.parent / "data"
PG = pure_gravity()
T = TruncationPolicy(8, 3, 8, 2)
b0 = b(0, 0)


@pytest.fixture(scope="module")
def pg_table():
    return tabulate(PG, 9, 4)


def perturbed(table, key, delta):
    entries = dict(table.entries)
    entries[key] = entries.get(key, 0) + Fraction(delta)
    return with_table(PG, Table(entries))


def test_master_low_order():
    m = build_master(PG, TruncationPolicy(4, 0, 4, 2), extra_max_level=0)
    assert m.I.rep == eta(0, 0) * b0 * b0 * Fraction(1, 2)
    assert m.window == 4


def test_master_is_linear_in_eta():
    m = build_master(PG, T)
    for f in m.I.rep.terms:
        assert sum(1 for c in f if c & 1) == 1
        assert sum(1 for c in f if kind_of(c) == Kind.ETA) == 1


def test_empty_table_gives_zero_master():
    d = with_table(PG, Table({}))
    m = build_master(d, T)
    assert m.I.rep.is_zero()
    assert mc_residual(m, d.metric).ok


def test_pure_gravity_mc_vanishes_on_window():
    rep = mc_residual(build_master(PG, T), PG.metric)
    assert rep.ok
    assert rep.window_degree == 5 and rep.max_eta_level == 2
    assert rep.inside.terms  # the identity is not vacuous before reduction
    for f in rep.inside.terms:
        assert len(f) <= rep.max_factors


def test_mc_needs_every_level():
    m = build_master(PG, T, extra_max_level=0)
    with pytest.raises(ValueError):
        mc_residual(m, PG.metric)


def test_mc_rejects_metric_of_wrong_size():
    with pytest.raises(ValueError):
        mc_residual(build_master(PG, T), Metric.identity(2))


@pytest.mark.parametrize(
    "key,delta,degrees",
    [
        (((0, 0), (0, 0), (0, 0), (1, 0)), 1, [1, 2, 3, 4, 5]),
        (((0, 0), (0, 0), (0, 0), (0, 0), (2, 0)), 1, [2, 3, 4, 5]),
        (((0, 0),) * 4 + ((1, 0), (1, 0)), Fraction(1, 2), [3, 4, 5]),
        (((0, 0),) * 3, 1, [1, 2, 3, 4, 5]),
        (((0, 0),) * 5 + ((3, 0),), -1, [3, 4, 5]),
    ],
)
def test_mc_and_trr_fail_together(pg_table, key, delta, degrees):
    d = perturbed(pg_table, key, delta)
    mc = mc_residual(build_master(d, T), d.metric)
    trr = check_trr_all(d, T)
    assert mc.failing_degrees == trr.failing_degrees == degrees


def test_unperturbed_table_passes(pg_table):
    d = with_table(PG, pg_table)
    assert mc_residual(build_master(d, T), d.metric).ok
    assert check_trr_all(d, T).ok


@pytest.mark.parametrize("k", range(9))
def test_kdv_hamiltonians(k):
    t = TruncationPolicy(max(8, k + 3), k, max(8, k + 3), 2)
    hams = stationary_hamiltonians(PG, t)
    assert [h.k for h in hams] == list(range(k + 1))
    assert hams[k].G == b0 ** (k + 2) * Fraction(1, factorial(k + 2))


def test_stationary_sector_is_linear_in_constants():
    res = stationary_restrict(build_master(PG, T), PG.metric)
    for f in res.I_S.terms:
        assert sum(1 for c in f if kind_of(c) == Kind.C) == 1
    assert res.consistent


def test_kdv_commutation_matrix():
    t = TruncationPolicy(9, 6, 9, 2)
    hams = stationary_hamiltonians(PG, t)
    cm = commutation_matrix(hams, PG.metric)
    assert cm.ok
    for i, h1 in enumerate(hams):
        for j, h2 in enumerate(hams):
            k, m = h1.k, h2.k
            assert cm.densities[i][j] == b0 ** (k + 1 + m) * b(0, 0, 1) * Fraction(1, factorial(k + 1) * factorial(m))


@pytest.fixture(scope="module")
def two_point():
    return PhaseSpaceData.load(DATA / "phase_two_point.json")


def test_two_point_primary_hamiltonians(two_point):
    hams = stationary_hamiltonians(two_point, TruncationPolicy(8, 2, 8, 2))
    x, y = b(0, 0), b(1, 0)
    # primary potential F = x^3/3 + x y^2
    F = x ** 3 * Fraction(1, 3) + x * y * y
    G = {(h.k, h.alpha): h.G for h in hams}
    assert G[(0, 0)] == partial_derivative(F, encode(Kind.B, 0, 0))
    assert G[(0, 1)] == partial_derivative(F, encode(Kind.B, 1, 0))
    assert G[(0, 0)] == x * x + y * y


def test_two_point_commutes_and_satisfies_mc(two_point):
    t = TruncationPolicy(8, 3, 8, 2)
    hams = stationary_hamiltonians(two_point, t)
    assert commutation_matrix(hams, two_point.metric).ok
    assert check_trr_all(two_point, TruncationPolicy(7, 2, 7, 2)).ok


def test_broken_two_point_fails_to_commute():
    d = PhaseSpaceData.load(DATA / "broken_two_point.json")
    cm = commutation_matrix(stationary_hamiltonians(d, TruncationPolicy(8, 2, 8, 2)), d.metric)
    assert cm.nonzero
    assert not check_trr_all(d, TruncationPolicy(7, 2, 7, 2)).ok


def test_commutation_matrix_is_antisymmetric():
    d = PhaseSpaceData.load(DATA / "broken_two_point.json")
    cm = commutation_matrix(stationary_hamiltonians(d, TruncationPolicy(8, 2, 8, 2)), d.metric)
    n = len(cm.hamiltonians)
    for i in range(n):
        assert cm.entries[i][i] == 0
        for j in range(n):
            assert cm.entries[i][j] + cm.entries[j][i] == 0
