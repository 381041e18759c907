"""Contraction data, tree sums and CME preservation on the fixtures."""

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from bvhier.diffring import DiffPoly
from bvhier.transfer.contraction import (
    Contraction,
    collapse_pairs,
    hodge_contraction,
    identity_contraction,
    induced_symplectic,
    propagator_kernel,
    relative_contraction,
    verify_compatibility,
    verify_contraction,
)
from bvhier.transfer.fixtures import (
    FixtureError,
    builtin_fixtures,
    cotangent_fixture,
    fixture_from_json,
    heisenberg,
    load_fixture,
    massey,
    sl2,
)
from bvhier.transfer.homotopy import flow_sum, skeleton_sum, transfer_interaction, tree_sum
from bvhier.transfer.spaces import (
    DGSpace,
    GradedSpace,
    arities,
    arity_at_most,
    pullback,
    verify_shifted_symplectic,
)

from oracles.labeled_trees import labeled_tree_sum

DATA = Path(__file__).resolve().parent.parent / "data"
FIXTURES = builtin_fixtures()
CAP = 6


@pytest.fixture(scope="module", params=sorted(FIXTURES))
def fixture(request):
    return FIXTURES[request.param]


def random_interaction(space, rng, arity_range=(3, 4), terms=6):
    items = []
    for _ in range(terms):
        n = rng.randint(*arity_range)
        items.append((Fraction(rng.randint(-3, 3), rng.randint(1, 3)), [space.x(rng.randrange(space.dim)) for _ in range(n)]))
    return DiffPoly.from_terms(items)


# ---- contraction data -------------------------------------------------------

def test_side_conditions(fixture):
    assert verify_shifted_symplectic(fixture.s).ok
    rep = verify_contraction(fixture.contraction)
    assert rep.ok, rep.failures
    assert verify_compatibility(fixture.contraction, fixture.s).ok


def test_induced_space_is_shifted_symplectic(fixture):
    target = induced_symplectic(fixture.contraction, fixture.s)
    if target.space.dim:
        assert verify_shifted_symplectic(target).ok


def test_broken_contraction_is_reported():
    s, _ = cotangent_fixture(massey())
    c = hodge_contraction(s.dg)
    bad = Contraction(c.E, c.H, c.i, c.pi, [[x * 2 for x in row] for row in c.P], c.QH)
    rep = verify_contraction(bad)
    assert "1 - i pi != QP + PQ" in rep.failures


def test_wrong_shape_is_reported():
    s, _ = cotangent_fixture(heisenberg())
    c = hodge_contraction(s.dg)
    bad = Contraction(c.E, c.H, c.i[:-1], c.pi, c.P, c.QH)
    assert verify_contraction(bad).failures == ["contraction matrices have the wrong shape"]


def test_hodge_onto_cohomology_of_sl2():
    s, _ = cotangent_fixture(sl2())
    c = hodge_contraction(s.dg)
    # zero differential: everything is harmonic
    assert c.H.dim == 6 and not any(any(r) for r in c.P)


def test_collapse_rejects_non_pair():
    s, _ = cotangent_fixture(heisenberg())
    with pytest.raises(ValueError):
        collapse_pairs(s.dg, [(0, 1)])


def test_relative_contraction_side_conditions():
    X = DGSpace(GradedSpace(("p", "q"), (0, 1)), [[0, 0], [1, 0]])
    cx = hodge_contraction(X)
    assert cx.H.dim == 0
    Y = cotangent_fixture(heisenberg())[0].dg
    rc = relative_contraction(cx, Y)
    assert verify_contraction(rc).ok
    assert rc.H.dim == 0 and rc.E.space.dim == 2 * Y.space.dim


def test_relative_contraction_of_acyclic_factor_kills_everything():
    X = DGSpace(GradedSpace(("p", "q"), (0, 1)), [[0, 0], [1, 0]])
    Y = DGSpace(GradedSpace(("y",), (-1,)), [[0]])
    rc = relative_contraction(hodge_contraction(X), Y)
    x0, x1 = rc.E.space.x(0), rc.E.space.x(1)
    I = DiffPoly.from_terms([(1, [x0, x1, x1])])
    assert pullback(I, rc.E.space, rc.H, rc.i).is_zero()


# ---- tree sums --------------------------------------------------------------

def test_tree_methods_agree_on_fixtures(fixture):
    A = propagator_kernel(fixture.contraction, fixture.s)
    sp = fixture.s.space
    trees = tree_sum(fixture.I, A, sp, CAP)
    assert trees == arity_at_most(skeleton_sum(fixture.I, A, sp, CAP), CAP)
    assert trees == flow_sum(fixture.I, A, sp, CAP)
    assert trees == labeled_tree_sum(fixture.I, A, sp, CAP)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("name", ["massey", "ternary_partial"])
def test_tree_methods_agree_on_random_interactions(name, seed):
    fx = FIXTURES[name]
    sp = fx.s.space
    I = random_interaction(sp, random.Random(seed))
    A = propagator_kernel(fx.contraction, fx.s)
    cap = 5
    trees = tree_sum(I, A, sp, cap)
    assert trees == labeled_tree_sum(I, A, sp, cap)
    assert trees == flow_sum(I, A, sp, cap)
    assert trees == arity_at_most(skeleton_sum(I, A, sp, cap), cap)


def test_zero_propagator_returns_the_interaction():
    s, I = cotangent_fixture(sl2())
    c = identity_contraction(s.dg)
    r = transfer_interaction(I, c, s, CAP)
    assert r.I_H == I


def test_acyclic_extension_restricts():
    fx = FIXTURES["heisenberg_acyclic_extension"]
    c = fx.contraction
    r = transfer_interaction(fx.I, c, fx.s, CAP)
    assert r.I_H == pullback(fx.I, fx.s.space, c.H, c.i)
    assert c.H.dim == fx.s.space.dim - 2


def test_massey_regression():
    fx = FIXTURES["massey"]
    r = transfer_interaction(fx.I, fx.contraction, fx.s, CAP)
    assert arities(r.I_H) == [4]
    assert r.target.space.format(r.I_H) == "1 * x[[u_a1]] * x[[u_a2]] * x[[u_b]] * x[[v_e]]"


def test_ternary_regression():
    fx = FIXTURES["ternary_partial"]
    r = transfer_interaction(fx.I, fx.contraction, fx.s, CAP)
    assert arities(r.I_H) == [3, 4]
    quartic = r.I_H.filter(lambda f: len(f) == 4)
    assert r.target.space.format(quartic) == "1 * x[u_a1] * x[u_a2] * x[u_b] * x[v_k]"
    assert r.cme_residual().is_zero()


def test_propagator_sign_is_detected():
    fx = FIXTURES["ternary_partial"]
    c, s = fx.contraction, fx.s
    A = propagator_kernel(c, s)
    minus = [[-x for x in row] for row in A]
    W = tree_sum(fx.I, minus, s.space, CAP)
    I_H = pullback(W, s.space, c.H, c.i)
    assert not induced_symplectic(c, s).cme_residual(I_H).is_zero()


def test_cme_preserved(fixture):
    before = fixture.s.cme_residual(fixture.I)
    r = transfer_interaction(fixture.I, fixture.contraction, fixture.s, CAP)
    if fixture.expect_cme:
        assert before.is_zero()
        assert r.cme_residual().is_zero()
    else:
        assert not before.is_zero()


def test_at_least_five_cme_fixtures():
    assert sum(1 for fx in FIXTURES.values() if fx.expect_cme) >= 5


def test_arity_cap_validation():
    fx = FIXTURES["heisenberg"]
    with pytest.raises(ValueError):
        transfer_interaction(fx.I, fx.contraction, fx.s, 2)
    quad = DiffPoly.from_terms([(1, [fx.s.space.x(0), fx.s.space.x(3)])])
    with pytest.raises(ValueError):
        transfer_interaction(quad, fx.contraction, fx.s, CAP)
    with pytest.raises(ValueError):
        transfer_interaction(fx.I, fx.contraction, fx.s, CAP, method="loops")


def test_lost_arities_are_reported():
    fx = FIXTURES["massey"]
    quartic = DiffPoly.from_terms([(1, [fx.s.space.x(i) for i in (0, 1, 2, 3)])])
    r = transfer_interaction(fx.I + quartic, fx.contraction, fx.s, 3)
    assert r.lost_arities == [4]


# ---- JSON -------------------------------------------------------------------

@pytest.mark.parametrize("path", sorted(DATA.glob("transfer_*.json")), ids=lambda p: p.stem)
def test_json_fixtures_match_builtins(path):
    fx = load_fixture(path)
    ref = FIXTURES[fx.name]
    assert fx.I == ref.I
    assert fx.s.omega == ref.s.omega and fx.s.Q == ref.s.Q
    assert fx.contraction.P == ref.contraction.P


def test_explicit_fixture():
    obj = {
        "kind": "explicit",
        "basis": [["a", 0], ["b", 1]],
        "Q": [[0, 0], [0, 0]],
        "omega": [["0", "1"], ["-1", "0"]],
        "interaction": [{"coeff": "1/6", "vars": ["a", "a", "a"]}],
    }
    fx = fixture_from_json(obj)
    assert verify_shifted_symplectic(fx.s).ok
    r = transfer_interaction(fx.I, fx.contraction, fx.s, CAP)
    assert r.I_H == pullback(fx.I, fx.s.space, fx.contraction.H, fx.contraction.i)


def test_malformed_fixture():
    with pytest.raises(FixtureError):
        fixture_from_json({"kind": "dgla"})
    with pytest.raises(FixtureError):
        fixture_from_json({"kind": "nonsense"})
    with pytest.raises(FixtureError):
        fixture_from_json({"kind": "builtin", "name": "nonsense"})
