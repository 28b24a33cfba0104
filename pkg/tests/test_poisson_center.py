from __future__ import annotations

import itertools
import random

import pytest

from modlie.errors import DivisibilityError, StructuralError
from modlie.exact_linalg import Ring, echelonize
from modlie.lie_core import RestrictedStructure, restricted_structure
from modlie.parsing import load_bundled, parse_sym
from modlie.pbw import ad_action, is_central, pbw_context
from modlie.poisson_center import (
    bracket_of_lifts,
    center_basis,
    center_freeness_report,
    central_check,
    deformation_bracket,
    divisibility_check,
    kac_radul_check,
    lift_context,
    p_center_embed,
    p_center_image,
    random_lift,
)

SL2 = load_bundled("sl2")


def casimir(ctx):
    e, f, h = (ctx.gen(s) for s in "efh")
    return 4 * f * e + h * h + 2 * h


def test_p_center_image_examples():
    rs = restricted_structure(SL2, 5)
    ctx = pbw_context(SL2, rs.ring)
    e, h = ctx.gen("e"), ctx.gen("h")
    assert p_center_image(rs, "h") == h ** 5 - h
    assert p_center_image(rs, "e") == e ** 5
    ab = load_bundled("abelian2")
    rs_ab = restricted_structure(ab, 3)
    a, b = (pbw_context(ab, rs_ab.ring).gen(i) for i in range(2))
    assert p_center_image(rs_ab, {0: 1, 1: 2}) == (a + 2 * b) ** 3


def test_p_center_embed_examples():
    rs = restricted_structure(SL2, 5)
    ctx = pbw_context(SL2, rs.ring)
    assert p_center_embed(rs, parse_sym("e*f", SL2.basis, rs.ring)) == p_center_image(rs, "e") * p_center_image(rs, "f")
    assert p_center_embed(rs, parse_sym("1", SL2.basis, rs.ring)) == ctx.one()


@pytest.mark.parametrize("name", ["sl2", "sl3", "heis3", "b2"])
@pytest.mark.parametrize("p", [3, 5])
def test_p_center_additive_on_basis_pairs(name, p):
    g = load_bundled(name)
    rs = restricted_structure(g, p)
    for i, j in itertools.combinations(range(g.dim), 2):
        lhs = p_center_image(rs, {i: 1, j: 1})
        assert lhs == p_center_image(rs, i) + p_center_image(rs, j)
        # direct oracle: (x_i + x_j)^p - (x_i + x_j)^[p] expanded without Jacobson's formula
        ctx = pbw_context(g, rs.ring)
        assert is_central(lhs)
        assert lhs == (ctx.gen(i) + ctx.gen(j)) ** p - ctx.from_vector(_pmap_sum(rs, i, j))


def _pmap_sum(rs, i, j):
    from modlie.lie_core import pmap_extend

    return pmap_extend(rs, {i: 1, j: 1})


def test_center_examples():
    rs = restricted_structure(SL2, 3)
    chunk = center_basis(rs, 3)
    assert chunk.dim == 5
    ctx = chunk.ctx
    e, f, h = (ctx.gen(s) for s in "efh")
    listed = [ctx.one(), casimir(ctx), e ** 3, f ** 3, h ** 3 - h]
    assert all(chunk.contains(u) for u in listed)
    vecs = [chunk.index.to_vector(u) for u in listed]
    assert echelonize(vecs, rs.ring, len(chunk.index)).rank == 5
    ab = load_bundled("abelian2")
    assert center_basis(restricted_structure(ab, 5), 2).dim == 6
    h3 = load_bundled("heis3")
    assert center_basis(restricted_structure(h3, 3), 1).dim == 2


def test_center_h3_matches_monomial_oracle():
    h3 = load_bundled("heis3")
    chunk = center_basis(restricted_structure(h3, 3), 3)
    # F_3[x^3, y^3, z] within degree 3: 1, z, z^2, z^3, x^3, y^3
    oracle = [(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 0, 3), (3, 0, 0), (0, 3, 0)]
    assert chunk.dim == len(oracle)
    assert all(chunk.contains(chunk.ctx.monomial(m)) for m in oracle)


@pytest.mark.parametrize("name,p,d", [("sl2", 3, 6), ("sl2", 5, 6), ("heis3", 3, 4), ("b2", 3, 6), ("sl3", 3, 3)])
def test_center_rows_are_central_and_closed(name, p, d):
    chunk = center_basis(restricted_structure(load_bundled(name), p), d)
    elems = chunk.elements()
    assert central_check(elems) == []
    degs = [chunk.row_degree(k) for k in range(len(elems))]
    for i, j in itertools.combinations(range(len(elems)), 2):
        if degs[i] + degs[j] <= d:
            assert chunk.contains(elems[i] * elems[j])


def test_freeness_examples():
    rs = restricted_structure(SL2, 3)
    delta = casimir(pbw_context(SL2, rs.ring))
    assert center_freeness_report(rs, [delta], 4)["verdict"] == "PASS"
    bad = center_freeness_report(rs, [delta * delta], 4)
    assert bad["verdict"] == "FAIL" and bad["first_failing_degree"] == 2
    ab = load_bundled("abelian1")
    rs1 = restricted_structure(ab, 3)
    x = pbw_context(ab, rs1.ring).gen(0)
    assert center_freeness_report(rs1, [x], 3)["verdict"] == "PASS"
    with pytest.raises(StructuralError):
        center_freeness_report(rs, [pbw_context(SL2, rs.ring).gen(0)], 3)


def test_deformation_bracket_examples():
    rs = restricted_structure(SL2, 5)
    z, x = p_center_image(rs, "h"), p_center_image(rs, "e")
    assert deformation_bracket(z, x) == x.scale(-2)
    assert deformation_bracket(x, x).is_zero()
    h3 = load_bundled("heis3")
    rs3 = restricted_structure(h3, 3)
    ctx = pbw_context(h3, rs3.ring)
    assert deformation_bracket(ctx.gen("x") ** 3, ctx.gen("z")).is_zero()
    e, f = pbw_context(SL2, rs.ring).gen("e"), pbw_context(SL2, rs.ring).gen("f")
    with pytest.raises(DivisibilityError):
        deformation_bracket(e, f)


@pytest.mark.parametrize("name", ["sl2", "sl3", "heis3", "b2", "abelian3"])
@pytest.mark.parametrize("p", [3, 5])
def test_kac_radul(name, p):
    rep = kac_radul_check(restricted_structure(load_bundled(name), p), samples=3)
    assert rep["verdict"] == "PASS", rep["failures"]


def test_h3_x_y_bracket():
    h3 = load_bundled("heis3")
    for p in (3, 5):
        rs = restricted_structure(h3, p)
        ctx = pbw_context(h3, rs.ring)
        x, y, z = (ctx.gen(s) ** p for s in "xyz")
        assert deformation_bracket(x, y) == -z


def test_kac_radul_detects_wrong_pmap():
    rs = restricted_structure(SL2, 5)
    bad = RestrictedStructure(SL2, 5, ({}, {}, {}), "explicit")
    assert kac_radul_check(rs)["verdict"] == "PASS"
    assert kac_radul_check(bad)["verdict"] == "FAIL"


@pytest.fixture(scope="module")
def chunk6():
    return center_basis(restricted_structure(SL2, 3), 6)


def _pairs(chunk, d):
    elems = chunk.elements()
    degs = [chunk.row_degree(k) for k in range(len(elems))]
    return [(elems[i], elems[j]) for i, j in itertools.combinations(range(len(elems)), 2) if degs[i] + degs[j] <= d]


def test_divisibility(chunk6):
    rep = divisibility_check(chunk6)
    assert rep["verdict"] == "PASS" and rep["pairs"] > 0


def test_lift_independence(chunk6):
    rng = random.Random(7)
    for a, b in _pairs(chunk6, 6)[:15]:
        ref = deformation_bracket(a, b)
        for _ in range(3):
            assert bracket_of_lifts(random_lift(a, rng), random_lift(b, rng)) == ref


def test_bracket_properties(chunk6):
    elems = [u for u in chunk6.elements() if u.degree() <= 3]
    for a, b, c in itertools.combinations(elems, 3):
        ab = deformation_bracket(a, b)
        assert is_central(ab)
        assert ab == -deformation_bracket(b, a)
        if a.degree() + b.degree() + c.degree() <= 9:
            assert deformation_bracket(a, b * c) == deformation_bracket(a, b) * c + b * deformation_bracket(a, c)
        jac = (deformation_bracket(a, deformation_bracket(b, c)) + deformation_bracket(b, deformation_bracket(c, a))
               + deformation_bracket(c, deformation_bracket(a, b)))
        assert jac.is_zero()


def test_lift_context_rejects_non_prime_field():
    with pytest.raises(StructuralError):
        lift_context(pbw_context(SL2, Ring.mod_p2(3)))
