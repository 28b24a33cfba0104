from __future__ import annotations

import dataclasses
import itertools

import pytest
from hypothesis import given, strategies as st

from modlie.errors import InvalidCharacter, MissingPMap, NotRestrictedUnderRealization
from modlie.exact_linalg import QQ, Ring, mat_mul
from modlie.lie_core import (
    LieAlgebraPresentation,
    RestrictedStructure,
    bracket,
    center_dim,
    derived_series_dims,
    is_nilpotent,
    killing_rank,
    lower_central_dims,
    make_character,
    pmap_extend,
    pmap_from_matrices,
    random_characters,
    restricted_structure,
    validate,
    verify_restricted,
)
from modlie.parsing import load_bundled

BUNDLED = ["sl2", "sl3", "heis3", "b2", "abelian1", "abelian2", "abelian3"]


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_algebras_validate(name):
    rep = validate(load_bundled(name))
    assert rep.ok, rep.failures


def test_antisymmetry_failure_reported():
    g = LieAlgebraPresentation("bad", ("x", "y"), [(0, 1, {0: 1}), (1, 0, {0: 1})])
    rep = validate(g)
    assert not rep.antisymmetry and not rep.ok
    assert rep.failures[0]["check"] == "antisymmetry"


def test_jacobi_failure_names_triple():
    g = LieAlgebraPresentation("bad", ("x", "y", "z"), [(0, 1, {1: 1}), (1, 2, {0: 1})])
    rep = validate(g)
    assert not rep.jacobi
    assert rep.failures[0]["triple"] == ["x", "y", "z"]


def test_realization_mismatch():
    g = LieAlgebraPresentation("bad", ("e", "f", "h"), [(0, 1, {2: 2})],
                               matrices=(((0, 1), (0, 0)), ((0, 0), (1, 0)), ((1, 0), (0, -1))))
    assert validate(g).realization is False


def test_killing_rank_examples(sl2, h3, abelian3):
    assert killing_rank(sl2, Ring.mod_p(5)) == 3
    assert killing_rank(abelian3, Ring.mod_p(5)) == 0
    assert killing_rank(h3, Ring.mod_p(5)) == 0


def killing_matrix_oracle(g, ring):
    """Trace form from explicit ad matrices."""
    n = g.dim
    ads = []
    for i in range(n):
        cols = [bracket(g, {i: 1}, {j: 1}, ring) for j in range(n)]
        ads.append([[cols[j].get(r, 0) for j in range(n)] for r in range(n)])
    return [[sum(mat_mul(ads[i], ads[j], ring)[k][k] for k in range(n)) % ring.p for j in range(n)] for i in range(n)]


def test_killing_form_sl2_determinant(sl2):
    k = killing_matrix_oracle(sl2, Ring.mod_p(5))
    # K(e,f) = 4, K(h,h) = 8: det = -128
    det = (k[0][0] * (k[1][1] * k[2][2] - k[1][2] * k[2][1]) - k[0][1] * (k[1][0] * k[2][2] - k[1][2] * k[2][0])
           + k[0][2] * (k[1][0] * k[2][1] - k[1][1] * k[2][0]))
    assert det % 5 == -128 % 5


def test_derived_series_examples(sl2, h3):
    assert derived_series_dims(sl2, Ring.mod_p(5)) == [3, 3]
    assert derived_series_dims(h3) == [3, 1, 0]
    assert derived_series_dims(load_bundled("abelian2")) == [2, 0]
    assert is_nilpotent(h3) and not is_nilpotent(sl2)
    assert lower_central_dims(h3) == [3, 1, 0]


@pytest.mark.parametrize("name", BUNDLED)
def test_series_weakly_decreasing(name):
    g = load_bundled(name)
    dims = derived_series_dims(g)
    assert all(a >= b for a, b in zip(dims, dims[1:]))
    assert len(dims) <= g.dim + 2


def test_pmap_examples(sl2, h3):
    rs = pmap_from_matrices(sl2, 5)
    e, f, h = rs.values
    assert e == {} and f == {} and h == {2: 1}
    for p in (3, 5, 7):
        assert all(v == {} for v in pmap_from_matrices(h3, p).values)


def test_pmap_escapes_span():
    # a unipotent Jordan block: its p-th power is the identity, outside the span
    g = LieAlgebraPresentation("t", ("a",), [], matrices=(((1, 1), (0, 1)),))
    with pytest.raises(NotRestrictedUnderRealization):
        pmap_from_matrices(g, 5)


def test_missing_pmap():
    g = LieAlgebraPresentation("x", ("a", "b"), [])
    with pytest.raises(MissingPMap):
        restricted_structure(g, 3)


def test_pmap_extend_matches_matrix_power(sl2):
    rs = restricted_structure(sl2, 3)
    ring = rs.ring
    v = {0: 1, 1: 1}
    e_plus_f = [[0, 1], [1, 0]]
    cube = mat_mul(mat_mul(e_plus_f, e_plus_f, ring), e_plus_f, ring)
    out = pmap_extend(rs, v)
    mats = sl2.matrices
    rebuilt = [[sum(c * mats[k][r][s] for k, c in out.items()) % 3 for s in range(2)] for r in range(2)]
    assert rebuilt == cube
    assert pmap_extend(rs, {2: 1}) == {2: 1}


def test_pmap_extend_abelian():
    g = load_bundled("abelian2")
    rs = RestrictedStructure(g, 5, ({0: 1}, {1: 2}), "explicit")
    assert pmap_extend(rs, {0: 2, 1: 3}) == {0: pow(2, 5, 5), 1: pow(3, 5, 5) * 2 % 5}


@given(st.lists(st.integers(0, 4), min_size=8, max_size=8))
def test_pmap_extend_sl3_against_matrices(coeffs):
    g = load_bundled("sl3")
    rs = restricted_structure(g, 5)
    ring = rs.ring
    v = {k: c for k, c in enumerate(coeffs) if c}
    n = 3
    m = [[sum(c * g.matrices[k][r][s] for k, c in v.items()) % 5 for s in range(n)] for r in range(n)]
    power = m
    for _ in range(4):
        power = mat_mul(power, m, ring)
    out = pmap_extend(rs, v)
    rebuilt = [[sum(c * g.matrices[k][r][s] for k, c in out.items()) % 5 for s in range(n)] for r in range(n)]
    assert rebuilt == power


@pytest.mark.parametrize("name", ["sl2", "sl3", "heis3", "b2"])
@pytest.mark.parametrize("p", [3, 5])
def test_verify_restricted_passes(name, p):
    rep = verify_restricted(restricted_structure(load_bundled(name), p))
    assert rep.ok, rep.failures


def test_verify_restricted_detects_corruption(sl2):
    rs = restricted_structure(sl2, 5)
    bad = dataclasses.replace(rs, values=(rs.values[0], rs.values[1], {}))
    rep = verify_restricted(bad)
    assert not rep.ok
    assert rep.failures[0]["witness"] == "h"


def test_characters(h3, sl2):
    chi = make_character(h3, 3, [1, 0, 0])
    assert chi({0: 2, 2: 1}) == 2
    with pytest.raises(InvalidCharacter):
        make_character(h3, 3, [0, 0, 1])
    with pytest.raises(InvalidCharacter):
        make_character(sl2, 5, [0, 0, 1])
    for chi in random_characters(h3, 5, 10, seed=3):
        assert chi.values[2] == 0
    assert all(c.values == (0, 0, 0) for c in random_characters(sl2, 5, 3))


@pytest.mark.parametrize("name", BUNDLED)
def test_jacobi_exhaustive_mod_p(name):
    g = load_bundled(name)
    for p in (3, 5):
        ring = Ring.mod_p(p)
        for i, j, k in itertools.combinations(range(g.dim), 3):
            total = {}
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                for key, val in bracket(g, {a: 1}, bracket(g, {b: 1}, {c: 1}, ring), ring).items():
                    total[key] = (total.get(key, 0) + val) % p
            assert not any(total.values())


def test_center_dim(h3, sl2):
    assert center_dim(h3, QQ) == 1
    assert center_dim(sl2, Ring.mod_p(5)) == 0
