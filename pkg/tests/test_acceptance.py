"""Acceptance criteria, one test each; a summary line per criterion is printed at the end."""
from __future__ import annotations

import itertools
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from conftest import CRITERIA
from modlie.cli import central_generators, run
from modlie.cotangent import (
    central_extension_report,
    character_twist,
    charpoly_sweep,
    check_canonical_map,
    compare_invariants,
    cotangent_algebra,
    g_part_matrix,
    induced_automorphism,
)
from modlie.exact_linalg import QQ, Ring, poly_from_roots, solve_combination
from modlie.lie_core import bracket, random_characters, restricted_structure
from modlie.parsing import load_bundled, parse_uea
from modlie.pbw import Homomorphism, is_central, pbw_context
from modlie.poisson_center import (
    bracket_of_lifts,
    center_basis,
    center_freeness_report,
    deformation_bracket,
    divisibility_check,
    kac_radul_check,
    random_lift,
)

SL2 = load_bundled("sl2")
H3 = load_bundled("heis3")


@contextmanager
def criterion(n: int, title: str, limit: float):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"criterion {n} took {elapsed:.1f}s (limit {limit}s)"
        status = "PASS"
    finally:
        CRITERIA.append((n, title, status, time.perf_counter() - start))


def casimir(ctx):
    e, f, h = (ctx.gen(s) for s in "efh")
    return 4 * f * e + h * h + 2 * h


def sl2_hom(texts):
    ctx = pbw_context(SL2, QQ)
    return Homomorphism([parse_uea(t, ctx) for t in texts])


CARTAN = sl2_hom(["f", "e", "-h"])
TORUS = sl2_hom(["2*e", "1/2*f", "h"])
IDENTITY = sl2_hom(["e", "f", "h"])


def test_criterion_01_sl2_center_relation():
    with criterion(1, "sl2 center relation at p=3,5,7", 30):
        for p in (3, 5, 7):
            start = time.perf_counter()
            code, text = run(["sl2-suite", "-p", str(p)])
            assert code == 0, text
            # independent recomputation of the same identity
            ctx = pbw_context(SL2, Ring.mod_p(p))
            e, f, h = (ctx.gen(s) for s in "efh")
            x, y, z = e ** p, f ** p, h ** p - h
            c = casimir(ctx) + ctx.one()
            assert c ** p - 2 * c ** ((p + 1) // 2) + c == 4 * x * y + z * z
            assert time.perf_counter() - start < 10


@pytest.mark.parametrize("name", ["sl2", "sl3", "heis3", "b2"])
def test_criterion_02_kac_radul(name):
    with criterion(2, f"Kac-Radul identity on basis pairs ({name}, p=3,5)", 60):
        g = load_bundled(name)
        for p in (3, 5):
            rs = restricted_structure(g, p)
            rep = kac_radul_check(rs)
            assert rep["verdict"] == "PASS", rep["failures"]
            assert rep["pairs_checked"] == g.dim * (g.dim - 1) // 2


def _sl2_structure_in_kappa_basis(cot, ring):
    """Coordinates of [kappa x_i, kappa x_j] in the kappa basis."""
    cols = [{a: row[i] for a, row in enumerate(cot.canonical_map) if row[i]} for i in range(3)]
    out = {}
    for i, j in itertools.combinations(range(3), 2):
        coeffs = solve_combination(cols, bracket(cot, cols[i], cols[j], ring), ring)
        assert coeffs is not None
        out[(i, j)] = {k: c for k, c in coeffs.items() if c}
    return out


@pytest.mark.parametrize("p", [3, 5])
def test_criterion_03_sl2_cotangent(p):
    with criterion(3, f"sl2 cotangent structure at p={p}", 30):
        rs = restricted_structure(SL2, p)
        ring = rs.ring
        gens = [casimir(pbw_context(SL2, ring))]
        cm = cotangent_algebra(rs, gens, None, "m")
        assert cm.dim == 4
        ext = central_extension_report(cm, rs)
        assert ext["verdict"] == "PASS" and ext["center_dim"] == 1 and ext["generator_classes_central"]
        assert check_canonical_map(cm, rs)["verdict"] == "PASS"
        expected = {k: {a: ring.normalize(c) for a, c in v.items()} for k, v in SL2.constants.items() if k[0] < k[1]}
        assert _sl2_structure_in_kappa_basis(cm, ring) == expected
        cn = cotangent_algebra(rs, gens, None, "n")
        rep = check_canonical_map(cn, rs)
        assert cn.dim == 3 and rep["verdict"] == "PASS" and rep["bijective"]


def predicted_center_dims(p: int, gen_degree: int, l: int, d: int) -> list[int]:
    """Count of i(x)^m * Delta^alpha (alpha < p) of degree <= D, for D = 0..d."""
    out = []
    for top in range(d + 1):
        count = 0
        for alpha in range(p):
            rest = top - alpha * gen_degree
            if rest < 0:
                continue
            k = rest // p
            # monomials in l variables of degree <= k
            count += sum(len(list(itertools.combinations_with_replacement(range(l), j))) for j in range(k + 1))
        out.append(count)
    return out


def test_criterion_04_center_freeness():
    with criterion(4, "sl2 center freeness at p=3, d<=6", 30):
        rs = restricted_structure(SL2, 3)
        chunk = center_basis(rs, 6)
        rep = center_freeness_report(rs, [casimir(chunk.ctx)], 6, chunk)
        assert rep["verdict"] == "PASS"
        assert chunk.dims_by_degree() == predicted_center_dims(3, 2, 3, 6)
        assert [row["center_dim"] for row in rep["table"]] == predicted_center_dims(3, 2, 3, 6)


def test_criterion_05_deformation_bracket_well_defined():
    with criterion(5, "deformation bracket divisibility and lift independence", 60):
        chunk = center_basis(restricted_structure(SL2, 3), 6)
        div = divisibility_check(chunk, 6)
        assert div["verdict"] == "PASS" and div["pairs"] > 0
        elems = chunk.elements()
        pairs = [(a, b) for a, b in itertools.combinations(range(len(elems)), 2)
                 if chunk.row_degree(a) + chunk.row_degree(b) <= 6]
        rng = random.Random(20)
        for _ in range(20):
            i, j = rng.choice(pairs)
            a, b = elems[i], elems[j]
            ref = deformation_bracket(a, b)
            assert is_central(ref)
            assert bracket_of_lifts(random_lift(a, rng), random_lift(b, rng)) == ref


@pytest.mark.parametrize("p", [3, 5])
def test_criterion_06_restriction_to_aut_g(p):
    with criterion(6, f"induced map on the g-part equals the linear part mod p (p={p})", 30):
        rs = restricted_structure(SL2, p)
        ring = rs.ring
        cot = cotangent_algebra(rs, [casimir(pbw_context(SL2, ring))], None, "m")
        for phi in (CARTAN, TORUS):
            linear = phi.degree1_matrix()
            expected = [[ring(x) for x in row] for row in linear]
            ind = induced_automorphism(phi, cot, rs)
            assert ind.is_automorphism
            assert g_part_matrix(ind, cot, 3) == expected


@pytest.mark.parametrize("p", [3, 5])
def test_criterion_07_character_twist(p):
    with criterion(7, f"character twists of h3 at p={p}", 30):
        rs = restricted_structure(H3, p)
        chars = random_characters(H3, p, 5, seed=7)
        assert len(chars) == 5
        for chi in chars:
            rep = character_twist(rs, chi)
            assert rep["verdict"] == "PASS"
            assert rep["invertible"] and rep["preserves_brackets"] and rep["maps_m_onto_I_chi"]


def _gens(p):
    return [casimir(pbw_context(SL2, Ring.mod_p(p)))]


def test_criterion_08_charpoly_sweep():
    with criterion(8, "charpoly sweep for the Cartan involution and the identity", 30):
        cubed = {p: poly_from_roots([1, 1, 1], Ring.mod_p(p)) for p in (3, 5, 7)}
        res = charpoly_sweep(SL2, CARTAN, [3, 5, 7], _gens)
        assert [r["prime"] for r in res["per_prime"]] == [3, 5, 7]
        assert all(r["charpoly"] != cubed[r["prime"]] for r in res["per_prime"])
        res = charpoly_sweep(SL2, IDENTITY, [3, 5, 7], _gens)
        assert all(r["charpoly"] == cubed[r["prime"]] for r in res["per_prime"])


def test_criterion_09_compare():
    with criterion(9, "compare(sl2, h3) is DISTINGUISHED at p=3", 30):
        res = compare_invariants((SL2, H3), [3], lambda g, p: central_generators(g, Ring.mod_p(p)))
        assert res["verdict"] == "DISTINGUISHED" and res["distinguished_at"] == [3]


PROPERTY_MODULES = ["test_exact_linalg.py", "test_lie_core.py", "test_pbw.py",
                    "test_sym_poisson.py", "test_poisson_center.py", "test_cotangent.py"]


def test_criterion_10_property_suites():
    with criterion(10, "property suites pass standalone", 300):
        here = Path(__file__).parent
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *[str(here / m) for m in PROPERTY_MODULES]],
            capture_output=True, text=True, cwd=here.parent)
        assert proc.returncode == 0, proc.stdout[-3000:]
        assert " passed" in proc.stdout and "failed" not in proc.stdout
