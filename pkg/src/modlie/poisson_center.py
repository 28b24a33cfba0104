"""The p-center, bounded-degree centers and the deformation Poisson bracket."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DivisibilityError, StructuralError
from .exact_linalg import EchelonBasis, Ring, echelonize, nullspace
from .lie_core import RestrictedStructure, bracket, pmap_extend
from .pbw import (
    DEFAULT_MONOMIAL_CAP,
    MonomialIndex,
    PBWContext,
    UEAElement,
    ad_action,
    format_element,
    is_central,
    monomials_of_degree,
    pbw_context,
)
from .sym_poisson import SymElement


def fp_context(rs: RestrictedStructure) -> PBWContext:
    return pbw_context(rs.algebra, rs.ring)


def p_center_image(rs: RestrictedStructure, v) -> UEAElement:
    """``v^p - v^[p]`` for ``v`` a basis index, symbol or coordinate dict."""
    ctx = fp_context(rs)
    if isinstance(v, str):
        v = rs.algebra.index(v)
    if isinstance(v, int):
        return ctx.gen(v) ** rs.p - ctx.from_vector(rs.values[v])
    v = {k: rs.ring(c) for k, c in v.items() if rs.ring(c)}
    return ctx.from_vector(v) ** rs.p - ctx.from_vector(pmap_extend(rs, v))


class PCenterEmbedding:
    """The algebra map i: Sym(g_p) -> Z_p(g_p), x -> x^p - x^[p]."""

    def __init__(self, rs: RestrictedStructure):
        self.rs = rs
        self.ctx = fp_context(rs)
        self.gens = [p_center_image(rs, i) for i in range(rs.algebra.dim)]
        self._powers: dict = {}

    def _power(self, i: int, a: int) -> UEAElement:
        key = (i, a)
        if key not in self._powers:
            self._powers[key] = self.ctx.one() if a == 0 else self._power(i, a - 1) * self.gens[i]
        return self._powers[key]

    def monomial(self, m: Sequence[int]) -> UEAElement:
        out = self.ctx.one()
        for i, a in enumerate(m):
            if a:
                out = out * self._power(i, a)
        return out

    def __call__(self, s: SymElement) -> UEAElement:
        ring = self.rs.ring
        if s.nvars != self.rs.algebra.dim:
            raise StructuralError("polynomial does not match the algebra")
        out = self.ctx.zero()
        for m, c in s.terms.items():
            c = ring(c) if s.ring.kind in ("Q", "Z") else c % ring.p
            # Frobenius-twisted scalars: c^p, which equals c on F_p
            out = out + self.monomial(m).scale(pow(c, ring.p, ring.p))
        return out


def p_center_embed(rs: RestrictedStructure, s: SymElement) -> UEAElement:
    return PCenterEmbedding(rs)(s)


# ---------------------------------------------------------------------------
# bounded centers


@dataclass
class CenterChunk:
    """Echelon basis of Z(U g_p) within filtration degree <= d."""

    p: int
    d: int
    ctx: PBWContext
    index: MonomialIndex
    basis: EchelonBasis
    counits: list = field(default_factory=list)

    def elements(self) -> list[UEAElement]:
        return [self.index.from_vector(self.ctx, r) for r in self.basis.rows]

    def row_degree(self, k: int) -> int:
        return self.index.degree_of(self.basis.pivots[k])

    def dims_by_degree(self) -> list[int]:
        """``dim Z ∩ F_{<=D}`` for D = 0..d (pivots are leading monomials)."""
        degs = [self.row_degree(k) for k in range(self.basis.rank)]
        return [sum(1 for x in degs if x <= dd) for dd in range(self.d + 1)]

    def contains(self, u: UEAElement) -> bool:
        return self.basis.contains(self.index.to_vector(u))

    @property
    def dim(self) -> int:
        return self.basis.rank


def ad_kernel(ctx: PBWContext, index: MonomialIndex, reduce=None, columns=None) -> EchelonBasis:
    """Common kernel of ad(x_i) on the span of ``columns`` (default: all monomials).

    ``reduce`` post-processes each image vector (used for quotient algebras).
    Returns vectors in ``index`` coordinates.
    """
    cols = list(range(len(index))) if columns is None else list(columns)
    rows: dict = {}
    for pos, col in enumerate(cols):
        m = index.monomials[col]
        for i in range(ctx.l):
            img = ctx.ad_mono(i, m)
            vec = {index.index[t]: c for t, c in img.items()}
            if reduce is not None:
                vec = reduce(vec)
            for k, c in vec.items():
                rows.setdefault((i, k), {})[pos] = c
    matrix = [rows[key] for key in sorted(rows)]
    if matrix:
        kern = nullspace(matrix, ctx.ring, len(cols))
    else:
        kern = echelonize([{k: 1} for k in range(len(cols))], ctx.ring, len(cols))
    lifted = [{cols[k]: c for k, c in r.items()} for r in kern.rows]
    return echelonize(lifted, ctx.ring, len(index))


def center_basis(rs: RestrictedStructure, d: int, cap: int = DEFAULT_MONOMIAL_CAP) -> CenterChunk:
    """Z(U g_p) ∩ F_{<=d} as the simultaneous kernel of ad(x_i), i over the basis."""
    if d < 0:
        raise StructuralError("degree cap must be non-negative")
    ctx = fp_context(rs)
    index = MonomialIndex(ctx.l, d, cap)
    basis = ad_kernel(ctx, index)
    zero = (0,) * ctx.l
    zero_col = index.index[zero]
    counits = [r.get(zero_col, 0) for r in basis.rows]
    return CenterChunk(rs.p, d, ctx, index, basis, counits)


# ---------------------------------------------------------------------------
# freeness over the p-center


def _exponent_tuples(n: int, bound: int):
    return itertools.product(range(bound), repeat=n)


def center_freeness_report(rs: RestrictedStructure, generators: Sequence[UEAElement], d: int,
                           chunk: CenterChunk | None = None) -> dict:
    """Compare dim Z ∩ F_{<=D} with the products i(m) * g^alpha (alpha_i < p) for D <= d."""
    p = rs.p
    ctx = fp_context(rs)
    gens = [ctx.coerce(g) for g in generators]
    for k, g in enumerate(gens):
        if not is_central(g):
            raise StructuralError(f"generator {k} ({format_element(g)}) is not central")
    if chunk is None or chunk.d < d:
        chunk = center_basis(rs, d)
    emb = PCenterEmbedding(rs)
    gdeg = [g.degree() for g in gens]
    products = []  # (degree, element, label)
    for alpha in _exponent_tuples(len(gens), p):
        base_deg = sum(a * dg for a, dg in zip(alpha, gdeg))
        if base_deg > d:
            continue
        galpha = ctx.one()
        for g, a in zip(gens, alpha):
            if a:
                galpha = galpha * g ** a
        max_m = (d - base_deg) // p
        for k in range(max_m + 1):
            for m in monomials_of_degree(ctx.l, k):
                products.append((p * k + base_deg, emb.monomial(m) * galpha, (m, alpha)))
    actual = chunk.dims_by_degree()
    table = []
    first_fail = None
    outside = [lab for deg, u, lab in products if not chunk.contains(u)]
    for dd in range(d + 1):
        chosen = [chunk.index.to_vector(u) for deg, u, _ in products if deg <= dd]
        r = echelonize(chosen, rs.ring, len(chunk.index)).rank if chosen else 0
        ok = r == len(chosen) == actual[dd]
        table.append({"degree": dd, "center_dim": actual[dd], "predicted": len(chosen), "rank_of_products": r})
        if not ok and first_fail is None:
            first_fail = dd
    passed = first_fail is None and not outside
    return {
        "verdict": "PASS" if passed else "FAIL",
        "first_failing_degree": first_fail,
        "table": table,
        "products_outside_center": len(outside),
        "scope": f"within filtration degree <= {d} over F_{p}",
    }


# ---------------------------------------------------------------------------
# deformation bracket


def lift_context(ctx: PBWContext) -> PBWContext:
    if ctx.ring.kind != "Fp":
        raise StructuralError(f"lifting needs an F_p context, got {ctx.ring}")
    return pbw_context(ctx.algebra, Ring.mod_p2(ctx.ring.p))


def divide_by_p(u: UEAElement, target: PBWContext) -> UEAElement:
    """Coefficientwise exact division by p from Z/p^2 to F_p."""
    p = target.ring.p
    terms = {}
    for m, c in u.terms.items():
        if c % p:
            raise DivisibilityError(
                f"coefficient {c} of {m} is not divisible by {p}: inputs were not both central"
            )
        terms[m] = c // p
    return UEAElement(target, {m: c for m, c in terms.items() if c})


def bracket_of_lifts(a_lift: UEAElement, b_lift: UEAElement) -> UEAElement:
    """(1/p)[a~, b~] mod p for explicit Z/p^2 lifts."""
    ctx2 = a_lift.ctx
    if ctx2.ring.kind != "Zp2":
        raise StructuralError("lifts must live over Z/p^2")
    comm = a_lift * b_lift - b_lift * a_lift
    return divide_by_p(comm, pbw_context(ctx2.algebra, Ring.mod_p(ctx2.ring.p)))


def deformation_bracket(a: UEAElement, b: UEAElement, check_output: bool = False) -> UEAElement:
    """Deformation Poisson bracket of two central elements over F_p.

    Raises DivisibilityError when the lifted commutator is not divisible by p,
    which happens for non-central inputs.
    """
    if not a.ctx.same_as(b.ctx):
        raise StructuralError("bracket operands live in different contexts")
    ctx2 = lift_context(a.ctx)
    out = bracket_of_lifts(ctx2.coerce(a), ctx2.coerce(b))
    if check_output and not is_central(out):
        raise StructuralError("deformation bracket produced a non-central element")
    return out


def random_lift(u: UEAElement, rng: random.Random, degree: int | None = None) -> UEAElement:
    """Canonical lift plus p times a random element supported on small monomials."""
    ctx2 = lift_context(u.ctx)
    p = u.ring.p
    base = ctx2.coerce(u)
    d = u.degree() if degree is None else degree
    monos = list(u.terms) or [(0,) * u.ctx.l]
    extra = [tuple(rng.randrange(d + 1 if k == j else 1) for k in range(u.ctx.l)) for j in range(u.ctx.l)]
    noise = {}
    for m in monos + extra:
        noise[m] = p * rng.randrange(p)
    return base + ctx2.element(noise)


def kac_radul_check(rs: RestrictedStructure, samples: int = 0, seed: int = 0) -> dict:
    """Check {i(a), i(b)} = -i([a, b]) on all basis pairs and ``samples`` random pairs."""
    g, p, ring = rs.algebra, rs.p, rs.ring
    pairs = [({i: 1}, {j: 1}) for i, j in itertools.combinations(range(g.dim), 2)]
    rng = random.Random(seed)
    for _ in range(samples):
        a = {k: rng.randrange(p) for k in range(g.dim)}
        b = {k: rng.randrange(p) for k in range(g.dim)}
        pairs.append(({k: c for k, c in a.items() if c}, {k: c for k, c in b.items() if c}))
    failures = []
    checked = 0
    for a, b in pairs:
        lhs = deformation_bracket(p_center_image(rs, a), p_center_image(rs, b))
        rhs = -p_center_image(rs, bracket(g, a, b, ring))
        checked += 1
        if lhs != rhs:
            failures.append({
                "a": _label(g, a), "b": _label(g, b),
                "bracket": format_element(lhs), "expected": format_element(rhs),
            })
    return {
        "verdict": "PASS" if not failures else "FAIL",
        "pairs_checked": checked,
        "failures": failures,
        "pmap_source": rs.source,
    }


def _label(g, v: Mapping) -> str:
    return " + ".join(f"{c}*{g.basis[k]}" if c != 1 else g.basis[k] for k, c in sorted(v.items())) or "0"


def divisibility_check(chunk: CenterChunk, d: int | None = None) -> dict:
    """Every pair of center basis rows with degree sum <= d has a p-divisible lifted commutator."""
    d = chunk.d if d is None else d
    elems = chunk.elements()
    degs = [chunk.row_degree(k) for k in range(len(elems))]
    ctx2 = lift_context(chunk.ctx)
    p = chunk.p
    failures = []
    pairs = 0
    for i, j in itertools.combinations(range(len(elems)), 2):
        if degs[i] + degs[j] > d:
            continue
        pairs += 1
        a, b = ctx2.coerce(elems[i]), ctx2.coerce(elems[j])
        comm = a * b - b * a
        if any(c % p for c in comm.terms.values()):
            failures.append([i, j])
    return {"pairs": pairs, "failures": failures, "verdict": "PASS" if not failures else "FAIL"}


def central_check(elements: Sequence[UEAElement]) -> list[int]:
    """Indices of elements that fail ad(x_i)(u) = 0 for some basis x_i."""
    bad = []
    for k, u in enumerate(elements):
        if not all(ad_action(i, u).is_zero() for i in range(u.ctx.l)):
            bad.append(k)
    return bad
