"""Cotangent Lie algebras of central augmentation ideals and the maps they induce.

Everything is computed inside a filtration slice ``F_{<=d}``.  Vectors are in
the coordinates of a :class:`~modlie.pbw.MonomialIndex`, whose column order
makes echelon pivots coincide with leading monomials.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import (
    DegreeCapTooSmall,
    NoGoodPrimes,
    NotNilpotent,
    PreservationFailure,
    StructuralError,
)
from .exact_linalg import (
    EchelonBasis,
    Ring,
    charpoly,
    echelonize,
    identity,
    mat_inverse,
    mat_mul,
    poly_from_roots,
    solve_combination,
    vec_axpy,
)
from .lie_core import (
    Character,
    RestrictedStructure,
    StructureConstants,
    abelianization_dim,
    bracket,
    center_dim,
    derived_series_dims,
    is_nilpotent,
    killing_rank,
    restricted_structure,
)
from .pbw import (
    DEFAULT_MONOMIAL_CAP,
    Homomorphism,
    MonomialIndex,
    PBWContext,
    UEAElement,
    ad_action,
    format_element,
    is_central,
    pbw_context,
)
from .poisson_center import (
    CenterChunk,
    PCenterEmbedding,
    ad_kernel,
    center_basis,
    deformation_bracket,
    fp_context,
)

SIGN_CONVENTION = "canonical map x -> -(x^p - x^[p]) mod square, a homomorphism by the negative sign of the p-center bracket"


@dataclass
class SubspaceBasis:
    """A subspace of F_{<=d} U g_p (or of its quotient model) in echelon form."""

    ctx: PBWContext
    index: MonomialIndex
    basis: EchelonBasis

    @property
    def dim(self) -> int:
        return self.basis.rank

    def elements(self) -> list[UEAElement]:
        return [self.index.from_vector(self.ctx, r) for r in self.basis.rows]

    def row_degree(self, k: int) -> int:
        return self.index.degree_of(self.basis.pivots[k])


def counit_kernel(ctx: PBWContext, index: MonomialIndex, rows: Sequence[dict]) -> EchelonBasis:
    """Rows of the span with zero constant term."""
    const = index.index[(0,) * ctx.l]
    ring = ctx.ring
    base = None
    out = []
    for r in rows:
        c = r.get(const, 0)
        if not c:
            out.append(r)
        elif base is None:
            base = (r, c)
        else:
            v = dict(r)
            vec_axpy(v, -c * ring.inv(base[1]), base[0], ring)
            out.append(v)
    return echelonize(out, ring, len(index))


def augmentation_ideal(chunk: CenterChunk) -> SubspaceBasis:
    """m_p within degree d: the counit-zero part of the center, re-echelonized."""
    basis = counit_kernel(chunk.ctx, chunk.index, chunk.basis.rows)
    return SubspaceBasis(chunk.ctx, chunk.index, basis)


# ---------------------------------------------------------------------------
# quotient by central generators


class QuotientModel:
    """Bounded-degree model of B_p = U g_p / (g_1, ..., g_n).

    The ideal slice is spanned by ``g_i * m`` for monomials ``m`` with
    ``deg g_i + deg m <= d``; this is exact when the symbols of the g_i form a
    regular sequence.
    """

    def __init__(self, ctx: PBWContext, generators: Sequence[UEAElement], d: int, index: MonomialIndex | None = None):
        self.ctx = ctx
        self.d = d
        self.index = index or MonomialIndex(ctx.l, d)
        self.generators = [ctx.coerce(g) for g in generators]
        for k, g in enumerate(self.generators):
            if not is_central(g):
                raise StructuralError(f"quotient generator {k} is not central")
        vecs = []
        for g in self.generators:
            dg = g.degree()
            for m in self.index.monomials:
                if sum(m) + dg <= d:
                    vecs.append(self.index.to_vector(g * ctx.monomial(m)))
        self.ideal = echelonize(vecs, ctx.ring, len(self.index))
        pivots = set(self.ideal.pivots)
        self.free_columns = [k for k in range(len(self.index)) if k not in pivots]

    def reduce_vector(self, v: dict) -> dict:
        return self.ideal.reduce(v)

    def vector(self, u: UEAElement) -> dict:
        u = self.ctx.coerce(u)
        if u.degree() > self.d:
            raise DegreeCapTooSmall(f"element of degree {u.degree()} exceeds the cap {self.d}", u.degree())
        return self.reduce_vector(self.index.to_vector(u))

    def normal_form(self, u: UEAElement) -> UEAElement:
        return self.index.from_vector(self.ctx, self.vector(u))

    def in_ideal(self, u: UEAElement) -> bool:
        return not self.vector(u)

    def center(self) -> EchelonBasis:
        return ad_kernel(self.ctx, self.index, reduce=self.reduce_vector, columns=self.free_columns)


def quotient_normal_form(u: UEAElement, generators: Sequence[UEAElement], d: int) -> UEAElement:
    return QuotientModel(u.ctx, generators, d).normal_form(u)


# ---------------------------------------------------------------------------
# cotangent spaces


@dataclass
class CotangentAlgebra:
    """I / I^2 for a central ideal I, with the bracket induced by the deformation bracket."""

    p: int
    d: int
    kind: str  # "m", "n" or "twist"
    reps: list  # UEAElements (normal forms) spanning I / I^2
    table: dict  # {(a, b): {c: coeff}} full antisymmetric, over F_p
    canonical_map: list | None  # dim x l matrix, column i = class of -i(x_i)
    generator_classes: list = field(default_factory=list)  # coordinates of the g_i classes
    ideal_dim: int = 0
    square_dim: int = 0
    warnings: list = field(default_factory=list)
    coords: Callable | None = field(default=None, repr=False)
    reduce: Callable | None = field(default=None, repr=False)  # normal form of a U element
    in_ideal_center: Callable | None = field(default=None, repr=False)
    model: object = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.reps)

    @property
    def ring(self) -> Ring:
        return Ring.mod_p(self.p)

    def bracket_table(self, ring: Ring) -> dict:
        if ring != self.ring:
            raise StructuralError(f"cotangent algebra lives over {self.ring}")
        return self.table

    def structure(self) -> StructureConstants:
        return StructureConstants(self.dim, self.table, self.ring)

    def canonical_rank(self) -> int:
        if not self.canonical_map:
            return 0
        cols = [[row[i] for row in self.canonical_map] for i in range(len(self.canonical_map[0]))]
        return echelonize(cols, self.ring, self.dim).rank

    def to_dict(self, basis_names: Sequence[str] | None = None) -> dict:
        return {
            "kind": self.kind,
            "prime": self.p,
            "degree_cap": self.d,
            "dimension": self.dim,
            "ideal_dim_within_cap": self.ideal_dim,
            "square_dim_within_cap": self.square_dim,
            "representatives": [format_element(u) for u in self.reps],
            "structure_constants": _table_json(self.table),
            "canonical_map": self.canonical_map,
            "canonical_map_rank": self.canonical_rank(),
            "generator_classes": self.generator_classes,
            "sign_convention": SIGN_CONVENTION,
            "warnings": list(self.warnings),
        }


def _table_json(table: dict) -> list:
    return [
        {"a": a, "b": b, "bracket": {str(k): c for k, c in sorted(v.items())}}
        for (a, b), v in sorted(table.items()) if a < b
    ]


def build_cotangent(
    ideal: SubspaceBasis,
    d: int,
    product: Callable[[UEAElement, UEAElement], dict],
    lie_bracket: Callable[[int, int, list], dict],
    reduce_vec: Callable[[dict], dict] = lambda v: v,
) -> tuple:
    """Shared construction of I / I^2 from a filtered ideal basis.

    Returns (reps, coords, table, square_basis).  ``lie_bracket(a, b, reps)``
    returns the vector of the bracket of representatives ``a`` and ``b``.
    """
    ctx, index, ring = ideal.ctx, ideal.index, ideal.ctx.ring
    elems = ideal.elements()
    degs = [ideal.row_degree(k) for k in range(len(elems))]
    squares = []
    for i in range(len(elems)):
        for j in range(i, len(elems)):
            if degs[i] + degs[j] <= d:
                squares.append(reduce_vec(product(elems[i], elems[j])))
                if i != j:
                    squares.append(reduce_vec(product(elems[j], elems[i])))
    square = echelonize(squares, ring, len(index))
    remainders = [square.reduce(r) for r in ideal.basis.rows]
    rep_basis = echelonize(remainders, ring, len(index))
    reps = [index.from_vector(ctx, r) for r in rep_basis.rows]

    def coords(v: dict) -> list:
        rho = square.reduce(v)
        c = rep_basis.coordinates(rho)
        if c is None:
            raise PreservationFailure("element does not lie in the ideal within the degree cap")
        return c

    table = {}
    for a, b in itertools.combinations(range(len(reps)), 2):
        c = coords(lie_bracket(a, b, reps))
        vec = {k: x for k, x in enumerate(c) if x}
        if vec:
            table[(a, b)] = vec
            table[(b, a)] = {k: ring.normalize(-x) for k, x in vec.items()}
    return reps, coords, table, square, rep_basis


def _vector_in(index: MonomialIndex, u: UEAElement, d: int) -> dict:
    if u.degree() > d:
        raise DegreeCapTooSmall(f"element of degree {u.degree()} exceeds the cap {d}", suggested=u.degree())
    return index.to_vector(u)


def required_degree(p: int, generators: Sequence[UEAElement]) -> int:
    """2 * (max generator degree) + 2, generators being i(x) and the g_i."""
    top = max([p] + [g.degree() for g in generators])
    return 2 * top + 2


def cotangent_algebra(
    rs: RestrictedStructure,
    generators: Sequence[UEAElement] = (),
    d: int | None = None,
    kind: str = "m",
    override: bool = False,
    cap: int = DEFAULT_MONOMIAL_CAP,
    chunk: CenterChunk | None = None,
) -> CotangentAlgebra:
    """L_p = m_p / m_p^2 (kind "m") or L'_p = n_p / n_p^2 (kind "n") within degree d."""
    if kind not in ("m", "n"):
        raise StructuralError(f"kind must be 'm' or 'n', got {kind!r}")
    p = rs.p
    ctx = fp_context(rs)
    gens = [ctx.coerce(g) for g in generators]
    need = required_degree(p, gens)
    if d is None:
        d = need
    warnings = []
    if d < need:
        if not override:
            raise DegreeCapTooSmall(f"degree cap {d} is below {need} for p={p}", suggested=need)
        warnings.append(f"degree cap {d} below the recommended {need}; products of generators may be invisible")
    if chunk is None or chunk.d != d:
        chunk = center_basis(rs, d, cap)
    index = chunk.index
    emb = PCenterEmbedding(rs)
    g = rs.algebra

    if kind == "m":
        ideal = augmentation_ideal(chunk)

        def product(a, b):
            return _vector_in(index, a * b, d)

        def lie_bracket(a, b, reps):
            return _vector_in(index, deformation_bracket(reps[a], reps[b]), d)

        reps, coords, table, square, _ = build_cotangent(ideal, d, product, lie_bracket)

        def reduce(u):
            return _vector_in(index, ctx.coerce(u), d)

        def in_center(v):
            return is_central(index.from_vector(ctx, v))

        model = None
    else:
        if not gens:
            warnings.append("no central generators supplied: B_p = U g_p and L'_p coincides with L_p")
        model = QuotientModel(ctx, gens, d, index)
        zb = model.center()
        ideal = SubspaceBasis(ctx, index, counit_kernel(ctx, index, zb.rows))
        # central lifts of n_p elements through Z(U g_p) -> Z(B_p)
        images = [model.reduce_vector(r) for r in chunk.basis.rows]
        image_span = echelonize(images, ctx.ring, len(index))
        if image_span.rank != zb.rank:
            warnings.append(
                f"image of Z(U g_p) in Z(B_p) has dimension {image_span.rank} < {zb.rank} within the cap"
            )
        lift_cache: dict = {}

        def central_lift(k, reps):
            if k not in lift_cache:
                v = index.to_vector(reps[k])
                sol = solve_combination(images, v, ctx.ring)
                if sol is None:
                    raise PreservationFailure("a central element of B_p has no central lift within the cap")
                lift = {}
                for i, c in sol.items():
                    vec_axpy(lift, c, chunk.basis.rows[i], ctx.ring)
                lift_cache[k] = index.from_vector(ctx, lift)
            return lift_cache[k]

        def product(a, b):
            return model.vector(a * b)

        def lie_bracket(a, b, reps):
            br = deformation_bracket(central_lift(a, reps), central_lift(b, reps))
            return model.vector(br)

        reps, coords, table, square, _ = build_cotangent(ideal, d, product, lie_bracket, model.reduce_vector)

        def reduce(u):
            return model.vector(u)

        def in_center(v):
            u = index.from_vector(ctx, v)
            return all(not model.vector(ad_action(i, u)) for i in range(ctx.l))

    canonical = None
    cols = []
    for i in range(g.dim):
        cols.append(coords(reduce(-emb.gens[i])))
    canonical = [[cols[i][r] for i in range(g.dim)] for r in range(len(reps))]
    gen_classes = []
    if kind == "m":
        for gg in gens:
            gen_classes.append(coords(reduce(gg)))
    return CotangentAlgebra(
        p=p, d=d, kind=kind, reps=reps, table=table, canonical_map=canonical,
        generator_classes=gen_classes, ideal_dim=ideal.dim, square_dim=square.rank,
        warnings=warnings, coords=coords, reduce=reduce, in_ideal_center=in_center, model=model,
    )


# ---------------------------------------------------------------------------
# structural checks on cotangent algebras


def check_lie_structure(cot: CotangentAlgebra) -> dict:
    """Exhaustive antisymmetry and Jacobi over basis triples."""
    ring = cot.ring
    failures = []
    for (a, b), v in cot.table.items():
        back = cot.table.get((b, a), {})
        if {k: ring.normalize(-c) for k, c in v.items()} != back:
            failures.append({"check": "antisymmetry", "pair": [a, b]})
    for a, b, c in itertools.combinations(range(cot.dim), 3):
        total: dict = {}
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            vec_axpy(total, 1, bracket(cot, {x: 1}, bracket(cot, {y: 1}, {z: 1}, ring), ring), ring)
        if total:
            failures.append({"check": "jacobi", "triple": [a, b, c]})
    return {"verdict": "PASS" if not failures else "FAIL", "failures": failures}


def check_canonical_map(cot: CotangentAlgebra, rs: RestrictedStructure) -> dict:
    """kappa([x_i, x_j]) = [kappa x_i, kappa x_j] for all basis pairs."""
    g, ring = rs.algebra, cot.ring
    kappa = cot.canonical_map

    def image(v):
        out = {}
        for i, c in v.items():
            for r in range(cot.dim):
                if kappa[r][i]:
                    out[r] = ring.normalize(out.get(r, 0) + c * kappa[r][i])
        return {k: x for k, x in out.items() if x}

    failures = []
    for i, j in itertools.combinations(range(g.dim), 2):
        lhs = image(bracket(g, {i: 1}, {j: 1}, ring))
        rhs = bracket(cot, image({i: 1}), image({j: 1}), ring)
        if lhs != rhs:
            failures.append([g.basis[i], g.basis[j]])
    rank = cot.canonical_rank()
    return {
        "verdict": "PASS" if not failures else "FAIL",
        "failures": failures,
        "rank": rank,
        "injective": rank == g.dim,
        "bijective": rank == g.dim == cot.dim,
    }


def central_extension_report(cot: CotangentAlgebra, rs: RestrictedStructure) -> dict:
    """L_p = kappa(g_p) ⊕ span(generator classes), with the latter central."""
    ring = cot.ring
    central_ok = all(
        not bracket(cot, {k: c for k, c in enumerate(v) if c}, {b: 1}, ring)
        for v in cot.generator_classes for b in range(cot.dim)
    )
    cols = [[row[i] for row in cot.canonical_map] for i in range(rs.algebra.dim)]
    total = echelonize(cols + [list(v) for v in cot.generator_classes], ring, cot.dim).rank
    ok = central_ok and total == cot.dim == rs.algebra.dim + len(cot.generator_classes) and cot.canonical_rank() == rs.algebra.dim
    return {
        "verdict": "PASS" if ok else "FAIL",
        "generator_classes_central": central_ok,
        "span_rank": total,
        "center_dim": center_dim(cot, ring),
    }


# ---------------------------------------------------------------------------
# induced automorphisms


@dataclass
class InducedMap:
    matrix: list
    is_automorphism: bool
    failures: list

    def to_dict(self):
        return {"matrix": self.matrix, "is_lie_automorphism": self.is_automorphism, "failures": self.failures}


def _preserves_brackets(m: list, src: CotangentAlgebra, dst: CotangentAlgebra) -> list:
    ring = src.ring

    def image(v):
        out = {}
        for i, c in v.items():
            for r in range(dst.dim):
                if m[r][i]:
                    out[r] = ring.normalize(out.get(r, 0) + c * m[r][i])
        return {k: x for k, x in out.items() if x}

    bad = []
    for a, b in itertools.combinations(range(src.dim), 2):
        if image(bracket(src, {a: 1}, {b: 1}, ring)) != bracket(dst, image({a: 1}), image({b: 1}), ring):
            bad.append([a, b])
    return bad


def induced_automorphism(hom: Homomorphism, cot: CotangentAlgebra, rs: RestrictedStructure) -> InducedMap:
    """Matrix of the map induced by ``hom`` on ``cot`` (columns = images of the representatives)."""
    ctx = fp_context(rs)
    phi = hom if hom.ctx.same_as(ctx) else hom.reduce(ctx)
    if cot.kind == "n" and cot.model is not None:
        for k, gg in enumerate(cot.model.generators):
            img = phi(gg)
            if img.degree() > cot.d or not cot.model.in_ideal(img):
                raise PreservationFailure(f"image of quotient generator {k} is not in the ideal within degree {cot.d}")
    cols = []
    for r in cot.reps:
        img = phi(r)
        if img.degree() > cot.d:
            raise PreservationFailure(
                f"image of a representative has degree {img.degree()} > cap {cot.d}: raise the cap or check the map"
            )
        v = cot.reduce(img)
        if not cot.in_ideal_center(v):
            raise PreservationFailure("image of a representative is not central: not an automorphism within budget")
        cols.append(cot.coords(v))
    m = [[cols[j][i] for j in range(cot.dim)] for i in range(cot.dim)]
    failures = []
    if mat_inverse(m, cot.ring) is None:
        failures.append("matrix is singular")
    bad = _preserves_brackets(m, cot, cot)
    if bad:
        failures.append({"bracket_not_preserved": bad})
    return InducedMap(m, not failures, failures)


def g_part_matrix(induced: InducedMap, cot: CotangentAlgebra, l: int) -> list | None:
    """Matrix of the induced map on kappa(g_p), in the basis kappa(x_i)."""
    ring = cot.ring
    kappa_cols = [[row[i] for row in cot.canonical_map] for i in range(l)]
    out = []
    for i in range(l):
        v = {r: x for r, x in enumerate(kappa_cols[i]) if x}
        img = [ring.normalize(sum(induced.matrix[r][s] * v.get(s, 0) for s in range(cot.dim))) for r in range(cot.dim)]
        sol = solve_combination([{r: x for r, x in enumerate(c) if x} for c in kappa_cols],
                                {r: x for r, x in enumerate(img) if x}, ring)
        if sol is None:
            return None
        out.append([sol.get(k, 0) for k in range(l)])
    return [[out[j][i] for j in range(l)] for i in range(l)]


# ---------------------------------------------------------------------------
# character twists


def chi_evaluate(u: UEAElement, chi: Character) -> int:
    """Value of the one-dimensional representation extending ``chi``."""
    p = chi.p
    total = 0
    for m, c in u.terms.items():
        val = c
        for i, a in enumerate(m):
            if a:
                val = val * pow(chi.values[i], a, p) % p
        total += val
    return total % p


def character_twist(rs: RestrictedStructure, chi: Character, d: int | None = None) -> dict:
    """Twist by x -> x - chi(x) and compare m_p / m_p^2 with I_chi / I_chi^2."""
    g, p, ring = rs.algebra, rs.p, rs.ring
    if not is_nilpotent(g, ring):
        raise NotNilpotent(f"{g.name} is not nilpotent over F_{p}")
    ctx = fp_context(rs)
    images = [ctx.gen(i) - chi.values[i] for i in range(g.dim)]
    phi = Homomorphism(images)
    if d is None:
        d = required_degree(p, [])
    chunk = center_basis(rs, d)
    index = chunk.index
    elems = chunk.elements()
    maps_center = all(chunk.contains(phi(z)) for z in elems)
    # I_chi: central elements killed by the character
    values = [chi_evaluate(z, chi) for z in elems]
    rows = chunk.basis.rows
    base = next((k for k, v in enumerate(values) if v), None)
    i_rows = []
    for k, r in enumerate(rows):
        if not values[k]:
            i_rows.append(r)
        elif k != base:
            v = dict(r)
            vec_axpy(v, -values[k] * ring.inv(values[base]), rows[base], ring)
            i_rows.append(v)
    ideal_i = SubspaceBasis(ctx, index, echelonize(i_rows, ring, len(index)))
    m_cot = cotangent_algebra(rs, (), d, "m", chunk=chunk, override=True)
    m_ideal = augmentation_ideal(chunk)
    phi_m = [index.to_vector(phi(u)) for u in m_ideal.elements()]
    maps_onto = all(ideal_i.basis.contains(v) for v in phi_m) and echelonize(phi_m, ring, len(index)).rank == ideal_i.dim

    def product(a, b):
        return _vector_in(index, a * b, d)

    def lie_bracket(a, b, reps):
        return _vector_in(index, deformation_bracket(reps[a], reps[b]), d)

    reps, coords, table, square, _ = build_cotangent(ideal_i, d, product, lie_bracket)
    i_cot = CotangentAlgebra(p=p, d=d, kind="twist", reps=reps, table=table, canonical_map=None,
                             ideal_dim=ideal_i.dim, square_dim=square.rank, coords=coords)
    cols = [coords(_vector_in(index, phi(r), d)) for r in m_cot.reps]
    matrix = [[cols[j][i] for j in range(len(cols))] for i in range(i_cot.dim)]
    square_ok = len(cols) == i_cot.dim
    invertible = square_ok and mat_inverse(matrix, ring) is not None
    brackets_ok = square_ok and not _preserves_brackets(matrix, m_cot, i_cot)
    ok = maps_center and maps_onto and invertible and brackets_ok
    return {
        "verdict": "PASS" if ok else "FAIL",
        "character": list(chi.values),
        "automorphism": [format_element(u) for u in images],
        "maps_center_to_center": maps_center,
        "maps_m_onto_I_chi": maps_onto,
        "dim_m_cotangent": m_cot.dim,
        "dim_I_cotangent": i_cot.dim,
        "isomorphism_matrix": matrix,
        "invertible": invertible,
        "preserves_brackets": brackets_ok,
        "scope": f"within filtration degree <= {d}",
        "_ideal": ideal_i,
        "_hom": phi,
    }


# ---------------------------------------------------------------------------
# sweeps over primes


def charpoly_of(m: list, ring: Ring) -> list:
    return charpoly(m, ring)


def format_poly(coeffs: list) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if not c:
            continue
        mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
        if k == 0:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return " + ".join(terms) or "0"


def order_check(hom_q: Homomorphism, order: int) -> bool:
    """phi^order equals the identity on generators (exactly, in the source ring)."""
    power = hom_q
    for _ in range(order - 1):
        power = hom_q.compose(power)
    ctx = hom_q.ctx
    return all(power.images[i] == ctx.gen(i) for i in range(ctx.l))


def charpoly_sweep(g, hom_q: Homomorphism, primes: Sequence[int], generators_for: Callable,
                   d_for: Callable | None = None, kind: str = "n", order: int | None = None,
                   bad_primes: set | None = None) -> dict:
    """Characteristic polynomial of the induced map at each good prime, plus verdict.

    ``generators_for(p)`` returns the central generators over F_p.
    """
    bad = set(bad_primes or ())
    good = [p for p in primes if p not in bad and p >= 3]
    if not good:
        raise NoGoodPrimes(f"no good primes among {list(primes)}")
    per_prime = []
    identity_like = []
    for p in good:
        rs = restricted_structure(g, p)
        gens = generators_for(p)
        d = d_for(p) if d_for else None
        cot = cotangent_algebra(rs, gens, d, kind)
        induced = induced_automorphism(hom_q, cot, rs)
        ring = Ring.mod_p(p)
        if kind == "m":
            mat = g_part_matrix(induced, cot, g.dim)
            if mat is None:
                raise PreservationFailure("induced map does not preserve the image of g")
        else:
            mat = induced.matrix
        f = charpoly(mat, ring)
        unipotent = poly_from_roots([1] * len(mat), ring)
        identity_like.append(f == unipotent)
        per_prime.append({
            "prime": p, "degree_cap": cot.d, "charpoly": f, "charpoly_text": format_poly(f),
            "equals_unipotent": f == unipotent, "matrix": mat,
            "is_lie_automorphism": induced.is_automorphism,
        })
    if not any(identity_like):
        verdict = "kernel-detectable"
    elif all(identity_like):
        verdict = "indistinguishable from identity up to computed primes"
    else:
        verdict = "mixed: unipotent at " + ",".join(str(r["prime"]) for r in per_prime if r["equals_unipotent"])
    out = {"per_prime": per_prime, "verdict": verdict, "skipped_primes": sorted(set(primes) - set(good))}
    if order is not None:
        out["order"] = order
        out["order_verified"] = order_check(hom_q, order)
    return out


def cotangent_invariants(cot: CotangentAlgebra) -> dict:
    ring = cot.ring
    return {
        "dimension": cot.dim,
        "center_dim": center_dim(cot, ring),
        "derived_series_dims": derived_series_dims(cot, ring),
        "killing_rank": killing_rank(cot, ring),
        "abelianization_dim": abelianization_dim(cot, ring),
    }


def compare_invariants(algebras: Sequence, primes: Sequence[int], generators_for: Callable,
                       d: int | None = None) -> dict:
    """Per-prime invariant tables of L_p and L'_p for two algebras."""
    rows = []
    distinguished_at = []
    warnings = []
    for p in primes:
        entry = {"prime": p}
        tables = []
        for label, g in zip(("a", "b"), algebras):
            rs = restricted_structure(g, p)
            gens = generators_for(g, p)
            chunk = None
            result = {}
            for kind in ("m", "n"):
                need = required_degree(p, gens)
                dd = need if d is None else d
                if dd < need:
                    warnings.append(f"{g.name} at p={p}: degree cap {dd} below recommended {need}")
                if chunk is None or chunk.d != dd:
                    chunk = center_basis(rs, dd)
                cot = cotangent_algebra(rs, gens, dd, kind, override=True, chunk=chunk)
                result["L" if kind == "m" else "L_prime"] = cotangent_invariants(cot)
            entry[label] = result
            tables.append(result)
        differs = tables[0] != tables[1]
        entry["differs"] = differs
        if differs:
            distinguished_at.append(p)
        rows.append(entry)
    return {
        "per_prime": rows,
        "verdict": "DISTINGUISHED" if distinguished_at else "INCONCLUSIVE",
        "distinguished_at": distinguished_at,
        "warnings": warnings,
    }


def identity_matrix(n: int) -> list:
    return identity(n)


def compose_matrices(a: list, b: list, ring: Ring) -> list:
    return mat_mul(a, b, ring)
