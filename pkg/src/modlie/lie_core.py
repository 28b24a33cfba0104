"""Lie algebra presentations by structure constants, restricted p-maps, characters."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .errors import (
    InvalidCharacter,
    MissingPMap,
    NotRestrictedUnderRealization,
    StructuralError,
)
from .exact_linalg import (
    QQ,
    Ring,
    echelonize,
    mat_mul,
    prime_factors,
    solve_combination,
    vec_axpy,
)


@dataclass
class LieAlgebraPresentation:
    """A Lie algebra over Q (or Z) given by structure constants in an ordered basis.

    ``raw_brackets`` keeps the entries exactly as supplied so that
    :func:`validate` can complain about inconsistent duplicates; the working
    table is rebuilt from them with antisymmetry imposed.
    """

    name: str
    basis: tuple
    raw_brackets: list  # (i, j, {k: Fraction})
    matrices: tuple | None = None
    pmap: tuple | None = None  # per basis element: {k: Fraction}
    invariants: dict = field(default_factory=dict)  # name -> expression string
    assumption_asserted: bool = False

    def __post_init__(self):
        self.basis = tuple(self.basis)
        if len(set(self.basis)) != len(self.basis):
            raise StructuralError(f"duplicate basis symbols in {self.basis}")
        self._tables: dict = {}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, symbol: str) -> int:
        try:
            return self.basis.index(symbol)
        except ValueError:
            raise StructuralError(f"{symbol!r} is not a basis symbol of {self.name}") from None

    @cached_property
    def constants(self) -> dict:
        """``{(i, j): {k: c}}`` for i < j, derived from the raw entries."""
        table: dict = {}
        for i, j, coeffs in self.raw_brackets:
            if i == j:
                continue
            key, sign = ((i, j), 1) if i < j else ((j, i), -1)
            if key in table:
                continue
            table[key] = {k: sign * Fraction(c) for k, c in coeffs.items() if c}
        return table

    def bracket_table(self, ring: Ring) -> dict:
        """Full antisymmetric table ``{(i, j): {k: c}}`` with coefficients in ``ring``."""
        if ring not in self._tables:
            full = {}
            for (i, j), coeffs in self.constants.items():
                pos = {k: ring(c) for k, c in coeffs.items()}
                pos = {k: c for k, c in pos.items() if c}
                if pos:
                    full[(i, j)] = pos
                    full[(j, i)] = {k: ring.normalize(-c) for k, c in pos.items()}
            self._tables[ring] = full
        return self._tables[ring]

    def bad_primes(self) -> set[int]:
        """Primes dividing a denominator of the constants, p-map or matrices."""
        bad = set()
        for coeffs in self.constants.values():
            for c in coeffs.values():
                bad |= prime_factors(Fraction(c).denominator)
        for vals in self.pmap or ():
            for c in vals.values():
                bad |= prime_factors(Fraction(c).denominator)
        for m in self.matrices or ():
            for row in m:
                for c in row:
                    bad |= prime_factors(Fraction(c).denominator)
        return bad

    def __repr__(self):
        return f"LieAlgebraPresentation({self.name!r}, basis={self.basis})"


@dataclass(frozen=True)
class StructureConstants:
    """Bare structure constants over a fixed ring (used for derived algebras)."""

    dim: int
    table: dict  # full antisymmetric {(i, j): {k: c}}
    ring: Ring

    def bracket_table(self, ring: Ring) -> dict:
        if ring != self.ring:
            raise StructuralError(f"constants live over {self.ring}, asked for {ring}")
        return self.table


# ---------------------------------------------------------------------------
# basic bracket helpers (work for anything with .dim and .bracket_table)


def bracket(g, u: Mapping, v: Mapping, ring: Ring) -> dict:
    """Bracket of two coordinate vectors."""
    table = g.bracket_table(ring)
    out: dict = {}
    for i, a in u.items():
        for j, b in v.items():
            c = table.get((i, j))
            if c:
                vec_axpy(out, a * b, c, ring)
    return out


def ad_matrix(g, i: int, ring: Ring) -> list[list]:
    """Matrix of ad(x_i); column j holds the coordinates of [x_i, x_j]."""
    n = g.dim
    table = g.bracket_table(ring)
    m = [[0] * n for _ in range(n)]
    for j in range(n):
        for k, c in table.get((i, j), {}).items():
            m[k][j] = c
    return m


def ad_of_vector(g, v: Mapping, ring: Ring) -> list[list]:
    n = g.dim
    m = [[0] * n for _ in range(n)]
    for i, a in v.items():
        for r, row in enumerate(ad_matrix(g, i, ring)):
            for c, x in enumerate(row):
                if x:
                    m[r][c] = ring.normalize(m[r][c] + a * x)
    return m


def _mat_pow(m, e, ring):
    n = len(m)
    result = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    base = m
    while e:
        if e & 1:
            result = mat_mul(result, base, ring)
        base = mat_mul(base, base, ring)
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    antisymmetry: bool
    jacobi: bool
    realization: bool | None
    failures: list

    @property
    def ok(self) -> bool:
        return self.antisymmetry and self.jacobi and self.realization is not False

    def to_dict(self) -> dict:
        return {
            "antisymmetry": self.antisymmetry,
            "jacobi": self.jacobi,
            "realization": self.realization,
            "failures": self.failures,
            "verdict": "PASS" if self.ok else "FAIL",
        }


def validate(g: LieAlgebraPresentation) -> ValidationReport:
    """Exhaustive antisymmetry, Jacobi and realization checks over Q."""
    failures = []
    antisym = True
    seen: dict = {}
    for i, j, coeffs in g.raw_brackets:
        if not (0 <= i < g.dim and 0 <= j < g.dim) or any(not 0 <= k < g.dim for k in coeffs):
            antisym = False
            failures.append({"check": "indices", "pair": [i, j]})
            continue
        norm = {k: Fraction(c) for k, c in coeffs.items() if c}
        if i == j:
            if norm:
                antisym = False
                failures.append({"check": "antisymmetry", "pair": [g.basis[i], g.basis[j]]})
            continue
        key, signed = ((i, j), norm) if i < j else ((j, i), {k: -c for k, c in norm.items()})
        if key in seen and seen[key] != signed:
            antisym = False
            failures.append({"check": "antisymmetry", "pair": [g.basis[key[0]], g.basis[key[1]]]})
        seen.setdefault(key, signed)

    jacobi = True
    if antisym:
        for i, j, k in itertools.combinations(range(g.dim), 3):
            xi, xj, xk = {i: 1}, {j: 1}, {k: 1}
            total: dict = {}
            for a, b, c in ((xi, xj, xk), (xj, xk, xi), (xk, xi, xj)):
                vec_axpy(total, 1, bracket(g, a, bracket(g, b, c, QQ), QQ), QQ)
            if total:
                jacobi = False
                failures.append({"check": "jacobi", "triple": [g.basis[i], g.basis[j], g.basis[k]]})
    else:
        jacobi = False

    realization = None
    if g.matrices is not None:
        realization = len(g.matrices) == g.dim
        if not realization:
            failures.append({"check": "realization", "reason": "matrix count differs from dimension"})
        else:
            mats = [[[Fraction(x) for x in row] for row in m] for m in g.matrices]
            for i, j in itertools.combinations(range(g.dim), 2):
                lhs = _commutator(mats[i], mats[j])
                rhs = _lincomb(mats, g.constants.get((i, j), {}))
                if lhs != rhs:
                    realization = False
                    failures.append({"check": "realization", "pair": [g.basis[i], g.basis[j]]})
    return ValidationReport(antisym, jacobi, realization, failures)


def _commutator(a, b):
    ab = mat_mul(a, b, QQ)
    ba = mat_mul(b, a, QQ)
    return [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(ab, ba)]


def _lincomb(mats, coeffs):
    n = len(mats[0])
    out = [[Fraction(0)] * n for _ in range(n)]
    for k, c in coeffs.items():
        for r in range(n):
            for s in range(n):
                out[r][s] += c * mats[k][r][s]
    return [[QQ.normalize(x) for x in row] for row in out]


# ---------------------------------------------------------------------------
# classical invariants


def killing_rank(g, ring: Ring) -> int:
    """Rank of the trace form ``K_ij = tr(ad x_i ad x_j)``."""
    ads = [ad_matrix(g, i, ring) for i in range(g.dim)]
    n = g.dim
    k = []
    for i in range(n):
        row = []
        for j in range(n):
            prod = mat_mul(ads[i], ads[j], ring)
            row.append(ring.normalize(sum(prod[t][t] for t in range(n))))
        k.append(row)
    return echelonize(k, ring, n).rank if n else 0


def _bracket_span(g, left, right, ring):
    vecs = [bracket(g, u, v, ring) for u in left for v in right]
    return echelonize(vecs, ring, g.dim)


def derived_series_dims(g, ring: Ring = QQ) -> list[int]:
    """Dimensions of g, [g,g], [[g,g],[g,g]], ... until the chain stabilises."""
    cur = echelonize([{i: 1} for i in range(g.dim)], ring, g.dim)
    dims = [cur.rank]
    while cur.rank:
        nxt = _bracket_span(g, cur.rows, cur.rows, ring)
        dims.append(nxt.rank)
        if nxt.rank == cur.rank:
            break
        cur = nxt
    return dims


def lower_central_dims(g, ring: Ring = QQ) -> list[int]:
    full = [{i: 1} for i in range(g.dim)]
    cur = echelonize(full, ring, g.dim)
    dims = [cur.rank]
    while cur.rank:
        nxt = _bracket_span(g, full, cur.rows, ring)
        dims.append(nxt.rank)
        if nxt.rank == cur.rank:
            break
        cur = nxt
    return dims


def is_nilpotent(g, ring: Ring = QQ) -> bool:
    return lower_central_dims(g, ring)[-1] == 0


def center_dim(g, ring: Ring) -> int:
    """Dimension of the center, as the common kernel of all ad(x_i)."""
    from .exact_linalg import nullspace

    rows = []
    for i in range(g.dim):
        rows.extend(ad_matrix(g, i, ring))
    if not rows:
        return g.dim
    return nullspace(rows, ring, g.dim).rank


def abelianization_dim(g, ring: Ring) -> int:
    dims = derived_series_dims(g, ring)
    return dims[0] - (dims[1] if len(dims) > 1 else 0)


# ---------------------------------------------------------------------------
# restricted structures


@dataclass(frozen=True)
class RestrictedStructure:
    """Values ``x_i^[p]`` (coordinate dicts over F_p) and where they came from."""

    algebra: LieAlgebraPresentation
    p: int
    values: tuple
    source: str  # "explicit" or "matrices"

    @property
    def ring(self) -> Ring:
        return Ring.mod_p(self.p)


def pmap_from_matrices(g: LieAlgebraPresentation, p: int) -> RestrictedStructure:
    """p-map given by p-th powers of the defining matrices."""
    if not g.matrices:
        raise MissingPMap(f"{g.name} has no matrix realization")
    ring = Ring.mod_p(p)
    mats = [[[ring(x) for x in row] for row in m] for m in g.matrices]
    flat = [{r * len(m) + c: x for r, row in enumerate(m) for c, x in enumerate(row) if x} for m in mats]
    values = []
    for i, m in enumerate(mats):
        power = _mat_pow(m, p, ring)
        target = {r * len(power) + c: x for r, row in enumerate(power) for c, x in enumerate(row) if x}
        coeffs = solve_combination(flat, target, ring)
        if coeffs is None:
            raise NotRestrictedUnderRealization(
                f"{g.basis[i]}^{p} leaves the span of the basis matrices of {g.name}"
            )
        values.append(coeffs)
    return RestrictedStructure(g, p, tuple(values), "matrices")


def restricted_structure(g: LieAlgebraPresentation, p: int) -> RestrictedStructure:
    """Explicit p-map values if the presentation has them, else matrix powers."""
    if g.pmap is not None:
        ring = Ring.mod_p(p)
        vals = tuple({k: ring(c) for k, c in v.items() if ring(c)} for v in g.pmap)
        return RestrictedStructure(g, p, vals, "explicit")
    if g.matrices:
        return pmap_from_matrices(g, p)
    raise MissingPMap(f"{g.name}: supply explicit p-map values or a matrix realization")


def jacobson_terms(g, a: Mapping, b: Mapping, p: int) -> dict:
    """Sum of s_i(a, b), where i*s_i is the t^(i-1) coefficient of ad(ta+b)^(p-1)(a)."""
    ring = Ring.mod_p(p)
    poly = [dict(a)]  # coefficient list in t
    for _ in range(p - 1):
        nxt = [dict() for _ in range(len(poly) + 1)]
        for k, coeff in enumerate(poly):
            if not coeff:
                continue
            vec_axpy(nxt[k], 1, bracket(g, b, coeff, ring), ring)
            vec_axpy(nxt[k + 1], 1, bracket(g, a, coeff, ring), ring)
        poly = nxt
    total: dict = {}
    for i in range(1, p):
        if i - 1 < len(poly) and poly[i - 1]:
            vec_axpy(total, pow(i, -1, p), poly[i - 1], ring)
    return total


def pmap_extend(rs: RestrictedStructure, v: Mapping) -> dict:
    """Coordinates of ``v^[p]`` from the basis values, by Jacobson's formula."""
    g, p, ring = rs.algebra, rs.p, rs.ring
    acc: dict = {}
    acc_p: dict = {}
    for i in sorted(v):
        lam = ring(v[i])
        if not lam:
            continue
        term = {i: lam}
        term_p = {k: ring.normalize(pow(lam, p, p) * c) for k, c in rs.values[i].items()}
        term_p = {k: c for k, c in term_p.items() if c}
        if acc:
            cross = jacobson_terms(g, acc, term, p)
            new_p = dict(acc_p)
            vec_axpy(new_p, 1, term_p, ring)
            vec_axpy(new_p, 1, cross, ring)
            acc_p = new_p
        else:
            acc_p = term_p
        vec_axpy(acc, 1, term, ring)
    return acc_p


@dataclass
class RestrictedReport:
    ok: bool
    failures: list

    def to_dict(self):
        return {"verdict": "PASS" if self.ok else "FAIL", "failures": self.failures}


def verify_restricted(rs: RestrictedStructure, samples: int = 6, seed: int = 0) -> RestrictedReport:
    """Check ad(x^[p]) = ad(x)^p on the basis and, with matrices, on sampled sums."""
    g, p, ring = rs.algebra, rs.p, rs.ring
    failures = []
    for i in range(g.dim):
        lhs = ad_of_vector(g, rs.values[i], ring)
        rhs = _mat_pow(ad_matrix(g, i, ring), p, ring)
        if lhs != rhs:
            failures.append({"check": "ad_power", "witness": g.basis[i]})
    if g.matrices:
        mats = [[[ring(x) for x in row] for row in m] for m in g.matrices]
        rng = random.Random(seed)
        vectors = [{i: 1, j: 1} for i, j in itertools.combinations(range(g.dim), 2)]
        for _ in range(samples):
            vectors.append({i: rng.randrange(p) for i in range(g.dim)})
        for v in vectors:
            v = {k: c for k, c in v.items() if c}
            m = _sum_mats(mats, v, ring)
            power = _mat_pow(m, p, ring)
            predicted = _sum_mats(mats, pmap_extend(rs, v), ring)
            if power != predicted:
                failures.append({"check": "matrix_power", "witness": {g.basis[k]: c for k, c in v.items()}})
    return RestrictedReport(not failures, failures)


def _sum_mats(mats, coeffs, ring):
    n = len(mats[0])
    out = [[0] * n for _ in range(n)]
    for k, c in coeffs.items():
        for r in range(n):
            for s in range(n):
                out[r][s] = ring.normalize(out[r][s] + c * mats[k][r][s])
    return out


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True)
class Character:
    """A Lie algebra homomorphism g_p -> F_p, stored by its basis values."""

    values: tuple
    p: int

    def __call__(self, v: Mapping) -> int:
        return sum(self.values[i] * c for i, c in v.items()) % self.p


def make_character(g, p: int, values: Sequence) -> Character:
    ring = Ring.mod_p(p)
    if len(values) != g.dim:
        raise StructuralError(f"character needs {g.dim} values, got {len(values)}")
    chi = Character(tuple(ring(x) for x in values), p)
    for (i, j), coeffs in g.bracket_table(ring).items():
        if chi(coeffs):
            raise InvalidCharacter(
                f"character does not vanish on [{g.basis[i]}, {g.basis[j]}]"
            )
    return chi


def random_characters(g, p: int, count: int, seed: int = 0) -> list[Character]:
    """Uniform random characters: random functionals on g / [g, g]."""
    ring = Ring.mod_p(p)
    derived = _bracket_span(g, [{i: 1} for i in range(g.dim)], [{i: 1} for i in range(g.dim)], ring)
    # annihilator of the derived algebra
    from .exact_linalg import nullspace

    ann = nullspace([[r.get(k, 0) for k in range(g.dim)] for r in derived.rows] or [[0] * g.dim], ring, g.dim)
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        vals = [0] * g.dim
        for row in ann.rows:
            a = rng.randrange(p)
            for k, c in row.items():
                vals[k] = (vals[k] + a * c) % p
        out.append(make_character(g, p, vals))
    return out


def structure_constants_over(g: LieAlgebraPresentation, ring: Ring) -> StructureConstants:
    return StructureConstants(g.dim, g.bracket_table(ring), ring)
