"""Symmetric algebra, the Kirillov-Kostant bracket, invariants and symmetrization."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Mapping, Sequence

from .errors import InvertibilityError, StructuralError
from .exact_linalg import QQ, Ring, echelonize, nullspace
from .pbw import PBWContext, UEAElement, _add, format_terms, mono_key, monomials_of_degree


class SymElement:
    """Commutative polynomial in the basis symbols of a Lie algebra."""

    __slots__ = ("nvars", "ring", "terms")

    def __init__(self, nvars: int, ring: Ring, terms: Mapping):
        self.nvars = nvars
        self.ring = ring
        clean = {}
        for m, c in terms.items():
            m = tuple(m)
            if len(m) != nvars:
                raise StructuralError(f"exponent vector {m} has wrong length")
            c = ring(c)
            if c:
                clean[m] = c
        self.terms = clean

    @classmethod
    def variable(cls, nvars: int, ring: Ring, i: int) -> "SymElement":
        return cls(nvars, ring, {tuple(1 if k == i else 0 for k in range(nvars)): 1})

    @classmethod
    def constant(cls, nvars: int, ring: Ring, c) -> "SymElement":
        return cls(nvars, ring, {(0,) * nvars: c})

    def _other(self, other):
        if isinstance(other, SymElement):
            if other.nvars != self.nvars or other.ring != self.ring:
                raise StructuralError("symmetric-algebra operands do not match")
            return other
        return SymElement.constant(self.nvars, self.ring, other)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def __add__(self, other):
        other = self._other(other)
        out = dict(self.terms)
        n = self.ring.modulus
        for m, c in other.terms.items():
            _add(out, m, c, n)
        return SymElement(self.nvars, self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return SymElement(self.nvars, self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        other = self._other(other)
        out: dict = {}
        n = self.ring.modulus
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                _add(out, tuple(a + b for a, b in zip(m1, m2)), c1 * c2, n)
        return SymElement(self.nvars, self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = SymElement.constant(self.nvars, self.ring, 1)
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, SymElement):
            return self.nvars == other.nvars and self.ring == other.ring and self.terms == other.terms
        return NotImplemented

    __hash__ = None

    def derivative(self, i: int) -> "SymElement":
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                out[m[:i] + (m[i] - 1,) + m[i + 1:]] = c * m[i]
        return SymElement(self.nvars, self.ring, out)

    def reduce(self, ring: Ring) -> "SymElement":
        return SymElement(self.nvars, ring, self.terms)

    def leading_coefficient(self):
        return self.terms[max(self.terms, key=mono_key)] if self.terms else 0

    def format(self, basis: Sequence[str]) -> str:
        return format_terms(self.terms, basis)

    def __repr__(self):
        return f"SymElement({format_terms(self.terms, [f'x{i}' for i in range(self.nvars)])})"


def _linear(g, coeffs: Mapping, ring: Ring) -> SymElement:
    n = g.dim
    return SymElement(n, ring, {tuple(1 if k == i else 0 for k in range(n)): c for i, c in coeffs.items()})


def kk_bracket(g, a: SymElement, b: SymElement) -> SymElement:
    """Kirillov-Kostant bracket: the biderivation extending the Lie bracket."""
    ring = a.ring
    if b.ring != ring or a.nvars != g.dim or b.nvars != g.dim:
        raise StructuralError("kk_bracket: operands do not match the algebra")
    table = g.bracket_table(ring)
    out = SymElement(g.dim, ring, {})
    da = [a.derivative(i) for i in range(g.dim)]
    db = [b.derivative(j) for j in range(g.dim)]
    for (i, j), coeffs in table.items():
        if da[i].is_zero() or db[j].is_zero():
            continue
        out = out + da[i] * db[j] * _linear(g, coeffs, ring)
    return out


def invariant_basis(g, d: int, ring: Ring = QQ) -> list[SymElement]:
    """Echelon basis of the degree-d invariants ``{s : {x_i, s} = 0 for all i}``.

    Basis elements are normalised to leading coefficient 1 in graded lex order.
    """
    monos = monomials_of_degree(g.dim, d)
    col = {m: k for k, m in enumerate(monos)}
    rows: dict = {}
    for k, m in enumerate(monos):
        s = SymElement(g.dim, ring, {m: 1})
        for i in range(g.dim):
            br = kk_bracket(g, SymElement.variable(g.dim, ring, i), s)
            for t, c in br.terms.items():
                rows.setdefault((i, t), {})[k] = c
    matrix = [rows[key] for key in sorted(rows, key=lambda kt: (kt[0], col[kt[1]]))]
    kern = nullspace(matrix, ring, len(monos)) if matrix else echelonize(
        [{k: 1} for k in range(len(monos))], ring, len(monos)
    )
    return [SymElement(g.dim, ring, {monos[k]: c for k, c in row.items()}) for row in kern.rows]


# ---------------------------------------------------------------------------
# symmetrization

DIRECT_SYMMETRIZE_MAX = 8


def _distinct_words(m: tuple) -> list[tuple]:
    """All distinct orderings of the multiset of letters encoded by ``m``."""
    letters = [i for i, a in enumerate(m) for _ in range(a)]
    out: list = []

    def rec(counts, word):
        if len(word) == len(letters):
            out.append(tuple(word))
            return
        for i, c in enumerate(counts):
            if c:
                counts[i] -= 1
                word.append(i)
                rec(counts, word)
                word.pop()
                counts[i] += 1

    rec(list(m), [])
    return out


def _check_symmetrizable(ctx: PBWContext, k: int):
    ring = ctx.ring
    if ring.modulus is not None and k >= ring.p:
        raise InvertibilityError(f"symmetrizing degree {k} needs {k}! invertible in {ring}")
    if ring.kind == "Z" and k > 1:
        raise InvertibilityError("symmetrization needs rational coefficients")


def symmetrize_monomial_direct(ctx: PBWContext, m: tuple) -> UEAElement:
    _check_symmetrizable(ctx, sum(m))
    words = _distinct_words(m)
    total = ctx.zero()
    for w in words:
        u = ctx.one()
        for i in w:
            u = ctx.right_gen(u, i)
        total = total + u
    return total.scale(ctx.ring.inv(ctx.ring(len(words))))


def symmetrize_monomial_recursive(ctx: PBWContext, m: tuple, _memo: dict | None = None) -> UEAElement:
    """beta(m) = (1/k) sum_i a_i x_i beta(m - e_i)."""
    k = sum(m)
    _check_symmetrizable(ctx, k)
    if _memo is None:
        _memo = {}
    if m in _memo:
        return _memo[m]
    if k <= 1:
        res = ctx.monomial(m)
    else:
        res = ctx.zero()
        for i, a in enumerate(m):
            if a:
                rest = m[:i] + (a - 1,) + m[i + 1:]
                res = res + ctx.left_gen(i, symmetrize_monomial_recursive(ctx, rest, _memo)).scale(a)
        res = res.scale(ctx.ring.inv(ctx.ring(k)))
    _memo[m] = res
    return res


def symmetrize(ctx: PBWContext, s: SymElement) -> UEAElement:
    """Symmetrization Sym(g) -> U(g), straightened into PBW normal form."""
    if s.nvars != ctx.l:
        raise StructuralError("symmetrize: polynomial does not match the algebra")
    ring = ctx.ring
    memo: dict = {}
    out = ctx.zero()
    for m, c in s.terms.items():
        if sum(m) <= DIRECT_SYMMETRIZE_MAX:
            piece = symmetrize_monomial_direct(ctx, m)
        else:
            piece = symmetrize_monomial_recursive(ctx, m, memo)
        out = out + piece.scale(ring(c) if s.ring.kind in ("Q", "Z") else c)
    return out


def principal_symbol(u: UEAElement) -> SymElement:
    """Top-degree part of ``u`` read as a commutative polynomial."""
    if u.is_zero():
        raise StructuralError("the principal symbol of 0 is undefined")
    d = u.degree()
    return SymElement(u.ctx.l, u.ring, {m: c for m, c in u.terms.items() if sum(m) == d})


# ---------------------------------------------------------------------------
# bounded regular-sequence probe


def _koszul_hilbert(nvars: int, degrees: Sequence[int], upto: int) -> list[int]:
    """Coefficients of prod(1 - t^d_i) / (1 - t)^nvars up to t^upto."""
    num = [0] * (upto + 1)
    num[0] = 1
    for d in degrees:
        nxt = list(num)
        for k in range(d, upto + 1):
            nxt[k] -= num[k - d]
        num = nxt
    series = [0] * (upto + 1)
    for k in range(upto + 1):
        # coefficient of t^k in 1/(1-t)^nvars
        series[k] = comb(k + nvars - 1, k) if nvars else (1 if k == 0 else 0)
    out = [0] * (upto + 1)
    for i, a in enumerate(num):
        if a:
            for k in range(upto + 1 - i):
                out[i + k] += a * series[k]
    return out


@dataclass
class RegularSequenceReport:
    max_degree: int
    table: list  # per degree: {"degree", "ideal_dim", "predicted_ideal_dim"}
    first_failure: int | None

    @property
    def passed(self) -> bool:
        return self.first_failure is None

    def to_dict(self):
        return {
            "verdict": (f"PASS up to degree {self.max_degree}" if self.passed
                        else f"FAIL at degree {self.first_failure}"),
            "max_degree": self.max_degree,
            "table": self.table,
            "first_failure": self.first_failure,
            "note": "necessary condition only; checked within the stated degree",
        }


def regular_sequence_probe(fs: Sequence[SymElement], d: int) -> RegularSequenceReport:
    """Compare ideal dimensions degree by degree with the Koszul prediction."""
    if not fs:
        raise StructuralError("regular_sequence_probe needs at least one polynomial")
    nvars, ring = fs[0].nvars, fs[0].ring
    for f in fs:
        if f.is_zero() or not f.is_homogeneous():
            raise StructuralError("regular_sequence_probe needs nonzero homogeneous polynomials")
        if f.nvars != nvars or f.ring != ring:
            raise StructuralError("polynomials live in different rings")
    degs = [f.degree() for f in fs]
    quotient = _koszul_hilbert(nvars, degs, d)
    table = []
    first = None
    for k in range(d + 1):
        monos = monomials_of_degree(nvars, k)
        col = {m: i for i, m in enumerate(monos)}
        vecs = []
        for f, df in zip(fs, degs):
            if df > k:
                continue
            for m in monomials_of_degree(nvars, k - df):
                prod = f * SymElement(nvars, ring, {m: 1})
                vecs.append({col[t]: c for t, c in prod.terms.items()})
        rank = echelonize(vecs, ring, len(monos)).rank if vecs else 0
        predicted = len(monos) - quotient[k]
        table.append({"degree": k, "ideal_dim": rank, "predicted_ideal_dim": predicted})
        if first is None and rank != predicted:
            first = k
    return RegularSequenceReport(d, table, first)

