"""Sparse PBW normal forms in the enveloping algebra.

Elements are dicts from exponent tuples ``(a_1, ..., a_l)`` (the ordered
monomial ``x_1^a_1 ... x_l^a_l``) to coefficients of a :class:`Ring`.
All straightening goes through one :class:`PBWContext` per (algebra, ring)
pair, which memoises monomial-by-generator products.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .errors import ResourceLimit, StructuralError
from .exact_linalg import Ring, vec_axpy
from .lie_core import LieAlgebraPresentation

DEFAULT_MONOMIAL_CAP = 250_000


def degree(m: tuple) -> int:
    return sum(m)


def mono_key(m: tuple):
    """Sort key of the graded lexicographic order (larger key = larger monomial)."""
    return (sum(m), m)


def _add(out: dict, m, c, n):
    v = out.get(m, 0) + c
    if n is not None:
        v %= n
    elif isinstance(v, Fraction) and v.denominator == 1:
        v = v.numerator
    if v:
        out[m] = v
    else:
        out.pop(m, None)


class PBWContext:
    """Straightening engine for the enveloping algebra of ``algebra`` over ``ring``.

    The caches only ever grow with deterministic values, so concurrent readers
    see identical results; inserts are guarded by a lock.
    """

    def __init__(self, algebra: LieAlgebraPresentation, ring: Ring):
        self.algebra = algebra
        self.ring = ring
        self.l = algebra.dim
        self.table = algebra.bracket_table(ring)
        self._mod = ring.modulus
        self._mg: dict = {}
        self._gm: dict = {}
        self._mm: dict = {}
        self._lock = threading.Lock()
        self._units = [tuple(1 if k == i else 0 for k in range(self.l)) for i in range(self.l)]

    def __repr__(self):
        return f"PBWContext({self.algebra.name}, {self.ring})"

    def same_as(self, other: "PBWContext") -> bool:
        return self is other or (self.algebra is other.algebra and self.ring == other.ring)

    # -- constructors --------------------------------------------------------

    def element(self, terms: Mapping) -> "UEAElement":
        ring = self.ring
        clean = {}
        for m, c in terms.items():
            m = tuple(m)
            if len(m) != self.l:
                raise StructuralError(f"monomial {m} has wrong length for {self.algebra.name}")
            c = ring(c)
            if c:
                clean[m] = c
        return UEAElement(self, clean)

    def zero(self) -> "UEAElement":
        return UEAElement(self, {})

    def one(self) -> "UEAElement":
        return self.scalar(1)

    def scalar(self, c) -> "UEAElement":
        c = self.ring(c)
        return UEAElement(self, {(0,) * self.l: c} if c else {})

    def gen(self, i) -> "UEAElement":
        if isinstance(i, str):
            i = self.algebra.index(i)
        return UEAElement(self, {self._units[i]: 1})

    def from_vector(self, v: Mapping) -> "UEAElement":
        """Element with coordinates ``v`` in the basis of g (degree one)."""
        return UEAElement(self, {self._units[i]: c for i, c in v.items() if c})

    def monomial(self, exps: Sequence[int]) -> "UEAElement":
        return UEAElement(self, {tuple(exps): 1})

    def coerce(self, u: "UEAElement") -> "UEAElement":
        """Move ``u`` into this context.

        Allowed: anything from Q or Z (reduction), F_p -> Z/p^2 (canonical
        lift) and Z/p^2 -> F_p (projection).
        """
        if u.ctx.same_as(self):
            return u
        if u.ctx.algebra is not self.algebra:
            raise StructuralError("elements belong to different algebras")
        src, dst = u.ctx.ring, self.ring
        if src.kind in ("Q", "Z"):
            return self.element(u.terms)
        if src.kind == "Fp" and dst.kind == "Zp2" and src.p == dst.p:
            return UEAElement(self, dict(u.terms))
        if src.kind == "Zp2" and dst.kind == "Fp" and src.p == dst.p:
            return self.element({m: c % dst.p for m, c in u.terms.items()})
        if src == dst:
            return UEAElement(self, dict(u.terms))
        raise StructuralError(f"no canonical map {src} -> {dst}")

    # -- straightening -------------------------------------------------------

    def mono_times_gen(self, m: tuple, j: int) -> dict:
        key = (m, j)
        hit = self._mg.get(key)
        if hit is not None:
            return hit
        k = self.l - 1
        while k >= 0 and m[k] == 0:
            k -= 1
        n = self._mod
        if j >= k:
            res = {m[:j] + (m[j] + 1,) + m[j + 1:]: 1}
        else:
            mp = m[:k] + (m[k] - 1,) + m[k + 1:]
            res: dict = {}
            # m' x_k x_j = (m' x_j) x_k + m' [x_k, x_j]
            for t, c in self.mono_times_gen(mp, j).items():
                for t2, c2 in self.mono_times_gen(t, k).items():
                    _add(res, t2, c * c2, n)
            for idx, c in self.table.get((k, j), {}).items():
                for t2, c2 in self.mono_times_gen(mp, idx).items():
                    _add(res, t2, c * c2, n)
        with self._lock:
            self._mg.setdefault(key, res)
        return res

    def gen_times_mono(self, i: int, m: tuple) -> dict:
        key = (i, m)
        hit = self._gm.get(key)
        if hit is not None:
            return hit
        k = 0
        while k < self.l and m[k] == 0:
            k += 1
        n = self._mod
        if i <= k:
            res = {m[:i] + (m[i] + 1,) + m[i + 1:]: 1}
        else:
            mp = m[:k] + (m[k] - 1,) + m[k + 1:]
            res = {}
            # x_i x_k m' = x_k (x_i m') + [x_i, x_k] m'
            for t, c in self.gen_times_mono(i, mp).items():
                for t2, c2 in self.gen_times_mono(k, t).items():
                    _add(res, t2, c * c2, n)
            for idx, c in self.table.get((i, k), {}).items():
                for t2, c2 in self.gen_times_mono(idx, mp).items():
                    _add(res, t2, c * c2, n)
        with self._lock:
            self._gm.setdefault(key, res)
        return res

    def mono_times_mono(self, a: tuple, b: tuple) -> dict:
        # fast path: already ordered
        la = self.l - 1
        while la >= 0 and a[la] == 0:
            la -= 1
        fb = 0
        while fb < self.l and b[fb] == 0:
            fb += 1
        if fb == self.l:
            return {a: 1}
        if la <= fb:
            return {tuple(x + y for x, y in zip(a, b)): 1}
        key = (a, b)
        hit = self._mm.get(key)
        if hit is not None:
            return hit
        # a * b = (a * x_fb) * b', b = x_fb b'
        bp = b[:fb] + (b[fb] - 1,) + b[fb + 1:]
        n = self._mod
        res: dict = {}
        for t, c in self.mono_times_gen(a, fb).items():
            for t2, c2 in self.mono_times_mono(t, bp).items():
                _add(res, t2, c * c2, n)
        with self._lock:
            self._mm.setdefault(key, res)
        return res

    def multiply(self, u: "UEAElement", v: "UEAElement") -> "UEAElement":
        if not (u.ctx.same_as(self) and v.ctx.same_as(self)):
            raise StructuralError("multiply: operands live in different algebras or rings")
        n = self._mod
        out: dict = {}
        for m1, c1 in u.terms.items():
            for m2, c2 in v.terms.items():
                c = c1 * c2
                if n is not None:
                    c %= n
                    if not c:
                        continue
                for t, c3 in self.mono_times_mono(m1, m2).items():
                    _add(out, t, c * c3, n)
        return UEAElement(self, out)

    def left_gen(self, i: int, u: "UEAElement") -> "UEAElement":
        n = self._mod
        out: dict = {}
        for m, c in u.terms.items():
            for t, c2 in self.gen_times_mono(i, m).items():
                _add(out, t, c * c2, n)
        return UEAElement(self, out)

    def right_gen(self, u: "UEAElement", j: int) -> "UEAElement":
        n = self._mod
        out: dict = {}
        for m, c in u.terms.items():
            for t, c2 in self.mono_times_gen(m, j).items():
                _add(out, t, c * c2, n)
        return UEAElement(self, out)

    def ad_mono(self, i: int, m: tuple) -> dict:
        """Terms of ``x_i m - m x_i``."""
        n = self._mod
        out = dict(self.gen_times_mono(i, m))
        for t, c in self.mono_times_gen(m, i).items():
            _add(out, t, -c, n)
        return out


class UEAElement:
    """An element of the enveloping algebra in PBW normal form (immutable)."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: PBWContext, terms: dict):
        self.ctx = ctx
        self.terms = terms

    @property
    def ring(self) -> Ring:
        return self.ctx.ring

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Filtration degree; -1 for zero."""
        return max((sum(m) for m in self.terms), default=-1)

    def leading_monomial(self) -> tuple | None:
        return max(self.terms, key=mono_key) if self.terms else None

    def _other(self, other):
        if isinstance(other, UEAElement):
            if not other.ctx.same_as(self.ctx):
                raise StructuralError("operands live in different algebras or rings")
            return other
        return self.ctx.scalar(other)

    def __add__(self, other):
        other = self._other(other)
        out = dict(self.terms)
        n = self.ctx._mod
        for m, c in other.terms.items():
            _add(out, m, c, n)
        return UEAElement(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        ring = self.ring
        return UEAElement(self.ctx, {m: ring.normalize(-c) for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def scale(self, a) -> "UEAElement":
        ring = self.ring
        a = ring(a)
        out = {}
        for m, c in self.terms.items():
            v = ring.normalize(a * c)
            if v:
                out[m] = v
        return UEAElement(self.ctx, out)

    def __mul__(self, other):
        if isinstance(other, UEAElement):
            return self.ctx.multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not defined")
        result = self.ctx.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, UEAElement):
            return self.ctx.same_as(other.ctx) and self.terms == other.terms
        try:
            return self.terms == self.ctx.scalar(other).terms
        except (TypeError, ValueError, ArithmeticError):
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        return format_element(self)


def format_monomial(m: tuple, basis: Sequence[str]) -> str:
    parts = []
    for sym, a in zip(basis, m):
        if a == 1:
            parts.append(sym)
        elif a:
            parts.append(f"{sym}^{a}")
    return "*".join(parts) or "1"


def format_terms(terms: Mapping, basis: Sequence[str]) -> str:
    if not terms:
        return "0"
    out = ""
    for m in sorted(terms, key=mono_key, reverse=True):
        c = terms[m]
        sign, c = ("-", -c) if c < 0 else ("+", c)
        mono = format_monomial(m, basis)
        if mono == "1":
            piece = str(c)
        elif c == 1:
            piece = mono
        else:
            piece = f"{c}*{mono}"
        out = (f"-{piece}" if sign == "-" else piece) if not out else f"{out} {sign} {piece}"
    return out


def format_element(u: UEAElement) -> str:
    return format_terms(u.terms, u.ctx.algebra.basis)


# ---------------------------------------------------------------------------
# operations


def multiply(u: UEAElement, v: UEAElement) -> UEAElement:
    return u.ctx.multiply(u, v)


def counit(u: UEAElement):
    """Coefficient of the empty monomial."""
    return u.terms.get((0,) * u.ctx.l, 0)


def ad_action(x, u: UEAElement) -> UEAElement:
    """``x u - u x`` for a basis element ``x`` (index or symbol)."""
    ctx = u.ctx
    i = ctx.algebra.index(x) if isinstance(x, str) else x
    n = ctx._mod
    out: dict = {}
    for m, c in u.terms.items():
        for t, c2 in ctx.ad_mono(i, m).items():
            _add(out, t, c * c2, n)
    return UEAElement(ctx, out)


def is_central(u: UEAElement) -> bool:
    return all(ad_action(i, u).is_zero() for i in range(u.ctx.l))


def commutator(u: UEAElement, v: UEAElement) -> UEAElement:
    return u * v - v * u


@dataclass
class HomReport:
    ok: bool
    failures: list

    def to_dict(self):
        return {"verdict": "PASS" if self.ok else "FAIL", "failures": self.failures}


def verify_hom(images: Sequence[UEAElement]) -> HomReport:
    """Check ``[phi x_i, phi x_j] = sum_k c_ij^k phi x_k`` for all i < j."""
    if not images:
        raise StructuralError("no images given")
    ctx = images[0].ctx
    if len(images) != ctx.l:
        raise StructuralError(f"need {ctx.l} images, got {len(images)}")
    for u in images:
        if not u.ctx.same_as(ctx):
            raise StructuralError("images live in different contexts")
    basis = ctx.algebra.basis
    failures = []
    for i, j in itertools.combinations(range(ctx.l), 2):
        lhs = commutator(images[i], images[j])
        rhs = ctx.zero()
        for k, c in ctx.table.get((i, j), {}).items():
            rhs = rhs + images[k].scale(c)
        diff = lhs - rhs
        if not diff.is_zero():
            failures.append({"pair": [basis[i], basis[j]], "witness": format_element(diff)})
    return HomReport(not failures, failures)


class Homomorphism:
    """An algebra endomorphism of the enveloping algebra fixed by generator images."""

    def __init__(self, images: Sequence[UEAElement], check: bool = True):
        self.images = list(images)
        self.ctx = self.images[0].ctx
        self.report = verify_hom(self.images) if check else HomReport(True, [])
        if not self.report.ok:
            raise StructuralError(f"images do not define a homomorphism: {self.report.failures[0]}")
        self._powers: dict = {}

    def _power(self, i: int, a: int) -> UEAElement:
        key = (i, a)
        if key not in self._powers:
            if a == 0:
                self._powers[key] = self.ctx.one()
            else:
                self._powers[key] = self._power(i, a - 1) * self.images[i]
        return self._powers[key]

    def __call__(self, u: UEAElement) -> UEAElement:
        u = self.ctx.coerce(u)
        n = self.ctx._mod
        out: dict = {}
        for m, c in u.terms.items():
            img = self.ctx.one()
            for i, a in enumerate(m):
                if a:
                    img = img * self._power(i, a)
            for t, c2 in img.terms.items():
                _add(out, t, c * c2, n)
        return UEAElement(self.ctx, out)

    def compose(self, other: "Homomorphism") -> "Homomorphism":
        """``self o other``: x_i -> self(other(x_i))."""
        return Homomorphism([self(other.images[i]) for i in range(self.ctx.l)])

    def reduce(self, ctx: PBWContext) -> "Homomorphism":
        return Homomorphism([ctx.coerce(u) for u in self.images])

    def degree1_matrix(self) -> list[list]:
        """Matrix (columns = images) of the degree-one parts of the images."""
        l = self.ctx.l
        units = self.ctx._units
        return [[self.images[j].terms.get(units[i], 0) for j in range(l)] for i in range(l)]


def apply_hom(images, u: UEAElement) -> UEAElement:
    """Image of ``u`` under x_i -> images[i]; unverified image lists are checked first."""
    hom = images if isinstance(images, Homomorphism) else Homomorphism(images)
    return hom(u)


# ---------------------------------------------------------------------------
# monomial spaces


def monomial_count(l: int, d: int) -> int:
    return comb(l + d, d)


def monomials_of_degree(l: int, k: int) -> list[tuple]:
    """All exponent tuples of total degree ``k``, in descending lex order."""
    if l == 0:
        return [()] if k == 0 else []
    out = []
    for a in range(k, -1, -1):
        for rest in monomials_of_degree(l - 1, k - a):
            out.append((a,) + rest)
    return out


class MonomialIndex:
    """Column indexing of the monomials of degree <= d, largest monomial first.

    With this ordering the pivot chosen by :mod:`exact_linalg` (first nonzero
    column) is the leading monomial.
    """

    def __init__(self, l: int, d: int, cap: int = DEFAULT_MONOMIAL_CAP):
        count = monomial_count(l, d)
        if count > cap:
            raise ResourceLimit(f"{count} monomials of degree <= {d} in {l} variables exceed the cap {cap}")
        self.l = l
        self.d = d
        self.monomials: list[tuple] = []
        for k in range(d, -1, -1):
            self.monomials.extend(monomials_of_degree(l, k))
        self.index = {m: i for i, m in enumerate(self.monomials)}

    def __len__(self):
        return len(self.monomials)

    def degree_of(self, col: int) -> int:
        return sum(self.monomials[col])

    def to_vector(self, u: UEAElement) -> dict:
        try:
            return {self.index[m]: c for m, c in u.terms.items()}
        except KeyError as exc:
            raise StructuralError(f"monomial {exc.args[0]} exceeds degree cap {self.d}") from None

    def from_vector(self, ctx: PBWContext, v: Mapping) -> UEAElement:
        return UEAElement(ctx, {self.monomials[k]: c for k, c in v.items() if c})


def truncate(u: UEAElement, d: int, index: MonomialIndex | None = None):
    """Drop terms of degree > d; also return the coordinate vector."""
    kept = UEAElement(u.ctx, {m: c for m, c in u.terms.items() if sum(m) <= d})
    if index is None:
        index = MonomialIndex(u.ctx.l, d)
    return kept, index.to_vector(kept)


def vector_degree(v: Mapping, index: MonomialIndex) -> int:
    return max((index.degree_of(k) for k in v), default=-1)


def sum_elements(ctx: PBWContext, items: Iterable[tuple]) -> UEAElement:
    """``sum c * u`` over pairs ``(c, u)``."""
    out: dict = {}
    ring = ctx.ring
    for c, u in items:
        vec_axpy(out, ring(c), u.terms, ring)
    return UEAElement(ctx, out)


def pbw_context(algebra: LieAlgebraPresentation, ring: Ring) -> PBWContext:
    """Shared context per (algebra, ring) so the straightening caches are reused."""
    cache = algebra.__dict__.setdefault("_pbw_contexts", {})
    ctx = cache.get(ring)
    if ctx is None:
        ctx = cache.setdefault(ring, PBWContext(algebra, ring))
    return ctx
