"""Exact coefficient rings and linear algebra over them.

Coefficients are stored as plain Python ``int`` (residues in ``[0, modulus)``)
or :class:`fractions.Fraction`; the :class:`Ring` object carries the tag and
does the normalisation.  Vectors are sparse ``dict[int, coeff]`` keyed by
column index.  Echelon forms pick the *smallest* nonzero column as pivot, so
callers that want leading-term pivots order their columns accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DivisibilityError, InvertibilityError, StructuralError

Vector = dict  # dict[int, coefficient]


@dataclass(frozen=True)
class Ring:
    """Tag for one of the supported coefficient rings.

    ``kind`` is one of ``"Fp"`` (integers mod p), ``"Zp2"`` (integers mod p^2),
    ``"Q"`` (rationals) or ``"Z"`` (integers).
    """

    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind in ("Fp", "Zp2"):
            if self.p is None or self.p < 2 or not is_prime(self.p):
                raise StructuralError(f"{self.kind} needs a prime, got {self.p!r}")
        elif self.kind in ("Q", "Z"):
            if self.p is not None:
                raise StructuralError(f"ring {self.kind} takes no prime")
        else:
            raise StructuralError(f"unknown ring kind {self.kind!r}")

    @classmethod
    def mod_p(cls, p: int) -> "Ring":
        return cls("Fp", p)

    @classmethod
    def mod_p2(cls, p: int) -> "Ring":
        return cls("Zp2", p)

    @property
    def modulus(self) -> int | None:
        if self.kind == "Fp":
            return self.p
        if self.kind == "Zp2":
            return self.p * self.p
        return None

    @property
    def is_field(self) -> bool:
        return self.kind in ("Fp", "Q")

    @property
    def characteristic(self) -> int:
        return self.modulus or 0

    def __str__(self):
        return {"Fp": f"F_{self.p}", "Zp2": f"Z/{self.p}^2", "Q": "Q", "Z": "Z"}[self.kind]

    def __call__(self, x):
        """Coerce an int, Fraction or ``"num/den"`` string into this ring."""
        if isinstance(x, Scalar):
            if x.ring != self:
                raise StructuralError(f"cannot coerce {x.ring} scalar into {self}")
            return x.value
        if isinstance(x, str):
            x = Fraction(x)
        n = self.modulus
        if n is not None:
            if isinstance(x, Fraction):
                if x.denominator == 1:
                    return x.numerator % n
                den = x.denominator % n
                if den % self.p == 0:
                    raise InvertibilityError(f"denominator {x.denominator} is not invertible in {self}")
                return x.numerator * pow(den, -1, n) % n
            return int(x) % n
        if self.kind == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise InvertibilityError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        x = Fraction(x)
        return x.numerator if x.denominator == 1 else x

    def normalize(self, x):
        n = self.modulus
        if n is not None:
            return x % n
        if isinstance(x, Fraction) and x.denominator == 1:
            return x.numerator
        return x

    def inv(self, x):
        n = self.modulus
        if n is not None:
            if x % self.p == 0:
                raise InvertibilityError(f"{x} is not a unit in {self}")
            return pow(x, -1, n)
        if x == 0:
            raise InvertibilityError("division by zero")
        if self.kind == "Z":
            if x in (1, -1):
                return x
            raise InvertibilityError(f"{x} is not a unit in Z")
        return self.normalize(Fraction(1) / x)

    def to_json(self, x) -> str | int:
        if isinstance(x, Fraction):
            return f"{x.numerator}/{x.denominator}"
        return int(x)


QQ = Ring("Q")
ZZ = Ring("Z")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def prime_factors(n: int) -> set[int]:
    n = abs(n)
    out = set()
    k = 2
    while k * k <= n:
        while n % k == 0:
            out.add(k)
            n //= k
        k += 1
    if n > 1:
        out.add(n)
    return out


@dataclass(frozen=True)
class Scalar:
    """A single tagged coefficient; arithmetic refuses to mix rings."""

    value: object
    ring: Ring

    def __post_init__(self):
        object.__setattr__(self, "value", self.ring(self.value))

    def _check(self, other):
        if isinstance(other, Scalar):
            if other.ring != self.ring:
                raise StructuralError(f"mixing {self.ring} and {other.ring}")
            return other.value
        return self.ring(other)

    def __add__(self, other):
        return Scalar(self.value + self._check(other), self.ring)

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.value - self._check(other), self.ring)

    def __mul__(self, other):
        return Scalar(self.value * self._check(other), self.ring)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(-self.value, self.ring)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.ring == other.ring and self.value == other.value
        try:
            return self.value == self.ring(other)
        except (TypeError, ValueError, ArithmeticError):
            return NotImplemented

    def __hash__(self):
        return hash((self.value, self.ring))

    def __repr__(self):
        return f"Scalar({self.value}, {self.ring})"


def project_mod_p(x: Scalar) -> Scalar:
    """Reduce an element of Z/p^2 (or an integer/rational with p given) to F_p."""
    if x.ring.kind != "Zp2":
        raise StructuralError(f"project_mod_p expects Z/p^2, got {x.ring}")
    return Scalar(x.value % x.ring.p, Ring.mod_p(x.ring.p))


def lift_canonical(x: Scalar) -> Scalar:
    """Representative in ``[0, p)`` of an F_p element, viewed in Z/p^2."""
    if x.ring.kind != "Fp":
        raise StructuralError(f"lift_canonical expects F_p, got {x.ring}")
    return Scalar(x.value, Ring.mod_p2(x.ring.p))


def divide_exact_by_p(x: Scalar) -> Scalar:
    """x/p in F_p for x in Z/p^2 divisible by p."""
    if x.ring.kind != "Zp2":
        raise StructuralError(f"divide_exact_by_p expects Z/p^2, got {x.ring}")
    p = x.ring.p
    if x.value % p:
        raise DivisibilityError(f"{x.value} is not divisible by {p} in Z/{p * p}")
    return Scalar(x.value // p, Ring.mod_p(p))


# ---------------------------------------------------------------------------
# sparse vectors


def vec_axpy(y: Vector, a, x: Mapping, ring: Ring) -> None:
    """In place ``y += a*x``; zero entries are dropped."""
    n = ring.modulus
    for k, c in x.items():
        v = y.get(k, 0) + a * c
        if n is not None:
            v %= n
        elif isinstance(v, Fraction) and v.denominator == 1:
            v = v.numerator
        if v:
            y[k] = v
        else:
            y.pop(k, None)


def vec_scale(x: Mapping, a, ring: Ring) -> Vector:
    out = {}
    for k, c in x.items():
        v = ring.normalize(a * c)
        if v:
            out[k] = v
    return out


def _as_sparse(vectors, ring: Ring, ncols: int | None):
    """Normalise dense lists, Scalar lists or dicts into sparse dicts."""
    rows = []
    for v in vectors:
        if isinstance(v, Mapping):
            if ncols is None:
                raise StructuralError("sparse vectors need an explicit ncols")
            d = {}
            for k, c in v.items():
                if not 0 <= k < ncols:
                    raise StructuralError(f"column {k} outside [0, {ncols})")
                c = ring(c)
                if c:
                    d[k] = c
            rows.append(d)
            continue
        v = list(v)
        if ncols is None:
            ncols = len(v)
        elif len(v) != ncols:
            raise StructuralError(f"vector of length {len(v)} in a family of length {ncols}")
        d = {}
        for k, c in enumerate(v):
            c = ring(c)
            if c:
                d[k] = c
        rows.append(d)
    return rows, (ncols if ncols is not None else 0)


def _infer_ring(vectors) -> Ring | None:
    found = None
    for v in vectors:
        entries = v.values() if isinstance(v, Mapping) else v
        for c in entries:
            if isinstance(c, Scalar):
                if found is not None and c.ring != found:
                    raise StructuralError(f"mixed rings {found} and {c.ring}")
                found = c.ring
    return found


class Eliminator:
    """Incremental semi-echelon form with optional combination tracking.

    Each stored row has its pivot as smallest column and a unit pivot entry.
    With ``track=True`` every row remembers which inserted vectors it is a
    combination of, which is what :func:`solve_combination` needs.
    """

    def __init__(self, ring: Ring, track: bool = False):
        if not ring.is_field:
            raise StructuralError(f"echelon forms need a field, got {ring}")
        self.ring = ring
        self.track = track
        self.rows: dict[int, Vector] = {}
        self.combos: dict[int, Vector] = {}
        self._count = 0

    def reduce(self, v: Mapping, combo: Vector | None = None) -> Vector:
        v = dict(v)
        ring = self.ring
        for c in sorted(self.rows):
            a = v.get(c)
            if a:
                vec_axpy(v, -a, self.rows[c], ring)
                if combo is not None:
                    vec_axpy(combo, -a, self.combos[c], ring)
        return v

    def insert(self, v: Mapping) -> int | None:
        """Add ``v``; return the new pivot or None if ``v`` was dependent."""
        idx = self._count
        self._count += 1
        combo = {idx: 1} if self.track else None
        v = self.reduce(v, combo)
        if not v:
            return None
        c = min(v)
        inv = self.ring.inv(v[c])
        self.rows[c] = vec_scale(v, inv, self.ring)
        if self.track:
            self.combos[c] = vec_scale(combo, inv, self.ring)
        return c

    def basis(self, ncols: int) -> "EchelonBasis":
        ring = self.ring
        pivots = sorted(self.rows)
        rows = {c: dict(self.rows[c]) for c in pivots}
        # back substitution: clear every pivot column in the other rows
        for c in reversed(pivots):
            r = rows[c]
            for c2 in pivots:
                if c2 >= c:
                    break
                a = rows[c2].get(c)
                if a:
                    vec_axpy(rows[c2], -a, r, ring)
        return EchelonBasis(ncols, tuple(rows[c] for c in pivots), tuple(pivots), ring)


@dataclass(frozen=True)
class EchelonBasis:
    """Reduced row-echelon basis of a subspace of ``ring^ncols``."""

    ncols: int
    rows: tuple
    pivots: tuple
    ring: Ring
    _pivot_index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_pivot_index", {c: i for i, c in enumerate(self.pivots)})

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, v: Mapping) -> Vector:
        v = dict(v)
        ring = self.ring
        for c, r in zip(self.pivots, self.rows):
            a = v.get(c)
            if a:
                vec_axpy(v, -a, r, ring)
        return v

    def contains(self, v: Mapping) -> bool:
        return not self.reduce(v)

    def coordinates(self, v: Mapping) -> list | None:
        """Coefficients of ``v`` on the rows, or None when ``v`` is outside the span."""
        if self.reduce(v):
            return None
        return [v.get(c, 0) for c in self.pivots]

    def dense_rows(self) -> list[list]:
        return [[r.get(k, 0) for k in range(self.ncols)] for r in self.rows]

    def __repr__(self):
        return f"EchelonBasis(rank={self.rank}, ncols={self.ncols}, ring={self.ring})"


def echelonize(vectors: Sequence, ring: Ring | None = None, ncols: int | None = None) -> EchelonBasis:
    """Reduced row-echelon basis of the span of ``vectors``.

    Vectors may be dense sequences (ints, Fractions or :class:`Scalar`) or
    sparse dicts; sparse input requires ``ncols``.
    """
    inferred = _infer_ring(vectors)
    if ring is None:
        ring = inferred
    elif inferred is not None and inferred != ring:
        raise StructuralError(f"vectors live in {inferred}, asked for {ring}")
    if ring is None:
        raise StructuralError("cannot infer the coefficient ring")
    rows, ncols = _as_sparse(vectors, ring, ncols)
    elim = Eliminator(ring)
    for v in rows:
        elim.insert(v)
    return elim.basis(ncols)


def nullspace(matrix: Sequence, ring: Ring | None = None, ncols: int | None = None) -> EchelonBasis:
    """Echelon basis of ``{v : M v = 0}``; rows of ``matrix`` may be sparse."""
    if ring is None:
        ring = _infer_ring(matrix)
        if ring is None:
            raise StructuralError("cannot infer the coefficient ring")
    if ncols is None and len(matrix) and not isinstance(matrix[0], Mapping):
        ncols = len(matrix[0])
    if ncols is None:
        raise StructuralError("nullspace needs the column count")
    rref = echelonize(matrix, ring, ncols)
    pivset = set(rref.pivots)
    kernel = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = {f: 1}
        for c, r in zip(rref.pivots, rref.rows):
            a = r.get(f)
            if a:
                v[c] = ring.normalize(-a)
        kernel.append(v)
    return echelonize(kernel, ring, ncols)


def solve_combination(vectors: Sequence[Mapping], target: Mapping, ring: Ring) -> dict | None:
    """Coefficients ``lam`` with ``sum lam[i]*vectors[i] == target``, or None."""
    elim = Eliminator(ring, track=True)
    for v in vectors:
        elim.insert(v)
    combo: Vector = {}
    rest = elim.reduce(target, combo)
    if rest:
        return None
    return {i: ring.normalize(-c) for i, c in combo.items() if ring.normalize(-c)}


def rank(matrix: Sequence, ring: Ring, ncols: int | None = None) -> int:
    return echelonize(matrix, ring, ncols).rank


# ---------------------------------------------------------------------------
# small dense matrices


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence], ring: Ring) -> list[list]:
    n, m, k = len(a), len(b), (len(b[0]) if b else 0)
    if a and len(a[0]) != m:
        raise StructuralError("matrix shapes do not compose")
    return [[ring.normalize(sum(a[i][t] * b[t][j] for t in range(m))) for j in range(k)] for i in range(n)]


def identity(n: int) -> list[list]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_inverse(a: Sequence[Sequence], ring: Ring) -> list[list] | None:
    """Inverse of a square matrix over a field, or None if singular."""
    n = len(a)
    aug = [list(map(ring, row)) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = ring.inv(aug[col][col])
        aug[col] = [ring.normalize(x * inv) for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [ring.normalize(x - f * y) for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def charpoly(a: Sequence[Sequence], ring: Ring) -> list:
    """Characteristic polynomial ``det(t*I - A)`` as coefficients, constant first.

    Hessenberg reduction followed by the standard three-term recurrence; works
    over any field.
    """
    n = len(a)
    h = [list(map(ring, row)) for row in a]
    for m in range(1, n - 1):
        piv = next((i for i in range(m, n) if h[i][m - 1]), None)
        if piv is None:
            continue
        if piv != m:
            h[m], h[piv] = h[piv], h[m]
            for row in h:
                row[m], row[piv] = row[piv], row[m]
        inv = ring.inv(h[m][m - 1])
        for i in range(m + 1, n):
            f = ring.normalize(h[i][m - 1] * inv)
            if not f:
                continue
            h[i] = [ring.normalize(x - f * y) for x, y in zip(h[i], h[m])]
            for row in h:
                row[m] = ring.normalize(row[m] + f * row[i])
    # p_k(t) = charpoly of the leading k x k block
    polys = [[1]]
    for k in range(1, n + 1):
        prev = polys[-1]
        cur = [0] + prev  # t * p_{k-1}
        cur = _poly_add(cur, [ring.normalize(-h[k - 1][k - 1] * c) for c in prev], ring)
        prod = 1
        for i in range(k - 1, 0, -1):
            prod = ring.normalize(prod * h[i][i - 1])
            coef = ring.normalize(prod * h[i - 1][k - 1])
            if coef:
                cur = _poly_add(cur, [ring.normalize(-coef * c) for c in polys[i - 1]], ring)
        polys.append(cur)
    return polys[n]


def _poly_add(a: list, b: list, ring: Ring) -> list:
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = ring.normalize(out[i] + c)
    return out


def poly_from_roots(roots: Iterable, ring: Ring) -> list:
    """Coefficients (constant first) of ``prod (t - r)``."""
    out = [1]
    for r in roots:
        r = ring(r)
        shifted = [0] + out
        out = _poly_add(shifted, [ring.normalize(-r * c) for c in out], ring)
    return out
