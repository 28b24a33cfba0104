"""Regenerate the bundled algebra files from their matrix realizations."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from pathlib import Path

from modlie.exact_linalg import QQ, mat_mul, solve_combination
from modlie.lie_core import LieAlgebraPresentation
from modlie.parsing import algebra_to_dict, canonical_json
from modlie.sym_poisson import invariant_basis

OUT = Path(__file__).resolve().parent.parent / "src" / "modlie" / "data"


def unit(n, i, j):
    return [[1 if (r, c) == (i, j) else 0 for c in range(n)] for r in range(n)]


def diag(*d):
    return [[d[r] if r == c else 0 for c in range(len(d))] for r in range(len(d))]


def from_matrices(name, basis, mats, **extra):
    flat = [{k: Fraction(x) for k, x in enumerate(v for row in m for v in row) if x} for m in mats]
    brackets = []
    for i, j in itertools.combinations(range(len(mats)), 2):
        ab, ba = mat_mul(mats[i], mats[j], QQ), mat_mul(mats[j], mats[i], QQ)
        target = {k: Fraction(x - y) for k, (x, y) in enumerate(zip(sum(ab, []), sum(ba, []))) if x != y}
        coeffs = solve_combination(flat, target, QQ)
        assert coeffs is not None, (name, i, j)
        if coeffs:
            brackets.append((i, j, coeffs))
    return LieAlgebraPresentation(name, tuple(basis), brackets, tuple(tuple(map(tuple, m)) for m in mats), **extra)


def main():
    OUT.mkdir(exist_ok=True)
    algebras = []
    sl2 = from_matrices("sl2", "e f h".split(), [unit(2, 0, 1), unit(2, 1, 0), diag(1, -1)],
                        invariants={"casimir": "4*e*f + h^2"}, assumption_asserted=True)
    algebras.append(("sl2", sl2))
    sl3 = from_matrices(
        "sl3", "e1 e2 e3 f1 f2 f3 h1 h2".split(),
        [unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2), unit(3, 1, 0), unit(3, 2, 1), unit(3, 2, 0),
         diag(1, -1, 0), diag(0, 1, -1)],
        assumption_asserted=True,
    )
    for deg, label in ((2, "quadratic"), (3, "cubic")):
        (inv,) = invariant_basis(sl3, deg)
        inv = inv * math.lcm(*(Fraction(c).denominator for c in inv.terms.values()))
        sl3.invariants[label] = inv.format(sl3.basis)
    algebras.append(("sl3", sl3))
    algebras.append(("heis3", from_matrices("h3", "x y z".split(), [unit(3, 0, 1), unit(3, 1, 2), unit(3, 0, 2)])))
    algebras.append(("b2", from_matrices("b2", "x y".split(), [diag(1, 0), unit(2, 0, 1)])))
    for n in (1, 2, 3):
        basis = "abc"[:n]
        algebras.append((f"abelian{n}", LieAlgebraPresentation(
            f"abelian{n}", tuple(basis), [], pmap=tuple({} for _ in basis))))
    for stem, g in algebras:
        (OUT / f"{stem}.json").write_text(canonical_json(algebra_to_dict(g)))
        print(stem, g.invariants)


if __name__ == "__main__":
    main()
