"""Algebra files, polynomial expressions and automorphism image files.

Algebra files are JSON with exact rationals written as strings ``"num/den"``;
floats are rejected.  Polynomial expressions use ``+ - * ^`` (``**`` also
accepted), parentheses, integers, rationals and basis symbols, and are
parsed with the standard :mod:`ast` module.
"""

from __future__ import annotations

import ast
import hashlib
import json
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from .errors import ParseError, ValidationFailure
from .exact_linalg import QQ, Ring
from .lie_core import LieAlgebraPresentation, validate
from .pbw import PBWContext, UEAElement, pbw_context
from .sym_poisson import SymElement

# ---------------------------------------------------------------------------
# scalars


def parse_rational(value: Any, where: str = "value") -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"{where}: expected an integer or a 'num/den' string, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            text = value.strip()
            if "." in text or "e" in text.lower():
                raise ValueError
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{where}: {value!r} is not an exact rational") from None
    raise ParseError(f"{where}: expected an integer or a 'num/den' string, got {type(value).__name__}")


def format_rational(c) -> int | str:
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# expressions


def _evaluate(text: str, var: Callable[[str], Any], const: Callable[[Fraction], Any]):
    src = text.replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None

    def number(node) -> Fraction | None:
        """Exact value of a constant subexpression, else None."""
        if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = number(node.operand)
            return None if v is None else (-v if isinstance(node.op, ast.USub) else v)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
            a, b = number(node.left), number(node.right)
            if a is not None and b:
                return a / b
        return None

    def ev(node):
        n = number(node)
        if n is not None:
            return const(n)
        if isinstance(node, ast.Name):
            return var(node.id)
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -ev(node.operand)
            if isinstance(node.op, ast.UAdd):
                return ev(node.operand)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return ev(node.left) + ev(node.right)
            if isinstance(node.op, ast.Sub):
                return ev(node.left) - ev(node.right)
            if isinstance(node.op, ast.Mult):
                return ev(node.left) * ev(node.right)
            if isinstance(node.op, ast.Pow):
                e = number(node.right)
                if e is None or e.denominator != 1 or e < 0:
                    raise ParseError(f"{text!r}: exponents must be non-negative integers")
                return ev(node.left) ** int(e)
            if isinstance(node.op, ast.Div):
                d = number(node.right)
                if not d:
                    raise ParseError(f"{text!r}: division only by nonzero constants")
                return ev(node.left) * const(1 / d)
        raise ParseError(f"{text!r}: unsupported syntax {type(node).__name__}")

    return ev(tree.body)


def parse_uea(text: str, ctx: PBWContext) -> UEAElement:
    """Noncommutative reading: products are taken in the written order."""
    basis = ctx.algebra.basis

    def var(name):
        if name not in basis:
            raise ParseError(f"{text!r}: unknown symbol {name!r} (basis {list(basis)})")
        return ctx.gen(name)

    return _evaluate(text, var, ctx.scalar)


def parse_sym(text: str, basis, ring: Ring = QQ) -> SymElement:
    """Commutative reading in Sym(g)."""
    basis = list(basis)
    n = len(basis)

    def var(name):
        if name not in basis:
            raise ParseError(f"{text!r}: unknown symbol {name!r} (basis {basis})")
        return SymElement.variable(n, ring, basis.index(name))

    return _evaluate(text, var, lambda c: SymElement.constant(n, ring, c))


# ---------------------------------------------------------------------------
# algebra files


def _symbol_index(basis, key, where) -> int:
    if isinstance(key, int) and not isinstance(key, bool):
        if 0 <= key < len(basis):
            return key
    elif isinstance(key, str):
        if key in basis:
            return basis.index(key)
        if key.isdigit() and int(key) < len(basis):
            return int(key)
    raise ParseError(f"{where}: {key!r} is not a basis symbol")


def _coeff_map(basis, obj, where) -> dict:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object mapping basis symbols to rationals")
    out = {}
    for k, v in obj.items():
        idx = _symbol_index(basis, k, f"{where}.{k}")
        out[idx] = parse_rational(v, f"{where}.{k}")
    return out


def algebra_from_dict(data: dict, source: str = "<data>") -> LieAlgebraPresentation:
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in ("name", "basis"):
        if key not in data:
            raise ParseError(f"{source}: missing field {key!r}")
    basis = data["basis"]
    if not isinstance(basis, list) or not all(isinstance(s, str) and s.isidentifier() for s in basis):
        raise ParseError(f"{source}: field 'basis' must be a list of identifiers")
    brackets = []
    for n, entry in enumerate(data.get("brackets", [])):
        where = f"{source}: brackets[{n}]"
        if not isinstance(entry, dict) or not {"i", "j", "coefficients"} <= set(entry):
            raise ParseError(f"{where}: needs fields i, j, coefficients")
        i = _symbol_index(basis, entry["i"], f"{where}.i")
        j = _symbol_index(basis, entry["j"], f"{where}.j")
        brackets.append((i, j, _coeff_map(basis, entry["coefficients"], f"{where}.coefficients")))
    matrices = None
    if data.get("matrices") is not None:
        mats = data["matrices"]
        if not isinstance(mats, list):
            raise ParseError(f"{source}: 'matrices' must be a list of square matrices")
        matrices = []
        for n, m in enumerate(mats):
            if not isinstance(m, list) or any(not isinstance(r, list) or len(r) != len(m) for r in m):
                raise ParseError(f"{source}: matrices[{n}] is not square")
            matrices.append(tuple(tuple(parse_rational(x, f"{source}: matrices[{n}]") for x in r) for r in m))
        matrices = tuple(matrices)
    pmap = None
    if data.get("pmap") is not None:
        raw = data["pmap"]
        if isinstance(raw, dict):
            missing = [s for s in basis if s not in raw]
            if missing:
                raise ParseError(f"{source}: pmap lacks values for {missing}")
            raw = [raw[s] for s in basis]
        if not isinstance(raw, list) or len(raw) != len(basis):
            raise ParseError(f"{source}: pmap needs one coefficient map per basis element")
        pmap = tuple(_coeff_map(basis, v, f"{source}: pmap[{n}]") for n, v in enumerate(raw))
    invariants = data.get("invariants", {}) or {}
    if not isinstance(invariants, dict) or not all(isinstance(v, str) for v in invariants.values()):
        raise ParseError(f"{source}: 'invariants' must map names to polynomial strings")
    for name, text in invariants.items():
        parse_sym(text, basis)  # diagnostics early
    return LieAlgebraPresentation(
        name=str(data["name"]),
        basis=tuple(basis),
        raw_brackets=brackets,
        matrices=matrices,
        pmap=pmap,
        invariants=dict(invariants),
        assumption_asserted=bool(data.get("assumption_asserted", False)),
    )


def algebra_to_dict(g: LieAlgebraPresentation) -> dict:
    out: dict = {
        "name": g.name,
        "basis": list(g.basis),
        "brackets": [
            {"i": g.basis[i], "j": g.basis[j],
             "coefficients": {g.basis[k]: format_rational(c) for k, c in sorted(v.items())}}
            for (i, j), v in sorted(g.constants.items()) if v
        ],
        "assumption_asserted": g.assumption_asserted,
        "invariants": dict(g.invariants),
    }
    if g.matrices is not None:
        out["matrices"] = [[[format_rational(x) for x in r] for r in m] for m in g.matrices]
    if g.pmap is not None:
        out["pmap"] = {g.basis[n]: {g.basis[k]: format_rational(c) for k, c in sorted(v.items())}
                       for n, v in enumerate(g.pmap)}
    return out


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def algebra_hash(g: LieAlgebraPresentation) -> str:
    text = json.dumps(algebra_to_dict(g), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _load_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("modlie.data").iterdir() if p.name.endswith(".json"))


def _bundled_lookup(name: str):
    stem = name[:-5] if name.endswith(".json") else name
    files = resources.files("modlie.data")
    direct = files / f"{stem}.json"
    if direct.is_file():
        return direct
    for p in files.iterdir():
        if p.name.endswith(".json") and json.loads(p.read_text()).get("name") == stem:
            return p
    return None


def parse_algebra(path: str | Path, check: bool = True) -> LieAlgebraPresentation:
    """Load an algebra file, falling back to the bundled examples by name."""
    p = Path(path)
    if p.is_file():
        text, source = p.read_text(encoding="utf-8"), str(p)
    else:
        found = _bundled_lookup(Path(str(path)).name)
        if found is None:
            raise ParseError(f"{path}: no such file or bundled algebra (bundled: {', '.join(bundled_names())})")
        text, source = found.read_text(encoding="utf-8"), f"bundled:{found.name}"
    g = algebra_from_dict(_load_json(text, source), source)
    if check:
        report = validate(g)
        if not report.ok:
            first = report.failures[0]
            raise ValidationFailure(f"{source}: {first}", report)
    return g


def load_bundled(name: str) -> LieAlgebraPresentation:
    found = _bundled_lookup(name)
    if found is None:
        raise ParseError(f"no bundled algebra {name!r}")
    return parse_algebra(str(found))


# ---------------------------------------------------------------------------
# automorphism image files


def parse_images(path_or_data, g: LieAlgebraPresentation) -> tuple[list[UEAElement], dict]:
    """Generator images over Q from ``{"images": {...} or [...], "order": m}``.

    Returns the images and the remaining metadata.
    """
    if isinstance(path_or_data, (str, Path)):
        p = Path(path_or_data)
        data = _load_json(p.read_text(encoding="utf-8"), str(p))
        source = str(p)
    else:
        data, source = path_or_data, "<images>"
    if not isinstance(data, dict) or "images" not in data:
        raise ParseError(f"{source}: expected an object with an 'images' field")
    raw = data["images"]
    if isinstance(raw, dict):
        missing = [s for s in g.basis if s not in raw]
        if missing:
            raise ParseError(f"{source}: images missing for {missing}")
        raw = [raw[s] for s in g.basis]
    if not isinstance(raw, list) or len(raw) != g.dim or not all(isinstance(t, str) for t in raw):
        raise ParseError(f"{source}: need {g.dim} image polynomials")
    ctx = pbw_context(g, QQ)
    images = [parse_uea(t, ctx) for t in raw]
    meta = {k: v for k, v in data.items() if k != "images"}
    if "order" in meta and (not isinstance(meta["order"], int) or meta["order"] < 1):
        raise ParseError(f"{source}: 'order' must be a positive integer")
    return images, meta
