"""Command-line front end.  Every command prints one canonical JSON report.

Exit codes: 0 for passing or informational results, 1 for failing verdicts,
2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .cotangent import (
    SIGN_CONVENTION,
    central_extension_report,
    character_twist,
    charpoly_sweep,
    check_canonical_map,
    check_lie_structure,
    compare_invariants,
    cotangent_algebra,
    cotangent_invariants,
    format_poly,
    g_part_matrix,
    induced_automorphism,
    required_degree,
)
from .errors import DegreeCapTooSmall, ModLieError, ParseError
from .exact_linalg import QQ, Ring, charpoly, echelonize, is_prime, prime_factors
from .lie_core import (
    LieAlgebraPresentation,
    derived_series_dims,
    is_nilpotent,
    killing_rank,
    make_character,
    random_characters,
    restricted_structure,
    validate,
    verify_restricted,
)
from .parsing import algebra_hash, canonical_json, load_bundled, parse_algebra, parse_images, parse_sym
from .pbw import Homomorphism, UEAElement, format_element, is_central, pbw_context
from .poisson_center import center_basis, center_freeness_report, kac_radul_check
from .sym_poisson import invariant_basis, kk_bracket, principal_symbol, regular_sequence_probe, symmetrize

DEFAULT_PRIMES = (3, 5, 7)
SEED = 0


# ---------------------------------------------------------------------------
# helpers shared by commands


def parse_primes(text: str) -> list[int]:
    """``"3,5,7"`` or ``"first:k"`` (the first k primes >= 3)."""
    text = text.strip()
    if text.startswith("first:"):
        try:
            k = int(text[6:])
        except ValueError:
            raise ParseError(f"bad prime policy {text!r}") from None
        out, n = [], 3
        while len(out) < k:
            if is_prime(n):
                out.append(n)
            n += 2
        return out
    try:
        primes = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"bad prime list {text!r}") from None
    for p in primes:
        if not is_prime(p):
            raise ParseError(f"{p} is not prime")
    return primes


def central_generators(g: LieAlgebraPresentation, ring: Ring, names: Sequence[str] | None = None) -> list[UEAElement]:
    """Symmetrized invariants f_i of the algebra file, reduced into ``ring``."""
    if names is None:
        names = sorted(g.invariants)
    ctx_q = pbw_context(g, QQ)
    ctx = pbw_context(g, ring)
    out = []
    for name in names:
        if name not in g.invariants:
            raise ParseError(f"{g.name} has no invariant named {name!r} (have {sorted(g.invariants)})")
        out.append(ctx.coerce(symmetrize(ctx_q, parse_sym(g.invariants[name], g.basis))))
    return out


def generator_bad_primes(g: LieAlgebraPresentation, names: Sequence[str] | None = None) -> set[int]:
    bad = set()
    for u in central_generators(g, QQ, names):
        for c in u.terms.values():
            bad |= prime_factors(Fraction(c).denominator)
    return bad


def prime_warnings(g: LieAlgebraPresentation, primes: Sequence[int], bad: set[int]) -> list[str]:
    out = ["p=2 is excluded by the p>=3 policy"]
    if bad:
        out.append(f"bad primes (denominators): {sorted(bad)}")
    for p in primes:
        if p in bad or p < 3:
            out.append(f"p={p} skipped: bad reduction or below 3")
        elif p <= g.dim:
            out.append(f"p={p} <= dim {g.dim}: statements of interest hold for large p only")
    return out


def pmap_warning(g: LieAlgebraPresentation) -> str:
    if g.pmap is not None:
        return "p-map: explicit values from the algebra file"
    return "p-map: p-th powers of the defining matrices (adopted convention)"


def good_primes(primes, bad) -> list[int]:
    return [p for p in primes if p >= 3 and p not in bad]


class Report:
    def __init__(self, command: str, args):
        self.command = command
        self.inputs: dict = {}
        self.results: dict = {}
        self.warnings: list = []
        self.verdict = "PASS"
        self.args = args

    def algebra(self, g: LieAlgebraPresentation, key: str = "algebra"):
        self.inputs[key] = {"name": g.name, "hash": algebra_hash(g), "basis": list(g.basis),
                            "assumption_asserted": g.assumption_asserted}

    def fail_if(self, cond: bool):
        if cond:
            self.verdict = "FAIL"

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "warnings": sorted(set(self.warnings)),
            "verdict": self.verdict,
            "provenance": {"tool": "modlie", "version": __version__, "seed": SEED},
        }


def _degree_for(args, p: int, default: int) -> int:
    return args.max_degree if args.max_degree is not None else default


def _setup(report: Report, args, g: LieAlgebraPresentation, extra_bad: set | None = None) -> list[int]:
    report.algebra(g)
    bad = g.bad_primes() | (extra_bad or set())
    report.inputs["primes"] = list(args.primes)
    report.warnings += prime_warnings(g, args.primes, bad)
    report.warnings.append(pmap_warning(g))
    primes = good_primes(args.primes, bad)
    if not primes:
        raise ModLieError(f"no good primes among {list(args.primes)}")
    return primes


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, report: Report):
    g = parse_algebra(args.algebra, check=False)
    rep = validate(g)
    report.algebra(g)
    report.results["validation"] = rep.to_dict()
    report.fail_if(not rep.ok)
    if not rep.ok:
        return
    primes = _setup(report, args, g)
    report.results["derived_series_dims"] = derived_series_dims(g)
    report.results["nilpotent"] = is_nilpotent(g)
    per = []
    for p in primes:
        rs = restricted_structure(g, p)
        rr = verify_restricted(rs)
        per.append({"prime": p, "pmap_source": rs.source, "restricted": rr.to_dict(),
                    "killing_rank": killing_rank(g, Ring.mod_p(p))})
        report.fail_if(not rr.ok)
    report.results["per_prime"] = per


def cmd_center(args, report: Report):
    g = parse_algebra(args.algebra)
    primes = _setup(report, args, g)
    caps, per = {}, []
    for p in primes:
        d = _degree_for(args, p, p)
        caps[str(p)] = d
        chunk = center_basis(restricted_structure(g, p), d)
        per.append({"prime": p, "degree_cap": d, "dimension": chunk.dim,
                    "dims_by_degree": chunk.dims_by_degree(),
                    "basis": [format_element(u) for u in chunk.elements()]})
    report.inputs["degree_caps"] = caps
    report.results["per_prime"] = per


def cmd_freeness(args, report: Report):
    g = parse_algebra(args.algebra)
    names = args.generators.split(",") if args.generators else None
    primes = _setup(report, args, g, generator_bad_primes(g, names))
    caps, per = {}, []
    for p in primes:
        d = _degree_for(args, p, 2 * p)
        caps[str(p)] = d
        rs = restricted_structure(g, p)
        gens = central_generators(g, rs.ring, names)
        rep = center_freeness_report(rs, gens, d)
        rep = {k: v for k, v in rep.items() if not k.startswith("_")}
        rep["prime"] = p
        rep["generators"] = [format_element(u) for u in gens]
        if rep["verdict"] != "PASS":
            # computed over F_p only: a failure is not evidence against the statement over a closed field
            rep["interpretation"] = "needs field extension or larger d"
        per.append(rep)
        report.fail_if(rep["verdict"] != "PASS")
    report.inputs["degree_caps"] = caps
    report.results["per_prime"] = per


def cmd_kac_radul(args, report: Report):
    g = parse_algebra(args.algebra)
    primes = _setup(report, args, g)
    per = []
    for p in primes:
        rep = kac_radul_check(restricted_structure(g, p), samples=args.samples, seed=SEED)
        rep["prime"] = p
        per.append(rep)
        report.fail_if(rep["verdict"] != "PASS")
    report.results["per_prime"] = per
    report.results["identity"] = "{i(a), i(b)} = -i([a, b]) for basis pairs a, b"


def _cotangent(args, report, g, rs, gens, kind):
    p = rs.p
    need = required_degree(p, gens)
    d = _degree_for(args, p, need)
    override = args.override
    if d < need and override:
        report.warnings.append(f"p={p}: degree cap {d} below the recommended {need}")
    if kind == "n" and not g.assumption_asserted:
        report.warnings.append("assumption not asserted for this algebra: quotient-center results are model-dependent")
    return cotangent_algebra(rs, gens, d, kind, override=override)


def cmd_cotangent(args, report: Report):
    g = parse_algebra(args.algebra)
    names = args.generators.split(",") if args.generators else None
    primes = _setup(report, args, g, generator_bad_primes(g, names))
    report.inputs["kind"] = args.kind
    caps, per = {}, []
    for p in primes:
        rs = restricted_structure(g, p)
        gens = central_generators(g, rs.ring, names)
        cot = _cotangent(args, report, g, rs, gens, args.kind)
        caps[str(p)] = cot.d
        entry = cot.to_dict(g.basis)
        entry["invariants"] = cotangent_invariants(cot)
        entry["lie_structure"] = check_lie_structure(cot)
        entry["canonical_map_check"] = check_canonical_map(cot, rs)
        report.fail_if(entry["lie_structure"]["verdict"] != "PASS")
        report.fail_if(entry["canonical_map_check"]["verdict"] != "PASS")
        if args.kind == "m" and gens:
            entry["central_extension"] = central_extension_report(cot, rs)
        report.warnings += cot.warnings
        per.append(entry)
    report.inputs["degree_caps"] = caps
    report.results["per_prime"] = per
    report.results["sign_convention"] = SIGN_CONVENTION


def sl2_relation(p: int) -> dict:
    """(D+1)^p - 2(D+1)^((p+1)/2) + (D+1) = 4xy + z^2 in U(sl_2) over F_p."""
    g = load_bundled("sl2")
    ctx = pbw_context(g, Ring.mod_p(p))
    e, f, h = (ctx.gen(s) for s in ("e", "f", "h"))
    delta = 4 * f * e + h * h + 2 * h
    x, y, z = e ** p, f ** p, h ** p - h
    w = delta + 1
    lhs = w ** p - 2 * w ** ((p + 1) // 2) + w
    rhs = 4 * x * y + z * z
    sym = central_generators(g, ctx.ring)[0]
    return {
        "prime": p,
        "relation": "(D+1)^p - 2*(D+1)^((p+1)/2) + (D+1) = 4*x*y + z^2",
        "casimir": format_element(delta),
        "casimir_is_symmetrized_invariant": delta == sym,
        "casimir_central": is_central(delta),
        "lhs_terms": len(lhs.terms),
        "rhs_terms": len(rhs.terms),
        "holds": lhs == rhs,
    }


def cmd_sl2_suite(args, report: Report):
    g = load_bundled("sl2")
    report.algebra(g)
    report.inputs["primes"] = list(args.primes)
    report.warnings.append("p=2 is excluded by the p>=3 policy")
    per = []
    for p in good_primes(args.primes, set()):
        r = sl2_relation(p)
        per.append(r)
        report.fail_if(not (r["holds"] and r["casimir_central"] and r["casimir_is_symmetrized_invariant"]))
    report.results["per_prime"] = per
    report.results["notation"] = {"x": "e^p", "y": "f^p", "z": "h^p - h", "D": "4*f*e + h^2 + 2*h"}


def cmd_twist(args, report: Report):
    g = parse_algebra(args.algebra)
    primes = _setup(report, args, g)
    per = []
    for p in primes:
        rs = restricted_structure(g, p)
        d = _degree_for(args, p, required_degree(p, []))
        if args.character:
            chars = [make_character(g, p, [Fraction(t) for t in args.character.split(",")])]
        else:
            chars = random_characters(g, p, args.samples or 5, seed=SEED + p)
        for chi in chars:
            rep = character_twist(rs, chi, d)
            rep = {k: v for k, v in rep.items() if not k.startswith("_")}
            rep["prime"] = p
            per.append(rep)
            report.fail_if(rep["verdict"] != "PASS")
    report.results["per_prime"] = per


def _images(args, g):
    if not args.images:
        raise ParseError("--images is required for this command")
    images, meta = parse_images(args.images, g)
    bad = set()
    for u in images:
        for c in u.terms.values():
            bad |= prime_factors(Fraction(c).denominator)
    return Homomorphism(images), meta, bad


def _surjectivity_warning(hom, p, report):
    mat = hom.degree1_matrix()
    ring = Ring.mod_p(p)
    cols = [[ring(mat[i][j]) for i in range(len(mat))] for j in range(len(mat))]
    if echelonize(cols, ring, len(mat)).rank < len(mat):
        report.warnings.append(f"p={p}: images possibly non-surjective; results are for an endomorphism")


def cmd_induced_aut(args, report: Report):
    g = parse_algebra(args.algebra)
    hom, meta, bad = _images(args, g)
    names = args.generators.split(",") if args.generators else None
    primes = _setup(report, args, g, bad | generator_bad_primes(g, names))
    report.inputs["kind"] = args.kind
    report.inputs["images"] = [format_element(u) for u in hom.images]
    caps, per = {}, []
    for p in primes:
        rs = restricted_structure(g, p)
        ring = rs.ring
        gens = central_generators(g, ring, names)
        _surjectivity_warning(hom, p, report)
        cot = _cotangent(args, report, g, rs, gens, args.kind)
        caps[str(p)] = cot.d
        ind = induced_automorphism(hom, cot, rs)
        entry = {"prime": p, "degree_cap": cot.d, "dimension": cot.dim, **ind.to_dict(),
                 "charpoly": format_poly(charpoly(ind.matrix, ring))}
        gpart = g_part_matrix(ind, cot, g.dim)
        entry["g_part_matrix"] = gpart
        lin = [[ring(x) for x in row] for row in hom.degree1_matrix()]
        entry["matches_linear_part"] = gpart == lin
        report.fail_if(not ind.is_automorphism)
        per.append(entry)
    report.inputs["degree_caps"] = caps
    report.results["per_prime"] = per


def cmd_charpoly_sweep(args, report: Report):
    g = parse_algebra(args.algebra)
    hom, meta, bad = _images(args, g)
    names = args.generators.split(",") if args.generators else None
    bad |= generator_bad_primes(g, names) | g.bad_primes()
    report.algebra(g)
    report.inputs["primes"] = list(args.primes)
    report.inputs["kind"] = args.kind
    report.warnings += prime_warnings(g, args.primes, bad)
    report.warnings.append(pmap_warning(g))
    order = args.order or meta.get("order")

    def gens_for(p):
        return central_generators(g, Ring.mod_p(p), names)

    def d_for(p):
        return _degree_for(args, p, required_degree(p, gens_for(p)))

    res = charpoly_sweep(g, hom, args.primes, gens_for, d_for, args.kind, order, bad)
    for row in res["per_prime"]:
        row["charpoly"] = [int(c) for c in row["charpoly"]]
    if order is not None:
        res["order_statement"] = (f"order {order} verified on generators" if res["order_verified"]
                                  else f"order {order} NOT verified on generators")
        report.fail_if(not res["order_verified"])
    report.inputs["degree_caps"] = {str(r["prime"]): r["degree_cap"] for r in res["per_prime"]}
    report.results = res


def cmd_compare(args, report: Report):
    ga, gb = parse_algebra(args.a), parse_algebra(args.b)
    report.algebra(ga, "a")
    report.algebra(gb, "b")
    bad = ga.bad_primes() | gb.bad_primes() | generator_bad_primes(ga) | generator_bad_primes(gb)
    report.inputs["primes"] = list(args.primes)
    report.warnings += prime_warnings(ga, args.primes, bad)
    for g in (ga, gb):
        report.warnings.append(f"{g.name}: {pmap_warning(g)}")
        if not g.assumption_asserted:
            report.warnings.append(f"{g.name}: assumption not asserted; quotient-center results are model-dependent")
    primes = good_primes(args.primes, bad)

    def gens_for(g, p):
        return central_generators(g, Ring.mod_p(p))

    res = compare_invariants((ga, gb), primes, gens_for, args.max_degree)
    report.warnings += res.pop("warnings")
    report.inputs["degree_caps"] = {
        str(p): args.max_degree if args.max_degree is not None else "2*(max generator degree)+2" for p in primes
    }
    report.results = res
    report.results["note"] = "differing invariants certify non-isomorphic cotangent data; equal tables prove nothing"


def cmd_probe_assumption(args, report: Report):
    g = parse_algebra(args.algebra)
    report.algebra(g)
    d = args.max_degree if args.max_degree is not None else 4
    report.inputs["degree_caps"] = {"probe": d}
    dims = {str(k): len(invariant_basis(g, k)) for k in range(1, d + 1)}
    report.results["invariant_dims_by_degree"] = dims
    fs = [parse_sym(t, g.basis) for _, t in sorted(g.invariants.items())]
    invariant_ok = all(kk_bracket(g, parse_sym(s, g.basis), f).is_zero() for f in fs for s in g.basis)
    report.results["declared_invariants"] = sorted(g.invariants)
    report.results["declared_are_invariant"] = invariant_ok
    central = all(is_central(u) for u in central_generators(g, QQ))
    report.results["symmetrized_are_central"] = central
    report.fail_if(not (invariant_ok and central))
    if fs:
        homog = [principal_symbol(symmetrize(pbw_context(g, QQ), f)) for f in fs]
        probe = regular_sequence_probe(homog, d).to_dict()
        report.results["regular_sequence_probe"] = probe
        report.fail_if(probe["first_failure"] is not None)
    else:
        report.warnings.append("no invariants declared: nothing to probe")
    report.warnings.append("open-orbit and normality clauses of the assumption are not checked")
    if not g.assumption_asserted:
        report.warnings.append("assumption not asserted in the algebra file")


COMMANDS = {
    "validate": cmd_validate,
    "center": cmd_center,
    "freeness": cmd_freeness,
    "kac-radul": cmd_kac_radul,
    "cotangent": cmd_cotangent,
    "sl2-suite": cmd_sl2_suite,
    "twist": cmd_twist,
    "induced-aut": cmd_induced_aut,
    "charpoly-sweep": cmd_charpoly_sweep,
    "compare": cmd_compare,
    "probe-assumption": cmd_probe_assumption,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modlie", description="Exact computations in modular enveloping algebras.")
    parser.add_argument("--version", action="version", version=f"modlie {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("-p", "--primes", type=parse_primes, default=list(DEFAULT_PRIMES),
                        help="comma-separated primes or first:k (default 3,5,7)")
        sp.add_argument("--max-degree", type=int, default=None, help="filtration degree cap")
        sp.add_argument("--out", default=None, help="write the report here instead of stdout")
        if name == "compare":
            sp.add_argument("--a", required=True, help="first algebra file or bundled name")
            sp.add_argument("--b", required=True, help="second algebra file or bundled name")
        elif name != "sl2-suite":
            sp.add_argument("--algebra", required=True, help="algebra file or bundled name")
        if name in ("cotangent", "induced-aut", "charpoly-sweep"):
            sp.add_argument("--kind", choices=("m", "n"), default="m" if name == "cotangent" else "n")
            sp.add_argument("--override", action="store_true", help="allow degree caps below the recommended one")
        if name in ("cotangent", "freeness", "induced-aut", "charpoly-sweep"):
            sp.add_argument("--generators", default=None, help="comma-separated invariant names")
        if name in ("induced-aut", "charpoly-sweep"):
            sp.add_argument("--images", default=None, help="automorphism file with generator images")
        if name == "charpoly-sweep":
            sp.add_argument("--order", type=int, default=None, help="declared finite order of the automorphism")
        if name == "twist":
            sp.add_argument("--character", default=None, help="comma-separated character values")
        if name in ("twist", "kac-radul"):
            sp.add_argument("--samples", type=int, default=0, help="random samples (characters or lifts)")
    return parser


def execute(argv: Sequence[str] | None = None) -> tuple[int, str, str | None]:
    """Run a command; returns (exit code, report text, --out path)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else 2), "", None
    report = Report(args.command, args)
    if not hasattr(args, "override"):
        args.override = False
    try:
        COMMANDS[args.command](args, report)
        code = 0 if report.verdict == "PASS" else 1
    except DegreeCapTooSmall as exc:
        report.verdict = "ERROR"
        report.results = {"error": type(exc).__name__, "message": str(exc), "suggested_degree": exc.suggested}
        code = 2
    except (ModLieError, OSError) as exc:
        report.verdict = "ERROR"
        report.results = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "report", None) is not None:
            report.results["report"] = exc.report.to_dict()
        code = 2
    return code, canonical_json(report.to_dict()), args.out


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    code, text, _ = execute(argv)
    return code, text


def main(argv: Sequence[str] | None = None) -> int:
    code, text, out = execute(argv)
    if text:
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if code == 2:
            print(f"error: {json.loads(text)['results'].get('message')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
