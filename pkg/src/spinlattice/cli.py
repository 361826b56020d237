"""Command-line front end.

Input is a YAML (or JSON) lattice document::

    p: 3
    diag_q: [1, 1, 3, 3]        # or: gram: [[2, 1], [1, "2/5"]]
    label: optional name

Rationals may be written as integers or "a/b" strings.  Reports are written
as YAML (``--format structured``) or plain text, and contain no timing data so
that equal inputs give byte-identical output.

Exit codes: 0 success, 2 parse error, 3 precondition failure, 4 resource cap,
5 selftest failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

import yaml

from .embed import selfdual_overlattice
from .errors import DomainError, PreconditionError, ResourceLimitError, SpinLatticeError
from .exact import DEFAULT_PRECISION, is_odd_prime
from .localmodel import (
    chart_at,
    classify_chart_points,
    enumerate_mloc,
    ldiamond,
    mref_ideal,
    mref_vs_mloc,
    normal_form_witt,
)
from .quadlattice import QuadLattice, discriminant_form, diagonalize, is_maximal, radical_mod_p, signature
from .selftest import SIZES, run_all

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_RESOURCE, EXIT_SELFTEST = 0, 2, 3, 4, 5


class ParseError(SpinLatticeError, ValueError):
    """Malformed lattice document; the message names the offending field."""


# --- documents --------------------------------------------------------------------


def _rational(x, where: str) -> Fraction:
    if isinstance(x, bool):
        raise ParseError(f"{where}: expected a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{where}: cannot read {x!r} as a rational 'a/b'") from None
    raise ParseError(f"{where}: expected an integer or an 'a/b' string, got {type(x).__name__}")


def parse_document(text: str) -> QuadLattice:
    """LatticeDocument text -> QuadLattice (raises ParseError with a field path)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ParseError(f"{where}malformed document ({getattr(exc, 'problem', exc)})") from None
    if not isinstance(doc, dict):
        raise ParseError("document: expected a mapping with keys p and gram or diag_q")
    unknown = sorted(set(doc) - {"p", "gram", "diag_q", "label"})
    if unknown:
        raise ParseError(f"document: unknown field(s) {', '.join(map(str, unknown))}")
    p = doc.get("p")
    if not isinstance(p, int) or isinstance(p, bool) or not is_odd_prime(p):
        raise ParseError(f"p: expected an odd prime, got {p!r}")
    has_gram, has_diag = "gram" in doc, "diag_q" in doc
    if has_gram == has_diag:
        raise ParseError("document: give exactly one of gram or diag_q")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("label: expected a string")
    try:
        if has_diag:
            vals = doc["diag_q"]
            if not isinstance(vals, list) or not vals:
                raise ParseError("diag_q: expected a non-empty list")
            qs = [_rational(x, f"diag_q[{i}]") for i, x in enumerate(vals)]
            return QuadLattice.from_diagonal(p, qs, label=label)
        rows = doc["gram"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise ParseError("gram: expected a non-empty list of rows")
        G = [[_rational(x, f"gram[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)]
        return QuadLattice(p, G, label=label)
    except (DomainError, PreconditionError) as exc:
        raise ParseError(f"{'diag_q' if has_diag else 'gram'}: {exc}") from None


def _q(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _vec(v) -> List[str]:
    return [_q(x) for x in v]


def _mat(M) -> List[List[str]]:
    return [_vec(r) for r in M]


# --- commands -----------------------------------------------------------------------


def cmd_analyze(L: QuadLattice) -> dict:
    rad = radical_mod_p(L)
    disc = discriminant_form(L)
    ok, wit = is_maximal(L)
    pos, neg = signature(L)
    _, diag = diagonalize(L)
    inv = {
        "p": L.p,
        "rank": L.rank,
        "gram": _mat(L.gram),
        "diagonal_q": _vec(diag),
        "signature": [pos, neg],
        "t": rad.t,
        "s": rad.s,
        "disc_elementary_divisors": [L.p**e for e in disc.exponents()],
        "disc_elementary": disc.is_elementary(),
        "maximal": ok,
    }
    if wit is not None:
        w = {"kind": wit.kind, "vector": _vec(wit.vector)}
        inv["witness"] = w
    out = {"command": "analyze"}
    if L.label:
        out["label"] = L.label
    out["invariants"] = inv
    return out


def cmd_embed(L: QuadLattice) -> dict:
    emb = selfdual_overlattice(L)
    checks = emb.check()
    cyclic = len(discriminant_form(L).orders) <= 1
    block = {
        "source_rank": L.rank,
        "target_rank": emb.target_rank,
        "target_gram": _mat(emb.target_gram),
        "embedding_matrix": _mat(emb.embed_matrix),
        "complement_gram": _mat(emb.complement_gram()),
        "cyclic_discriminant": cyclic,
        "rank_bound": f"rank {emb.target_rank} <= {L.rank + 1}" if cyclic else f"rank {emb.target_rank}",
        "rank_bound_ok": (emb.target_rank <= L.rank + 1) if cyclic else True,
        "checks": checks,
        "notes": list(emb.notes),
    }
    out = {"command": "embed"}
    if L.label:
        out["label"] = L.label
    out["embedding"] = block
    return out


def _verdict(v) -> dict:
    return v.as_dict()


def cmd_localmodel(L: QuadLattice, q_list: List[int], refined: bool = False, k: int = DEFAULT_PRECISION) -> dict:
    """Point counts, singular/irregular lists and chart verdicts; precondition failures become entries."""
    out = {"command": "localmodel", "k": k}
    if L.label:
        out["label"] = L.label
    errors = []
    per_q = {}
    nf = None
    try:
        nf = normal_form_witt(L, k)
        out["normal_form"] = str(nf.form)
    except PreconditionError as exc:
        errors.append(f"normal form: {exc}")
    for q in q_list:
        key = f"F_{q}"
        try:
            pts = enumerate_mloc(L, q)
        except PreconditionError as exc:
            errors.append(f"{key}: {exc}")
            continue
        sing = [x for x in pts if x.singular]
        entry = {
            "points": len(pts),
            "singular": [str(x) for x in sing],
            "irregular": [str(x) for x in pts if x.irregular],
        }
        if nf is not None:
            charts = []
            for x in sing:
                c = chart_at(L, x, k, nf)
                charts.append({"point": str(x), "relation": c.relation_strings(), "verdict": _verdict(c.verdict)})
            entry["charts"] = charts
        per_q[key] = entry
    out["enumeration"] = per_q
    if refined:
        try:
            out["refined"] = _refined_block(L, q_list, k)
        except PreconditionError as exc:
            errors.append(f"refined: {exc}")
    if errors:
        out["precondition_failures"] = errors
    return out


def _refined_block(L, q_list, k):
    ok, _ = is_maximal(L)
    if not ok or radical_mod_p(L).t != 2:
        raise PreconditionError("the refined model needs a maximal lattice with t = 2")
    ideal = mref_ideal(L, k)
    block = {"generators": [label for label, _ in ideal.generators], "charts": {}}
    for name, chart in ideal.charts.items():
        cb = {"variables": list(chart.variables), "relations": chart.relation_strings()}
        for q in q_list:
            res = classify_chart_points(chart, q)
            counts = {}
            special = []
            for pt, v in res:
                counts[v.kind] = counts.get(v.kind, 0) + 1
                if v.kind != "Smooth":
                    special.append({"point": [str(c) for c in pt], "verdict": _verdict(v)})
            cb[f"F_{q}"] = {"points": len(res), "verdicts": dict(sorted(counts.items())), "non_smooth": special}
        block["charts"][name] = cb
    block["ldiamond"] = []
    for choice in (0, 1):
        D = ldiamond(L, choice, k)
        block["ldiamond"].append(
            {
                "choice": choice,
                "line": [str(c) for c in D.line],
                "self_dual": D.is_self_dual(),
                "inclusion_valuations": D.inclusion_valuations(),
            }
        )
    cmp = {}
    for q in q_list:
        c = mref_vs_mloc(L, q)
        cmp[f"F_{q}"] = {
            "mloc_points": c.mloc_points,
            "mref_points": c.mref_points,
            "bijective_off_irregular": c.bijective_off_irregular,
            "irregular_fibers": [{"point": pt, "fiber": n} for pt, n in c.irregular_fibers],
        }
    block["comparison"] = cmp
    return block


def cmd_selftest(seed: int = 0, size: str = "small") -> dict:
    results = run_all(seed, size)
    return {
        "command": "selftest",
        "seed": seed,
        "size": size,
        "passed": all(r.passed for r in results),
        "suites": [r.as_dict() for r in results],
    }


# --- rendering ------------------------------------------------------------------------


def render(report: dict, fmt: str) -> str:
    if fmt == "structured":
        return yaml.safe_dump(report, sort_keys=False, allow_unicode=True, default_flow_style=None, width=100)
    lines: List[str] = []
    _text(report, 0, lines)
    return "\n".join(lines) + "\n"


def _text(node, indent, lines):
    pad = "  " * indent
    if isinstance(node, dict):
        for key, val in node.items():
            if isinstance(val, (dict, list)) and val and not _flat(val):
                lines.append(f"{pad}{key}:")
                _text(val, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {_inline(val)}")
    elif isinstance(node, list):
        for item in node:
            if isinstance(item, (dict, list)) and not _flat(item):
                lines.append(f"{pad}-")
                _text(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_inline(item)}")
    else:
        lines.append(f"{pad}{_inline(node)}")


def _flat(x) -> bool:
    if isinstance(x, dict):
        return all(not isinstance(v, (dict, list)) for v in x.values())
    if isinstance(x, list):
        return all(not isinstance(v, dict) and (not isinstance(v, list) or _flat(v)) for v in x)
    return True


def _inline(x) -> str:
    if isinstance(x, list):
        return "[" + ", ".join(_inline(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{k}: {_inline(v)}" for k, v in x.items()) + "}"
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


# --- entry point ------------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinlattice", description="Exact quadratic-lattice and local-model computations.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, with_doc=True):
        if with_doc:
            sp.add_argument("document", help="lattice document (YAML or JSON); '-' for stdin")
        sp.add_argument("--format", choices=("text", "structured"), default="text")
        sp.add_argument("--seed", type=int, default=0, help="random seed (used by selftest)")

    common(sub.add_parser("analyze", help="lattice invariants and maximality"))
    common(sub.add_parser("embed", help="self-dual overlattice with definite complement"))
    lm = sub.add_parser("localmodel", help="points and charts of the local model")
    common(lm)
    lm.add_argument("--q", type=int, action="append", dest="q", help="field size p or p^2 (repeatable)")
    lm.add_argument("--refined", action="store_true", help="also build the refined model (t = 2)")
    lm.add_argument("--k", type=int, default=DEFAULT_PRECISION, help="Witt truncation level (default 6)")
    st = sub.add_parser("selftest", help="run the deterministic property suites")
    common(st, with_doc=False)
    st.add_argument("--size", choices=SIZES, default="small")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            report = cmd_selftest(args.seed, args.size)
            sys.stdout.write(render(report, args.format))
            return EXIT_OK if report["passed"] else EXIT_SELFTEST
        L = parse_document(_read(args.document))
        if args.command == "analyze":
            report = cmd_analyze(L)
        elif args.command == "embed":
            report = cmd_embed(L)
        else:
            if args.k < 2:
                raise ParseError("--k: must be at least 2")
            report = cmd_localmodel(L, args.q or [L.p], args.refined, args.k)
        sys.stdout.write(render(report, args.format))
        if report.get("precondition_failures"):
            return EXIT_PRECONDITION
        return EXIT_OK
    except (ParseError, OSError) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except PreconditionError as exc:
        sys.stderr.write(f"precondition failure: {exc}\n")
        return EXIT_PRECONDITION
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return EXIT_RESOURCE
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
