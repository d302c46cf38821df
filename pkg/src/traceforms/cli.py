"""Command-line surface.

One subcommand per library query; JSON in via flags, a single JSON document
out on stdout (tables also come as csv or markdown on request).  Exit codes:
0 ok, 2 malformed input, 3 a library precondition rejected the input,
4 a factorization or search budget ran out.
"""

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from .exact import INF, FactorizationBudgetError, Poly
from .numfields import (
    Cyclotomic,
    DescriptorError,
    GeneralTotallyReal,
    ImagQuadratic,
    RealQuadratic,
    desc_from_json,
    field_invariants,
)
from .qforms import (
    QuadraticForm,
    form_from_json,
    form_to_json,
    invariants,
    invariants_to_json,
    is_isomorphic,
    rational_str,
    represents_zero,
    split_complement,
)
from .transfer import (
    QuadFieldElement,
    cm_transfer_feasible,
    rm_transfer_feasible,
    transfer_hermitian_imagquad,
    transfer_quadratic,
)
from .k3hk import (
    ambient,
    elliptic_fibration_verdict,
    famous_examples,
    hk_realizable,
    k3_realizable,
    picard_compatible,
    report_to_json,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_CRITERION = 3
EXIT_BUDGET = 4


class SchemaError(ValueError):
    """Input that fails to parse into a query."""


class CriterionError(ValueError):
    """A library precondition rejected a well-formed input."""


# ---------------------------------------------------------------------------
# serialization helpers


def jsonable(obj):
    """Recursively coerce library values into JSON-safe ones.  Places are
    rendered as strings ("2", "inf") so documents stay type-stable."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return "inf" if obj == INF else obj
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            if k in ("place", "obstruction_place") and v is not None:
                out[k] = "inf" if v == INF else str(v)
            elif k == "primes":
                out[k] = ["inf" if p == INF else str(p) for p in v]
            else:
                out[k] = jsonable(v)
        return out
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((jsonable(x) for x in obj), key=str)
    return str(obj)


def verdict_json(v) -> dict:
    out = {"status": v.status, "feasible": v.status == "feasible"}
    if v.certificate is not None:
        out["certificate"] = jsonable(v.certificate)
    if v.obstruction is not None:
        out["obstruction"] = jsonable(v.obstruction)
    return out


def emit(doc, fmt="json") -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(doc)


# ---------------------------------------------------------------------------
# input parsing


def parse_json_arg(raw: str, what: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as err:
        raise SchemaError(f"{what}: invalid JSON ({err})") from err


def parse_form(raw: str, what="form") -> QuadraticForm:
    obj = parse_json_arg(raw, what)
    try:
        return form_from_json(obj)
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, FactorizationBudgetError):
            raise
        raise SchemaError(f"{what}: {err}") from err


def parse_field(raw: str):
    obj = parse_json_arg(raw, "field")
    try:
        return desc_from_json(obj)
    except DescriptorError as err:
        raise SchemaError(f"field: {err}") from err


def parse_entries(E, raw: str):
    """Diagonal entries of a form over E: pairs [a, b] meaning a + b*sqrt(d)
    over a real quadratic field, plain rationals over an imaginary quadratic
    one."""
    obj = parse_json_arg(raw, "entries")
    if not isinstance(obj, list) or not obj:
        raise SchemaError("entries: need a nonempty JSON array")
    try:
        if isinstance(E, RealQuadratic):
            out = []
            for item in obj:
                if not (isinstance(item, list) and len(item) == 2):
                    raise SchemaError("entries: expected [a, b] pairs")
                out.append(QuadFieldElement.make(Fraction(str(item[0])),
                                                 Fraction(str(item[1]))))
            return out
        if isinstance(E, ImagQuadratic):
            return [Fraction(str(x)) for x in obj]
    except (ValueError, ZeroDivisionError) as err:
        raise SchemaError(f"entries: {err}") from err
    raise SchemaError("entries: explicit transfer needs a real or imaginary "
                      "quadratic field")


def parse_witness(E, raw: str):
    obj = parse_json_arg(raw, "witness")
    if not isinstance(obj, list):
        raise SchemaError("witness: need a JSON array")
    try:
        if isinstance(E, RealQuadratic):
            if len(obj) != 2:
                raise SchemaError("witness: [a, b] over a quadratic field")
            return QuadFieldElement.make(Fraction(str(obj[0])),
                                         Fraction(str(obj[1])))
        return Poly.make([Fraction(str(c)) for c in obj])
    except (ValueError, ZeroDivisionError) as err:
        raise SchemaError(f"witness: {err}") from err


# ---------------------------------------------------------------------------
# catalogs


def default_catalog_path() -> Path:
    return Path(__file__).parent / "data" / "fields.json"


def load_catalog(path=None) -> dict:
    p = Path(path) if path else default_catalog_path()
    try:
        with open(p) as fh:
            cat = json.load(fh)
    except OSError as err:
        raise SchemaError(f"catalog: {err}") from err
    except json.JSONDecodeError as err:
        raise SchemaError(f"catalog: invalid JSON ({err})") from err
    if "totally_real" not in cat or "cm" not in cat:
        raise SchemaError("catalog: need totally_real and cm sections")
    return cat


def catalog_fields(cat: dict, mode: str):
    """(label, descriptor) pairs for one mode, sorted by (degree, label)."""
    out = []
    if mode == "rm":
        for d in cat["totally_real"].get("quadratic", ()):
            out.append((f"Q(sqrt {d})", RealQuadratic(int(d))))
        for entry in cat["totally_real"].get("higher", ()):
            desc = GeneralTotallyReal(
                tuple(Fraction(c) for c in entry["minpoly"]))
            out.append((entry["name"], desc))
    else:
        for D in cat["cm"].get("imag_quadratic", ()):
            out.append((f"Q(sqrt -{D})", ImagQuadratic(int(D))))
        for n in cat["cm"].get("cyclotomic", ()):
            out.append((f"Q(zeta {n})", Cyclotomic(int(n))))
    decorated = [(field_invariants(desc).degree, label, desc)
                 for label, desc in out]
    decorated.sort(key=lambda t: (t[0], t[1]))
    return [(label, desc, degree) for degree, label, desc in decorated]


def parse_families(raw: str):
    """Comma list like "k3,kummer:2,og6,hilbk3:2,og10" into ambient family tokens."""
    out = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            fam, _, num = token.partition(":")
            try:
                n = int(num)
            except ValueError as err:
                raise SchemaError(f"families: bad n in {token!r}") from err
        else:
            fam, n = token, None
        try:
            ambient(fam, n)
        except ValueError as err:
            raise SchemaError(f"families: {err}") from err
        out.append((token if n is None else f"{fam}:{n}", fam, n))
    if not out:
        raise SchemaError("families: empty list")
    return out


# ---------------------------------------------------------------------------
# tabulate


def _row_criterion(rep) -> str:
    v = rep.verdict
    if v.status == "feasible":
        cert = v.certificate or {}
        return cert.get("route", "within-bounds")
    obs = v.obstruction or {}
    return obs.get("condition") or obs.get("reason") or "unknown"


def tabulate_rows(mode: str, families, fields, md_bound: int):
    rows = []
    min_m = 3 if mode == "rm" else 1
    for label, fam, n in sorted(families, key=lambda t: t[0]):
        for field_label, desc, degree in fields:
            m = min_m
            while m * degree <= md_bound:
                if fam == "k3":
                    rep = k3_realizable(desc, m, mode)
                else:
                    rep = hk_realizable(fam, n, desc, m, mode)
                rows.append({
                    "family": label,
                    "field": field_label,
                    "degree": degree,
                    "m": m,
                    "md": m * degree,
                    "mode": mode,
                    "feasible": rep.feasible,
                    "status": rep.status,
                    "family_dim": rep.family_dimension if rep.feasible else None,
                    "pic_rank": rep.pic_rank,
                    "criterion": _row_criterion(rep),
                })
                m += 1
    return rows


_COLUMNS = ["family", "field", "degree", "m", "md", "mode", "feasible",
            "status", "family_dim", "pic_rank", "criterion"]


def render_table(rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"rows": rows, "count": len(rows)},
                          sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_COLUMNS)
        for r in rows:
            w.writerow(["" if r[c] is None else r[c] for c in _COLUMNS])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(_COLUMNS) + " |",
                 "|" + "|".join(" --- " for _ in _COLUMNS) + "|"]
        for r in rows:
            lines.append("| " + " | ".join(
                "" if r[c] is None else str(r[c]) for c in _COLUMNS) + " |")
        return "\n".join(lines) + "\n"
    raise SchemaError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# command handlers


def cmd_form_invariants(args) -> dict:
    f = parse_form(args.form)
    fi = invariants(f, budget=args.budget) if args.budget else invariants(f)
    return invariants_to_json(fi)


def cmd_form_isomorphic(args) -> dict:
    a = parse_form(args.a, "a")
    b = parse_form(args.b, "b")
    return {"isomorphic": is_isomorphic(a, b)}


def cmd_form_split(args) -> dict:
    v = parse_form(args.ambient, "ambient")
    u = parse_form(args.sub, "sub")
    res = split_complement(v, u)
    out = {"feasible": res.feasible}
    if res.complement is not None:
        out["complement"] = form_to_json(res.complement)
    if res.complement_invariants is not None:
        out["complement_invariants"] = invariants_to_json(
            res.complement_invariants)
    if res.reason is not None:
        out["reason"] = res.reason
    return out


def cmd_represents_zero(args) -> dict:
    f = parse_form(args.form)
    verdict = represents_zero(f, height=args.height,
                              budget=args.budget or 200_000)
    out = {"isotropic": verdict.isotropic}
    if verdict.witness is not None:
        out["witness"] = [rational_str(x) for x in verdict.witness]
    if verdict.obstruction is not None:
        out["obstruction_place"] = ("inf" if verdict.obstruction == INF
                                    else str(verdict.obstruction))
    return out


def cmd_transfer_compute(args) -> dict:
    E = parse_field(args.field)
    entries = parse_entries(E, args.entries)
    try:
        if isinstance(E, RealQuadratic):
            t = transfer_quadratic(E.d, entries)
        else:
            t = transfer_hermitian_imagquad(E.D, entries)
    except ValueError as err:
        raise CriterionError(str(err)) from err
    return {"transfer": form_to_json(t),
            "invariants": invariants_to_json(invariants(t))}


def cmd_transfer_feasible(args) -> dict:
    E = parse_field(args.field)
    f = parse_form(args.form)
    witness = parse_witness(E, args.witness) if args.witness else None
    try:
        if args.mode == "rm":
            v = rm_transfer_feasible(E, f, witness=witness)
        else:
            v = cm_transfer_feasible(E, f)
    except ValueError as err:
        raise CriterionError(str(err)) from err
    return verdict_json(v)


def cmd_k3(args) -> dict:
    E = parse_field(args.field)
    try:
        rep = k3_realizable(E, args.m, args.mode)
    except ValueError as err:
        raise CriterionError(str(err)) from err
    return jsonable(report_to_json(rep))


def cmd_hk(args) -> dict:
    E = parse_field(args.field)
    try:
        rep = hk_realizable(args.family, args.n, E, args.m, args.mode)
    except ValueError as err:
        raise CriterionError(str(err)) from err
    return jsonable(report_to_json(rep))


def cmd_picard(args) -> dict:
    E = parse_field(args.field)
    f = parse_form(args.form)
    witness = parse_witness(E, args.witness) if args.witness else None
    try:
        v = picard_compatible(f, E, args.m, args.mode, witness=witness)
    except ValueError as err:
        raise CriterionError(str(err)) from err
    return verdict_json(v)


def cmd_elliptic(args) -> dict:
    if (args.case is None) == (args.context is None):
        raise SchemaError("elliptic: pass exactly one of --case, --context")
    if args.case is not None:
        reg = famous_examples()
        if args.case not in reg:
            raise SchemaError(f"elliptic: unknown case {args.case!r}; "
                              f"known: {', '.join(sorted(reg))}")
        ctx = reg[args.case].elliptic_context
        if ctx is None:
            raise CriterionError(
                f"case {args.case!r} has no elliptic-fibration question")
    else:
        ctx = parse_json_arg(args.context, "context")
        if isinstance(ctx, dict) and isinstance(ctx.get("field"), dict):
            try:
                ctx = dict(ctx, field=desc_from_json(ctx["field"]))
            except DescriptorError as err:
                raise SchemaError(f"context field: {err}") from err
    try:
        return jsonable(elliptic_fibration_verdict(ctx))
    except (KeyError, TypeError) as err:
        raise SchemaError(f"context: {err}") from err
    except ValueError as err:
        raise CriterionError(str(err)) from err


def cmd_tabulate(args) -> str:
    cat = load_catalog(args.catalog)
    fields = catalog_fields(cat, args.mode)
    families = parse_families(args.families)
    try:
        rows = tabulate_rows(args.mode, families, fields, args.md_bound)
    except ValueError as err:
        raise CriterionError(str(err)) from err
    return render_table(rows, args.format)


# ---------------------------------------------------------------------------
# argument parser


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="tf",
        description="Quadratic-form transfer queries for K3 and hyperkahler "
                    "multiplication problems.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("form-invariants",
                       help="classifying invariants of a rational form")
    p.add_argument("--form", required=True)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(handler=cmd_form_invariants)

    p = sub.add_parser("form-isomorphic",
                       help="rational isomorphism of two forms")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(handler=cmd_form_isomorphic)

    p = sub.add_parser("form-split",
                       help="orthogonal complement of a subform")
    p.add_argument("--ambient", required=True)
    p.add_argument("--sub", required=True)
    p.set_defaults(handler=cmd_form_split)

    p = sub.add_parser("represents-zero",
                       help="global isotropy with witness or obstruction")
    p.add_argument("--form", required=True)
    p.add_argument("--height", type=int, default=50)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(handler=cmd_represents_zero)

    p = sub.add_parser("transfer-compute",
                       help="explicit trace-form transfer over a quadratic "
                            "or imaginary quadratic field")
    p.add_argument("--field", required=True)
    p.add_argument("--entries", required=True)
    p.set_defaults(handler=cmd_transfer_compute)

    p = sub.add_parser("transfer-feasible",
                       help="is a rational form a transfer from the field")
    p.add_argument("--field", required=True)
    p.add_argument("--form", required=True)
    p.add_argument("--mode", choices=["rm", "cm"], required=True)
    p.add_argument("--witness", default=None)
    p.set_defaults(handler=cmd_transfer_feasible)

    p = sub.add_parser("k3", help="K3 realizability for a field and rank")
    p.add_argument("--field", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=["rm", "cm"], required=True)
    p.set_defaults(handler=cmd_k3)

    p = sub.add_parser("hk", help="hyperkahler realizability")
    p.add_argument("--family", required=True,
                   choices=["kummer", "og6", "hilbk3", "og10"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--field", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=["rm", "cm"], required=True)
    p.set_defaults(handler=cmd_hk)

    p = sub.add_parser("picard",
                       help="compatibility of a prescribed Picard form")
    p.add_argument("--form", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=["rm", "cm"], required=True)
    p.add_argument("--witness", default=None)
    p.set_defaults(handler=cmd_picard)

    p = sub.add_parser("elliptic",
                       help="elliptic-fibration verdict for decided cases")
    p.add_argument("--case", default=None)
    p.add_argument("--context", default=None)
    p.set_defaults(handler=cmd_elliptic)

    p = sub.add_parser("tabulate", help="realizability grids over a catalog")
    p.add_argument("--mode", choices=["rm", "cm"], required=True)
    p.add_argument("--families", default="k3")
    p.add_argument("--md-bound", type=int, default=21)
    p.add_argument("--format", choices=["json", "csv", "markdown"],
                   default="json")
    p.add_argument("--catalog", default=None)
    p.set_defaults(handler=cmd_tabulate)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.handler(args)
    except SchemaError as err:
        emit({"status": "error", "kind": "schema", "error": str(err)})
        return EXIT_SCHEMA
    except FactorizationBudgetError as err:
        emit({"status": "error", "kind": "budget", "error": str(err)})
        return EXIT_BUDGET
    except CriterionError as err:
        emit({"status": "error", "kind": "criterion", "error": str(err)})
        return EXIT_CRITERION
    except (ValueError, KeyError) as err:
        emit({"status": "error", "kind": "criterion", "error": str(err)})
        return EXIT_CRITERION
    if isinstance(result, str):
        emit(result, fmt="raw")
    else:
        emit(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
