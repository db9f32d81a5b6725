"""Command-line front end.

One verb per invocation; reports are deterministic JSON with sorted keys.
Exit codes: 0 ok, 2 parse error, 3 validation error, 4 cap exceeded,
5 undecided.  Search caps come from --max-search or OMEGAKIT_MAX_SEARCH
(the flag wins); bounded-depth decisions take --depth.
"""

import argparse
import os
import sys

from . import caps, enrich, fincat, formats, ncat as ncat_mod, omega, report
from . import site, sklim, toyspec
from .errors import (
    CapError,
    OmegakitError,
    ParseError,
    Undecided,
    ValidationError,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CAP = 4
EXIT_UNDECIDED = 5


def _emit(document, out=None):
    payload = formats.dumps(document)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    sys.stdout.write(payload)


def _detect_and_validate(path):
    doc = formats.load_document(path)
    kind = doc["format"]
    loaders = {
        formats.CAT_V1: formats.cat_from_doc,
        formats.FUN_V1: formats.functor_from_doc,
        formats.PROF_V1: formats.profunctor_from_doc,
        formats.ARROW_V1: formats.arrow_from_doc,
        formats.DIAG_V1: formats.diagram_from_doc,
        formats.WES_V1: formats.wes_from_doc,
        formats.NCAT_V1: formats.ncat_from_doc,
        formats.PRECAT_V1: formats.precat_from_doc,
        formats.RING_V1: formats.ring_from_doc,
        formats.SPEC_V1: formats.spec_datum_from_doc,
        formats.PRESHEAF_V1: formats.presheaf_from_doc,
    }
    if kind not in loaders:
        raise ParseError(f"unknown format {kind!r}", path=path)
    loaders[kind](doc, path)
    return kind


def cmd_validate(args):
    kind = _detect_and_validate(args.file)
    _emit({"valid": True, "format": kind, "file": os.path.basename(args.file)})
    return EXIT_OK


def cmd_compose(args):
    g = formats.load_arrow(args.second)
    f = formats.load_arrow(args.first)
    composed = omega.compose(g, f, cap=args.max_search)
    _emit(formats.arrow_to_doc(composed), args.out)
    return EXIT_OK


def cmd_equal(args):
    a = formats.load_arrow(args.first)
    b = formats.load_arrow(args.second)
    dec = omega.arrows_equal(a, b, cap=args.max_search)
    doc = {"equal": bool(dec)}
    if dec:
        doc["witness"] = {
            f"({c},{d})": dict(sorted(m.items())) for (c, d), m in dec.witness.items()
        }
    else:
        doc["reason"] = dec.reason
    _emit(doc, args.out)
    return EXIT_OK


def cmd_limit(args):
    kind, payload = formats.load_diagram(args.file)
    if kind == "cospan":
        left, right = payload
        res = sklim.skel_limit_cospan(left, right)
        doc = {
            "kind": kind,
            "objects": list(res.object.objects),
            "arrows": len(res.object.arrows),
            "category": formats.cat_to_doc(res.object),
        }
    elif kind == "span":
        left, right = payload
        res = sklim.skel_colimit_span(left, right)
        doc = {
            "kind": kind,
            "objects": list(res.object.objects),
            "arrows": len(res.object.arrows),
            "category": formats.cat_to_doc(res.object),
        }
    else:
        res = sklim.ordinary_limit(payload)
        doc = {"kind": kind, "limit": [list(t) for t in res.object]}
    _emit(doc, args.out)
    return EXIT_OK


def cmd_enriched_hom(args):
    world, es, morphisms = formats.load_wes(args.file)
    if args.phi not in morphisms or args.psi not in morphisms:
        raise ParseError(
            f"morphisms {args.phi!r}/{args.psi!r} not present", path=args.file
        )
    sk = {"identity": enrich.SK_IDENTITY, "collapse": enrich.SK_COLLAPSE}[args.sk]
    hom = enrich.enriched_hom(
        es, es, morphisms[args.phi], morphisms[args.psi], sk, cap=args.max_search
    )
    _emit(
        {
            "families": [list(f) for f in hom.families],
            "count": len(hom.families),
            "carrier": list(hom.source_carrier),
        },
        args.out,
    )
    return EXIT_OK


def cmd_ncat(args):
    x = formats.load_ncat(args.file)
    if args.subverb == "addresses":
        addrs = ncat_mod.addresses(x)
        _emit(
            {
                "level": x.level,
                "count": len(addrs),
                "addresses": [[list(p) for p in a] for a in addrs],
            },
            args.out,
        )
        return EXIT_OK
    if args.subverb == "rho":
        if args.direction == "classify":
            result = ncat_mod.rho_classify(x, args.k)
        else:
            result = ncat_mod.rho_collapse(x, args.k)
            if isinstance(result, tuple):
                _emit({"collapsed_to_set": list(result)}, args.out)
                return EXIT_OK
        _emit(formats.ncat_to_doc(result), args.out)
        return EXIT_OK
    if args.subverb == "product":
        other = formats.load_ncat(args.other)
        _emit(formats.ncat_to_doc(ncat_mod.n_product(x, other)), args.out)
        return EXIT_OK
    raise ParseError(f"unknown ncat subverb {args.subverb!r}")


def cmd_sheafify(args):
    doc = formats.load_document(args.file, formats.PRESHEAF_V1)
    presheaf, topology = formats.presheaf_from_doc(doc, args.file)
    sheaf = site.sheafify(presheaf, topology)
    _emit(formats.sheaf_to_doc(sheaf), args.out)
    return EXIT_OK


def cmd_spec_lift(args):
    datum = formats.load_spec_datum(args.file)
    session = site.LiftSession(datum, cap=args.max_search)
    if args.object:
        lifted = session.lifted_object(args.object)
        _emit(formats.sheaf_to_doc(lifted.sheaf), args.out)
        return EXIT_OK
    if args.arrow:
        ctx = site.WindowContext(datum, arrows=[args.arrow], cap=args.max_search)
        lifted = site.lift_arrow(session, ctx, args.arrow, cap=args.max_search)
        doc = {
            "arrow": args.arrow,
            "space_component": lifted.sp_arrow,
            "unique": lifted.unique,
            "comparison": {
                v: dict(sorted((repr(k), repr(w)) for k, w in m.mapping.items()))
                for v, m in sorted(lifted.sharp.items())
            },
        }
        _emit(doc, args.out)
        return EXIT_OK
    raise ParseError("spec-lift needs --object or --arrow")


def cmd_global_sections(args):
    datum = formats.load_spec_datum(args.file)
    session = site.LiftSession(datum, cap=args.max_search)
    ring = session.global_sections(args.object)
    want = datum.world.ring_of[args.object]
    iso = toyspec.ring_isomorphism(ring, want, cap=args.max_search)
    renamed = {x: repr(x) for x in ring.carrier}
    _emit(
        {
            "object": args.object,
            "order": len(ring.carrier),
            "isomorphic_to_sections_source": bool(iso),
            "carrier": sorted(renamed.values()),
        },
        args.out,
    )
    return EXIT_OK


def cmd_pisch_check(args):
    datum = formats.load_spec_datum(args.file)
    session = site.LiftSession(datum, cap=args.max_search)
    ctx = site.WindowContext(datum, arrows=list(datum.R.arrows), cap=args.max_search)
    ctx.prepare([session])
    if args.arrow:
        arr = site.lift_arrow(session, ctx, args.arrow, cap=args.max_search)
        src, dst = datum.R.arrows[args.arrow]
    else:
        src, dst = args.terminal
        lo_s = session.lifted_object(src)
        lo_d = session.lifted_object(dst)
        arr = omega.terminal_arrow(
            ctx.marked_object(src, lo_s.sheaf.key()),
            ctx.marked_object(dst, lo_d.sheaf.key()),
        )
    status, witness = site.pi_sch_membership(
        session, ctx, arr, src, dst, depth=args.depth, cap=args.max_search
    )
    _emit({"status": status, "witness": witness}, args.out)
    if status == site.PI_UNDECIDED:
        return EXIT_UNDECIDED
    return EXIT_OK


def cmd_spectrum(args):
    ring = formats.load_ring(args.file)
    spec = toyspec.spectrum(ring)
    doc = {
        "ring": ring.name,
        "points": {
            name: sorted(map(str, ideal)) for name, ideal in sorted(spec.points.items())
        },
        "opens": [sorted(o) for o in spec.opens],
        "point_count": len(spec.points),
        "open_count": len(spec.opens),
    }
    _emit(doc, args.out)
    if args.figure:
        report.render_spectrum_figure(spec, args.figure)
    return EXIT_OK


def cmd_report(args):
    only = set(args.only.split(",")) if args.only else None
    outcome = report.run_acceptance(cap=args.max_search, only=only)
    doc = report.report_document(outcome)
    for r in outcome["criteria"]:
        state = "pass" if r["passed"] else "FAIL"
        sys.stderr.write(f"{r['id']}: {state} ({r['seconds']}s)\n")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(formats.dumps(doc))
        with open(os.path.join(args.out_dir, "report.csv"), "w", encoding="utf-8") as fh:
            fh.write(report.report_csv(outcome))
        figures = os.path.join(args.out_dir, "figures")
        os.makedirs(figures, exist_ok=True)
        report.render_report_figure(outcome, os.path.join(figures, "acceptance.png"))
        spec = toyspec.spectrum(toyspec.zmod(6))
        report.render_spectrum_figure(spec, os.path.join(figures, "spectrum_z6.png"))
    sys.stdout.write(formats.dumps(doc))
    return EXIT_OK if outcome["passed"] else EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="omegakit",
        description="exact computations with finite categories, pointed "
        "correspondences and structure sheaves",
    )
    parser.add_argument(
        "--max-search",
        type=int,
        default=None,
        help="cap on visited search candidates (default: OMEGAKIT_MAX_SEARCH or 10^6)",
    )
    parser.add_argument("--depth", type=int, default=caps.DEFAULT_DEPTH)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="validate any document")
    p.add_argument("file")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("compose", help="compose two correspondence arrows")
    p.add_argument("second")
    p.add_argument("first")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("equal", help="decide equality of correspondence arrows")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_equal)

    p = sub.add_parser("limit", help="weak (co)limit of a cospan/span diagram")
    p.add_argument("file")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_limit)

    p = sub.add_parser("enriched-hom", help="natural families between morphisms")
    p.add_argument("file")
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--sk", choices=("identity", "collapse"), default="identity")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_enriched_hom)

    p = sub.add_parser("ncat", help="higher-category operations")
    p.add_argument("subverb", choices=("addresses", "rho", "product"))
    p.add_argument("file")
    p.add_argument("--direction", choices=("collapse", "classify"), default="collapse")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--other")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_ncat)

    p = sub.add_parser("sheafify", help="sheafify a presheaf document")
    p.add_argument("file")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_sheafify)

    p = sub.add_parser("spec-lift", help="structure sheaf of a spec datum")
    p.add_argument("file")
    p.add_argument("--object")
    p.add_argument("--arrow")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_spec_lift)

    p = sub.add_parser("global-sections", help="sections at the terminal open")
    p.add_argument("file")
    p.add_argument("--object", required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_global_sections)

    p = sub.add_parser("pisch-check", help="locally affine membership")
    p.add_argument("file")
    p.add_argument("--arrow")
    p.add_argument("--terminal", nargs=2, metavar=("SRC", "DST"))
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_pisch_check)

    p = sub.add_parser("spectrum", help="prime spectrum of a ring document")
    p.add_argument("file")
    p.add_argument("--figure", help="render the opens lattice to this image path")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("report", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion ids")
    p.add_argument("--out-dir", help="write report.json, report.csv and figures here")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_search is None:
        args.max_search = caps.env_max_search()
    try:
        return args.fn(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except Undecided as exc:
        sys.stderr.write(f"undecided: {exc}\n")
        return EXIT_UNDECIDED
    except CapError as exc:
        sys.stderr.write(f"cap exceeded: {exc}\n")
        return EXIT_CAP
    except (ValidationError, OmegakitError) as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
