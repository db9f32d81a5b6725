"""Versioned JSON documents.

Every document carries a "format" header; loaders check it and raise
ParseError with the offending path and location.  Dumps are deterministic:
sorted keys, fixed separators.
"""

import json

from .errors import ParseError
from .fincat import FinCat, Functor, validate_category
from .omega import OmegaArrow, PointedCat, Profunctor
from . import enrich, ncat, pathcat, toyspec

CAT_V1 = "omegakit/cat-v1"
FUN_V1 = "omegakit/fun-v1"
PROF_V1 = "omegakit/prof-v1"
ARROW_V1 = "omegakit/arrow-v1"
DIAG_V1 = "omegakit/diag-v1"
WES_V1 = "omegakit/wes-v1"
NCAT_V1 = "omegakit/ncat-v1"
PRECAT_V1 = "omegakit/precat-v1"
RING_V1 = "omegakit/ring-v1"
SPEC_V1 = "omegakit/spec-v1"
SHEAF_V1 = "omegakit/sheaf-v1"
PRESHEAF_V1 = "omegakit/presheaf-v1"


def dumps(document):
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def load_document(path, expected=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(str(exc), path=path)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, location=f"{exc.lineno}:{exc.colno}")
    if not isinstance(doc, dict) or "format" not in doc:
        raise ParseError("missing format header", path=path)
    if expected is not None and doc["format"] != expected:
        raise ParseError(
            f"expected format {expected!r}, found {doc['format']!r}", path=path
        )
    return doc


def _need(doc, key, path):
    if key not in doc:
        raise ParseError(f"missing field {key!r}", path=path)
    return doc[key]


def _pair_key(text, path, n=2):
    inner = text.strip()
    if not (inner.startswith("(") and inner.endswith(")")):
        raise ParseError(f"bad tuple key {text!r}", path=path)
    parts = [p.strip() for p in inner[1:-1].split(",")]
    if len(parts) != n:
        raise ParseError(f"bad tuple key {text!r}", path=path)
    return tuple(parts)


# -- categories ------------------------------------------------------------------


def cat_to_doc(cat):
    return {
        "format": CAT_V1,
        "objects": list(cat.objects),
        "arrows": [
            {"id": a, "dom": d, "cod": c} for a, (d, c) in sorted(cat.arrows.items())
        ],
        "comp": [
            {"g": g, "f": f, "result": h}
            for (g, f), h in sorted(cat.comp.items())
        ],
        "identities": dict(sorted(cat.identity.items())),
    }


def cat_from_doc(doc, path="<doc>"):
    if doc.get("format") != CAT_V1:
        raise ParseError(f"not a {CAT_V1} document", path=path)
    for field in ("objects", "arrows"):
        _need(doc, field, path)
    return validate_category(doc)


def load_cat(path):
    return cat_from_doc(load_document(path, CAT_V1), path)


def _inline_or_path(value, loader, base_path):
    if isinstance(value, dict):
        return loader(value, base_path)
    raise ParseError("expected an inline document", path=base_path)


# -- functors ---------------------------------------------------------------------


def functor_to_doc(f):
    return {
        "format": FUN_V1,
        "source": cat_to_doc(f.source),
        "target": cat_to_doc(f.target),
        "omap": dict(sorted(f.omap.items())),
        "amap": dict(sorted(f.amap.items())),
    }


def functor_from_doc(doc, path="<doc>"):
    if doc.get("format") != FUN_V1:
        raise ParseError(f"not a {FUN_V1} document", path=path)
    source = cat_from_doc(_need(doc, "source", path), path)
    target = cat_from_doc(_need(doc, "target", path), path)
    return Functor(source, target, _need(doc, "omap", path), _need(doc, "amap", path))


def load_functor(path):
    return functor_from_doc(load_document(path, FUN_V1), path)


# -- correspondences -----------------------------------------------------------------


def profunctor_to_doc(prof):
    return {
        "format": PROF_V1,
        "left": cat_to_doc(prof.left),
        "right": cat_to_doc(prof.right),
        "values": {
            f"({c},{d})": list(v) for (c, d), v in sorted(prof.values.items())
        },
        "action": {
            f"({f},{g})": dict(sorted(m.items()))
            for (f, g), m in sorted(prof.action.items())
        },
    }


def profunctor_from_doc(doc, path="<doc>"):
    if doc.get("format") != PROF_V1:
        raise ParseError(f"not a {PROF_V1} document", path=path)
    left = cat_from_doc(_need(doc, "left", path), path)
    right = cat_from_doc(_need(doc, "right", path), path)
    values = {
        _pair_key(k, path): tuple(v) for k, v in _need(doc, "values", path).items()
    }
    action = {
        _pair_key(k, path): dict(m) for k, m in _need(doc, "action", path).items()
    }
    return Profunctor(left, right, values, action)


def arrow_to_doc(arrow):
    doc = profunctor_to_doc(arrow.prof)
    doc["format"] = ARROW_V1
    doc["src_point"] = arrow.src.point
    doc["dst_point"] = arrow.dst.point
    doc["element"] = arrow.point
    return doc


def arrow_from_doc(doc, path="<doc>"):
    if doc.get("format") != ARROW_V1:
        raise ParseError(f"not an {ARROW_V1} document", path=path)
    inner = dict(doc)
    inner["format"] = PROF_V1
    prof = profunctor_from_doc(inner, path)
    src = PointedCat(prof.left, _need(doc, "src_point", path))
    dst = PointedCat(prof.right, _need(doc, "dst_point", path))
    return OmegaArrow(src, dst, prof, _need(doc, "element", path))


def load_arrow(path):
    return arrow_from_doc(load_document(path, ARROW_V1), path)


# -- diagrams ----------------------------------------------------------------------------


def diagram_from_doc(doc, path="<doc>"):
    """Cospan/span of functors, or a finite set diagram."""
    if doc.get("format") != DIAG_V1:
        raise ParseError(f"not a {DIAG_V1} document", path=path)
    kind = _need(doc, "kind", path)
    if kind in ("cospan", "span"):
        left = functor_from_doc(_need(doc, "left", path), path)
        right = functor_from_doc(_need(doc, "right", path), path)
        return kind, (left, right)
    if kind == "set":
        from .sklim import SetDiagram

        index = cat_from_doc(_need(doc, "index", path), path)
        sets = {k: tuple(v) for k, v in _need(doc, "sets", path).items()}
        maps = {k: dict(m) for k, m in _need(doc, "maps", path).items()}
        return kind, SetDiagram(index, sets, maps)
    raise ParseError(f"unknown diagram kind {kind!r}", path=path)


def load_diagram(path):
    return diagram_from_doc(load_document(path, DIAG_V1), path)


# -- enriched sets --------------------------------------------------------------------------


def wes_from_doc(doc, path="<doc>"):
    """Enriched set over the set base: named sets, hom table and composition
    tables keyed by element pairs.  Returns (world, enriched set, morphisms)."""
    if doc.get("format") != WES_V1:
        raise ParseError(f"not a {WES_V1} document", path=path)
    world = enrich.SetTensorCat()
    for name, elems in _need(doc, "sets", path).items():
        world.obj(name, [tuple(e) if isinstance(e, list) else e for e in elems])
    carrier = tuple(_need(doc, "carrier", path))
    hom = {
        _pair_key(k, path): v for k, v in _need(doc, "hom", path).items()
    }
    comp = {}
    for k, table in _need(doc, "comp", path).items():
        a, b, c = _pair_key(k, path, n=3)
        dom = world.tensor(hom[(a, b)], hom[(b, c)])
        mapping = {}
        for pair_key, value in table.items():
            p, q = _pair_key(pair_key, path)
            mapping[(p, q)] = value
        comp[(a, b, c)] = world.arr(dom, hom[(a, c)], mapping)
    es = enrich.EnrichedSet(world, carrier, hom, comp)
    morphisms = {}
    for name, m in doc.get("morphisms", {}).items():
        f1 = dict(m["f1"])
        f2 = {}
        for k, table in m["f2"].items():
            a, b = _pair_key(k, path)
            f2[(a, b)] = world.arr(
                hom[(a, b)], hom[(f1[a], f1[b])], dict(table)
            )
        morphisms[name] = enrich.EnrichedMorphism(es, es, f1, f2)
    return world, es, morphisms


def load_wes(path):
    return wes_from_doc(load_document(path, WES_V1), path)


# -- higher categories ------------------------------------------------------------------------


def ncat_to_doc(x):
    if x.level == 1:
        return {"format": NCAT_V1, "level": 1, "cat": cat_to_doc(x.cat)}
    return {
        "format": NCAT_V1,
        "level": x.level,
        "carrier": list(x.carrier),
        "hom": {
            f"({a},{b})": ncat_to_doc(h) for (a, b), h in sorted(x.hom.items())
        },
        "comp": {
            f"({a},{b},{c})": nfunctor_to_doc(m)
            for (a, b, c), m in sorted(x.comp.items())
        },
    }


def nfunctor_to_doc(m):
    if m.level == 1:
        return {
            "level": 1,
            "omap": dict(sorted(m.functor.omap.items())),
            "amap": dict(sorted(m.functor.amap.items())),
        }
    return {
        "level": m.level,
        "f0": dict(sorted(m.f0.items())),
        "f2": {
            f"({a},{b})": nfunctor_to_doc(c) for (a, b), c in sorted(m.f2.items())
        },
    }


def ncat_from_doc(doc, path="<doc>"):
    if doc.get("format") != NCAT_V1:
        raise ParseError(f"not an {NCAT_V1} document", path=path)
    return _ncat_from(doc, path)


def _ncat_from(doc, path):
    level = _need(doc, "level", path)
    if level == 1:
        return ncat.from_fincat(cat_from_doc(_need(doc, "cat", path), path))
    carrier = tuple(_need(doc, "carrier", path))
    hom = {
        _pair_key(k, path): _ncat_from(h, path)
        for k, h in _need(doc, "hom", path).items()
    }
    comp = {}
    for k, m in _need(doc, "comp", path).items():
        a, b, c = _pair_key(k, path, n=3)
        comp[(a, b, c)] = _nfunctor_from(
            m, ncat.n_product(hom[(a, b)], hom[(b, c)]), hom[(a, c)], path
        )
    return ncat.make_ncat(level, carrier=carrier, hom=hom, comp=comp)


def _nfunctor_from(doc, source, target, path):
    level = _need(doc, "level", path)
    if level == 1:
        fun = Functor(
            source.cat, target.cat, _need(doc, "omap", path), _need(doc, "amap", path)
        )
        return ncat.NFunctor(1, source, target, functor=fun)
    f0 = dict(_need(doc, "f0", path))
    f2 = {}
    for k, c in _need(doc, "f2", path).items():
        a, b = _pair_key(k, path)
        f2[(a, b)] = _nfunctor_from(
            c, source.hom[(a, b)], target.hom[(f0[a], f0[b])], path
        )
    return ncat.NFunctor(level, source, target, f0=f0, f2=f2)


def load_ncat(path):
    return ncat_from_doc(load_document(path, NCAT_V1), path)


# -- pre-categories ----------------------------------------------------------------------------


def precat_from_doc(doc, path="<doc>"):
    if doc.get("format") != PRECAT_V1:
        raise ParseError(f"not a {PRECAT_V1} document", path=path)
    hom = {
        _pair_key(k, path): tuple(v) for k, v in _need(doc, "hom", path).items()
    }
    return pathcat.PreCat(_need(doc, "objects", path), hom)


def precat_to_doc(pre):
    return {
        "format": PRECAT_V1,
        "objects": list(pre.objects),
        "hom": {f"({x},{y})": list(v) for (x, y), v in sorted(pre.hom.items())},
    }


def load_precat(path):
    return precat_from_doc(load_document(path, PRECAT_V1), path)


# -- rings --------------------------------------------------------------------------------------


def ring_to_doc(ring):
    key = {x: str(x) for x in ring.carrier}
    return {
        "format": RING_V1,
        "name": ring.name,
        "carrier": [key[x] for x in ring.carrier],
        "add": {
            key[x]: {key[y]: key[ring.a(x, y)] for y in ring.carrier}
            for x in ring.carrier
        },
        "mul": {
            key[x]: {key[y]: key[ring.m(x, y)] for y in ring.carrier}
            for x in ring.carrier
        },
        "zero": key[ring.zero],
        "one": key[ring.one],
    }


def ring_from_doc(doc, path="<doc>"):
    if doc.get("format") != RING_V1:
        raise ParseError(f"not a {RING_V1} document", path=path)
    carrier = [str(x) for x in _need(doc, "carrier", path)]
    add = {
        (x, y): doc["add"][x][y] for x in carrier for y in carrier
    }
    mul = {
        (x, y): doc["mul"][x][y] for x in carrier for y in carrier
    }
    return toyspec.FiniteRing(
        doc.get("name", "ring"),
        carrier,
        add,
        mul,
        str(_need(doc, "zero", path)),
        str(_need(doc, "one", path)),
    )


def load_ring(path):
    return ring_from_doc(load_document(path, RING_V1), path)


# -- spec data ------------------------------------------------------------------------------------


def spec_datum_to_doc(datum):
    """Full export: the derived categories and tables alongside the
    generator block."""
    return {
        "format": SPEC_V1,
        "generators": {
            "rings": [ring_to_doc(r) for r in datum.world.roots],
            "extra_homs": [],
        },
        "R": cat_to_doc(datum.R),
        "T": cat_to_doc(datum.T),
        "sp": {"omap": dict(sorted(datum.sp.omap.items())),
               "amap": dict(sorted(datum.sp.amap.items()))},
        "covers": {
            obj: [list(f) for f in fams]
            for obj, fams in sorted(datum.tau.covers.items())
        },
        "admissibility": {
            "terminal": dict(sorted(datum.eps.terminal.items())),
            "sites": {c: list(datum.eps.E[c].objects) for c in sorted(datum.eps.E)},
        },
        "sections": {
            tok: ring_to_doc(ring) for tok, ring in sorted(datum.O_obj.items())
        } if datum.values == "ring" else {},
    }


def spec_datum_from_doc(doc, path="<doc>"):
    """Load from the generator block: rings plus explicit homs."""
    if doc.get("format") != SPEC_V1:
        raise ParseError(f"not a {SPEC_V1} document", path=path)
    gen = _need(doc, "generators", path)
    rings = [ring_from_doc(r, path) for r in _need(gen, "rings", path)]
    extra = []
    for h in gen.get("extra_homs", []):
        src = rings[h["source"]]
        tgt = rings[h["target"]]
        extra.append(toyspec.RingHom(src, tgt, {k: v for k, v in h["map"].items()}))
    return toyspec.build_spec_datum(rings, extra_homs=extra)


def load_spec_datum(path):
    return spec_datum_from_doc(load_document(path, SPEC_V1), path)


# -- presheaves and sheaf output ---------------------------------------------------------------------


def presheaf_from_doc(doc, path="<doc>"):
    from .site import Presheaf, Topology, ValueOps

    if doc.get("format") != PRESHEAF_V1:
        raise ParseError(f"not a {PRESHEAF_V1} document", path=path)
    cat = cat_from_doc(_need(doc, "site", path), path)
    kind = _need(doc, "values_kind", path)
    ops = ValueOps(kind)
    values, restr = {}, {}
    for obj, v in _need(doc, "values", path).items():
        values[obj] = ring_from_doc(v, path) if kind == "ring" else tuple(v)
    for arrow, m in _need(doc, "restrictions", path).items():
        if kind == "ring":
            small, big = cat.arrows[arrow]
            restr[arrow] = toyspec.RingHom(values[big], values[small], dict(m))
        else:
            restr[arrow] = dict(m)
    covers = {
        obj: [tuple(f) for f in fams]
        for obj, fams in _need(doc, "covers", path).items()
    }
    return Presheaf(cat, values, restr, ops), Topology(cat, covers)


def sheaf_to_doc(sheaf):
    ops = sheaf.ops
    values = {}
    for obj in sheaf.site.objects:
        v = sheaf.value(obj)
        if ops.kind == "ring":
            renamed = toyspec.FiniteRing(
                v.name,
                [repr(x) for x in v.carrier],
                {(repr(a), repr(b)): repr(c) for (a, b), c in v.add.items()},
                {(repr(a), repr(b)): repr(c) for (a, b), c in v.mul.items()},
                repr(v.zero),
                repr(v.one),
                check=False,
            )
            values[obj] = ring_to_doc(renamed)
        else:
            values[obj] = [repr(x) for x in v]
    restrictions = {}
    for a in sheaf.site.arrows:
        m = sheaf.presheaf.restrict(a)
        table = m.mapping if ops.kind == "ring" else m
        restrictions[a] = {repr(k): repr(v) for k, v in table.items()}
    return {
        "format": SHEAF_V1,
        "site": cat_to_doc(sheaf.site),
        "values_kind": ops.kind,
        "sections": values,
        "restrictions": restrictions,
    }
