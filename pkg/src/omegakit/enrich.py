"""Weakly enriched sets over a tensor category.

Two bases are supported, the ones actually exercised downstream: finite sets
with the cartesian tensor, and finite categories with the product tensor and
equality-up-to-natural-isomorphism as the weakening.  A base is a TensorCat
"world": a registry of objects and arrows with semantic content (sets and
functions, or categories and functors), closed under composition and tensor
on demand.  The materialized FinCat view is available via .category().

The weakening argument `sk` of the checking operations is one of
  - SK_IDENTITY: arrows compare strictly,
  - SK_COLLAPSE: every parallel pair compares equal (the quotient to the
    terminal category),
  - SK_SKEL: functors compare up to natural isomorphism (cat base only),
or an explicit fincat.Functor out of the materialized base.

The enriched hom object between two enriched morphisms is realized as the
maximal subobject of the product of pointwise hom objects whose elements are
families natural after sk; in the finite setting the colimit of the domains
of all qualifying arrows is exactly this subobject, and it comes with its
monic embedding into the product.
"""

import itertools
from dataclasses import dataclass

from .caps import Budget
from .errors import (
    IncompatibleEndpoints,
    UnsupportedBase,
    ValidationError,
)
from .fincat import Decision, FinCat, Functor
from . import fincat


class SkTag:
    def __init__(self, kind):
        self.kind = kind

    def __repr__(self):
        return f"SkTag({self.kind})"


SK_IDENTITY = SkTag("identity")
SK_COLLAPSE = SkTag("collapse")
SK_SKEL = SkTag("skel")


class TensorCat:
    """Common base for the two supported tensor worlds."""

    kind = None

    def elements(self, obj):
        raise NotImplementedError

    def arrows_equal_after(self, sk, f, g):
        raise NotImplementedError


class SetTensorCat(TensorCat):
    """Finite sets with the cartesian tensor.

    Objects are named finite sets; arrows are functions, deduplicated by
    graph so that semantically equal arrows share an identifier.
    """

    kind = "set"

    def __init__(self):
        self._objs = {}
        self._arr = {}
        self._by_graph = {}
        self._tensor = {}
        self._count = 0
        self.unit = self.obj("I", [()])

    # -- registry ------------------------------------------------------

    def obj(self, name, elems):
        elems = tuple(elems)
        if name in self._objs:
            if self._objs[name] != elems:
                raise ValidationError(f"object {name!r} registered twice")
            return name
        self._objs[name] = elems
        return name

    def elements(self, obj):
        return self._objs[obj]

    def arr(self, dom, cod, mapping, name=None):
        mapping = dict(mapping)
        if set(mapping) != set(self._objs[dom]):
            raise ValidationError("mapping domain mismatch")
        if not set(mapping.values()) <= set(self._objs[cod]):
            raise ValidationError("mapping codomain mismatch")
        graph = (dom, cod, tuple(sorted(mapping.items(), key=repr)))
        if graph in self._by_graph:
            return self._by_graph[graph]
        if name is None or name in self._arr:
            name = f"f{self._count}"
            self._count += 1
        self._arr[name] = (dom, cod, mapping)
        self._by_graph[graph] = name
        return name

    def dom(self, f):
        return self._arr[f][0]

    def cod(self, f):
        return self._arr[f][1]

    def apply(self, f, e):
        return self._arr[f][2][e]

    def mapping(self, f):
        return dict(self._arr[f][2])

    def id_arr(self, obj):
        return self.arr(obj, obj, {e: e for e in self._objs[obj]}, f"id.{obj}")

    def compose(self, g, f):
        fd, fc, fm = self._arr[f]
        gd, gc, gm = self._arr[g]
        if fc != gd:
            raise IncompatibleEndpoints(f"cannot compose {g!r} after {f!r}")
        return self.arr(fd, gc, {e: gm[fm[e]] for e in self._objs[fd]})

    # -- tensor ----------------------------------------------------------

    def tensor(self, a, b):
        key = (a, b)
        if key in self._tensor:
            return self._tensor[key]
        name = f"({a}*{b})"
        elems = [(x, y) for x in self._objs[a] for y in self._objs[b]]
        self.obj(name, elems)
        self._tensor[key] = name
        return name

    def tensor_arr(self, f, g):
        fd, fc, fm = self._arr[f]
        gd, gc, gm = self._arr[g]
        dom, cod = self.tensor(fd, gd), self.tensor(fc, gc)
        return self.arr(
            dom, cod, {(x, y): (fm[x], gm[y]) for x, y in self._objs[dom]}
        )

    def associator(self, a, b, c):
        dom = self.tensor(self.tensor(a, b), c)
        cod = self.tensor(a, self.tensor(b, c))
        return self.arr(dom, cod, {((x, y), z): (x, (y, z)) for (x, y), z in self._objs[dom]})

    def symmetrizer(self, a, b):
        dom, cod = self.tensor(a, b), self.tensor(b, a)
        return self.arr(dom, cod, {(x, y): (y, x) for x, y in self._objs[dom]})

    def unit_right(self, a):
        dom = self.tensor(a, self.unit)
        return self.arr(dom, a, {(x, u): x for x, u in self._objs[dom]})

    def unit_left(self, a):
        dom = self.tensor(self.unit, a)
        return self.arr(dom, a, {(u, x): x for u, x in self._objs[dom]})

    def subobject(self, name, parent, elems):
        elems = tuple(elems)
        if not set(elems) <= set(self._objs[parent]):
            raise ValidationError("subobject elements must come from the parent")
        self.obj(name, elems)
        inclusion = self.arr(name, parent, {e: e for e in elems})
        return name, inclusion

    def category(self):
        """Materialize the registry as a FinCat, closing composition."""
        arrows = dict(self._arr)
        for o in self._objs:
            self.id_arr(o)
        changed = True
        while changed:
            changed = False
            items = list(self._arr.items())
            for g, (gd, gc, gm) in items:
                for f, (fd, fc, fm) in items:
                    if fc == gd:
                        before = len(self._arr)
                        self.compose(g, f)
                        if len(self._arr) != before:
                            changed = True
        arrows = {a: (d, c) for a, (d, c, m) in self._arr.items()}
        comp = {}
        for g, (gd, gc, gm) in self._arr.items():
            for f, (fd, fc, fm) in self._arr.items():
                if fc == gd:
                    comp[(g, f)] = self.compose(g, f)
        identity = {o: self.id_arr(o) for o in self._objs}
        return FinCat(list(self._objs), arrows, comp, identity)

    def arrows_equal_after(self, sk, f, g):
        if isinstance(sk, Functor):
            return sk.amap[f] == sk.amap[g]
        if sk.kind == "identity":
            return self._arr[f][2] == self._arr[g][2] and self._arr[f][:2] == self._arr[g][:2]
        if sk.kind == "collapse":
            return True
        raise UnsupportedBase(f"sk {sk!r} is not meaningful on the set base")


class CatTensorCat(TensorCat):
    """Finite categories with the product tensor; the weakening identifies
    naturally isomorphic functors."""

    kind = "cat"

    def __init__(self):
        self._objs = {}
        self._arr = {}
        self._by_key = {}
        self._tensor = {}
        self._count = 0
        self.unit = self.obj("I", fincat.terminal_category())

    def obj(self, name, cat):
        if name in self._objs:
            if self._objs[name] != cat:
                raise ValidationError(f"object {name!r} registered twice")
            return name
        self._objs[name] = cat
        return name

    def cat_of(self, obj):
        return self._objs[obj]

    def elements(self, obj):
        return self._objs[obj].objects

    def arr(self, dom, cod, functor, name=None):
        if functor.source != self._objs[dom] or functor.target != self._objs[cod]:
            raise ValidationError("functor endpoints do not match the objects")
        key = (dom, cod, functor.key())
        if key in self._by_key:
            return self._by_key[key]
        if name is None or name in self._arr:
            name = f"F{self._count}"
            self._count += 1
        self._arr[name] = (dom, cod, functor)
        self._by_key[key] = name
        return name

    def dom(self, f):
        return self._arr[f][0]

    def cod(self, f):
        return self._arr[f][1]

    def functor_of(self, f):
        return self._arr[f][2]

    def apply(self, f, e):
        return self._arr[f][2].omap[e]

    def id_arr(self, obj):
        return self.arr(obj, obj, fincat.identity_functor(self._objs[obj]))

    def compose(self, g, f):
        fd, fc, ff = self._arr[f]
        gd, gc, gf = self._arr[g]
        if fc != gd:
            raise IncompatibleEndpoints(f"cannot compose {g!r} after {f!r}")
        return self.arr(fd, gc, fincat.compose_functors(gf, ff))

    def tensor(self, a, b):
        key = (a, b)
        if key in self._tensor:
            return self._tensor[key]
        name = f"({a}*{b})"
        self.obj(name, fincat.product(self._objs[a], self._objs[b]))
        self._tensor[key] = name
        return name

    def tensor_arr(self, f, g):
        fd, fc, ff = self._arr[f]
        gd, gc, gf = self._arr[g]
        dom, cod = self.tensor(fd, gd), self.tensor(fc, gc)
        dc, cc = self._objs[dom], self._objs[cod]
        omap = {}
        for o in dc.objects:
            x, y = dc._obj_parts[o]
            omap[o] = f"({ff.omap[x]},{gf.omap[y]})"
        amap = {}
        for a in dc.arrows:
            x, y = dc._pair_parts[a]
            amap[a] = f"({ff.amap[x]},{gf.amap[y]})"
        return self.arr(dom, cod, Functor(dc, cc, omap, amap, check=False))

    def associator(self, a, b, c):
        dom_o = self.tensor(self.tensor(a, b), c)
        cod_o = self.tensor(a, self.tensor(b, c))
        dc, cc = self._objs[dom_o], self._objs[cod_o]

        def rebracket(token):
            # "((x,y),z)" -> "(x,(y,z))" via the recorded part tables
            xy, z = dc._obj_parts[token] if token in dc._obj_parts else dc._pair_parts[token]
            inner = self._objs[self.tensor(a, b)]
            x, y = (
                inner._obj_parts[xy] if xy in getattr(inner, "_obj_parts", {}) else inner._pair_parts[xy]
            )
            return f"({x},({y},{z}))"

        omap = {o: rebracket(o) for o in dc.objects}
        amap = {f: rebracket(f) for f in dc.arrows}
        return self.arr(dom_o, cod_o, Functor(dc, cc, omap, amap, check=False))

    def symmetrizer(self, a, b):
        dom_o, cod_o = self.tensor(a, b), self.tensor(b, a)
        dc, cc = self._objs[dom_o], self._objs[cod_o]
        omap = {o: "({},{})".format(*reversed(dc._obj_parts[o])) for o in dc.objects}
        amap = {f: "({},{})".format(*reversed(dc._pair_parts[f])) for f in dc.arrows}
        return self.arr(dom_o, cod_o, Functor(dc, cc, omap, amap, check=False))

    def unit_right(self, a):
        dom_o = self.tensor(a, self.unit)
        dc = self._objs[dom_o]
        omap = {o: dc._obj_parts[o][0] for o in dc.objects}
        amap = {f: dc._pair_parts[f][0] for f in dc.arrows}
        return self.arr(dom_o, a, Functor(dc, self._objs[a], omap, amap, check=False))

    def unit_left(self, a):
        dom_o = self.tensor(self.unit, a)
        dc = self._objs[dom_o]
        omap = {o: dc._obj_parts[o][1] for o in dc.objects}
        amap = {f: dc._pair_parts[f][1] for f in dc.arrows}
        return self.arr(dom_o, a, Functor(dc, self._objs[a], omap, amap, check=False))

    def arrows_equal_after(self, sk, f, g):
        if isinstance(sk, Functor):
            return sk.amap[f] == sk.amap[g]
        ff, gf = self._arr[f][2], self._arr[g][2]
        if sk.kind == "identity":
            return self._arr[f][:2] == self._arr[g][:2] and ff.key() == gf.key()
        if sk.kind == "collapse":
            return True
        if sk.kind == "skel":
            if self._arr[f][:2] != self._arr[g][:2]:
                return False
            return bool(fincat.skel_equal(ff, gf))
        raise UnsupportedBase(f"sk {sk!r} is not meaningful on the cat base")


# -- enriched sets and morphisms ----------------------------------------------


class EnrichedSet:
    """carrier with hom objects in the base and composition arrows
    hom(a,b) (x) hom(b,c) -> hom(a,c); no associativity assumed."""

    def __init__(self, world, carrier, hom, comp, check=True):
        self.world = world
        self.carrier = tuple(carrier)
        self.hom = dict(hom)
        self.comp = dict(comp)
        if check:
            self._validate()

    def _validate(self):
        w = self.world
        for a in self.carrier:
            for b in self.carrier:
                if (a, b) not in self.hom:
                    raise ValidationError(f"no hom object at ({a!r},{b!r})")
        for a in self.carrier:
            for b in self.carrier:
                for c in self.carrier:
                    arrow = self.comp.get((a, b, c))
                    if arrow is None:
                        raise ValidationError(f"no composition at ({a!r},{b!r},{c!r})")
                    want_dom = w.tensor(self.hom[(a, b)], self.hom[(b, c)])
                    if w.dom(arrow) != want_dom or w.cod(arrow) != self.hom[(a, c)]:
                        raise ValidationError(
                            f"composition at ({a!r},{b!r},{c!r}) has wrong endpoints"
                        )

    def compose_elems(self, a, b, c, p, q):
        """The element of hom(a,c) obtained from p in hom(a,b), q in hom(b,c)."""
        return self.world.apply(self.comp[(a, b, c)], (p, q))


class EnrichedMorphism:
    def __init__(self, source, target, f1, f2, check=True):
        self.source = source
        self.target = target
        self.f1 = dict(f1)
        self.f2 = dict(f2)
        if check:
            self._validate()

    def _validate(self):
        S, T, w = self.source, self.target, self.source.world
        for a in S.carrier:
            if self.f1.get(a) not in T.carrier:
                raise ValidationError(f"carrier image of {a!r} missing")
        for a in S.carrier:
            for b in S.carrier:
                arrow = self.f2.get((a, b))
                if arrow is None:
                    raise ValidationError(f"no hom component at ({a!r},{b!r})")
                if w.dom(arrow) != S.hom[(a, b)] or w.cod(arrow) != T.hom[
                    (self.f1[a], self.f1[b])
                ]:
                    raise ValidationError(
                        f"hom component at ({a!r},{b!r}) has wrong endpoints"
                    )


def identity_morphism(S):
    w = S.world
    return EnrichedMorphism(
        S,
        S,
        {a: a for a in S.carrier},
        {(a, b): w.id_arr(S.hom[(a, b)]) for a in S.carrier for b in S.carrier},
    )


# -- checks ---------------------------------------------------------------------


def check_we_morphism(f, S, T, sk=SK_IDENTITY):
    """Does f respect composition after applying sk?  Witness: first failing
    triple together with the two mismatching arrows."""
    w = S.world
    for a in S.carrier:
        for b in S.carrier:
            for c in S.carrier:
                lhs = w.compose(
                    T.comp[(f.f1[a], f.f1[b], f.f1[c])],
                    w.tensor_arr(f.f2[(a, b)], f.f2[(b, c)]),
                )
                rhs = w.compose(f.f2[(a, c)], S.comp[(a, b, c)])
                if not w.arrows_equal_after(sk, lhs, rhs):
                    return Decision(False, witness=((a, b, c), lhs, rhs))
    return Decision(True)


def check_sk_associative(S, sk=SK_IDENTITY):
    """Does the composition square commute after sk for every quadruple?"""
    w = S.world
    for a in S.carrier:
        for b in S.carrier:
            for c in S.carrier:
                for d in S.carrier:
                    h_ab, h_bc, h_cd = (
                        S.hom[(a, b)],
                        S.hom[(b, c)],
                        S.hom[(c, d)],
                    )
                    alpha = w.associator(h_ab, h_bc, h_cd)
                    lhs = w.compose(
                        S.comp[(a, b, d)],
                        w.compose(
                            w.tensor_arr(w.id_arr(h_ab), S.comp[(b, c, d)]), alpha
                        ),
                    )
                    rhs = w.compose(
                        S.comp[(a, c, d)],
                        w.tensor_arr(S.comp[(a, b, c)], w.id_arr(h_cd)),
                    )
                    if not w.arrows_equal_after(sk, lhs, rhs):
                        return Decision(False, witness=((a, b, c, d), lhs, rhs))
    return Decision(True)


def we_category_compose(g, f, sk=SK_IDENTITY, recheck=True):
    """Componentwise composite of enriched morphisms; the closure property
    is re-verified numerically rather than trusted."""
    if f.target is not g.source and f.target != g.source:
        raise IncompatibleEndpoints("morphisms are not composable")
    w = f.source.world
    S, U = f.source, g.target
    f1 = {a: g.f1[f.f1[a]] for a in S.carrier}
    f2 = {
        (a, b): w.compose(g.f2[(f.f1[a], f.f1[b])], f.f2[(a, b)])
        for a in S.carrier
        for b in S.carrier
    }
    out = EnrichedMorphism(S, U, f1, f2)
    if recheck:
        dec = check_we_morphism(out, S, U, sk)
        if not dec:
            raise ValidationError(f"composite fails the morphism check: {dec.witness}")
    return out


# -- the enriched hom -------------------------------------------------------------


@dataclass
class EnrichedHom:
    """The subobject of the pointwise product realizing the hom object,
    with its monic embedding."""

    families: tuple        # tuples indexed by source carrier order
    product_object: object
    object: object         # base object (set world) or FinCat (cat world)
    embedding: object      # inclusion arrow / functor
    source_carrier: tuple


def _induced_maps_set(w, C, D, phi, psi, lam, x, y):
    """The two functions h_C(x,y) -> h_D(phi x, psi y), as graphs."""
    left, right = {}, {}
    for p in w.elements(C.hom[(x, y)]):
        fp = w.apply(phi.f2[(x, y)], p)
        left[p] = w.apply(
            D.comp[(phi.f1[x], phi.f1[y], psi.f1[y])], (fp, lam[y])
        )
        gp = w.apply(psi.f2[(x, y)], p)
        right[p] = w.apply(
            D.comp[(phi.f1[x], psi.f1[x], psi.f1[y])], (lam[x], gp)
        )
    return left, right


def enriched_hom(C, D, phi, psi, sk=SK_IDENTITY, cap=None):
    """Families (lam_x in hom_D(phi x, psi x)) natural after sk.

    Set base: the subset of the full product; cat base (sk = SK_SKEL): the
    full subcategory of the product category on families of objects whose
    two induced test functors are naturally isomorphic for every (x, y).
    """
    w = C.world
    if w.kind == "set":
        return _enriched_hom_set(C, D, phi, psi, sk, cap)
    if w.kind == "cat":
        return _enriched_hom_cat(C, D, phi, psi, sk, cap)
    raise UnsupportedBase("enriched hom needs the set or cat base")


def _enriched_hom_set(C, D, phi, psi, sk, cap):
    w = C.world
    budget = Budget(cap, "enriched_hom")
    carrier = C.carrier
    pools = [w.elements(D.hom[(phi.f1[x], psi.f1[x])]) for x in carrier]
    total = 1
    for p in pools:
        total *= len(p)
    budget.check_size(total)
    families = []
    for combo in itertools.product(*pools):
        budget.spend()
        lam = dict(zip(carrier, combo))
        ok = True
        for x in carrier:
            for y in carrier:
                left, right = _induced_maps_set(w, C, D, phi, psi, lam, x, y)
                if isinstance(sk, Functor) or sk.kind != "identity":
                    dom_o = C.hom[(x, y)]
                    cod_o = D.hom[(phi.f1[x], psi.f1[y])]
                    la = w.arr(dom_o, cod_o, left)
                    ra = w.arr(dom_o, cod_o, right)
                    if not w.arrows_equal_after(sk, la, ra):
                        ok = False
                elif left != right:
                    ok = False
                if not ok:
                    break
            if not ok:
                break
        if ok:
            families.append(combo)
    prod_name = "Prod(" + ",".join(
        D.hom[(phi.f1[x], psi.f1[x])] for x in carrier
    ) + ")"
    prod = w.obj(prod_name, list(itertools.product(*pools)))
    sub_name = f"Nat[{prod_name}]#{len(families)}"
    sub, incl = w.subobject(sub_name, prod, families)
    return EnrichedHom(tuple(families), prod, sub, incl, carrier)


def _enriched_hom_cat(C, D, phi, psi, sk, cap):
    w = C.world
    budget = Budget(cap, "enriched_hom")
    carrier = C.carrier
    pools = [w.elements(D.hom[(phi.f1[x], psi.f1[x])]) for x in carrier]
    total = 1
    for p in pools:
        total *= len(p)
    budget.check_size(total)
    families = []
    for combo in itertools.product(*pools):
        budget.spend()
        lam = dict(zip(carrier, combo))
        ok = True
        for x in carrier:
            for y in carrier:
                if not _cat_family_natural(w, C, D, phi, psi, lam, x, y, sk):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            families.append(combo)
    # materialize: full subcategory of the product category on these families
    prod_cat = _iterated_product([w.cat_of(D.hom[(phi.f1[x], psi.f1[x])]) for x in carrier])
    keep = {_family_token(f) for f in families}
    sub = _full_subcategory(prod_cat, keep)
    embedding = Functor(
        sub,
        prod_cat,
        {o: o for o in sub.objects},
        {a: a for a in sub.arrows},
        check=False,
    )
    return EnrichedHom(tuple(families), prod_cat, sub, embedding, carrier)


def _cat_family_natural(w, C, D, phi, psi, lam, x, y, sk):
    """Compare the two induced functors h_C(x,y) -> h_D(phi x, psi y)."""
    hc = w.cat_of(C.hom[(x, y)])
    target = w.cat_of(D.hom[(phi.f1[x], psi.f1[y])])
    comp_l = w.functor_of(D.comp[(phi.f1[x], phi.f1[y], psi.f1[y])])
    comp_r = w.functor_of(D.comp[(phi.f1[x], psi.f1[x], psi.f1[y])])
    phixy = w.functor_of(phi.f2[(x, y)])
    psixy = w.functor_of(psi.f2[(x, y)])
    hd_mid_l = comp_l.source  # product of h_D(phi x, phi y) and h_D(phi y, psi y)
    hd_mid_r = comp_r.source

    def pair_into(prod_cat, f_obj, f_arr, const_obj, const_id, left=True):
        omap, amap = {}, {}
        for o in hc.objects:
            a = f_obj[o]
            omap[o] = f"({a},{const_obj})" if left else f"({const_obj},{a})"
        for u in hc.arrows:
            a = f_arr[u]
            amap[u] = f"({a},{const_id})" if left else f"({const_id},{a})"
        return Functor(hc, prod_cat, omap, amap, check=False)

    lam_y_cat = w.cat_of(D.hom[(phi.f1[y], psi.f1[y])])
    lam_x_cat = w.cat_of(D.hom[(phi.f1[x], psi.f1[x])])
    left_pair = pair_into(
        hd_mid_l, phixy.omap, phixy.amap, lam[y], lam_y_cat.id_(lam[y]), left=True
    )
    right_pair = pair_into(
        hd_mid_r, psixy.omap, psixy.amap, lam[x], lam_x_cat.id_(lam[x]), left=False
    )
    F1 = fincat.compose_functors(comp_l, left_pair)
    F2 = fincat.compose_functors(comp_r, right_pair)
    if isinstance(sk, SkTag) and sk.kind == "identity":
        return F1.key() == F2.key()
    if isinstance(sk, SkTag) and sk.kind == "collapse":
        return True
    return bool(fincat.skel_equal(F1, F2))


def _iterated_product(cats):
    if not cats:
        return fincat.terminal_category()
    out = cats[0]
    for c in cats[1:]:
        out = fincat.product(out, c)
    return out


def _family_token(family):
    token = family[0]
    for part in family[1:]:
        token = f"({token},{part})"
    return token


def _full_subcategory(cat, objects):
    objs = [o for o in cat.objects if o in objects]
    arrows = {
        a: e for a, e in cat.arrows.items() if e[0] in objects and e[1] in objects
    }
    comp = {
        (g, f): cat.comp[(g, f)]
        for g in arrows
        for f in arrows
        if cat.cod(f) == cat.dom(g)
    }
    identity = {o: cat.id_(o) for o in objs}
    return FinCat(objs, arrows, comp, identity, check=False)


def enriched_compose(C, D, phi, psi, xi, sk=SK_IDENTITY, homs=None, cap=None):
    """Pairing of families followed by pointwise composition in D.

    Returns (mapping, arrow-or-functor).  The mapping sends a pair of
    families to a family, and is checked to land in enriched_hom(phi, xi).
    """
    w = C.world
    h1 = homs[0] if homs else enriched_hom(C, D, phi, psi, sk, cap)
    h2 = homs[1] if homs else enriched_hom(C, D, psi, xi, sk, cap)
    h3 = homs[2] if homs else enriched_hom(C, D, phi, xi, sk, cap)
    mapping = {}
    for lam in h1.families:
        for mu in h2.families:
            nu = tuple(
                w.apply(
                    D.comp[(phi.f1[x], psi.f1[x], xi.f1[x])],
                    (lam[i], mu[i]),
                )
                for i, x in enumerate(C.carrier)
            )
            if nu not in h3.families:
                raise ValidationError(
                    "pointwise composite escapes the natural families"
                )
            mapping[(lam, mu)] = nu
    if w.kind == "set":
        dom = w.tensor(h1.object, h2.object)
        arrow = w.arr(dom, h3.object, {k: v for k, v in mapping.items()})
        return mapping, arrow
    # cat base: the composition functor on the realized subcategories
    prod = fincat.product(h1.object, h2.object)
    omap, amap = {}, {}
    for o in prod.objects:
        l, m = prod._obj_parts[o]
        omap[o] = _family_token(mapping[(_token_family(l, h1), _token_family(m, h2))])
    for a in prod.arrows:
        la, ma = prod._pair_parts[a]
        # componentwise composition on hom arrows
        amap[a] = _compose_hom_arrows(w, C, D, phi, psi, xi, la, ma, h1, h2)
    return mapping, Functor(prod, h3.object, omap, amap, check=False)


def _token_family(token, hom):
    for fam in hom.families:
        if _family_token(fam) == token:
            return fam
    raise ValidationError(f"unknown family token {token!r}")


def _compose_hom_arrows(w, C, D, phi, psi, xi, la, ma, h1, h2):
    # split product-arrow tokens back into per-carrier components and apply
    # the comp functors' arrow maps pointwise
    l_parts = _split_token(la, len(C.carrier))
    m_parts = _split_token(ma, len(C.carrier))
    out = []
    for i, x in enumerate(C.carrier):
        f = w.functor_of(D.comp[(phi.f1[x], psi.f1[x], xi.f1[x])])
        out.append(f.amap[f"({l_parts[i]},{m_parts[i]})"])
    token = out[0]
    for part in out[1:]:
        token = f"({token},{part})"
    return token


def _split_token(token, n):
    parts = [token]
    for _ in range(n - 1):
        head = parts.pop(0)
        inner = head[1:-1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                parts = [inner[:i], inner[i + 1 :]] + parts
                break
    return parts


# -- push / pull -------------------------------------------------------------------


def pushforward(C, D, E, F, psi1, psi2, hom_src=None, hom_dst=None, sk=SK_IDENTITY):
    """F_*: families between psi1, psi2 : C -> D map to families between
    F o psi1, F o psi2 : C -> E, by applying F's hom components pointwise."""
    w = C.world
    hom_src = hom_src or enriched_hom(C, D, psi1, psi2, sk)
    comp1 = we_category_compose(F, psi1, sk, recheck=False)
    comp2 = we_category_compose(F, psi2, sk, recheck=False)
    hom_dst = hom_dst or enriched_hom(C, E, comp1, comp2, sk)
    out = {}
    for fam in hom_src.families:
        image = tuple(
            w.apply(F.f2[(psi1.f1[x], psi2.f1[x])], fam[i])
            for i, x in enumerate(C.carrier)
        )
        if image not in hom_dst.families:
            raise ValidationError("pushforward image is not a natural family")
        out[fam] = image
    return out, hom_dst


def pullback(B, C, D, G, phi1, phi2, hom_src=None, hom_dst=None, sk=SK_IDENTITY):
    """G^*: families between phi1, phi2 : C -> D map to families between
    phi1 o G, phi2 o G : B -> D by reindexing along G's carrier map."""
    w = B.world
    hom_src = hom_src or enriched_hom(C, D, phi1, phi2, sk)
    comp1 = we_category_compose(phi1, G, sk, recheck=False)
    comp2 = we_category_compose(phi2, G, sk, recheck=False)
    hom_dst = hom_dst or enriched_hom(B, D, comp1, comp2, sk)
    index = {x: i for i, x in enumerate(C.carrier)}
    out = {}
    for fam in hom_src.families:
        image = tuple(fam[index[G.f1[b]]] for b in B.carrier)
        if image not in hom_dst.families:
            raise ValidationError("pullback image is not a natural family")
        out[fam] = image
    return out, hom_dst


# -- limits -----------------------------------------------------------------------


def we_limit(index, sets, morphisms):
    """Limit of a finite diagram of enriched sets over the set base:
    carrier = limit of carriers, hom objects = pointwise limits of homs."""
    some = next(iter(sets.values()))
    w = some.world
    if w.kind != "set":
        raise UnsupportedBase("general weak-enrichment limits need the set base")
    objs = list(index.objects)
    carriers = []
    for combo in itertools.product(*(sets[i].carrier for i in objs)):
        fam = dict(zip(objs, combo))
        if all(
            morphisms[a].f1[fam[i]] == fam[j]
            for a, (i, j) in index.arrows.items()
        ):
            carriers.append(combo)

    hom, comp = {}, {}
    hom_elems = {}
    for fa in carriers:
        for fb in carriers:
            pools = [
                w.elements(sets[i].hom[(fa[k], fb[k])]) for k, i in enumerate(objs)
            ]
            members = []
            for combo in itertools.product(*pools):
                tv = dict(zip(objs, combo))
                if all(
                    w.apply(
                        morphisms[a].f2[(fa[objs.index(i)], fb[objs.index(i)])],
                        tv[i],
                    )
                    == tv[j]
                    for a, (i, j) in index.arrows.items()
                ):
                    members.append(combo)
            name = w.obj(f"LimHom[{fa}|{fb}]", members)
            hom[(fa, fb)] = name
            hom_elems[(fa, fb)] = members
    for fa in carriers:
        for fb in carriers:
            for fc in carriers:
                dom = w.tensor(hom[(fa, fb)], hom[(fb, fc)])
                mapping = {}
                for p, q in w.elements(dom):
                    mapping[(p, q)] = tuple(
                        w.apply(
                            sets[i].comp[(fa[k], fb[k], fc[k])], (p[k], q[k])
                        )
                        for k, i in enumerate(objs)
                    )
                comp[(fa, fb, fc)] = w.arr(dom, hom[(fa, fc)], mapping)
    return EnrichedSet(w, carriers, hom, comp)


def we_product(S, T):
    idx = fincat.discrete_category(["1", "2"])
    return we_limit(
        idx,
        {"1": S, "2": T},
        {
            "id_1": identity_morphism(S),
            "id_2": identity_morphism(T),
        },
    )


def we_terminal(world):
    """Empty-diagram limit: singleton carrier with terminal hom."""
    if world.kind != "set":
        raise UnsupportedBase("terminal enriched set needs the set base")
    t = world.obj("T1", ["*"])
    carrier = ("*",)
    hom = {("*", "*"): t}
    dom = world.tensor(t, t)
    comp = {("*", "*", "*"): world.arr(dom, t, {e: "*" for e in world.elements(dom)})}
    return EnrichedSet(world, carrier, hom, comp)


def we_coproduct(S, T):
    """Disjoint union; cross homs are the empty object."""
    w = S.world
    if w.kind != "set":
        raise UnsupportedBase("coproducts here need the set base")
    empty = w.obj("Empty", [])
    carrier = [("L", a) for a in S.carrier] + [("R", b) for b in T.carrier]
    hom, comp = {}, {}
    def hom_of(a, b):
        (sa, xa), (sb, xb) = a, b
        if sa != sb:
            return empty
        return (S if sa == "L" else T).hom[(xa, xb)]
    for a in carrier:
        for b in carrier:
            hom[(a, b)] = hom_of(a, b)
    for a in carrier:
        for b in carrier:
            for c in carrier:
                dom = w.tensor(hom[(a, b)], hom[(b, c)])
                if a[0] == b[0] == c[0]:
                    side = S if a[0] == "L" else T
                    inner = side.comp[(a[1], b[1], c[1])]
                    mapping = {e: w.apply(inner, e) for e in w.elements(dom)}
                else:
                    mapping = {e: None for e in w.elements(dom)}  # dom is empty
                    mapping = {}
                comp[(a, b, c)] = w.arr(dom, hom[(a, c)], mapping)
    return EnrichedSet(w, carrier, hom, comp)


# -- the enriched arrows functor ---------------------------------------------------


def arr_bar(S):
    """Coproduct of all hom objects; on the set base this is the disjoint
    union of hom elements tagged by their pair."""
    w = S.world
    if w.kind != "set":
        raise UnsupportedBase("enriched arrows functor realized on the set base")
    elems = []
    for a in S.carrier:
        for b in S.carrier:
            for e in w.elements(S.hom[(a, b)]):
                elems.append((a, b, e))
    return w.obj(f"ArrBar#{len(elems)}", elems)


def arr_bar_map(f):
    """The coproduct map of a morphism's hom components."""
    w = f.source.world
    src = arr_bar(f.source)
    dst = arr_bar(f.target)
    mapping = {
        (a, b, e): (f.f1[a], f.f1[b], w.apply(f.f2[(a, b)], e))
        for a, b, e in w.elements(src)
    }
    return w.arr(src, dst, mapping)
