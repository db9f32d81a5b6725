"""Limits and colimits weakened through a quotient functor.

Only the executable cases are computed: ordinary finite (co)limits of sets
and categories (the reduction case where the weakening functor or the index
restriction is an identity), the weak limit of a cospan of categories where
cone squares commute up to isomorphism, and the weak colimit of a span built
from formal isomorphisms by word rewriting.  The fully general construction
ranges over all objects of an ambient category and is out of reach; anything
else raises UnsupportedBase.
"""

import itertools
from dataclasses import dataclass, field

from .caps import Budget
from .errors import CapExceeded, UnsupportedBase, ValidationError
from .fincat import FinCat, Functor, identity_functor
from . import fincat


@dataclass
class Cone:
    apex: object
    legs: dict


@dataclass
class SkLimResult:
    object: object
    universal: Cone
    inclusion_holds: bool = True
    unique_holds: bool = True
    extra: dict = field(default_factory=dict)


class SetDiagram:
    """A functor index -> FinSet: a finite set per object, a function per arrow."""

    def __init__(self, index, sets, maps, check=True):
        self.index = index
        self.sets = {k: tuple(v) for k, v in sets.items()}
        self.maps = {k: dict(m) for k, m in maps.items()}
        if check:
            self._validate()

    def _validate(self):
        for i in self.index.objects:
            if i not in self.sets:
                raise ValidationError(f"no set at {i!r}")
        for a, (i, j) in self.index.arrows.items():
            m = self.maps.get(a)
            if m is None or set(m) != set(self.sets[i]) or not set(
                m.values()
            ) <= set(self.sets[j]):
                raise ValidationError(f"arrow {a!r} is not a map of the assigned sets")
        for i in self.index.objects:
            m = self.maps[self.index.id_(i)]
            if any(m[e] != e for e in self.sets[i]):
                raise ValidationError(f"identity at {i!r} not sent to identity")
        for g, f in self.index.composable_pairs():
            h = self.index.compose(g, f)
            src = self.index.dom(f)
            for e in self.sets[src]:
                if self.maps[h][e] != self.maps[g][self.maps[f][e]]:
                    raise ValidationError(f"diagram not functorial at ({g!r},{f!r})")


def set_limit(diagram):
    """Standard limit of finite sets: compatible families, as tuples in
    index-object order."""
    idx = diagram.index
    objs = list(idx.objects)
    families = []
    for combo in itertools.product(*(diagram.sets[i] for i in objs)):
        fam = dict(zip(objs, combo))
        if all(
            diagram.maps[a][fam[i]] == fam[j]
            for a, (i, j) in idx.arrows.items()
        ):
            families.append(combo)
    legs = {
        i: {combo: combo[k] for combo in families} for k, i in enumerate(objs)
    }
    return SkLimResult(tuple(families), Cone(tuple(families), legs))


def set_colimit(diagram):
    """Standard colimit of finite sets: disjoint union mod the arrow relation.
    Returns class representatives (i, element) plus the universal injections."""
    idx = diagram.index
    tagged = [(i, e) for i in idx.objects for e in diagram.sets[i]]
    rel = fincat.EquivRelation(tagged)
    for a, (i, j) in idx.arrows.items():
        for e in diagram.sets[i]:
            rel.union((i, e), (j, diagram.maps[a][e]))
    reps = sorted({rel.find(t) for t in tagged})
    legs = {
        i: {e: rel.find((i, e)) for e in diagram.sets[i]} for i in idx.objects
    }
    return SkLimResult(tuple(reps), Cone(tuple(reps), legs))


class CatDiagramOnIndex:
    """A functor index -> FinCat with explicit functor assignments."""

    def __init__(self, index, cats, functors, check=True):
        self.index = index
        self.cats = dict(cats)
        self.functors = dict(functors)
        if check:
            for a, (i, j) in index.arrows.items():
                f = self.functors[a]
                if f.source != self.cats[i] or f.target != self.cats[j]:
                    raise ValidationError(f"functor at {a!r} has wrong endpoints")


def cat_limit(diagram):
    """Strict limit of a finite diagram of categories: compatible families
    of objects and arrows, with componentwise composition."""
    idx = diagram.index
    objs = list(idx.objects)

    def compatible(assign, is_arrow):
        for a, (i, j) in idx.arrows.items():
            f = diagram.functors[a]
            img = f.amap[assign[i]] if is_arrow else f.omap[assign[i]]
            if img != assign[j]:
                return False
        return True

    lobjects = []
    for combo in itertools.product(*(diagram.cats[i].objects for i in objs)):
        if compatible(dict(zip(objs, combo)), False):
            lobjects.append(combo)
    larrows = {}
    for combo in itertools.product(*(diagram.cats[i].arrows for i in objs)):
        fam = dict(zip(objs, combo))
        if compatible(fam, True):
            d = tuple(diagram.cats[i].dom(fam[i]) for i in objs)
            c = tuple(diagram.cats[i].cod(fam[i]) for i in objs)
            larrows[combo] = (d, c)
    name_o = {o: f"({','.join(o)})" for o in lobjects}
    name_a = {a: f"({','.join(a)})" for a in larrows}
    arrows = {name_a[a]: (name_o[d], name_o[c]) for a, (d, c) in larrows.items()}
    identity = {}
    comp = {}
    for o in lobjects:
        ident = tuple(diagram.cats[i].id_(o[k]) for k, i in enumerate(objs))
        identity[name_o[o]] = name_a[ident]
    for g, (gd, gc) in larrows.items():
        for f, (fd, fc) in larrows.items():
            if fc == gd:
                h = tuple(
                    diagram.cats[i].compose(g[k], f[k]) for k, i in enumerate(objs)
                )
                comp[(name_a[g], name_a[f])] = name_a[h]
    cat = FinCat([name_o[o] for o in lobjects], arrows, comp, identity)
    legs = {
        i: Functor(
            cat,
            diagram.cats[i],
            {name_o[o]: o[k] for o in lobjects},
            {name_a[a]: a[k] for a in larrows},
            check=False,
        )
        for k, i in enumerate(objs)
    }
    return SkLimResult(cat, Cone(cat, legs))


def ordinary_limit(diagram):
    """Reduction case: with an identity weakening, the weak limit is the
    standard one."""
    if isinstance(diagram, SetDiagram):
        return set_limit(diagram)
    if isinstance(diagram, CatDiagramOnIndex):
        return cat_limit(diagram)
    raise UnsupportedBase("diagram must be valued in finite sets or categories")


# -- weak limit of a cospan ---------------------------------------------------


def skel_limit_cospan(phi, psi, check_closure=True):
    """The subcategory L of dom(phi) x dom(psi) whose arrows (a,b) admit
    invertible u, v in the codomain with u o phi(a) = psi(b) o v.

    Returns the result with projection legs; the uniqueness flag reports
    whether the embedding into the product is monic on objects of L (it is,
    by construction: L is a subcategory of the product)."""
    if phi.target != psi.target:
        raise ValidationError("cospan legs must share a codomain")
    A, B, C = phi.source, psi.source, phi.target
    prod, pi1, pi2 = fincat.product_projections(A, B)
    keep = {}
    for p, (fa, fb) in prod._pair_parts.items():
        ia, ib = phi.amap[fa], psi.amap[fb]
        witness = None
        for u in C.isos(C.cod(ia), C.cod(ib)):
            for v in C.isos(C.dom(ia), C.dom(ib)):
                if C.compose(u, ia) == C.compose(ib, v):
                    witness = (u, v)
                    break
            if witness:
                break
        if witness:
            keep[p] = witness
    objects = [o for o in prod.objects if prod.id_(o) in keep]
    arrows = {
        a: prod.arrows[a]
        for a in keep
        if prod.arrows[a][0] in objects and prod.arrows[a][1] in objects
    }
    comp = {}
    closed = True
    for g in arrows:
        for f in arrows:
            if prod.cod(f) == prod.dom(g):
                h = prod.compose(g, f)
                if h not in arrows:
                    closed = False
                else:
                    comp[(g, f)] = h
    if not closed and check_closure:
        raise ValidationError(
            "iso-commuting arrows are not closed under composition here"
        )
    identity = {o: prod.id_(o) for o in objects}
    L = FinCat(objects, arrows, comp, identity)
    legs = {
        "left": _restrict_functor(pi1, L),
        "right": _restrict_functor(pi2, L),
    }
    return SkLimResult(
        L,
        Cone(L, legs),
        extra={"witnesses": keep, "product": prod, "closed": closed},
    )


def _restrict_functor(f, sub):
    return Functor(
        sub,
        f.target,
        {o: f.omap[o] for o in sub.objects},
        {a: f.amap[a] for a in sub.arrows},
        check=False,
    )


def strict_pullback(phi, psi):
    """Strict pullback of categories, used as the reduction oracle."""
    if phi.target != psi.target:
        raise ValidationError("cospan legs must share a codomain")
    prod, pi1, pi2 = fincat.product_projections(phi.source, psi.source)
    objects = [
        o
        for o in prod.objects
        if phi.omap[prod._obj_parts[o][0]] == psi.omap[prod._obj_parts[o][1]]
    ]
    arrows = {
        a: e
        for a, e in prod.arrows.items()
        if phi.amap[prod._pair_parts[a][0]] == psi.amap[prod._pair_parts[a][1]]
        and e[0] in objects
        and e[1] in objects
    }
    comp = {
        (g, f): prod.compose(g, f)
        for g in arrows
        for f in arrows
        if prod.cod(f) == prod.dom(g)
    }
    identity = {o: prod.id_(o) for o in objects}
    L = FinCat(objects, arrows, comp, identity)
    return SkLimResult(
        L,
        Cone(L, {"left": _restrict_functor(pi1, L), "right": _restrict_functor(pi2, L)}),
    )


def cospan_cone_factors(result, cone_cat, to_left, to_right, iso_witness=None):
    """Check that a cone (functors into both legs whose outer square commutes
    up to isomorphism objectwise) factors through the weak limit, and whether
    the factorization is unique.  Returns (functor, unique)."""
    L = result.object
    prod = result.extra["product"]
    omap, amap = {}, {}
    for x in cone_cat.objects:
        target = f"({to_left.omap[x]},{to_right.omap[x]})"
        if target not in L.objects:
            return None, False
        omap[x] = target
    for a in cone_cat.arrows:
        target = f"({to_left.amap[a]},{to_right.amap[a]})"
        if target not in L.arrows:
            return None, False
        amap[a] = target
    q = Functor(cone_cat, L, omap, amap)
    unique = result.extra.get("closed", True)
    return q, unique


# -- weak colimit of a span ----------------------------------------------------


class _Rewriter:
    """Length-lexicographic word rewriting over a generator graph.

    Words are composable sequences of generators, written outermost-first
    (w = [g1, g2, ...] means g1 after g2 after ...).  Relations identify
    two-generator words with shorter or equal words; the congruence closure
    is computed over all words up to the configured length cap and critical
    pairs are closed by saturation.  If the quotient cannot be confirmed
    finite within the cap, CapExceeded is raised with no partial answer.
    """

    def __init__(self, objects, generators, relations, cap_len, cap_words):
        # generators: {name: (dom, cod)}; relations: [(word, word)]
        self.objects = objects
        self.generators = generators
        self.cap_len = cap_len
        self.cap_words = cap_words
        self.words = set()
        empty_words = [((), x) for x in objects]  # empty path, at an object
        frontier = list(empty_words)
        self.words.update(empty_words)
        while frontier:
            nxt = []
            for word, at in frontier:
                if len(word) >= cap_len:
                    continue
                for g, (d, c) in generators.items():
                    if c == at:
                        w2 = ((word + (g,)), d)
                        if w2 not in self.words:
                            self.words.add(w2)
                            nxt.append(w2)
            frontier = nxt
            if len(self.words) > cap_words:
                raise CapExceeded(
                    f"word enumeration exceeded {cap_words} words"
                )
        self.rel = fincat.EquivRelation(sorted(self.words))
        for lhs, rhs in relations:
            self._saturate_relation(lhs, rhs)
        self._congruence_close()

    def _word_at(self, word):
        if not word:
            return None
        return self.generators[word[-1]][0]

    def _saturate_relation(self, lhs, rhs):
        # instantiate u . lhs . v ~ u . rhs . v over all enumerated contexts
        for word, at in sorted(self.words):
            w = word
            for i in range(len(w) + 1):
                for j in range(i, len(w) + 1):
                    if w[i:j] == lhs:
                        other = w[:i] + rhs + w[j:]
                        key = (other, at)
                        if key in self.words:
                            self.rel.union((w, at), key)

    def _congruence_close(self):
        changed = True
        while changed:
            changed = False
            buckets = {}
            for w in sorted(self.words):
                buckets.setdefault(self.rel.find(w), []).append(w)
            for bucket in buckets.values():
                if len(bucket) < 2:
                    continue
                rep = bucket[0]
                for other in bucket[1:]:
                    for ext in self._one_step_extensions(rep, other):
                        a, b = ext
                        if not self.rel.related(a, b):
                            self.rel.union(a, b)
                            changed = True

    def _one_step_extensions(self, w1, w2):
        (word1, at1), (word2, at2) = w1, w2
        out = []
        for g, (d, c) in self.generators.items():
            # right extension: w . g  (defined when g's codomain is the
            # word's start object)
            if c == at1 and c == at2:
                a = (word1 + (g,), d)
                b = (word2 + (g,), d)
                if a in self.words and b in self.words:
                    out.append((a, b))
            # left extension: g . w  (cod of word must be dom of g)
            cod1 = self._word_cod(word1, at1)
            cod2 = self._word_cod(word2, at2)
            if cod1 == d and cod2 == d:
                a = ((g,) + word1, at1)
                b = ((g,) + word2, at2)
                if a in self.words and b in self.words:
                    out.append((a, b))
        return out

    def _word_cod(self, word, at):
        if not word:
            return at
        return self.generators[word[0]][1]

    def normal_form(self, word, at):
        cls = [
            w for w in sorted(self.words) if self.rel.related(w, (word, at))
        ]
        return min(cls, key=lambda w: (len(w[0]), w))

    def confirmed_finite(self):
        # every maximal-length word must be equivalent to a shorter one
        for word, at in self.words:
            if len(word) == self.cap_len:
                nf = self.normal_form(word, at)
                if len(nf[0]) >= self.cap_len:
                    return False
        return True


def skel_colimit_span(phi, psi, cap_len=6, cap_words=20000):
    """Weak colimit of a span: both codomains glued along formal
    isomorphisms e_a : psi(a) -> phi(a) with the naturality relation
    phi(f) . e_dom(f) = e_cod(f) . psi(f)."""
    if phi.source != psi.source:
        raise ValidationError("span legs must share a domain")
    A, B1, B2 = phi.source, phi.target, psi.target
    obj = lambda side, x: f"{side}:{x}"
    objects = [obj("L", x) for x in B1.objects] + [obj("R", x) for x in B2.objects]
    generators = {}
    for a, (d, c) in B1.arrows.items():
        if not B1.is_identity(a):
            generators[f"L:{a}"] = (obj("L", d), obj("L", c))
    for a, (d, c) in B2.arrows.items():
        if not B2.is_identity(a):
            generators[f"R:{a}"] = (obj("R", d), obj("R", c))
    for x in A.objects:
        generators[f"e:{x}"] = (obj("R", psi.omap[x]), obj("L", phi.omap[x]))
        generators[f"e_inv:{x}"] = (obj("L", phi.omap[x]), obj("R", psi.omap[x]))

    relations = []
    for side, cat in (("L", B1), ("R", B2)):
        for g, f in cat.composable_pairs():
            if cat.is_identity(g) or cat.is_identity(f):
                continue
            h = cat.compose(g, f)
            rhs = () if cat.is_identity(h) else (f"{side}:{h}",)
            relations.append(((f"{side}:{g}", f"{side}:{f}"), rhs))
    for x in A.objects:
        relations.append((((f"e:{x}", f"e_inv:{x}")), ()))
        relations.append((((f"e_inv:{x}", f"e:{x}")), ()))
    for f, (d, c) in A.arrows.items():
        if A.is_identity(f):
            continue
        lf, rf = phi.amap[f], psi.amap[f]
        lhs = ((f"L:{lf}",) if not B1.is_identity(lf) else ()) + (f"e:{d}",)
        rhs = (f"e:{c}",) + ((f"R:{rf}",) if not B2.is_identity(rf) else ())
        relations.append((lhs, rhs))

    rw = _Rewriter(objects, generators, relations, cap_len, cap_words)
    if not rw.confirmed_finite():
        raise CapExceeded(
            f"quotient not confirmed finite within word length {cap_len}"
        )

    # assemble the quotient category from normal forms
    classes = {}
    for word, at in sorted(rw.words):
        nf = rw.normal_form(word, at)
        classes[nf] = nf
    def word_name(nf):
        word, at = nf
        return f"[{'.'.join(word)}]@{at}" if word else f"[]@{at}"

    arrows = {}
    identity = {}
    for nf in sorted(classes):
        word, at = nf
        arrows[word_name(nf)] = (at, rw._word_cod(word, at))
        if not word:
            identity[at] = word_name(nf)
    comp = {}
    for g_nf in sorted(classes):
        for f_nf in sorted(classes):
            gw, gat = g_nf
            fw, fat = f_nf
            if rw._word_cod(fw, fat) != gat:
                continue
            concat = (gw + fw, fat)
            if concat not in rw.words:
                raise CapExceeded("composite escapes the word cap")
            comp[(word_name(g_nf), word_name(f_nf))] = word_name(
                rw.normal_form(*concat)
            )
    Q = FinCat(sorted(arrows and identity and identity.keys()), arrows, comp, identity)
    legs = {
        "left": Functor(
            B1,
            Q,
            {x: obj("L", x) for x in B1.objects},
            {
                a: word_name(rw.normal_form(
                    () if B1.is_identity(a) else (f"L:{a}",), obj("L", B1.dom(a))
                ))
                for a in B1.arrows
            },
        ),
        "right": Functor(
            B2,
            Q,
            {x: obj("R", x) for x in B2.objects},
            {
                a: word_name(rw.normal_form(
                    () if B2.is_identity(a) else (f"R:{a}",), obj("R", B2.dom(a))
                ))
                for a in B2.arrows
            },
        ),
    }
    res = SkLimResult(Q, Cone(Q, legs))
    res.extra["rewriter"] = rw
    res.extra["word_name"] = word_name
    res.extra["formal_isos"] = {
        x: word_name(rw.normal_form((f"e:{x}",), obj("R", psi.omap[x])))
        for x in A.objects
    }
    res.extra["span"] = (phi, psi)
    return res


def span_cocone_factors(result, l_left, l_right, iso):
    """Given functors out of both span codomains and a specified objectwise
    isomorphism iso: l_left o phi -> l_right o psi, build the unique functor
    q out of the colimit with q(e_x) = iso(x).  Raises if no consistent
    assignment exists."""
    phi, psi = result.extra["span"]
    Q = result.object
    D = l_left.target
    if l_right.target != D:
        raise ValidationError("cocone legs must share a codomain")
    word_name = result.extra["word_name"]
    rw = result.extra["rewriter"]

    omap = {}
    for x in phi.target.objects:
        omap[f"L:{x}"] = l_left.omap[x]
    for x in psi.target.objects:
        omap[f"R:{x}"] = l_right.omap[x]

    def gen_image(g):
        side, _, name = g.partition(":")
        if side == "L":
            return l_left.amap[name]
        if side == "R":
            return l_right.amap[name]
        if side == "e":
            return iso[name]
        inv = D.inverse(iso[name])
        if inv is None:
            raise ValidationError(f"iso witness at {name!r} is not invertible")
        return inv

    amap = {}
    for arrow_name, (d, c) in Q.arrows.items():
        word = arrow_name[1 : arrow_name.index("]")]
        parts = tuple(w for w in word.split(".") if w)
        img = D.id_(omap[d])
        for g in reversed(parts):  # innermost first
            img = D.compose(gen_image(g), img)
        amap[arrow_name] = img
    q = Functor(Q, D, omap, amap)  # validation checks the relations held
    return q


# -- functoriality -------------------------------------------------------------


def set_limit_map(diagram_f, diagram_g, transformation):
    """A natural transformation of set diagrams induces a map of limits."""
    rf, rg = set_limit(diagram_f), set_limit(diagram_g)
    objs = list(diagram_f.index.objects)
    out = {}
    for fam in rf.object:
        image = tuple(
            transformation[i][fam[k]] for k, i in enumerate(objs)
        )
        if image not in rg.object:
            raise ValidationError("induced family is not in the target limit")
        out[fam] = image
    return out


def cospan_map(res_f, res_g, t_left, t_right):
    """A morphism of cospans (componentwise functors commuting with the legs)
    induces a functor between the weak limits."""
    Lf, Lg = res_f.object, res_g.object
    omap, amap = {}, {}
    for o in Lf.objects:
        a, b = res_f.extra["product"]._obj_parts[o]
        target = f"({t_left.omap[a]},{t_right.omap[b]})"
        if target not in Lg.objects:
            raise ValidationError(f"image object {target!r} missing from target limit")
        omap[o] = target
    for arr in Lf.arrows:
        fa, fb = res_f.extra["product"]._pair_parts[arr]
        target = f"({t_left.amap[fa]},{t_right.amap[fb]})"
        if target not in Lg.arrows:
            raise ValidationError(f"image arrow {target!r} missing from target limit")
        amap[arr] = target
    return Functor(Lf, Lg, omap, amap)
