"""The inductive tower of higher categories, levels 1..3.

Level 1 wraps a FinCat.  Level n >= 2 is a carrier set with hom objects that
are level-(n-1) structures and composition morphisms

    comp(a,b,c): hom(a,b) x hom(b,c) -> hom(a,c)

with no strict associativity: validation checks the composition square after
the appropriate weakening (natural isomorphism of functors at level 2,
equivalence of 2-functors at level 3).  The hard level cap is 3; the
weakening needed above that is not tractable here.

Carrier elements and hom/arrow tokens are strings; products reuse the
"(x,y)" token convention of fincat.product so that structural equalities
(inc/for round trips, product homs) hold on the nose.
"""

import itertools

from .caps import Budget
from .errors import (
    LevelCapExceeded,
    NotAssociativeUpToSk,
    ValidationError,
)
from .fincat import Decision, FinCat, Functor
from . import enrich, fincat

LEVEL_CAP = 3


class NCat:
    def __init__(self, level, cat=None, carrier=None, hom=None, comp=None):
        self.level = level
        if level == 1:
            if cat is None:
                raise ValidationError("level 1 needs a category")
            self.cat = cat
            self.carrier = tuple(cat.objects)
            self.hom = None
            self.comp = None
        else:
            self.cat = None
            self.carrier = tuple(carrier)
            self.hom = dict(hom)
            self.comp = dict(comp)

    def hom_at(self, a, b):
        return self.hom[(a, b)]

    def __eq__(self, other):
        if not isinstance(other, NCat) or self.level != other.level:
            return False
        if self.level == 1:
            return self.cat == other.cat
        return (
            self.carrier == other.carrier
            and self.hom == other.hom
            and self.comp == other.comp
        )

    def __repr__(self):
        return f"NCat(level={self.level}, carrier={len(self.carrier)})"


class NFunctor:
    """A morphism of level-n structures: a functor at level 1, otherwise a
    carrier map f0 with hom components f2 one level down."""

    def __init__(self, level, source, target, functor=None, f0=None, f2=None):
        self.level = level
        self.source = source
        self.target = target
        if level == 1:
            self.functor = functor
            self.f0 = dict(functor.omap)
            self.f2 = None
        else:
            self.functor = None
            self.f0 = dict(f0)
            self.f2 = dict(f2)

    def __eq__(self, other):
        if not isinstance(other, NFunctor) or self.level != other.level:
            return False
        if self.level == 1:
            return self.functor == other.functor
        return (
            self.source == other.source
            and self.target == other.target
            and self.f0 == other.f0
            and self.f2 == other.f2
        )

    def __repr__(self):
        return f"NFunctor(level={self.level})"


# -- basic builders ------------------------------------------------------------


def from_fincat(cat):
    return NCat(1, cat=cat)


def empty_ncat(level):
    if level == 1:
        return NCat(1, cat=FinCat([], {}, {}, {}))
    return NCat(level, carrier=(), hom={}, comp={})


def unit_ncat(level):
    """I(n): singleton carrier with the unit one level down as the hom."""
    if level == 1:
        return NCat(1, cat=fincat.terminal_category())
    inner = unit_ncat(level - 1)
    comp = {("*", "*", "*"): _left_projection(n_product(inner, inner), inner)}
    return NCat(level, carrier=("*",), hom={("*", "*"): inner}, comp=comp)


def n_identity(x):
    if x.level == 1:
        return NFunctor(1, x, x, functor=fincat.identity_functor(x.cat))
    return NFunctor(
        x.level,
        x,
        x,
        f0={a: a for a in x.carrier},
        f2={(a, b): n_identity(x.hom[(a, b)]) for a in x.carrier for b in x.carrier},
    )


def n_compose(g, f):
    """g after f."""
    if f.level != g.level:
        raise ValidationError("levels differ")
    if f.level == 1:
        return NFunctor(
            1, f.source, g.target, functor=fincat.compose_functors(g.functor, f.functor)
        )
    f0 = {a: g.f0[f.f0[a]] for a in f.source.carrier}
    f2 = {
        (a, b): n_compose(g.f2[(f.f0[a], f.f0[b])], f.f2[(a, b)])
        for a in f.source.carrier
        for b in f.source.carrier
    }
    return NFunctor(f.level, f.source, g.target, f0=f0, f2=f2)


# -- products and coproducts -----------------------------------------------------


def n_product(x, y):
    if x.level != y.level:
        raise ValidationError("product needs equal levels")
    if x.level == 1:
        return NCat(1, cat=fincat.product(x.cat, y.cat))
    carrier = [f"({a},{b})" for a in x.carrier for b in y.carrier]
    parts = {f"({a},{b})": (a, b) for a in x.carrier for b in y.carrier}
    hom = {}
    for p in carrier:
        for q in carrier:
            (a, b), (a2, b2) = parts[p], parts[q]
            hom[(p, q)] = n_product(x.hom[(a, a2)], y.hom[(b, b2)])
    comp = {}
    for p in carrier:
        for q in carrier:
            for r in carrier:
                (a, b), (a2, b2), (a3, b3) = parts[p], parts[q], parts[r]
                shuffle = _middle_four(
                    x.hom[(a, a2)], y.hom[(b, b2)], x.hom[(a2, a3)], y.hom[(b2, b3)]
                )
                pairwise = n_tensor(
                    x.comp[(a, a2, a3)], y.comp[(b, b2, b3)]
                )
                comp[(p, q, r)] = n_compose(pairwise, shuffle)
    return NCat(x.level, carrier=carrier, hom=hom, comp=comp)


def n_coproduct(x, y):
    if x.level != y.level:
        raise ValidationError("coproduct needs equal levels")
    if x.level == 1:
        return NCat(1, cat=_coproduct_cat([x.cat, y.cat]))
    carrier = [f"L:{a}" for a in x.carrier] + [f"R:{b}" for b in y.carrier]

    def side(tok):
        return (x, tok[2:]) if tok.startswith("L:") else (y, tok[2:])

    hom, comp = {}, {}
    empty = empty_ncat(x.level - 1)
    for p in carrier:
        for q in carrier:
            (sp, a), (sq, b) = side(p), side(q)
            hom[(p, q)] = sp.hom[(a, b)] if sp is sq else empty
    for p in carrier:
        for q in carrier:
            for r in carrier:
                (sp, a), (sq, b), (sr, c) = side(p), side(q), side(r)
                if sp is sq is sr:
                    comp[(p, q, r)] = sp.comp[(a, b, c)]
                else:
                    comp[(p, q, r)] = _empty_nfunctor(
                        n_product(hom[(p, q)], hom[(q, r)]), hom[(p, r)]
                    )
    return NCat(x.level, carrier=carrier, hom=hom, comp=comp)


def _coproduct_cat(cats):
    if len(cats) == 1:
        return cats[0]
    objects, arrows, comp, identity = [], {}, {}, {}
    for i, c in enumerate(cats):
        tag = lambda s: f"{i}:{s}"
        objects += [tag(o) for o in c.objects]
        for a, (d, cc) in c.arrows.items():
            arrows[tag(a)] = (tag(d), tag(cc))
        for (g, f), h in c.comp.items():
            comp[(tag(g), tag(f))] = tag(h)
        for o, a in c.identity.items():
            identity[tag(o)] = tag(a)
    return FinCat(objects, arrows, comp, identity)


def _empty_nfunctor(src, tgt):
    if src.level == 1:
        return NFunctor(
            1, src, tgt, functor=Functor(src.cat, tgt.cat, {}, {}, check=False)
        )
    return NFunctor(src.level, src, tgt, f0={}, f2={})


def n_tensor(f, g):
    """f x g between product structures."""
    if f.level == 1:
        src = n_product(NCat(1, cat=f.functor.source), NCat(1, cat=g.functor.source))
        tgt = n_product(NCat(1, cat=f.functor.target), NCat(1, cat=g.functor.target))
        sc, tc = src.cat, tgt.cat
        omap = {
            o: f"({f.functor.omap[sc._obj_parts[o][0]]},{g.functor.omap[sc._obj_parts[o][1]]})"
            for o in sc.objects
        }
        amap = {
            a: f"({f.functor.amap[sc._pair_parts[a][0]]},{g.functor.amap[sc._pair_parts[a][1]]})"
            for a in sc.arrows
        }
        return NFunctor(1, src, tgt, functor=Functor(sc, tc, omap, amap, check=False))
    src = n_product(f.source, g.source)
    tgt = n_product(f.target, g.target)
    parts = {t: _split_pair(t) for t in src.carrier}
    f0 = {t: f"({f.f0[parts[t][0]]},{g.f0[parts[t][1]]})" for t in src.carrier}
    f2 = {}
    for p in src.carrier:
        for q in src.carrier:
            (a, b), (a2, b2) = parts[p], parts[q]
            f2[(p, q)] = n_tensor(f.f2[(a, a2)], g.f2[(b, b2)])
    return NFunctor(f.level, src, tgt, f0=f0, f2=f2)


def _split_pair(token):
    inner = token[1:-1]
    depth = 0
    for i, ch in enumerate(inner):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return inner[:i], inner[i + 1 :]
    raise ValidationError(f"not a pair token: {token!r}")


def _token_map(src, tgt, rename_obj):
    """Level-1 NFunctor defined by a token relabeling."""
    omap = {o: rename_obj(o) for o in src.cat.objects}
    amap = {a: rename_obj(a) for a in src.cat.arrows}
    return NFunctor(1, src, tgt, functor=Functor(src.cat, tgt.cat, omap, amap, check=False))


def _middle_four(a1, b1, a2, b2):
    """(A1 x B1) x (A2 x B2) -> (A1 x A2) x (B1 x B2) by token shuffle."""
    src = n_product(n_product(a1, b1), n_product(a2, b2))
    tgt = n_product(n_product(a1, a2), n_product(b1, b2))

    def shuffle(token):
        left, right = _split_pair(token)
        x1, y1 = _split_pair(left)
        x2, y2 = _split_pair(right)
        return f"(({x1},{x2}),({y1},{y2}))"

    if src.level == 1:
        return _token_map(src, tgt, shuffle)
    parts = {t: _split_pair(t) for t in src.carrier}
    f0 = {t: shuffle(t) for t in src.carrier}
    f2 = {}
    for p in src.carrier:
        for q in src.carrier:
            (l1, r1), (l2, r2) = parts[p], parts[q]
            (a, b), (c, d) = _split_pair(l1), _split_pair(r1)
            (a2_, b2_), (c2_, d2_) = _split_pair(l2), _split_pair(r2)
            f2[(p, q)] = _middle_four(
                a1.hom[(a, a2_)], b1.hom[(b, b2_)], a2.hom[(c, c2_)], b2.hom[(d, d2_)]
            )
    return NFunctor(src.level, src, tgt, f0=f0, f2=f2)


def _left_projection(prod, left):
    """n_product(left, right) -> left."""
    if prod.level == 1:
        omap = {o: prod.cat._obj_parts[o][0] for o in prod.cat.objects}
        amap = {a: prod.cat._pair_parts[a][0] for a in prod.cat.arrows}
        return NFunctor(
            1, prod, left, functor=Functor(prod.cat, left.cat, omap, amap, check=False)
        )
    parts = {t: _split_pair(t) for t in prod.carrier}
    f0 = {t: parts[t][0] for t in prod.carrier}
    f2 = {}
    for p in prod.carrier:
        for q in prod.carrier:
            f2[(p, q)] = _left_projection(
                prod.hom[(p, q)], left.hom[(parts[p][0], parts[q][0])]
            )
    return NFunctor(prod.level, prod, left, f0=f0, f2=f2)


def n_associator(a, b, c):
    """(a x b) x c -> a x (b x c) by token rebracketing."""
    src = n_product(n_product(a, b), c)
    tgt = n_product(a, n_product(b, c))

    def rebracket(token):
        left, z = _split_pair(token)
        x, y = _split_pair(left)
        return f"({x},({y},{z}))"

    if src.level == 1:
        return _token_map(src, tgt, rebracket)
    parts = {t: _split_pair(t) for t in src.carrier}
    f0 = {t: rebracket(t) for t in src.carrier}
    f2 = {}
    for p in src.carrier:
        for q in src.carrier:
            (l1, z1), (l2, z2) = parts[p], parts[q]
            (x1, y1), (x2, y2) = _split_pair(l1), _split_pair(l2)
            f2[(p, q)] = n_associator(
                a.hom[(x1, x2)], b.hom[(y1, y2)], c.hom[(z1, z2)]
            )
    return NFunctor(src.level, src, tgt, f0=f0, f2=f2)


def unit_right_morphism(x):
    """x times I(n) -> x, the right unit arrow; invertible by construction."""
    prod = n_product(x, unit_ncat(x.level))
    if x.level == 1:
        omap = {o: prod.cat._obj_parts[o][0] for o in prod.cat.objects}
        amap = {f: prod.cat._pair_parts[f][0] for f in prod.cat.arrows}
        return NFunctor(
            1, prod, x, functor=Functor(prod.cat, x.cat, omap, amap, check=False)
        )
    parts = {t: _split_pair(t) for t in prod.carrier}
    f0 = {t: parts[t][0] for t in prod.carrier}
    f2 = {}
    for p in prod.carrier:
        for q in prod.carrier:
            f2[(p, q)] = unit_right_morphism_on(
                prod.hom[(p, q)], x.hom[(parts[p][0], parts[q][0])]
            )
    return NFunctor(prod.level, prod, x, f0=f0, f2=f2)


def unit_right_morphism_on(prod_hom, target_hom):
    # prod_hom = n_product(target_hom, unit_hom); projection to the left
    return _left_projection(prod_hom, target_hom)


# -- validation ------------------------------------------------------------------


def _validate_structure(x):
    if x.level == 1:
        return
    for a in x.carrier:
        for b in x.carrier:
            h = x.hom.get((a, b))
            if not isinstance(h, NCat) or h.level != x.level - 1:
                raise ValidationError(f"hom at ({a!r},{b!r}) has the wrong level")
    for a in x.carrier:
        for b in x.carrier:
            for c in x.carrier:
                m = x.comp.get((a, b, c))
                if m is None:
                    raise ValidationError(f"no composition at ({a!r},{b!r},{c!r})")
                want_src = n_product(x.hom[(a, b)], x.hom[(b, c)])
                if m.source != want_src or m.target != x.hom[(a, c)]:
                    raise ValidationError(
                        f"composition at ({a!r},{b!r},{c!r}) has wrong endpoints"
                    )
                _validate_morphism(m)


def _validate_morphism(m):
    if m.level == 1:
        m.functor._validate()
        return
    for a in m.source.carrier:
        if m.f0.get(a) not in m.target.carrier:
            raise ValidationError(f"carrier image of {a!r} missing")
    for a in m.source.carrier:
        for b in m.source.carrier:
            comp = m.f2.get((a, b))
            if comp is None:
                raise ValidationError(f"no hom component at ({a!r},{b!r})")
            if comp.source != m.source.hom[(a, b)] or comp.target != m.target.hom[
                (m.f0[a], m.f0[b])
            ]:
                raise ValidationError(f"hom component at ({a!r},{b!r}) mismatched")
            _validate_morphism(comp)


def as_enriched(x):
    """View a level-2 structure as an enriched set over the cat base, for the
    composition-square check."""
    w = enrich.CatTensorCat()
    hom_ids = {}
    for a in x.carrier:
        for b in x.carrier:
            hom_ids[(a, b)] = w.obj(f"h[{a}|{b}]", x.hom[(a, b)].cat)
    comp_ids = {}
    for a in x.carrier:
        for b in x.carrier:
            for c in x.carrier:
                dom = w.tensor(hom_ids[(a, b)], hom_ids[(b, c)])
                comp_ids[(a, b, c)] = w.arr(
                    dom, hom_ids[(a, c)], x.comp[(a, b, c)].functor
                )
    return w, enrich.EnrichedSet(w, x.carrier, hom_ids, comp_ids)


def check_associative_up_to_sk(x):
    """Pentagon check with the weakening proper to the level."""
    if x.level == 1:
        return Decision(True)
    if x.level == 2:
        w, es = as_enriched(x)
        return enrich.check_sk_associative(es, enrich.SK_SKEL)
    # level 3: compare the two composite 2-functors up to 2-equivalence
    for a in x.carrier:
        for b in x.carrier:
            for c in x.carrier:
                for d in x.carrier:
                    h_ab, h_bc, h_cd = (
                        x.hom[(a, b)],
                        x.hom[(b, c)],
                        x.hom[(c, d)],
                    )
                    alpha = n_associator(h_ab, h_bc, h_cd)
                    lhs = n_compose(
                        x.comp[(a, b, d)],
                        n_compose(
                            n_tensor(n_identity(h_ab), x.comp[(b, c, d)]), alpha
                        ),
                    )
                    rhs = n_compose(
                        x.comp[(a, c, d)],
                        n_tensor(x.comp[(a, b, c)], n_identity(h_cd)),
                    )
                    if lhs == rhs:
                        continue
                    if not two_equivalent_functors(lhs, rhs):
                        return Decision(False, witness=(a, b, c, d))
    return Decision(True)


def make_ncat(level, data=None, cat=None, carrier=None, hom=None, comp=None):
    """Validated constructor; raises NotAssociativeUpToSk with a witness."""
    if level > LEVEL_CAP:
        raise LevelCapExceeded(f"level {level} exceeds the cap {LEVEL_CAP}")
    if level == 1:
        return NCat(1, cat=cat if cat is not None else data)
    x = NCat(level, carrier=carrier, hom=hom, comp=comp)
    _validate_structure(x)
    dec = check_associative_up_to_sk(x)
    if not dec:
        raise NotAssociativeUpToSk(f"witness address: {dec.witness}")
    return x


# -- addresses ---------------------------------------------------------------------


def addresses(x):
    """All descent sequences of pairs, lengths 0..level-1."""
    out = [()]
    if x.level == 1:
        return out
    for a in x.carrier:
        for b in x.carrier:
            for tail in addresses(x.hom[(a, b)]):
                out.append(((a, b),) + tail)
    # keep only strictly descending lengths below the level
    return [adr for adr in out if len(adr) <= x.level - 1]


def full_addresses(x):
    """Addresses together with the structures they pass through."""
    out = [((), x)]
    if x.level == 1:
        return out
    for a in x.carrier:
        for b in x.carrier:
            h = x.hom[(a, b)]
            for tail, leaf in full_addresses(h):
                out.append((((a, b),) + tail, leaf))
    return [(adr, leaf) for adr, leaf in out if len(adr) <= x.level - 1]


def address_lookup(x, address):
    """The structure reached by descending along an address."""
    cur = x
    for a, b in address:
        cur = cur.hom[(a, b)]
    return cur


# -- inc / for ----------------------------------------------------------------------


def inc(x, to_level):
    if to_level > LEVEL_CAP:
        raise LevelCapExceeded(f"level {to_level} exceeds the cap {LEVEL_CAP}")
    cur = x
    while cur.level < to_level:
        cur = _inc_once(cur)
    if cur.level != to_level:
        raise ValidationError("inc cannot lower the level")
    return cur


def _discrete_on(names):
    return NCat(1, cat=fincat.discrete_category(list(names)))


def _inc_once(x):
    if x.level == 1:
        c = x.cat
        carrier = tuple(c.objects)
        hom = {
            (a, b): _discrete_on(c.hom(a, b)) for a in carrier for b in carrier
        }
        comp = {}
        for a in carrier:
            for b in carrier:
                for d in carrier:
                    src = n_product(hom[(a, b)], hom[(b, d)])
                    omap = {}
                    amap = {}
                    for t in src.cat.objects:
                        f, g = src.cat._obj_parts[t]
                        omap[t] = c.compose(g, f)
                    for t in src.cat.arrows:
                        # every 2-cell of an inc'd structure is an identity
                        amap[t] = f"id_{omap[src.cat.arrows[t][0]]}"
                    tgt = hom[(a, d)]
                    comp[(a, b, d)] = NFunctor(
                        1,
                        src,
                        tgt,
                        functor=Functor(src.cat, tgt.cat, omap, amap, check=False),
                    )
        return NCat(2, carrier=carrier, hom=hom, comp=comp)
    # level >= 2: push inc into the homs and comps
    hom = {k: _inc_once(h) for k, h in x.hom.items()}
    comp = {k: _inc_morphism(m) for k, m in x.comp.items()}
    return NCat(x.level + 1, carrier=x.carrier, hom=hom, comp=comp)


def _inc_morphism(m):
    if m.level == 1:
        src = _inc_once(m.source)
        tgt = _inc_once(m.target)
        f0 = dict(m.functor.omap)
        f2 = {}
        for a in m.source.cat.objects:
            for b in m.source.cat.objects:
                sub_src = src.hom[(a, b)]
                sub_tgt = tgt.hom[(f0[a], f0[b])]
                omap = {f: m.functor.amap[f] for f in m.source.cat.hom(a, b)}
                amap = {
                    f"id_{f}": f"id_{m.functor.amap[f]}"
                    for f in m.source.cat.hom(a, b)
                }
                f2[(a, b)] = NFunctor(
                    1,
                    sub_src,
                    sub_tgt,
                    functor=Functor(sub_src.cat, sub_tgt.cat, omap, amap, check=False),
                )
        return NFunctor(2, src, tgt, f0=f0, f2=f2)
    return NFunctor(
        m.level + 1,
        _inc_once(m.source),
        _inc_once(m.target),
        f0=dict(m.f0),
        f2={k: _inc_morphism(c) for k, c in m.f2.items()},
    )


def for_(x, to_level):
    cur = x
    while cur.level > to_level:
        cur = _for_once(cur)
    if cur.level != to_level:
        raise ValidationError("for_ cannot raise the level")
    return cur


def _for_once(x):
    if x.level == 2:
        arrows = {}
        identity = {}
        comp = {}
        for a in x.carrier:
            for b in x.carrier:
                for name in x.hom[(a, b)].carrier:
                    if name in arrows:
                        raise ValidationError(
                            f"hom object names collide at {name!r}; cannot flatten"
                        )
                    arrows[name] = (a, b)
        for a in x.carrier:
            for b in x.carrier:
                for c in x.carrier:
                    m = x.comp[(a, b, c)]
                    for f in x.hom[(a, b)].carrier:
                        for g in x.hom[(b, c)].carrier:
                            comp[(g, f)] = m.f0[f"({f},{g})"]
        # identities: the unique neutral element per object, found by search
        for a in x.carrier:
            neutral = None
            for e in x.hom[(a, a)].carrier:
                if all(
                    comp.get((f, e)) == f
                    for b in x.carrier
                    for f in x.hom[(a, b)].carrier
                ) and all(
                    comp.get((e, f)) == f
                    for b in x.carrier
                    for f in x.hom[(b, a)].carrier
                ):
                    neutral = e
                    break
            if neutral is None:
                raise ValidationError(f"no identity element at {a!r} after flattening")
            identity[a] = neutral
        return NCat(1, cat=FinCat(list(x.carrier), arrows, comp, identity))
    hom = {k: _for_once(h) for k, h in x.hom.items()}
    comp = {k: _for_morphism(m) for k, m in x.comp.items()}
    return NCat(x.level - 1, carrier=x.carrier, hom=hom, comp=comp)


def _for_morphism(m):
    if m.level == 2:
        src = _for_once(m.source)
        tgt = _for_once(m.target)
        omap = dict(m.f0)
        amap = {}
        for (a, b), comp in m.f2.items():
            for f in m.source.hom[(a, b)].carrier:
                amap[f] = comp.f0[f]
        return NFunctor(
            1, src, tgt, functor=Functor(src.cat, tgt.cat, omap, amap, check=False)
        )
    return NFunctor(
        m.level - 1,
        _for_once(m.source),
        _for_once(m.target),
        f0=dict(m.f0),
        f2={k: _for_morphism(c) for k, c in m.f2.items()},
    )


# -- the pseudo-simplicial operators -------------------------------------------------


def _tag(a, b, name):
    return f"{a}|{b}:{name}"


def _untag(token):
    pair, _, name = token.partition(":")
    a, _, b = pair.partition("|")
    return a, b, name


def _tagged_collapse_level2(x):
    """Coproduct of the hom categories of a level-2 structure, with tokens
    that remember which hom each piece came from.  A single nonempty summand
    is returned untagged so the classify/collapse round trip is the identity."""
    keys = [(a, b) for a in x.carrier for b in x.carrier]
    nonempty = [k for k in keys if x.hom[k].cat.objects]
    if len(keys) == 1:
        return x.hom[keys[0]]
    if len(nonempty) == 1 and all(
        not x.hom[k].cat.arrows for k in keys if k != nonempty[0]
    ):
        return x.hom[nonempty[0]]
    objects, arrows, comp, identity = [], {}, {}, {}
    for a, b in keys:
        c = x.hom[(a, b)].cat
        objects += [_tag(a, b, o) for o in c.objects]
        for f, (d, cc) in c.arrows.items():
            arrows[_tag(a, b, f)] = (_tag(a, b, d), _tag(a, b, cc))
        for (g, f), h in c.comp.items():
            comp[(_tag(a, b, g), _tag(a, b, f))] = _tag(a, b, h)
        for o, i in c.identity.items():
            identity[_tag(a, b, o)] = _tag(a, b, i)
    return NCat(1, cat=FinCat(objects, arrows, comp, identity))


def _tagged_collapse_level3(x):
    """Same shape one level up: a level-2 structure on the union of the
    hom 2-categories' carriers, with empty cross homs."""
    keys = [(a, b) for a in x.carrier for b in x.carrier]
    if len(keys) == 1:
        return x.hom[keys[0]]
    carrier, hom, comp = [], {}, {}
    empty = empty_ncat(1)
    for a, b in keys:
        h = x.hom[(a, b)]
        carrier += [_tag(a, b, e) for e in h.carrier]
    for p in carrier:
        for q in carrier:
            (a1, b1, e1), (a2, b2, e2) = _untag(p), _untag(q)
            if (a1, b1) == (a2, b2):
                hom[(p, q)] = x.hom[(a1, b1)].hom[(e1, e2)]
            else:
                hom[(p, q)] = empty
    for p in carrier:
        for q in carrier:
            for r in carrier:
                (a1, b1, e1), (a2, b2, e2), (a3, b3, e3) = (
                    _untag(p),
                    _untag(q),
                    _untag(r),
                )
                if (a1, b1) == (a2, b2) == (a3, b3):
                    comp[(p, q, r)] = x.hom[(a1, b1)].comp[(e1, e2, e3)]
                else:
                    comp[(p, q, r)] = _empty_nfunctor(
                        n_product(hom[(p, q)], hom[(q, r)]), hom[(p, r)]
                    )
    return NCat(2, carrier=carrier, hom=hom, comp=comp)


def rho_collapse(x, k):
    """Coproduct of the depth-k hom structures; the result drops one level.

    k = 0 collapses the whole structure to the coproduct of its top homs;
    on a level-1 input this returns the arrow set (a plain tuple)."""
    if k == 0:
        if x.level == 1:
            return tuple(x.cat.arrows)
        if x.level == 2:
            return _tagged_collapse_level2(x)
        return _tagged_collapse_level3(x)
    if x.level < k + 2:
        raise ValidationError(f"cannot collapse depth {k} at level {x.level}")
    # k == 1, level 3: collapse every hom 2-category to a category
    hom = {key: _tagged_collapse_level2(h) for key, h in x.hom.items()}
    comp = {}
    for (a, b, c), m in x.comp.items():
        comp[(a, b, c)] = _collapse_comp_depth1(x, (a, b, c), m, hom)
    return NCat(2, carrier=x.carrier, hom=hom, comp=comp)


def _collapse_comp_depth1(x, key, m, hom):
    a, b, c = key
    hab, hbc, hac = hom[(a, b)], hom[(b, c)], hom[(a, c)]
    src = n_product(hab, hbc)

    def decode(level2, token, collapsed):
        # tagged tokens remember their hom pair; untagged ones are found by
        # membership search over the (unique nonempty) summand
        if ":" in token and "|" in token.partition(":")[0]:
            return _untag(token)
        for p in level2.carrier:
            for q in level2.carrier:
                c1 = level2.hom[(p, q)].cat
                if token in c1.arrows or token in c1.objects:
                    return p, q, token
        raise ValidationError(f"cannot locate collapsed token {token!r}")

    def encode(level2, collapsed, p, q, name):
        c1 = level2.hom[(p, q)].cat
        if name in collapsed.cat.arrows or name in collapsed.cat.objects:
            return name
        return _tag(p, q, name)

    omap, amap = {}, {}
    for t in src.cat.objects:
        f_tok, g_tok = src.cat._obj_parts[t]
        p1, q1, e1 = decode(x.hom[(a, b)], f_tok, hab)
        p2, q2, e2 = decode(x.hom[(b, c)], g_tok, hbc)
        inner = m.f2[(f"({p1},{p2})", f"({q1},{q2})")]
        val = inner.functor.omap[f"({e1},{e2})"]
        tp = (m.f0[f"({p1},{p2})"], m.f0[f"({q1},{q2})"])
        omap[t] = encode(x.hom[(a, c)], hac, tp[0], tp[1], val)
    for t in src.cat.arrows:
        f_tok, g_tok = src.cat._pair_parts[t]
        p1, q1, e1 = decode(x.hom[(a, b)], f_tok, hab)
        p2, q2, e2 = decode(x.hom[(b, c)], g_tok, hbc)
        inner = m.f2[(f"({p1},{p2})", f"({q1},{q2})")]
        val = inner.functor.amap[f"({e1},{e2})"]
        tp = (m.f0[f"({p1},{p2})"], m.f0[f"({q1},{q2})"])
        amap[t] = encode(x.hom[(a, c)], hac, tp[0], tp[1], val)
    fun = Functor(src.cat, hac.cat, omap, amap, check=False)
    return NFunctor(1, src, hac, functor=fun)


def rho_classify(x, k):
    """Wrap depth-k structures into one-object classifying structures;
    the result gains one level.  Composition is the left projection."""
    if k == 0:
        if x.level + 1 > LEVEL_CAP:
            raise LevelCapExceeded(
                f"classify would exceed the level cap {LEVEL_CAP}"
            )
        prod = n_product(x, x)
        comp = {("*", "*", "*"): _left_projection(prod, x)}
        return NCat(x.level + 1, carrier=("*",), hom={("*", "*"): x}, comp=comp)
    hom = {key: rho_classify(h, k - 1) for key, h in x.hom.items()}
    comp = {}
    for (a, b, c), m in x.comp.items():
        src = n_product(hom[(a, b)], hom[(b, c)])
        comp[(a, b, c)] = NFunctor(
            src.level,
            src,
            hom[(a, c)],
            f0={t: "*" for t in src.carrier},
            f2={(p, q): m for p in src.carrier for q in src.carrier},
        )
    return NCat(x.level + 1, carrier=x.carrier, hom=hom, comp=comp)


# -- equivalence ---------------------------------------------------------------------


def categorical_equivalence(a, b, cap=None):
    """Level-1 equivalence: functors both ways with natural isomorphisms
    to the identities, found exhaustively."""
    budget = Budget(cap, "equivalence search")
    fs = fincat.all_functors(a, b, cap=cap)
    gs = fincat.all_functors(b, a, cap=cap)
    for f in fs:
        for g in gs:
            budget.spend()
            gf = fincat.compose_functors(g, f)
            fg = fincat.compose_functors(f, g)
            d1 = fincat.skel_equal(gf, fincat.identity_functor(a), cap=cap)
            if not d1:
                continue
            d2 = fincat.skel_equal(fg, fincat.identity_functor(b), cap=cap)
            if d2:
                return Decision(True, witness=(f, g, d1.witness, d2.witness))
    return Decision(False, reason="no equivalence pair exists")


def _two_functor_hom_families(F, G, cap=None):
    """Skel-natural families between parallel 2-functors, via the enriched
    hom over the cat base."""
    C, D = F.source, G.target
    w, es_c = as_enriched(C)
    # register D's homs in the same world
    hom_d = {}
    for a in D.carrier:
        for b in D.carrier:
            hom_d[(a, b)] = w.obj(f"hd[{a}|{b}]", D.hom[(a, b)].cat)
    comp_d = {}
    for a in D.carrier:
        for b in D.carrier:
            for c in D.carrier:
                dom = w.tensor(hom_d[(a, b)], hom_d[(b, c)])
                comp_d[(a, b, c)] = w.arr(dom, hom_d[(a, c)], D.comp[(a, b, c)].functor)
    es_d = enrich.EnrichedSet(w, D.carrier, hom_d, comp_d)

    def as_morphism(H):
        return enrich.EnrichedMorphism(
            es_c,
            es_d,
            dict(H.f0),
            {
                (a, b): w.arr(
                    es_c.hom[(a, b)],
                    hom_d[(H.f0[a], H.f0[b])],
                    H.f2[(a, b)].functor,
                )
                for a in C.carrier
                for b in C.carrier
            },
        )

    hom = enrich.enriched_hom(
        es_c, es_d, as_morphism(F), as_morphism(G), enrich.SK_SKEL, cap=cap
    )
    return hom, w, es_c, es_d


def two_equivalent_functors(F, G, cap=None):
    """Equivalence of parallel 2-functors: families both ways whose induced
    post-composition functors on the realized hom categories are level-1
    equivalences."""
    if F == G:
        return Decision(True, witness="equal")
    if F.source != G.source or F.target != G.target:
        return Decision(False, reason="not parallel")
    D = F.target
    hom_fg, w, es_c, es_d = _two_functor_hom_families(F, G, cap)
    hom_gf, _, _, _ = _two_functor_hom_families(G, F, cap)
    if not hom_fg.families or not hom_gf.families:
        return Decision(False, reason="no natural families in one direction")
    hom_ff, _, _, _ = _two_functor_hom_families(F, F, cap)
    hom_gg, _, _, _ = _two_functor_hom_families(G, G, cap)
    carrier = F.source.carrier
    for phi in hom_fg.families:
        post_phi = _post_composition_functor(D, F, G, hom_ff, hom_fg, phi, carrier)
        if post_phi is None:
            continue
        if not categorical_equivalence(hom_ff.object, hom_fg.object, cap=cap):
            continue
        for psi in hom_gf.families:
            post_psi = _post_composition_functor(
                D, G, F, hom_gg, hom_gf, psi, carrier
            )
            if post_psi is None:
                continue
            if categorical_equivalence(hom_gg.object, hom_gf.object, cap=cap):
                return Decision(True, witness=(phi, psi))
    return Decision(False, reason="no inverting pair of families")


def _post_composition_functor(D, F, G, hom_src, hom_dst, phi, carrier):
    """X |-> X . phi, realized on the subcategory objects; None if the image
    escapes the natural families."""
    mapping = {}
    for fam in hom_src.families:
        image = []
        for i, a in enumerate(carrier):
            comp = D.comp[(F.f0[a], F.f0[a], G.f0[a])]
            image.append(comp.functor.omap[f"({fam[i]},{phi[i]})"])
        image = tuple(image)
        if image not in hom_dst.families:
            return None
        mapping[fam] = image
    return mapping


def n_equivalent(x, y, cap=None):
    """Equivalence of structures at levels 1 and 2."""
    if x.level != y.level:
        return Decision(False, reason="levels differ")
    if x.level == 1:
        return categorical_equivalence(x.cat, y.cat, cap=cap)
    if x.level == 2:
        return _two_equivalent(x, y, cap=cap)
    raise LevelCapExceeded("equivalence is implemented for levels 1 and 2")


def _enumerate_two_functors(x, y, cap=None):
    budget = Budget(cap, "2-functor enumeration")
    out = []
    carriers = [y.carrier for _ in x.carrier]
    for f0_vals in itertools.product(*carriers):
        f0 = dict(zip(x.carrier, f0_vals))
        pair_choices = []
        pairs = [(a, b) for a in x.carrier for b in x.carrier]
        feasible = True
        for a, b in pairs:
            cands = fincat.all_functors(
                x.hom[(a, b)].cat, y.hom[(f0[a], f0[b])].cat, cap=cap
            )
            if not cands:
                feasible = False
                break
            pair_choices.append(cands)
        if not feasible:
            continue
        total = 1
        for ch in pair_choices:
            total *= len(ch)
        budget.spend(total)
        for combo in itertools.product(*pair_choices):
            f2 = {
                pair: NFunctor(
                    1,
                    x.hom[pair],
                    y.hom[(f0[pair[0]], f0[pair[1]])],
                    functor=fun,
                )
                for pair, fun in zip(pairs, combo)
            }
            cand = NFunctor(2, x, y, f0=f0, f2=f2)
            if _is_weak_two_functor(cand):
                out.append(cand)
    return out


def _is_weak_two_functor(m):
    """Composition respected up to natural isomorphism of hom functors."""
    x, y = m.source, m.target
    for a in x.carrier:
        for b in x.carrier:
            for c in x.carrier:
                lhs = fincat.compose_functors(
                    y.comp[(m.f0[a], m.f0[b], m.f0[c])].functor,
                    n_tensor(m.f2[(a, b)], m.f2[(b, c)]).functor,
                )
                rhs = fincat.compose_functors(
                    m.f2[(a, c)].functor, x.comp[(a, b, c)].functor
                )
                if not fincat.skel_equal(lhs, rhs):
                    return False
    return True


def _two_equivalent(x, y, cap=None):
    if x == y:
        return Decision(True, witness="equal")
    fs = _enumerate_two_functors(x, y, cap=cap)
    gs = _enumerate_two_functors(y, x, cap=cap)
    for F in fs:
        if not all(
            categorical_equivalence(
                x.hom[(a, b)].cat, y.hom[(F.f0[a], F.f0[b])].cat, cap=cap
            )
            for a in x.carrier
            for b in x.carrier
        ):
            continue
        for G in gs:
            gf = n_compose(G, F)
            fg = n_compose(F, G)
            if two_equivalent_functors(gf, n_identity(x), cap=cap) and \
               two_equivalent_functors(fg, n_identity(y), cap=cap):
                return Decision(True, witness=(F, G))
    return Decision(False, reason="no equivalence pair of 2-functors")
