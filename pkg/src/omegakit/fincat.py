"""Finite categories as explicit tables, with exhaustive validation.

A FinCat stores objects, arrows, dom/cod maps, a total composition table on
composable pairs and an identity arrow per object.  Arrow identifiers are
opaque tokens; hom-set disjointness holds because each identifier has exactly
one (dom, cod).  compose(g, f) means "g after f" and is defined exactly when
cod(f) == dom(g).

Everything here is immutable after construction and safe to share between
threads; derived constructions (products, functor categories, ...) always
return fresh values.
"""

import itertools
from dataclasses import dataclass

from .caps import Budget
from .errors import (
    BadIdentity,
    DomCodMismatch,
    MissingComposite,
    NonAssociative,
    ValidationError,
)


class FinCat:
    def __init__(self, objects, arrows, comp, identity, check=True):
        """arrows: {id: (dom, cod)}; comp: {(g, f): g_after_f}; identity: {obj: id}."""
        self.objects = tuple(objects)
        self.arrows = dict(arrows)
        self.comp = dict(comp)
        self.identity = dict(identity)
        self._hom = {}
        for a, (d, c) in self.arrows.items():
            self._hom.setdefault((d, c), []).append(a)
        self._key = (
            self.objects,
            tuple(sorted(self.arrows.items())),
            tuple(sorted(self.comp.items())),
            tuple(sorted(self.identity.items())),
        )
        if check:
            self._validate()

    # -- basic queries -------------------------------------------------

    def dom(self, f):
        return self.arrows[f][0]

    def cod(self, f):
        return self.arrows[f][1]

    def hom(self, x, y):
        return tuple(self._hom.get((x, y), ()))

    def id_(self, x):
        return self.identity[x]

    def compose(self, g, f):
        """g after f; requires cod(f) == dom(g)."""
        return self.comp[(g, f)]

    def composable_pairs(self):
        for g in self.arrows:
            for f in self.arrows:
                if self.cod(f) == self.dom(g):
                    yield g, f

    def nonidentity_arrows(self):
        ids = set(self.identity.values())
        return [a for a in self.arrows if a not in ids]

    def is_identity(self, f):
        x = self.dom(f)
        return x == self.cod(f) and self.identity.get(x) == f

    def inverse(self, f):
        """Inverse arrow of f, or None."""
        x, y = self.arrows[f]
        for g in self.hom(y, x):
            if self.compose(g, f) == self.id_(x) and self.compose(f, g) == self.id_(y):
                return g
        return None

    def is_iso(self, f):
        return self.inverse(f) is not None

    def isos(self, x, y):
        return [f for f in self.hom(x, y) if self.is_iso(f)]

    def objects_isomorphic(self, x, y):
        return bool(self.isos(x, y))

    # -- equality ------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, FinCat) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"FinCat({len(self.objects)} objects, {len(self.arrows)} arrows)"

    # -- validation ----------------------------------------------------

    def _validate(self):
        for a, (d, c) in self.arrows.items():
            if d not in self.objects or c not in self.objects:
                raise DomCodMismatch(f"arrow {a!r} has endpoint outside the object set")
        for x in self.objects:
            i = self.identity.get(x)
            if i is None or i not in self.arrows:
                raise BadIdentity(f"object {x!r} has no identity arrow")
            if self.arrows[i] != (x, x):
                raise BadIdentity(f"identity of {x!r} is not an endomorphism of {x!r}")
        seen = set(self.arrows)
        for (g, f), h in self.comp.items():
            if g not in seen or f not in seen or h not in seen:
                raise DomCodMismatch(f"composite entry ({g!r},{f!r}) uses unknown arrows")
            if self.cod(f) != self.dom(g):
                raise DomCodMismatch(f"({g!r},{f!r}) is not a composable pair")
            if self.arrows[h] != (self.dom(f), self.cod(g)):
                raise DomCodMismatch(
                    f"composite of ({g!r},{f!r}) has wrong endpoints: {h!r}"
                )
        for g, f in self.composable_pairs():
            if (g, f) not in self.comp:
                raise MissingComposite(f"no composite for ({g!r},{f!r})")
        for x in self.objects:
            i = self.identity[x]
            for f in self.arrows:
                if self.dom(f) == x and self.compose(f, i) != f:
                    raise BadIdentity(f"id_{x!r} is not right-neutral at {f!r}")
                if self.cod(f) == x and self.compose(i, f) != f:
                    raise BadIdentity(f"id_{x!r} is not left-neutral at {f!r}")
        for h in self.arrows:
            for g in self.arrows:
                if self.dom(h) != self.cod(g):
                    continue
                for f in self.arrows:
                    if self.dom(g) != self.cod(f):
                        continue
                    left = self.compose(self.compose(h, g), f)
                    right = self.compose(h, self.compose(g, f))
                    if left != right:
                        raise NonAssociative(
                            f"witness triple ({h!r},{g!r},{f!r}): "
                            f"{left!r} != {right!r}"
                        )


def validate_category(raw):
    """Build a FinCat from a raw description dict, checking every axiom.

    raw: {"objects": [...], "arrows": [{"id","dom","cod"}...],
          "comp": [{"f","g","result"}...]  (result = g after f),
          "identities": {obj: arrow} or implicit via "id_<obj>" naming}
    """
    objects = list(raw["objects"])
    arrows = {}
    for entry in raw.get("arrows", []):
        arrows[entry["id"]] = (entry["dom"], entry["cod"])
    identities = dict(raw.get("identities") or {})
    if not identities:
        for x in objects:
            name = f"id_{x}"
            if name not in arrows:
                arrows[name] = (x, x)
            identities[x] = name
    else:
        for x, a in identities.items():
            arrows.setdefault(a, (x, x))
    comp = {}
    for entry in raw.get("comp", []):
        comp[(entry["g"], entry["f"])] = entry["result"]
    # identity composites may be left implicit in descriptions
    for x, i in identities.items():
        for f, (d, c) in arrows.items():
            if d == x:
                comp.setdefault((f, i), f)
            if c == x:
                comp.setdefault((i, f), f)
    return FinCat(objects, arrows, comp, identities)


# -- standard small categories ------------------------------------------


def discrete_category(names):
    names = list(names)
    arrows = {f"id_{x}": (x, x) for x in names}
    comp = {(f"id_{x}", f"id_{x}"): f"id_{x}" for x in names}
    return FinCat(names, arrows, comp, {x: f"id_{x}" for x in names})


def terminal_category():
    """The category with one arrow."""
    return discrete_category(["*"])


def chain_poset(n):
    """The total order 0 -> 1 -> ... -> n-1 as a category."""
    objects = [str(i) for i in range(n)]
    arrows = {}
    identity = {}
    for i in range(n):
        for j in range(i, n):
            name = f"id_{i}" if i == j else f"le_{i}_{j}"
            arrows[name] = (str(i), str(j))
            if i == j:
                identity[str(i)] = name
    comp = {}
    for g, (gd, gc) in arrows.items():
        for f, (fd, fc) in arrows.items():
            if fc == gd:
                i, j = int(fd), int(gc)
                comp[(g, f)] = f"id_{i}" if i == j else f"le_{i}_{j}"
    return FinCat(objects, arrows, comp, identity)


def poset_category(elements, leq):
    """A finite poset (elements, leq predicate) as a category."""
    elements = list(elements)
    arrows = {}
    identity = {}
    for x in elements:
        for y in elements:
            if leq(x, y):
                name = f"id_{x}" if x == y else f"le_{x}_{y}"
                arrows[name] = (x, y)
                if x == y:
                    identity[x] = name
    comp = {}
    for g, (gd, gc) in arrows.items():
        for f, (fd, fc) in arrows.items():
            if fc == gd:
                name = f"id_{fd}" if fd == gc else f"le_{fd}_{gc}"
                comp[(g, f)] = name
    return FinCat(elements, arrows, comp, identity)


def cyclic_group_category(n, obj="*"):
    """Z/n as a one-object category; arrow g0 is the identity."""
    arrows = {f"g{k}": (obj, obj) for k in range(n)}
    comp = {}
    for a in range(n):
        for b in range(n):
            comp[(f"g{a}", f"g{b}")] = f"g{(a + b) % n}"
    return FinCat([obj], arrows, comp, {obj: "g0"})


def walking_iso():
    """Two objects with a single isomorphism between them."""
    arrows = {
        "id_a": ("a", "a"),
        "id_b": ("b", "b"),
        "u": ("a", "b"),
        "v": ("b", "a"),
    }
    comp = {
        ("id_a", "id_a"): "id_a",
        ("id_b", "id_b"): "id_b",
        ("u", "id_a"): "u",
        ("id_b", "u"): "u",
        ("v", "id_b"): "v",
        ("id_a", "v"): "v",
        ("v", "u"): "id_a",
        ("u", "v"): "id_b",
    }
    return FinCat(["a", "b"], arrows, comp, {"a": "id_a", "b": "id_b"})


# -- functors and natural transformations --------------------------------


class Functor:
    def __init__(self, source, target, omap, amap, check=True):
        self.source = source
        self.target = target
        self.omap = dict(omap)
        self.amap = dict(amap)
        if check:
            self._validate()

    def on_obj(self, x):
        return self.omap[x]

    def on_arr(self, f):
        return self.amap[f]

    def _validate(self):
        src, tgt = self.source, self.target
        for x in src.objects:
            if self.omap.get(x) not in tgt.objects:
                raise ValidationError(f"object {x!r} has no valid image")
        for f, (d, c) in src.arrows.items():
            g = self.amap.get(f)
            if g not in tgt.arrows:
                raise ValidationError(f"arrow {f!r} has no valid image")
            if tgt.arrows[g] != (self.omap[d], self.omap[c]):
                raise DomCodMismatch(f"image of {f!r} has wrong endpoints")
        for x in src.objects:
            if self.amap[src.id_(x)] != tgt.id_(self.omap[x]):
                raise ValidationError(f"identity of {x!r} is not preserved")
        for g, f in src.composable_pairs():
            if self.amap[src.compose(g, f)] != tgt.compose(self.amap[g], self.amap[f]):
                raise ValidationError(f"composition not preserved at ({g!r},{f!r})")

    def key(self):
        return (tuple(sorted(self.omap.items())), tuple(sorted(self.amap.items())))

    def __eq__(self, other):
        return (
            isinstance(other, Functor)
            and self.source == other.source
            and self.target == other.target
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Functor({self.omap})"


def identity_functor(c):
    return Functor(c, c, {x: x for x in c.objects}, {a: a for a in c.arrows})


def compose_functors(g, f):
    """g after f."""
    if f.target != g.source:
        raise IncompatibleTargets(f)
    omap = {x: g.omap[f.omap[x]] for x in f.source.objects}
    amap = {a: g.amap[f.amap[a]] for a in f.source.arrows}
    return Functor(f.source, g.target, omap, amap, check=False)


class IncompatibleTargets(ValidationError):
    pass


def constant_functor(source, target, obj):
    return Functor(
        source,
        target,
        {x: obj for x in source.objects},
        {a: target.id_(obj) for a in source.arrows},
        check=False,
    )


def terminal_functor(c, star=None):
    star = star or terminal_category()
    return constant_functor(c, star, star.objects[0])


class NatTrans:
    """components[x] in Hom(F(x), G(x)), natural in x."""

    def __init__(self, source, target, components, check=True):
        self.source = source
        self.target = target
        self.components = dict(components)
        if check:
            self._validate()

    def at(self, x):
        return self.components[x]

    def _validate(self):
        F, G = self.source, self.target
        if F.source != G.source or F.target != G.target:
            raise IncompatibleEndpointsError("functors are not parallel")
        cat, tgt = F.source, F.target
        for x in cat.objects:
            a = self.components.get(x)
            if a not in tgt.arrows or tgt.arrows[a] != (F.omap[x], G.omap[x]):
                raise DomCodMismatch(f"component at {x!r} has wrong endpoints")
        for f, (x, y) in cat.arrows.items():
            left = tgt.compose(self.components[y], F.amap[f])
            right = tgt.compose(G.amap[f], self.components[x])
            if left != right:
                raise ValidationError(f"naturality fails at {f!r}")

    def key(self):
        return tuple(sorted(self.components.items()))

    def __eq__(self, other):
        return (
            isinstance(other, NatTrans)
            and self.source == other.source
            and self.target == other.target
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"NatTrans({self.components})"


class IncompatibleEndpointsError(ValidationError):
    pass


def vertical_compose(beta, alpha):
    """beta after alpha, componentwise in the codomain category."""
    tgt = alpha.source.target
    comps = {
        x: tgt.compose(beta.components[x], alpha.components[x])
        for x in alpha.source.source.objects
    }
    return NatTrans(alpha.source, beta.target, comps)


# -- derived constructions ------------------------------------------------


def product(c, d, cap=None):
    """Product category; objects and arrows are componentwise pairs."""
    budget = Budget(cap, "product")
    budget.check_size(len(c.arrows) * len(d.arrows))
    pobj = lambda x, y: f"({x},{y})"
    parr = lambda f, g: f"({f},{g})"
    objects = [pobj(x, y) for x in c.objects for y in d.objects]
    arrows = {}
    for f, (fd, fc) in c.arrows.items():
        for g, (gd, gc) in d.arrows.items():
            arrows[parr(f, g)] = (pobj(fd, gd), pobj(fc, gc))
    identity = {
        pobj(x, y): parr(c.id_(x), d.id_(y)) for x in c.objects for y in d.objects
    }
    comp = {}
    for f2, f1 in c.composable_pairs():
        cf = c.compose(f2, f1)
        for g2, g1 in d.composable_pairs():
            comp[(parr(f2, g2), parr(f1, g1))] = parr(cf, d.compose(g2, g1))
    cat = FinCat(objects, arrows, comp, identity, check=False)
    cat._pair_parts = {parr(f, g): (f, g) for f in c.arrows for g in d.arrows}
    cat._obj_parts = {pobj(x, y): (x, y) for x in c.objects for y in d.objects}
    return cat


def product_projections(c, d, prod=None):
    prod = prod if prod is not None else product(c, d)
    pi1 = Functor(
        prod,
        c,
        {o: prod._obj_parts[o][0] for o in prod.objects},
        {a: prod._pair_parts[a][0] for a in prod.arrows},
        check=False,
    )
    pi2 = Functor(
        prod,
        d,
        {o: prod._obj_parts[o][1] for o in prod.objects},
        {a: prod._pair_parts[a][1] for a in prod.arrows},
        check=False,
    )
    return prod, pi1, pi2


def pair_functor(f, g):
    """<F,G>: X -> C x D for functors F: X -> C and G: X -> D."""
    if f.source != g.source:
        raise IncompatibleEndpointsError("paired functors need a common source")
    prod = product(f.target, g.target)
    omap = {x: f"({f.omap[x]},{g.omap[x]})" for x in f.source.objects}
    amap = {a: f"({f.amap[a]},{g.amap[a]})" for a in f.source.arrows}
    return Functor(f.source, prod, omap, amap, check=False)


def opposite(c):
    """Same identifiers, dom/cod swapped, composition reversed."""
    arrows = {a: (cc, d) for a, (d, cc) in c.arrows.items()}
    comp = {(f, g): h for (g, f), h in c.comp.items()}
    return FinCat(c.objects, arrows, comp, c.identity, check=False)


def opposite_functor(f):
    return Functor(
        opposite(f.source), opposite(f.target), f.omap, f.amap, check=False
    )


def all_functors(c, d, cap=None):
    """Every functor c -> d, in a deterministic enumeration order."""
    budget = Budget(cap, "functor enumeration")
    out = []
    obj_choices = [d.objects for _ in c.objects]
    nonids = c.nonidentity_arrows()
    for objs in itertools.product(*obj_choices):
        omap = dict(zip(c.objects, objs))
        hom_choices = []
        feasible = True
        for a in nonids:
            x, y = c.arrows[a]
            hs = d.hom(omap[x], omap[y])
            if not hs:
                feasible = False
                break
            hom_choices.append(hs)
        if not feasible:
            continue
        total = 1
        for hs in hom_choices:
            total *= len(hs)
        budget.spend(total if total else 1)
        for images in itertools.product(*hom_choices):
            amap = {c.id_(x): d.id_(omap[x]) for x in c.objects}
            amap.update(dict(zip(nonids, images)))
            ok = True
            for g, f in c.composable_pairs():
                if amap[c.compose(g, f)] != d.compose(amap[g], amap[f]):
                    ok = False
                    break
            if ok:
                out.append(Functor(c, d, omap, amap, check=False))
    return out


def all_nat_trans(f, g, cap=None):
    """Every natural transformation f -> g between parallel functors."""
    budget = Budget(cap, "nat-trans enumeration")
    cat, tgt = f.source, f.target
    choices = [tgt.hom(f.omap[x], g.omap[x]) for x in cat.objects]
    total = 1
    for ch in choices:
        total *= len(ch)
    budget.check_size(total)
    out = []
    for comps in itertools.product(*choices):
        budget.spend()
        components = dict(zip(cat.objects, comps))
        ok = True
        for a, (x, y) in cat.arrows.items():
            if tgt.compose(components[y], f.amap[a]) != tgt.compose(
                g.amap[a], components[x]
            ):
                ok = False
                break
        if ok:
            out.append(NatTrans(f, g, components, check=False))
    return out


def functor_category(c, d, cap=None):
    """Objects: all functors c -> d. Arrows: all natural transformations."""
    budget = Budget(cap, "functor category")
    budget.check_size(len(d.objects) ** max(len(c.objects), 1))
    functors = all_functors(c, d, cap=cap)
    fname = {f.key(): f"F{i}" for i, f in enumerate(functors)}
    by_name = {fname[f.key()]: f for f in functors}
    arrows = {}
    identity = {}
    trans_by_name = {}
    for i, f in enumerate(functors):
        for j, g in enumerate(functors):
            for k, t in enumerate(all_nat_trans(f, g, cap=cap)):
                name = f"t{i}_{j}_{k}"
                arrows[name] = (f"F{i}", f"F{j}")
                trans_by_name[name] = t
                if i == j and all(
                    t.components[x] == d.id_(f.omap[x]) for x in c.objects
                ):
                    identity[f"F{i}"] = name
    lookup = {}
    for name, t in trans_by_name.items():
        lookup[(arrows[name][0], arrows[name][1], t.key())] = name
    comp = {}
    for n2, t2 in trans_by_name.items():
        for n1, t1 in trans_by_name.items():
            if arrows[n1][1] != arrows[n2][0]:
                continue
            u = vertical_compose(t2, t1)
            comp[(n2, n1)] = lookup[(arrows[n1][0], arrows[n2][1], u.key())]
    cat = FinCat([f"F{i}" for i in range(len(functors))], arrows, comp, identity)
    cat._functors = by_name
    cat._transformations = trans_by_name
    return cat


def aut_of_identity(c, cap=None):
    """All invertible natural transformations Id_c -> Id_c."""
    idf = identity_functor(c)
    return [t for t in all_nat_trans(idf, idf, cap=cap) if all(
        c.is_iso(t.components[x]) for x in c.objects
    )]


@dataclass
class Decision:
    """A yes/no answer together with its witness (or failure reason)."""

    holds: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.holds


def skel_equal(f, g, cap=None):
    """Decide F ~ G (natural isomorphism), with a witness on success.

    Backtracking over components in object order; prunes with every
    naturality square whose endpoints are already assigned.
    """
    if f.source != g.source or f.target != g.target:
        raise IncompatibleEndpointsError("functors are not parallel")
    cat, tgt = f.source, f.target
    objs = list(cat.objects)
    budget = Budget(cap, "skel_equal")
    arrows_by_pair = {}
    for a, (x, y) in cat.arrows.items():
        arrows_by_pair.setdefault((x, y), []).append(a)

    assignment = {}

    def consistent(x):
        for (u, v), arrs in arrows_by_pair.items():
            if u not in assignment or v not in assignment:
                continue
            if u != x and v != x:
                continue
            for a in arrs:
                if tgt.compose(assignment[v], f.amap[a]) != tgt.compose(
                    g.amap[a], assignment[u]
                ):
                    return False
        return True

    def search(i):
        if i == len(objs):
            return dict(assignment)
        x = objs[i]
        for cand in tgt.isos(f.omap[x], g.omap[x]):
            budget.spend()
            assignment[x] = cand
            if consistent(x):
                found = search(i + 1)
                if found is not None:
                    return found
            del assignment[x]
        return None

    found = search(0)
    if found is None:
        return Decision(False, reason="no natural isomorphism exists")
    return Decision(True, witness=NatTrans(f, g, found, check=False))


# -- generated subcategories and equivalence relations --------------------


def generate_subcategory(seed_arrows, ambient):
    """Least subcategory of ambient containing seed_arrows."""
    arrows = set()
    objects = set()
    for a in seed_arrows:
        if a not in ambient.arrows:
            raise ValidationError(f"{a!r} is not an arrow of the ambient category")
        arrows.add(a)
        objects.update(ambient.arrows[a])
    for x in objects:
        arrows.add(ambient.id_(x))
    changed = True
    while changed:
        changed = False
        for g in list(arrows):
            for f in list(arrows):
                if ambient.cod(f) == ambient.dom(g):
                    h = ambient.compose(g, f)
                    if h not in arrows:
                        arrows.add(h)
                        changed = True
    objects = sorted(objects)
    sub_arrows = {a: ambient.arrows[a] for a in sorted(arrows)}
    comp = {
        (g, f): ambient.comp[(g, f)]
        for g in sub_arrows
        for f in sub_arrows
        if ambient.cod(f) == ambient.dom(g)
    }
    identity = {x: ambient.id_(x) for x in objects}
    return FinCat(objects, sub_arrows, comp, identity, check=False)


class EquivRelation:
    """Union-find closure of a relation, with canonical representatives."""

    def __init__(self, carrier, pairs=()):
        self.carrier = tuple(carrier)
        self._parent = {x: x for x in self.carrier}
        for a, b in pairs:
            self.union(a, b)

    def find(self, x):
        while self._parent[x] != x:
            self._parent[x] = self._parent[self._parent[x]]
            x = self._parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller token as representative, for determinism
            lo, hi = sorted((ra, rb))
            self._parent[hi] = lo

    def related(self, a, b):
        return self.find(a) == self.find(b)

    def classes(self):
        buckets = {}
        for x in self.carrier:
            buckets.setdefault(self.find(x), []).append(x)
        return [tuple(buckets[r]) for r in sorted(buckets)]


def generate_equivalence(pairs, carrier):
    return EquivRelation(carrier, pairs)


# -- set-valued functors (Yoneda) -----------------------------------------


class SetFunctor:
    """A finite-set-valued functor on c (variance 'co') or c^opp ('contra')."""

    def __init__(self, cat, variance, values, action, check=True):
        if variance not in ("co", "contra"):
            raise ValidationError("variance must be 'co' or 'contra'")
        self.cat = cat
        self.variance = variance
        self.values = {x: tuple(v) for x, v in values.items()}
        self.action = {a: dict(m) for a, m in action.items()}
        if check:
            self._validate()

    def _ends(self, f):
        d, c = self.cat.arrows[f]
        return (d, c) if self.variance == "co" else (c, d)

    def _validate(self):
        for x in self.cat.objects:
            if x not in self.values:
                raise ValidationError(f"no value at {x!r}")
        for f in self.cat.arrows:
            src, dst = self._ends(f)
            m = self.action.get(f)
            if m is None:
                raise ValidationError(f"no action for {f!r}")
            if set(m) != set(self.values[src]) or not set(m.values()) <= set(
                self.values[dst]
            ):
                raise ValidationError(f"action of {f!r} is not a map of value sets")
        for x in self.cat.objects:
            m = self.action[self.cat.id_(x)]
            if any(m[e] != e for e in self.values[x]):
                raise ValidationError(f"action of id_{x!r} is not the identity")
        for g, f in self.cat.composable_pairs():
            h = self.cat.compose(g, f)
            first, second = (f, g) if self.variance == "co" else (g, f)
            m = {e: self.action[second][self.action[first][e]]
                 for e in self.values[self._ends(h)[0]]}
            if m != self.action[h]:
                raise ValidationError(f"functoriality fails at ({g!r},{f!r})")


def yoneda(c, obj):
    """Yo(obj): x |-> Hom(x, obj), a contravariant set-valued functor."""
    if obj not in c.objects:
        raise ValidationError(f"{obj!r} is not an object")
    values = {x: c.hom(x, obj) for x in c.objects}
    action = {}
    for f, (x, y) in c.arrows.items():
        action[f] = {e: c.compose(e, f) for e in values[y]}
    return SetFunctor(c, "contra", values, action)


def yoneda_op(c, obj):
    """Yo^opp(obj): x |-> Hom(obj, x), covariant."""
    if obj not in c.objects:
        raise ValidationError(f"{obj!r} is not an object")
    values = {x: c.hom(obj, x) for x in c.objects}
    action = {}
    for f, (x, y) in c.arrows.items():
        action[f] = {e: c.compose(f, e) for e in values[x]}
    return SetFunctor(c, "co", values, action)
