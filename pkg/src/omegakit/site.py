"""Topologies, spec data and the structure-sheaf lift.

Supported sites are finite posets with binary meets (the opens of finite
topological spaces); supported value categories are finite sets and finite
commutative rings, with limits realized as subobjects of products.  The
ambient category of spaces T may carry extra (non-inclusion) arrows given by
explicit point maps; per-object sites are always the inclusion posets.

The lift of an object restricts the section data over it, left-Kan-extends
to the opens along the projection (pointwise comma colimits, with the
terminal-object fast path that the closed toy data always hits), and
sheafifies by the plus construction twice.  The lift of an arrow packages
the pushforward comparison into a pointed correspondence over finite
"window" categories: full subcategories of T x Sh(...)^opp spanned by the
sheaves in play, so that composition and equality of lifted arrows run
through the ordinary machinery of pointed correspondences.
"""

import itertools
from dataclasses import dataclass, field

from .caps import Budget
from .errors import (
    CapExceeded,
    DepthCapExceeded,
    KappaNotFaithful,
    NoLift,
    NoPullback,
    NotAcyclic,
    UnsupportedValueCategory,
    ValidationError,
)
from .fincat import Decision, FinCat, Functor
from . import fincat, omega, toyspec


# -- poset utilities -----------------------------------------------------------


def poset_leq(cat, x, y):
    return bool(cat.hom(x, y))


def poset_meet(cat, x, y):
    lower = [z for z in cat.objects if poset_leq(cat, z, x) and poset_leq(cat, z, y)]
    maximal = [
        z for z in lower if all(not poset_leq(cat, z, w) or z == w for w in lower)
    ]
    candidates = [
        z for z in lower if all(poset_leq(cat, w, z) for w in lower)
    ]
    if len(candidates) != 1:
        raise NoPullback(f"no meet of {x!r} and {y!r}")
    return candidates[0]


def poset_arrow(cat, x, y):
    hom = cat.hom(x, y)
    if len(hom) != 1:
        raise ValidationError(f"not a poset hom at ({x!r},{y!r})")
    return hom[0]


def is_poset(cat):
    return all(len(cat.hom(x, y)) <= 1 for x in cat.objects for y in cat.objects)


# -- fibre functors ------------------------------------------------------------


@dataclass
class FibreResult:
    over: FinCat
    action: dict  # site arrow -> Functor between over-categories


def fibre(cat, c):
    """Over-category of a poset with binary meets, with the pullback action
    of every arrow computed by meets."""
    if not is_poset(cat):
        raise NoPullback("fibre functors are supported on posets only")
    objs = [x for x in cat.objects if poset_leq(cat, x, c)]
    sub_arrows = {
        a: e
        for a, e in cat.arrows.items()
        if e[0] in objs and e[1] in objs
    }
    comp = {
        (g, f): cat.comp[(g, f)]
        for g in sub_arrows
        for f in sub_arrows
        if cat.cod(f) == cat.dom(g)
    }
    over = FinCat(objs, sub_arrows, comp, {o: cat.id_(o) for o in objs}, check=False)
    return over


def fibre_action(cat, f):
    """Fib(f): the pullback functor along f: c1 -> c2, by meets."""
    c1, c2 = cat.arrows[f]
    over2, over1 = fibre(cat, c2), fibre(cat, c1)
    omap = {x: poset_meet(cat, x, c1) for x in over2.objects}
    amap = {}
    for a, (x, y) in over2.arrows.items():
        amap[a] = poset_arrow(over1, omap[x], omap[y])
    return Functor(over2, over1, omap, amap)


# -- topologies ------------------------------------------------------------------


class Topology:
    """covers[obj]: families of site arrows with that codomain."""

    def __init__(self, site, covers, check=True):
        self.site = site
        self.covers = {k: tuple(tuple(f) for f in v) for k, v in covers.items()}
        if check:
            self._validate()

    def families(self, obj):
        return self.covers.get(obj, ())

    def _validate(self):
        for obj, fams in self.covers.items():
            for fam in fams:
                for a in fam:
                    if self.site.cod(a) != obj:
                        raise ValidationError(
                            f"cover member {a!r} does not end at {obj!r}"
                        )
        for obj in self.site.objects:
            ident = (self.site.id_(obj),)
            if ident not in self.families(obj):
                raise ValidationError(f"identity family missing at {obj!r}")

    def check_stability(self):
        """Pullback stability, checked when the site has meets."""
        for obj, fams in self.covers.items():
            for fam in fams:
                for g in self.site.arrows:
                    if self.site.cod(g) != obj:
                        continue
                    v = self.site.dom(g)
                    pulled = tuple(
                        poset_arrow(
                            self.site,
                            poset_meet(self.site, self.site.dom(a), v),
                            v,
                        )
                        for a in fam
                    )
                    if tuple(sorted(set(pulled))) not in {
                        tuple(sorted(set(f))) for f in self.families(v)
                    }:
                        return Decision(False, witness=(obj, fam, g))
        return Decision(True)

    def check_transitivity(self):
        for obj, fams in self.covers.items():
            for fam in fams:
                choices = []
                for a in fam:
                    sub = self.families(self.site.dom(a))
                    if not sub:
                        break
                    choices.append((a, sub[0]))
                else:
                    composite = []
                    for a, sub in choices:
                        composite += [self.site.compose(a, b) for b in sub]
                    key = tuple(sorted(set(composite)))
                    if key not in {
                        tuple(sorted(set(f))) for f in self.families(obj)
                    }:
                        return Decision(False, witness=(obj, fam))
        return Decision(True)


def open_cover_topology(site):
    """All families of a poset-with-joins whose members are the down-arrows
    into each object and whose domains join to it.  The site must record the
    underlying point sets: objects are compared by an `extent` table."""
    raise NotImplementedError("built by the spec-datum constructors")


# -- admissibility -----------------------------------------------------------------


class AdmissibilityStructure:
    """E[c]: the admissible site at c (a poset FinCat); eps_obj[c][e]: the
    arrow of the ambient category realizing e over c; action[f]: for an
    ambient arrow f: c1 -> c2 the contravariant map E(c2) -> E(c1);
    terminal[c]: the admissible object realizing id_c."""

    def __init__(self, ambient, E, eps_obj, action, terminal, check=True):
        self.ambient = ambient
        self.E = dict(E)
        self.eps_obj = {k: dict(v) for k, v in eps_obj.items()}
        self.action = {k: dict(v) for k, v in action.items()}
        self.terminal = dict(terminal)
        if check:
            self._validate()

    def _validate(self):
        for c in self.ambient.objects:
            if c not in self.E:
                raise ValidationError(f"no admissible site at {c!r}")
            cat = self.E[c]
            if not is_poset(cat):
                raise ValidationError(f"admissible site at {c!r} is not a poset")
            seen = {}
            for e in cat.objects:
                arrow = self.eps_obj[c].get(e)
                if arrow is None or self.ambient.cod(arrow) != c:
                    raise ValidationError(f"bad realization of {e!r} over {c!r}")
                if arrow in seen:
                    raise ValidationError(f"realization over {c!r} is not faithful")
                seen[arrow] = e
            t = self.terminal.get(c)
            if t not in cat.objects:
                raise ValidationError(f"no terminal witness at {c!r}")
            for e in cat.objects:
                if not cat.hom(e, t):
                    raise ValidationError(f"witness at {c!r} is not terminal")
            if not self.ambient.is_identity(self.eps_obj[c][t]):
                got = self.eps_obj[c][t]
                if not self.ambient.is_iso(got):
                    raise ValidationError(
                        f"terminal witness at {c!r} is not the identity up to iso"
                    )

    def preimage(self, f, e):
        """E(f) applied to an admissible object e over cod(f)."""
        return self.action[f][e]


# -- spec data -----------------------------------------------------------------------


@dataclass
class SpecDatum:
    sp: Functor                 # R -> T
    O_obj: dict                 # R object -> value
    O_arr: dict                 # R arrow -> value morphism
    tau: Topology               # on T
    eps: AdmissibilityStructure # on T
    values: str                 # "ring" | "set"
    world: object = None        # builder bookkeeping

    @property
    def R(self):
        return self.sp.source

    @property
    def T(self):
        return self.sp.target

    def validate(self):
        self.sp._validate()
        for x in self.R.objects:
            if x not in self.O_obj:
                raise ValidationError(f"no section value at {x!r}")
        for a, (x, y) in self.R.arrows.items():
            m = self.O_arr.get(a)
            if m is None:
                raise ValidationError(f"no section morphism at {a!r}")
            if self.values == "ring":
                if m.source != self.O_obj[y] or m.target != self.O_obj[x]:
                    raise ValidationError(f"section morphism at {a!r} mismatched")
        for g, f in self.R.composable_pairs():
            h = self.R.compose(g, f)
            if self.values == "ring":
                left = toyspec.compose_homs(self.O_arr[f], self.O_arr[g])
                if left.mapping != self.O_arr[h].mapping:
                    raise ValidationError(f"sections not functorial at ({g!r},{f!r})")
        return Decision(True)


# -- presheaves and sheaves ------------------------------------------------------------


class ValueOps:
    """Operations of the value category, realized concretely."""

    def __init__(self, kind):
        if kind not in ("ring", "set"):
            raise UnsupportedValueCategory(kind)
        self.kind = kind

    def restrict_apply(self, morphism, element):
        if self.kind == "ring":
            return morphism.mapping[element]
        return morphism[element]

    def carrier(self, value):
        if self.kind == "ring":
            return value.carrier
        return value

    def terminal(self):
        if self.kind == "ring":
            return toyspec.zero_ring("T")
        return ("*",)

    def morphism(self, source, target, mapping):
        if self.kind == "ring":
            return toyspec.RingHom(source, target, mapping)
        return dict(mapping)

    def matching_value(self, members, component_values, compatible):
        """Subobject of the product over `members` on the tuples accepted by
        `compatible`; returns (value, projections)."""
        pools = [self.carrier(component_values[m]) for m in members]
        tuples = [t for t in itertools.product(*pools) if compatible(t)]
        if self.kind == "set":
            return tuple(tuples), {
                m: {t: t[i] for t in tuples} for i, m in enumerate(members)
            }
        name = "Match(" + ",".join(component_values[m].name for m in members) + ")"
        if not members:
            # empty product: the terminal ring on the empty tuple
            ring = toyspec.FiniteRing(
                "Match()", [()], {((), ()): ()}, {((), ()): ()}, (), ()
            )
            return ring, {}
        add, mul = {}, {}
        vals = [component_values[m] for m in members]
        for t1 in tuples:
            for t2 in tuples:
                add[(t1, t2)] = tuple(v.a(a, b) for v, a, b in zip(vals, t1, t2))
                mul[(t1, t2)] = tuple(v.m(a, b) for v, a, b in zip(vals, t1, t2))
        zero = tuple(v.zero for v in vals)
        one = tuple(v.one for v in vals)
        ring = toyspec.FiniteRing(name, tuples, add, mul, zero, one)
        projections = {
            m: toyspec.RingHom(
                ring, component_values[m], {t: t[i] for t in tuples}, check=False
            )
            for i, m in enumerate(members)
        }
        return ring, projections

    def iso(self, a, b, cap=None):
        if self.kind == "ring":
            return toyspec.ring_isomorphism(a, b, cap=cap)
        if len(a) != len(b):
            return Decision(False, reason="sizes differ")
        return Decision(True, witness=dict(zip(a, b)))

    def morphisms(self, a, b, cap=None):
        if self.kind == "ring":
            return toyspec.all_ring_homs(a, b, cap=cap)
        return [dict(zip(a, image)) for image in itertools.product(b, repeat=len(a))]

    def equal_morphisms(self, m1, m2):
        if self.kind == "ring":
            return m1.mapping == m2.mapping
        return m1 == m2

    def compose(self, g, f):
        if self.kind == "ring":
            return toyspec.compose_homs(g, f)
        return {k: g[v] for k, v in f.items()}

    def identity(self, value):
        if self.kind == "ring":
            return toyspec.identity_hom(value)
        return {e: e for e in value}

    def is_surjective(self, morphism, target):
        if self.kind == "ring":
            return morphism.is_surjective()
        return set(morphism.values()) == set(self.carrier(target))


class Presheaf:
    """Contravariant section data on a poset site: values per object and a
    restriction (big -> small) per site arrow small -> big."""

    def __init__(self, site, values, restr, ops, check=True):
        self.site = site
        self.values = dict(values)
        self.restr = dict(restr)
        self.ops = ops
        if check:
            self._validate()

    def value(self, obj):
        return self.values[obj]

    def restrict(self, arrow):
        return self.restr[arrow]

    def restrict_to(self, small, big):
        return self.restr[poset_arrow(self.site, small, big)]

    def _validate(self):
        for obj in self.site.objects:
            if obj not in self.values:
                raise ValidationError(f"no sections at {obj!r}")
        for a in self.site.arrows:
            if a not in self.restr:
                raise ValidationError(f"no restriction along {a!r}")
        for g, f in self.site.composable_pairs():
            h = self.site.compose(g, f)
            left = self.ops.compose(self.restr[f], self.restr[g])
            if not self.ops.equal_morphisms(left, self.restr[h]):
                raise ValidationError(f"restrictions not functorial at ({g!r},{f!r})")

    def key(self):
        if self.ops.kind == "ring":
            vals = tuple(
                (o, self.values[o].carrier, tuple(sorted(self.values[o].add.items(), key=repr)))
                for o in self.site.objects
            )
            maps = tuple(
                (a, tuple(sorted(self.restr[a].mapping.items(), key=repr)))
                for a in sorted(self.restr)
            )
        else:
            vals = tuple((o, tuple(self.values[o])) for o in self.site.objects)
            maps = tuple(
                (a, tuple(sorted(self.restr[a].items(), key=repr)))
                for a in sorted(self.restr)
            )
        return (vals, maps)


def matching_families(presheaf, family):
    """The compatible-families value for a covering family of site arrows,
    with its projections."""
    site, ops = presheaf.site, presheaf.ops
    members = tuple(sorted(site.dom(a) for a in family))

    def compatible(t):
        idx = {m: i for i, m in enumerate(members)}
        for m1 in members:
            for m2 in members:
                meet = poset_meet(site, m1, m2)
                r1 = presheaf.restrict_to(meet, m1)
                r2 = presheaf.restrict_to(meet, m2)
                if ops.restrict_apply(r1, t[idx[m1]]) != ops.restrict_apply(
                    r2, t[idx[m2]]
                ):
                    return False
        return True

    value, projections = ops.matching_value(members, presheaf.values, compatible)
    return members, value, projections


def sheaf_check(presheaf, topology):
    """Is the sections-to-matching-families comparison bijective for every
    covering family?  Witness: the first failing family."""
    ops = presheaf.ops
    for obj in presheaf.site.objects:
        for family in topology.families(obj):
            members, value, _ = matching_families(presheaf, family)
            image = {}
            for s in ops.carrier(presheaf.value(obj)):
                t = tuple(
                    ops.restrict_apply(presheaf.restrict_to(m, obj), s)
                    for m in members
                )
                if t in image:
                    return Decision(False, witness=(obj, family, "not separated"))
                image[t] = s
            if set(image) != set(ops.carrier(value)):
                return Decision(False, witness=(obj, family, "no gluing"))
    return Decision(True)


def _finest_cover(site, topology, obj, reverse=False):
    """Common refinement of every covering family of obj, by folding meets;
    an empty covering family collapses the refinement to the empty family.
    `reverse` flips the coordinate order used for matching tuples, which is
    the deterministic "choice order" knob of the construction."""
    fams = topology.families(obj)
    partial = [obj]
    for fam in fams:
        if not fam:
            return ()
        doms = [site.dom(a) for a in fam]
        partial = sorted(
            {poset_meet(site, p, d) for p in partial for d in doms}
        )
    return tuple(reversed(partial)) if reverse else tuple(partial)


def plus_construction(presheaf, topology, reverse=False):
    site, ops = presheaf.site, presheaf.ops
    finest = {
        obj: _finest_cover(site, topology, obj, reverse) for obj in site.objects
    }
    values, units = {}, {}
    projections = {}
    for obj in site.objects:
        members = finest[obj]

        def compatible(t, members=members):
            idx = {m: i for i, m in enumerate(members)}
            for m1 in members:
                for m2 in members:
                    meet = poset_meet(site, m1, m2)
                    r1 = presheaf.restrict_to(meet, m1)
                    r2 = presheaf.restrict_to(meet, m2)
                    if ops.restrict_apply(r1, t[idx[m1]]) != ops.restrict_apply(
                        r2, t[idx[m2]]
                    ):
                        return False
            return True

        value, projs = ops.matching_value(members, presheaf.values, compatible)
        values[obj] = value
        projections[obj] = (members, projs)
        unit_map = {}
        for s in ops.carrier(presheaf.value(obj)):
            unit_map[s] = tuple(
                ops.restrict_apply(presheaf.restrict_to(m, obj), s) for m in members
            )
        units[obj] = ops.morphism(presheaf.value(obj), value, unit_map)
    restr = {}
    for a, (small, big) in site.arrows.items():
        m_small, m_big = finest[small], finest[big]
        mapping = {}
        for t in ops.carrier(values[big]):
            out = []
            for v in m_small:
                # find a member of the big cover above v (after meeting with
                # the small object every big member covers the small one)
                w = next(
                    w for w in m_big if poset_leq(site, v, poset_meet(site, w, small))
                    or poset_leq(site, v, w)
                )
                idx = m_big.index(w)
                r = presheaf.restrict_to(v, w)
                out.append(ops.restrict_apply(r, t[idx]))
            mapping[t] = tuple(out)
        restr[a] = ops.morphism(values[big], values[small], mapping)
    plus = Presheaf(site, values, restr, ops)
    return plus, units


@dataclass
class Sheaf:
    presheaf: Presheaf
    unit: dict  # site object -> morphism P(obj) -> sheaf(obj)

    @property
    def site(self):
        return self.presheaf.site

    @property
    def ops(self):
        return self.presheaf.ops

    def value(self, obj):
        return self.presheaf.value(obj)

    def key(self):
        return self.presheaf.key()


def sheafify(presheaf, topology, reverse=False):
    """Plus construction applied twice, with the composite unit."""
    once, u1 = plus_construction(presheaf, topology, reverse)
    twice, u2 = plus_construction(once, topology, reverse)
    dec = sheaf_check(twice, topology)
    if not dec:
        raise ValidationError(f"double plus failed to produce a sheaf: {dec.witness}")
    unit = {
        obj: presheaf.ops.compose(u2[obj], u1[obj]) for obj in presheaf.site.objects
    }
    return Sheaf(twice, unit)


# -- Kan extension ----------------------------------------------------------------------


@dataclass
class KanResult:
    values: dict       # site object -> value
    restr: dict        # site arrow -> morphism
    unit: dict         # source object -> morphism O0(a) -> Lan(q(a))
    terminalia: dict   # site object -> chosen terminal comma object


def left_kan(source_cat, O0_obj, O0_arr, q, target_site, ops, cap=None):
    """Pointwise Kan extension along q: source_cat -> target_site.

    Comma categories with a terminal object are evaluated there (the closed
    toy data always provides one).  Set-valued data additionally supports
    empty commas (initial object) and genuine colimits; ring-valued data
    fails loudly otherwise, with no partial answer.
    """
    values, terminalia = {}, {}
    for b in target_site.objects:
        comma = [
            a
            for a in source_cat.objects
            if poset_leq(target_site, q.omap[a], b)
        ]
        terminal = None
        for cand in comma:
            if all(_unique_arrow_over(source_cat, other, cand, q, target_site) for other in comma):
                terminal = cand
                break
        if terminal is not None:
            values[b] = O0_obj[terminal]
            terminalia[b] = terminal
            continue
        if ops.kind == "set":
            values[b] = _set_comma_colimit(source_cat, O0_obj, O0_arr, comma)
            terminalia[b] = None
        else:
            raise CapExceeded(
                f"no terminal object in the comma category over {b!r}; "
                "general ring colimits are out of scope"
            )
    restr = {}
    for arrow, (small, big) in target_site.arrows.items():
        t_small, t_big = terminalia[big], terminalia[small]
        if t_small is None or t_big is None:
            raise CapExceeded("restriction without terminal comma objects")
        # unique source arrow from the more-localized terminal to the less
        link = _the_arrow(source_cat, t_big, t_small)
        restr[arrow] = O0_arr[link]
    unit = {}
    for a in source_cat.objects:
        t = terminalia[q.omap[a]]
        link = _the_arrow(source_cat, a, t)
        unit[a] = O0_arr[link]
    return KanResult(values, restr, unit, terminalia)


def _unique_arrow_over(cat, x, y, q, site):
    hom = cat.hom(x, y)
    return len(hom) == 1


def _the_arrow(cat, x, y):
    hom = cat.hom(x, y)
    if len(hom) != 1:
        raise ValidationError(f"expected a unique arrow {x!r} -> {y!r}")
    return hom[0]


def _set_comma_colimit(cat, O0_obj, O0_arr, comma):
    tagged = [(a, e) for a in comma for e in O0_obj[a]]
    rel = fincat.EquivRelation(tagged)
    for f, (x, y) in cat.arrows.items():
        if x in comma and y in comma:
            for e in O0_obj[x]:
                rel.union((x, e), (y, O0_arr[f][e]))
    return tuple(sorted({rel.find(t) for t in tagged}))


def induced_topology(datum, c):
    """The topology on E(c) pulled back from tau along realizations; for
    inclusion-realized sites the families coincide with the ambient ones."""
    E = datum.eps.E[c]
    covers = {}
    for u in E.objects:
        fams = []
        for fam in datum.tau.families(u):
            if all(a in E.arrows for a in fam):
                fams.append(tuple(fam))
        covers[u] = tuple(fams)
    return Topology(E, covers, check=False)


# -- the lift ------------------------------------------------------------------------------


@dataclass
class LiftedObject:
    x: str
    base: str              # sp(x)
    sheaf: Sheaf
    site: FinCat           # E(sp(x))
    kan: KanResult
    preimage_cat: FinCat
    to_r: dict             # preimage object -> R object


class LiftSession:
    """Computes lifted objects for a spec datum.  choice="reversed" flips
    the deterministic enumeration order used by the plus construction, which
    produces a different (isomorphic) sheaf representative."""

    def __init__(self, datum, choice="forward", cap=None):
        datum.validate()
        self.datum = datum
        self.choice = choice
        self.cap = cap
        self.ops = ValueOps(datum.values)
        self._objects = {}

    def lifted_object(self, x):
        if x in self._objects:
            return self._objects[x]
        datum, ops = self.datum, self.ops
        base = datum.sp.omap[x]
        E = datum.eps.E[base]
        # preimage category: arrows over x whose sp-image is an admissible
        # realization over the base
        over_objects = []
        to_r = {}
        realized = {
            arrow: e for e, arrow in datum.eps.eps_obj[base].items()
        }
        for u, (dom_r, cod_r) in datum.R.arrows.items():
            if cod_r != x:
                continue
            image = datum.sp.amap[u]
            if image in realized:
                over_objects.append(u)
                to_r[u] = dom_r
        pre_arrows = {}
        for a, (d, c) in datum.R.arrows.items():
            for u1 in over_objects:
                for u2 in over_objects:
                    if (
                        datum.R.dom(a) == datum.R.dom(u1)
                        and datum.R.cod(a) == datum.R.dom(u2)
                        and datum.R.compose(u2, a) == u1
                    ):
                        pre_arrows[f"{a}[{u1}->{u2}]"] = (u1, u2, a)
        pre_cat, pre_o_arr = self._preimage_category(over_objects, pre_arrows)
        q = Functor(
            pre_cat,
            E,
            {u: realized[datum.sp.amap[u]] for u in over_objects},
            {
                name: poset_arrow(
                    E,
                    realized[datum.sp.amap[triple[0]]],
                    realized[datum.sp.amap[triple[1]]],
                )
                for name, triple in pre_arrows.items()
            },
            check=False,
        )
        O0_obj = {u: datum.O_obj[to_r[u]] for u in over_objects}
        O0_arr = {name: datum.O_arr[triple[2]] for name, triple in pre_arrows.items()}
        kan = left_kan(pre_cat, O0_obj, O0_arr, q, E, self.ops, cap=self.cap)
        pre = Presheaf(E, kan.values, kan.restr, ops)
        sheaf = sheafify(
            pre, induced_topology(datum, base), reverse=(self.choice == "reversed")
        )
        out = LiftedObject(x, base, sheaf, pre.site, kan, pre_cat, to_r)
        self._objects[x] = out
        return out

    def _preimage_category(self, over_objects, pre_arrows):
        arrows = {}
        identity = {}
        for name, (u1, u2, a) in pre_arrows.items():
            arrows[name] = (u1, u2)
            if u1 == u2 and self.datum.R.is_identity(a):
                identity[u1] = name
        comp = {}
        for n2, (v1, v2, a2) in pre_arrows.items():
            for n1, (u1, u2, a1) in pre_arrows.items():
                if u2 == v1:
                    a = self.datum.R.compose(a2, a1)
                    target = next(
                        n
                        for n, t in pre_arrows.items()
                        if t == (u1, v2, a)
                    )
                    comp[(n2, n1)] = target
        cat = FinCat(list(over_objects), arrows, comp, identity)
        return cat, None

    def global_sections(self, x):
        lifted = self.lifted_object(x)
        top = self.datum.eps.terminal[lifted.base]
        return lifted.sheaf.value(top)

    def canonical_global_map(self, x):
        """The composite unit O(x) -> sections at the terminal open."""
        lifted = self.lifted_object(x)
        top = self.datum.eps.terminal[lifted.base]
        # Kan unit at the identity-over object, then the sheafification unit
        ident = next(
            u for u in lifted.preimage_cat.objects
            if lifted.to_r[u] == x and self.datum.R.is_identity(
                _r_arrow_of_over(self.datum, u)
            )
        )
        kan_unit = lifted.kan.unit[ident]
        return self.ops.compose(lifted.sheaf.unit[top], kan_unit)


def _r_arrow_of_over(datum, u):
    return u  # over-objects are R arrows themselves


# -- sheaf morphisms and pushforwards ---------------------------------------------------


def sheaf_morphisms(F, G, ops, cap=None):
    """All natural families F -> G over a shared poset site.  When the
    restrictions out of the top are surjective the components are pinned by
    the top component; otherwise a filtered product search runs under the
    budget."""
    site = F.site
    budget = Budget(cap, "sheaf morphisms")
    tops = [o for o in site.objects if all(poset_leq(site, x, o) for x in site.objects)]
    out = []
    if tops:
        top = tops[0]
        pinned = all(
            ops.is_surjective(F.restrict_to(o, top), F.value(o))
            for o in site.objects
        )
        if pinned:
            for h in ops.morphisms(F.value(top), G.value(top), cap=cap):
                budget.spend()
                components = {top: h}
                ok = True
                for o in site.objects:
                    if o == top:
                        continue
                    rF = F.restrict_to(o, top)
                    rG = G.restrict_to(o, top)
                    mapping = {}
                    for e in ops.carrier(F.value(o)):
                        src = next(
                            s
                            for s in ops.carrier(F.value(top))
                            if ops.restrict_apply(rF, s) == e
                        )
                        mapping[e] = ops.restrict_apply(
                            rG, ops.restrict_apply(h, src)
                        )
                    # well-definedness across preimage choices
                    for s in ops.carrier(F.value(top)):
                        e = ops.restrict_apply(rF, s)
                        if mapping[e] != ops.restrict_apply(rG, ops.restrict_apply(h, s)):
                            ok = False
                            break
                    if not ok:
                        break
                    components[o] = ops.morphism(F.value(o), G.value(o), mapping)
                if ok and _natural(F, G, components, ops):
                    out.append(components)
            return out
    pools = [
        ops.morphisms(F.value(o), G.value(o), cap=cap) for o in site.objects
    ]
    for combo in itertools.product(*pools):
        budget.spend()
        components = dict(zip(site.objects, combo))
        if _natural(F, G, components, ops):
            out.append(components)
    return out


def _natural(F, G, components, ops):
    site = F.site
    for a, (small, big) in site.arrows.items():
        left = ops.compose(components[small], F.restrict(a))
        right = ops.compose(G.restrict(a), components[big])
        if not ops.equal_morphisms(left, right):
            return False
    return True


def pushforward_presheaf(F, f_action, target_site, ops):
    """F o preimage: the pushforward of sections along an ambient arrow,
    where f_action maps target-site objects to source-site objects."""
    values = {v: F.value(f_action[v]) for v in target_site.objects}
    restr = {}
    for a, (small, big) in target_site.arrows.items():
        restr[a] = F.restrict_to(f_action[small], f_action[big])
    return Presheaf(target_site, values, restr, ops, check=False)


def pushforward_components(components, f_action, target_site):
    return {v: components[f_action[v]] for v in target_site.objects}


# -- the fibre condition for lifted arrows ------------------------------------------------


def pushout_along_surjection(ops, r, h, ring_A, value_B, value_C):
    """The pushout of a surjective r: A -> B along h: A -> C, with its leg
    C -> P; rings: C / <h(ker r)>; sets: C modulo the kernel-pair relation."""
    if ops.kind == "ring":
        K = r.kernel()
        ideal = toyspec.ideal_generated(value_C, [h.mapping[k] for k in K])
        P, proj = toyspec.quotient_ring(value_C, ideal)
        return P, proj
    # sets: quotient of C by the closure of h(a) ~ h(a') when r(a) = r(a')
    rel = fincat.EquivRelation(tuple(value_C))
    buckets = {}
    for a in ring_A:
        buckets.setdefault(r[a], []).append(a)
    for group in buckets.values():
        for a in group[1:]:
            rel.union(h[group[0]], h[a])
    reps = tuple(sorted({rel.find(c) for c in value_C}))
    proj = {c: rel.find(c) for c in value_C}
    return reps, proj


def fibre_condition(ops, r_y, h, r_x, phi_v, A_y, A_x, O_y_v, O_x_w):
    """Is the square (r_y, h; phi_v, r_x) a fibre diagram in the value
    category?  Realized as: the square commutes and the comparison from the
    pushout of r_y along h is an isomorphism."""
    for a in ops.carrier(A_y):
        left = ops.restrict_apply(phi_v, ops.restrict_apply(r_y, a))
        right = ops.restrict_apply(r_x, ops.restrict_apply(h, a))
        if left != right:
            return False
    if not ops.is_surjective(r_y, O_y_v):
        return False
    P, proj = pushout_along_surjection(
        ops, r_y, h, ops.carrier(A_y), O_y_v, A_x
    )
    # comparison u: P -> O_x(w) with u o proj = r_x must be bijective
    comparison = {}
    for c in ops.carrier(A_x):
        p = ops.restrict_apply(proj, c)
        val = ops.restrict_apply(r_x, c)
        if p in comparison and comparison[p] != val:
            return False
        comparison[p] = val
    if set(comparison) != set(ops.carrier(P)):
        return False
    image = list(comparison.values())
    return len(set(image)) == len(image) and set(image) == set(ops.carrier(O_x_w))


# -- windows: finite replacements of T x Sh(...)^opp --------------------------------------


@dataclass
class Window:
    cat: FinCat                 # product of T with the opposite sheaf category
    sheaf_token: dict           # sheaf key -> token
    sheaves: dict               # token -> Sheaf-like presheaf
    morph_token: dict           # (dom sheaf token, cod sheaf token, comp key) -> opp arrow
    morphisms: dict             # opp arrow token -> (sh dom token, sh cod token, components)
    shopp: FinCat


def _components_key(ops, components):
    out = []
    for o in sorted(components):
        m = components[o]
        if ops.kind == "ring":
            out.append((o, tuple(sorted(m.mapping.items(), key=repr))))
        else:
            out.append((o, tuple(sorted(m.items(), key=repr))))
    return tuple(out)


class WindowContext:
    """Materializes, per lifted object, the finite full subcategory of
    T x Sh(E(sp x))^opp spanned by the sheaves in play, closed under the
    pushforwards of the arrows being lifted."""

    def __init__(self, datum, arrows=(), cap=None):
        self.datum = datum
        self.ops = ValueOps(datum.values)
        self.cap = cap
        self.arrow_ids = list(arrows)
        self._sheaf_sets = {x: [] for x in datum.R.objects}
        self._windows = {}
        self._frozen = False

    # sheaf bookkeeping ------------------------------------------------

    def add_sheaf(self, x, presheaf):
        """Register section data (a presheaf on E(sp x)) in x's window."""
        key = presheaf.key()
        for existing, _ in self._sheaf_sets[x]:
            if existing == key:
                return key
        if self._frozen:
            raise ValidationError(
                "window context is frozen; register all sheaves before packaging"
            )
        self._sheaf_sets[x].append((key, presheaf))
        self._windows.clear()
        return key

    def prepare(self, sessions):
        """Collect the lifted sheaves of every registered arrow's endpoints
        from the given sessions, close under pushforwards and freeze."""
        for session in sessions:
            for a in self.arrow_ids:
                x, y = self.datum.R.arrows[a]
                self.add_sheaf(x, session.lifted_object(x).sheaf.presheaf)
                self.add_sheaf(y, session.lifted_object(y).sheaf.presheaf)
        self.close_under_pushforwards()
        self._frozen = True

    def close_under_pushforwards(self, rounds=3):
        datum = self.datum
        for _ in range(rounds):
            grown = False
            for a in self.arrow_ids:
                x, y = datum.R.arrows[a]
                t_arrow = datum.sp.amap[a]
                action = datum.eps.action[t_arrow]
                for key, F in list(self._sheaf_sets[x]):
                    pf = pushforward_presheaf(
                        F, action, datum.eps.E[datum.sp.omap[y]], self.ops
                    )
                    before = len(self._sheaf_sets[y])
                    self.add_sheaf(y, pf)
                    if len(self._sheaf_sets[y]) != before:
                        grown = True
            if not grown:
                return
        raise CapExceeded("pushforward closure did not stabilize")

    def window(self, x):
        if x in self._windows:
            return self._windows[x]
        datum, ops = self.datum, self.ops
        tokens, sheaves, sheaf_token = [], {}, {}
        for i, (key, F) in enumerate(self._sheaf_sets[x]):
            tok = f"Sh{i}"
            tokens.append(tok)
            sheaves[tok] = F
            sheaf_token[key] = tok
        morphisms, morph_token = {}, {}
        arrows, identity = {}, {}
        count = 0
        for t_dom in tokens:
            for t_cod in tokens:
                # Sh morphisms t_cod -> t_dom give opp arrows t_dom -> t_cod
                for comps in sheaf_morphisms(
                    sheaves[t_cod], sheaves[t_dom], ops, cap=self.cap
                ):
                    name = f"m{count}"
                    count += 1
                    arrows[name] = (t_dom, t_cod)
                    morphisms[name] = (t_dom, t_cod, comps)
                    morph_token[(t_dom, t_cod, _components_key(ops, comps))] = name
                    if t_dom == t_cod and all(
                        ops.equal_morphisms(
                            comps[o], ops.identity(sheaves[t_dom].value(o))
                        )
                        for o in sheaves[t_dom].site.objects
                    ):
                        identity[t_dom] = name
        comp = {}
        for n2, (d2, c2) in arrows.items():
            for n1, (d1, c1) in arrows.items():
                if c1 != d2:
                    continue
                # opp composition: underlying Sh morphisms compose the other way
                f2, f1 = morphisms[n2][2], morphisms[n1][2]
                comps = {
                    o: ops.compose(f1[o], f2[o]) for o in f1
                }
                comp[(n2, n1)] = morph_token[(d1, c2, _components_key(ops, comps))]
        shopp = FinCat(tokens, arrows, comp, identity)
        cat = fincat.product(datum.T, shopp)
        win = Window(cat, sheaf_token, sheaves, morph_token, morphisms, shopp)
        self._windows[x] = win
        return win

    def marked_object(self, x, sheaf_key):
        win = self.window(x)
        base = self.datum.sp.omap[x]
        token = f"({base},{win.sheaf_token[sheaf_key]})"
        return omega.PointedCat(win.cat, token)

    # the lifted arrow ---------------------------------------------------

    def pushforward_functor(self, a):
        """P = id_T x (sp a)_* between the windows of the endpoints."""
        datum, ops = self.datum, self.ops
        x, y = datum.R.arrows[a]
        win_x, win_y = self.window(x), self.window(y)
        t_arrow = datum.sp.amap[a]
        action = datum.eps.action[t_arrow]
        target_site = datum.eps.E[datum.sp.omap[y]]
        sh_omap, sh_amap = {}, {}
        for tok, F in win_x.sheaves.items():
            pf = pushforward_presheaf(F, action, target_site, ops)
            key = pf.key()
            if key not in win_y.sheaf_token:
                raise ValidationError(
                    f"window of {y!r} is not closed under the pushforward of {a!r}"
                )
            sh_omap[tok] = win_y.sheaf_token[key]
        for name, (d, c, comps) in win_x.morphisms.items():
            pushed = pushforward_components(comps, action, target_site)
            key = (sh_omap[d], sh_omap[c], _components_key(ops, pushed))
            sh_amap[name] = win_y.morph_token[key]
        shf = Functor(win_x.shopp, win_y.shopp, sh_omap, sh_amap)
        omap, amap = {}, {}
        for o in win_x.cat.objects:
            t, sh = win_x.cat._obj_parts[o]
            omap[o] = f"({t},{shf.omap[sh]})"
        for arr in win_x.cat.arrows:
            u, m = win_x.cat._pair_parts[arr]
            amap[arr] = f"({u},{shf.amap[m]})"
        return Functor(win_x.cat, win_y.cat, omap, amap, check=False)

    def omega_arrow(self, a, src_key, dst_key, sharp_components, unique=False):
        """Package (sp a, sharp) as a pointed correspondence between the
        windows: the twist of the pushforward product functor, pointed at
        the pair token."""
        datum, ops = self.datum, self.ops
        x, y = datum.R.arrows[a]
        win_x, win_y = self.window(x), self.window(y)
        P = self.pushforward_functor(a)
        src = self.marked_object(x, src_key)
        dst = self.marked_object(y, dst_key)
        tw = omega.kappa_twist(P, src.point)
        push_tok = P.omap[src.point]
        _, push_sh = win_y.cat._obj_parts[push_tok]
        dst_sh = win_y.sheaf_token[dst_key]
        m_tok = win_y.morph_token[
            (push_sh, dst_sh, _components_key(ops, sharp_components))
        ]
        point = f"({datum.sp.amap[a]},{m_tok})"
        arrow = omega.OmegaArrow(src, dst, tw.prof, point)
        arrow.sharp = sharp_components
        arrow.sp_arrow = datum.sp.amap[a]
        arrow.unique = unique
        return arrow

    def kappa_of_window(self, x, pair_arrow_token):
        """kappa of the window category pointed at one of its arrows; used
        for comparison isomorphisms between lifts."""
        win = self.window(x)
        return omega.kappa_arrow(win.cat, pair_arrow_token)


def lift_arrow(session, context, a, cap=None):
    """The lift of an arrow: search the comparison morphism satisfying the
    local fibre condition on some covering family, and package it over the
    windows.  Reports uniqueness when the epi criterion holds."""
    datum, ops = session.datum, context.ops
    x, y = datum.R.arrows[a]
    lo_x, lo_y = session.lifted_object(x), session.lifted_object(y)
    if not context._frozen:
        context.prepare([session])
    t_arrow = datum.sp.amap[a]
    action = datum.eps.action[t_arrow]
    site_y = lo_y.site
    pf = pushforward_presheaf(lo_x.sheaf.presheaf, action, site_y, ops)
    h = datum.O_arr[a]
    base_y, base_x = lo_y.base, lo_x.base
    tau_y = induced_topology(datum, base_y)
    top_y, top_x = datum.eps.terminal[base_y], datum.eps.terminal[base_x]
    glob_y, glob_x = session.canonical_global_map(y), session.canonical_global_map(x)

    def r_to(lifted, glob, small, top):
        return ops.compose(
            lifted.sheaf.presheaf.restrict_to(small, top), glob
        )

    def satisfies(components):
        for v in site_y.objects:
            ok_cover = False
            for fam in tau_y.families(v):
                if all(
                    fibre_condition(
                        ops,
                        r_to(lo_y, glob_y, site_y.dom(arr), top_y),
                        h,
                        r_to(lo_x, glob_x, action[site_y.dom(arr)], top_x),
                        components[site_y.dom(arr)],
                        datum.O_obj[y],
                        datum.O_obj[x],
                        lo_y.sheaf.value(site_y.dom(arr)),
                        pf.value(site_y.dom(arr)),
                    )
                    for arr in fam
                ):
                    ok_cover = True
                    break
            if not ok_cover:
                return False
        return True

    candidates = sheaf_morphisms(lo_y.sheaf.presheaf, pf, ops, cap=cap)
    found = [c for c in candidates if satisfies(c)]
    if not found:
        raise NoLift(f"no comparison morphism satisfies the fibre condition at {a!r}")
    monic = all(
        ops.is_surjective(
            lo_y.sheaf.presheaf.restrict_to(v, top_y), lo_y.sheaf.value(v)
        )
        for v in site_y.objects
    )
    unique = monic and len(found) == 1
    return context.omega_arrow(
        a, lo_x.sheaf.key(), lo_y.sheaf.key(), found[0], unique=unique
    )


def sheaf_isomorphisms(F, G, ops, cap=None):
    return [
        comps
        for comps in sheaf_morphisms(F, G, ops, cap=cap)
        if all(
            len(set(_mapping_of(ops, comps[o]).values()))
            == len(ops.carrier(F.value(o)))
            == len(ops.carrier(G.value(o)))
            for o in F.site.objects
        )
    ]


def _mapping_of(ops, morphism):
    return morphism.mapping if ops.kind == "ring" else morphism


def comparison_isomorphism(context, x, key1, key2, cap=None):
    """An invertible pointed correspondence between two marked sheaves over
    the same object: kappa of the window at the pair arrow carrying a sheaf
    isomorphism."""
    win = context.window(x)
    ops = context.ops
    tok1, tok2 = win.sheaf_token[key1], win.sheaf_token[key2]
    F1, F2 = win.sheaves[tok1], win.sheaves[tok2]
    # an opp arrow tok1 -> tok2 is a Sh morphism F2 -> F1
    isos = sheaf_isomorphisms(F2, F1, ops, cap=cap)
    if not isos:
        raise NoLift(f"no sheaf isomorphism over {x!r}")
    m_tok = win.morph_token[(tok1, tok2, _components_key(ops, isos[0]))]
    base = context.datum.sp.omap[x]
    pair = f"({context.datum.T.id_(base)},{m_tok})"
    return omega.kappa_arrow(win.cat, pair)


def lifts_pointwise_isomorphic(session1, session2, context, arrows=None, cap=None):
    """Two lifts of the same datum are related by an isomorphism of functors:
    comparison isomorphisms per object, natural up to correspondence equality
    on every lifted arrow."""
    datum = session1.datum
    arrows = list(arrows if arrows is not None else context.arrow_ids)
    if not context._frozen:
        context.prepare([session1, session2])
    eta = {}
    for x in datum.R.objects:
        k1 = session1.lifted_object(x).sheaf.key()
        k2 = session2.lifted_object(x).sheaf.key()
        eta[x] = comparison_isomorphism(context, x, k1, k2, cap=cap)
    for a in arrows:
        x, y = datum.R.arrows[a]
        l1 = lift_arrow(session1, context, a, cap=cap)
        l2 = lift_arrow(session2, context, a, cap=cap)
        left = omega.compose(eta[y], l1, cap=cap)
        right = omega.compose(l2, eta[x], cap=cap)
        dec = omega.arrows_equal(left, right, cap=cap)
        if not dec:
            return Decision(False, witness=(a, "naturality fails"))
    return Decision(True, witness=eta)


# -- global sections -----------------------------------------------------------------


def global_sections(session, x):
    """Sections at the terminal admissible object."""
    return session.global_sections(x)


def global_sections_arrow(session, context, a, lifted=None, cap=None):
    """The induced value morphism of a lifted arrow: its comparison component
    at the terminal object, viewed against the canonical global maps."""
    datum = session.datum
    x, y = datum.R.arrows[a]
    la = lifted if lifted is not None else lift_arrow(session, context, a, cap=cap)
    top_y = datum.eps.terminal[session.lifted_object(y).base]
    return la.sharp[top_y]


# -- the locally affine subcategory ----------------------------------------------------


PI_MEMBER, PI_NON_MEMBER, PI_UNDECIDED = "member", "non-member", "undecided"


def chart_arrows(session, context, x, cap=None):
    """Lifts of the arrows into x realizing admissible objects: the charts
    that cover a lifted object, grouped per covering family of the base."""
    datum = session.datum
    base = datum.sp.omap[x]
    realized = {arrow: e for e, arrow in datum.eps.eps_obj[base].items()}
    charts = {}
    for u, (dom_r, cod_r) in datum.R.arrows.items():
        if cod_r != x:
            continue
        image = datum.sp.amap[u]
        if image in realized:
            charts[image] = u
    families = []
    for fam in datum.tau.families(base):
        if all(arr in charts for arr in fam):
            families.append(tuple(charts[arr] for arr in fam))
    return families


def pi_sch_membership(
    session,
    context,
    arrow,
    src_x,
    dst_y,
    depth=3,
    cap=None,
    families_x=None,
    families_y=None,
):
    """Does the arrow locally factor through lifts?  Searches covering chart
    families of both endpoints for factorizations v o lift(phi') = arrow o u
    up to correspondence equality.  Candidate cover sets may be supplied
    (families of R arrows realizing charts); otherwise every family from the
    topology is tried.  The family table is finite, so the search is
    exhaustive up to 4**depth families per side; beyond that the outcome is
    reported undecided rather than false."""
    datum = session.datum
    fams_x = (
        [tuple(f) for f in families_x]
        if families_x is not None
        else chart_arrows(session, context, src_x, cap=cap)
    )
    fams_y = (
        [tuple(f) for f in families_y]
        if families_y is not None
        else chart_arrows(session, context, dst_y, cap=cap)
    )
    if not fams_x or not fams_y:
        return PI_NON_MEMBER, None
    limit = 4**depth
    tried_all = len(fams_x) <= limit and len(fams_y) <= limit
    for fam_x in fams_x[:limit]:
        for fam_y in fams_y[:limit]:
            assignment = []
            ok = True
            for u in fam_x:
                u_lift = lift_arrow(session, context, u, cap=cap)
                composed = omega.compose(arrow, u_lift, cap=cap)
                found = None
                w = datum.R.dom(u)
                for phi2 in datum.R.arrows:
                    if datum.R.dom(phi2) != w:
                        continue
                    for v in fam_y:
                        if datum.R.dom(v) != datum.R.cod(phi2):
                            continue
                        v_lift = lift_arrow(session, context, v, cap=cap)
                        phi_lift = lift_arrow(session, context, phi2, cap=cap)
                        cand = omega.compose(v_lift, phi_lift, cap=cap)
                        if omega.arrows_equal(cand, composed, cap=cap):
                            found = (u, phi2, v)
                            break
                    if found:
                        break
                if not found:
                    ok = False
                    break
                assignment.append(found)
            if ok:
                return PI_MEMBER, assignment
    return (PI_NON_MEMBER, None) if tried_all else (PI_UNDECIDED, None)


# -- the sections functor on generated subcategories -----------------------------------


def gamma_hypothesis(diagram_f, diagram_g, t, cap=None):
    """Automorphisms of the identity lift along the transformation (strong
    reading): for every automorphism on the source side some automorphism on
    the target side gives the same whiskered family."""
    for i in diagram_f.index.objects:
        F_i, G_i = diagram_f.obj_map[i], diagram_g.obj_map[i]
        t_i = t[i]
        for phi in fincat.aut_of_identity(F_i, cap=cap):
            lifted = False
            for psi in fincat.aut_of_identity(G_i, cap=cap):
                if all(
                    t_i.amap[phi.components[x]] == psi.components[t_i.omap[x]]
                    for x in F_i.objects
                ):
                    lifted = True
                    break
            if not lifted:
                return Decision(False, witness=(i, phi))
    return Decision(True)


def gamma_generator(diagram_f, diagram_g, t, gen_record):
    """Image of a generator arrow under the sections transformation:
    replace the diagram functor and push the point through t."""
    (arrow_i, phi, c0) = gen_record
    G = diagram_g.arr_map[arrow_i]
    t_cod = t[diagram_g.index.cod(arrow_i)]
    tw = omega.kappa_twist(G, c0)
    point = t_cod.amap[phi]
    dst = omega.PointedCat(G.target, G.target.cod(point))
    return omega.OmegaArrow(tw.src, dst, tw.prof, point)


def generator_records(diagram):
    out = []
    for a in diagram.index.arrows:
        F = diagram.arr_map[a]
        for phi in F.target.arrows:
            for c0 in F.source.objects:
                if F.omap[c0] == F.target.dom(phi):
                    out.append((a, phi, c0))
    return out


def _generator_arrow(diagram, rec):
    a, phi, c0 = rec
    F = diagram.arr_map[a]
    tw = omega.kappa_twist(F, c0)
    dst = omega.PointedCat(F.target, F.target.cod(phi))
    return omega.OmegaArrow(tw.src, dst, tw.prof, phi)


def separated_check(diagram_f, diagram_g, t, x, probes, depth=2, cap=None):
    """Injectivity of the sections transformation on each probe hom set,
    restricted to the generated arrows enumerable at the depth cap.  Needs
    the lifting hypothesis; the witness on failure is a collapsing pair."""
    hyp = gamma_hypothesis(diagram_f, diagram_g, t, cap=cap)
    if not hyp:
        raise KappaNotFaithful(f"automorphism lifting fails: {hyp.witness}")
    recs = generator_records(diagram_f)
    pairs = [
        (_generator_arrow(diagram_f, r), gamma_generator(diagram_f, diagram_g, t, r))
        for r in recs
    ]
    words = [(f, g, [i]) for i, (f, g) in enumerate(pairs)]
    for _ in range(depth - 1):
        grown = []
        for f, g, w in words:
            for i, (f2, g2) in enumerate(pairs):
                if f.dst == f2.src:
                    grown.append(
                        (
                            omega.compose(f2, f, cap=cap),
                            omega.compose(g2, g, cap=cap),
                            w + [i],
                        )
                    )
        words += grown
    for y in probes:
        hom = [(f, g, w) for f, g, w in words if f.src == y and f.dst == x]
        for i in range(len(hom)):
            for j in range(i + 1, len(hom)):
                f1, g1, w1 = hom[i]
                f2, g2, w2 = hom[j]
                distinct = not omega.arrows_equal(f1, f2, cap=cap)
                if distinct and omega.arrows_equal(g1, g2, cap=cap):
                    return Decision(False, witness=(w1, w2))
    return Decision(True)


# -- admissibility constructions ---------------------------------------------------------


def poset_admissibility(cat):
    """The standard admissibility of a poset: every over-arrow is admissible
    and the identity is the terminal witness."""
    E, eps_obj, action, terminal = {}, {}, {}, {}
    for c in cat.objects:
        over = fibre(cat, c)
        E[c] = over
        eps_obj[c] = {o: poset_arrow(cat, o, c) for o in over.objects}
        terminal[c] = c
    for f, (c1, c2) in cat.arrows.items():
        action[f] = {o: poset_meet(cat, o, c1) for o in E[c2].objects}
    return AdmissibilityStructure(cat, E, eps_obj, action, terminal)


@dataclass
class OmegaAdmissibility:
    """An admissibility structure whose sites live over pointed categories:
    per marked object a category of correspondence arrows over it."""

    sites: dict      # key -> FinCat
    realization: dict  # key -> {site object: OmegaArrow over the mark}
    terminal: dict   # key -> site object


def _over_category(objects, candidates, cap=None):
    """The category with the given correspondence arrows as objects and the
    candidate arrows w with o2 o w ~ o1 as morphisms."""
    tokens = {f"o{i}": arr for i, arr in enumerate(objects)}
    arrows, identity = {}, {}
    morph = {}
    count = 0
    for t1, o1 in tokens.items():
        for t2, o2 in tokens.items():
            for w in candidates:
                if w.src != o1.src or w.dst != o2.src:
                    continue
                try:
                    comp = omega.compose(o2, w, cap=cap)
                except Exception:
                    continue
                if not omega.arrows_equal(comp, o1, cap=cap):
                    continue
                # morphisms are classes of correspondences; keep one token
                if any(
                    e == (t1, t2) and omega.arrows_equal(morph[n], w, cap=cap)
                    for n, e in arrows.items()
                ):
                    continue
                name = f"w{count}"
                count += 1
                arrows[name] = (t1, t2)
                morph[name] = w
                if t1 == t2 and omega.arrows_equal(
                    w, omega.identity_arrow(o1.src), cap=cap
                ):
                    identity.setdefault(t1, name)
    comp_table = {}
    for n2, (d2, c2) in arrows.items():
        for n1, (d1, c1) in arrows.items():
            if c1 != d2:
                continue
            composite = omega.compose(morph[n2], morph[n1], cap=cap)
            target = None
            for n3, (d3, c3) in arrows.items():
                if d3 == d1 and c3 == c2 and omega.arrows_equal(
                    morph[n3], composite, cap=cap
                ):
                    target = n3
                    break
            if target is None:
                raise ValidationError("over-category is not closed under composition")
            comp_table[(n2, n1)] = target
    cat = FinCat(list(tokens), arrows, comp_table, identity)
    return cat, tokens


def glue_admissibility(pi1, pi2, eps1, eps2, lam, cap=None):
    """Glue two admissibility structures along a functor via cotwists.

    For a marked object of the first category the admissible objects are the
    composites kappa(u) o cotwist(dom u) o kappa(v); over the second category
    the original admissibility is kept."""
    for c, name in ((pi1, "first"), (pi2, "second")):
        if not omega.kappa_faithful(c, cap=cap):
            raise KappaNotFaithful(f"the {name} category has a nontrivial identity automorphism")
    sites, realization, terminal = {}, {}, {}
    for x in pi1.objects:
        objects = []
        for u_obj in eps1.E[x].objects:
            u = eps1.eps_obj[x][u_obj]
            ku = omega.kappa_arrow(pi1, u)
            objects.append(ku)
            du = pi1.dom(u)
            cot = omega.kappa_cotwist(lam, du)
            for v_obj in eps2.E[lam.omap[du]].objects:
                v = eps2.eps_obj[lam.omap[du]][v_obj]
                kv = omega.kappa_arrow(pi2, v)
                composite = omega.compose(
                    ku, omega.compose(cot, kv, cap=cap), cap=cap
                )
                objects.append(composite)
        # deduplicate up to correspondence equality
        distinct = []
        for o in objects:
            if not any(
                o.src == p.src and omega.arrows_equal(o, p, cap=cap)
                for p in distinct
            ):
                distinct.append(o)
        candidates = [
            omega.kappa_arrow(pi1, w) for w in pi1.arrows
        ] + [omega.kappa_arrow(pi2, w) for w in pi2.arrows] + [
            omega.kappa_cotwist(lam, c0) for c0 in pi1.objects
        ]
        cat, tokens = _over_category(distinct, candidates, cap=cap)
        key = ("glued", x)
        sites[key] = cat
        realization[key] = {t: tokens[t] for t in cat.objects}
        term = None
        for t in cat.objects:
            if all(cat.hom(o, t) for o in cat.objects):
                if omega.arrows_equal(
                    tokens[t], omega.identity_arrow(tokens[t].dst), cap=cap
                ):
                    term = t
                    break
        if term is None:
            raise ValidationError(f"no terminal witness over {x!r}")
        terminal[key] = term
    for x in pi2.objects:
        key = ("second", x)
        sites[key] = eps2.E[x]
        realization[key] = {
            o: omega.kappa_arrow(pi2, eps2.eps_obj[x][o]) for o in eps2.E[x].objects
        }
        terminal[key] = eps2.terminal[x]
    return OmegaAdmissibility(sites, realization, terminal)


def path_admissibility(t_cat, eps, cap=None):
    """The admissibility on path-augmented data: per object, both the plain
    hom correspondences at admissible arrows and their concatenation-twisted
    versions, with path correspondences as morphisms."""
    from . import pathcat

    if not omega.kappa_faithful(t_cat, cap=cap):
        raise KappaNotFaithful("the base category has a nontrivial identity automorphism")
    pc = pathcat.path(t_cat)
    if pc.truncated:
        raise NotAcyclic("the path category must be finite")
    P = pathcat.concat_functor(pc, t_cat)
    sites, realization, terminal = {}, {}, {}
    for x in t_cat.objects:
        objects = []
        for u_obj in eps.E[x].objects:
            u = eps.eps_obj[x][u_obj]
            objects.append(omega.kappa_arrow(t_cat, u))
            # the concatenation-twisted version: Hom_T(P(-), -) pointed at u
            tw = omega.kappa_twist(P, t_cat.dom(u))
            twisted = omega.OmegaArrow(
                tw.src, omega.PointedCat(t_cat, t_cat.cod(u)), tw.prof, u
            )
            objects.append(twisted)
        distinct = []
        for o in objects:
            if not any(
                o.src == p.src and omega.arrows_equal(o, p, cap=cap)
                for p in distinct
            ):
                distinct.append(o)
        candidates = [omega.kappa_arrow(t_cat, w) for w in t_cat.arrows]
        admissible_images = {
            eps.eps_obj[x][o] for o in eps.E[x].objects
        }
        # close up with the identity paths the category structure requires
        with_ids = admissible_images | {
            t_cat.id_(t_cat.dom(u)) for u in admissible_images
        }
        candidates += [
            omega.kappa_arrow(pc.cat, w)
            for w in pc.cat.arrows
            if P.amap[w] in with_ids
        ]
        for u in admissible_images:
            tw = omega.kappa_twist(P, t_cat.dom(u))
            candidates.append(
                omega.OmegaArrow(
                    tw.src, omega.PointedCat(t_cat, t_cat.cod(u)), tw.prof, u
                )
            )
        cat, tokens = _over_category(distinct, candidates, cap=cap)
        sites[x] = cat
        realization[x] = {t: tokens[t] for t in cat.objects}
        term = None
        for t in cat.objects:
            if all(cat.hom(o, t) for o in cat.objects) and omega.arrows_equal(
                tokens[t], omega.identity_arrow(tokens[t].dst), cap=cap
            ):
                term = t
                break
        if term is None:
            raise ValidationError(f"no terminal witness over {x!r}")
        terminal[x] = term
    return OmegaAdmissibility(sites, realization, terminal)
