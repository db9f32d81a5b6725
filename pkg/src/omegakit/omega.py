"""Pointed categories and pointed correspondences.

An arrow (C,x) -> (D,y) is represented by a Profunctor (a validated functor
C^opp x D -> FinSet given by value-set and action tables) plus a distinguished
element of values(x, y).  Arrows are never canonicalized: every comparison
goes through arrows_equal, which searches for a natural isomorphism of
profunctors carrying one point to the other.

Composition quotients the middle disjoint union by the closure of the
middle-arrow relation: for each h: y -> y', each phi in F(-, y) and each
psi' in G(y', -),

    (y, phi, G(h, id)(psi'))  ~  (y', F(id, h)(phi), psi').

Class representatives are chosen deterministically (lexicographic minimum),
and well-definedness of the induced action on classes is asserted after
construction.
"""

import itertools
from dataclasses import dataclass

from .caps import Budget
from .errors import Incomposable, ValidationError
from .fincat import Decision, EquivRelation, FinCat, aut_of_identity
from . import fincat


@dataclass(frozen=True)
class PointedCat:
    cat: FinCat
    point: str

    def __post_init__(self):
        if self.point not in self.cat.objects:
            raise ValidationError(f"{self.point!r} is not an object of the category")

    def __repr__(self):
        return f"PointedCat({len(self.cat.objects)} objects, point={self.point!r})"


class Profunctor:
    """values[(c,d)]: finite set; action[(f,g)] maps values[(cod f, dom g)]
    to values[(dom f, cod g)] (contravariant on the left leg)."""

    def __init__(self, left, right, values, action, check=True):
        self.left = left
        self.right = right
        self.values = {k: tuple(v) for k, v in values.items()}
        self.action = {k: dict(m) for k, m in action.items()}
        if check:
            self._validate()

    def value(self, c, d):
        return self.values[(c, d)]

    def act(self, f, g, element):
        return self.action[(f, g)][element]

    def _pair_ends(self, f, g):
        src = (self.left.cod(f), self.right.dom(g))
        dst = (self.left.dom(f), self.right.cod(g))
        return src, dst

    def _validate(self):
        for c in self.left.objects:
            for d in self.right.objects:
                if (c, d) not in self.values:
                    raise ValidationError(f"no value set at ({c!r},{d!r})")
        for f in self.left.arrows:
            for g in self.right.arrows:
                m = self.action.get((f, g))
                if m is None:
                    raise ValidationError(f"no action at ({f!r},{g!r})")
                src, dst = self._pair_ends(f, g)
                if set(m) != set(self.values[src]) or not set(m.values()) <= set(
                    self.values[dst]
                ):
                    raise ValidationError(f"action at ({f!r},{g!r}) is not a map")
        for c in self.left.objects:
            for d in self.right.objects:
                m = self.action[(self.left.id_(c), self.right.id_(d))]
                if any(m[e] != e for e in self.values[(c, d)]):
                    raise ValidationError(
                        f"identity action at ({c!r},{d!r}) is not the identity"
                    )
        # contravariant in the left leg, covariant in the right:
        # action(f o f', g' o g) == action(f', g') o action(f, g)
        for f2, f1 in self.left.composable_pairs():
            fc = self.left.compose(f2, f1)
            for g2, g1 in self.right.composable_pairs():
                gc = self.right.compose(g2, g1)
                src, _ = self._pair_ends(fc, gc)
                outer = self.action[(fc, gc)]
                first = self.action[(f2, g1)]
                second = self.action[(f1, g2)]
                for e in self.values[src]:
                    if outer[e] != second[first[e]]:
                        raise ValidationError(
                            f"functoriality fails at ({f2!r},{f1!r};{g2!r},{g1!r})"
                        )

    def cardinality_profile(self):
        return {k: len(v) for k, v in self.values.items()}


class OmegaArrow:
    def __init__(self, src, dst, prof, point, check=True):
        self.src = src
        self.dst = dst
        self.prof = prof
        self.point = point
        if check:
            if prof.left != src.cat or prof.right != dst.cat:
                raise ValidationError("correspondence legs do not match endpoints")
            if point not in prof.value(src.point, dst.point):
                raise ValidationError(
                    "distinguished element is not over the base points"
                )

    def __repr__(self):
        return f"OmegaArrow({self.src.point!r} -> {self.dst.point!r}, point={self.point!r})"


# -- basic constructions ---------------------------------------------------


def hom_profunctor(c):
    """values(a,b) = Hom_c(a,b); action by pre/post-composition."""
    values = {(a, b): c.hom(a, b) for a in c.objects for b in c.objects}
    action = {}
    for f in c.arrows:
        for g in c.arrows:
            src = (c.cod(f), c.dom(g))
            action[(f, g)] = {
                e: c.compose(g, c.compose(e, f)) for e in values[src]
            }
    return Profunctor(c, c, values, action, check=False)


def identity_arrow(p):
    return OmegaArrow(p, p, hom_profunctor(p.cat), p.cat.id_(p.point))


def terminal_profunctor(c, d):
    """All value sets are singletons; every hom set of the big category is
    inhabited because of these."""
    values = {(a, b): ("*",) for a in c.objects for b in d.objects}
    action = {(f, g): {"*": "*"} for f in c.arrows for g in d.arrows}
    return Profunctor(c, d, values, action, check=False)


def terminal_arrow(src, dst):
    return OmegaArrow(src, dst, terminal_profunctor(src.cat, dst.cat), "*")


def kappa_object(c, x):
    return PointedCat(c, x)


def kappa_arrow(c, phi):
    """kappa sends an arrow to the hom correspondence pointed at that arrow."""
    d, cc = c.arrows[phi]
    return OmegaArrow(PointedCat(c, d), PointedCat(c, cc), hom_profunctor(c), phi)


def kappa_twist(f, c_obj):
    """Hom_D((F-)(.), .) pointed at id_{F(c)}: an arrow (C,c) -> (D,F(c))."""
    C, D = f.source, f.target
    values = {(a, b): D.hom(f.omap[a], b) for a in C.objects for b in D.objects}
    action = {}
    for u in C.arrows:
        fu = f.amap[u]
        for g in D.arrows:
            src = (C.cod(u), D.dom(g))
            action[(u, g)] = {
                e: D.compose(g, D.compose(e, fu)) for e in values[src]
            }
    prof = Profunctor(C, D, values, action, check=False)
    fc = f.omap[c_obj]
    return OmegaArrow(PointedCat(C, c_obj), PointedCat(D, fc), prof, D.id_(fc))


def kappa_cotwist(f, c_obj):
    """Hom_D(., F(.)) pointed at id_{F(c)}: an arrow (D,F(c)) -> (C,c)."""
    C, D = f.source, f.target
    values = {(b, a): D.hom(b, f.omap[a]) for b in D.objects for a in C.objects}
    action = {}
    for g in D.arrows:
        for u in C.arrows:
            fu = f.amap[u]
            src = (D.cod(g), C.dom(u))
            action[(g, u)] = {
                e: D.compose(fu, D.compose(e, g)) for e in values[src]
            }
    prof = Profunctor(D, C, values, action, check=False)
    fc = f.omap[c_obj]
    return OmegaArrow(PointedCat(D, fc), PointedCat(C, c_obj), prof, D.id_(fc))


# -- composition ------------------------------------------------------------


def _raw_label(d, phi, psi):
    return f"<{d}|{phi}|{psi}>"


def compose(g, f, cap=None):
    """g after f in the category of pointed correspondences.

    Carrier at (c,e): disjoint union over middle objects d of
    F(c,d) x G(d,e), quotiented by the middle-arrow relation.
    """
    if f.dst != g.src:
        raise Incomposable("inner endpoints do not match")
    F, G = f.prof, g.prof
    C, D, E = F.left, F.right, G.right
    budget = Budget(cap, "omega compose")

    carriers = {}   # (c,e) -> list of raw labels
    raw_parts = {}  # raw label -> (d, phi, psi)
    classes = {}    # (c,e) -> EquivRelation on raw labels
    for c in C.objects:
        for e in E.objects:
            raw = []
            for d in D.objects:
                for phi in F.value(c, d):
                    for psi in G.value(d, e):
                        lab = _raw_label(d, phi, psi)
                        raw.append(lab)
                        raw_parts[lab] = (d, phi, psi)
            budget.spend(len(raw))
            rel = EquivRelation(raw)
            for h in D.arrows:
                y, y2 = D.arrows[h]
                for phi in F.value(c, y):
                    phi2 = F.act(C.id_(c), h, phi)
                    for psi2 in G.value(y2, e):
                        psi = G.act(h, E.id_(e), psi2)
                        rel.union(
                            _raw_label(y, phi, psi), _raw_label(y2, phi2, psi2)
                        )
            carriers[(c, e)] = raw
            classes[(c, e)] = rel

    values = {}
    for key, raw in carriers.items():
        reps = sorted({classes[key].find(lab) for lab in raw})
        values[key] = tuple(reps)

    def act_raw(u, w, lab):
        d, phi, psi = raw_parts[lab]
        phi2 = F.act(u, D.id_(d), phi)
        psi2 = G.act(D.id_(d), w, psi)
        return _raw_label(d, phi2, psi2)

    action = {}
    for u in C.arrows:
        for w in E.arrows:
            src = (C.cod(u), E.dom(w))
            dst = (C.dom(u), E.cod(w))
            m = {}
            for rep in values[src]:
                m[rep] = classes[dst].find(act_raw(u, w, rep))
            action[(u, w)] = m
            # the action must be constant on classes, not just on the
            # chosen representatives
            for lab in carriers[src]:
                if classes[dst].find(act_raw(u, w, lab)) != m[classes[src].find(lab)]:
                    raise ValidationError(
                        f"quotient action ill-defined at ({u!r},{w!r})"
                    )

    prof = Profunctor(C, E, values, action, check=False)
    point_key = (f.src.point, g.dst.point)
    point = classes[point_key].find(_raw_label(f.dst.point, f.point, g.point))
    return OmegaArrow(f.src, g.dst, prof, point)


# -- equality ----------------------------------------------------------------


def arrows_equal(a, b, cap=None):
    """Decide whether a natural isomorphism of correspondences carries
    a.point to b.point.  Pre-filters by pointwise cardinalities, then runs a
    backtracking component search in object-pair order."""
    if a.src != b.src or a.dst != b.dst:
        raise IncomparableArrows("arrows have different endpoints")
    F, G = a.prof, b.prof
    C, D = F.left, F.right
    if F.cardinality_profile() != G.cardinality_profile():
        return Decision(False, reason="pointwise cardinalities differ")

    budget = Budget(cap, "arrows_equal")
    base = (a.src.point, a.dst.point)
    pairs = sorted(
        ((c, d) for c in C.objects for d in D.objects),
        key=lambda p: (p != base, p),
    )
    pair_index = {p: i for i, p in enumerate(pairs)}
    assignment = {}

    action_pairs = [
        (f, g, (C.cod(f), D.dom(g)), (C.dom(f), D.cod(g)))
        for f in C.arrows
        for g in D.arrows
    ]
    touching = {p: [] for p in pairs}
    for f, g, src, dst in action_pairs:
        touching[src].append((f, g, src, dst))
        if dst != src:
            touching[dst].append((f, g, src, dst))

    def consistent(p):
        for f, g, src, dst in touching[p]:
            ms, md = assignment.get(src), assignment.get(dst)
            if ms is None or md is None:
                continue
            for e in F.value(*src):
                if md[F.act(f, g, e)] != G.action[(f, g)][ms[e]]:
                    return False
        return True

    def bijections(xs, ys):
        for perm in itertools.permutations(ys):
            yield dict(zip(xs, perm))

    # iterative backtracking: the window categories can have hundreds of
    # object pairs, too deep for the call stack
    iters = [None] * len(pairs)
    found = None
    i = 0
    while True:
        if i == len(pairs):
            found = dict(assignment)
            break
        p = pairs[i]
        if iters[i] is None:
            iters[i] = bijections(F.value(*p), G.value(*p))
        advanced = False
        for m in iters[i]:
            budget.spend()
            if p == base and m[a.point] != b.point:
                continue
            assignment[p] = m
            if consistent(p):
                advanced = True
                break
            del assignment[p]
        if advanced:
            i += 1
            continue
        iters[i] = None
        assignment.pop(p, None)
        i -= 1
        if i < 0:
            break
        assignment.pop(pairs[i], None)

    if found is None:
        return Decision(False, reason="no natural isomorphism carries the points")
    return Decision(True, witness=found)


class IncomparableArrows(ValidationError):
    pass


# -- unit isomorphisms (checked, not assumed) --------------------------------


def left_unit_map(f):
    """The map (Hom_D *teta F) -> F on raw pairs: (psi', phi') -> F(psi', id)(phi').

    Returns {(c,d): {class-rep: image element}} for compose(identity, f),
    together with a bijectivity report per value set.
    """
    comp = compose(identity_arrow(f.dst), f)
    return _unit_comparison(comp, f, side="left")


def right_unit_map(f):
    comp = compose(f, identity_arrow(f.src))
    return _unit_comparison(comp, f, side="right")


def _unit_comparison(comp, f, side):
    F = f.prof
    C, D = F.left, F.right
    maps = {}
    bijective = True
    for c in C.objects:
        for d in D.objects:
            m = {}
            for rep in comp.prof.value(c, d):
                mid, x1, x2 = rep[1:-1].split("|")
                if side == "left":
                    # pair (phi in F(c,mid), psi in Hom_D(mid,d))
                    m[rep] = F.act(C.id_(c), x2, x1)
                else:
                    # pair (phi in Hom_C(c,mid), psi in F(mid,d))
                    m[rep] = F.act(x1, D.id_(d), x2)
            maps[(c, d)] = m
            image = set(m.values())
            if len(image) != len(m) or image != set(F.value(c, d)):
                bijective = False
    point_ok = maps[(f.src.point, f.dst.point)][comp.point] == f.point
    return Decision(bijective and point_ok, witness=maps)


# -- generated subcategories of the big category -----------------------------


class CatDiagram:
    """A functor from a finite index category to categories: the data of
    a category per index object and a functor per index arrow."""

    def __init__(self, index, obj_map, arr_map, check=True):
        self.index = index
        self.obj_map = dict(obj_map)
        self.arr_map = dict(arr_map)
        if check:
            self._validate()

    def _validate(self):
        for i in self.index.objects:
            if i not in self.obj_map:
                raise ValidationError(f"no category at index object {i!r}")
        for a, (i, j) in self.index.arrows.items():
            f = self.arr_map.get(a)
            if f is None:
                raise ValidationError(f"no functor at index arrow {a!r}")
            if f.source != self.obj_map[i] or f.target != self.obj_map[j]:
                raise ValidationError(f"functor at {a!r} has wrong endpoints")
        for i in self.index.objects:
            f = self.arr_map[self.index.id_(i)]
            if f != fincat.identity_functor(self.obj_map[i]):
                raise ValidationError(f"identity index arrow {i!r} not the identity")
        for g, f in self.index.composable_pairs():
            h = self.index.compose(g, f)
            if self.arr_map[h] != fincat.compose_functors(
                self.arr_map[g], self.arr_map[f]
            ):
                raise ValidationError(f"diagram not functorial at ({g!r},{f!r})")


def pi_gamma_generators(diagram):
    """All generator arrows of the subcategory generated by a diagram:
    twists of the diagram functors, pointed at every arrow of the codomain."""
    out = []
    for a in diagram.index.arrows:
        F = diagram.arr_map[a]
        D = F.target
        for phi in D.arrows:
            d0 = D.dom(phi)
            for c0 in F.source.objects:
                if F.omap[c0] != d0:
                    continue
                tw = kappa_twist(F, c0)
                gen = OmegaArrow(
                    tw.src, PointedCat(D, D.cod(phi)), tw.prof, phi
                )
                out.append(gen)
    return out


MEMBER, NON_MEMBER, UNDECIDED = "member", "non-member", "undecided"


def pi_gamma_membership(diagram, arrow, depth=3, cap=None):
    """Bounded-depth decision of membership in the generated subcategory.

    Returns (status, witness).  Composites of generators are accumulated up
    to the depth cap, deduplicated up to correspondence equality; when a
    round adds no new class the generated hom sets are complete and a miss
    is a definitive non-member.  Otherwise a miss at the cap is undecided.
    """
    gens = pi_gamma_generators(diagram)
    classes = []  # (arrow, word) representatives up to equality
    frontier = [
        (g, [i]) for i, g in enumerate(gens) if g.src == arrow.src
    ]
    stabilized = False
    for step in range(depth):
        fresh = []
        for cand, word in frontier:
            if cand.dst == arrow.dst and arrows_equal(cand, arrow, cap=cap):
                return MEMBER, word
            known = any(
                rep.src == cand.src
                and rep.dst == cand.dst
                and arrows_equal(rep, cand, cap=cap)
                for rep, _ in classes
            )
            if not known:
                classes.append((cand, word))
                fresh.append((cand, word))
        if not fresh:
            stabilized = True
            break
        frontier = [
            (compose(g, cand, cap=cap), word + [i])
            for cand, word in fresh
            for i, g in enumerate(gens)
            if g.src == cand.dst
        ]
    if not frontier:
        stabilized = True
    return (NON_MEMBER, None) if stabilized else (UNDECIDED, None)


def kappa_faithful(c, cap=None):
    """kappa is faithful iff the only automorphism of Id_C is the identity.
    Returns a Decision; on failure the witness is a collapsing pair of
    distinct arrows that become equal in the big category."""
    auts = aut_of_identity(c, cap=cap)
    nontrivial = [
        t for t in auts if any(not c.is_identity(t.components[x]) for x in c.objects)
    ]
    if not nontrivial:
        return Decision(True, witness=None)
    t = nontrivial[0]
    # the collapsing pair: phi and phi o g(x) become equal under kappa
    for phi in c.arrows:
        x = c.dom(phi)
        other = c.compose(phi, t.components[x])
        if other != phi:
            return Decision(False, witness=(phi, other, t))
    return Decision(False, witness=(None, None, t))
