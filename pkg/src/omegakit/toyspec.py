"""Finite commutative rings, their spectra and localizations.

Rings are table-given; every axiom is checked exhaustively at construction.
Spectra are computed by exhaustive ideal enumeration; the opens are all
unions of basic opens and form a meet-lattice, which is what the sheaf
machinery downstream needs.  Localization is the usual pairs-mod-relation
construction; for finite rings the canonical map is surjective, which the
structure-sheaf machinery exploits and re-verifies.
"""

import itertools
from dataclasses import dataclass

from .caps import Budget
from .errors import CapExceeded, ClosureCapExceeded, ValidationError
from .fincat import Decision

DEFAULT_RING_CAP = 64


class FiniteRing:
    def __init__(self, name, carrier, add, mul, zero, one, check=True):
        self.name = name
        self.carrier = tuple(carrier)
        self.add = dict(add)
        self.mul = dict(mul)
        self.zero = zero
        self.one = one
        if check:
            self._validate()

    def __len__(self):
        return len(self.carrier)

    def __repr__(self):
        return f"FiniteRing({self.name}, order {len(self.carrier)})"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteRing)
            and self.carrier == other.carrier
            and self.add == other.add
            and self.mul == other.mul
            and self.zero == other.zero
            and self.one == other.one
        )

    def __hash__(self):
        return hash((self.carrier, self.zero, self.one))

    def a(self, x, y):
        return self.add[(x, y)]

    def m(self, x, y):
        return self.mul[(x, y)]

    def neg(self, x):
        for y in self.carrier:
            if self.a(x, y) == self.zero:
                return y
        raise ValidationError(f"{x!r} has no additive inverse")

    def sub(self, x, y):
        return self.a(x, self.neg(y))

    def is_unit(self, x):
        return any(self.m(x, y) == self.one for y in self.carrier)

    def unit_inverse(self, x):
        for y in self.carrier:
            if self.m(x, y) == self.one:
                return y
        return None

    def _validate(self):
        c = set(self.carrier)
        if self.zero not in c or self.one not in c:
            raise ValidationError("zero/one outside the carrier")
        for x in self.carrier:
            for y in self.carrier:
                if self.add.get((x, y)) not in c or self.mul.get((x, y)) not in c:
                    raise ValidationError("operation tables are not total")
                if self.a(x, y) != self.a(y, x) or self.m(x, y) != self.m(y, x):
                    raise ValidationError("operations must be commutative")
            if self.a(x, self.zero) != x:
                raise ValidationError("zero is not additively neutral")
            if self.m(x, self.one) != x:
                raise ValidationError("one is not multiplicatively neutral")
            if not any(self.a(x, y) == self.zero for y in self.carrier):
                raise ValidationError(f"{x!r} has no additive inverse")
        for x in self.carrier:
            for y in self.carrier:
                for z in self.carrier:
                    if self.a(self.a(x, y), z) != self.a(x, self.a(y, z)):
                        raise ValidationError("addition is not associative")
                    if self.m(self.m(x, y), z) != self.m(x, self.m(y, z)):
                        raise ValidationError("multiplication is not associative")
                    if self.m(x, self.a(y, z)) != self.a(self.m(x, y), self.m(x, z)):
                        raise ValidationError("distributivity fails")


class RingHom:
    def __init__(self, source, target, mapping, check=True):
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        if check:
            self._validate()

    def __call__(self, x):
        return self.mapping[x]

    def _validate(self):
        A, B = self.source, self.target
        if set(self.mapping) != set(A.carrier):
            raise ValidationError("hom is not total")
        if self.mapping[A.one] != B.one:
            raise ValidationError("hom does not preserve one")
        for x in A.carrier:
            for y in A.carrier:
                if self.mapping[A.a(x, y)] != B.a(self.mapping[x], self.mapping[y]):
                    raise ValidationError("hom does not preserve addition")
                if self.mapping[A.m(x, y)] != B.m(self.mapping[x], self.mapping[y]):
                    raise ValidationError("hom does not preserve multiplication")

    def graph_key(self):
        return (
            self.source.name,
            self.target.name,
            tuple(sorted(self.mapping.items(), key=repr)),
        )

    def is_surjective(self):
        return set(self.mapping.values()) == set(self.target.carrier)

    def kernel(self):
        return frozenset(x for x in self.source.carrier if self.mapping[x] == self.target.zero)

    def __repr__(self):
        return f"RingHom({self.source.name} -> {self.target.name})"


def compose_homs(g, f):
    if f.target is not g.source and f.target != g.source:
        raise ValidationError("homs are not composable")
    return RingHom(
        f.source, g.target, {x: g.mapping[f.mapping[x]] for x in f.source.carrier},
        check=False,
    )


def identity_hom(A):
    return RingHom(A, A, {x: x for x in A.carrier}, check=False)


# -- constructors ----------------------------------------------------------------


def zmod(n):
    carrier = list(range(n))
    add = {(x, y): (x + y) % n for x in carrier for y in carrier}
    mul = {(x, y): (x * y) % n for x in carrier for y in carrier}
    return FiniteRing(f"Z/{n}", carrier, add, mul, 0, 1 % n)


def product_ring(A, B, name=None):
    carrier = [(x, y) for x in A.carrier for y in B.carrier]
    add = {
        ((x1, y1), (x2, y2)): (A.a(x1, x2), B.a(y1, y2))
        for x1, y1 in carrier
        for x2, y2 in carrier
    }
    mul = {
        ((x1, y1), (x2, y2)): (A.m(x1, x2), B.m(y1, y2))
        for x1, y1 in carrier
        for x2, y2 in carrier
    }
    return FiniteRing(
        name or f"({A.name}x{B.name})",
        carrier,
        add,
        mul,
        (A.zero, B.zero),
        (A.one, B.one),
    )


def zero_ring(name="0"):
    return FiniteRing(name, ["0"], {("0", "0"): "0"}, {("0", "0"): "0"}, "0", "0")


def from_tables(raw):
    """Ring from a parsed document: carrier, add/mul as nested tables."""
    carrier = list(raw["carrier"])
    add = {(x, y): raw["add"][str(x)][str(y)] for x in carrier for y in carrier}
    mul = {(x, y): raw["mul"][str(x)][str(y)] for x in carrier for y in carrier}
    return FiniteRing(
        raw.get("name", "ring"), carrier, add, mul, raw["zero"], raw["one"]
    )


# -- ideals and the spectrum -------------------------------------------------------


def principal_ideal(A, a):
    return frozenset(A.m(r, a) for r in A.carrier)


def ideal_sum(A, I, a):
    gen = principal_ideal(A, a)
    return frozenset(A.a(x, y) for x in I for y in gen)


def ideal_generated(A, gens):
    I = frozenset([A.zero])
    for g in gens:
        I = ideal_sum(A, I, g)
    return I


def all_ideals(A):
    """BFS over ideal sums of principal ideals."""
    start = frozenset([A.zero])
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for I in frontier:
            for a in A.carrier:
                if a in I:
                    continue
                J = ideal_sum(A, I, a)
                if J not in seen:
                    seen.add(J)
                    nxt.append(J)
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(map(repr, s))))


def is_prime_ideal(A, I):
    if set(I) == set(A.carrier):
        return False
    for x in A.carrier:
        for y in A.carrier:
            if A.m(x, y) in I and x not in I and y not in I:
                return False
    return True


def prime_ideals(A, cap=DEFAULT_RING_CAP):
    if len(A.carrier) > cap:
        raise CapExceeded(f"ring order {len(A.carrier)} exceeds cap {cap}")
    return [I for I in all_ideals(A) if is_prime_ideal(A, I)]


@dataclass
class Spectrum:
    """The prime spectrum as a finite space: named points and the lattice
    of opens (frozensets of point names, closed under union and meet)."""

    ring: FiniteRing
    points: dict          # name -> prime ideal (frozenset)
    opens: tuple          # frozensets of point names, sorted
    basic: dict           # ring element -> open (D(f))

    def point_names(self):
        return tuple(sorted(self.points))

    def top(self):
        return frozenset(self.points)

    def open_name(self, open_set):
        return "U{" + ",".join(sorted(open_set)) + "}"


def spectrum(A, cap=DEFAULT_RING_CAP):
    primes = prime_ideals(A, cap=cap)
    points = {f"p{i}": p for i, p in enumerate(primes)}
    by_ideal = {p: n for n, p in points.items()}
    basic = {}
    for f in A.carrier:
        basic[f] = frozenset(
            by_ideal[p] for p in primes if f not in p
        )
    opens = {frozenset(), frozenset(points)}
    opens.update(basic.values())
    changed = True
    while changed:
        changed = False
        for u in list(opens):
            for v in list(opens):
                for w in (u | v, u & v):
                    if w not in opens:
                        opens.add(w)
                        changed = True
    ordered = tuple(sorted(opens, key=lambda s: (len(s), sorted(s))))
    return Spectrum(A, points, ordered, basic)


# -- localization --------------------------------------------------------------------


def multiplicative_closure(A, S):
    out = set(S) | {A.one}
    changed = True
    while changed:
        changed = False
        for x in list(out):
            for y in list(out):
                p = A.m(x, y)
                if p not in out:
                    out.add(p)
                    changed = True
    return frozenset(out)


def complement_mult_set(A, spec, open_set):
    """Elements invertible on the open: outside every prime in it."""
    primes = [spec.points[n] for n in open_set]
    return frozenset(
        s for s in A.carrier if all(s not in p for p in primes)
    )


def localize(A, S, name=None):
    """(A_S, canonical map).  a/s ~ b/t iff u(at - bs) = 0 for some u in S."""
    S = multiplicative_closure(A, S)
    pairs = [(a, s) for a in A.carrier for s in S]

    def related(p, q):
        (a, s), (b, t) = p, q
        return any(
            A.m(u, A.sub(A.m(a, t), A.m(b, s))) == A.zero for u in S
        )

    classes = []
    assigned = {}
    for p in pairs:
        placed = False
        for rep in classes:
            if related(p, rep):
                assigned[p] = rep
                placed = True
                break
        if not placed:
            classes.append(p)
            assigned[p] = p

    def cls(a, s):
        return assigned[(a, s)]

    carrier = classes
    add = {}
    mul = {}
    for (a, s) in carrier:
        for (b, t) in carrier:
            add[((a, s), (b, t))] = cls(A.a(A.m(a, t), A.m(b, s)), A.m(s, t))
            mul[((a, s), (b, t))] = cls(A.m(a, b), A.m(s, t))
    ring = FiniteRing(
        name or f"{A.name}_loc{len(carrier)}",
        carrier,
        add,
        mul,
        cls(A.zero, A.one),
        cls(A.one, A.one),
    )
    canon = RingHom(A, ring, {a: cls(a, A.one) for a in A.carrier}, check=True)
    return ring, canon


def localization_factor(canon, S, target_hom):
    """Universal property: a hom out of the localization from a hom of the
    base that inverts S.  Fails loudly if some s is not invertible."""
    A_S, A, B = canon.target, canon.source, target_hom.target
    mapping = {}
    for (a, s) in A_S.carrier:
        img_s = target_hom.mapping[s]
        inv = B.unit_inverse(img_s)
        if inv is None:
            raise ValidationError(f"{s!r} is not inverted by the target hom")
        mapping[(a, s)] = B.m(target_hom.mapping[a], inv)
    return RingHom(A_S, B, mapping)


def is_local_ring(A):
    """Unique maximal ideal."""
    ideals = [I for I in all_ideals(A) if set(I) != set(A.carrier)]
    maximal = [
        I
        for I in ideals
        if not any(set(I) < set(J) for J in ideals)
    ]
    return len(maximal) == 1


# -- hom enumeration and isomorphism ---------------------------------------------------


def all_ring_homs(A, B, cap=None):
    """Every unital ring hom A -> B, by backtracking over additive
    generators.  Small rings only; the budget guards the search."""
    budget = Budget(cap, "ring hom enumeration")
    gens = _additive_generators(A)
    out = []

    def freeze(partial):
        # close the partial generator assignment under + and *
        mapping = {A.zero: B.zero, A.one: B.one}
        frontier = dict(partial)
        mapping.update(frontier)
        changed = True
        while changed:
            changed = False
            items = list(mapping.items())
            for x, fx in items:
                for y, fy in items:
                    for rx, rb in ((A.a(x, y), B.a(fx, fy)), (A.m(x, y), B.m(fx, fy))):
                        if rx in mapping:
                            if mapping[rx] != rb:
                                return None
                        else:
                            mapping[rx] = rb
                            changed = True
        if set(mapping) != set(A.carrier):
            return None
        return mapping

    def search(i, partial):
        budget.spend()
        if i == len(gens):
            mapping = freeze(partial)
            if mapping is not None:
                try:
                    out.append(RingHom(A, B, mapping))
                except ValidationError:
                    pass
            return
        for b in B.carrier:
            partial[gens[i]] = b
            search(i + 1, partial)
        if gens:
            del partial[gens[i]]

    search(0, {})
    unique = {}
    for h in out:
        unique[tuple(sorted(h.mapping.items(), key=repr))] = h
    return list(unique.values())


def _additive_generators(A):
    """A small generating set of (A, +, *): greedily grow until the ring
    closure of {0,1,gens} is everything."""
    have = {A.zero, A.one}
    gens = []
    def closure(base):
        cur = set(base)
        changed = True
        while changed:
            changed = False
            for x in list(cur):
                for y in list(cur):
                    for z in (A.a(x, y), A.m(x, y)):
                        if z not in cur:
                            cur.add(z)
                            changed = True
        return cur
    cur = closure(have)
    for x in A.carrier:
        if x not in cur:
            gens.append(x)
            cur = closure(cur | {x})
    return gens


def ring_isomorphism(A, B, cap=None):
    """Exhaustive isomorphism search."""
    if len(A.carrier) != len(B.carrier):
        return Decision(False, reason="orders differ")
    for h in all_ring_homs(A, B, cap=cap):
        if len(set(h.mapping.values())) == len(A.carrier):
            return Decision(True, witness=h)
    return Decision(False, reason="no bijective hom")


def quotient_ring(A, ideal, name=None):
    """A / I with coset representatives chosen deterministically."""
    ideal = frozenset(ideal)
    rep = {}
    classes = []
    for x in A.carrier:
        coset = frozenset(A.a(x, i) for i in ideal)
        found = None
        for c in classes:
            if x in c[1]:
                found = c
                break
        if found is None:
            classes.append((x, coset))
            rep[x] = x
        else:
            rep[x] = found[0]
    carrier = [c[0] for c in classes]
    add = {
        (x, y): rep[A.a(x, y)] for x in carrier for y in carrier
    }
    mul = {
        (x, y): rep[A.m(x, y)] for x in carrier for y in carrier
    }
    ring = FiniteRing(
        name or f"{A.name}/I{len(ideal)}", carrier, add, mul,
        rep[A.zero], rep[A.one],
    )
    proj = RingHom(A, ring, {x: rep[x] for x in A.carrier})
    return ring, proj


# -- the spec datum of a family of rings ------------------------------------------------


class ToyWorld:
    """Bookkeeping for a built spec datum: rings, spectra and point maps."""

    def __init__(self):
        self.roots = []
        self.spectra = []
        self.obj_info = {}     # object token -> (root index, open frozenset)
        self.ring_of = {}      # R token -> FiniteRing
        self.canon = {}        # R token -> RingHom from the root ring
        self.point_of_prime = {}  # R token -> {prime frozenset: point name}
        self.hom_of = {}       # R arrow token -> RingHom
        self.point_map = {}    # T arrow token -> {point: point}
        self.r_token = {}      # (root index, open) -> R token
        self.t_token = {}      # (root index, open) -> T token

    def open_of(self, token):
        return self.obj_info[token][1]

    def root_of(self, token):
        return self.obj_info[token][0]


def _open_token(spec, open_set):
    return "{" + ",".join(sorted(open_set)) + "}"


def build_spec_datum(rings, extra_homs=(), cap=DEFAULT_RING_CAP, closure_cap=4000):
    """The classical datum of a finite family of rings: R is generated by all
    localizations at opens (plus any explicit homs), T is the category of
    their spectra and opens with inclusion and induced maps, the covers are
    the families of opens with the right union, and the admissible sites are
    the open posets themselves."""
    from .fincat import FinCat, Functor
    from . import site as site_mod

    world = ToyWorld()
    world.roots = list(rings)
    world.spectra = [spectrum(A, cap=cap) for A in world.roots]

    r_objects, t_objects = [], []
    for i, (A, spec) in enumerate(zip(world.roots, world.spectra)):
        for open_set in spec.opens:
            oname = _open_token(spec, open_set)
            r_tok, t_tok = f"R{i}.{oname}", f"T{i}.{oname}"
            world.obj_info[r_tok] = (i, open_set)
            world.obj_info[t_tok] = (i, open_set)
            world.r_token[(i, open_set)] = r_tok
            world.t_token[(i, open_set)] = t_tok
            r_objects.append(r_tok)
            t_objects.append(t_tok)
            if open_set == spec.top():
                ring, canonical = A, identity_hom(A)
            else:
                S = complement_mult_set(A, spec, open_set)
                ring, canonical = localize(A, S, name=f"{A.name}@{oname}")
            world.ring_of[r_tok] = ring
            world.canon[r_tok] = canonical
            primes = {frozenset(p): name for name, p in spectrum(ring, cap=cap).points.items()}
            mapping = {}
            for p in primes:
                pulled = frozenset(
                    a for a in A.carrier if canonical.mapping[a] in p
                )
                matches = [
                    n for n, q in spec.points.items() if q == pulled and n in open_set
                ]
                if len(matches) != 1:
                    raise ValidationError(
                        f"localized spectrum does not match the open at {r_tok}"
                    )
                mapping[p] = matches[0]
            if len(mapping) != len(open_set):
                raise ValidationError(f"point count mismatch at {r_tok}")
            world.point_of_prime[r_tok] = mapping

    # R arrows: canonical restrictions within a component, explicit homs
    # between roots, then closure under composition (deduplicated by graph)
    r_arrows = {}
    by_graph = {}

    def register_r(dom_tok, cod_tok, hom, name):
        key = (dom_tok, cod_tok, tuple(sorted(hom.mapping.items(), key=repr)))
        if key in by_graph:
            return by_graph[key]
        r_arrows[name] = (dom_tok, cod_tok)
        world.hom_of[name] = hom
        by_graph[key] = name
        return name

    identity_r = {}
    for tok in r_objects:
        name = register_r(tok, tok, identity_hom(world.ring_of[tok]), f"id:{tok}")
        identity_r[tok] = name
    for i, spec in enumerate(world.spectra):
        for w_small in spec.opens:
            for w_big in spec.opens:
                if w_small == w_big or not w_small <= w_big:
                    continue
                small = world.r_token[(i, w_small)]
                big = world.r_token[(i, w_big)]
                S_big = complement_mult_set(world.roots[i], spec, w_big)
                hom = localization_factor(
                    world.canon[big], S_big, world.canon[small]
                ) if w_big != spec.top() else world.canon[small]
                register_r(small, big, hom, f"res:{small}<{big}")
    for j, h in enumerate(extra_homs):
        src_idx = next(
            i for i, A in enumerate(world.roots) if A == h.source
        )
        tgt_idx = next(
            i for i, A in enumerate(world.roots) if A == h.target
        )
        dom_tok = world.r_token[(tgt_idx, world.spectra[tgt_idx].top())]
        cod_tok = world.r_token[(src_idx, world.spectra[src_idx].top())]
        register_r(dom_tok, cod_tok, h, f"hom{j}:{dom_tok}<{cod_tok}")

    changed = True
    counter = 0
    while changed:
        changed = False
        items = list(r_arrows.items())
        for n2, (d2, c2) in items:
            for n1, (d1, c1) in items:
                if c1 != d2:
                    continue
                composite = compose_homs(world.hom_of[n1], world.hom_of[n2])
                key = (d1, c2, tuple(sorted(composite.mapping.items(), key=repr)))
                if key not in by_graph:
                    counter += 1
                    if len(r_arrows) > closure_cap:
                        raise ClosureCapExceeded(
                            f"R closure exceeded {closure_cap} arrows"
                        )
                    register_r(d1, c2, composite, f"c{counter}:{d1}<{c2}")
                    changed = True
    r_comp = {}
    for n2, (d2, c2) in r_arrows.items():
        for n1, (d1, c1) in r_arrows.items():
            if c1 != d2:
                continue
            composite = compose_homs(world.hom_of[n1], world.hom_of[n2])
            key = (d1, c2, tuple(sorted(composite.mapping.items(), key=repr)))
            r_comp[(n2, n1)] = by_graph[key]
    R = FinCat(r_objects, r_arrows, r_comp, identity_r)

    # T arrows: inclusions, then images of R arrows, then closure
    t_arrows = {}
    t_by_graph = {}

    def register_t(dom_tok, cod_tok, mapping, name):
        key = (dom_tok, cod_tok, tuple(sorted(mapping.items())))
        if key in t_by_graph:
            return t_by_graph[key]
        t_arrows[name] = (dom_tok, cod_tok)
        world.point_map[name] = dict(mapping)
        t_by_graph[key] = name
        return name

    identity_t = {}
    for i, spec in enumerate(world.spectra):
        for w_small in spec.opens:
            for w_big in spec.opens:
                if not w_small <= w_big:
                    continue
                small = world.t_token[(i, w_small)]
                big = world.t_token[(i, w_big)]
                name = register_t(
                    small, big, {p: p for p in w_small},
                    f"inc:{small}<{big}" if w_small != w_big else f"id:{small}",
                )
                if w_small == w_big:
                    identity_t[small] = name

    def sp_point_map(arrow_name):
        dom_tok, cod_tok = r_arrows[arrow_name]
        hom = world.hom_of[arrow_name]
        dom_ring, cod_ring = world.ring_of[dom_tok], world.ring_of[cod_tok]
        out = {}
        for prime, pname in world.point_of_prime[dom_tok].items():
            pulled = frozenset(
                a for a in cod_ring.carrier if hom.mapping[a] in prime
            )
            out[pname] = world.point_of_prime[cod_tok][pulled]
        return out

    sp_amap = {}
    for name in r_arrows:
        dom_tok, cod_tok = r_arrows[name]
        mapping = sp_point_map(name)
        t_dom = world.t_token[world.obj_info[dom_tok]]
        t_cod = world.t_token[world.obj_info[cod_tok]]
        sp_amap[name] = register_t(t_dom, t_cod, mapping, f"sp:{name}")
    changed = True
    counter = 0
    while changed:
        changed = False
        items = list(t_arrows.items())
        for n2, (d2, c2) in items:
            for n1, (d1, c1) in items:
                if c1 != d2:
                    continue
                mapping = {
                    p: world.point_map[n2][world.point_map[n1][p]]
                    for p in world.point_map[n1]
                }
                key = (d1, c2, tuple(sorted(mapping.items())))
                if key not in t_by_graph:
                    counter += 1
                    register_t(d1, c2, mapping, f"tc{counter}:{d1}<{c2}")
                    changed = True
    t_comp = {}
    for n2, (d2, c2) in t_arrows.items():
        for n1, (d1, c1) in t_arrows.items():
            if c1 != d2:
                continue
            mapping = {
                p: world.point_map[n2][world.point_map[n1][p]]
                for p in world.point_map[n1]
            }
            key = (d1, c2, tuple(sorted(mapping.items())))
            t_comp[(n2, n1)] = t_by_graph[key]
    T = FinCat(t_objects, t_arrows, t_comp, identity_t)

    sp = Functor(
        R, T, {tok: world.t_token[world.obj_info[tok]] for tok in r_objects}, sp_amap
    )

    O_obj = {tok: world.ring_of[tok] for tok in r_objects}
    O_arr = {name: world.hom_of[name] for name in r_arrows}

    covers = {}
    for i, spec in enumerate(world.spectra):
        for w in spec.opens:
            tok = world.t_token[(i, w)]
            below = [v for v in spec.opens if v <= w]
            families = []
            for k in range(len(below) + 1):
                for combo in itertools.combinations(below, k):
                    union = frozenset().union(*combo) if combo else frozenset()
                    if union == w:
                        fam = tuple(
                            sorted(
                                t_by_graph[
                                    (
                                        world.t_token[(i, v)],
                                        tok,
                                        tuple(sorted({p: p for p in v}.items())),
                                    )
                                ]
                                for v in combo
                            )
                        )
                        families.append(fam)
            covers[tok] = tuple(sorted(set(families)))
    tau = site_mod.Topology(T, covers)

    E, eps_obj, action, terminal = {}, {}, {}, {}
    for i, spec in enumerate(world.spectra):
        for w in spec.opens:
            tok = world.t_token[(i, w)]
            below = [v for v in spec.opens if v <= w]
            objs = [world.t_token[(i, v)] for v in below]
            arrows = {
                a: e
                for a, e in t_arrows.items()
                if e[0] in objs and e[1] in objs
                and world.point_map[a] == {p: p for p in world.open_of(e[0])}
                and world.open_of(e[0]) <= world.open_of(e[1])
            }
            comp = {
                (g, f): t_comp[(g, f)]
                for g in arrows
                for f in arrows
                if t_arrows[f][1] == t_arrows[g][0]
            }
            cat = FinCat(objs, arrows, comp, {o: identity_t[o] for o in objs})
            E[tok] = cat
            eps_obj[tok] = {
                world.t_token[(i, v)]: t_by_graph[
                    (
                        world.t_token[(i, v)],
                        tok,
                        tuple(sorted({p: p for p in v}.items())),
                    )
                ]
                for v in below
            }
            terminal[tok] = tok
    for name, (d, c) in t_arrows.items():
        mapping = world.point_map[name]
        act = {}
        i_dom = world.root_of(d)
        spec_dom = world.spectra[i_dom]
        for e in E[c].objects:
            v = world.open_of(e)
            pre = frozenset(p for p in world.open_of(d) if mapping[p] in v)
            if pre not in spec_dom.opens:
                raise ValidationError(f"preimage of an open is not open along {name!r}")
            act[e] = world.t_token[(i_dom, pre)]
        action[name] = act
    eps = site_mod.AdmissibilityStructure(T, E, eps_obj, action, terminal)

    datum = site_mod.SpecDatum(
        sp=sp, O_obj=O_obj, O_arr=O_arr, tau=tau, eps=eps, values="ring", world=world
    )
    datum.validate()
    return datum
