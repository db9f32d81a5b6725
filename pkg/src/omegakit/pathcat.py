"""Pre-categories, free path categories and sweep normal forms.

A pre-category is hom-set data with no composition.  The path category of a
pre-category is freely generated: arrows are composable sequences of hom
elements, concatenation is composition, and the empty sequence at an object
is its identity.  For a category input the generators are its nonidentity
arrows; the hom sets of the result would otherwise be infinite (identity
loops concatenate freely) and the empty path already plays the identity
role.  Cyclic inputs get either a NotAcyclicUnbounded error or, with an
explicit bound, a truncated approximation labeled as such.
"""

import itertools
from dataclasses import dataclass, field

from .errors import NotAcyclicUnbounded, ValidationError
from .fincat import FinCat, Functor
from . import fincat


class PreCat:
    """objects, arrows and a hom assignment; hom sets are disjoint."""

    def __init__(self, objects, hom, check=True):
        self.objects = tuple(objects)
        self.hom = {k: tuple(v) for k, v in hom.items()}
        if check:
            self._validate()

    def hom_at(self, x, y):
        return self.hom.get((x, y), ())

    def arrows(self):
        out = []
        for (x, y), elems in self.hom.items():
            out += [(e, x, y) for e in elems]
        return out

    def _validate(self):
        seen = {}
        for (x, y), elems in self.hom.items():
            if x not in self.objects or y not in self.objects:
                raise ValidationError(f"hom at ({x!r},{y!r}) outside the objects")
            for e in elems:
                if e in seen:
                    raise ValidationError(f"hom element {e!r} appears twice")
                seen[e] = (x, y)


def forget(cat):
    """The underlying pre-category of a category (arrow map the identity)."""
    hom = {}
    for x in cat.objects:
        for y in cat.objects:
            hom[(x, y)] = cat.hom(x, y)
    return PreCat(cat.objects, hom)


def _generators(c):
    """(element, dom, cod) triples: all hom elements of a pre-category, or
    the nonidentity arrows of a category."""
    if isinstance(c, PreCat):
        return c.arrows(), tuple(c.objects)
    gens = [(a, c.dom(a), c.cod(a)) for a in c.nonidentity_arrows()]
    return gens, tuple(c.objects)


def _path_name(seq, at):
    return "[" + ".".join(seq) + "]@" + at if seq else "[]@" + at


@dataclass
class PathCat:
    cat: FinCat
    truncated: bool
    paths: dict  # arrow name -> (tuple of generators, start object)


def path(c, bound=None):
    """The free category on the generators of c.

    Arrows are composable sequences (innermost first), composition is
    concatenation.  If the generator graph has a cycle the path category is
    infinite: with no bound this raises NotAcyclicUnbounded, with a bound a
    truncated approximation is returned and labeled."""
    gens, objects = _generators(c)
    by_start = {}
    for e, x, y in gens:
        by_start.setdefault(x, []).append((e, y))

    paths = {(): None}
    sequences = {x: [((), x)] for x in objects}
    frontier = [((), x) for x in objects]
    truncated = False
    step = 0
    while frontier:
        step += 1
        if bound is not None and step > bound:
            truncated = True
            break
        nxt = []
        for seq, start in frontier:
            at = start if not seq else _cod_of(gens, seq[-1])
            for e, y in by_start.get(at, []):
                longer = (seq + (e,), start)
                nxt.append(longer)
                sequences[start].append(longer)
        frontier = nxt
        if bound is None and step > len(gens) + 1 and frontier:
            raise NotAcyclicUnbounded(
                "generator graph has a cycle; pass an explicit bound"
            )
    arrows = {}
    identity = {}
    path_table = {}
    for x in objects:
        for seq, start in sequences[x]:
            at = start if not seq else _cod_of(gens, seq[-1])
            name = _path_name(seq, start)
            arrows[name] = (start, at)
            path_table[name] = (seq, start)
            if not seq:
                identity[start] = name
    comp = {}
    for n2, (s2, start2) in path_table.items():
        for n1, (s1, start1) in path_table.items():
            if arrows[n1][1] != arrows[n2][0]:
                continue
            joined = s1 + s2
            name = _path_name(joined, start1)
            if name not in arrows:
                # the concatenation escapes the truncation bound
                continue
            comp[(n2, n1)] = name
    if truncated:
        cat = FinCat(list(objects), arrows, comp, identity, check=False)
    else:
        cat = FinCat(list(objects), arrows, comp, identity)
    return PathCat(cat, truncated, path_table)


def _cod_of(gens, e):
    for name, x, y in gens:
        if name == e:
            return y
    raise ValidationError(f"unknown generator {e!r}")


def concat_functor(pc, cat):
    """The counit Path(For(C)) -> C: a sequence goes to its composite."""
    omap = {x: x for x in pc.cat.objects}
    amap = {}
    for name, (seq, start) in pc.paths.items():
        img = cat.id_(start)
        for e in seq:
            img = cat.compose(e, img)
        amap[name] = img
    return Functor(pc.cat, cat, omap, amap)


def path_functor(pc_src, pc_tgt, pre_map):
    """Path is functorial: a pre-functor (object map, element map) induces a
    functor of path categories."""
    obj_map, elem_map = pre_map
    omap = {x: obj_map[x] for x in pc_src.cat.objects}
    amap = {}
    for name, (seq, start) in pc_src.paths.items():
        mapped = tuple(elem_map[e] for e in seq)
        amap[name] = _path_name(mapped, obj_map[start])
    return Functor(pc_src.cat, pc_tgt.cat, omap, amap)


# -- the adjunction -------------------------------------------------------------


def pre_functors(c, d_pre):
    """All pre-functors from a pre-category to a pre-category."""
    out = []
    gens, objects = _generators(c)
    obj_pools = [tuple(d_pre.objects) for _ in objects]
    for obj_images in itertools.product(*obj_pools):
        omap = dict(zip(objects, obj_images))
        pools = []
        ok = True
        for e, x, y in gens:
            cands = d_pre.hom_at(omap[x], omap[y])
            if not cands:
                ok = False
                break
            pools.append(cands)
        if not ok:
            continue
        for images in itertools.product(*pools):
            emap = {e: img for (e, _, _), img in zip(gens, images)}
            out.append((omap, emap))
    return out


def adjunction_check(c, d, cap=None):
    """|Hom_pre(C, For D)| == |Hom_cat(Path C, D)| with an explicit bijection:
    a functor out of the free category is determined by its generator images.
    Returns (Decision, pre-side, functor-side)."""
    pc = path(c)
    if pc.truncated:
        raise NotAcyclicUnbounded("adjunction needs a finite path category")
    pre_side = pre_functors(c, forget(d))
    cat_side = fincat.all_functors(pc.cat, d, cap=cap)

    def transpose(omap, emap):
        amap = {}
        for name, (seq, start) in pc.paths.items():
            img = d.id_(omap[start])
            for e in seq:
                img = d.compose(emap[e], img)
            amap[name] = img
        return Functor(pc.cat, d, dict(omap), amap)

    images = {}
    for omap, emap in pre_side:
        f = transpose(omap, emap)
        images[f.key()] = (omap, emap)
    cat_keys = {f.key() for f in cat_side}
    ok = len(images) == len(pre_side) == len(cat_side) and set(images) == cat_keys
    return (
        fincat.Decision(ok, witness=(len(pre_side), len(cat_side))),
        pre_side,
        cat_side,
    )


# -- sweep ------------------------------------------------------------------------


def normalize(cat, arrows):
    """Compose composable consecutive pairs until none remain.  Confluent:
    local overlaps are resolved by associativity, and length decreases."""
    out = list(arrows)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            f, g = out[i], out[i + 1]
            if cat.cod(f) == cat.dom(g):
                out[i : i + 2] = [cat.compose(g, f)]
                changed = True
                break
    return tuple(out)


def normalize_all_orders(cat, arrows, cap=2000):
    """Every normal form reachable by any rewrite order; used as the
    confluence oracle."""
    seen = set()
    stack = [tuple(arrows)]
    results = set()
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        if len(seen) > cap:
            raise ValidationError("rewrite exploration exceeded the cap")
        reduced = False
        for i in range(len(cur) - 1):
            f, g = cur[i], cur[i + 1]
            if cat.cod(f) == cat.dom(g):
                stack.append(cur[:i] + (cat.compose(g, f),) + cur[i + 2 :])
                reduced = True
        if not reduced:
            results.add(cur)
    return results


@dataclass(frozen=True)
class SweepElement:
    arrows: tuple

    def __post_init__(self):
        pass


def sweep_element(cat, arrows):
    nf = normalize(cat, arrows)
    return SweepElement(nf)


def sweep_compose(cat, a, b):
    """Concatenate, then normalize."""
    return SweepElement(normalize(cat, a.arrows + b.arrows))


def sweep_map(cat_src, cat_tgt, functor, elem):
    """Functorial action: map the list and renormalize."""
    return SweepElement(
        normalize(cat_tgt, tuple(functor.amap[a] for a in elem.arrows))
    )


def sweep_elements(cat, max_len=3):
    """All sweep classes represented by lists up to the given length."""
    out = set()
    pool = list(cat.arrows)
    for n in range(max_len + 1):
        for combo in itertools.product(pool, repeat=n):
            out.add(sweep_element(cat, combo))
    return out
