"""The acceptance suite as a library.

Each criterion function returns {"id", "name", "passed", "details"}; the
runner adds timing and an overall verdict.  The CLI `report` verb serializes
the result deterministically (timing kept out of the JSON) and can render
summary figures next to the delimited output.
"""

import itertools
import random
import time

from . import enrich, fincat, ncat, omega, pathcat, site, sklim, toyspec


# -- fixture corpus ---------------------------------------------------------------


def corpus_categories():
    """Small categories exercised throughout: every one has at most six
    objects, and the group examples have nontrivial identity automorphisms."""
    square = fincat.product(fincat.chain_poset(2), fincat.chain_poset(2))
    return {
        "star": fincat.terminal_category(),
        "chain2": fincat.chain_poset(2),
        "chain3": fincat.chain_poset(3),
        "bz2": fincat.cyclic_group_category(2),
        "bz3": fincat.cyclic_group_category(3),
        "discrete2": fincat.discrete_category(["x", "y"]),
        "walking_iso": fincat.walking_iso(),
        "square": square,
    }


def corpus_pointed():
    out = []
    for name, cat in corpus_categories().items():
        for obj in cat.objects:
            out.append((f"{name}@{obj}", omega.PointedCat(cat, obj)))
    return out


def corpus_omega_arrows():
    """At least forty pointed correspondences over the corpus, mixing hom
    arrows, twists, cotwists and terminal correspondences."""
    cats = corpus_categories()
    arrows = []
    for name, cat in cats.items():
        for phi in cat.arrows:
            arrows.append((f"k:{name}:{phi}", omega.kappa_arrow(cat, phi)))
    star = cats["star"]
    for name in ("chain2", "chain3"):
        t = fincat.terminal_functor(cats[name], star)
        for obj in cats[name].objects:
            arrows.append((f"tw:{name}@{obj}", omega.kappa_twist(t, obj)))
    incl = fincat.Functor(
        cats["chain2"],
        cats["chain3"],
        {"0": "0", "1": "1"},
        {"id_0": "id_0", "id_1": "id_1", "le_0_1": "le_0_1"},
    )
    for obj in cats["chain2"].objects:
        arrows.append((f"tw:incl@{obj}", omega.kappa_twist(incl, obj)))
        arrows.append((f"cotw:incl@{obj}", omega.kappa_cotwist(incl, obj)))
    for src_name, src, dst_name, dst in (
        ("bz2", omega.PointedCat(cats["bz2"], "*"), "chain2", omega.PointedCat(cats["chain2"], "0")),
        ("discrete2", omega.PointedCat(cats["discrete2"], "x"), "bz3", omega.PointedCat(cats["bz3"], "*")),
        ("walking_iso", omega.PointedCat(cats["walking_iso"], "a"), "star", omega.PointedCat(star, "*")),
    ):
        arrows.append((f"t:{src_name}->{dst_name}", omega.terminal_arrow(src, dst)))
    return arrows


# -- criteria ----------------------------------------------------------------------


def criterion_omega_category(cap=None):
    """Associativity and unit laws over the corpus, decided with witnesses."""
    arrows = corpus_omega_arrows()
    pointed = corpus_pointed()
    details = {"objects": len(pointed), "arrows": len(arrows)}
    if len(pointed) < 8 or len(arrows) < 40:
        return _fail("omega-category", details, "corpus too small")
    triples = comps = 0
    for _, f in arrows:
        for _, g in arrows:
            if g.src != f.dst:
                continue
            gf = omega.compose(g, f, cap=cap)
            for _, h in arrows:
                if h.src != g.dst:
                    continue
                triples += 1
                left = omega.compose(h, gf, cap=cap)
                right = omega.compose(omega.compose(h, g, cap=cap), f, cap=cap)
                if not omega.arrows_equal(left, right, cap=cap):
                    return _fail(
                        "omega-category", details, f"associativity fails at triple {triples}"
                    )
    for name, f in arrows:
        comps += 1
        lu = omega.compose(omega.identity_arrow(f.dst), f, cap=cap)
        ru = omega.compose(f, omega.identity_arrow(f.src), cap=cap)
        if not omega.arrows_equal(lu, f, cap=cap):
            return _fail("omega-category", details, f"left unit fails at {name}")
        if not omega.arrows_equal(ru, f, cap=cap):
            return _fail("omega-category", details, f"right unit fails at {name}")
        if not omega.left_unit_map(f) or not omega.right_unit_map(f):
            return _fail("omega-category", details, f"unit comparison not bijective at {name}")
    details["triples"] = triples
    details["unit_checks"] = comps
    return _pass("omega-category", details)


def criterion_kappa_faithfulness(cap=None):
    cats = corpus_categories()
    details = {}
    for name, cat in cats.items():
        auts = fincat.aut_of_identity(cat, cap=cap)
        trivial = len(auts) == 1
        dec = omega.kappa_faithful(cat, cap=cap)
        if dec.holds != trivial:
            return _fail("kappa-faithfulness", details, f"criterion mismatch on {name}")
        if trivial:
            # faithful: distinct parallel arrows stay distinct
            for phi in cat.arrows:
                for psi in cat.arrows:
                    if phi >= psi or cat.arrows[phi] != cat.arrows[psi]:
                        continue
                    if omega.arrows_equal(
                        omega.kappa_arrow(cat, phi), omega.kappa_arrow(cat, psi), cap=cap
                    ):
                        return _fail(
                            "kappa-faithfulness", details, f"collapse on faithful {name}"
                        )
        details[name] = "faithful" if trivial else "not faithful"
    for name in ("bz2", "bz3"):
        dec = omega.kappa_faithful(cats[name], cap=cap)
        if dec.holds:
            return _fail("kappa-faithfulness", details, f"{name} should not be faithful")
        phi, other, _ = dec.witness
        eq = omega.arrows_equal(
            omega.kappa_arrow(cats[name], phi),
            omega.kappa_arrow(cats[name], other),
            cap=cap,
        )
        if not eq:
            return _fail("kappa-faithfulness", details, f"witness fails on {name}")
        details[f"{name}-witness"] = [phi, other]
    return _pass("kappa-faithfulness", details)


ACCEPTANCE_RINGS = ("Z/2", "Z/4", "Z/6", "Z/2xZ/2")


def acceptance_datum():
    z2 = toyspec.zmod(2)
    rings = [z2, toyspec.zmod(4), toyspec.zmod(6), toyspec.product_ring(z2, z2)]
    return toyspec.build_spec_datum(rings)


def criterion_classical_sanity(cap=None):
    datum = acceptance_datum()
    session = site.LiftSession(datum)
    details = {"objects": 0, "basic_opens": 0}
    for x in datum.R.objects:
        sections = session.global_sections(x)
        want = datum.world.ring_of[x]
        if not toyspec.ring_isomorphism(sections, want, cap=cap):
            return _fail("classical-sanity", details, f"sections differ at {x}")
        canonical = session.canonical_global_map(x)
        if len(set(canonical.mapping.values())) != len(want.carrier):
            return _fail("classical-sanity", details, f"unit not bijective at {x}")
        details["objects"] += 1
    for i, root in enumerate(datum.world.roots):
        spec = datum.world.spectra[i]
        top = datum.world.r_token[(i, spec.top())]
        lifted = session.lifted_object(top)
        for f in root.carrier:
            open_set = spec.basic[f]
            tok = datum.world.t_token[(i, open_set)]
            got = lifted.sheaf.value(tok)
            local, _ = toyspec.localize(root, frozenset([f]))
            if not toyspec.ring_isomorphism(got, local, cap=cap):
                return _fail(
                    "classical-sanity",
                    details,
                    f"sections at D({f}) of {root.name} differ from the localization",
                )
            details["basic_opens"] += 1
    return _pass("classical-sanity", details)


def criterion_structure_sheaf_values(cap=None):
    z6 = toyspec.zmod(6)
    spec = toyspec.spectrum(z6)
    details = {"points": len(spec.points), "opens": len(spec.opens)}
    if len(spec.points) != 2 or len(spec.opens) != 4:
        return _fail("structure-sheaf-values", details, "wrong spectrum shape")
    datum = toyspec.build_spec_datum([z6])
    session = site.LiftSession(datum)
    top = datum.world.r_token[(0, spec.top())]
    lifted = session.lifted_object(top)
    orders = sorted(
        len(lifted.sheaf.value(o).carrier) for o in lifted.site.objects
    )
    details["section_orders"] = orders
    if orders != [1, 2, 3, 6]:
        return _fail("structure-sheaf-values", details, "wrong section orders")
    for o in lifted.site.objects:
        v = lifted.sheaf.value(o)
        want = {1: None, 2: toyspec.zmod(2), 3: toyspec.zmod(3), 6: z6}[len(v.carrier)]
        if want is not None and not toyspec.ring_isomorphism(v, want, cap=cap):
            return _fail("structure-sheaf-values", details, f"sections at {o} wrong")
    return _pass("structure-sheaf-values", details)


def _random_posets(rng, count):
    out = []
    while len(out) < count:
        n = rng.choice([2, 3, 4])
        names = [f"v{i}" for i in range(n)]
        leq = {(a, a) for a in names}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.5:
                    leq.add((names[i], names[j]))
        closed = set(leq)
        changed = True
        while changed:
            changed = False
            for a, b in list(closed):
                for c, d in list(closed):
                    if b == c and (a, d) not in closed:
                        closed.add((a, d))
                        changed = True
        out.append(fincat.poset_category(names, lambda x, y, s=closed: (x, y) in s))
    return out


def _random_functor(rng, source, target):
    for _ in range(200):
        omap = {x: rng.choice(list(target.objects)) for x in source.objects}
        amap = {}
        ok = True
        for a, (d, c) in source.arrows.items():
            hom = target.hom(omap[d], omap[c])
            if not hom:
                ok = False
                break
            amap[a] = rng.choice(list(hom))
        if not ok:
            continue
        try:
            return fincat.Functor(source, target, omap, amap)
        except Exception:
            continue
    return None


def criterion_skel_limit_oracle(cap=None):
    rng = random.Random(20260810)
    checked = 0
    details = {}
    while checked < 10:
        target = _random_posets(rng, 1)[0]  # posets have no nonidentity isos
        src1, src2 = _random_posets(rng, 2)
        phi = _random_functor(rng, src1, target)
        psi = _random_functor(rng, src2, target)
        if phi is None or psi is None:
            continue
        weak = sklim.skel_limit_cospan(phi, psi)
        strict = sklim.strict_pullback(phi, psi)
        if weak.object != strict.object:
            return _fail("skel-limit-oracle", details, f"mismatch at cospan {checked}")
        checked += 1
    details["cospans"] = checked
    star = fincat.terminal_category()
    for name, cat in corpus_categories().items():
        phi = fincat.terminal_functor(cat, star)
        res = sklim.skel_limit_cospan(phi, phi)
        prod = fincat.product(cat, cat)
        if res.object != prod:
            return _fail("skel-limit-oracle", details, f"star case fails on {name}")
    details["star_cases"] = len(corpus_categories())
    return _pass("skel-limit-oracle", details)


def enriched_from_cat(world, cat, prefix):
    hom, comp = {}, {}
    for a in cat.objects:
        for b in cat.objects:
            hom[(a, b)] = world.obj(f"{prefix}[{a}|{b}]", cat.hom(a, b))
    for a in cat.objects:
        for b in cat.objects:
            for c in cat.objects:
                dom = world.tensor(hom[(a, b)], hom[(b, c)])
                comp[(a, b, c)] = world.arr(
                    dom,
                    hom[(a, c)],
                    {(f, g): cat.compose(g, f) for f, g in world.elements(dom)},
                )
    return enrich.EnrichedSet(world, cat.objects, hom, comp)


def brute_natural_families(world, C, D, phi, psi):
    """Independent oracle: direct elementwise filtering, no shared search
    machinery."""
    pools = [world.elements(D.hom[(phi.f1[x], psi.f1[x])]) for x in C.carrier]
    out = []
    for combo in itertools.product(*pools):
        lam = dict(zip(C.carrier, combo))
        good = True
        for x in C.carrier:
            for y in C.carrier:
                for p in world.elements(C.hom[(x, y)]):
                    fp = world.apply(phi.f2[(x, y)], p)
                    gp = world.apply(psi.f2[(x, y)], p)
                    lhs = world.apply(
                        D.comp[(phi.f1[x], phi.f1[y], psi.f1[y])], (fp, lam[y])
                    )
                    rhs = world.apply(
                        D.comp[(phi.f1[x], psi.f1[x], psi.f1[y])], (lam[x], gp)
                    )
                    if lhs != rhs:
                        good = False
        if good:
            out.append(combo)
    return out


def criterion_enriched_hom_oracle(cap=None):
    instances = 0
    details = {}
    for name in ("star", "chain2", "chain3", "bz2", "bz3", "discrete2", "walking_iso"):
        cat = corpus_categories()[name]
        world = enrich.SetTensorCat()
        es = enriched_from_cat(world, cat, name)
        morphisms = [enrich.identity_morphism(es)]
        for target_obj in list(cat.objects)[:1]:
            if all(cat.hom(x, target_obj) for x in cat.objects) or True:
                pass
        for phi in morphisms:
            for psi in morphisms:
                hom = enrich.enriched_hom(es, es, phi, psi, cap=cap)
                brute = brute_natural_families(world, es, es, phi, psi)
                if tuple(brute) != hom.families:
                    return _fail(
                        "enriched-hom-oracle", details, f"oracle mismatch on {name}"
                    )
                instances += 1
        # a second instance per category: swap through a constant morphism
        for obj in list(cat.objects)[:1]:
            lam_exists = all(cat.hom(x, obj) for x in cat.objects)
            if not lam_exists:
                continue
            f1 = {x: obj for x in es.carrier}
            f2 = {}
            feasible = True
            for a in es.carrier:
                for b in es.carrier:
                    image = world.elements(es.hom[(obj, obj)])
                    mapping = {e: image[0] for e in world.elements(es.hom[(a, b)])}
                    if cat.id_(obj) not in image:
                        feasible = False
                        break
                    mapping = {
                        e: cat.id_(obj) for e in world.elements(es.hom[(a, b)])
                    }
                    f2[(a, b)] = world.arr(es.hom[(a, b)], es.hom[(obj, obj)], mapping)
                if not feasible:
                    break
            if not feasible:
                continue
            const = enrich.EnrichedMorphism(es, es, f1, f2)
            if not enrich.check_we_morphism(const, es, es):
                continue
            hom = enrich.enriched_hom(es, es, const, const, cap=cap)
            brute = brute_natural_families(world, es, es, const, const)
            if tuple(brute) != hom.families:
                return _fail(
                    "enriched-hom-oracle", details, f"constant oracle mismatch on {name}"
                )
            instances += 1
            # associativity of enriched composition on this instance
            mapping, _ = enrich.enriched_compose(es, es, const, const, const, cap=cap)
            h = enrich.enriched_hom(es, es, const, const, cap=cap)
            for lam in h.families:
                for mu in h.families:
                    for nu in h.families:
                        first = mapping[(lam, mu)]
                        left = mapping[(first, nu)] if (first, nu) in mapping else None
                        second = mapping[(mu, nu)]
                        right = mapping[(lam, second)] if (lam, second) in mapping else None
                        if left != right:
                            return _fail(
                                "enriched-hom-oracle",
                                details,
                                f"composition not associative on {name}",
                            )
    details["instances"] = instances
    if instances < 10:
        return _fail("enriched-hom-oracle", details, "fewer than ten instances")
    return _pass("enriched-hom-oracle", details)


def criterion_path_adjunction(cap=None):
    pres = {
        "edge": pathcat.PreCat(["x", "y"], {("x", "y"): ("e",)}),
        "chain": pathcat.PreCat(
            ["0", "1", "2"], {("0", "1"): ("f",), ("1", "2"): ("g",)}
        ),
        "fork": pathcat.PreCat(["a", "b", "c"], {("a", "b"): ("u",), ("a", "c"): ("v",)}),
        "pair": pathcat.PreCat(["x", "y"], {("x", "y"): ("e1", "e2")}),
        "point": pathcat.PreCat(["p"], {}),
    }
    targets = {
        "chain2": fincat.chain_poset(2),
        "bz2": fincat.cyclic_group_category(2),
        "walking": fincat.walking_iso(),
    }
    pairs = 0
    details = {}
    for pname, pre in pres.items():
        for tname, cat in targets.items():
            if pairs >= 8:
                break
            dec, _, _ = pathcat.adjunction_check(pre, cat, cap=cap)
            if not dec:
                return _fail(
                    "path-adjunction", details, f"counts differ on ({pname},{tname})"
                )
            details[f"{pname}->{tname}"] = dec.witness
            pairs += 1
    details["pairs"] = pairs
    if pairs < 6:
        return _fail("path-adjunction", details, "fewer than six pairs")
    return _pass("path-adjunction", details)


def criterion_rho_round_trip(cap=None):
    details = {}
    for name, cat in corpus_categories().items():
        n1 = ncat.from_fincat(cat)
        wrapped = ncat.rho_classify(n1, 0)
        back = ncat.rho_collapse(wrapped, 0)
        if not (back.level == 1 and back.cat == cat):
            return _fail("rho-round-trip", details, f"round trip fails on {name}")
        details[name] = "ok"
    return _pass("rho-round-trip", details)


def criterion_lift_uniqueness(cap=None):
    datum = acceptance_datum()
    s1 = site.LiftSession(datum, choice="forward")
    s2 = site.LiftSession(datum, choice="reversed")
    arrows = [a for a in datum.R.arrows if not datum.R.is_identity(a)]
    ctx = site.WindowContext(datum, arrows=arrows)
    ctx.prepare([s1, s2])
    dec = site.lifts_pointwise_isomorphic(s1, s2, ctx, arrows=arrows, cap=cap)
    if not dec:
        return _fail("lift-uniqueness", {}, str(dec.witness))
    differ = sum(
        1
        for x in datum.R.objects
        if s1.lifted_object(x).sheaf.key() != s2.lifted_object(x).sheaf.key()
    )
    return _pass(
        "lift-uniqueness",
        {"objects": len(datum.R.objects), "arrows": len(arrows), "representatives_differ": differ},
    )


def criterion_pi_sch_instance(cap=None):
    """The two-chart fixture: membership must be found through the cover by
    the two point charts (the identity cover is withheld), so the search has
    to glue the factorization from the affine pieces along the common empty
    open.  The terminal correspondence between the same endpoints fails."""
    z6 = toyspec.zmod(6)
    datum = toyspec.build_spec_datum([z6])
    session = site.LiftSession(datum)
    arrows = [a for a in datum.R.arrows]
    ctx = site.WindowContext(datum, arrows=arrows)
    ctx.prepare([session])
    world = datum.world
    spec = world.spectra[0]
    top = world.r_token[(0, spec.top())]

    point_charts = []
    for o in sorted(spec.opens, key=sorted):
        if len(o) != 1:
            continue
        u = world.r_token[(0, o)]
        point_charts.append(
            next(
                a
                for a, (d, c) in datum.R.arrows.items()
                if d == u and c == top and not datum.R.is_identity(a)
            )
        )
    if len(point_charts) != 2:
        return _fail("pi-sch-instance", {}, "expected exactly two point charts")
    two_chart_cover = [tuple(point_charts)]

    ident = datum.R.id_(top)
    fixture = site.lift_arrow(session, ctx, ident, cap=cap)
    status, witness = site.pi_sch_membership(
        session,
        ctx,
        fixture,
        top,
        top,
        depth=3,
        cap=cap,
        families_x=two_chart_cover,
        families_y=two_chart_cover,
    )
    if status != site.PI_MEMBER:
        return _fail("pi-sch-instance", {}, f"glued fixture status {status}")
    term = omega.terminal_arrow(fixture.src, fixture.dst)
    status2, _ = site.pi_sch_membership(
        session, ctx, term, top, top, depth=3, cap=cap
    )
    if status2 != site.PI_NON_MEMBER:
        return _fail("pi-sch-instance", {}, f"terminal fixture status {status2}")
    return _pass(
        "pi-sch-instance",
        {"charts": len(point_charts), "witness": witness},
    )


def _pass(cid, details):
    return {"id": cid, "passed": True, "details": details}


def _fail(cid, details, reason):
    return {"id": cid, "passed": False, "details": details, "reason": reason}


CRITERIA = (
    ("omega-category", criterion_omega_category, 60.0),
    ("kappa-faithfulness", criterion_kappa_faithfulness, None),
    ("classical-sanity", criterion_classical_sanity, 120.0),
    ("structure-sheaf-values", criterion_structure_sheaf_values, None),
    ("skel-limit-oracle", criterion_skel_limit_oracle, None),
    ("enriched-hom-oracle", criterion_enriched_hom_oracle, None),
    ("path-adjunction", criterion_path_adjunction, None),
    ("rho-round-trip", criterion_rho_round_trip, None),
    ("lift-uniqueness", criterion_lift_uniqueness, None),
    ("pi-sch-instance", criterion_pi_sch_instance, None),
)


def run_acceptance(cap=None, only=None):
    results = []
    for cid, fn, budget in CRITERIA:
        if only and cid not in only:
            continue
        start = time.monotonic()
        try:
            result = fn(cap=cap)
        except Exception as exc:  # a crash is a failure with its reason
            result = _fail(cid, {}, f"{type(exc).__name__}: {exc}")
        elapsed = time.monotonic() - start
        result["seconds"] = round(elapsed, 3)
        if budget is not None and elapsed > budget:
            result["passed"] = False
            result["reason"] = f"runtime {elapsed:.1f}s over budget {budget}s"
        results.append(result)
    return {
        "criteria": results,
        "passed": all(r["passed"] for r in results),
    }


def report_document(outcome):
    """The deterministic JSON payload: timing is excluded so byte-identical
    inputs give byte-identical reports."""
    return {
        "format": "omegakit/report-v1",
        "passed": outcome["passed"],
        "criteria": [
            {
                "id": r["id"],
                "passed": r["passed"],
                "details": r["details"],
                **({"reason": r["reason"]} if "reason" in r else {}),
            }
            for r in outcome["criteria"]
        ],
    }


def report_csv(outcome):
    lines = ["criterion,passed,seconds"]
    for r in outcome["criteria"]:
        lines.append(f"{r['id']},{str(r['passed']).lower()},{r['seconds']}")
    return "\n".join(lines) + "\n"


def render_report_figure(outcome, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r["id"] for r in outcome["criteria"]]
    seconds = [r["seconds"] for r in outcome["criteria"]]
    colors = ["#2a9d8f" if r["passed"] else "#e76f51" for r in outcome["criteria"]]
    fig, ax = plt.subplots(figsize=(8, 0.5 * len(names) + 1.5))
    ax.barh(range(len(names)), seconds, color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("seconds")
    ax.set_title("acceptance criteria (green = pass)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_spectrum_figure(spec, path):
    """Hasse diagram of the opens of a spectrum."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    opens = list(spec.opens)
    by_size = {}
    for o in opens:
        by_size.setdefault(len(o), []).append(o)
    pos = {}
    for size, row in sorted(by_size.items()):
        for i, o in enumerate(sorted(row, key=sorted)):
            pos[o] = (i - (len(row) - 1) / 2.0, size)
    fig, ax = plt.subplots(figsize=(6, 4))
    for small in opens:
        for big in opens:
            if small < big and not any(
                small < mid < big for mid in opens
            ):
                ax.plot(
                    [pos[small][0], pos[big][0]],
                    [pos[small][1], pos[big][1]],
                    color="#888888",
                    zorder=1,
                )
    for o, (x, y) in pos.items():
        label = "{" + ",".join(sorted(o)) + "}"
        ax.scatter([x], [y], s=700, color="#2a9d8f", zorder=2)
        ax.annotate(label, (x, y), ha="center", va="center", fontsize=7, zorder=3)
    ax.set_title(f"opens of Spec({spec.ring.name})")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
