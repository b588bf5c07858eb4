"""Top-level algorithms: tuple minimization, the finite orbit graph, orbit
decision under the whole automorphism group, stabilizer generators, and the
stabilizer presentation complex.

Reachable same-length or shorter tuples under one multiplier group are
enumerated by sweeping candidate class-exponent matrices over the tuple's
own syllable frames: the substitution form of the action makes this sweep
exhaustive, so no global enumeration of shorter tuples is needed (that
enumeration stays available behind a flag for cross-checking).
"""

from __future__ import annotations

from itertools import product

from .aut import (Automorphism, GenWhitehead, MultTag, PermTag,
                  enumerate_classic_whitehead, identity_automorphism,
                  is_long_range, mult_tag, permutation_automorphisms, theta,
                  za_basis)
from .core import (ClassTuple, canonical_class, enumerate_tuples)
from .errors import BudgetError, InputError
from .linalg import LabeledGraph, Presentation, g1_orbit_decide
from .peak import classic_factor_list, compose_factors, long_range_peak_reduce
from .syllables import Decomposition, decompose, nu_matrix
from .whorbit import wh_orbit_decide, wh_stabilizer_presentation

DELTA_VERTEX_BUDGET = 2000
SWEEP_BUDGET = 200_000


def _class_reps(g):
    """One vertex per star-equality class."""
    seen = set()
    reps = []
    for v in g.vertices:
        cls = g.adjdom_class(v)
        if cls not in seen:
            seen.add(cls)
            reps.append(v)
    return reps


def _vectors_of_norm_at_most(n, budget):
    """Integer vectors of dimension n with 1-norm at most budget."""
    if n == 0:
        yield ()
        return
    for head in range(-budget, budget + 1):
        for tail in _vectors_of_norm_at_most(n - 1, budget - abs(head)):
            yield (head,) + tail


def _exponent_assignments(mults, n, total, exact):
    """Assignments of new class-exponent columns to column groups (given by
    their multiplicities), with the weighted norm equal to the total when
    exact, strictly below it otherwise."""

    def rec(idx, remaining):
        if idx == len(mults):
            if (exact and remaining == 0) or (not exact and remaining >= 1):
                yield {}
            return
        mult = mults[idx]
        for vec in _vectors_of_norm_at_most(n, remaining // mult):
            cost = mult * sum(abs(x) for x in vec)
            for rest in rec(idx + 1, remaining - cost):
                out = dict(rest)
                out[idx] = vec
                yield out

    return rec(0, total)


def wh_reachable(g, a, U: ClassTuple, shorter=False, zero_columns=frozenset(),
                 max_vertices=None, budget=SWEEP_BUDGET):
    """All tuples reachable from U inside the support-restricted Whitehead
    group of [a] with the same total length (or strictly shorter), each with
    a verified witness.

    Yields (tuple, GenWhitehead) pairs; the starting tuple itself is not
    reported.
    """
    T = decompose(g, a, U)
    nuT = nu_matrix(T)
    n = len(g.adjdom_class(a))
    k = len(za_basis(g, a)) - n
    cols = [tuple(nuT[i][j] for i in range(len(nuT)))
            for j in range(len(T.syllables))]
    tops = [col[:n] for col in cols]
    bottoms = [col[n:] for col in cols]
    total = sum(sum(abs(x) for x in top) for top in tops)
    group_of = {}
    col_group = []
    mults = []
    for top, bottom in zip(tops, bottoms):
        key = (top, bottom)
        if key not in group_of:
            group_of[key] = len(mults)
            mults.append(0)
        gi = group_of[key]
        mults[gi] += 1
        col_group.append(gi)
    seen_targets = set()
    count = 0
    for assign in _exponent_assignments(mults, n, total, exact=not shorter):
        count += 1
        if count > budget:
            raise BudgetError("exponent sweep budget exceeded")
        newexps = [assign[col_group[j]] for j in range(len(cols))]
        if not shorter and newexps == list(tops):
            continue
        cand = Decomposition(
            g, a,
            [s.with_exps(e) for s, e in zip(T.syllables, newexps)],
            T.blocks)
        ok = True
        words = []
        for b in range(len(cand.blocks)):
            word = cand.class_word(b)
            cls = canonical_class(g, word)
            if cls.length != len(word):
                ok = False
                break
            words.append(cls)
        if not ok:
            continue
        target = ClassTuple(words)
        if shorter and target.length >= U.length:
            continue
        if target == U or target in seen_targets:
            continue
        cert = g1_orbit_decide(nuT, nu_matrix(cand), n, k, zero_columns,
                               max_vertices=max_vertices)
        if cert.witness is None:
            continue
        full = cert.witness.full()
        wh = theta(g, a, tuple(tuple(int(x) for x in row) for row in full))
        if wh.aut.apply_to_tuple(U) != target:
            raise AssertionError("sweep witness does not map to its target")
        seen_targets.add(target)
        yield target, wh


def minimize_tuple(g, U: ClassTuple, full_enum=False, max_vertices=None):
    """A minimal-length tuple in the orbit of U together with a minimizing
    automorphism.

    Descends by single classic moves first, then certifies via the
    reachable-shorter sweep for every multiplier class (or, behind the
    flag, by enumerating all strictly shorter tuples).
    """
    cur = U
    total = identity_automorphism(g)
    while True:
        step = None
        for wh in enumerate_classic_whitehead(g):
            img = wh.aut.apply_to_tuple(cur)
            if img.length < cur.length:
                step = (wh.aut, img)
                break
        if step is None:
            for a in _class_reps(g):
                for target, wh in wh_reachable(g, a, cur, shorter=True,
                                               max_vertices=max_vertices):
                    step = (wh.aut, target)
                    break
                if step is not None:
                    break
        if step is None and full_enum:
            arity = len(cur.entries)
            for length in range(arity, cur.length):
                for cand in enumerate_tuples(g, arity, length):
                    for a in _class_reps(g):
                        wh = wh_orbit_decide(g, a, frozenset(), cur, cand,
                                             max_vertices=max_vertices)
                        if wh is not None:
                            step = (wh.aut, cand)
                            break
                    if step:
                        break
                if step:
                    break
        if step is None:
            break
        aut, cur = step
        total = aut.compose(total)
    if total.apply_to_tuple(U) != cur:
        raise AssertionError("minimizer does not map to the minimum")
    return cur, total


def build_delta(g, W_min: ClassTuple, with_stabilizers=False,
                max_vertices=DELTA_VERTEX_BUDGET, max_schreier=None):
    """The finite orbit graph on the component of a minimal tuple: vertices
    are same-length tuples reachable from it, edges carry permutation
    automorphisms, one witness per reachable pair per multiplier class, and
    (optionally) stabilizer generating loops."""
    graph = LabeledGraph()
    graph.add_vertex(W_min)
    frontier = [W_min]
    edge_seen = set()
    while frontier:
        W1 = frontier.pop(0)
        src = graph.vindex[W1]
        for p in permutation_automorphisms(g):
            target = p.aut.apply_to_tuple(W1)
            if target not in graph.vindex:
                if graph.n_vertices() >= max_vertices:
                    raise BudgetError("orbit graph vertex budget exceeded")
                graph.add_vertex(target)
                frontier.append(target)
            key = (src, p.aut.key())
            if key not in edge_seen:
                edge_seen.add(key)
                graph.add_edge(src, graph.vindex[target], "p%d" % len(
                    graph.edges), p)
        for a in _class_reps(g):
            for target, wh in wh_reachable(g, a, W1,
                                           max_vertices=max_schreier):
                if target not in graph.vindex:
                    if graph.n_vertices() >= max_vertices:
                        raise BudgetError("orbit graph vertex budget "
                                          "exceeded")
                    graph.add_vertex(target)
                    frontier.append(target)
                key = (src, wh.aut.key())
                if key not in edge_seen:
                    edge_seen.add(key)
                    graph.add_edge(src, graph.vindex[target],
                                   "w%d" % len(graph.edges), wh)
    if with_stabilizers:
        for W1, src in list(graph.vindex.items()):
            for a in _class_reps(g):
                pres, _ = wh_stabilizer_presentation(
                    g, a, frozenset(), W1, max_vertices=max_schreier)
                for name, wh in pres.generators:
                    key = (src, wh.aut.key())
                    if key not in edge_seen:
                        edge_seen.add(key)
                        graph.add_edge(src, src, "s%d" % len(graph.edges),
                                       wh)
    for (src, dst, name, wh) in graph.edges:
        if wh.aut.apply_to_tuple(graph.payloads[src]) != graph.payloads[dst]:
            raise AssertionError("orbit graph edge label mismatch")
    return graph


def _delta_cached(g, W_min, with_stabilizers, max_vertices, max_schreier):
    cache = g._cache.setdefault("delta", {})
    key = (W_min, with_stabilizers)
    if key not in cache:
        cache[key] = build_delta(g, W_min, with_stabilizers, max_vertices,
                                 max_schreier)
    return cache[key]


def _path_element(g, graph, parent, v):
    """Composition of edge labels along the tree path base -> v."""
    out = identity_automorphism(g)
    x = v
    steps = []
    while parent[x] is not None:
        idx, fwd = parent[x]
        steps.append((idx, fwd))
        s, d, _, _ = graph.edges[idx]
        x = s if fwd else d
    for idx, fwd in reversed(steps):
        _, _, _, wh = graph.edges[idx]
        aut = wh.aut if fwd else wh.aut.invert()
        out = aut.compose(out)
    return out


def aut_orbit_decide(g, U: ClassTuple, V: ClassTuple,
                     max_vertices=DELTA_VERTEX_BUDGET, max_schreier=None):
    """An automorphism carrying U to V, or None: minimize both sides, then
    look for V's minimum in the orbit graph component of U's minimum."""
    if len(U.entries) != len(V.entries):
        return None
    U_min, mu = minimize_tuple(g, U, max_vertices=max_schreier)
    V_min, mv = minimize_tuple(g, V, max_vertices=max_schreier)
    if U_min.length != V_min.length:
        return None
    graph = _delta_cached(g, U_min, False, max_vertices, max_schreier)
    if V_min not in graph.vindex:
        return None
    parent = graph.bfs_tree(graph.vindex[U_min])
    target = graph.vindex[V_min]
    if target not in parent:
        return None
    alpha = _path_element(g, graph, parent, target)
    result = mv.invert().compose(alpha).compose(mu)
    if result.apply_to_tuple(U) != V:
        raise AssertionError("orbit witness does not map U to V")
    return result


def stabilizer_generators(g, W: ClassTuple,
                          max_vertices=DELTA_VERTEX_BUDGET,
                          max_schreier=None):
    """A finite generating set for the stabilizer of W: fundamental-group
    generators of the orbit graph at the minimum, conjugated back."""
    W_min, mu = minimize_tuple(g, W, max_vertices=max_schreier)
    graph = _delta_cached(g, W_min, True, max_vertices, max_schreier)
    base = graph.vindex[W_min]
    parent = graph.bfs_tree(base)
    tree_edges = {entry[0] for entry in parent.values() if entry is not None}
    gens = []
    seen = set()
    mu_inv = mu.invert()
    for idx, (s, d, name, wh) in enumerate(graph.edges):
        if idx in tree_edges:
            continue
        elem = _path_element(g, graph, parent, d).invert()
        elem = elem.compose(wh.aut).compose(_path_element(g, graph, parent,
                                                          s))
        if elem.is_identity():
            continue
        out = mu_inv.compose(elem).compose(mu)
        if out.apply_to_tuple(W) != W:
            raise AssertionError("stabilizer generator moves W")
        if out not in seen:
            seen.add(out)
            gens.append(out)
    return gens


# -- the stabilizer presentation complex --------------------------------------

def _powerset(letters):
    letters = sorted(letters)
    for mask in range(1 << len(letters)):
        yield frozenset(letters[i] for i in range(len(letters))
                        if mask >> i & 1)


class StabComplex:
    """1-skeleton plus 2-cells; each cell is a closed edge path (steps of
    (edge index, forward)) with its kind tag."""

    def __init__(self, graph, cells, loop_edges, contexts):
        self.graph = graph
        self.cells = cells
        self.loop_edges = loop_edges
        self.contexts = contexts


def build_Z(g, W_min: ClassTuple, max_vertices=60, max_schreier=None,
            loop_budget=40_000):
    """The presentation complex: the orbit component with classic-move and
    support-restricted edges, stabilizer loops, and the seven cell families.

    Small instances only; the per-vertex, per-class, per-support-subset
    stabilizer loops are an exponential wall by construction.
    """
    delta = _delta_cached(g, W_min, False, max_vertices, max_schreier)
    graph = LabeledGraph()
    for key, idx in sorted(delta.vindex.items(), key=lambda kv: kv[1]):
        graph.add_vertex(key)
    vertices = list(graph.vindex.keys())

    edge_by_key = {}

    def add_edge(src, dst, wh):
        key = (src, wh.aut.key())
        if key in edge_by_key:
            return edge_by_key[key]
        idx = graph.add_edge(src, dst, "e%d" % len(graph.edges), wh)
        edge_by_key[key] = idx
        return idx

    # classic Whitehead edges (including permutations)
    classics = [w for w in enumerate_classic_whitehead(g)
                if not w.aut.is_identity()]
    perms = [w for w in permutation_automorphisms(g)
             if not w.aut.is_identity()]
    for W1 in vertices:
        src = graph.vindex[W1]
        for wh in classics + perms:
            target = wh.aut.apply_to_tuple(W1)
            if target in graph.vindex:
                add_edge(src, graph.vindex[target], wh)
    # support-restricted witness edges
    for W1 in vertices:
        src = graph.vindex[W1]
        for a in _class_reps(g):
            letters = [(v, s) for v in g.vertices
                       if v not in g.star(a) for s in (1, -1)]
            for S in _powerset(letters):
                from .whorbit import zero_columns_from_support
                zc = zero_columns_from_support(g, a, S)
                for target, wh in wh_reachable(g, a, W1, zero_columns=zc,
                                               max_vertices=max_schreier):
                    if target in graph.vindex:
                        add_edge(src, graph.vindex[target], wh)
    # stabilizer loops and their presentation contexts
    loop_edges = {}
    contexts = {}
    cells = []
    for W1 in vertices:
        src = graph.vindex[W1]
        for a in _class_reps(g):
            letters = [(v, s) for v in g.vertices
                       if v not in g.star(a) for s in (1, -1)]
            for S in _powerset(letters):
                pres, ctx = wh_stabilizer_presentation(
                    g, a, S, W1, max_vertices=max_schreier)
                contexts[(src, a, S)] = (pres, ctx)
                name_to_edge = {}
                for name, wh in pres.generators:
                    idx = add_edge(src, src, wh)
                    name_to_edge[name] = idx
                loop_edges[(src, a, S)] = name_to_edge
                # C1 cells: the relators of each stabilizer presentation
                for rel in pres.relators:
                    steps = [(name_to_edge[nm], sgn > 0) for nm, sgn in rel]
                    if steps:
                        cells.append(("C1", src, steps))

    def loop_word_for(src, a, S, wh):
        pres, ctx = contexts[(src, a, S)]
        word = ctx.rewrite(wh)
        table = loop_edges[(src, a, S)]
        return [(table[nm], sgn > 0) for nm, sgn in word]

    def edge_of(src, aut):
        return edge_by_key.get((src, aut.key()))

    # C2: non-classic long-range edges against classic factorizations
    classic_keys = {w.aut.key() for w in classics + perms}
    for idx, (src, dst, name, wh) in enumerate(list(graph.edges)):
        if not isinstance(wh.tag, MultTag):
            continue
        if wh.aut.key() in classic_keys or not is_long_range(wh):
            continue
        base = graph.payloads[src]
        fac = long_range_peak_reduce(g, classic_factor_list(wh), base)
        steps = []
        cur = src
        ok = True
        for f in fac:
            e = edge_of(cur, f.aut)
            if e is None:
                ok = False
                break
            steps.append((e, True))
            cur = graph.edges[e][1]
        if ok and cur == dst:
            cells.append(("C2", src, steps + [(idx, False)]))

    # C3: short classic loops composing to the identity
    for src in range(graph.n_vertices()):
        stack = [(src, [], identity_automorphism(g))]
        visited = 0
        while stack:
            v, steps, comp = stack.pop()
            if len(steps) >= 5:
                continue
            for eidx, (s, d, _, wh) in enumerate(graph.edges):
                if s != v or wh.aut.key() not in classic_keys:
                    continue
                visited += 1
                if visited > loop_budget:
                    break
                ncomp = wh.aut.compose(comp)
                nsteps = steps + [(eidx, True)]
                if d == src and ncomp.is_identity() and len(nsteps) >= 2:
                    cells.append(("C3", src, nsteps))
                elif len(nsteps) < 5:
                    stack.append((d, nsteps, ncomp))
            if visited > loop_budget:
                break

    # C4: conjugating inner classic loops across edges; the conjugate of a
    # letter conjugation is conjugation by the letter's image
    from .aut import conjugation_by, conjugation_letter_factors
    from .core import reduce_word
    inner_classics = []
    for v in g.vertices:
        for s in (1, -1):
            aut = conjugation_by(g, ((v, s),))
            inner_classics.append(((v, s), GenWhitehead(
                aut, mult_tag(g, v), _skip_check=True)))
    for idx, (src, dst, name, wh) in enumerate(list(graph.edges)):
        if not isinstance(wh.tag, MultTag):
            continue
        for letter, beta in inner_classics:
            bloop = edge_of(src, beta.aut)
            if bloop is None:
                continue
            wit = reduce_word(g, wh.aut.apply_to_word((letter,)))
            letters = conjugation_letter_factors(g, wit)
            steps = [(idx, False), (bloop, True), (idx, True)]
            ok = True
            tail = []
            for f in reversed(letters):
                e = edge_of(dst, f.aut)
                if e is None:
                    ok = False
                    break
                tail.append((e, False))
            if ok:
                cells.append(("C4", dst, steps + tail))

    # C5: same-class triangles against stabilizer loops
    for e1, (s1, d1, _, w1) in enumerate(graph.edges):
        if not isinstance(w1.tag, MultTag):
            continue
        a = w1.tag.vertex
        for e2, (s2, d2, _, w2) in enumerate(graph.edges):
            if s2 != d1 or not isinstance(w2.tag, MultTag) or \
                    w2.tag.cls != w1.tag.cls:
                continue
            for e3, (s3, d3, _, w3) in enumerate(graph.edges):
                if s3 != d2 or d3 != s1 or not isinstance(w3.tag, MultTag) \
                        or w3.tag.cls != w1.tag.cls:
                    continue
                if len({s1, d1, d2}) < 2:
                    continue
                comp = w3.aut.compose(w2.aut).compose(w1.aut)
                gw = GenWhitehead(comp, mult_tag(g, a), _skip_check=True)
                if gw.aut.apply_to_tuple(graph.payloads[s1]) != \
                        graph.payloads[s1]:
                    continue
                try:
                    word = loop_word_for(s1, _rep_of(g, a), frozenset(), gw)
                except Exception:
                    continue
                steps = [(e1, True), (e2, True), (e3, True)]
                steps += [(e, not fwd) for e, fwd in reversed(word)]
                cells.append(("C5", s1, steps))

    # C6: permutation conjugation squares closed by stabilizer loops
    for ep, (sp, dp, _, wp) in enumerate(graph.edges):
        if not isinstance(wp.tag, PermTag):
            continue
        W1 = sp
        for eb, (sb, db, _, wb) in enumerate(graph.edges):
            if sb != W1 or not isinstance(wb.tag, MultTag):
                continue
            b = wb.tag.vertex
            bimg = wp.aut.images[b][0][0]
            target = wp.aut.apply_to_tuple(graph.payloads[db])
            if target not in graph.vindex:
                continue
            tgt = graph.vindex[target]
            # an edge labeled in the image multiplier class from pW1 to pbW1
            for eg, (sg, dg, _, wg) in enumerate(graph.edges):
                if sg != dp or dg != tgt or not isinstance(wg.tag, MultTag):
                    continue
                if wg.tag.cls != g.adjdom_class(bimg):
                    continue
                diff = wp.aut.compose(wb.aut.invert()).compose(
                    wp.aut.invert()).compose(wg.aut)
                gw = GenWhitehead(diff, mult_tag(g, bimg), _skip_check=True)
                if not gw.aut.apply_to_tuple(graph.payloads[dp]) == \
                        graph.payloads[dp]:
                    continue
                try:
                    word = loop_word_for(dp, _rep_of(g, bimg), frozenset(),
                                         gw)
                except Exception:
                    continue
                steps = [(ep, False), (eb, True), (ep, True), (eg, False)]
                steps += word
                cells.append(("C6", dp, steps))
                break

    # C7: Steinberg squares closed by stabilizer loops
    from .peak import fixes_class_pointwise
    from .aut import support as gw_support
    for ea, (sa_, da_, _, wa) in enumerate(graph.edges):
        if not isinstance(wa.tag, MultTag):
            continue
        for eb, (sb, db, _, wb) in enumerate(graph.edges):
            if sb != sa_ or eb == ea or not isinstance(wb.tag, MultTag):
                continue
            if wa.tag.cls == wb.tag.cls:
                continue
            a, b = wa.tag.vertex, wb.tag.vertex
            if not fixes_class_pointwise(wa, wb.tag.cls):
                continue
            if not g.adjacent(a, b):
                if gw_support(wa) & gw_support(wb):
                    continue
                if not fixes_class_pointwise(wb, wa.tag.cls):
                    continue
            W1 = sa_
            abW1 = wa.aut.compose(wb.aut).apply_to_tuple(graph.payloads[W1])
            if abW1 not in graph.vindex:
                continue
            tgt = graph.vindex[abW1]
            gammas = [e for e, (s, d, _, w) in enumerate(graph.edges)
                      if s == db and d == tgt and isinstance(w.tag, MultTag)
                      and w.tag.cls == wa.tag.cls]
            deltas = [e for e, (s, d, _, w) in enumerate(graph.edges)
                      if s == da_ and d == tgt and isinstance(w.tag, MultTag)
                      and w.tag.cls == wb.tag.cls]
            if not gammas or not deltas:
                continue
            eg, ed = gammas[0], deltas[0]
            wg = graph.edges[eg][3]
            wd = graph.edges[ed][3]
            u1 = wa.aut.compose(wg.aut.invert())
            u2 = wd.aut.compose(wa.aut).compose(wb.aut.invert()).compose(
                wa.aut.invert())
            gw1 = GenWhitehead(u1, mult_tag(g, a), _skip_check=True)
            gw2 = GenWhitehead(u2, mult_tag(g, b), _skip_check=True)
            if gw1.aut.apply_to_tuple(abW1) != abW1 or \
                    gw2.aut.apply_to_tuple(abW1) != abW1:
                continue
            try:
                word1 = loop_word_for(tgt, _rep_of(g, a), frozenset(), gw1)
                word2 = loop_word_for(tgt, _rep_of(g, b), frozenset(), gw2)
            except Exception:
                continue
            steps = [(eb, True), (eg, True)]
            steps += word1 + word2
            steps += [(ed, False), (ea, False)]
            cells.append(("C7", W1, steps))

    return StabComplex(graph, cells, loop_edges, contexts)


def _rep_of(g, a):
    for v in _class_reps(g):
        if v in g.adjdom_class(a):
            return v
    return a


def _verify_cells(g, Z: StabComplex):
    for kind, base, steps in Z.cells:
        comp = identity_automorphism(g)
        v = base
        for eidx, fwd in steps:
            s, d, _, wh = Z.graph.edges[eidx]
            if fwd:
                if s != v:
                    raise AssertionError("%s cell path broken" % kind)
                comp = wh.aut.compose(comp)
                v = d
            else:
                if d != v:
                    raise AssertionError("%s cell path broken" % kind)
                comp = wh.aut.invert().compose(comp)
                v = s
        if v != base or not comp.is_identity():
            raise AssertionError("%s cell boundary is not an identity loop"
                                 % kind)


def stabilizer_presentation(g, W: ClassTuple, max_vertices=60,
                            max_schreier=None):
    """Finite presentation of the stabilizer of W read off the fundamental
    group of the presentation complex at the minimal representative."""
    W_min, mu = minimize_tuple(g, W, max_vertices=max_schreier)
    Z = build_Z(g, W_min, max_vertices=max_vertices,
                max_schreier=max_schreier)
    _verify_cells(g, Z)
    graph = Z.graph
    base = graph.vindex[W_min]
    parent = graph.bfs_tree(base)
    if len(parent) != graph.n_vertices():
        raise AssertionError("presentation complex is not connected")
    tree_edges = {entry[0] for entry in parent.values() if entry is not None}
    gen_of_edge = {}
    gens = []
    mu_inv = mu.invert()
    for idx, (s, d, name, wh) in enumerate(graph.edges):
        if idx in tree_edges:
            continue
        elem = _path_element(g, graph, parent, d).invert()
        elem = elem.compose(wh.aut).compose(
            _path_element(g, graph, parent, s))
        gname = "z%d" % (len(gens) + 1)
        gen_of_edge[idx] = gname
        gens.append((gname, mu_inv.compose(elem).compose(mu)))
    relators = []
    for kind, cbase, steps in Z.cells:
        # close the relator at the base vertex through the tree; the word
        # spells the composed element, so it reads the path backwards
        prefix = _tree_steps(graph, parent, cbase)
        path = prefix + steps + [(e, not fwd) for e, fwd in
                                 reversed(prefix)]
        word = []
        for eidx, fwd in reversed(path):
            if eidx in gen_of_edge:
                word.append((gen_of_edge[eidx], 1 if fwd else -1))
        relators.append(tuple(word))
    pres = Presentation(gens, relators)
    payloads = {nm: aut for nm, aut in pres.generators}
    for nm, aut in pres.generators:
        if aut.apply_to_tuple(W) != W:
            raise AssertionError("presented generator moves W")
    from .linalg import evaluate_word
    ident = identity_automorphism(g)
    for rel in pres.relators:
        val = evaluate_word(rel, payloads, lambda x, y: x.compose(y),
                            lambda x: x.invert(), ident)
        if not val.is_identity():
            raise AssertionError("presented relator is not the identity")
    return pres


def _tree_steps(graph, parent, v):
    steps = []
    x = v
    while parent[x] is not None:
        idx, fwd = parent[x]
        steps.append((idx, fwd))
        s, d, _, _ = graph.edges[idx]
        x = s if fwd else d
    steps.reverse()
    return steps
