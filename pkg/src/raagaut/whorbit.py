"""Orbit decision and stabilizer presentations inside one generalized
Whitehead group, with optional support restriction.

The route is the syllable one: decompose, enumerate the permutations of the
target's decomposition that still decompose the target, substitute their
class exponents into the source frames, and solve the resulting matrix
orbit problem in the block group (with columns zeroed where the support
restriction demands it).
"""

from __future__ import annotations

from .aut import (GenWhitehead, apply_gw, eta, identity_automorphism,
                  support, theta, za_basis)
from .core import ClassTuple, InputError
from .errors import BudgetError
from .linalg import (LabeledGraph, Presentation, evaluate_word,
                     g1_orbit_decide, g1_stabilizer_presentation)
from .syllables import (Decomposition, decompose, matching_permutations,
                        nu_matrix, syllable_count)


def parse_support(g, text):
    """Support sets are comma-separated letters like ``c,c^-1``."""
    from .core import parse_word
    letters = set()
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        w = parse_word(tok)
        if len(w) != 1:
            raise InputError("support entries must be single letters")
        letters.add(w[0])
    return frozenset(letters)


def zero_columns_from_support(g, a, S):
    """Indices (into the non-class part of the basis) of columns forced to
    vanish: r_b for b in S, l_b for b^-1 in S, r_Y whenever the component
    meets S."""
    S = frozenset(S)
    for gen, _ in S:
        if gen in g.star(a):
            raise InputError("support restriction meets the star of %r" % a)
    basis = za_basis(g, a)
    n = len(g.adjdom_class(a))
    cols = set()
    for j, (kind, payload) in enumerate(basis[n:]):
        if kind == "r" and payload not in g.star(a) and (payload, 1) in S:
            cols.add(j)
        elif kind == "l" and (payload, -1) in S:
            cols.add(j)
        elif kind == "Y":
            if any(gen in payload for gen, _ in S):
                cols.add(j)
    return frozenset(cols)


def _exponent_rows(g, a, mat):
    n = len(g.adjdom_class(a))
    return tuple(mat[i] for i in range(n))


def _substitute(source: Decomposition, exps_mat):
    """Source frames with the class exponents replaced column by column."""
    n = len(source.cls_order)
    new = []
    for j, s in enumerate(source.syllables):
        new.append(s.with_exps(tuple(exps_mat[i][j] for i in range(n))))
    return Decomposition(source.graph, source.vertex, new, source.blocks)


def wh_orbit_decide(g, a, S, U: ClassTuple, V: ClassTuple,
                    max_vertices=None, perm_budget=200_000):
    """An element of the support-restricted Whitehead group of [a] carrying
    U to V, or None.

    Soundness is rechecked on the witness before returning.
    """
    S = frozenset(S)
    if len(U.entries) != len(V.entries):
        return None
    for cu, cv in zip(U.entries, V.entries):
        if syllable_count(g, a, cu) != syllable_count(g, a, cv):
            return None
    T = decompose(g, a, U)
    Tv = decompose(g, a, V)
    zc = zero_columns_from_support(g, a, S)
    n, k = len(g.adjdom_class(a)), len(za_basis(g, a)) - len(
        g.adjdom_class(a))
    nuT = nu_matrix(T)
    tried = set()
    for perm in matching_permutations(Tv, V, budget=perm_budget):
        target = nu_matrix(perm)
        exps = _exponent_rows(g, a, target)
        if exps in tried:
            continue
        tried.add(exps)
        cand = _substitute(T, exps)
        if not cand.represents(V):
            continue
        cert = g1_orbit_decide(nuT, nu_matrix(cand), n, k, zc,
                               max_vertices=max_vertices)
        if cert.witness is None:
            continue
        D = cert.witness
        full = D.full()
        mat = tuple(tuple(int(x) for x in row) for row in full)
        wh = theta(g, a, mat)
        if apply_gw(wh, U) != V:
            raise AssertionError("orbit witness does not map U to V")
        if S and support(wh) & S:
            raise AssertionError("orbit witness violates the support "
                                 "restriction")
        return wh
    return None


def wh_stabilizer_presentation(g, a, S, U: ClassTuple, max_vertices=None,
                               perm_budget=200_000):
    """Finite presentation of the support-restricted stabilizer of U in the
    Whitehead group of [a].

    Returns (presentation, ctx) where the context can rewrite further
    stabilizer elements over the returned generators.
    """
    S = frozenset(S)
    T1 = decompose(g, a, U)
    zc = zero_columns_from_support(g, a, S)
    n = len(g.adjdom_class(a))
    k = len(za_basis(g, a)) - n
    nu1 = nu_matrix(T1)

    # candidate vertices: distinct exponent targets from valid permutations
    targets = []
    seen = set()
    for perm in matching_permutations(T1, U, budget=perm_budget):
        exps = _exponent_rows(g, a, nu_matrix(perm))
        if exps in seen:
            continue
        seen.add(exps)
        cand = _substitute(T1, exps)
        if cand.represents(U):
            targets.append(nu_matrix(cand))

    pres_matrix, mctx = g1_stabilizer_presentation(nu1, n, k, zc,
                                                   max_vertices=max_vertices)
    s2 = []
    for name, payload in pres_matrix.generators:
        full = payload.full()
        mat = tuple(tuple(int(x) for x in row) for row in full)
        s2.append((name, theta(g, a, mat)))

    vertices = [nu1]
    transversal = {_mat_key(nu1): BlockMatrixIdentity(n, k)}
    s1 = []
    for target in targets:
        if _mat_key(target) == _mat_key(nu1):
            continue
        cert = g1_orbit_decide(nu1, target, n, k, zc,
                               max_vertices=max_vertices)
        if cert.witness is None:
            continue
        vertices.append(target)
        transversal[_mat_key(target)] = cert.witness
        s1.append(("t%d" % len(s1), _theta_of(g, a, cert.witness)))

    graph = LabeledGraph()
    for v in vertices:
        graph.add_vertex(_mat_key(v), v)
    labelled = list(s1) + s2
    for name, wh in labelled:
        mat = _eta_at(g, a, wh)
        for v in vertices:
            img = _mat_mul_int(mat, v)
            key = _mat_key(img)
            if key not in graph.vindex:
                raise AssertionError("stabilizer label leaves the vertex set")
            graph.add_edge(graph.vindex[_mat_key(v)], graph.vindex[key],
                           name, wh)

    base = graph.vindex[_mat_key(nu1)]

    def rewriter(elem: GenWhitehead):
        return mctx.rewrite(_block_of(g, a, elem, n, k))

    from .linalg import presentation_from_finite_index
    pres = presentation_from_finite_index(
        Presentation(s2, pres_matrix.relators), s1, graph, base, rewriter,
        lambda x, y: _compose(x, y), lambda x: x.invert(),
        GenWhitehead(identity_automorphism(g), _mult_tag(g, a),
                     _skip_check=True))
    ctx = WhStabCtx(g=g, a=a, S=S, graph=graph, base=base, mctx=mctx,
                    pres=pres, n=n, k=k, transversal=transversal,
                    vertices=vertices)
    for name, wh in pres.generators:
        if apply_gw(wh, U) != U:
            raise AssertionError("stabilizer generator moves U")
        if S and support(wh) & S:
            raise AssertionError("stabilizer generator violates the support "
                                 "restriction")
    payloads = {name: wh.aut for name, wh in pres.generators}
    ident = identity_automorphism(g)
    for rel in pres.relators:
        val = evaluate_word(rel, payloads, lambda x, y: x.compose(y),
                            lambda x: x.invert(), ident)
        if not val.is_identity():
            raise AssertionError("stabilizer relator is not the identity")
    return pres, ctx


class WhStabCtx:
    __slots__ = ("g", "a", "S", "graph", "base", "mctx", "pres", "n", "k",
                 "transversal", "vertices")

    def __init__(self, **kw):
        for key, val in kw.items():
            setattr(self, key, val)

    def rewrite(self, wh: GenWhitehead):
        """Word over the presentation's generators for a stabilizer element:
        move to the base vertex with a transversal letter, then rewrite the
        matrix-stabilizer part."""
        g, a = self.g, self.a
        mat = _eta_at(g, a, wh)
        img = _mat_mul_int(mat, self.vertices[0])
        key = _mat_key(img)
        tnames = {_mat_key(v): "t%d" % i
                  for i, v in enumerate(self.vertices[1:])}
        if key == _mat_key(self.vertices[0]):
            head = ()
            rest = wh
        else:
            if key not in self.transversal:
                raise InputError("element does not stabilize the tuple")
            t = self.transversal[key]
            head = ((tnames[key], 1),)
            tinv = _theta_of(g, a, t).invert()
            rest = _compose(tinv, wh)
        return head + self.mctx.rewrite(_block_of(g, a, rest, self.n,
                                                  self.k))


def _mat_key(m):
    return tuple(tuple(row) for row in m)


def _mat_mul_int(A, B):
    rows = len(A)
    inner = len(B)
    cols = len(B[0]) if B else 0
    return tuple(tuple(sum(A[i][t] * B[t][j] for t in range(inner))
                       for j in range(cols)) for i in range(rows))


def _mult_tag(g, a):
    from .aut import mult_tag
    return mult_tag(g, a)


def _compose(x: GenWhitehead, y: GenWhitehead) -> GenWhitehead:
    from .aut import compose_gw
    return compose_gw(x, y)


def _theta_of(g, a, block):
    full = block.full()
    mat = tuple(tuple(int(v) for v in row) for row in full)
    return theta(g, a, mat)


def _eta_at(g, a, wh: GenWhitehead):
    """Matrix of the element with respect to the basis at ``a``, regardless
    of how the element happens to be tagged."""
    from .aut import mult_tag
    return eta(GenWhitehead(wh.aut, mult_tag(g, a), _skip_check=True))


def _block_of(g, a, wh: GenWhitehead, n, k):
    from .linalg import BlockMatrix
    mat = _eta_at(g, a, wh)
    A = [[mat[i][j] for j in range(n)] for i in range(n)]
    B = [[mat[i][j] for j in range(n, n + k)] for i in range(n)]
    return BlockMatrix(n, k, A, B)


def BlockMatrixIdentity(n, k):
    from .linalg import BlockMatrix
    return BlockMatrix.identity(n, k)
