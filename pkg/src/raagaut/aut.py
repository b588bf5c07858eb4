"""Automorphisms of a right-angled Artin group: Laurence generators,
permutation automorphisms, generalized Whitehead automorphisms, supports,
and the embedding of each multiplier group into block integer matrices.

Automorphisms are stored as validated pairs (images, inverse images); both
maps are checked to be endomorphisms and mutually inverse on generators, so
inverting never requires solving anything.
"""

from __future__ import annotations

import json
from itertools import permutations, product

from .core import (DefiningGraph, InputError, Word, canonical_class,
                   class_tuple, format_word, inverse_word, lexnf, parse_word,
                   reduce_word, words_equal, ClassTuple)
from .errors import BudgetError


class Automorphism:
    """A validated automorphism given by generator images and inverse images."""

    __slots__ = ("graph", "images", "inverse_images", "_key")

    def __init__(self, graph, images, inverse_images, _skip_check=False):
        self.graph = graph
        self.images = {v: reduce_word(graph, images[v]) for v in graph.vertices}
        self.inverse_images = {
            v: reduce_word(graph, inverse_images[v]) for v in graph.vertices}
        self._key = None
        if not _skip_check:
            self._validate()

    def _validate(self):
        g = self.graph
        for imgs in (self.images, self.inverse_images):
            for u in g.vertices:
                for v in g.adj[u]:
                    com = imgs[u] + imgs[v] + inverse_word(imgs[u]) + \
                        inverse_word(imgs[v])
                    if reduce_word(g, com):
                        raise InputError(
                            "images of adjacent %r,%r do not commute" % (u, v))
        for v in g.vertices:
            w = self.apply_inverse_to_word(self.images[v])
            if w != ((v, 1),):
                raise InputError("maps are not mutually inverse at %r" % (v,))
            w = self.apply_to_word(self.inverse_images[v])
            if w != ((v, 1),):
                raise InputError("maps are not mutually inverse at %r" % (v,))

    # -- action ------------------------------------------------------------

    def _map_word(self, imgs, word):
        out = []
        for gen, sign in word:
            img = imgs[gen]
            out.extend(img if sign > 0 else inverse_word(img))
        return reduce_word(self.graph, tuple(out))

    def apply_to_word(self, word) -> Word:
        return self._map_word(self.images, word)

    def apply_inverse_to_word(self, word) -> Word:
        return self._map_word(self.inverse_images, word)

    def apply_to_class(self, cls):
        return canonical_class(self.graph, self.apply_to_word(cls.word))

    def apply_to_tuple(self, tup: ClassTuple) -> ClassTuple:
        return ClassTuple([self.apply_to_class(c) for c in tup])

    # -- algebra -----------------------------------------------------------

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other (apply ``other`` first)."""
        if self.graph is not other.graph:
            raise InputError("automorphisms live on different graphs")
        g = self.graph
        images = {v: self.apply_to_word(other.images[v]) for v in g.vertices}
        inv = {v: other.apply_inverse_to_word(self.inverse_images[v])
               for v in g.vertices}
        return Automorphism(g, images, inv, _skip_check=True)

    def invert(self) -> "Automorphism":
        return Automorphism(self.graph, self.inverse_images, self.images,
                            _skip_check=True)

    def key(self):
        if self._key is None:
            g = self.graph
            self._key = tuple(lexnf(g, self.images[v]) for v in g.vertices)
        return self._key

    def __eq__(self, other):
        return (isinstance(other, Automorphism)
                and self.graph is other.graph and self.key() == other.key())

    def __hash__(self):
        return hash(self.key())

    def is_identity(self):
        return all(self.images[v] == ((v, 1),) for v in self.graph.vertices)

    def is_permutation(self):
        """Restricts to a permutation of the letters."""
        return all(len(self.images[v]) == 1 for v in self.graph.vertices)

    def to_json(self):
        return {"images": {v: format_word(w) for v, w in self.images.items()},
                "inverse_images": {
                    v: format_word(w) for v, w in self.inverse_images.items()}}

    @classmethod
    def from_json(cls, graph, data):
        try:
            images = {v: parse_word(w) for v, w in data["images"].items()}
            inv = {v: parse_word(w)
                   for v, w in data["inverse_images"].items()}
        except (KeyError, TypeError) as exc:
            raise InputError("bad automorphism data: %s" % exc)
        missing = set(graph.vertices) - set(images) | \
            set(graph.vertices) - set(inv)
        if missing:
            raise InputError("missing images for %s" % sorted(missing))
        return cls(graph, images, inv)

    @classmethod
    def load(cls, graph, path):
        with open(path) as fh:
            return cls.from_json(graph, json.load(fh))

    def __repr__(self):
        parts = ", ".join(
            "%s->%s" % (v, format_word(w) or "1")
            for v, w in self.images.items() if w != ((v, 1),))
        return "Automorphism(%s)" % (parts or "id")


def identity_automorphism(g) -> Automorphism:
    ims = {v: ((v, 1),) for v in g.vertices}
    return Automorphism(g, ims, dict(ims), _skip_check=True)


class PermTag:
    __slots__ = ()

    def __repr__(self):
        return "Perm"


class MultTag:
    """Multiplier tag: the automorphism lies in the Whitehead group of [a]."""

    __slots__ = ("vertex", "cls")

    def __init__(self, vertex, cls):
        self.vertex = vertex
        self.cls = cls

    def __repr__(self):
        return "Mult[%s]" % (self.vertex,)


class GenWhitehead:
    """A generalized Whitehead automorphism together with its tag.

    ``classic`` optionally records (multiplier letter, support) when the
    automorphism is a classic Whitehead automorphism built as such.
    """

    __slots__ = ("aut", "tag", "classic")

    def __init__(self, aut, tag, classic=None, _skip_check=False):
        self.aut = aut
        self.tag = tag
        self.classic = classic
        if not _skip_check:
            if isinstance(tag, PermTag):
                if not aut.is_permutation():
                    raise InputError("permutation tag on a non-permutation")
            else:
                if not is_in_whset(aut, tag.vertex):
                    raise InputError(
                        "automorphism is not in the Whitehead group of [%s]"
                        % tag.vertex)

    @property
    def graph(self):
        return self.aut.graph

    def invert(self):
        classic = None
        if self.classic is not None:
            m, supp = self.classic
            classic = ((m[0], -m[1]),
                       frozenset((v, -s) for v, s in supp))
        return GenWhitehead(self.aut.invert(), self.tag, classic,
                            _skip_check=True)

    def __eq__(self, other):
        return isinstance(other, GenWhitehead) and self.aut == other.aut

    def __hash__(self):
        return hash(self.aut)

    def __repr__(self):
        return "GenWhitehead(%r, %r)" % (self.tag, self.aut)


def is_in_whset(aut: Automorphism, a) -> bool:
    """Check the two defining clauses of the Whitehead group of [a] against
    the reduced images."""
    g = aut.graph
    cls = g.adjdom_class(a)
    for b in g.vertices:
        img = aut.images[b]
        if b in cls:
            if any(gen not in cls for gen, _ in img):
                return False
        else:
            outside = [(gen, s) for gen, s in img if gen not in cls]
            if outside != [(b, 1)]:
                return False
    return True


def mult_tag(g, a):
    return MultTag(a, g.adjdom_class(a))


def make_whitehead(g, a, images, inverse_images, classic=None) -> GenWhitehead:
    aut = Automorphism(g, images, inverse_images)
    return GenWhitehead(aut, mult_tag(g, a), classic)


def support(wh: GenWhitehead):
    """Support of a multiplier-tagged generalized Whitehead automorphism,
    straight from the definition."""
    if not isinstance(wh.tag, MultTag):
        raise InputError("support is defined for multiplier-tagged elements")
    g = wh.graph
    a = wh.tag.vertex
    cls = wh.tag.cls
    supp = set()
    for b in g.vertices:
        img = wh.aut.images[b]
        if b in g.star(a):
            if img != ((b, 1),):
                supp.add((b, 1))
                supp.add((b, -1))
        else:
            u, v = split_around(g, cls, img, b)
            if v:
                supp.add((b, 1))
            if u:
                supp.add((b, -1))
    return frozenset(supp)


def split_around(g, cls, word, b):
    """Split a reduced image u*b*v of a generator b not adjacent to the
    multiplier class into its left and right multiplier parts."""
    pos = [i for i, (gen, _) in enumerate(word) if gen not in cls]
    if len(pos) != 1 or word[pos[0]] != (b, 1):
        raise InputError("image is not of the form u*%s*v" % b)
    i = pos[0]
    return word[:i], word[i + 1:]


def sum_exponent(word, gen):
    return sum(s for gname, s in word if gname == gen)


# -- the Z_[a] basis and the eta/theta correspondence ----------------------

def za_basis(g, a):
    """Ordered basis of the free abelian group attached to [a]:

    r_b for b in [a] (generator order), then r_b for the other adjacent
    dominated vertices, then interleaved r_b, l_b for non-adjacent dominated
    vertices, then one r_Y per component of the graph minus st(a) with at
    least two vertices (by least vertex).
    """
    key = ("za_basis", a)
    if key not in g._cache:
        cls = sorted(g.adjdom_class(a), key=g.index.get)
        star = g.star(a)
        dom = g.dom(a)
        basis = [("r", b) for b in cls]
        for b in sorted(star & dom - g.adjdom_class(a), key=g.index.get):
            basis.append(("r", b))
        for b in sorted(dom - star, key=g.index.get):
            basis.append(("r", b))
            basis.append(("l", b))
        for comp in g.components_outside_star(a):
            if len(comp) >= 2:
                basis.append(("Y", comp))
        g._cache[key] = tuple(basis)
    return g._cache[key]


def za_dims(g, a):
    basis = za_basis(g, a)
    n = len(g.adjdom_class(a))
    return n, len(basis) - n


def eta(wh: GenWhitehead):
    """Matrix of the automorphism on the basis above (columns = images of
    basis vectors).  Only defined for multiplier tags."""
    if not isinstance(wh.tag, MultTag):
        raise InputError("eta is defined for multiplier-tagged elements")
    g = wh.graph
    a = wh.tag.vertex
    cls = wh.tag.cls
    basis = za_basis(g, a)
    n = len(cls)
    dim = len(basis)
    col_of = {b: j for j, b in enumerate(basis)}
    cols = [[0] * dim for _ in range(dim)]
    for j, b in enumerate(basis):
        col = cols[j]
        kind, payload = b
        if kind == "r" and payload in cls:
            img = wh.aut.images[payload]
            for i in range(n):
                col[i] = sum_exponent(img, basis[i][1])
        elif kind == "r" and payload in g.star(a):
            img = wh.aut.images[payload]
            for i in range(n):
                col[i] = sum_exponent(img, basis[i][1])
            col[j] = 1
        elif kind in ("r", "l"):
            u, v = split_around(g, cls, wh.aut.images[payload], payload)
            side = v if kind == "r" else u
            for i in range(n):
                col[i] = sum_exponent(side, basis[i][1])
            col[j] = 1
        else:
            comp = payload
            x = min(comp, key=g.index.get)
            u, v = split_around(g, cls, wh.aut.images[x], x)
            for i in range(n):
                col[i] = sum_exponent(v, basis[i][1])
            col[j] = 1
    # rows x cols
    return tuple(tuple(cols[j][i] for j in range(dim)) for i in range(dim))


def _power_word(cls_order, exps):
    out = []
    for b, e in zip(cls_order, exps):
        out.extend([(b, 1 if e > 0 else -1)] * abs(e))
    return tuple(out)


def theta(g, a, matrix) -> GenWhitehead:
    """Inverse of eta: rebuild the automorphism from a block matrix of the
    required shape (invertible integer top-left block over [a], arbitrary
    integer top-right block, identity bottom)."""
    basis = za_basis(g, a)
    cls_order = [b for kind, b in basis if kind == "r" and b in g.adjdom_class(a)]
    n = len(cls_order)
    dim = len(basis)
    if len(matrix) != dim or any(len(row) != dim for row in matrix):
        raise InputError("matrix has wrong shape for this basis")
    for i in range(n, dim):
        for j in range(dim):
            want = 1 if i == j else 0
            if matrix[i][j] != want:
                raise InputError("matrix bottom block is not the identity")
    from .exactmat import int_inverse
    inv = int_inverse(matrix)  # raises if det is not +-1

    def images_from(mat):
        ims = {}
        col = {b: j for j, b in enumerate(basis)}
        for v in g.vertices:
            if v in g.adjdom_class(a):
                j = col[("r", v)]
                ims[v] = _power_word(cls_order,
                                     [mat[i][j] for i in range(n)])
            elif v in g.star(a) and v in g.dom(a):
                j = col[("r", v)]
                tail = _power_word(cls_order, [mat[i][j] for i in range(n)])
                ims[v] = ((v, 1),) + tail
            elif v in g.dom(a):
                ju, jv = col[("l", v)], col[("r", v)]
                left = _power_word(cls_order, [mat[i][ju] for i in range(n)])
                right = _power_word(cls_order, [mat[i][jv] for i in range(n)])
                ims[v] = left + ((v, 1),) + right
            else:
                comp = g.component_of(a, v)
                if comp is not None and len(comp) >= 2:
                    j = col[("Y", comp)]
                    u = _power_word(cls_order, [mat[i][j] for i in range(n)])
                    ims[v] = inverse_word(u) + ((v, 1),) + u
                else:
                    ims[v] = ((v, 1),)
        return ims

    return make_whitehead(g, a, images_from(matrix), images_from(inv))


def inner_witness(wh: GenWhitehead):
    """If the automorphism is conjugation by a word in the multiplier class,
    return that word; otherwise None.

    Recognized from the matrix: identity top-left block, zero columns on
    adjacent dominated vertices, and a single exponent vector e appearing as
    +e on every r_c and r_Y column and -e on every l_c column.
    """
    g = wh.graph
    a = wh.tag.vertex
    basis = za_basis(g, a)
    cls_order = [b for kind, b in basis
                 if kind == "r" and b in g.adjdom_class(a)]
    n = len(cls_order)
    mat = eta(wh)
    for i in range(n):
        for j in range(n):
            if mat[i][j] != (1 if i == j else 0):
                return None
    e = None
    for j in range(n, len(basis)):
        kind, payload = basis[j]
        colv = tuple(mat[i][j] for i in range(n))
        if kind == "r" and payload in g.star(a):
            if any(colv):
                return None
            continue
        want = colv if kind in ("r", "Y") else tuple(-x for x in colv)
        if e is None:
            e = want
        elif e != want:
            return None
    if e is None:
        e = (0,) * n
    word = _power_word(cls_order, e)
    return word


def conjugation_by(g, word) -> Automorphism:
    """Inner automorphism x -> w^-1 x w."""
    winv = inverse_word(word)
    ims = {v: reduce_word(g, winv + ((v, 1),) + word) for v in g.vertices}
    inv = {v: reduce_word(g, word + ((v, 1),) + winv) for v in g.vertices}
    return Automorphism(g, ims, inv, _skip_check=True)


def conjugation_letter_factors(g, word):
    """Conjugation by a word as a list of single-letter conjugations, each a
    generalized Whitehead automorphism; applying them first-to-last yields
    conjugation by the whole word."""
    factors = []
    for gen, sign in word:
        aut = conjugation_by(g, ((gen, sign),))
        factors.append(GenWhitehead(aut, mult_tag(g, gen), _skip_check=True))
    return factors


# -- generator enumeration -------------------------------------------------

def graph_symmetries(g):
    """All adjacency-preserving vertex permutations, by brute force."""
    key = "symmetries"
    if key not in g._cache:
        out = []
        for perm in permutations(g.vertices):
            pi = dict(zip(g.vertices, perm))
            if all((pi[v] in g.adj[pi[u]]) == (v in g.adj[u])
                   for u in g.vertices for v in g.vertices if u != v):
                out.append(pi)
        g._cache[key] = out
    return g._cache[key]


def permutation_automorphisms(g, budget=100_000):
    """The finite subgroup of automorphisms permuting the letters."""
    key = "perm_auts"
    if key not in g._cache:
        syms = graph_symmetries(g)
        if len(syms) * 2 ** len(g.vertices) > budget:
            raise BudgetError("too many permutation automorphisms")
        out = []
        for pi in syms:
            for signs in product((1, -1), repeat=len(g.vertices)):
                ims = {v: ((pi[v], s),)
                       for v, s in zip(g.vertices, signs)}
                inv = {}
                for v, s in zip(g.vertices, signs):
                    inv[pi[v]] = ((v, s),)
                aut = Automorphism(g, ims, inv, _skip_check=True)
                out.append(GenWhitehead(aut, PermTag(), _skip_check=True))
        g._cache[key] = out
    return g._cache[key]


def _transvection(g, target, mult, side):
    """target -> target*mult (side="right") or mult^-1... left form is
    target -> mult*target."""
    ims = {v: ((v, 1),) for v in g.vertices}
    inv = {v: ((v, 1),) for v in g.vertices}
    if side == "right":
        ims[target] = ((target, 1), mult)
        inv[target] = ((target, 1), (mult[0], -mult[1]))
    else:
        ims[target] = (mult, (target, 1))
        inv[target] = ((mult[0], -mult[1]), (target, 1))
    return Automorphism(g, ims, inv, _skip_check=True)


def _partial_conjugation(g, mult, comp):
    ims = {v: ((v, 1),) for v in g.vertices}
    inv = {v: ((v, 1),) for v in g.vertices}
    minv = (mult[0], -mult[1])
    for c in comp:
        ims[c] = (mult, (c, 1), minv)
        inv[c] = (minv, (c, 1), mult)
    return Automorphism(g, ims, inv, _skip_check=True)


def _inversion(g, a):
    ims = {v: ((v, 1),) for v in g.vertices}
    ims[a] = ((a, -1),)
    return Automorphism(g, ims, dict(ims), _skip_check=True)


def laurence_generators(g):
    """The finite Laurence generating set: dominated transvections (right
    always; left when the pair is non-adjacent), partial conjugations,
    inversions and graphic automorphisms."""
    key = "laurence"
    if key not in g._cache:
        out = []
        seen = set()

        def add(wh):
            if wh.aut not in seen and not wh.aut.is_identity():
                seen.add(wh.aut)
                out.append(wh)

        for a in g.vertices:
            for b in g.vertices:
                if a == b or not g.dominates(a, b):
                    continue
                add(GenWhitehead(_transvection(g, b, (a, 1), "right"),
                                 mult_tag(g, a), _skip_check=True))
                if not g.adjacent(a, b):
                    add(GenWhitehead(_transvection(g, b, (a, -1), "left"),
                                     mult_tag(g, a), _skip_check=True))
        for a in g.vertices:
            for comp in g.components_outside_star(a):
                add(GenWhitehead(_partial_conjugation(g, (a, 1), comp),
                                 mult_tag(g, a), _skip_check=True))
        for a in g.vertices:
            add(GenWhitehead(_inversion(g, a), PermTag(), _skip_check=True))
        for pi in graph_symmetries(g):
            ims = {v: ((pi[v], 1),) for v in g.vertices}
            inv = {pi[v]: ((v, 1),) for v in g.vertices}
            add(GenWhitehead(Automorphism(g, ims, inv, _skip_check=True),
                             PermTag(), _skip_check=True))
        g._cache[key] = out
    return g._cache[key]


def enumerate_classic_whitehead(g, long_range_only=False, budget=200_000):
    """All classic Whitehead automorphisms of multiplier type, both
    multiplier signs, including the identity.

    Per-vertex actions are chosen consistently with the structure of the
    multiplier group: non-adjacent dominated vertices take any of the four
    classic actions, components with at least two vertices move as blocks
    (conjugation only), adjacent dominated vertices may be multiplied on one
    side, and everything else stays fixed.  With ``long_range_only`` the
    star of the multiplier is left untouched.
    """
    key = ("classics", long_range_only)
    if key in g._cache:
        return g._cache[key]
    out = []
    seen = set()
    identity = identity_automorphism(g)
    out.append(GenWhitehead(identity, PermTag(), _skip_check=True))
    seen.add(identity)
    for a in g.vertices:
        for sign in (1, -1):
            m = (a, sign)
            minv = (a, -sign)
            singles = sorted(g.dom(a) - g.star(a), key=g.index.get)
            bigs = [c for c in g.components_outside_star(a) if len(c) >= 2]
            adjs = [] if long_range_only else sorted(
                (g.star(a) & g.dom(a)) - {a}, key=g.index.get)
            n_opts = [4] * len(singles) + [2] * len(bigs) + [3] * len(adjs)
            total = 1
            for x in n_opts:
                total *= x
            if total > budget:
                raise BudgetError("classic Whitehead enumeration too large")
            for choice in product(*[range(x) for x in n_opts]):
                ims = {v: ((v, 1),) for v in g.vertices}
                inv = {v: ((v, 1),) for v in g.vertices}
                supp = set()
                i = 0
                for b in singles:
                    c = choice[i]
                    i += 1
                    if c == 1:      # right: b -> b m
                        ims[b] = ((b, 1), m)
                        inv[b] = ((b, 1), minv)
                        supp.add((b, 1))
                    elif c == 2:    # left: b -> m^-1 b
                        ims[b] = (minv, (b, 1))
                        inv[b] = (m, (b, 1))
                        supp.add((b, -1))
                    elif c == 3:    # conjugate
                        ims[b] = (minv, (b, 1), m)
                        inv[b] = (m, (b, 1), minv)
                        supp.add((b, 1))
                        supp.add((b, -1))
                for comp in bigs:
                    c = choice[i]
                    i += 1
                    if c == 1:
                        for b in comp:
                            ims[b] = (minv, (b, 1), m)
                            inv[b] = (m, (b, 1), minv)
                            supp.add((b, 1))
                            supp.add((b, -1))
                for b in adjs:
                    c = choice[i]
                    i += 1
                    if c == 1:      # b -> b m
                        ims[b] = ((b, 1), m)
                        inv[b] = ((b, 1), minv)
                        supp.add((b, 1))
                        supp.add((b, -1))
                    elif c == 2:    # b -> m^-1 b
                        ims[b] = (minv, (b, 1))
                        inv[b] = (m, (b, 1))
                        supp.add((b, 1))
                        supp.add((b, -1))
                aut = Automorphism(g, ims, inv, _skip_check=True)
                if aut in seen:
                    continue
                seen.add(aut)
                out.append(GenWhitehead(aut, mult_tag(g, a),
                                        classic=(m, frozenset(supp)),
                                        _skip_check=True))
    g._cache[key] = out
    return out


def classify_classic(wh: GenWhitehead):
    """Detect whether an automorphism equals a classic long-range Whitehead
    automorphism; return (multiplier letter, support) or None."""
    if wh.classic is not None:
        return wh.classic
    g = wh.graph
    for cand in enumerate_classic_whitehead(g, long_range_only=True):
        if cand.classic is not None and cand.aut == wh.aut:
            return cand.classic
    return None


def is_long_range(wh: GenWhitehead) -> bool:
    """Multiplier-tagged element whose restriction to the star letters is a
    permutation (always true for permutation tags)."""
    if isinstance(wh.tag, PermTag):
        return True
    g = wh.graph
    a = wh.tag.vertex
    return all(len(wh.aut.images[b]) == 1 for b in g.star(a))


def compose_gw(x: GenWhitehead, y: GenWhitehead) -> GenWhitehead:
    """Compose within a common multiplier class (or permutations)."""
    aut = x.aut.compose(y.aut)
    if isinstance(x.tag, MultTag) and isinstance(y.tag, MultTag) \
            and x.tag.cls == y.tag.cls:
        return GenWhitehead(aut, x.tag, _skip_check=True)
    if isinstance(x.tag, PermTag) and isinstance(y.tag, PermTag):
        return GenWhitehead(aut, PermTag(), _skip_check=True)
    return retag(aut)


def retag(aut: Automorphism) -> GenWhitehead:
    """Attach a valid tag to an automorphism known to lie in Omega."""
    if aut.is_permutation():
        return GenWhitehead(aut, PermTag(), _skip_check=True)
    for a in aut.graph.vertices:
        if is_in_whset(aut, a):
            return GenWhitehead(aut, mult_tag(aut.graph, a), _skip_check=True)
    raise InputError("automorphism is not a generalized Whitehead element")


def apply_gw(wh: GenWhitehead, tup: ClassTuple) -> ClassTuple:
    return wh.aut.apply_to_tuple(tup)
