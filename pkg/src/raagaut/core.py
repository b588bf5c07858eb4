"""Defining graphs and exact word/conjugacy computations in a right-angled
Artin group.

Words are tuples of letters; a letter is a pair ``(generator, sign)`` with
sign +1 or -1.  A word is *graphically reduced* when it contains no subword
``x v x^-1`` in which every letter of ``v`` commutes with ``x`` (two
generators commute iff they are adjacent in the defining graph, and every
generator commutes with itself).  Graphically reduced words are exactly the
length-minimal representatives, and any two of them for the same element
differ by commutation moves; this is what all equality tests below lean on.
"""

from __future__ import annotations

import json
from itertools import combinations

from .errors import BudgetError, InputError

Letter = tuple[str, int]
Word = tuple[Letter, ...]

CANONICAL_STATE_BUDGET = 2_000_000


class DefiningGraph:
    """A finite simplicial graph: vertex names in a fixed order plus a
    symmetric irreflexive adjacency relation.

    The vertex order is the declared generator order; it fixes letter
    ordering, canonical forms and all basis orders downstream.
    """

    def __init__(self, vertices, edges):
        vertices = list(vertices)
        if len(set(vertices)) != len(vertices):
            raise InputError("duplicate vertex names")
        self.vertices = tuple(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        adj = {v: set() for v in self.vertices}
        for e in edges:
            u, v = e
            if u not in self.index or v not in self.index:
                raise InputError("edge %r uses unknown vertex" % (tuple(e),))
            if u == v:
                raise InputError("self-loop at %r not allowed" % (u,))
            adj[u].add(v)
            adj[v].add(u)
        self.adj = {v: frozenset(adj[v]) for v in self.vertices}
        self._cache = {}

    # -- basic queries ----------------------------------------------------

    def adjacent(self, a, b):
        return b in self.adj[a]

    def commutes(self, a, b):
        """Generators commute iff adjacent or equal."""
        return a == b or b in self.adj[a]

    def star(self, a):
        key = ("star", a)
        if key not in self._cache:
            self._cache[key] = self.adj[a] | {a}
        return self._cache[key]

    def dominates(self, a, b):
        """a dominates b iff every neighbour of b commutes with a."""
        return self.adj[b] <= self.star(a)

    def dom(self, a):
        """All vertices dominated by a, including a itself."""
        key = ("dom", a)
        if key not in self._cache:
            self._cache[key] = frozenset(
                b for b in self.vertices if self.dominates(a, b))
        return self._cache[key]

    def adjdom_class(self, a):
        """The class [a] of vertices with the same star as a."""
        key = ("cls", a)
        if key not in self._cache:
            sa = self.star(a)
            self._cache[key] = frozenset(
                b for b in self.vertices if self.star(b) == sa)
        return self._cache[key]

    def components_outside_star(self, a):
        """Connected components of the graph minus st(a), ordered by their
        least vertex."""
        key = ("comps", a)
        if key not in self._cache:
            outside = [v for v in self.vertices if v not in self.star(a)]
            seen = set()
            comps = []
            for v in outside:
                if v in seen:
                    continue
                comp = {v}
                stack = [v]
                while stack:
                    x = stack.pop()
                    for y in self.adj[x]:
                        if y not in self.star(a) and y not in comp:
                            comp.add(y)
                            stack.append(y)
                seen |= comp
                comps.append(frozenset(comp))
            comps.sort(key=lambda c: min(self.index[v] for v in c))
            self._cache[key] = tuple(comps)
        return self._cache[key]

    def component_of(self, a, v):
        for comp in self.components_outside_star(a):
            if v in comp:
                return comp
        return None

    def letter_key(self, letter):
        """Order on letters: generator order first, positive before negative."""
        gen, sign = letter
        return (self.index[gen], 0 if sign > 0 else 1)

    def check_letters(self, word):
        for gen, sign in word:
            if gen not in self.index:
                raise InputError("unknown generator %r" % (gen,))
            if sign not in (1, -1):
                raise InputError("bad sign %r" % (sign,))

    # -- serialization ----------------------------------------------------

    @classmethod
    def from_json(cls, data):
        try:
            return cls(data["vertices"], data.get("edges", []))
        except (KeyError, TypeError) as exc:
            raise InputError("bad graph data: %s" % exc)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self):
        edges = sorted(
            {tuple(sorted((u, v), key=self.index.get))
             for u in self.vertices for v in self.adj[u]})
        return {"vertices": list(self.vertices),
                "edges": [list(e) for e in edges]}

    def __repr__(self):
        return "DefiningGraph(%r)" % (list(self.vertices),)


# -- word utilities -------------------------------------------------------

def parse_word(text) -> Word:
    """Parse whitespace-separated tokens, each ``name`` or ``name^-1``."""
    letters = []
    for tok in text.split():
        if tok.endswith("^-1"):
            letters.append((tok[:-3], -1))
        elif "^" in tok:
            raise InputError("bad token %r" % (tok,))
        else:
            letters.append((tok, 1))
    return tuple(letters)


def format_word(word) -> str:
    if not word:
        return ""
    return " ".join(g if s > 0 else g + "^-1" for g, s in word)


def inverse_word(word) -> Word:
    return tuple((g, -s) for g, s in reversed(word))


def reduce_word(g: DefiningGraph, word) -> Word:
    """Graphically reduce a word by deleting cancellable pairs to a fixpoint.

    Any maximal deletion sequence reaches minimal length (Servatius), so a
    plain scan-and-delete loop is already correct.
    """
    g.check_letters(word)
    letters = list(word)
    changed = True
    while changed:
        changed = False
        n = len(letters)
        for i in range(n):
            gi, si = letters[i]
            for j in range(i + 1, n):
                gj, sj = letters[j]
                if gj == gi:
                    if sj == -si:
                        del letters[j]
                        del letters[i]
                        changed = True
                        break
                    continue
                if not g.adjacent(gi, gj):
                    break
            if changed:
                break
    return tuple(letters)


def is_graphically_reduced(g, word):
    return len(reduce_word(g, word)) == len(word)


def words_equal(g, w1, w2):
    """Equality as group elements."""
    return not reduce_word(g, tuple(w1) + inverse_word(tuple(w2)))


def lexnf(g, word) -> Word:
    """Lexicographic normal form of a *reduced* word.

    Greedily pull the least available letter to the front; two reduced words
    represent the same element iff their normal forms coincide.
    """
    rest = list(word)
    out = []
    while rest:
        best = None
        for i, let in enumerate(rest):
            blocked = any(not g.commutes(rest[j][0], let[0]) for j in range(i))
            if blocked:
                continue
            if best is None or g.letter_key(let) < g.letter_key(rest[best]):
                best = i
        out.append(rest.pop(best))
    return tuple(out)


def cyclically_reduce(g, word) -> Word:
    """A minimal-length representative of the conjugacy class of ``word``."""
    w = reduce_word(g, word)
    while True:
        better = None
        for r in range(len(w)):
            rot = w[r:] + w[:r]
            red = reduce_word(g, rot)
            if len(red) < len(w):
                better = red
                break
        if better is None:
            return w
        w = better


class ConjClass:
    """A conjugacy class, held by its canonical cyclic representative.

    The canonical word is the lexicographically least word (under the
    declared generator order) reachable from a cyclically reduced
    representative by commutation swaps and cyclic rotations.
    """

    __slots__ = ("word", "length")

    def __init__(self, word, _token=None):
        if _token is not _CONJ_TOKEN:
            raise TypeError("use canonical_class() to build ConjClass values")
        self.word = word
        self.length = len(word)

    def __eq__(self, other):
        return isinstance(other, ConjClass) and self.word == other.word

    def __hash__(self):
        return hash(self.word)

    def __lt__(self, other):
        return (self.length, self.word) < (other.length, other.word)

    def __repr__(self):
        return "ConjClass(%s)" % (format_word(self.word) or "1")


_CONJ_TOKEN = object()


def canonical_class(g, word, budget=CANONICAL_STATE_BUDGET) -> ConjClass:
    """Canonical representative by BFS closure over commutation swaps and
    rotations of a cyclically reduced representative.

    Exponential in the worst case; a state budget turns pathological inputs
    into a BudgetError rather than a wrong answer.
    """
    w = cyclically_reduce(g, word)
    memo = g._cache.setdefault("canon", {})
    if w in memo:
        return memo[w]
    if not w:
        cls = ConjClass((), _CONJ_TOKEN)
        memo[w] = cls
        return cls
    seen = {w}
    frontier = [w]
    best = w
    keyf = lambda u: tuple(g.letter_key(x) for x in u)
    while frontier:
        nxt = []
        for u in frontier:
            cands = [u[1:] + u[:1]]
            for i in range(len(u) - 1):
                if u[i][0] != u[i + 1][0] and g.adjacent(u[i][0], u[i + 1][0]):
                    cands.append(u[:i] + (u[i + 1], u[i]) + u[i + 2:])
            for c in cands:
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
                    if keyf(c) < keyf(best):
                        best = c
        if len(seen) > budget:
            raise BudgetError("canonicalization state budget exceeded")
        frontier = nxt
    cls = ConjClass(best, _CONJ_TOKEN)
    for u in seen:
        memo[u] = cls
    return cls


def conjugate_test(g, w1, w2) -> bool:
    return canonical_class(g, w1) == canonical_class(g, w2)


class ClassTuple:
    """An ordered tuple of conjugacy classes; length is the sum of entry
    lengths."""

    __slots__ = ("entries", "length")

    def __init__(self, entries):
        self.entries = tuple(entries)
        if not all(isinstance(c, ConjClass) for c in self.entries):
            raise TypeError("entries must be ConjClass values")
        self.length = sum(c.length for c in self.entries)

    def __eq__(self, other):
        return isinstance(other, ClassTuple) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __repr__(self):
        return "ClassTuple(%s)" % "; ".join(
            format_word(c.word) or "1" for c in self.entries)


def class_tuple(g, words) -> ClassTuple:
    return ClassTuple([canonical_class(g, w) for w in words])


def parse_tuple(g, text) -> ClassTuple:
    words = [parse_word(part) for part in text.split(";")]
    return class_tuple(g, words)


def graph_invariants(g: DefiningGraph) -> dict:
    """Per-vertex star, domination set, star-equality class and components
    outside the star."""
    out = {}
    for a in g.vertices:
        out[a] = {
            "star": g.star(a),
            "dom": g.dom(a),
            "adjdom_class": g.adjdom_class(a),
            "components_outside_star": g.components_outside_star(a),
        }
    return out


def enumerate_reduced_words(g, length, budget=None):
    """All graphically reduced words of exactly the given length.

    Used by minimization and the orbit graph; budget caps the output size.
    """
    letters = [(v, s) for v in g.vertices for s in (1, -1)]
    out = []
    stack = [()]
    while stack:
        w = stack.pop()
        if len(w) == length:
            out.append(w)
            if budget is not None and len(out) > budget:
                raise BudgetError("word enumeration budget exceeded")
            continue
        for let in letters:
            nw = w + (let,)
            if is_graphically_reduced(g, nw):
                stack.append(nw)
    return out


def enumerate_classes(g, length, budget=200_000):
    """All conjugacy classes of exactly the given length."""
    cache = g._cache.setdefault("classes", {})
    if length in cache:
        return cache[length]
    seen = set()
    count = 0
    for w in enumerate_reduced_words(g, length, budget):
        count += 1
        if count > budget:
            raise BudgetError("class enumeration budget exceeded")
        cls = canonical_class(g, w)
        if cls.length == length:
            seen.add(cls)
    result = sorted(seen)
    cache[length] = result
    return result


def enumerate_tuples(g, arity, total_length, budget=500_000):
    """All ClassTuples with the given arity and total length."""
    def splits(m, total):
        if m == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in splits(m - 1, total - first):
                yield (first,) + rest

    out = []
    for split in splits(arity, total_length):
        pools = [enumerate_classes(g, ln) for ln in split]
        idx = [0] * arity
        from itertools import product
        for combo in product(*pools):
            out.append(ClassTuple(combo))
            if len(out) > budget:
                raise BudgetError("tuple enumeration budget exceeded")
    return out
