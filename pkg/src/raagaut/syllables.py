"""Syllable decompositions of class tuples with respect to a vertex, the
map into the free abelian group attached to the multiplier class, and the
action of the multiplier group on decompositions.

A syllable with respect to a vertex ``a`` is a graphically reduced product
``c u d`` with ``u`` over st(a) and endpoints outside st(a) (both absent for
a cyclic syllable).  Middles are stored with the multiplier-class part
normalized to the left, as an exponent vector, since class letters commute
with everything in the star.
"""

from __future__ import annotations

from .aut import GenWhitehead, eta, za_basis
from .core import (ClassTuple, ConjClass, canonical_class, reduce_word)
from .errors import BudgetError, InputError


class Syllable:
    """One syllable: optional endpoints, class-exponent vector, and the
    non-class part of the middle (order preserved)."""

    __slots__ = ("left", "right", "exps", "u")

    def __init__(self, left, right, exps, u):
        self.left = left
        self.right = right
        self.exps = tuple(exps)
        self.u = tuple(u)

    @property
    def cyclic(self):
        return self.left is None

    def middle_length(self):
        return sum(abs(e) for e in self.exps) + len(self.u)

    def length(self):
        ends = 0 if self.cyclic else 2
        return ends + self.middle_length()

    def with_exps(self, exps):
        return Syllable(self.left, self.right, exps, self.u)

    def key(self):
        return (self.left, self.right, self.exps, self.u)

    def __eq__(self, other):
        return isinstance(other, Syllable) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "Syllable(%r | %r | %r, u=%r)" % (
            self.left, self.exps, self.right, self.u)


class Decomposition:
    """Concatenated per-class syllable decompositions of a class tuple.

    ``blocks`` records, per class, the slice of ``syllables`` it owns and
    whether it is a single cyclic syllable.
    """

    __slots__ = ("graph", "vertex", "syllables", "blocks", "cls_order")

    def __init__(self, graph, vertex, syllables, blocks):
        self.graph = graph
        self.vertex = vertex
        self.syllables = tuple(syllables)
        self.blocks = tuple(blocks)  # (start, count, cyclic)
        cls = graph.adjdom_class(vertex)
        self.cls_order = tuple(sorted(cls, key=graph.index.get))

    def block_syllables(self, b):
        start, count, _ = self.blocks[b]
        return self.syllables[start:start + count]

    def class_word(self, b):
        """The representative associated with one class of the decomposition."""
        start, count, cyclic = self.blocks[b]
        word = []
        for s in self.syllables[start:start + count]:
            if not cyclic:
                word.append(s.left)
            for gen, e in zip(self.cls_order, s.exps):
                word.extend([(gen, 1 if e > 0 else -1)] * abs(e))
            word.extend(s.u)
        return tuple(word)

    def associated_tuple(self) -> ClassTuple:
        return ClassTuple([canonical_class(self.graph, self.class_word(b))
                           for b in range(len(self.blocks))])

    def represents(self, tup: ClassTuple) -> bool:
        """Whether this is a genuine decomposition of ``tup``: per class the
        associated word has the class's minimal length (hence is graphically
        and cyclically reduced) and lies in the class."""
        if len(self.blocks) != len(tup.entries):
            return False
        for b, cls in enumerate(tup.entries):
            word = self.class_word(b)
            if len(word) != cls.length:
                return False
            if canonical_class(self.graph, word) != cls:
                return False
        return True

    def length(self):
        return sum(s.length() - (0 if s.cyclic else 1) for s in self.syllables)

    def __repr__(self):
        return "Decomposition(%s)" % (list(self.syllables),)


def syllable_count(g, a, cls: ConjClass):
    """Number of syllables any decomposition of the class has, or 0 for a
    cyclic-syllable class."""
    return sum(1 for gen, _ in cls.word if gen not in g.star(a))


def decompose(g, a, tup: ClassTuple) -> Decomposition:
    """The deterministic decomposition: scan each canonical representative,
    cutting before each letter outside st(a), starting at the first one."""
    star = g.star(a)
    cls_set = g.adjdom_class(a)
    cls_order = sorted(cls_set, key=g.index.get)
    sylls = []
    blocks = []
    for cls in tup.entries:
        word = cls.word
        outside = [i for i, (gen, _) in enumerate(word) if gen not in star]
        start = len(sylls)
        if not outside:
            exps = [0] * len(cls_order)
            u = []
            for gen, s in word:
                if gen in cls_set:
                    exps[cls_order.index(gen)] += s
                else:
                    u.append((gen, s))
            sylls.append(Syllable(None, None, exps, u))
            blocks.append((start, 1, True))
            continue
        rot = word[outside[0]:] + word[:outside[0]]
        cuts = [i for i, (gen, _) in enumerate(rot) if gen not in star]
        for idx, c in enumerate(cuts):
            nxt = cuts[(idx + 1) % len(cuts)]
            middle = rot[c + 1:nxt] if idx + 1 < len(cuts) else rot[c + 1:]
            exps = [0] * len(cls_order)
            u = []
            for gen, s in middle:
                if gen in cls_set:
                    exps[cls_order.index(gen)] += s
                else:
                    u.append((gen, s))
            sylls.append(Syllable(rot[c], rot[nxt], exps, u))
        blocks.append((start, len(cuts), False))
    return Decomposition(g, a, sylls, blocks)


def nu_syllable(g, a, s: Syllable):
    """Image of one syllable in the free abelian group attached to [a]."""
    basis = za_basis(g, a)
    pos = {b: i for i, b in enumerate(basis)}
    n = len(g.adjdom_class(a))
    vec = [0] * len(basis)
    for i in range(n):
        vec[i] += s.exps[i]
    dom = g.dom(a)
    star = g.star(a)
    for gen, sign in s.u:
        if gen in dom and gen in star and ("r", gen) in pos:
            vec[pos[("r", gen)]] += sign
    if not s.cyclic:
        for letter, is_left in ((s.left, True), (s.right, False)):
            gen, sign = letter
            if gen in dom:
                if is_left:
                    if sign > 0:
                        vec[pos[("r", gen)]] += 1
                    else:
                        vec[pos[("l", gen)]] -= 1
                else:
                    if sign > 0:
                        vec[pos[("l", gen)]] += 1
                    else:
                        vec[pos[("r", gen)]] -= 1
            else:
                comp = g.component_of(a, gen)
                vec[pos[("Y", comp)]] += 1 if is_left else -1
    return tuple(vec)


def nu(d: Decomposition):
    """Per-syllable vectors, as a tuple of columns."""
    return tuple(nu_syllable(d.graph, d.vertex, s) for s in d.syllables)


def nu_matrix(d: Decomposition):
    """The same data as a (basis x syllables) integer matrix."""
    cols = nu(d)
    dim = len(za_basis(d.graph, d.vertex))
    return tuple(tuple(col[i] for col in cols) for i in range(dim))


def act_on_decomposition(wh: GenWhitehead, d: Decomposition) -> Decomposition:
    """Exponent substitution along the matrix action; the result decomposes
    the image tuple."""
    g = d.graph
    a = d.vertex
    if not hasattr(wh.tag, "vertex") or \
            wh.tag.vertex not in g.adjdom_class(a):
        raise InputError("automorphism is not in the multiplier group "
                         "of this decomposition")
    mat = eta(wh)
    n = len(g.adjdom_class(a))
    new = []
    for s in d.syllables:
        col = nu_syllable(g, a, s)
        newexps = tuple(
            sum(mat[i][j] * col[j] for j in range(len(col))) for i in range(n))
        new.append(s.with_exps(newexps))
    out = Decomposition(g, a, new, d.blocks)
    src = d.associated_tuple()
    if not out.represents(wh.aut.apply_to_tuple(src)):
        raise AssertionError("syllable action produced an invalid "
                             "decomposition")
    return out


def length_delta(wh: GenWhitehead, d: Decomposition) -> int:
    """Length change of the underlying tuple, summed per syllable."""
    g = d.graph
    a = d.vertex
    mat = eta(wh)
    n = len(g.adjdom_class(a))
    delta = 0
    for s in d.syllables:
        col = nu_syllable(g, a, s)
        new = [sum(mat[i][j] * col[j] for j in range(len(col)))
               for i in range(n)]
        delta += sum(abs(e) for e in new) - sum(abs(e) for e in s.exps)
    return delta


def matching_permutations(d: Decomposition, tup: ClassTuple,
                          budget=200_000) -> list:
    """All permutations of the source decomposition's syllables that are
    valid decompositions of ``tup``, found by chained backtracking.

    Results are deduplicated by syllable sequence.
    """
    g = d.graph
    a = d.vertex
    star = g.star(a)
    pool = list(d.syllables)
    counts = []
    for cls in tup.entries:
        c = syllable_count(g, a, cls)
        counts.append((c if c else 1, c == 0))
    if sum(c for c, _ in counts) != len(pool):
        return []

    results = []
    seen = set()
    steps = [0]

    def place(block, slot, used, acc):
        steps[0] += 1
        if steps[0] > budget:
            raise BudgetError("permutation matching budget exceeded")
        if block == len(counts):
            key = tuple(s.key() for s in acc)
            if key not in seen:
                seen.add(key)
                cand = Decomposition(g, a, acc, _blocks_from_counts(counts))
                if cand.represents(tup):
                    results.append(cand)
            return
        count, cyclic = counts[block]
        base = sum(c for c, _ in counts[:block])
        if cyclic:
            for i, s in enumerate(pool):
                if i in used or not s.cyclic:
                    continue
                place(block + 1, 0, used | {i}, acc + [s])
            return
        if slot == count:
            first = acc[base]
            last = acc[base + count - 1]
            if last.right == first.left:
                place(block + 1, 0, used, acc)
            return
        prev = acc[-1] if slot > 0 else None
        tried = set()
        for i, s in enumerate(pool):
            if i in used or s.cyclic:
                continue
            if s.key() in tried:
                continue
            if prev is not None and s.left != prev.right:
                continue
            tried.add(s.key())
            place(block, slot + 1, used | {i}, acc + [s])

    place(0, 0, frozenset(), [])
    return results


def _blocks_from_counts(counts):
    blocks = []
    start = 0
    for count, cyclic in counts:
        blocks.append((start, count, cyclic))
        start += count
    return blocks


def decomposition_from_words(g, a, classes_of_syllable_words) -> Decomposition:
    """Build a decomposition from explicit syllable words, one list per
    class; linear syllables share endpoints with their cyclic successor.

    Mainly for tests and debugging against hand-written decompositions.
    """
    star = g.star(a)
    cls_set = g.adjdom_class(a)
    cls_order = sorted(cls_set, key=g.index.get)
    sylls = []
    blocks = []
    for words in classes_of_syllable_words:
        start = len(sylls)
        first = tuple(words[0])
        cyclic = all(gen in star for gen, _ in first)
        if cyclic:
            if len(words) != 1:
                raise InputError("a cyclic syllable must sit alone")
            exps = [0] * len(cls_order)
            u = []
            for gen, s in first:
                if gen in cls_set:
                    exps[cls_order.index(gen)] += s
                else:
                    u.append((gen, s))
            sylls.append(Syllable(None, None, exps, u))
            blocks.append((start, 1, True))
            continue
        for word in words:
            word = tuple(word)
            left, right = word[0], word[-1]
            if left[0] in star or right[0] in star:
                raise InputError("syllable endpoints must lie outside the "
                                 "star")
            exps = [0] * len(cls_order)
            u = []
            for gen, s in word[1:-1]:
                if gen not in star:
                    raise InputError("syllable middle must lie in the star")
                if gen in cls_set:
                    exps[cls_order.index(gen)] += s
                else:
                    u.append((gen, s))
            sylls.append(Syllable(left, right, exps, u))
        blocks.append((start, len(words), False))
    return Decomposition(g, a, sylls, blocks)


def dump(d: Decomposition) -> str:
    """Debug dump, one syllable per line as ``c | u | d``."""
    from .core import format_word
    lines = []
    for s in d.syllables:
        mid = []
        for gen, e in zip(d.cls_order, s.exps):
            mid.extend([(gen, 1 if e > 0 else -1)] * abs(e))
        mid.extend(s.u)
        left = format_word((s.left,)) if s.left else "1"
        right = format_word((s.right,)) if s.right else "1"
        lines.append("%s | %s | %s" % (left, format_word(tuple(mid)) or "1",
                                       right))
    return "\n".join(lines)
