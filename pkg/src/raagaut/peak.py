"""Peak lowering and full peak reduction.

A peak is a triple (W, alpha, beta) with both images no longer than W and
one strictly shorter; lowering it means refactoring beta*alpha^-1 so every
intermediate image of alpha*W stays strictly below |W|.  The driver
repeatedly lowers a maximal peak of the current factorization until the
length profile is strictly decreasing, then constant, then strictly
increasing.

The case analysis follows the structure of the main peak-lowering argument:
permutations conjugate away, equal multiplier classes merge, adjacent
classes use a Steinberg relation, mutual non-adjacent domination reduces to
the classic long-range machinery, one-sided domination runs the iterative
loop with shorter-factor replacements, and no domination recurses on the
support intersection.  Classic long-range peaks are lowered by a bounded
search over the finite classic move set with exact composition checks;
every assembled factorization is re-verified before it is returned.
"""

from __future__ import annotations

from .aut import (Automorphism, GenWhitehead, MultTag, PermTag,
                  compose_gw, conjugation_by, conjugation_letter_factors,
                  enumerate_classic_whitehead, eta, identity_automorphism,
                  inner_witness, is_in_whset, is_long_range, mult_tag,
                  permutation_automorphisms, retag, split_around, support,
                  theta, za_basis)
from .core import ClassTuple, InputError, inverse_word, reduce_word
from .errors import BudgetError

ASYM_LOOP_BUDGET = 400
REWRITE_BUDGET = 20_000


class Peak:
    """A validated peak (W, alpha, beta)."""

    __slots__ = ("tuple", "alpha", "beta")

    def __init__(self, tup: ClassTuple, alpha: GenWhitehead,
                 beta: GenWhitehead):
        la = alpha.aut.apply_to_tuple(tup).length
        lb = beta.aut.apply_to_tuple(tup).length
        if not (la <= tup.length >= lb and (la < tup.length
                                            or lb < tup.length)):
            raise InputError("not a peak: |aW|=%d |bW|=%d |W|=%d"
                             % (la, lb, tup.length))
        self.tuple = tup
        self.alpha = alpha
        self.beta = beta


class Factorization:
    """A factorization by generalized Whitehead automorphisms, first-applied
    first, with its length profile on a base tuple."""

    __slots__ = ("factors", "base", "profile")

    def __init__(self, factors, base: ClassTuple):
        self.factors = list(factors)
        self.base = base
        self.profile = profile_of(self.factors, base)

    def compose(self) -> Automorphism:
        if not self.factors:
            raise InputError("empty factorization has no graph to build "
                             "an identity on")
        return compose_factors(self.factors[0].graph, self.factors)

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __getitem__(self, i):
        return self.factors[i]

    def is_unimodal(self):
        p = self.profile
        i = 0
        while i + 1 < len(p) and p[i + 1] < p[i]:
            i += 1
        while i + 1 < len(p) and p[i + 1] == p[i]:
            i += 1
        while i + 1 < len(p) and p[i + 1] > p[i]:
            i += 1
        return i == len(p) - 1

    def to_json(self):
        return {"factors": [f.aut.to_json() for f in self.factors],
                "profile": list(self.profile)}


def profile_of(factors, base):
    prof = [base.length]
    cur = base
    for f in factors:
        cur = f.aut.apply_to_tuple(cur)
        prof.append(cur.length)
    return prof


def intermediate_tuples(factors, base):
    out = [base]
    for f in factors:
        out.append(f.aut.apply_to_tuple(out[-1]))
    return out


def compose_factors(g, factors) -> Automorphism:
    out = identity_automorphism(g)
    for f in factors:
        out = f.aut.compose(out)
    return out


def verify_lowering(g, factors, peak_tuple, alpha, beta):
    """A lowering of (W, alpha, beta): composition is beta*alpha^-1 and all
    proper intermediate images of alpha*W are strictly below |W|."""
    factors = list(factors)
    target = beta.aut.compose(alpha.aut.invert())
    if compose_factors(g, factors) != target:
        raise AssertionError("lowering does not compose to beta*alpha^-1")
    base = alpha.aut.apply_to_tuple(peak_tuple)
    cur = base
    for f in factors[:-1]:
        cur = f.aut.apply_to_tuple(cur)
        if cur.length >= peak_tuple.length:
            raise AssertionError("lowering has an intermediate at full "
                                 "height")
    return factors


# -- length change brackets --------------------------------------------------

def pcount(g, W: ClassTuple, c, A, B) -> int:
    """Count cyclic subword instances x u y with u over the proper star of
    c, where (x, y^-1) lies in A x B or in B x A.

    Letters of st(c) other than c itself are transparent: they are dropped
    both from the scanned words and from the argument sets, while
    multiplier letters c^{+-1} act as instance endpoints like any letter
    outside the star.  This makes the count additive in both arguments and
    reproduce the length change of classic long-range moves.
    """
    proper = g.star(c) - {c}
    Af = {l for l in A if l[0] not in proper}
    Bf = {l for l in B if l[0] not in proper}
    total = 0
    for cls in W.entries:
        letters = cls.word
        pos = [i for i, (v, _) in enumerate(letters) if v not in proper]
        if not pos:
            continue
        for idx, i in enumerate(pos):
            j = pos[(idx + 1) % len(pos)]
            x = letters[i]
            y = letters[j]
            yinv = (y[0], -y[1])
            if x in Af and yinv in Bf:
                total += 1
            if x in Bf and yinv in Af:
                total += 1
    return total


def all_letters(g):
    return frozenset((v, s) for v in g.vertices for s in (1, -1))


def classic_length_change(g, wh: GenWhitehead, W: ClassTuple) -> int:
    """|W| - |wh W| for a classic long-range automorphism, via the counting
    bracket."""
    info = wh.classic
    if info is None:
        from .aut import classify_classic
        info = classify_classic(wh)
    if info is None:
        raise InputError("not a classic long-range Whitehead automorphism")
    m, supp = info
    c = m[0]
    C = supp | {m}
    Cp = all_letters(g) - C
    return pcount(g, W, c, {m}, C - {m}) - pcount(g, W, c, Cp, C - {m})


# -- Steinberg relations ------------------------------------------------------

def fixes_class_pointwise(wh: GenWhitehead, cls):
    return all(wh.aut.images[v] == ((v, 1),) for v in cls)


def steinberg_conjugate(alpha: GenWhitehead, beta: GenWhitehead
                        ) -> GenWhitehead:
    """alpha beta alpha^-1, validated inside the Whitehead group of beta's
    class, under the Steinberg hypotheses."""
    g = alpha.graph
    if not isinstance(alpha.tag, MultTag) or not isinstance(beta.tag,
                                                            MultTag):
        raise InputError("Steinberg conjugation needs multiplier tags")
    a, b = alpha.tag.vertex, beta.tag.vertex
    if alpha.tag.cls == beta.tag.cls:
        raise InputError("multiplier classes must differ")
    if not fixes_class_pointwise(alpha, beta.tag.cls):
        raise InputError("alpha must fix the other multiplier class")
    if not g.adjacent(a, b):
        if support(alpha) & support(beta):
            raise InputError("supports must be disjoint when multipliers "
                             "are non-adjacent")
        if not fixes_class_pointwise(beta, alpha.tag.cls):
            raise InputError("beta must fix the first multiplier class in "
                             "the non-adjacent case")
    aut = alpha.aut.compose(beta.aut).compose(alpha.aut.invert())
    return GenWhitehead(aut, mult_tag(g, b))


# -- classic automorphism constructors ---------------------------------------

def classic_from_support(g, m, supp) -> GenWhitehead:
    """The classic Whitehead automorphism with the given multiplier letter
    and support (letters outside the star, components moved as blocks)."""
    a = m[0]
    star = g.star(a)
    supp = frozenset(l for l in supp if l[0] not in star)
    minv = (m[0], -m[1])
    ims = {v: ((v, 1),) for v in g.vertices}
    inv = {v: ((v, 1),) for v in g.vertices}
    for v in g.vertices:
        if v in star:
            continue
        right = (v, 1) in supp
        left = (v, -1) in supp
        if right and left:
            ims[v] = (minv, (v, 1), m)
            inv[v] = (m, (v, 1), minv)
        elif right:
            ims[v] = ((v, 1), m)
            inv[v] = ((v, 1), minv)
        elif left:
            ims[v] = (minv, (v, 1))
            inv[v] = (m, (v, 1))
    aut = Automorphism(g, ims, inv)
    return GenWhitehead(aut, mult_tag(g, a), classic=(m, supp))


def complement_classic(g, wh: GenWhitehead) -> GenWhitehead:
    """The complement: inverted multiplier, complementary support, same
    action on conjugacy classes (it differs from the original by an inner
    automorphism)."""
    m, supp = wh.classic
    a = m[0]
    full = frozenset(l for l in all_letters(g) if l[0] not in g.star(a))
    comp = classic_from_support(g, (m[0], -m[1]), full - supp)
    expected = conjugation_by(g, ((m[0], -m[1]),)).compose(wh.aut)
    if comp.aut != expected:
        raise AssertionError("complement construction mismatch")
    return comp


def shorter_factors(g, W: ClassTuple, alpha: GenWhitehead,
                    beta: GenWhitehead):
    """The two shorter replacement automorphisms for a one-sided-domination
    classic pair: beta1 with inverted multiplier and support in the double
    complement, alpha1 supported on the intersection.

    The defining length inequality is checked on W before returning.
    """
    ma, sa = alpha.classic
    mb, sb = beta.classic
    a, b = ma[0], mb[0]
    if g.adjacent(a, b) or not g.dominates(b, a) or g.dominates(a, b):
        raise InputError("needs non-adjacent one-sided domination")
    if alpha.aut.images[b] != ((b, 1),):
        raise InputError("alpha must fix the dominating vertex")
    if ma not in sb and (a, 1) not in sb:
        raise InputError("the dominated multiplier must lie in the other "
                         "support")
    A = sa | {ma}
    B = sb | {mb}
    full = all_letters(g)
    b1supp = ((full - A) & (full - B)) - {(mb[0], -mb[1])}
    beta1 = classic_from_support(g, (mb[0], -mb[1]), b1supp)
    a1supp = (A & B) - {(a, 1), (a, -1)}
    alpha1 = classic_from_support(g, ma, a1supp)
    lhs = (W.length - beta1.aut.apply_to_tuple(W).length) + \
        (W.length - alpha1.aut.apply_to_tuple(W).length)
    rhs = (W.length - beta.aut.apply_to_tuple(W).length) + \
        (W.length - alpha.aut.apply_to_tuple(W).length)
    if lhs < rhs:
        raise AssertionError("shorter-factor inequality failed")
    return alpha1, beta1


# -- factor lists for long-range elements -------------------------------------

def classic_factor_list(wh: GenWhitehead, a=None):
    """Factor a long-range element of a Whitehead group into classic moves
    with multipliers in its class, with the signed class permutation last."""
    if isinstance(wh.tag, PermTag):
        return [] if wh.aut.is_identity() else [wh]
    g = wh.graph
    a = a if a is not None else wh.tag.vertex
    cls = g.adjdom_class(a)
    if not is_long_range(wh):
        raise InputError("element is not long-range")
    # signed permutation part on the class
    ims = {v: ((v, 1),) for v in g.vertices}
    for v in cls:
        ims[v] = wh.aut.images[v]
    inv = {v: ((v, 1),) for v in g.vertices}
    for v in cls:
        img = wh.aut.images[v]
        inv[img[0][0]] = ((v, img[0][1]),)
    p = Automorphism(g, ims, inv)
    pure = p.invert().compose(wh.aut)
    pure_wh = GenWhitehead(pure, mult_tag(g, a), _skip_check=True)
    basis = za_basis(g, a)
    cls_order = [v for kind, v in basis if kind == "r" and v in cls]
    n = len(cls_order)
    mat = eta(pure_wh)
    factors = []
    for j in range(n, len(basis)):
        kind, payload = basis[j]
        for i in range(n):
            e = mat[i][j]
            if not e:
                continue
            c = cls_order[i]
            sgn = 1 if e > 0 else -1
            for _ in range(abs(e)):
                if kind == "r" and payload in g.star(a):
                    raise AssertionError("long-range element moves the star")
                if kind == "r":
                    f = classic_from_support(g, (c, sgn), {(payload, 1)})
                elif kind == "l":
                    f = classic_from_support(g, (c, -sgn), {(payload, -1)})
                else:
                    f = classic_from_support(
                        g, (c, sgn),
                        {(x, s) for x in payload for s in (1, -1)})
                factors.append(f)
    if not p.is_identity():
        factors.append(GenWhitehead(p, PermTag(), _skip_check=True))
    if compose_factors(g, factors) != wh.aut:
        raise AssertionError("classic factor list does not compose back")
    return factors


# -- move sets and the bounded classic-peak search ----------------------------

def move_universe(g, cls=None, include_perms=True):
    """(moves, index) for the classic search: classic long-range moves (all
    multipliers, or multipliers in a fixed class) plus optionally the
    relevant permutation automorphisms."""
    key = ("moves", cls, include_perms)
    if key in g._cache:
        return g._cache[key]
    moves = []
    for wh in enumerate_classic_whitehead(g, long_range_only=True):
        if wh.aut.is_identity() or wh.classic is None:
            continue
        if cls is None or wh.classic[0][0] in cls:
            moves.append(wh)
    if include_perms:
        for wh in permutation_automorphisms(g):
            if wh.aut.is_identity():
                continue
            if cls is None:
                moves.append(wh)
            else:
                if all(wh.aut.images[v] == ((v, 1),) for v in g.vertices
                       if v not in cls) and \
                        all(wh.aut.images[v][0][0] in cls for v in cls):
                    moves.append(wh)
    index = {wh.aut.key(): wh for wh in moves}
    g._cache[key] = (moves, index)
    return moves, index


def lower_classic_peak(g, V: ClassTuple, alpha, beta, moves, index):
    """Bounded exact search for a lowering of a peak between two moves from
    the given universe, as guaranteed by the classic long-range theory."""
    target = beta.aut.compose(alpha.aut.invert())
    if target.is_identity():
        return []
    aV = alpha.aut.apply_to_tuple(V)
    bV = beta.aut.apply_to_tuple(V)
    hit = index.get(target.key())
    if hit is not None:
        return [hit]
    first = []
    for m in moves:
        img = m.aut.apply_to_tuple(aV)
        if img.length < V.length:
            first.append((m, img))
    last = []
    for m in moves:
        img = m.aut.invert().apply_to_tuple(bV)
        if img.length < V.length:
            last.append((m, img))
    for m1, img1 in first:
        rem = target.compose(m1.aut.invert())
        hit = index.get(rem.key())
        if hit is not None:
            return [m1, hit]
    for m1, img1 in first:
        inv1 = m1.aut.invert()
        for mk, imgk in last:
            rem = mk.aut.invert().compose(target).compose(inv1)
            if rem.is_identity():
                return [m1, mk]
            hit = index.get(rem.key())
            if hit is not None:
                return [m1, hit, mk]
    for m1, img1 in first:
        inv1 = m1.aut.invert()
        for m2 in moves:
            img2 = m2.aut.apply_to_tuple(img1)
            if img2.length >= V.length:
                continue
            inv2 = m2.aut.invert()
            for mk, imgk in last:
                # target = mk * m3 * m2 * m1, so m3 = mk^-1 target m1^-1 m2^-1
                rem = mk.aut.invert().compose(target).compose(
                    inv1).compose(inv2)
                hit = index.get(rem.key())
                if hit is not None:
                    return [m1, m2, hit, mk]
    raise BudgetError("classic peak lowering search exhausted")


def find_peak_position(profile):
    """An interior position of maximal height that is a peak, or None."""
    best = None
    for i in range(1, len(profile) - 1):
        left, h, right = profile[i - 1], profile[i], profile[i + 1]
        if left <= h >= right and (left < h or right < h):
            if best is None or h > profile[best]:
                best = i
    return best


def rewrite_loop(g, factors, base, lower, budget=REWRITE_BUDGET):
    """Repeatedly replace a maximal peak with a lowering until the profile
    is unimodal.  The measure (max interior height, positions at it) is
    asserted to decrease lexicographically."""
    factors = [f for f in factors if not f.aut.is_identity()]
    steps = 0
    prev_measure = None
    while True:
        tuples = intermediate_tuples(factors, base)
        profile = [t.length for t in tuples]
        pos = find_peak_position(profile)
        if pos is None:
            return factors
        # lowering a maximal peak removes one interior position at the
        # maximal peak height and inserts only strictly lower ones
        h = profile[pos]
        measure = (h, sum(1 for x in profile[1:-1] if x == h))
        if prev_measure is not None and measure >= prev_measure:
            raise AssertionError("peak reduction measure did not decrease")
        prev_measure = measure
        steps += 1
        if steps > budget:
            raise BudgetError("peak reduction budget exceeded")
        V = tuples[pos]
        alpha = factors[pos - 1].invert()
        beta = factors[pos]
        low = lower(V, alpha, beta)
        verify_lowering(g, low, V, alpha, beta)
        factors[pos - 1:pos + 1] = low
        factors = [f for f in factors if not f.aut.is_identity()]


def long_range_peak_reduce(g, factors_or_wh, W: ClassTuple, cls=None,
                           include_perms=True):
    """Peak-reduce a long-range element (given as a factor list or a single
    long-range Whitehead element) with respect to W, by classic moves."""
    if isinstance(factors_or_wh, GenWhitehead):
        factors = classic_factor_list(factors_or_wh)
    else:
        factors = list(factors_or_wh)
    moves, index = move_universe(g, cls, include_perms)

    def lower(V, alpha, beta):
        return lower_classic_peak(g, V, alpha, beta, moves, index)

    return rewrite_loop(g, factors, W, lower)


# -- inner insertion ----------------------------------------------------------

def insert_inner(g, factors, base, conj_word, side):
    """Exactly multiply a lowering by an inner conjugation on the chosen
    side, inserting its letter factors at a minimum of the profile."""
    if not conj_word:
        return list(factors)
    tuples = intermediate_tuples(factors, base)
    values = [t.length for t in tuples]
    l = values.index(min(values))
    if side == "right":
        psi = compose_factors(g, factors[:l])
        w = reduce_word(g, psi.apply_to_word(conj_word))
    else:
        psi2 = compose_factors(g, factors[l:])
        w = reduce_word(g, psi2.apply_inverse_to_word(conj_word))
    inner = conjugation_letter_factors(g, w)
    return list(factors[:l]) + inner + list(factors[l:])


def invert_lowering(factors):
    return [f.invert() for f in reversed(factors)]


# -- the main case analysis ---------------------------------------------------

def lower_peak(g, peak: Peak) -> Factorization:
    """A lowering factorization of beta*alpha^-1 for a validated peak, per
    the main case dispatch; the result is re-verified before returning."""
    V, alpha, beta = peak.tuple, peak.alpha, peak.beta
    factors = _dispatch(g, V, alpha, beta)
    verify_lowering(g, factors, V, alpha, beta)
    return Factorization(factors, alpha.aut.apply_to_tuple(V))


def _dispatch(g, V, alpha, beta):
    if alpha.aut.is_identity():
        return [beta]
    if beta.aut.is_identity():
        return [alpha.invert()]
    if beta.aut == alpha.aut:
        return []
    a_perm = isinstance(alpha.tag, PermTag)
    b_perm = isinstance(beta.tag, PermTag)
    if a_perm and b_perm:
        raise InputError("two permutations cannot form a peak")
    if a_perm:
        return _perm_lower(g, V, alpha, beta)
    if b_perm:
        return invert_lowering(_perm_lower(g, V, beta, alpha))
    a, b = alpha.tag.vertex, beta.tag.vertex
    if alpha.tag.cls == beta.tag.cls:
        return [compose_gw(beta, alpha.invert())]
    if g.adjacent(a, b):
        if fixes_class_pointwise(alpha, beta.tag.cls):
            gamma = steinberg_conjugate(alpha, beta)
            return [gamma, alpha.invert()]
        if fixes_class_pointwise(beta, alpha.tag.cls):
            swapped = _dispatch(g, V, beta, alpha)
            return invert_lowering(swapped)
        raise AssertionError("adjacent multipliers with no fixed class")
    bdom = g.dominates(b, a)
    adom = g.dominates(a, b)
    if adom and bdom:
        base = alpha.aut.apply_to_tuple(V)
        factors = classic_factor_list(alpha.invert()) + \
            classic_factor_list(beta)
        return long_range_peak_reduce(g, factors, base)
    if bdom:
        return lower_asymmetric(g, V, alpha, beta)
    if adom:
        return invert_lowering(lower_asymmetric(g, V, beta, alpha))
    return lower_nodom(g, V, alpha, beta)


def _perm_lower(g, V, alpha, beta):
    """alpha is a permutation: conjugate beta across it."""
    conj = alpha.aut.compose(beta.aut).compose(alpha.aut.invert())
    gamma = retag(conj)
    return [gamma, alpha.invert()]


# -- no domination ------------------------------------------------------------

def _conj_witness(g, cls, aut, v):
    """The word w with aut(v) = w^-1 v w, for v conjugated within the
    multiplier class."""
    u, w = split_around(g, cls, aut.images[v], v)
    if reduce_word(g, u + w):
        raise AssertionError("image of %r is not a conjugate" % (v,))
    return w


def _zero_column(g, a, wh, col_key):
    """The element with one basis column's class part removed."""
    basis = za_basis(g, a)
    n = len(g.adjdom_class(a))
    mat = [list(row) for row in eta(GenWhitehead(wh.aut, mult_tag(g, a),
                                                 _skip_check=True))]
    j = basis.index(col_key)
    for i in range(n):
        mat[i][j] = 0
    return theta(g, a, tuple(tuple(row) for row in mat))


def lower_nodom(g, V, alpha, beta):
    """Non-adjacent multipliers, no domination either way."""
    a, b = alpha.tag.vertex, beta.tag.vertex
    # normalize: alpha fixes b, beta fixes a (inner adjustments)
    if alpha.aut.images[b] != ((b, 1),):
        w = _conj_witness(g, alpha.tag.cls, alpha.aut, b)
        iota = conjugation_by(g, w)
        alpha1 = GenWhitehead(iota.invert().compose(alpha.aut),
                              alpha.tag, _skip_check=True)
        F = lower_nodom(g, V, alpha1, beta)
        base = alpha.aut.apply_to_tuple(V)
        return insert_inner(g, F, base, inverse_word(w), side="right")
    if beta.aut.images[a] != ((a, 1),):
        w = _conj_witness(g, beta.tag.cls, beta.aut, a)
        iota = conjugation_by(g, w)
        beta1 = GenWhitehead(iota.invert().compose(beta.aut), beta.tag,
                             _skip_check=True)
        F = lower_nodom(g, V, alpha, beta1)
        base = alpha.aut.apply_to_tuple(V)
        return insert_inner(g, F, base, w, side="left")
    sa, sb = support(alpha), support(beta)
    common = sa & sb
    if not common:
        if not fixes_class_pointwise(alpha, beta.tag.cls) or \
                not fixes_class_pointwise(beta, alpha.tag.cls):
            raise AssertionError("normalized pair still moves a multiplier "
                                 "class")
        if alpha.aut.compose(beta.aut) != beta.aut.compose(alpha.aut):
            raise AssertionError("disjoint-support pair does not commute")
        return [beta, alpha.invert()]
    for letter in sorted(common, key=g.letter_key):
        c = letter[0]
        if c in g.dom(a):
            if c not in g.dom(b):
                raise AssertionError("intersection letter dominated on one "
                                     "side only")
            key = ("r", c) if letter[1] > 0 else ("l", c)
            alpha_c = _zero_column(g, a, alpha, key)
            beta_c = _zero_column(g, b, beta, key)
        else:
            Y = g.component_of(a, c)
            if g.component_of(b, c) != Y:
                raise AssertionError("component mismatch in the support "
                                     "intersection")
            alpha_c = _zero_column(g, a, alpha, ("Y", Y))
            beta_c = _zero_column(g, b, beta, ("Y", Y))
        if alpha_c.aut.apply_to_tuple(V).length < V.length:
            F = lower_nodom(g, V, alpha_c, beta)
            step = compose_gw(alpha_c, alpha.invert())
            return [step] + F
        if beta_c.aut.apply_to_tuple(V).length < V.length:
            Fsw = lower_nodom(g, V, beta_c, alpha)
            step = compose_gw(beta_c, beta.invert())
            return invert_lowering([step] + Fsw)
    raise AssertionError("no shortening replacement in the support "
                         "intersection")


# -- one-sided domination -----------------------------------------------------

def lower_asymmetric(g, V, alpha, beta):
    """b dominates a non-adjacently, a does not dominate b."""
    a = alpha.tag.vertex
    if g.adjdom_class(a) != frozenset({a}):
        raise AssertionError("dominated multiplier class is not a "
                             "singleton")
    if not is_long_range(alpha):
        raise AssertionError("dominated-side element is not long-range")
    facts = classic_factor_list(alpha, a)
    facts = long_range_peak_reduce(g, facts, V, cls=g.adjdom_class(a))
    return _asym_rec(g, V, alpha, facts, beta, 0)


def _is_inner_gw(g, a, wh):
    return inner_witness(GenWhitehead(wh.aut, mult_tag(g, a),
                                      _skip_check=True)) is not None


def _asym_rec(g, V, alpha, facts, beta, depth):
    if depth > ASYM_LOOP_BUDGET:
        raise BudgetError("asymmetric recursion budget exceeded")
    a = alpha.tag.vertex
    b = beta.tag.vertex
    facts = [f for f in facts if not f.aut.is_identity()]
    if not facts:
        return [beta]
    # peel a leading run of inner factors in one step
    if isinstance(facts[0].tag, MultTag) and _is_inner_gw(g, a, facts[0]):
        i = 0
        while i < len(facts) and isinstance(facts[i].tag, MultTag) and \
                _is_inner_gw(g, a, facts[i]):
            i += 1
        inner_part = compose_factors(g, facts[:i])
        rest = facts[i:]
        witness = inner_witness(GenWhitehead(inner_part, mult_tag(g, a),
                                             _skip_check=True))
        if not rest:
            # alpha is inner: beta*alpha^-1 = (beta iota^-1 beta^-1) beta
            if beta.aut.apply_to_tuple(V).length >= V.length:
                raise AssertionError("inner-side peak without a strict "
                                     "shortening")
            conj = beta.aut.apply_to_word(inverse_word(witness))
            inner = conjugation_letter_factors(g, reduce_word(g, conj))
            return [beta] + inner
        alpha_red = GenWhitehead(compose_factors(g, rest), alpha.tag,
                                 _skip_check=True)
        F = _asym_rec(g, V, alpha_red, rest, beta, depth + 1)
        conj = beta.aut.apply_to_word(inverse_word(witness))
        base = alpha_red.aut.apply_to_tuple(V)
        return insert_inner(g, F, base, reduce_word(g, conj), side="left")
    # normalize alpha to fix b
    if alpha.aut.images[b] != ((b, 1),):
        w = _conj_witness(g, alpha.tag.cls, alpha.aut, b)
        iota_inv = conjugation_by(g, w).invert()
        alpha = GenWhitehead(iota_inv.compose(alpha.aut), alpha.tag,
                             _skip_check=True)
        facts = list(facts) + conjugation_letter_factors(
            g, inverse_word(w))
        # the appended inner letters multiply the composition by iota^-1 on
        # the left, matching the new alpha; lowering of the new pair is a
        # lowering of the old one after one exact inner insertion
        F = _asym_rec(g, V, alpha, facts, beta, depth + 1)
        base = alpha.aut.apply_to_tuple(V)
        return insert_inner(g, F, base, inverse_word(w), side="right")
    alpha1 = facts[0]
    alpha2 = GenWhitehead(alpha.aut.compose(alpha1.aut.invert()),
                          alpha.tag, _skip_check=True)
    rest = facts[1:]
    la1 = alpha1.aut.apply_to_tuple(V).length
    if la1 < V.length:
        F1 = _asym_leaf(g, V, alpha1, beta)
        out = [] if alpha2.aut.is_identity() else [alpha2.invert()]
        return out + F1
    # flat first step: the whole alpha keeps the length
    F1 = _asym_leaf(g, V, alpha1, beta)
    if not F1:
        # beta equals alpha1
        return [] if alpha2.aut.is_identity() else [alpha2.invert()]
    delta1 = F1[0]
    rest1 = F1[1:]
    aV = alpha.aut.apply_to_tuple(V)
    a1V = alpha1.aut.apply_to_tuple(V)
    if isinstance(delta1.tag, MultTag) and \
            is_in_whset(delta1.aut, a) and is_long_range(delta1):
        delta1 = GenWhitehead(delta1.aut, mult_tag(g, a), _skip_check=True)
        psi = GenWhitehead(delta1.aut.compose(alpha2.aut.invert()),
                           mult_tag(g, a), _skip_check=True)
        G = long_range_peak_reduce(g, classic_factor_list(psi, a), aV,
                                   cls=g.adjdom_class(a))
        return G + rest1
    F2 = _asym_rec(g, a1V, alpha2, rest, _as_whb(g, b, delta1), depth + 1)
    return F2 + rest1


def _as_whb(g, b, wh):
    if not is_in_whset(wh.aut, b):
        raise AssertionError("factor is not in the expected Whitehead "
                             "group")
    out = GenWhitehead(wh.aut, mult_tag(g, b), _skip_check=True)
    out.classic = wh.classic
    return out


def _asym_leaf(g, V, alpha1, beta):
    """Lowering of (V, alpha1, beta) for alpha1 a single classic move or a
    permutation."""
    if isinstance(alpha1.tag, PermTag):
        return _perm_lower(g, V, alpha1, beta)
    b = beta.tag.vertex
    if alpha1.aut.images[b] != ((b, 1),):
        w = _conj_witness(g, alpha1.tag.cls, alpha1.aut, b)
        iota_inv = conjugation_by(g, w).invert()
        fixed = GenWhitehead(iota_inv.compose(alpha1.aut), alpha1.tag,
                             _skip_check=True)
        fixed.classic = _shift_classic(alpha1.classic, w)
        F = _asym_base_loop(g, V, fixed, beta)
        base = fixed.aut.apply_to_tuple(V)
        return insert_inner(g, F, base, inverse_word(w), side="right")
    return _asym_base_loop(g, V, alpha1, beta)


def _shift_classic(classic, w):
    """Support of iota^-1 * alpha for a classic alpha and inner iota by a
    multiplier power: the multiplier is unchanged and the support shifts by
    full conjugation; recompute lazily instead of tracking it."""
    return None


def _classic_info(g, wh):
    if wh.classic is not None:
        return wh.classic
    from .aut import classify_classic
    info = classify_classic(wh)
    if info is None:
        raise AssertionError("expected a classic long-range automorphism")
    wh.classic = info
    return info


def _asym_base_loop(g, V, alpha, beta):
    """The iterative loop for a classic alpha (multiplier a^eps) fixing the
    dominating class, against a general beta."""
    a = alpha.tag.vertex
    b = beta.tag.vertex
    m, sa = _classic_info(g, alpha)
    if m[1] < 0:
        # mirror through the inversion of a and recurse once
        rho_ims = {v: ((v, 1),) for v in g.vertices}
        rho_ims[a] = ((a, -1),)
        rho = Automorphism(g, rho_ims, dict(rho_ims), _skip_check=True)
        alpha_m = GenWhitehead(rho.compose(alpha.aut).compose(rho),
                               alpha.tag, _skip_check=True)
        beta_m = GenWhitehead(rho.compose(beta.aut).compose(rho), beta.tag,
                              _skip_check=True)
        Vm = rho.apply_to_tuple(V)
        F = _asym_base_loop(g, Vm, alpha_m, beta_m)
        out = []
        for f in F:
            aut = rho.compose(f.aut).compose(rho)
            out.append(GenWhitehead(aut, f.tag, _skip_check=True))
        return out

    # split beta into long-range and short-range parts through the matrix
    basis = za_basis(g, b)
    nb = len(g.adjdom_class(b))
    mat = [list(row) for row in
           eta(GenWhitehead(beta.aut, mult_tag(g, b), _skip_check=True))]
    mat_s = [row[:] for row in mat]
    for j in range(nb, len(basis)):
        kind, payload = basis[j]
        adjacent_dom = kind == "r" and payload in g.star(b)
        if not adjacent_dom:
            for i in range(nb):
                mat_s[i][j] = 0
    beta_s = theta(g, b, tuple(tuple(r) for r in mat_s))
    beta_l = GenWhitehead(beta.aut.compose(beta_s.aut.invert()),
                          mult_tag(g, b), _skip_check=True)
    if any(len(beta_l.aut.images[x]) != 1 for x in g.star(b)):
        raise AssertionError("long-range part still moves the star")
    if alpha.aut.compose(beta_s.aut) != beta_s.aut.compose(alpha.aut):
        raise AssertionError("short-range part does not commute")

    wit0 = inner_witness(GenWhitehead(beta_l.aut, mult_tag(g, b),
                                      _skip_check=True))
    if wit0 is not None:
        # beta is inner * short-range: beta alpha^-1 equals
        # alpha^-1 (alpha iota alpha^-1) beta_s, whose intermediates stay
        # strictly below the peak height
        conj_word = reduce_word(g, alpha.aut.apply_to_word(wit0))
        inner = conjugation_letter_factors(g, conj_word)
        return [beta_s] + inner + [alpha.invert()]

    W1 = beta_s.aut.apply_to_tuple(V)
    alpha_p = alpha
    beta_p = beta_l
    beta_pp = beta_s
    alpha_pp = GenWhitehead(identity_automorphism(g), mult_tag(g, a),
                            _skip_check=True)
    state = {"W1": W1, "beta_p": beta_p, "beta_pp": beta_pp}

    def conjugate_into_b(delta):
        """alpha' delta alpha'^-1 when it both lands in the target
        Whitehead group and satisfies the length-transfer law on the
        current tuple, else None.  Pulling such a delta across alpha'
        preserves the loop's product exactly and keeps the loop's peak
        invariant: the length drop of alpha' is carried over unchanged."""
        aut = alpha_p.aut.compose(delta.aut).compose(alpha_p.aut.invert())
        try:
            gamma = GenWhitehead(aut, mult_tag(g, b))
        except InputError:
            return None
        W1 = state["W1"]
        lhs = W1.length - delta.aut.apply_to_tuple(W1).length
        rhs = alpha_p.aut.apply_to_tuple(W1).length - \
            gamma.aut.compose(alpha_p.aut).apply_to_tuple(W1).length
        if lhs != rhs:
            return None
        return gamma

    def merge(delta, gamma):
        state["beta_p"] = GenWhitehead(
            state["beta_p"].aut.compose(delta.aut.invert()),
            mult_tag(g, b), _skip_check=True)
        state["beta_pp"] = compose_gw(gamma, state["beta_pp"])
        state["W1"] = delta.aut.apply_to_tuple(state["W1"])

    bfacts = None
    steps = 0
    while state["W1"].length >= V.length:
        steps += 1
        if steps > ASYM_LOOP_BUDGET:
            raise BudgetError("asymmetric loop budget exceeded")
        W1 = state["W1"]
        beta_p = state["beta_p"]
        beta_pp = state["beta_pp"]
        if _is_inner_gw(g, b, beta_p):
            raise AssertionError("inner remainder at full height")
        if bfacts is None:
            bfacts = long_range_peak_reduce(
                g, classic_factor_list(beta_p, b), W1,
                cls=g.adjdom_class(b), include_perms=False)
        beta0 = bfacts[0]
        m0, s0 = _classic_info(g, beta0)
        if beta0.aut.apply_to_tuple(W1).length > W1.length or \
                alpha_p.aut.apply_to_tuple(W1).length > W1.length:
            raise AssertionError("loop invariant lost: not a peak")
        sa_p = support(alpha_p)
        a_letters = {(a, 1), (a, -1)}
        if not (sa_p & s0) and not (a_letters & s0):
            gamma = conjugate_into_b(beta0)
            if gamma is None:
                raise AssertionError("disjoint merge conjugate escaped the "
                                     "target group")
            merge(beta0, gamma)
            bfacts = bfacts[1:] or None
            continue
        if sa_p <= s0 and a_letters <= s0:
            comp = complement_classic(g, beta0)
            gamma = conjugate_into_b(comp)
            if gamma is None:
                raise AssertionError("complement merge conjugate escaped "
                                     "the target group")
            merge(comp, gamma)
            bfacts = None
            continue
        if (a, 1) not in s0:
            beta0 = complement_classic(g, beta0)
            m0, s0 = beta0.classic
        alpha1, beta1 = shorter_factors(g, W1, alpha_p, beta0)
        candidates = []
        if beta1.aut.apply_to_tuple(W1).length < W1.length:
            candidates.append(beta1)
        if (a, -1) in beta1.classic[1]:
            trimmed = classic_from_support(
                g, beta1.classic[0], beta1.classic[1] - {(a, -1)})
            if trimmed.aut.apply_to_tuple(W1).length < W1.length:
                candidates.append(trimmed)
        done = False
        for cand in candidates:
            gamma = conjugate_into_b(cand)
            if gamma is not None:
                merge(cand, gamma)
                bfacts = None
                done = True
                break
        if done:
            continue
        if alpha1.aut.apply_to_tuple(W1).length < W1.length and \
                alpha1.aut != alpha_p.aut:
            K = alpha_p.aut.compose(alpha1.aut.invert())
            if K.compose(beta_pp.aut) != beta_pp.aut.compose(K):
                raise AssertionError("leftover does not commute with the "
                                     "short part")
            alpha_pp = GenWhitehead(alpha_pp.aut.compose(K),
                                    mult_tag(g, a), _skip_check=True)
            alpha_p = alpha1
            continue
        raise BudgetError("no admissible shorter-factor replacement")
    W1 = state["W1"]
    beta_p = state["beta_p"]
    beta_pp = state["beta_pp"]

    out = []
    if not alpha_pp.aut.is_identity():
        out.append(alpha_pp.invert())
    if not beta_pp.aut.is_identity():
        out.append(beta_pp)
    out.append(alpha_p.invert())
    if not beta_p.aut.is_identity():
        out.append(beta_p)
    return [f for f in out if not f.aut.is_identity()]


# -- the public driver --------------------------------------------------------

def omega_factorization(g, aut: Automorphism):
    """A one-element factorization when the automorphism is itself a
    generalized Whitehead element."""
    if aut.is_permutation():
        return [GenWhitehead(aut, PermTag(), _skip_check=True)]
    for v in g.vertices:
        if is_in_whset(aut, v):
            return [GenWhitehead(aut, mult_tag(g, v), _skip_check=True)]
    raise InputError("automorphism is not a single generalized Whitehead "
                     "element; supply a factorization")


def peak_reduce(g, factors, W: ClassTuple, budget=REWRITE_BUDGET
                ) -> Factorization:
    """Peak-reduce a factorized automorphism with respect to W: the output
    composes to the same automorphism and its length profile strictly
    decreases, stays constant, then strictly increases."""
    factors = list(factors)
    original = compose_factors(g, factors) if factors else \
        identity_automorphism(g)

    def lower(V, alpha, beta):
        return lower_peak(g, Peak(V, alpha, beta))

    out = rewrite_loop(g, factors, W, lower, budget)
    result = Factorization(out, W)
    if compose_factors(g, out) != original:
        raise AssertionError("peak reduction changed the automorphism")
    if not result.is_unimodal():
        raise AssertionError("peak reduction did not reach a unimodal "
                             "profile")
    return result
