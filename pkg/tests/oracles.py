"""Independent oracles used by the tests.

Everything here works on its own representations (signed integer letters,
plain tuples) and implements textbook algorithms directly, so it shares no
code path with the package.
"""

from itertools import product


# -- free group cyclic words --------------------------------------------------
# letters: +1..r and -1..-r

def free_reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyc_reduce(word):
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def cyc_canon(word):
    w = cyc_reduce(word)
    if not w:
        return ()
    return min(w[i:] + w[:i] for i in range(len(w)))


def canon_tuple(words):
    return tuple(cyc_canon(w) for w in words)


def tuple_len(tup):
    return sum(len(w) for w in tup)


def whitehead_moves(rank):
    """All classic Whitehead automorphisms of the free group of the given
    rank, as letter-image maps, plus the signed letter permutations."""
    letters = [i for i in range(1, rank + 1)] + \
              [-i for i in range(1, rank + 1)]
    moves = []
    # type 2: multiplier a, subsets of the other letters
    for a in letters:
        others = [x for x in letters if abs(x) != abs(a)]
        positives = [x for x in others if x > 0]
        for choice in product(range(4), repeat=len(positives)):
            img = {}
            for x, c in zip(positives, choice):
                if c == 0:
                    img[x] = (x,)
                elif c == 1:
                    img[x] = (x, a)
                elif c == 2:
                    img[x] = (-a, x)
                else:
                    img[x] = (-a, x, a)
            img[abs(a)] = (abs(a),)
            moves.append(_complete(img, rank))
    # type 1: signed permutations
    from itertools import permutations
    for perm in permutations(range(1, rank + 1)):
        for signs in product((1, -1), repeat=rank):
            img = {i + 1: (perm[i] * signs[i],) for i in range(rank)}
            moves.append(_complete(img, rank))
    # dedupe
    seen = set()
    out = []
    for mv in moves:
        key = tuple(sorted(mv.items()))
        if key not in seen:
            seen.add(key)
            out.append(mv)
    return out


def _complete(img, rank):
    full = {}
    for i in range(1, rank + 1):
        im = img.get(i, (i,))
        full[i] = im
        full[-i] = tuple(-x for x in reversed(im))
    return full


def apply_move(move, tup):
    out = []
    for w in tup:
        new = []
        for x in w:
            new.extend(move[x])
        out.append(cyc_canon(tuple(new)))
    return tuple(out)


def oracle_minimize(tup, rank):
    """Whitehead minimization: greedy descent by single classic moves."""
    cur = canon_tuple(tup)
    moves = whitehead_moves(rank)
    while True:
        best = None
        for mv in moves:
            img = apply_move(mv, cur)
            if tuple_len(img) < tuple_len(cur):
                best = img
                break
        if best is None:
            return cur
        cur = best


def oracle_equivalent(t1, t2, rank, budget=200_000):
    """Whitehead's theorem: minimize both, then search the minimal level by
    single classic moves."""
    m1 = oracle_minimize(t1, rank)
    m2 = oracle_minimize(t2, rank)
    if tuple_len(m1) != tuple_len(m2):
        return False
    if m1 == m2:
        return True
    moves = whitehead_moves(rank)
    seen = {m1}
    frontier = [m1]
    while frontier:
        cur = frontier.pop()
        for mv in moves:
            img = apply_move(mv, cur)
            if tuple_len(img) != tuple_len(m1) or img in seen:
                continue
            if img == m2:
                return True
            seen.add(img)
            frontier.append(img)
            if len(seen) > budget:
                raise RuntimeError("oracle budget exceeded")
    return False


# -- graphical reduction oracle -----------------------------------------------

def bfs_minimal_length(adjacency, word, budget=300_000):
    """Minimal length of a word in a RAAG by BFS over commutation swaps and
    adjacent cancellations; adjacency maps each generator to its neighbour
    set."""
    def moves(w):
        for i in range(len(w) - 1):
            (g1, s1), (g2, s2) = w[i], w[i + 1]
            if g1 == g2 and s1 == -s2:
                yield w[:i] + w[i + 2:]
            if g1 != g2 and g2 in adjacency[g1]:
                yield w[:i] + (w[i + 1], w[i]) + w[i + 2:]

    word = tuple(word)
    best = len(word)
    seen = {word}
    frontier = [word]
    while frontier:
        nxt = []
        for w in frontier:
            for m in moves(w):
                if m in seen:
                    continue
                seen.add(m)
                if len(seen) > budget:
                    raise RuntimeError("oracle budget exceeded")
                best = min(best, len(m))
                nxt.append(m)
        frontier = nxt
    return best
