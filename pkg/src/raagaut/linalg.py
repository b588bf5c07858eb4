"""Exact block-matrix machinery: the normal form for the block group
GL(n,Z) x M_{n,k}(Q) acting on (n+k)-row matrices, stabilizer presentations,
the mod-d crossed homomorphism, Schreier graphs, and the two presentation
combinators (finite-index overgroup, finite covering complex).

All arithmetic is exact: Python integers and Fractions throughout.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import BudgetError, InputError
from .exactmat import (int_inverse, integer_row_hnf_transform,
                       left_kernel_basis, lcm, lcm_of_denominators, mat_det,
                       mat_eq, mat_identity, mat_mul, mat_rank, solve_right)

SCHREIER_VERTEX_BUDGET = 1_000_000


class BlockMatrix:
    """Element of GL(n,Z) x M_{n,k}(Q): block upper triangular with integer
    determinant-+-1 top-left block A, rational top-right block B, identity
    bottom-right."""

    __slots__ = ("n", "k", "A", "B")

    def __init__(self, n, k, A, B):
        self.n = n
        self.k = k
        self.A = tuple(tuple(int(x) for x in row) for row in A)
        self.B = tuple(tuple(Fraction(x) for x in row) for row in B)
        if len(self.A) != n or any(len(r) != n for r in self.A):
            raise InputError("bad A block shape")
        if len(self.B) != n or any(len(r) != k for r in self.B):
            raise InputError("bad B block shape")
        if mat_det(self.A) not in (1, -1):
            raise InputError("top-left block must have determinant +-1")

    @classmethod
    def identity(cls, n, k):
        return cls(n, k, mat_identity(n), [[0] * k for _ in range(n)])

    @classmethod
    def from_full(cls, n, k, M):
        for i in range(n, n + k):
            for j in range(n + k):
                want = 1 if i == j else 0
                if M[i][j] != want:
                    raise InputError("matrix is not block upper triangular "
                                     "with identity bottom")
        A = [[M[i][j] for j in range(n)] for i in range(n)]
        if any(Fraction(x).denominator != 1 for row in A for x in row):
            raise InputError("top-left block must be integral")
        B = [[M[i][j] for j in range(n, n + k)] for i in range(n)]
        return cls(n, k, A, B)

    def full(self):
        rows = []
        for i in range(self.n):
            rows.append(tuple(Fraction(x) for x in self.A[i]) + self.B[i])
        for i in range(self.k):
            rows.append(tuple(
                Fraction(1) if j == self.n + i else Fraction(0)
                for j in range(self.n + self.k)))
        return tuple(rows)

    def mul(self, other: "BlockMatrix") -> "BlockMatrix":
        A = mat_mul(self.A, other.A)
        AB = mat_mul(self.A, other.B)
        B = tuple(tuple(x + y for x, y in zip(r1, r2))
                  for r1, r2 in zip(AB, self.B))
        return BlockMatrix(self.n, self.k, A, B)

    def inv(self) -> "BlockMatrix":
        Ainv = int_inverse(self.A)
        B = mat_mul(Ainv, self.B)
        B = tuple(tuple(-x for x in row) for row in B)
        return BlockMatrix(self.n, self.k, Ainv, B)

    def denominator(self):
        return lcm_of_denominators(x for row in self.B for x in row)

    def is_integral(self):
        return self.denominator() == 1

    def act(self, rows):
        """Left action on an (n+k)-row matrix."""
        return mat_mul(self.full(), rows)

    def key(self):
        return (self.n, self.k, self.A, self.B)

    def __eq__(self, other):
        return isinstance(other, BlockMatrix) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "BlockMatrix(A=%r, B=%r)" % (self.A, self.B)


def target_from_ints(rows):
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def target_lcd(rows):
    return lcm_of_denominators(x for row in rows for x in row)


def rho(Q: BlockMatrix, d):
    """Residue of the rational block: (d*B) mod d, entrywise."""
    out = []
    for row in Q.B:
        new = []
        for x in row:
            v = x * d
            if v.denominator != 1:
                raise InputError("matrix is not in the denominator-d group")
            new.append(int(v) % d)
        out.append(tuple(new))
    return tuple(out)


# -- normal form -----------------------------------------------------------

def gq_normal_form(rows, n, k):
    """Row-reduce to the canonical form: first kill columns with the bottom
    k rows wherever possible, then scaled integer Hermite reduction on the
    top block.  Returns (N, Q) with N = Q * input, exactly."""
    rows = [list(map(Fraction, r)) for r in rows]
    if len(rows) != n + k:
        raise InputError("expected %d rows" % (n + k))
    m = len(rows[0]) if rows else 0
    Q = BlockMatrix.identity(n, k)
    qA = [list(r) for r in mat_identity(n)]
    qB = [[Fraction(0)] * k for _ in range(n)]
    bottom = rows[n:]

    def add_bottom_combo(i, coeffs):
        for j in range(m):
            rows[i][j] += sum(c * bottom[t][j] for t, c in enumerate(coeffs))
        for t, c in enumerate(coeffs):
            qB[i][t] += c

    def add_top(i, q, r):
        # row_i += q * row_r  (both among the top n), q integer
        for j in range(m):
            rows[i][j] += q * rows[r][j]
        for j in range(n):
            qA[i][j] += q * qA[r][j]
        for j in range(k):
            qB[i][j] += q * qB[r][j]

    def swap_top(i, r):
        rows[i], rows[r] = rows[r], rows[i]
        qA[i], qA[r] = qA[r], qA[i]
        qB[i], qB[r] = qB[r], qB[i]

    def negate_top(i):
        rows[i] = [-x for x in rows[i]]
        qA[i] = [-x for x in qA[i]]
        qB[i] = [-x for x in qB[i]]

    # Step 1: per column, use a bottom-row combination vanishing on all
    # previous columns to zero out the top entries if possible.
    for j in range(m):
        restricted = [row[:j] for row in bottom]
        if k:
            kern = left_kernel_basis(restricted) if j else \
                [tuple(Fraction(int(i == t)) for i in range(k))
                 for t in range(k)]
            witness = None
            for v in kern:
                val = sum(v[t] * bottom[t][j] for t in range(k))
                if val != 0:
                    witness = (v, val)
                    break
            if witness is not None:
                v, val = witness
                for i in range(n):
                    if rows[i][j] != 0:
                        c = -rows[i][j] / val
                        add_bottom_combo(i, [c * x for x in v])

    # Steps 2-4: integer Hermite reduction of the top block.
    l = 0
    for j in range(m):
        if l >= n:
            break
        nz = [i for i in range(l, n) if rows[i][j] != 0]
        if not nz:
            continue
        while True:
            nz = [i for i in range(l, n) if rows[i][j] != 0]
            piv = min(nz, key=lambda i: (abs(rows[i][j]), i))
            others = [i for i in nz if i != piv]
            if not others:
                break
            for i in others:
                q = rows[i][j] // rows[piv][j]
                if q:
                    add_top(i, -q, piv)
        if piv != l:
            swap_top(l, piv)
        if rows[l][j] < 0:
            negate_top(l)
        for i in range(l):
            q = rows[i][j] // rows[l][j]
            if q:
                add_top(i, -q, l)
        l += 1

    N = tuple(tuple(r) for r in rows)
    Q = BlockMatrix(n, k, [[int(x) for x in r] for r in qA], qB)
    return N, Q


def is_normal_form(rows, n, k) -> bool:
    rows = [list(map(Fraction, r)) for r in rows]
    if len(rows) != n + k:
        raise InputError("expected %d rows" % (n + k))
    m = len(rows[0]) if rows else 0
    bottom = rows[n:]
    # first bullet: wherever a bottom-row combination can reach a column
    # without touching previous columns, the top of that column is zero
    for j in range(m):
        prev_rank = mat_rank([row[:j] for row in bottom]) if j else 0
        cur_rank = mat_rank([row[:j + 1] for row in bottom])
        if cur_rank == prev_rank + 1:
            if any(rows[i][j] != 0 for i in range(n)):
                return False
    # Hermite shape of the top block
    pivots = []
    for i in range(n):
        nzcols = [j for j in range(m) if rows[i][j] != 0]
        if not nzcols:
            for i2 in range(i, n):
                if any(rows[i2][j] != 0 for j in range(m)):
                    return False
            break
        p = nzcols[0]
        if pivots and p <= pivots[-1]:
            return False
        if rows[i][p] <= 0:
            return False
        for i2 in range(i):
            if not (0 <= rows[i2][p] < rows[i][p]):
                return False
        pivots.append(p)
    return True


def pivot_count(rows, n, k):
    count = 0
    m = len(rows[0]) if rows else 0
    for i in range(n):
        if any(rows[i][j] != 0 for j in range(m)):
            count += 1
    return count


# -- presentations ---------------------------------------------------------

class Presentation:
    """Finite presentation: named generators with concrete payloads, and
    relator words over the generator names (letters (name, +-1))."""

    __slots__ = ("generators", "relators")

    def __init__(self, generators, relators):
        self.generators = list(generators)
        self.relators = [tuple(r) for r in relators]
        names = {name for name, _ in self.generators}
        if len(names) != len(self.generators):
            raise InputError("duplicate generator names")
        for rel in self.relators:
            for name, s in rel:
                if name not in names:
                    raise InputError("relator uses unknown generator %r"
                                     % (name,))

    def payload(self, name):
        for gname, p in self.generators:
            if gname == name:
                return p
        raise KeyError(name)

    def __repr__(self):
        return "Presentation(%d generators, %d relators)" % (
            len(self.generators), len(self.relators))


def invert_pword(word):
    return tuple((name, -s) for name, s in reversed(word))


def evaluate_word(word, payloads, mul, inv, identity):
    out = identity
    for name, s in word:
        p = payloads[name]
        out = mul(out, p if s > 0 else inv(p))
    return out


def matrix_env(pres: Presentation):
    return {name: p for name, p in pres.generators}


def evaluate_matrix_word(word, payloads):
    ident = None
    for p in payloads.values():
        ident = BlockMatrix.identity(p.n, p.k)
        break
    return evaluate_word(word, payloads, lambda x, y: x.mul(y),
                         lambda x: x.inv(), ident)


def gl_generator_matrices(m):
    """Named generating matrices of GL(m,Z): elementary transvections and
    one inversion.  For m = 2 the names follow the two-generator-plus-
    inversion convention a, b, c."""
    gens = []
    if m == 0:
        return gens
    if m == 1:
        c = ((-1,),)
        gens.append(("c", c))
        return gens
    ident = [list(r) for r in mat_identity(m)]

    def elem(i, j):
        M = [row[:] for row in ident]
        M[i][j] = 1
        return tuple(map(tuple, M))

    if m == 2:
        gens.append(("a", elem(0, 1)))
        gens.append(("b", elem(1, 0)))
    else:
        for i in range(m):
            for j in range(m):
                if i != j:
                    gens.append(("e%d%d" % (i + 1, j + 1), elem(i, j)))
    inv0 = [row[:] for row in ident]
    inv0[0][0] = -1
    gens.append(("c", tuple(map(tuple, inv0))))
    return gens


def gl_presentation(m) -> Presentation:
    """A finite presentation of GL(m,Z).

    m=0 trivial, m=1 the order-two group, m=2 the amalgam presentation, and
    for m>=3 the Steinberg relations plus the order-4 relation, extended by
    the inversion via the semidirect product combinator.
    """
    gens = gl_generator_matrices(m)
    if m == 0:
        return Presentation([], [])
    if m == 1:
        return Presentation(gens, [((("c", 1),) * 2)])
    if m == 2:
        a, b, c = ("a", 1), ("b", 1), ("c", 1)
        ai, bi, ci = ("a", -1), ("b", -1), ("c", -1)
        rels = [
            (c, c),
            (ai, b) * 3 + invert_pword((b, ai, b) * 2),
            (ai, b) * 6,
            (c, a, c, a),
            (c, b, c, b),
        ]
        return Presentation(gens, rels)
    # m >= 3: Milnor's presentation of SL(m,Z), then adjoin the inversion.
    sl_gens = [(n, p) for n, p in gens if n != "c"]
    name = {(i, j): "e%d%d" % (i + 1, j + 1)
            for i in range(m) for j in range(m) if i != j}
    rels = []
    pairs = list(name)
    for (i, j) in pairs:
        for (p, q) in pairs:
            if (i, j) >= (p, q):
                continue
            x, y = (name[(i, j)], 1), (name[(p, q)], 1)
            xi, yi = (name[(i, j)], -1), (name[(p, q)], -1)
            if j != p and i != q:
                rels.append((x, y, xi, yi))
            elif j == p and i != q:
                rels.append((x, y, xi, yi, (name[(i, q)], -1)))
            elif q == i and p != j:
                rels.append((y, x, yi, xi, (name[(p, j)], -1)))
    w = ((name[(0, 1)], 1), (name[(1, 0)], -1), (name[(0, 1)], 1))
    rels.append(w * 4)
    sl_pres = Presentation(sl_gens, rels)
    cmat = dict(gens)["c"]
    cinv = int_inverse(cmat)
    action = {}
    payloads = dict(sl_gens)
    for gname, gmat in sl_gens:
        conj = mat_mul(mat_mul(cmat, gmat), cinv)
        word = gl_word_sl_free(conj, m, name)
        action[("c", gname)] = word
        assert mat_eq(evaluate_word(word, payloads, mat_mul, int_inverse,
                                    mat_identity(m)), conj)
    top = Presentation([("c", cmat)], [((("c", 1),) * 2)])
    return semidirect_presentation(top, sl_pres, action)


def gl_word_sl_free(mat, m, name):
    """A transvection word for a matrix that is elementary-conjugate (used
    only for the inversion action table: entries stay single transvections
    with a possible sign flip)."""
    word = gl_word(mat)
    return word


def semidirect_presentation(pG: Presentation, pH: Presentation,
                            action) -> Presentation:
    """Presentation of G acting on H: generators of both, relators of both,
    plus g h g^-1 w^-1 for each pair, where action[(g,h)] = w is a word over
    the H generators for g h g^-1."""
    gens = list(pG.generators) + list(pH.generators)
    rels = list(pG.relators) + list(pH.relators)
    for gname, _ in pG.generators:
        for hname, _ in pH.generators:
            w = action[(gname, hname)]
            rels.append(((gname, 1), (hname, 1), (gname, -1))
                        + invert_pword(w))
    return Presentation(gens, rels)


def abelian_presentation(named):
    """Free abelian presentation: all pairs commute."""
    gens = list(named)
    rels = []
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            x, y = (gens[i][0], 1), (gens[j][0], 1)
            rels.append((x, y, (gens[i][0], -1), (gens[j][0], -1)))
    return Presentation(gens, rels)


# -- GL word rewriting -----------------------------------------------------

def gl_word(C):
    """Express C in GL(m,Z) as a word over the named generators of
    gl_generator_matrices(m), by exact row reduction."""
    m = len(C)
    if m == 0:
        return ()
    if m == 1:
        if C == ((1,),):
            return ()
        if C == ((-1,),):
            return (("c", 1),)
        raise InputError("not in GL(1,Z)")

    def ename(i, j):
        if m == 2:
            return "a" if (i, j) == (0, 1) else "b"
        return "e%d%d" % (i + 1, j + 1)

    word = []
    det = mat_det(C)
    if det not in (1, -1):
        raise InputError("matrix is not in GL(m,Z)")
    M = [list(row) for row in C]
    if det == -1:
        # C = c * (c^-1 C); pull the inversion out front
        word.append(("c", 1))
        cinv = [list(row) for row in mat_identity(m)]
        cinv[0][0] = -1
        M = [list(r) for r in mat_mul(cinv, M)]

    # reduce M (det +1) to the identity with row operations; a row operation
    # row_i += q*row_j is left multiplication by ename(i,j)^q, so M equals
    # the product of the inverse operations in order.
    ops = []  # (i, j, q) meaning row_i += q * row_j was applied

    def rowop(i, j, q):
        if q == 0:
            return
        for t in range(m):
            M[i][t] += q * M[j][t]
        ops.append((i, j, q))

    for col in range(m):
        while True:
            nz = [i for i in range(col, m) if M[i][col] != 0]
            if not nz:
                raise InputError("matrix is not in GL(m,Z)")
            if len(nz) == 1 and abs(M[nz[0]][col]) == 1:
                break
            piv = min(nz, key=lambda i: (abs(M[i][col]), i))
            moved = False
            for i in nz:
                if i == piv:
                    continue
                q = -(M[i][col] // M[piv][col])
                rowop(i, piv, q)
                moved = True
            if not moved:
                # single nonzero entry with |entry| > 1: impossible in GL
                raise InputError("matrix is not in GL(m,Z)")
        i0 = nz[0]
        if i0 != col:
            # swap via three row operations keeping determinant
            rowop(col, i0, 1)
            rowop(i0, col, -1)
            rowop(col, i0, 1)
            # now row col holds the old row i0, row i0 holds its negative
        if M[col][col] == -1:
            # negate later with a paired row; find partner among later cols
            pass
        # clear the rest of the column
        for i in range(m):
            if i != col and M[i][col] != 0:
                q = -M[i][col] // M[col][col]
                rowop(i, col, q)
        # clear entries of row col right of the diagonal at the end
    # now M is diagonal with +-1 entries and determinant 1
    negs = [i for i in range(m) if M[i][i] == -1]
    assert len(negs) % 2 == 0
    for t in range(0, len(negs), 2):
        i, j = negs[t], negs[t + 1]
        # diag(-1,-1) in the (i,j) plane equals (e_ij e_ji^-1 e_ij)^2
        for _ in range(2):
            rowop(i, j, 1)
            rowop(j, i, -1)
            rowop(i, j, 1)
    for i in range(m):
        for j in range(m):
            if M[i][j] != (1 if i == j else 0):
                raise AssertionError("GL reduction failed")
    # ops in order turned the det-one part M0 into I: op_r ... op_1 M0 = I,
    # so M0 = op_1^-1 op_2^-1 ... op_r^-1, read left to right.
    for (i, j, q) in ops:
        word.extend([(ename(i, j), -1 if q > 0 else 1)] * abs(q))
    gens_all = dict(gl_generator_matrices(m))
    check = evaluate_word(tuple(word), gens_all, mat_mul, int_inverse,
                          mat_identity(m))
    if not mat_eq(check, C):
        raise AssertionError("GL word reconstruction failed")
    return tuple(word)


# -- labeled graphs ----------------------------------------------------------

class LabeledGraph:
    """Directed multigraph with labeled edges; a reversed edge carries the
    inverse label.  Doubles as a Schreier graph: for those we additionally
    have one out- and one in-edge per label at every vertex."""

    def __init__(self):
        self.payloads = []
        self.vindex = {}
        self.edges = []  # (src, dst, name, payload)
        self.out = {}    # (vertex, name) -> edge index
        self.inc = {}    # (vertex, name) -> edge index

    def add_vertex(self, key, payload=None):
        if key in self.vindex:
            return self.vindex[key]
        idx = len(self.payloads)
        self.vindex[key] = idx
        self.payloads.append(payload if payload is not None else key)
        return idx

    def add_edge(self, src, dst, name, payload):
        idx = len(self.edges)
        self.edges.append((src, dst, name, payload))
        self.out[(src, name)] = idx
        self.inc[(dst, name)] = idx
        return idx

    def n_vertices(self):
        return len(self.payloads)

    def neighbors(self, v):
        """(edge index, forward?) pairs incident to v."""
        for idx, (s, d, _, _) in enumerate(self.edges):
            if s == v:
                yield idx, True
            if d == v:
                yield idx, False

    def component(self, start):
        seen = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for idx, fwd in self.neighbors(v):
                s, d, _, _ = self.edges[idx]
                w = d if fwd else s
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return seen

    def bfs_tree(self, base):
        """Spanning tree of the component of base: vertex -> (edge, forward)
        leading back toward the base; edge order is label order then target
        order, so the output is deterministic."""
        parent = {base: None}
        frontier = [base]
        while frontier:
            nxt = []
            for v in frontier:
                incident = sorted(
                    self.neighbors(v),
                    key=lambda p: (self.edges[p[0]][2], self.edges[p[0]][1
                                   if p[1] else 0]))
                for idx, fwd in incident:
                    s, d, _, _ = self.edges[idx]
                    w = d if fwd else s
                    if w not in parent:
                        parent[w] = (idx, fwd)
                        nxt.append(w)
            frontier = nxt
        return parent

    def path_word(self, parent, v):
        """Word spelling the tree-path element base -> v as a left-to-right
        product (so the first-crossed edge label is the rightmost letter;
        applied to the base coset it lands on v)."""
        steps = []
        while parent[v] is not None:
            idx, fwd = parent[v]
            s, d, name, _ = self.edges[idx]
            steps.append((name, 1 if fwd else -1))
            v = s if fwd else d
        return tuple(steps)


def compose_path_labels(graph, path, mul, inv, identity):
    """Compose edge labels along a path of (edge index, forward) steps, in
    traversal order (the composition acts like the later labels applied to
    the earlier result)."""
    out = identity
    for idx, fwd in path:
        _, _, _, payload = graph.edges[idx]
        out = mul(payload if fwd else inv(payload), out)
    return out


# -- stabilizer of a normal form in G_d --------------------------------------

class StabStructure:
    """The structural data of the stabilizer of a normal form in the
    denominator-d group: pivot count l, kernel basis for the translation
    part, and the named generator layout."""

    __slots__ = ("n", "k", "d", "l", "K_basis", "gl_names", "m_names",
                 "k_names", "payloads")

    def __init__(self, n, k, d, l, K_basis, gl_names, m_names, k_names,
                 payloads):
        self.n = n
        self.k = k
        self.d = d
        self.l = l
        self.K_basis = K_basis
        self.gl_names = gl_names
        self.m_names = m_names
        self.k_names = k_names
        self.payloads = payloads


def _embed_gl(n, k, l, small):
    """Embed an (n-l)x(n-l) integer matrix into the lower-right of the A
    block of an identity BlockMatrix."""
    A = [list(r) for r in mat_identity(n)]
    m = len(small)
    for i in range(m):
        for j in range(m):
            A[l + i][l + j] = small[i][j]
    return BlockMatrix(n, k, A, [[0] * k for _ in range(n)])


def kernel_lattice_basis(bottom, d):
    """Basis of { x in (1/d Z)^k : x * bottom = 0 } where bottom has k rows."""
    k = len(bottom)
    if k == 0:
        return []
    denom = lcm(d, target_lcd(bottom))
    scaled = [[int(x * denom) for x in row] for row in bottom]
    H, U = integer_row_hnf_transform(scaled)
    basis = []
    for i, row in enumerate(H):
        if all(x == 0 for x in row):
            basis.append(tuple(Fraction(u, d) for u in U[i]))
    return basis


def gd_stabilizer(rows, n, k, d):
    """Structure and finite presentation of the stabilizer of a matrix in
    normal form under the denominator-d block group.

    The stabilizer is (M_{l,n-l}(Z) x GL(n-l,Z)) acting on K^n, with K the
    kernel of the bottom-row coefficient map; the presentation is assembled
    with the semidirect-product combinator and all generators carry their
    concrete matrices.
    """
    rows = [tuple(map(Fraction, r)) for r in rows]
    if not is_normal_form(rows, n, k):
        raise InputError("matrix is not in normal form")
    if target_lcd(rows) not in (1,) and d % target_lcd(rows) != 0:
        raise InputError("matrix entries are not multiples of 1/d")
    l = pivot_count(rows, n, k)
    m = n - l
    bottom = rows[n:]

    K_basis = kernel_lattice_basis(bottom, d)
    k_named = []
    payloads = {}
    for i in range(n):
        for t, kb in enumerate(K_basis):
            name = "k_%d_%d" % (i + 1, t + 1)
            B = [[Fraction(0)] * k for _ in range(n)]
            B[i] = list(kb)
            mat = BlockMatrix(n, k, mat_identity(n), B)
            k_named.append((name, mat))
            payloads[name] = mat
    m_named = []
    for i in range(l):
        for j in range(m):
            name = "m_%d_%d" % (i + 1, j + 1)
            A = [list(r) for r in mat_identity(n)]
            A[i][l + j] = 1
            mat = BlockMatrix(n, k, A, [[0] * k for _ in range(n)])
            m_named.append((name, mat))
            payloads[name] = mat
    gl_named = []
    for name, small in gl_generator_matrices(m):
        mat = _embed_gl(n, k, l, small)
        gl_named.append((name, mat))
        payloads[name] = mat

    for name, mat in k_named + m_named + gl_named:
        if not mat_eq(mat.act(rows), tuple(rows)):
            raise AssertionError("stabilizer generator %s moves the matrix"
                                 % name)

    struct = StabStructure(n, k, d, l, K_basis,
                           [nm for nm, _ in gl_named],
                           [nm for nm, _ in m_named],
                           [nm for nm, _ in k_named], payloads)

    # presentations of the three layers
    p_gl = gl_presentation(m)
    p_gl = Presentation([(nm, payloads[nm]) for nm, _ in p_gl.generators],
                        p_gl.relators)
    p_m = abelian_presentation(m_named)
    if m_named:
        action_glm = {}
        for gname, gmat in p_gl.generators:
            small = [[gmat.A[l + i][l + j] for j in range(n - l)]
                     for i in range(n - l)]
            sinv = int_inverse(small)
            for i in range(l):
                for j in range(n - l):
                    word = []
                    for t in range(n - l):
                        e = sinv[j][t]
                        if e:
                            word.extend([("m_%d_%d" % (i + 1, t + 1),
                                          1 if e > 0 else -1)] * abs(e))
                    action_glm[(gname, "m_%d_%d" % (i + 1, j + 1))] = \
                        tuple(word)
        p_top = semidirect_presentation(p_gl, p_m, action_glm)
    else:
        p_top = p_gl
    p_k = abelian_presentation(k_named)
    if k_named:
        action_k = {}
        for gname, gmat in p_top.generators:
            for i in range(n):
                for t in range(len(K_basis)):
                    word = []
                    for r in range(n):
                        e = gmat.A[r][i]
                        if e:
                            word.extend([("k_%d_%d" % (r + 1, t + 1),
                                          1 if e > 0 else -1)] * abs(e))
                    action_k[(gname, "k_%d_%d" % (i + 1, t + 1))] = \
                        tuple(word)
        pres = semidirect_presentation(p_top, p_k, action_k)
    else:
        pres = p_top

    for rel in pres.relators:
        val = evaluate_matrix_word(rel, payloads)
        if val != BlockMatrix.identity(n, k):
            raise AssertionError("stabilizer relator does not hold")
    return struct, pres


def solve_int_combo(basis_rows, target):
    """Integer coefficients expressing target over the basis rows, or None."""
    if not basis_rows:
        return () if all(x == 0 for x in target) else None
    A = [[Fraction(basis_rows[i][j]) for i in range(len(basis_rows))]
         for j in range(len(target))]
    x = solve_right(A, list(target))
    if x is None:
        return None
    if any(c.denominator != 1 for c in x):
        return None
    combo = [sum(int(x[i]) * basis_rows[i][j] for i in range(len(x)))
             for j in range(len(target))]
    if any(c != t for c, t in zip(combo, target)):
        return None
    return tuple(int(c) for c in x)


def gd_stab_word(X: BlockMatrix, struct: StabStructure):
    """Express a stabilizer element over the structured generators: first
    the translation part over the K^n basis, then the M block, then the
    GL(n-l,Z) word."""
    n, k, l = struct.n, struct.k, struct.l
    word = []
    for i in range(n):
        coeffs = solve_int_combo(struct.K_basis, X.B[i])
        if coeffs is None:
            raise InputError("translation part is not in the kernel lattice")
        for t, c in enumerate(coeffs):
            if c:
                word.extend([("k_%d_%d" % (i + 1, t + 1),
                              1 if c > 0 else -1)] * abs(c))
    A = X.A
    for i in range(n):
        for j in range(l):
            if A[i][j] != (1 if i == j else 0):
                raise InputError("element does not stabilize the pivots")
    for i in range(l):
        for j in range(n - l):
            e = A[i][l + j]
            if e:
                word.extend([("m_%d_%d" % (i + 1, j + 1),
                              1 if e > 0 else -1)] * abs(e))
    small = tuple(tuple(A[l + i][l + j] for j in range(n - l))
                  for i in range(n - l))
    word.extend(gl_word(small))
    check = evaluate_matrix_word(tuple(word), struct.payloads)
    if check != X:
        raise AssertionError("stabilizer word reconstruction failed")
    return tuple(word)


# -- Schreier graph of the integral subgroup ---------------------------------

def schreier_g1_in_gd(named_gens, n, k, d, max_vertices=None):
    """Schreier graph of the integral block group inside the denominator-d
    group: vertices are all residue matrices mod d, edges follow the crossed
    homomorphism update."""
    if max_vertices is None:
        max_vertices = SCHREIER_VERTEX_BUDGET
    total = d ** (n * k)
    if total > max_vertices:
        raise BudgetError("Schreier graph would have %d vertices" % total)
    graph = LabeledGraph()

    def all_residues(idx):
        if idx == n * k:
            yield ()
            return
        for rest in all_residues(idx + 1):
            for v in range(d):
                yield (v,) + rest

    verts = []
    for flat in all_residues(0):
        res = tuple(tuple(flat[i * k + j] for j in range(k))
                    for i in range(n))
        verts.append(res)
        graph.add_vertex(res)
    for name, C in named_gens:
        rc = rho(C, d)
        for res in verts:
            prod = tuple(
                tuple((sum(C.A[i][t] * res[t][j] for t in range(n))
                       + rc[i][j]) % d for j in range(k))
                for i in range(n))
            graph.add_edge(graph.vindex[res], graph.vindex[prod], name, C)
    return graph


def subgraph_component(graph, start):
    """The component of a vertex as a fresh LabeledGraph (Schreier property
    is inherited)."""
    comp = graph.component(start)
    sub = LabeledGraph()
    keys = {}
    for key, idx in graph.vindex.items():
        if idx in comp:
            keys[idx] = key
    for idx in sorted(comp):
        sub.add_vertex(keys[idx], graph.payloads[idx])
    for (s, dst, name, payload) in graph.edges:
        if s in comp:
            sub.add_edge(sub.vindex[keys[s]], sub.vindex[keys[dst]], name,
                         payload)
    return sub


# -- orbit decision -----------------------------------------------------------

class OrbitCertificate:
    """Outcome of an orbit check: the witness when positive, a reason when
    negative."""

    __slots__ = ("witness", "reason")

    def __init__(self, witness=None, reason=None):
        self.witness = witness
        self.reason = reason


def _drop_rows(rows, n, zero_columns):
    keep = [i for i in range(len(rows)) if i < n or (i - n) not in
            zero_columns]
    return [rows[i] for i in keep]


def _lift_block(D, k, zero_columns):
    """Reinsert zero columns into the rational block."""
    cols = []
    small = 0
    for j in range(k):
        if j in zero_columns:
            cols.append(None)
        else:
            cols.append(small)
            small += 1
    B = []
    for row in D.B:
        B.append([Fraction(0) if c is None else row[c] for c in cols])
    return BlockMatrix(D.n, k, D.A, B)


def g1_orbit_decide(rows_a, rows_b, n, k, zero_columns=frozenset(),
                    max_vertices=None):
    """Find an integral block matrix D with D*A = B (its rational block zero
    on the given columns), or decide none exists.

    Returns an OrbitCertificate; the reason is "normal-forms" or
    "schreier-component" on the negative side.
    """
    zero_columns = frozenset(zero_columns)
    rows_a = [tuple(map(Fraction, r)) for r in rows_a]
    rows_b = [tuple(map(Fraction, r)) for r in rows_b]
    if len(rows_a) != n + k or len(rows_b) != n + k:
        raise InputError("expected %d rows" % (n + k))
    for j in zero_columns:
        if rows_a[n + j] != rows_b[n + j]:
            return OrbitCertificate(reason="normal-forms")
    ra = _drop_rows(rows_a, n, zero_columns)
    rb = _drop_rows(rows_b, n, zero_columns)
    k2 = k - len(zero_columns)
    NA, QA = gq_normal_form(ra, n, k2)
    NB, QB = gq_normal_form(rb, n, k2)
    if not mat_eq(NA, NB):
        return OrbitCertificate(reason="normal-forms")
    d = lcm(target_lcd(NA), lcm(QA.denominator(), QB.denominator()))
    if d == 1:
        D = QB.inv().mul(QA)
    else:
        struct, pres = gd_stabilizer(NA, n, k2, d)
        graph = schreier_g1_in_gd(pres.generators, n, k2, d, max_vertices)
        va = graph.vindex[rho(QA, d)]
        vb = graph.vindex[rho(QB, d)]
        parent = graph.bfs_tree(va)
        if vb not in parent:
            return OrbitCertificate(reason="schreier-component")
        path = []
        v = vb
        while parent[v] is not None:
            idx, fwd = parent[v]
            path.append((idx, fwd))
            s, dnode, _, _ = graph.edges[idx]
            v = s if fwd else dnode
        path.reverse()
        C = compose_path_labels(graph, path, lambda x, y: x.mul(y),
                                lambda x: x.inv(),
                                BlockMatrix.identity(n, k2))
        D = QB.inv().mul(C).mul(QA)
    if not D.is_integral():
        raise AssertionError("orbit witness is not integral")
    D = _lift_block(D, k, zero_columns)
    if not mat_eq(D.act(rows_a), tuple(rows_b)):
        raise AssertionError("orbit witness does not map A to B")
    return OrbitCertificate(witness=D)


# -- presentation of the integral stabilizer ---------------------------------

class StabPresCtx:
    """Everything needed to rewrite integral stabilizer elements over the
    output generators: the conjugator, the structured stabilizer, and the
    Schreier component with its spanning tree and generator naming."""

    __slots__ = ("n", "k", "zero_columns", "Q", "d", "struct", "graph",
                 "base", "parent", "gen_of_edge", "payloads")

    def __init__(self, **kw):
        for key, val in kw.items():
            setattr(self, key, val)

    def rewrite(self, D: BlockMatrix):
        """Word over the output generators for an element of the integral
        stabilizer."""
        small = BlockMatrix(self.n, self.k - len(self.zero_columns),
                            D.A, [
            [x for j, x in enumerate(row) if j not in self.zero_columns]
            for row in D.B])
        Y = self.Q.mul(small).mul(self.Q.inv())
        word_s = gd_stab_word(Y, self.struct)
        return self.trace(word_s)

    def trace(self, word_s):
        """Trace a word over the conjugated stabilizer generators through
        the Schreier component, rewriting over the covering generators.

        Words are left-to-right products, so the coset walk consumes them
        from the right; collected letters are reversed back at the end."""
        out = []
        v = self.base
        for name, s in reversed(word_s):
            if s > 0:
                idx = self.graph.out[(v, name)]
                if idx in self.gen_of_edge:
                    out.append((self.gen_of_edge[idx], 1))
                v = self.graph.edges[idx][1]
            else:
                idx = self.graph.inc[(v, name)]
                if idx in self.gen_of_edge:
                    out.append((self.gen_of_edge[idx], -1))
                v = self.graph.edges[idx][0]
        if v != self.base:
            raise InputError("word does not lie in the integral stabilizer")
        out.reverse()
        return tuple(out)


def cover_presentation(pres: Presentation, graph: LabeledGraph, base,
                       mul, inv, identity):
    """Presentation of the finite-index subgroup read off a connected
    Schreier graph of it, as the fundamental group of the covering complex:
    one generator per non-tree edge, one relator per (vertex, relator of the
    base presentation).
    """
    parent = graph.bfs_tree(base)
    if len(parent) != graph.n_vertices():
        raise InputError("Schreier graph is not connected")
    tree_edges = {entry[0] for entry in parent.values() if entry is not None}
    gen_of_edge = {}
    gens = []
    counter = 0

    def tree_elem(v):
        path = []
        x = v
        while parent[x] is not None:
            idx, fwd = parent[x]
            path.append((idx, fwd))
            s, d, _, _ = graph.edges[idx]
            x = s if fwd else d
        path.reverse()
        return compose_path_labels(graph, path, mul, inv, identity)

    for idx, (s, d, name, payload) in enumerate(graph.edges):
        if idx in tree_edges:
            continue
        counter += 1
        gname = "x%d" % counter
        elem = mul(inv(tree_elem(d)), mul(payload, tree_elem(s)))
        gens.append((gname, elem))
        gen_of_edge[idx] = gname

    relators = []
    for vkey, vidx in sorted(graph.vindex.items(), key=lambda kv: kv[1]):
        for rel in pres.relators:
            out = []
            v = vidx
            for name, s in reversed(rel):
                if s > 0:
                    eidx = graph.out[(v, name)]
                    if eidx in gen_of_edge:
                        out.append((gen_of_edge[eidx], 1))
                    v = graph.edges[eidx][1]
                else:
                    eidx = graph.inc[(v, name)]
                    if eidx in gen_of_edge:
                        out.append((gen_of_edge[eidx], -1))
                    v = graph.edges[eidx][0]
            if v != vidx:
                raise AssertionError("relator did not close up in the cover")
            out.reverse()
            relators.append(tuple(out))
    return Presentation(gens, relators), gen_of_edge, parent


def g1_stabilizer_presentation(rows_a, n, k, zero_columns=frozenset(),
                               max_vertices=None):
    """Finite presentation of the stabilizer of an integer matrix in the
    integral block group (rational block zero on the given columns).

    Returns (presentation, ctx); ctx.rewrite expresses further stabilizer
    elements over the presentation's generators.
    """
    zero_columns = frozenset(zero_columns)
    rows_a = [tuple(map(Fraction, r)) for r in rows_a]
    ra = _drop_rows(rows_a, n, zero_columns)
    k2 = k - len(zero_columns)
    N, Q = gq_normal_form(ra, n, k2)
    d = lcm(target_lcd(N), Q.denominator())
    struct, pres_n = gd_stabilizer(N, n, k2, d)
    graph_full = schreier_g1_in_gd(pres_n.generators, n, k2, d, max_vertices)
    base_key = rho(Q.inv(), d)
    comp = subgraph_component(graph_full, graph_full.vindex[base_key])
    # relabel payloads by conjugating into the stabilizer of A
    conj = LabeledGraph()
    for idx in range(comp.n_vertices()):
        key = [kk for kk, ii in comp.vindex.items() if ii == idx][0]
        conj.add_vertex(key, comp.payloads[idx])
    Qi = Q.inv()
    for (s, dst, name, payload) in comp.edges:
        conj.add_edge(s, dst, name, Qi.mul(payload).mul(Q))
    base = conj.vindex[base_key]
    pres_conj = Presentation(
        [(nm, Qi.mul(p).mul(Q)) for nm, p in pres_n.generators],
        pres_n.relators)
    ident = BlockMatrix.identity(n, k2)
    pres, gen_of_edge, parent = cover_presentation(
        pres_conj, conj, base, lambda x, y: x.mul(y), lambda x: x.inv(),
        ident)
    lifted = [(nm, _lift_block(p, k, zero_columns))
              for nm, p in pres.generators]
    pres = Presentation(lifted, pres.relators)
    for nm, p in pres.generators:
        if not p.is_integral():
            raise AssertionError("stabilizer generator is not integral")
        if not mat_eq(p.act(rows_a), tuple(rows_a)):
            raise AssertionError("stabilizer generator moves the matrix")
    ctx = StabPresCtx(n=n, k=k, zero_columns=zero_columns, Q=Q, d=d,
                      struct=struct, graph=conj, base=base, parent=parent,
                      gen_of_edge=gen_of_edge,
                      payloads={nm: p for nm, p in pres.generators})
    return pres, ctx


def presentation_from_finite_index(pH: Presentation, extra, graph, base,
                                   rewriter, mul, inv, identity):
    """Present a group from a finite presentation of a finite-index subgroup
    and a connected Schreier graph over both generator sets.

    Generators: the subgroup's plus the extra coset generators.  Relators:
    the subgroup's, plus one per fundamental-group generator of the graph,
    equating it with its rewriting over the subgroup generators (computed by
    ``rewriter`` from the composed group element)."""
    parent = graph.bfs_tree(base)
    if len(parent) != graph.n_vertices():
        raise InputError("Schreier graph is not connected")
    tree_edges = {entry[0] for entry in parent.values() if entry is not None}
    gens = list(pH.generators) + list(extra)
    rels = list(pH.relators)

    def tree_path(v):
        path = []
        x = v
        while parent[x] is not None:
            idx, fwd = parent[x]
            path.append((idx, fwd))
            s, d, _, _ = graph.edges[idx]
            x = s if fwd else d
        path.reverse()
        return path

    for idx, (s, d, name, payload) in enumerate(graph.edges):
        if idx in tree_edges:
            continue
        ps = tree_path(s)
        pd = tree_path(d)
        # the fundamental-group generator of the non-tree edge, as a word:
        # (tree path to d)^-1 * edge * (tree path to s)
        word = invert_pword(graph.path_word(parent, d))
        word += ((name, 1),)
        word += graph.path_word(parent, s)
        elem = mul(inv(compose_path_labels(graph, pd, mul, inv, identity)),
                   mul(payload,
                       compose_path_labels(graph, ps, mul, inv, identity)))
        w = rewriter(elem)
        rel = word + invert_pword(w)
        if rel and not _trivially_cancels(rel):
            rels.append(rel)
    return Presentation(gens, rels)


def _trivially_cancels(word):
    stack = []
    for name, s in word:
        if stack and stack[-1] == (name, -s):
            stack.pop()
        else:
            stack.append((name, s))
    return not stack
