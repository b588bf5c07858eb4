"""Small exact matrix helpers over Python integers and Fractions.

Matrices are tuples of tuples.  Everything here is exact; no floats.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import InputError


def mat_identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(A, B):
    rows, inner, cols = len(A), len(B), len(B[0]) if B else 0
    return tuple(
        tuple(sum(A[i][t] * B[t][j] for t in range(inner)) for j in range(cols))
        for i in range(rows))


def mat_eq(A, B):
    return len(A) == len(B) and all(
        len(x) == len(y) and all(p == q for p, q in zip(x, y))
        for x, y in zip(A, B))


def mat_det(A):
    """Exact determinant by fraction-free elimination on a small matrix."""
    n = len(A)
    m = [list(map(Fraction, row)) for row in A]
    det = Fraction(1)
    for j in range(n):
        piv = next((i for i in range(j, n) if m[i][j] != 0), None)
        if piv is None:
            return 0
        if piv != j:
            m[j], m[piv] = m[piv], m[j]
            det = -det
        det *= m[j][j]
        for i in range(j + 1, n):
            f = m[i][j] / m[j][j]
            for t in range(j, n):
                m[i][t] -= f * m[j][t]
    if det.denominator != 1:
        raise AssertionError("integer determinant expected")
    return int(det)


def mat_inverse(A):
    """Exact inverse over the rationals (Gauss-Jordan)."""
    n = len(A)
    m = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A)]
    for j in range(n):
        piv = next((i for i in range(j, n) if m[i][j] != 0), None)
        if piv is None:
            raise InputError("matrix is singular")
        m[j], m[piv] = m[piv], m[j]
        f = m[j][j]
        m[j] = [x / f for x in m[j]]
        for i in range(n):
            if i != j and m[i][j] != 0:
                f = m[i][j]
                m[i] = [x - f * y for x, y in zip(m[i], m[j])]
    return tuple(tuple(row[n:]) for row in m)


def int_inverse(A):
    """Inverse of an integer matrix with determinant +-1."""
    d = mat_det(A)
    if d not in (1, -1):
        raise InputError("matrix is not invertible over the integers")
    inv = mat_inverse(A)
    return tuple(tuple(int(x) for x in row) for row in inv)


def mat_rank(A):
    if not A or not A[0]:
        return 0
    m = [list(map(Fraction, row)) for row in A]
    rows, cols = len(m), len(m[0])
    rank = 0
    for j in range(cols):
        piv = next((i for i in range(rank, rows) if m[i][j] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        f = m[rank][j]
        m[rank] = [x / f for x in m[rank]]
        for i in range(rows):
            if i != rank and m[i][j] != 0:
                g = m[i][j]
                m[i] = [x - g * y for x, y in zip(m[i], m[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


def left_kernel_basis(A):
    """Basis of { x : x A = 0 } over the rationals (A given by rows)."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    # kernel of A^T v = 0 with v in Q^rows
    m = [[Fraction(A[i][j]) for i in range(rows)] for j in range(cols)]
    piv_of_col = {}
    r = 0
    for j in range(rows):
        piv = next((i for i in range(r, cols) if m[i][j] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        f = m[r][j]
        m[r] = [x / f for x in m[r]]
        for i in range(cols):
            if i != r and m[i][j] != 0:
                g = m[i][j]
                m[i] = [x - g * y for x, y in zip(m[i], m[r])]
        piv_of_col[j] = r
        r += 1
        if r == cols:
            break
    basis = []
    free = [j for j in range(rows) if j not in piv_of_col]
    for j in free:
        v = [Fraction(0)] * rows
        v[j] = Fraction(1)
        for pc, pr in piv_of_col.items():
            v[pc] = -m[pr][j]
        basis.append(tuple(v))
    return basis


def solve_right(A, b):
    """One rational solution x of A x = b (A rows x cols, b length rows) or
    None if inconsistent."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    m = [list(map(Fraction, A[i])) + [Fraction(b[i])] for i in range(rows)]
    piv_cols = []
    r = 0
    for j in range(cols):
        piv = next((i for i in range(r, rows) if m[i][j] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        f = m[r][j]
        m[r] = [x / f for x in m[r]]
        for i in range(rows):
            if i != r and m[i][j] != 0:
                g = m[i][j]
                m[i] = [x - g * y for x, y in zip(m[i], m[r])]
        piv_cols.append(j)
        r += 1
    for i in range(r, rows):
        if m[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, j in enumerate(piv_cols):
        x[j] = m[i][cols]
    return tuple(x)


def integer_row_hnf_transform(A):
    """Row-reduce an integer matrix to row Hermite-style form, returning
    (H, U) with U unimodular and U A = H.  Zero rows of H sit at the bottom,
    and the corresponding rows of U span the integer left kernel of A."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    H = [list(row) for row in A]
    U = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    r = 0
    for j in range(cols):
        while True:
            nz = [i for i in range(r, rows) if H[i][j] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(H[i][j]), i))
            if H[piv][j] < 0:
                H[piv] = [-x for x in H[piv]]
                U[piv] = [-x for x in U[piv]]
            done = True
            for i in nz:
                if i == piv:
                    continue
                q = H[i][j] // H[piv][j]
                if q:
                    H[i] = [x - q * y for x, y in zip(H[i], H[piv])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[piv])]
                if H[i][j] != 0:
                    done = False
            if done:
                if piv != r:
                    H[r], H[piv] = H[piv], H[r]
                    U[r], U[piv] = U[piv], U[r]
                r += 1
                break
    return tuple(map(tuple, H)), tuple(map(tuple, U))


def lcm(a, b):
    return a // gcd(a, b) * b


def lcm_of_denominators(values):
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d
