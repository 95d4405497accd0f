"""Independent reference computations used by several test files."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from math import gcd


def det_fraction(M) -> int:
    """Determinant by exact rational elimination (independent of the library's Bareiss)."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i] != 0), None)
        if piv is None:
            return 0
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            det = -det
        det *= A[i][i]
        for r in range(i + 1, n):
            f = A[r][i] / A[i][i]
            if f:
                for c in range(i, n):
                    A[r][c] -= f * A[i][c]
    return int(det)


def invariant_factors_by_minors(M) -> list[int]:
    """Invariant factors as ratios of successive gcds of k×k minors."""
    r = len(M)
    c = len(M[0]) if r else 0
    out, prev = [], 1
    for k in range(1, min(r, c) + 1):
        g = 0
        for rows in combinations(range(r), k):
            for cols in combinations(range(c), k):
                g = gcd(g, det_fraction([[M[i][j] for j in cols] for i in rows]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def random_matrix(rng: random.Random, max_size: int, bound: int = 9, sparsity: float = 0.5):
    r = rng.randint(1, max_size)
    c = rng.randint(1, max_size)
    return [[rng.randint(-bound, bound) if rng.random() > sparsity else 0 for _ in range(c)] for _ in range(r)]


def rank_mod_p_dense(rows, p: int) -> int:
    A = [list(r) for r in rows]
    rank, ncols = 0, len(A[0]) if A else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][col] % p), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][col], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][col] % p:
                f = A[i][col]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[rank])]
        rank += 1
    return rank
