"""Smith normal form over the integers with unimodular transforms.

Matrices are plain lists of lists of Python ints, so entries never
overflow.  Pivots are chosen by minimal absolute value with the lowest
(row, column) index breaking ties, which makes U, D and V deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence

IntMatrix = list[list[int]]


def identity(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> IntMatrix:
    return [[0] * c for _ in range(r)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> IntMatrix:
    if not A:
        return []
    n = len(B[0]) if B else 0
    out = []
    for row in A:
        acc = [0] * n
        for k, a in enumerate(row):
            if a:
                brow = B[k]
                for j in range(n):
                    b = brow[j]
                    if b:
                        acc[j] += a * b
        out.append(acc)
    return out


def transpose(A: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def determinant(A: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(r) for r in A]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


@dataclass
class SNFResult:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix
    V_inv: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        n = min(len(self.D), len(self.D[0]) if self.D else 0)
        return [self.D[i][i] for i in range(n)]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def __iter__(self):
        yield self.U
        yield self.D
        yield self.V


def smith_normal_form(M: Sequence[Sequence[int]], ncols: int | None = None) -> SNFResult:
    """Return U, D, V (plus inverses) with ``U @ M @ V == D``.

    ``ncols`` is needed only when M has no rows.
    """
    r = len(M)
    c = len(M[0]) if r else (ncols or 0)
    A = [list(row) for row in M]
    U, Ui = identity(r), identity(r)
    V, Vi = identity(c), identity(c)

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            U[i], U[j] = U[j], U[i]
            for row in Ui:
                row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        if i != j:
            for row in A:
                row[i], row[j] = row[j], row[i]
            for row in V:
                row[i], row[j] = row[j], row[i]
            Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        ad, as_ = A[dst], A[src]
        for k in range(c):
            if as_[k]:
                ad[k] += q * as_[k]
        ud, us = U[dst], U[src]
        for k in range(r):
            if us[k]:
                ud[k] += q * us[k]
        for row in Ui:
            if row[dst]:
                row[src] -= q * row[dst]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]
        vd, vs = Vi[dst], Vi[src]
        for k in range(c):
            if vd[k]:
                vs[k] -= q * vd[k]

    def min_entry(t):
        best = None
        for i in range(t, r):
            row = A[i]
            for j in range(t, c):
                a = row[j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
        return best

    for t in range(min(r, c)):
        best = min_entry(t)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, r):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // piv))
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, c):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // piv))
                    if A[t][j]:
                        dirty = True
            if dirty:
                # move the smallest remaining entry of row/column t to the pivot
                cand = [(abs(A[i][t]), i, t) for i in range(t, r) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, c) if A[t][j]]
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = None
            for i in range(t + 1, r):
                row = A[i]
                for j in range(t + 1, c):
                    if row[j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
            for row in Ui:
                row[t] = -row[t]
    return SNFResult(U, A, V, Ui, Vi)


def invariant_factors(M: Sequence[Sequence[int]], ncols: int | None = None) -> list[int]:
    return [d for d in smith_normal_form(M, ncols).diagonal if d]


def snf_violations(M: Sequence[Sequence[int]], res: SNFResult) -> list[str]:
    """Postcondition check used by the test suite."""
    problems = []
    r = len(M)
    c = len(res.V)
    if r and matmul(matmul(res.U, M), res.V) != res.D:
        problems.append("U M V != D")
    if abs(determinant(res.U)) != 1:
        problems.append("U not unimodular")
    if abs(determinant(res.V)) != 1:
        problems.append("V not unimodular")
    if matmul(res.U, res.U_inv) != identity(r):
        problems.append("U_inv wrong")
    if matmul(res.V, res.V_inv) != identity(c):
        problems.append("V_inv wrong")
    for i, row in enumerate(res.D):
        for j, x in enumerate(row):
            if i != j and x:
                problems.append("D not diagonal")
                break
    diag = res.diagonal
    if any(d < 0 for d in diag):
        problems.append("negative invariant factor")
    nz = [d for d in diag if d]
    if diag[: len(nz)] != nz:
        problems.append("zeros precede nonzeros on the diagonal")
    for a, b in zip(nz, nz[1:]):
        if b % a:
            problems.append("divisibility chain broken")
            break
    return problems


def solve_mod(A: Sequence[Sequence[int]], b: Sequence[int], modulus: int, ncols: int | None = None) -> list[int] | None:
    """One solution of ``A x ≡ b (mod modulus)``, or None when inconsistent."""
    rows = len(A)
    n = len(A[0]) if rows else (ncols or 0)
    if rows == 0:
        return [0] * n
    res = smith_normal_form(A, ncols=n)
    c = [sum(u * x for u, x in zip(urow, b)) % modulus for urow in res.U]
    diag = res.diagonal
    y = [0] * n
    for j in range(rows):
        d = diag[j] if j < len(diag) else 0
        if d == 0:
            if c[j] % modulus:
                return None
            continue
        g = gcd(d, modulus)
        if c[j] % g:
            return None
        m = modulus // g
        y[j] = (c[j] // g) * pow(d // g, -1, m) % m if m > 1 else 0
    return [sum(v * yy for v, yy in zip(vrow, y)) % modulus for vrow in res.V]


def sparse_invariant_factors(columns: Sequence[dict[int, int]]) -> list[int]:
    """Nonzero invariant factors of a sparse matrix given column by column.

    Unit pivots are eliminated sparsely first (each contributes a factor 1);
    whatever is left goes through the dense normal form.
    """
    cols: dict[int, dict[int, int]] = {j: {r: v for r, v in col.items() if v} for j, col in enumerate(columns)}
    rows: dict[int, set[int]] = {}
    for j, col in cols.items():
        for r in col:
            rows.setdefault(r, set()).add(j)
    units = 0
    progress = True
    while progress:
        progress = False
        for j in sorted(cols):
            col = cols.get(j)
            if not col:
                continue
            cand = [r for r, v in col.items() if v in (1, -1)]
            if not cand:
                continue
            r = min(cand, key=lambda x: (len(rows[x]), x))
            u = col[r]
            # clear row r from every other column using column j
            for k in sorted(rows[r] - {j}):
                ck = cols[k]
                f = ck[r] * u  # u = ±1 so u is its own inverse
                for rr, v in col.items():
                    nv = ck.get(rr, 0) - f * v
                    if nv:
                        if rr not in ck:
                            rows[rr].add(k)
                        ck[rr] = nv
                    elif rr in ck:
                        del ck[rr]
                        rows[rr].discard(k)
            for rr in col:
                rows[rr].discard(j)
            del cols[j]
            units += 1
            progress = True
    live_cols = [j for j in sorted(cols) if cols[j]]
    live_rows = sorted({r for j in live_cols for r in cols[j]})
    if not live_cols:
        return [1] * units
    pos = {r: i for i, r in enumerate(live_rows)}
    M = [[0] * len(live_cols) for _ in live_rows]
    for c, j in enumerate(live_cols):
        for r, v in cols[j].items():
            M[pos[r]][c] = v
    return [1] * units + invariant_factors(M)
