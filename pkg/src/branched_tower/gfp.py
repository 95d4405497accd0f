"""Sparse linear algebra over the field with p elements.

Rows are dicts ``{column: coefficient}``.  Each stored row is pivoted on
its smallest column, so reduction of a new row only ever introduces
larger columns and always terminates.
"""
from __future__ import annotations

from typing import Iterable, Mapping


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class GFpSystem:
    def __init__(self, p: int, ncols: int):
        self.p = p
        self.ncols = ncols
        self.pivots: dict[int, tuple[dict[int, int], int]] = {}
        self.inconsistent = False

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, int], rhs: int = 0) -> tuple[dict[int, int], int]:
        p = self.p
        work = {c: v % p for c, v in row.items() if v % p}
        rhs %= p
        pivots = self.pivots
        while True:
            hit = [c for c in work if c in pivots]
            if not hit:
                return work, rhs
            c = min(hit)
            prow, prhs = pivots[c]
            f = work[c]
            for k, v in prow.items():
                nv = (work.get(k, 0) - f * v) % p
                if nv:
                    work[k] = nv
                else:
                    work.pop(k, None)
            rhs = (rhs - f * prhs) % p

    def add(self, row: Mapping[int, int], rhs: int = 0) -> bool:
        """Insert an equation; returns True if it raised the rank."""
        work, rhs = self.reduce(row, rhs)
        if not work:
            if rhs:
                self.inconsistent = True
            return False
        c = min(work)
        inv = pow(work[c], -1, self.p)
        work = {k: (v * inv) % self.p for k, v in work.items()}
        self.pivots[c] = (work, (rhs * inv) % self.p)
        return True

    def in_span(self, row: Mapping[int, int]) -> bool:
        work, _ = self.reduce(row, 0)
        return not work

    def solve(self) -> list[int] | None:
        """One solution with free variables set to 0, or None."""
        if self.inconsistent:
            return None
        p = self.p
        x = [0] * self.ncols
        for c in sorted(self.pivots, reverse=True):
            prow, prhs = self.pivots[c]
            acc = prhs
            for k, v in prow.items():
                if k != c:
                    acc -= v * x[k]
            x[c] = acc % p
        return x

    def nullspace(self) -> list[list[int]]:
        """Basis of solutions of the homogeneous system."""
        p = self.p
        free = [c for c in range(self.ncols) if c not in self.pivots]
        order = sorted(self.pivots, reverse=True)
        basis = []
        for f in free:
            x = [0] * self.ncols
            x[f] = 1
            for c in order:
                prow, _ = self.pivots[c]
                acc = 0
                for k, v in prow.items():
                    if k != c:
                        acc -= v * x[k]
                x[c] = acc % p
            basis.append(x)
        return basis


def rank_mod_p(rows: Iterable[Mapping[int, int]], p: int, ncols: int) -> int:
    system = GFpSystem(p, ncols)
    for r in rows:
        system.add(r)
    return system.rank


def solve_mod_p(rows: Iterable[Mapping[int, int]], rhs: Iterable[int], p: int, ncols: int) -> list[int] | None:
    system = GFpSystem(p, ncols)
    for r, b in zip(rows, rhs):
        system.add(r, b)
    return system.solve()
