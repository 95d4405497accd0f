"""Integral homology and mod-p cohomology of Δ-complexes.

Everything here is exact: integral work goes through :mod:`snf` and mod-p
work through :mod:`gfp`.  Cochains are lists indexed by cell id.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .complex import CellMap, DComplex, connected_components, is_connected
from .errors import DimensionOutOfRange, NotACocycle, NotConnected
from .gfp import GFpSystem
from .snf import IntMatrix, matmul, smith_normal_form, sparse_invariant_factors


@dataclass(frozen=True)
class AbelianPresentation:
    free_rank: int
    torsion: tuple[int, ...] = ()

    def __str__(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion]
        if not parts:
            return "0"
        out = []
        for part in dict.fromkeys(parts):
            n = parts.count(part)
            out.append(part if n == 1 else f"{part}^{n}")
        return " + ".join(out)

    def mod_p_dimension(self, p: int) -> int:
        """dim of Hom(this, Z/p), i.e. free rank plus p-divisible torsion orders."""
        return self.free_rank + sum(1 for t in self.torsion if t % p == 0)


def boundary_matrix(C: DComplex, k: int) -> IntMatrix:
    """Matrix of ∂_k : C_k → C_{k-1}; repeated faces add their signs."""
    if not 1 <= k <= C.dim:
        raise DimensionOutOfRange(f"∂_{k} of a {C.dim}-complex")
    M = [[0] * C.count(k) for _ in range(C.count(k - 1))]
    for c, fs in enumerate(C.faces[k]):
        for i, f in enumerate(fs):
            M[f][c] += -1 if i % 2 else 1
    return M


def _boundary_columns(C: DComplex, k: int) -> list[dict[int, int]]:
    out = []
    for fs in C.faces[k]:
        col: dict[int, int] = {}
        for i, f in enumerate(fs):
            col[f] = col.get(f, 0) + (-1 if i % 2 else 1)
        out.append(col)
    return out


def _rank_over_z(C: DComplex, k: int) -> tuple[int, list[int]]:
    if k < 1 or k > C.dim:
        return 0, []
    diag = sparse_invariant_factors(_boundary_columns(C, k))
    return len(diag), diag


def homology_group(C: DComplex, k: int) -> AbelianPresentation:
    if not 0 <= k <= max(C.dim, 0):
        raise DimensionOutOfRange(f"H_{k} of a {C.dim}-complex")
    rk, _ = _rank_over_z(C, k)
    rk1, factors = _rank_over_z(C, k + 1)
    free = C.count(k) - rk - rk1
    return AbelianPresentation(free, tuple(d for d in factors if d > 1))


def homology(C: DComplex) -> list[AbelianPresentation]:
    return [homology_group(C, k) for k in range(C.dim + 1)]


def boundary_squared_is_zero(C: DComplex) -> bool:
    for k in range(2, C.dim + 1):
        lower = C.faces[k - 1]
        for fs in C.faces[k]:
            acc: dict[int, int] = {}
            for i, f in enumerate(fs):
                si = -1 if i % 2 else 1
                for j, g in enumerate(lower[f]):
                    acc[g] = acc.get(g, 0) + si * (-1 if j % 2 else 1)
            if any(acc.values()):
                return False
    return True


@dataclass
class H1Basis:
    """Integral 1-cycles realizing H_1 = Z^l + torsion, from two SNF passes."""

    free_generators: list[list[int]]
    torsion_generators: list[tuple[list[int], int]]
    _express: Callable[[Sequence[int]], tuple[list[int], list[int]]] = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.free_generators)

    def express(self, cycle: Sequence[int]) -> tuple[list[int], list[int]]:
        """Coordinates (free, torsion mod order) of the class of an integral 1-cycle."""
        return self._express(cycle)


def h1_basis(C: DComplex) -> H1Basis:
    if not is_connected(C):
        raise NotConnected("H_1 basis requires a connected complex")
    n_edges = C.count(1)
    if n_edges == 0:
        return H1Basis([], [], lambda cyc: ([], []))
    s1 = smith_normal_form(boundary_matrix(C, 1), ncols=n_edges)
    r1 = s1.rank
    z = n_edges - r1
    K = [row[r1:] for row in s1.V]  # edges x z, columns span the cycles
    if C.dim >= 2 and C.count(2):
        Y = matmul(s1.V_inv, boundary_matrix(C, 2))
        X = Y[r1:]
        n_tri = C.count(2)
    else:
        X = [[] for _ in range(z)]
        n_tri = 0
    s2 = smith_normal_form(X, ncols=n_tri) if z else None
    if s2 is None:
        return H1Basis([], [], lambda cyc: ([], []))
    gens = matmul(K, s2.U_inv)  # edges x z
    diag = s2.diagonal
    orders = [diag[j] if j < len(diag) else 0 for j in range(z)]
    free_idx = [j for j in range(z) if orders[j] == 0]
    tors_idx = [j for j in range(z) if orders[j] > 1]
    free = [[gens[e][j] for e in range(n_edges)] for j in free_idx]
    tors = [([gens[e][j] for e in range(n_edges)], orders[j]) for j in tors_idx]
    Vinv, U2 = s1.V_inv, s2.U

    def express(cycle: Sequence[int]):
        y = [sum(Vinv[i][e] * cycle[e] for e in range(n_edges) if cycle[e]) for i in range(n_edges)]
        if any(y[:r1]):
            raise ValueError("chain is not a cycle")
        y = y[r1:]
        w = [sum(U2[i][j] * y[j] for j in range(z)) for i in range(z)]
        return [w[j] for j in free_idx], [w[j] % orders[j] for j in tors_idx]

    return H1Basis(free, tors, express)


# --- mod-p cochains ------------------------------------------------------


def coboundary(C: DComplex, k: int, x: Sequence[int], p: int) -> list[int]:
    """δx on (k+1)-cells."""
    if k + 1 > C.dim:
        return []
    out = []
    for fs in C.faces[k + 1]:
        acc = 0
        for i, f in enumerate(fs):
            acc += -x[f] if i % 2 else x[f]
        out.append(acc % p)
    return out


def is_cocycle(C: DComplex, k: int, x: Sequence[int], p: int) -> bool:
    return not any(coboundary(C, k, x, p))


def pullback_cochain(f: CellMap, k: int, x: Sequence[int], p: int | None = None) -> list[int]:
    out = [x[img] for img in f.assignment[k]] if k < len(f.assignment) else []
    if p is not None:
        out = [v % p for v in out]
    return out


def spanning_forest(C: DComplex) -> tuple[list[int], list[tuple[int, int, int]], set[int]]:
    """BFS forest from the lowest vertex of each component, lowest edge first.

    Returns (roots, visit order as (vertex, via_edge, parent), tree edge set).
    """
    n = C.count(0)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    if C.dim >= 1:
        for e, (head, tail) in enumerate(C.faces[1]):
            adj[tail].append((e, head))
            if head != tail:
                adj[head].append((e, tail))
    seen = [False] * n
    roots, order, tree = [], [], set()
    for r in range(n):
        if seen[r]:
            continue
        seen[r] = True
        roots.append(r)
        queue = deque([r])
        while queue:
            v = queue.popleft()
            for e, w in sorted(adj[v]):
                if not seen[w]:
                    seen[w] = True
                    tree.add(e)
                    order.append((w, e, v))
                    queue.append(w)
    return roots, order, tree


def solve_potential(
    C: DComplex, labels: Sequence, moduli: Sequence[int]
) -> list[tuple[int, ...]] | None:
    """Find h on vertices with h(head) - h(tail) = label(edge), or None.

    Labels are vectors in ∏ Z/moduli[i]; an edge runs from ∂_1 to ∂_0.
    """
    roots, order, tree = spanning_forest(C)
    zero = tuple(0 for _ in moduli)
    h: list = [None] * C.count(0)
    for r in roots:
        h[r] = zero
    faces1 = C.faces[1] if C.dim >= 1 else ()
    for w, e, v in order:
        head, tail = faces1[e]
        lab = labels[e]
        if w == head:
            h[w] = tuple((a + b) % m for a, b, m in zip(h[tail], lab, moduli))
        else:
            h[w] = tuple((a - b) % m for a, b, m in zip(h[head], lab, moduli))
    for e, (head, tail) in enumerate(faces1):
        want = tuple((a - b) % m for a, b, m in zip(h[head], h[tail], moduli))
        if want != tuple(x % m for x, m in zip(labels[e], moduli)):
            return None
    return h


def is_coboundary_1(C: DComplex, x: Sequence[int], p: int) -> bool:
    return solve_potential(C, [(v,) for v in x], (p,)) is not None


@dataclass
class ModPCohomology:
    p: int
    degree: int
    dimension: int
    cocycle_basis: list[list[int]]
    _coords: Callable[[Sequence[int]], list[int]] = field(repr=False)

    def coordinates(self, z: Sequence[int]) -> list[int]:
        """Coordinates of the class of cocycle z in ``cocycle_basis``."""
        return self._coords(z)


def _h1_mod_p(C: DComplex, p: int) -> ModPCohomology:
    n_e = C.count(1)
    _, order, tree = spanning_forest(C)
    nontree = [e for e in range(n_e) if e not in tree]
    col = {e: i for i, e in enumerate(nontree)}
    system = GFpSystem(p, len(nontree))
    if C.dim >= 2:
        for fs in C.faces[2]:
            row: dict[int, int] = {}
            for i, f in enumerate(fs):
                if f in col:
                    row[col[f]] = row.get(col[f], 0) + (-1 if i % 2 else 1)
            system.add(row)
    null = system.nullspace()
    free_cols = [c for c in range(len(nontree)) if c not in system.pivots]
    basis = []
    for vec in null:
        full = [0] * n_e
        for c, v in enumerate(vec):
            if v:
                full[nontree[c]] = v
        basis.append(full)

    def coords(z: Sequence[int]) -> list[int]:
        if not is_cocycle(C, 1, z, p):
            raise NotACocycle("coordinates requested for a non-cocycle")
        # normalize to vanish on the forest, then read off the free columns
        h = [0] * C.count(0)
        faces1 = C.faces[1]
        for w, e, v in order:
            head, tail = faces1[e]
            if w == head:
                h[w] = (h[tail] + z[e]) % p
            else:
                h[w] = (h[head] - z[e]) % p
        x = [(z[e] - (h[head] - h[tail])) % p for e, (head, tail) in enumerate(faces1)]
        return [x[nontree[c]] for c in free_cols]

    return ModPCohomology(p, 1, len(basis), basis, coords)


def cohomology_mod_p(C: DComplex, k: int, p: int) -> ModPCohomology:
    if k == 1 and C.dim >= 1:
        return _h1_mod_p(C, p)
    n_k = C.count(k)
    if n_k == 0:
        return ModPCohomology(p, k, 0, [], lambda z: [])
    cocycles = GFpSystem(p, n_k)
    if k + 1 <= C.dim:
        for fs in C.faces[k + 1]:
            row: dict[int, int] = {}
            for i, f in enumerate(fs):
                row[f] = row.get(f, 0) + (-1 if i % 2 else 1)
            cocycles.add(row)
    cob_rows = []
    if k >= 1:
        for t in range(C.count(k - 1)):
            row = {}
            for s, i in C.cofaces[k - 1][t]:
                row[s] = row.get(s, 0) + (-1 if i % 2 else 1)
            cob_rows.append(row)
    span = GFpSystem(p, n_k)
    for r in cob_rows:
        span.add(r)
    basis = []
    for vec in cocycles.nullspace():
        row = {i: v for i, v in enumerate(vec) if v}
        if span.add(row):
            basis.append(vec)
    h = len(basis)
    n_prev = C.count(k - 1) if k >= 1 else 0

    def coords(z: Sequence[int]) -> list[int]:
        if not is_cocycle(C, k, z, p):
            raise NotACocycle("coordinates requested for a non-cocycle")
        system = GFpSystem(p, h + n_prev)
        for s in range(n_k):
            row = {j: basis[j][s] for j in range(h) if basis[j][s]}
            if k >= 1:
                for i, t in enumerate(C.faces[k][s]):
                    row[h + t] = row.get(h + t, 0) + (-1 if i % 2 else 1)
            system.add(row, z[s])
        sol = system.solve()
        if sol is None:
            raise ArithmeticError("cocycle not expressible in the computed basis")
        return sol[:h]

    return ModPCohomology(p, k, h, basis, coords)


def induced_h1_modp(f: CellMap, p: int) -> list[list[int]]:
    """Matrix of f^*: H^1(target) → H^1(source); column j is the image of basis j."""
    src = cohomology_mod_p(f.source, 1, p)
    tgt = cohomology_mod_p(f.target, 1, p)
    cols = [src.coordinates(pullback_cochain(f, 1, b, p)) for b in tgt.cocycle_basis]
    return [[cols[j][i] for j in range(tgt.dimension)] for i in range(src.dimension)]


def pullback_kills_h1(f: CellMap, p: int, basis: Iterable[Sequence[int]] | None = None) -> bool:
    """True iff f^* vanishes on H^1(target; Z/p); linear-time coboundary tests."""
    if basis is None:
        basis = cohomology_mod_p(f.target, 1, p).cocycle_basis
    return all(is_coboundary_1(f.source, pullback_cochain(f, 1, b, p), p) for b in basis)


def extend_cocycle(
    C: DComplex, A_edges: Iterable[int], A_triangles: Iterable[int], z: Mapping[int, int], p: int
) -> list[int] | None:
    """Cocycle on C equal to z on the edges of the subcomplex A, or None.

    ``z`` maps each edge of A to its value; it must be a cocycle on A.
    """
    A_edges = set(A_edges)
    if set(z) != A_edges:
        raise ValueError("z must assign a value to exactly the edges of A")
    A_tri = set(A_triangles)
    if C.dim >= 2:
        for t in A_tri:
            fs = C.faces[2][t]
            if (z[fs[0]] - z[fs[1]] + z[fs[2]]) % p:
                raise NotACocycle(f"z fails the cocycle condition on triangle {t}")
    free = [e for e in range(C.count(1)) if e not in A_edges]
    col = {e: i for i, e in enumerate(free)}
    system = GFpSystem(p, len(free))
    if C.dim >= 2:
        for t, fs in enumerate(C.faces[2]):
            if t in A_tri:
                continue
            row: dict[int, int] = {}
            rhs = 0
            for i, f in enumerate(fs):
                s = -1 if i % 2 else 1
                if f in col:
                    row[col[f]] = row.get(col[f], 0) + s
                else:
                    rhs -= s * z[f]
            system.add(row, rhs)
    sol = system.solve()
    if sol is None:
        return None
    out = [0] * C.count(1)
    for e, v in z.items():
        out[e] = v % p
    for e, i in col.items():
        out[e] = sol[i]
    return out


def component_count(C: DComplex) -> int:
    return len(set(connected_components(C)))
