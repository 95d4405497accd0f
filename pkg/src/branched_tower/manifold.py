"""Manifold recognition and isomorphism search for small Δ-complexes."""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .complex import CellMap, DComplex, is_connected
from .errors import NotPure


@dataclass
class ManifoldReport:
    dim: int
    is_pseudomanifold: bool
    is_closed: bool
    is_connected: bool
    is_orientable: bool
    orientation: tuple[int, ...] | None
    euler_characteristic: int
    link_check: dict[int, bool] | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def links_ok(self) -> bool:
        return self.link_check is None or all(self.link_check.values())

    @property
    def ok(self) -> bool:
        """Closed, connected, oriented manifold with verified links where checked."""
        return (
            self.is_pseudomanifold
            and self.is_closed
            and self.is_connected
            and self.is_orientable
            and self.links_ok
        )


def _check_pure(C: DComplex, k: int) -> None:
    if C.dim != k:
        raise NotPure(f"complex has dimension {C.dim}, expected {k}")
    for d in range(k):
        cof = C.cofaces[d]
        for c in range(C.count(d)):
            if not cof[c]:
                raise NotPure(f"{d}-cell {c} is not a face of any higher cell")


def _orient(C: DComplex, k: int) -> tuple[bool, tuple[int, ...] | None]:
    """Greedy sign propagation across (k-1)-cells with exactly two cofaces."""
    n = C.count(k)
    sign = [0] * n
    ok = True
    cof = C.cofaces[k - 1]
    for start in range(n):
        if sign[start]:
            continue
        sign[start] = 1
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for i, f in enumerate(C.faces[k][s]):
                inc = cof[f]
                if len(inc) != 2:
                    continue
                (s1, i1), (s2, i2) = inc
                if s1 == s2:
                    if (-1) ** i1 + (-1) ** i2 != 0:
                        ok = False
                    continue
                other, oi = (s2, i2) if (s1, i1) == (s, i) else (s1, i1)
                want = -sign[s] * (-1) ** i * (-1) ** oi
                if sign[other] == 0:
                    sign[other] = want
                    queue.append(other)
                elif sign[other] != want:
                    ok = False
    return ok, tuple(sign) if ok else None


def vertex_link(C: DComplex, v: int) -> DComplex:
    """Link of vertex v: cells are (cell, position of v) pairs one dimension down."""
    keys: list[list[tuple[int, int]]] = []
    for d in range(1, C.dim + 1):
        level = []
        for c, verts in enumerate(C.vertex_table[d]):
            for a, w in enumerate(verts):
                if w == v:
                    level.append((c, a))
        keys.append(level)
    index = [{k: i for i, k in enumerate(level)} for level in keys]
    faces = []
    for j, level in enumerate(keys):
        if j == 0:
            faces.append(tuple(() for _ in level))
            continue
        d = j + 1
        rows = []
        for c, a in level:
            fs = []
            for t in range(d + 1):
                if t == a:
                    continue
                fs.append(index[j - 1][(C.faces[d][c][t], a - 1 if t < a else a)])
            rows.append(tuple(fs))
        faces.append(tuple(rows))
    while faces and not faces[-1]:
        faces.pop()
    return DComplex(tuple(faces))


def _is_sphere(L: DComplex, n: int) -> bool:
    if n == 0:
        return L.dim == 0 and L.count(0) == 2
    if L.dim != n:
        return False
    try:
        rep = check_closed_oriented_manifold(L, n, links=False)
    except NotPure:
        return False
    if not (rep.is_pseudomanifold and rep.is_connected):
        return False
    if n == 1:
        return True
    if n == 2:
        return rep.euler_characteristic == 2
    return False


def check_closed_oriented_manifold(C: DComplex, k: int, links: bool = True) -> ManifoldReport:
    _check_pure(C, k)
    chi = C.euler_characteristic()
    if k == 0:
        n = C.count(0)
        return ManifoldReport(0, True, True, n == 1, True, tuple([1] * n), chi, None)
    cof = C.cofaces[k - 1]
    pseudo = all(len(cof[f]) == 2 for f in range(C.count(k - 1)))
    connected = is_connected(C)
    orientable, signs = _orient(C, k) if pseudo else (False, None)
    notes = []
    if orientable and signs is not None:
        # the signed sum of top cells must be a cycle
        bd = [0] * C.count(k - 1)
        for s, fs in enumerate(C.faces[k]):
            for i, f in enumerate(fs):
                bd[f] += signs[s] * (-1) ** i
        if any(bd):
            orientable, signs = False, None
            notes.append("signed top chain has nonzero boundary")
    link_check = None
    if links and pseudo:
        if k <= 3:
            link_check = {v: _is_sphere(vertex_link(C, v), k - 1) for v in range(C.count(0))}
        else:
            notes.append(f"vertex links not verified in dimension {k}")
    return ManifoldReport(k, pseudo, pseudo, connected, orientable, signs, chi, link_check, notes)


# --- isomorphism ---------------------------------------------------------


@dataclass
class IsoResult:
    verdict: str  # "isomorphic" | "not_isomorphic" | "unknown"
    witness: CellMap | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.verdict == "isomorphic"


def _degree_profile(C: DComplex) -> tuple:
    return tuple(
        tuple(sorted(Counter(len(x) for x in C.cofaces[d]).items())) for d in range(C.dim + 1)
    )


def is_isomorphic(C: DComplex, D: DComplex, budget: int = 200_000) -> IsoResult:
    if C.counts() != D.counts():
        return IsoResult("not_isomorphic", reason="cell counts differ")
    if _degree_profile(C) != _degree_profile(D):
        return IsoResult("not_isomorphic", reason="coface degree profiles differ")
    dim = C.dim
    if dim < 0:
        return IsoResult("isomorphic", CellMap(C, D, ()))
    # maximal cells per dimension drive the search; their faces are forced
    maximal = [
        [c for c in range(C.count(d)) if not C.cofaces[d][c]] if d < dim else list(range(C.count(d)))
        for d in range(dim + 1)
    ]
    order: list[tuple[int, int]] = []
    for d in range(dim, -1, -1):
        order.extend((d, c) for c in maximal[d])
    d_max = [
        [c for c in range(D.count(d)) if not D.cofaces[d][c]] if d < dim else list(range(D.count(d)))
        for d in range(dim + 1)
    ]
    fwd = [dict() for _ in range(dim + 1)]
    bwd = [dict() for _ in range(dim + 1)]
    nodes = 0

    def assign(d, c, t, trail) -> bool:
        stack = [(d, c, t)]
        while stack:
            d, c, t = stack.pop()
            cur = fwd[d].get(c)
            if cur is not None:
                if cur != t:
                    return False
                continue
            if bwd[d].get(t, c) != c:
                return False
            if len(C.cofaces[d][c]) != len(D.cofaces[d][t]):
                return False
            fwd[d][c] = t
            bwd[d][t] = c
            trail.append((d, c, t))
            if d:
                for fc, ft in zip(C.faces[d][c], D.faces[d][t]):
                    stack.append((d - 1, fc, ft))
        return True

    def undo(trail):
        for d, c, t in reversed(trail):
            del fwd[d][c]
            del bwd[d][t]

    # adjacency ordering: prefer maximal cells sharing a vertex with assigned ones
    def rec(pos: int) -> bool | None:
        nonlocal nodes
        if pos == len(order):
            return True
        d, c = order[pos]
        if c in fwd[d]:
            return rec(pos + 1)
        for t in d_max[d]:
            if t in bwd[d]:
                continue
            nodes += 1
            if nodes > budget:
                return None
            trail: list = []
            if assign(d, c, t, trail):
                r = rec(pos + 1)
                if r is None:
                    return None
                if r:
                    return True
            undo(trail)
        return False

    order = _connected_order(C, order)
    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, len(order) + 1000))
    try:
        res = rec(0)
    finally:
        sys.setrecursionlimit(old)
    if res is None:
        return IsoResult("unknown", reason="search budget exceeded")
    if not res:
        return IsoResult("not_isomorphic", reason="exhaustive search found no isomorphism")
    rows = tuple(tuple(fwd[d][c] for c in range(C.count(d))) for d in range(dim + 1))
    return IsoResult("isomorphic", CellMap(C, D, rows).check())


def _connected_order(C: DComplex, order: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Reorder maximal cells so each shares a vertex with an earlier one when possible."""
    by_vertex: dict[int, list[int]] = {}
    for k, (d, c) in enumerate(order):
        for v in C.vertex_table[d][c]:
            by_vertex.setdefault(v, []).append(k)
    seen = [False] * len(order)
    out = []
    for start in range(len(order)):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            k = queue.popleft()
            out.append(order[k])
            d, c = order[k]
            for v in C.vertex_table[d][c]:
                for k2 in by_vertex[v]:
                    if not seen[k2]:
                        seen[k2] = True
                        queue.append(k2)
    return out
