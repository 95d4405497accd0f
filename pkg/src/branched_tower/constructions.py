"""Subdivision, cones, fiber products and quotients of Δ-complexes."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .complex import CellMap, DComplex
from .errors import InconsistentGluing, NotAnAction, TargetMismatch, InvalidCellMap

Chain = tuple[tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class Subdivision:
    """First barycentric subdivision together with its carrier data.

    A d-cell of ``complex`` is a flag ``S_0 ⊋ S_1 ⊋ ... ⊋ S_d`` of vertex
    positions of an original cell ``carrier[d][i] = (e, c)``, with ``S_0``
    the full position set.  Vertex j of the new cell is the barycenter of the
    face spanned by ``S_j``, so the largest cell always comes first.
    """

    original: DComplex
    complex: DComplex
    carrier: tuple[tuple[tuple[int, int], ...], ...]
    chains: tuple[tuple[Chain, ...], ...]
    index: dict[tuple[int, int, Chain], int]

    def barycenter(self, e: int, c: int) -> int:
        return self.index[(e, c, (tuple(range(e + 1)),))]

    def cells_over(self, keep: Sequence[Iterable[int]]) -> list[set[int]]:
        """Cells whose carrier lies in ``keep[e]`` (the subdivided subcomplex)."""
        sets = [set(k) for k in keep]
        out = []
        for level in self.carrier:
            out.append({i for i, (e, c) in enumerate(level) if e < len(sets) and c in sets[e]})
        return out


def _flags(e: int, d: int) -> list[Chain]:
    """Strictly decreasing flags of length d+1 in Δ^e starting at the full set."""
    full = tuple(range(e + 1))
    out: list[Chain] = []

    def rec(chain: list[tuple[int, ...]]):
        if len(chain) == d + 1:
            out.append(tuple(chain))
            return
        last = chain[-1]
        for size in range(len(last) - 1, 0, -1):
            for sub in combinations(last, size):
                chain.append(sub)
                rec(chain)
                chain.pop()

    rec([full])
    return sorted(out)


def _normalize(C: DComplex, e: int, c: int, chain: Chain) -> tuple[int, int, Chain]:
    head = chain[0]
    if len(head) == e + 1:
        return e, c, chain
    e2, c2 = C.face_by_positions(e, c, head)
    rank = {p: i for i, p in enumerate(head)}
    return e2, c2, tuple(tuple(rank[p] for p in s) for s in chain)


def barycentric_subdivision(C: DComplex) -> Subdivision:
    keys_by_dim: list[list[tuple[int, int, Chain]]] = []
    for d in range(C.dim + 1):
        keys = []
        for e in range(d, C.dim + 1):
            flags = _flags(e, d)
            for c in range(C.count(e)):
                keys.extend((e, c, fl) for fl in flags)
        keys_by_dim.append(keys)
    index: dict[tuple[int, int, Chain], int] = {}
    for d, keys in enumerate(keys_by_dim):
        for i, k in enumerate(keys):
            index[k] = i
    faces = []
    for d, keys in enumerate(keys_by_dim):
        if d == 0:
            faces.append(tuple(() for _ in keys))
            continue
        rows = []
        for e, c, chain in keys:
            fs = [index[_normalize(C, e, c, chain[1:])]]
            for i in range(1, d + 1):
                fs.append(index[(e, c, chain[:i] + chain[i + 1:])])
            rows.append(tuple(fs))
        faces.append(tuple(rows))
    D = DComplex(tuple(faces))
    carrier = tuple(tuple((e, c) for e, c, _ in keys) for keys in keys_by_dim)
    chains = tuple(tuple(ch for _, _, ch in keys) for keys in keys_by_dim)
    return Subdivision(C, D, carrier, chains, index)


def subdivide_map(f: CellMap, sd_source: Subdivision, sd_target: Subdivision) -> CellMap:
    """Subdivision of a dimension-preserving cell map."""
    rows = []
    for d in range(sd_source.complex.dim + 1):
        row = []
        for (e, c), chain in zip(sd_source.carrier[d], sd_source.chains[d]):
            row.append(sd_target.index[(e, f.assignment[e][c], chain)])
        rows.append(tuple(row))
    return CellMap(sd_source.complex, sd_target.complex, tuple(rows))


def dimension_coloring(sd: Subdivision, m: int | None = None) -> CellMap:
    """Map of a subdivision onto Δ^m sending the barycenter of an i-cell to vertex m-i.

    Cells of Δ^m are indexed as in :func:`complex.simplex_with_index`.
    """
    from .complex import simplex_with_index

    if m is None:
        m = sd.original.dim
    simplex, idx = simplex_with_index(m)
    rows = []
    for d in range(sd.complex.dim + 1):
        row = []
        for chain in sd.chains[d]:
            verts = tuple(sorted(m - (len(s) - 1) for s in chain))
            row.append(idx[d][verts])
        rows.append(tuple(row))
    return CellMap(sd.complex, simplex, tuple(rows))


def cone(C: DComplex) -> tuple[DComplex, CellMap, int]:
    """Cone on C with the apex as vertex 0 of every cone cell.

    Base cells keep their ids; the apex is the last vertex, and the cone over
    a (d-1)-cell j is d-cell ``count(d) + j``.  Returns (cone, inclusion, apex).
    """
    n = [C.count(d) for d in range(C.dim + 2)]
    apex = n[0]
    faces: list[tuple[tuple[int, ...], ...]] = [tuple(() for _ in range(n[0] + 1))]
    for d in range(1, C.dim + 2):
        rows = list(C.faces[d]) if d <= C.dim else []
        for j in range(n[d - 1]):
            if d == 1:
                rows.append((j, apex))
            else:
                below = C.faces[d - 1][j]
                rows.append((j,) + tuple(n[d - 1] + f for f in below))
        faces.append(tuple(rows))
    orient = None
    if C.orientation is not None:
        orient = tuple(C.orientation)
    cC = DComplex(tuple(faces), orient)
    inc = CellMap(C, cC, tuple(tuple(range(C.count(d))) for d in range(C.dim + 1)))
    return cC, inc, apex


def cone_cell(C: DComplex, d: int, j: int) -> int:
    """Id in cone(C) of the (d+1)-cell coned over the d-cell j of C."""
    return C.count(d + 1) + j


@dataclass(frozen=True, eq=False)
class Pullback:
    complex: DComplex
    proj_a: CellMap
    proj_b: CellMap
    pairs: tuple[tuple[tuple[int, int], ...], ...]
    index: dict[tuple[int, int, int], int]


def pullback(f: CellMap, g: CellMap) -> Pullback:
    if f.target is not g.target and f.target != g.target:
        raise TargetMismatch("pullback maps have different targets")
    A, B = f.source, g.source
    dim = min(A.dim, B.dim)
    pairs: list[list[tuple[int, int]]] = []
    for d in range(dim + 1):
        by_image: dict[int, list[int]] = {}
        for b, img in enumerate(g.assignment[d]):
            by_image.setdefault(img, []).append(b)
        level = []
        for a, img in enumerate(f.assignment[d]):
            for b in by_image.get(img, ()):
                level.append((a, b))
        pairs.append(level)
    while pairs and not pairs[-1]:
        pairs.pop()
    index = {(d, a, b): i for d, level in enumerate(pairs) for i, (a, b) in enumerate(level)}
    faces = []
    for d, level in enumerate(pairs):
        if d == 0:
            faces.append(tuple(() for _ in level))
            continue
        rows = []
        for a, b in level:
            fa, fb = A.faces[d][a], B.faces[d][b]
            rows.append(tuple(index[(d - 1, fa[i], fb[i])] for i in range(d + 1)))
        faces.append(tuple(rows))
    P = DComplex(tuple(faces))
    pa = CellMap(P, A, tuple(tuple(a for a, _ in level) for level in pairs))
    pb = CellMap(P, B, tuple(tuple(b for _, b in level) for level in pairs))
    return Pullback(P, pa, pb, tuple(tuple(level) for level in pairs), index)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if rx < ry:
            self.parent[ry] = rx
        else:
            self.parent[rx] = ry
        return True


def _quotient_from_union_find(C: DComplex, ufs: list[_UnionFind]) -> tuple[DComplex, CellMap]:
    reps: list[list[int]] = []
    cls: list[list[int]] = []
    for d in range(C.dim + 1):
        uf = ufs[d]
        new_id: dict[int, int] = {}
        rep_list = []
        row = []
        for c in range(C.count(d)):
            r = uf.find(c)
            if r not in new_id:
                new_id[r] = len(rep_list)
                rep_list.append(c)
            row.append(new_id[r])
        reps.append(rep_list)
        cls.append(row)
    faces = []
    for d in range(C.dim + 1):
        if d == 0:
            faces.append(tuple(() for _ in reps[0]))
            continue
        rows = []
        for r in reps[d]:
            rows.append(tuple(cls[d - 1][f] for f in C.faces[d][r]))
        faces.append(tuple(rows))
    Q = DComplex(tuple(faces))
    proj = CellMap(C, Q, tuple(tuple(row) for row in cls))
    return Q, proj


def quotient_by_pairing(
    C: DComplex, pairs: Iterable[tuple[int, int, int]]
) -> tuple[DComplex, CellMap]:
    """Identify cells ``(d, x, y)`` and close the relation under face maps."""
    ufs = [_UnionFind(C.count(d)) for d in range(C.dim + 1)]
    pending: list[tuple[int, int, int]] = []
    for item in pairs:
        if len(item) != 3:
            raise InconsistentGluing(f"malformed pairing {item!r}")
        d, x, y = item
        if not (0 <= d <= C.dim and 0 <= x < C.count(d) and 0 <= y < C.count(d)):
            raise InconsistentGluing(f"pairing {item!r} refers to a missing cell")
        pending.append((d, x, y))
    # process top-down so face closure is a single sweep per dimension
    by_dim: list[list[tuple[int, int]]] = [[] for _ in range(C.dim + 1)]
    for d, x, y in pending:
        by_dim[d].append((x, y))
    for d in range(C.dim, -1, -1):
        uf = ufs[d]
        for x, y in by_dim[d]:
            uf.union(x, y)
        if d == 0:
            break
        # every cell is linked to its class root; pass faces of cell and root down
        for c in range(C.count(d)):
            r = uf.find(c)
            if r != c:
                fc, fr = C.faces[d][c], C.faces[d][r]
                for i in range(d + 1):
                    if fc[i] != fr[i]:
                        by_dim[d - 1].append((fc[i], fr[i]))
    return _quotient_from_union_find(C, ufs)


def orbit_quotient(
    C: DComplex,
    generators: Sequence[CellMap],
    *,
    closed: bool = False,
) -> tuple[DComplex, CellMap]:
    """Quotient of C by the group generated by ``generators``.

    With ``closed=True`` the list is taken to be the whole group and the
    identity/composition axioms are verified.
    """
    for g in generators:
        if g.source != C or g.target != C:
            raise NotAnAction("group element is not a self-map of the complex")
        try:
            g.check()
        except InvalidCellMap as exc:
            raise NotAnAction(f"group element is not a cell map: {exc}") from None
        if not g.is_bijective():
            raise NotAnAction("group element is not bijective")
    if closed:
        keys = {g.assignment for g in generators}
        ident = tuple(tuple(range(C.count(d))) for d in range(C.dim + 1))
        if ident not in keys:
            raise NotAnAction("element list lacks the identity")
        for g in generators:
            for h in generators:
                if g.compose(h).assignment not in keys:
                    raise NotAnAction("element list is not closed under composition")
    ufs = [_UnionFind(C.count(d)) for d in range(C.dim + 1)]
    for g in generators:
        for d, level in enumerate(g.assignment):
            uf = ufs[d]
            for c, img in enumerate(level):
                uf.union(c, img)
    return _quotient_from_union_find(C, ufs)


def induced_map_from_quotient(proj: CellMap, f: CellMap) -> CellMap | None:
    """Factor ``f`` through the quotient ``proj``; None if f is not constant on classes."""
    Q = proj.target
    rows = []
    for d in range(Q.dim + 1):
        row = [-1] * Q.count(d)
        for c, q in enumerate(proj.assignment[d]):
            img = f.assignment[d][c]
            if row[q] == -1:
                row[q] = img
            elif row[q] != img:
                return None
        rows.append(tuple(row))
    return CellMap(Q, f.target, tuple(rows))
