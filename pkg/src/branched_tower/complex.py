"""Finite Δ-complexes and the cell maps between them.

A d-cell is identified by its position in ``faces[d]``; its entry is the
ordered tuple of its d+1 faces (``∂_0 .. ∂_d``), each an index into
``faces[d-1]``.  Two cells may share a face tuple.  Vertices carry the
empty tuple.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    DanglingFace,
    DimensionOutOfRange,
    FaceIdentityViolation,
    GradingError,
    InvalidCellMap,
)

Faces = tuple[tuple[tuple[int, ...], ...], ...]


@dataclass(frozen=True)
class DComplex:
    faces: Faces
    orientation: tuple[int, ...] | None = field(default=None, compare=True)

    @property
    def dim(self) -> int:
        return len(self.faces) - 1

    def count(self, d: int) -> int:
        if 0 <= d < len(self.faces):
            return len(self.faces[d])
        return 0

    def counts(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.faces)

    def total_cells(self) -> int:
        return sum(len(f) for f in self.faces)

    def face(self, d: int, c: int, i: int) -> int:
        return self.faces[d][c][i]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(f) for d, f in enumerate(self.faces))

    @cached_property
    def vertex_table(self) -> tuple[tuple[tuple[int, ...], ...], ...]:
        """``vertex_table[d][c]`` lists the vertices of cell c in order."""
        table: list[tuple[tuple[int, ...], ...]] = []
        for d, level in enumerate(self.faces):
            if d == 0:
                table.append(tuple((v,) for v in range(len(level))))
                continue
            prev = table[d - 1]
            rows = []
            for fs in level:
                # ∂_d drops the last vertex, ∂_0 drops the first
                rows.append(prev[fs[d]] + (prev[fs[0]][-1],))
            table.append(tuple(rows))
        return tuple(table)

    def vertices(self, d: int, c: int) -> tuple[int, ...]:
        return self.vertex_table[d][c]

    @cached_property
    def cofaces(self) -> tuple[tuple[tuple[tuple[int, int], ...], ...], ...]:
        """``cofaces[d][c]`` lists (coface id, face index) pairs, with repeats."""
        out: list[list[list[tuple[int, int]]]] = [
            [[] for _ in level] for level in self.faces
        ]
        for d in range(1, len(self.faces)):
            for s, fs in enumerate(self.faces[d]):
                for i, f in enumerate(fs):
                    out[d - 1][f].append((s, i))
        return tuple(tuple(tuple(x) for x in level) for level in out)

    def cells(self) -> Iterable[tuple[int, int]]:
        for d, level in enumerate(self.faces):
            for c in range(len(level)):
                yield d, c

    def with_orientation(self, orientation: Sequence[int] | None) -> "DComplex":
        return DComplex(self.faces, None if orientation is None else tuple(orientation))

    def face_by_positions(self, d: int, c: int, positions: Sequence[int]) -> tuple[int, int]:
        """Return (dim, id) of the face of cell (d, c) spanned by vertex positions."""
        keep = set(positions)
        cur, cur_dim = c, d
        for r in range(d, -1, -1):
            if r not in keep:
                cur = self.faces[cur_dim][cur][r]
                cur_dim -= 1
        return cur_dim, cur


def empty_complex() -> DComplex:
    return DComplex(())


def build_complex(table: Sequence[Sequence[Sequence[int]]], orientation=None) -> DComplex:
    """Validate a raw listing ``table[d][c] = faces`` and return a DComplex.

    ``table[0]`` may be an integer vertex count or a list of empty tuples.
    """
    table = list(table)
    if table and isinstance(table[0], int):
        table[0] = [()] * table[0]
    faces: list[tuple[tuple[int, ...], ...]] = []
    for d, level in enumerate(table):
        rows = []
        for c, fs in enumerate(level):
            fs = tuple(int(x) for x in fs)
            if d == 0:
                if fs:
                    raise GradingError(f"vertex {c} lists faces {fs}")
            else:
                if len(fs) != d + 1:
                    raise GradingError(f"{d}-cell {c} has {len(fs)} faces, expected {d + 1}")
                for f in fs:
                    if not 0 <= f < len(table[d - 1]):
                        raise DanglingFace(f"{d}-cell {c} references missing {d - 1}-cell {f}")
            rows.append(fs)
        faces.append(tuple(rows))
    while faces and not faces[-1]:
        faces.pop()
    C = DComplex(tuple(faces), None if orientation is None else tuple(orientation))
    check_face_identities(C)
    if C.orientation is not None and len(C.orientation) != C.count(C.dim):
        raise GradingError("orientation length differs from top cell count")
    return C


def face_identity_violations(C: DComplex) -> list[tuple[int, int, int, int]]:
    bad = []
    for d in range(2, len(C.faces)):
        lower = C.faces[d - 1]
        for c, fs in enumerate(C.faces[d]):
            for j in range(d + 1):
                for i in range(j):
                    if lower[fs[j]][i] != lower[fs[i]][j - 1]:
                        bad.append((d, c, i, j))
    return bad


def check_face_identities(C: DComplex) -> None:
    bad = face_identity_violations(C)
    if bad:
        d, c, i, j = bad[0]
        raise FaceIdentityViolation(
            f"∂_{i}∂_{j} != ∂_{j - 1}∂_{i} on {d}-cell {c} ({len(bad)} violations)"
        )


def standard_simplex(m: int) -> DComplex:
    """Δ^m with cells indexed by nonempty vertex subsets in (size, lex) order."""
    return simplex_with_index(m)[0]


def simplex_with_index(m: int) -> tuple[DComplex, list[dict[tuple[int, ...], int]]]:
    from itertools import combinations

    index: list[dict[tuple[int, ...], int]] = []
    faces = []
    for d in range(m + 1):
        subsets = list(combinations(range(m + 1), d + 1))
        index.append({s: i for i, s in enumerate(subsets)})
        if d == 0:
            faces.append(tuple(() for _ in subsets))
        else:
            faces.append(tuple(
                tuple(index[d - 1][s[:i] + s[i + 1:]] for i in range(d + 1)) for s in subsets
            ))
    return DComplex(tuple(faces)), index


def simplex_boundary(m: int) -> DComplex:
    """∂Δ^m, an (m-1)-sphere."""
    full = standard_simplex(m)
    return DComplex(full.faces[:m])


def two_triangles() -> DComplex:
    """Two triangles [0,1,2] and [1,2,3] glued along the edge [1,2]."""
    edges = [(1, 0), (2, 0), (2, 1), (3, 1), (3, 2)]
    return build_complex([4, edges, [(2, 1, 0), (4, 3, 2)]])


def cycle_graph(n: int) -> DComplex:
    """Circle with n vertices and n edges; edge i runs from i to i+1 mod n."""
    return build_complex([n, [((i + 1) % n, i) for i in range(n)]])


def torus() -> DComplex:
    """The minimal Δ-complex torus: 1 vertex, 3 edges (a, b, c), 2 triangles."""
    # upper triangle faces (b, c, a) and lower (a, c, b): a then b equals c
    return build_complex([1, [(0, 0), (0, 0), (0, 0)], [(1, 2, 0), (0, 2, 1)]])


def disjoint_union(parts: Sequence[DComplex]) -> tuple[DComplex, list[list[int]]]:
    """Disjoint union; returns offsets[part][d]."""
    dim = max((P.dim for P in parts), default=-1)
    faces: list[list[tuple[int, ...]]] = [[] for _ in range(dim + 1)]
    offsets = []
    for P in parts:
        off = [len(faces[d]) for d in range(dim + 1)]
        offsets.append(off)
        for d in range(P.dim + 1):
            for fs in P.faces[d]:
                faces[d].append(tuple(f + off[d - 1] for f in fs) if d else ())
    return DComplex(tuple(tuple(level) for level in faces)), offsets


# --- cell maps -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CellMap:
    source: DComplex
    target: DComplex
    assignment: tuple[tuple[int, ...], ...]

    def __call__(self, d: int, c: int) -> int:
        return self.assignment[d][c]

    def violations(self) -> list[tuple[int, int, int]]:
        S, T = self.source, self.target
        bad = []
        if len(self.assignment) != len(S.faces):
            return [(-1, -1, -1)]
        for d in range(len(S.faces)):
            if len(self.assignment[d]) != S.count(d):
                return [(d, -1, -1)]
            for c, img in enumerate(self.assignment[d]):
                if not 0 <= img < T.count(d):
                    bad.append((d, c, -1))
                    continue
                if d:
                    sf = S.faces[d][c]
                    tf = T.faces[d][img]
                    for i in range(d + 1):
                        if self.assignment[d - 1][sf[i]] != tf[i]:
                            bad.append((d, c, i))
        return bad

    def is_valid(self) -> bool:
        return not self.violations()

    def check(self) -> "CellMap":
        bad = self.violations()
        if bad:
            raise InvalidCellMap(f"cell map fails on (dim, cell, face) {bad[0]} ({len(bad)} total)")
        return self

    def compose(self, other: "CellMap") -> "CellMap":
        """Return ``other ∘ self`` (apply self first)."""
        return CellMap(
            self.source,
            other.target,
            tuple(
                tuple(other.assignment[d][x] for x in level)
                for d, level in enumerate(self.assignment)
            ),
        )

    def is_bijective(self) -> bool:
        return all(
            len(set(level)) == len(level) == self.target.count(d)
            for d, level in enumerate(self.assignment)
        ) and len(self.assignment) == len(self.target.faces)

    def inverse(self) -> "CellMap":
        inv = []
        for d, level in enumerate(self.assignment):
            row = [0] * self.target.count(d)
            for c, img in enumerate(level):
                row[img] = c
            inv.append(tuple(row))
        return CellMap(self.target, self.source, tuple(inv))

    def fiber_sizes(self) -> list[list[int]]:
        out = [[0] * self.target.count(d) for d in range(len(self.target.faces))]
        for d, level in enumerate(self.assignment):
            for img in level:
                out[d][img] += 1
        return out

    def image_cells(self) -> list[set[int]]:
        return [set(level) for level in self.assignment]


def identity_map(C: DComplex) -> CellMap:
    return CellMap(C, C, tuple(tuple(range(C.count(d))) for d in range(C.dim + 1)))


def make_map(source: DComplex, target: DComplex, assignment) -> CellMap:
    return CellMap(source, target, tuple(tuple(level) for level in assignment)).check()


def subcomplex(C: DComplex, keep: Sequence[Iterable[int]]) -> tuple[DComplex, CellMap]:
    """Extract the cells listed in ``keep[d]`` (must be closed under faces).

    Cell order is preserved; returns (sub, inclusion).
    """
    keep_sorted = [sorted(set(k)) for k in keep]
    while keep_sorted and not keep_sorted[-1]:
        keep_sorted.pop()
    new_id = [{c: i for i, c in enumerate(k)} for k in keep_sorted]
    faces = []
    for d, k in enumerate(keep_sorted):
        if d == 0:
            faces.append(tuple(() for _ in k))
            continue
        rows = []
        for c in k:
            try:
                rows.append(tuple(new_id[d - 1][f] for f in C.faces[d][c]))
            except KeyError:
                raise DanglingFace(f"subcomplex not closed: {d}-cell {c} has a missing face") from None
        faces.append(tuple(rows))
    orient = None
    if C.orientation is not None and len(keep_sorted) == C.dim + 1:
        orient = tuple(C.orientation[c] for c in keep_sorted[-1])
    sub = DComplex(tuple(faces), orient)
    inc = CellMap(sub, C, tuple(tuple(k) for k in keep_sorted))
    return sub, inc


def face_closure(C: DComplex, seeds: Sequence[Iterable[int]]) -> list[set[int]]:
    """Smallest subcomplex containing the seed cells ``seeds[d]``."""
    closed = [set() for _ in range(C.dim + 1)]
    for d in range(min(len(seeds), C.dim + 1) - 1, -1, -1):
        closed[d].update(seeds[d])
    for d in range(C.dim, 0, -1):
        for c in closed[d]:
            closed[d - 1].update(C.faces[d][c])
    return closed


def skeleton(C: DComplex, k: int) -> DComplex:
    if not 0 <= k <= C.dim:
        raise DimensionOutOfRange(f"skeleton {k} of a {C.dim}-complex")
    orient = C.orientation if k == C.dim else None
    return DComplex(C.faces[: k + 1], orient)


def connected_components(C: DComplex) -> list[int]:
    """Component label of each vertex (via edges)."""
    parent = list(range(C.count(0)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if C.dim >= 1:
        for a, b in C.faces[1]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return [find(v) for v in range(C.count(0))]


def is_connected(C: DComplex) -> bool:
    if C.count(0) == 0:
        return False
    return len(set(connected_components(C))) == 1
