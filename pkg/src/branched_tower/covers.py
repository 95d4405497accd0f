"""Finite regular covers with abelian deck groups, built from H_1 data."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .complex import CellMap, DComplex, is_connected
from .errors import (
    CocycleViolation,
    ConstraintUnsatisfiable,
    IncompatibleTorsionImage,
    NoEquivariantIso,
    NotAManifold,
    NotConnected,
)
from .homology import h1_basis, solve_potential, spanning_forest
from .manifold import check_closed_oriented_manifold

Element = tuple[int, ...]


@dataclass(frozen=True)
class DeckGroup:
    """∏ Z/p^{n_i}; elements are residue tuples, indexed in mixed radix (last coordinate fastest)."""

    p: int
    exponents: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(self.exponents))
        if any(n < 1 for n in self.exponents):
            raise ValueError("exponents must be positive")

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(self.p**n for n in self.exponents)

    @property
    def order(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def zero(self) -> Element:
        return tuple(0 for _ in self.exponents)

    def unit(self, i: int) -> Element:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def add(self, a: Sequence[int], b: Sequence[int]) -> Element:
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))

    def sub(self, a: Sequence[int], b: Sequence[int]) -> Element:
        return tuple((x - y) % m for x, y, m in zip(a, b, self.moduli))

    def neg(self, a: Sequence[int]) -> Element:
        return tuple((-x) % m for x, m in zip(a, self.moduli))

    def scale(self, k: int, a: Sequence[int]) -> Element:
        return tuple((k * x) % m for x, m in zip(a, self.moduli))

    def normalize(self, a: Sequence[int]) -> Element:
        return tuple(x % m for x, m in zip(a, self.moduli))

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(m) for m in self.moduli))

    def index(self, a: Sequence[int]) -> int:
        i = 0
        for x, m in zip(a, self.moduli):
            i = i * m + x % m
        return i

    def element(self, i: int) -> Element:
        out = []
        for m in reversed(self.moduli):
            out.append(i % m)
            i //= m
        return tuple(reversed(out))

    def element_order(self, a: Sequence[int]) -> int:
        out = 1
        for x, m in zip(a, self.moduli):
            x %= m
            o = m
            while o > 1 and (x * (o // self.p)) % m == 0:
                o //= self.p
            out = max(out, o)
        return out

    def is_elementary_abelian(self) -> bool:
        return all(n == 1 for n in self.exponents)

    def product(self, other: "DeckGroup") -> "DeckGroup":
        if self.rank and other.rank and self.p != other.p:
            raise ValueError("groups over different primes")
        return DeckGroup(self.p if self.rank else other.p, self.exponents + other.exponents)

    def __str__(self) -> str:
        if not self.exponents:
            return "0"
        return " x ".join(f"Z/{m}" for m in self.moduli)


@dataclass(frozen=True)
class EdgeCocycle:
    base: DComplex
    group: DeckGroup
    labels: tuple[Element, ...]

    def label(self, e: int) -> Element:
        return self.labels[e]

    def violations(self) -> list[int]:
        """Triangles where label(e01) + label(e12) - label(e02) is nonzero."""
        C, G = self.base, self.group
        bad = []
        if C.dim < 2:
            return bad
        for t, (e12, e02, e01) in enumerate(C.faces[2]):
            s = G.sub(G.add(self.labels[e01], self.labels[e12]), self.labels[e02])
            if any(s):
                bad.append(t)
        return bad

    def holonomy(self, cycle: Sequence[int]) -> Element:
        """Sum of coefficient times label over an integral 1-chain."""
        G = self.group
        acc = G.zero
        for e, c in enumerate(cycle):
            if c:
                acc = G.add(acc, G.scale(c, self.labels[e]))
        return acc


@dataclass
class CoverResult:
    total: DComplex
    projection: CellMap
    deck: DeckGroup
    cocycle: EdgeCocycle
    degree: int
    _translations: dict = field(default_factory=dict, repr=False)

    def cell(self, d: int, base_cell: int, a: Sequence[int]) -> int:
        return base_cell * self.deck.order + self.deck.index(a)

    def split(self, d: int, c: int) -> tuple[int, Element]:
        n = self.deck.order
        return c // n, self.deck.element(c % n)

    def translation(self, h: Sequence[int]) -> CellMap:
        """Deck transformation (σ, a) ↦ (σ, a + h)."""
        h = self.deck.normalize(h)
        if h not in self._translations:
            G, E = self.deck, self.total
            rows = []
            for d in range(E.dim + 1):
                rows.append(
                    tuple(
                        (c // G.order) * G.order + G.index(G.add(G.element(c % G.order), h))
                        for c in range(E.count(d))
                    )
                )
            self._translations[h] = CellMap(E, E, tuple(rows))
        return self._translations[h]

    def generators(self) -> list[CellMap]:
        return [self.translation(self.deck.unit(i)) for i in range(self.deck.rank)]


def edge_labeling(
    C: DComplex,
    group: DeckGroup,
    free_images: Sequence[Sequence[int]],
    torsion_images: Sequence[Sequence[int]] | None = None,
    basis=None,
) -> EdgeCocycle:
    """Labels realizing the homomorphism H_1(C) → group given on a basis.

    Tree edges of the BFS spanning tree get 0; every other edge gets the
    image of its fundamental cycle.
    """
    if not is_connected(C):
        raise NotConnected("edge labeling needs a connected complex")
    if basis is None:
        basis = h1_basis(C)
    if len(free_images) != basis.rank:
        raise ValueError(f"need {basis.rank} free images, got {len(free_images)}")
    if torsion_images is None:
        torsion_images = [group.zero] * len(basis.torsion_generators)
    if len(torsion_images) != len(basis.torsion_generators):
        raise ValueError("wrong number of torsion images")
    free_images = [group.normalize(x) for x in free_images]
    torsion_images = [group.normalize(x) for x in torsion_images]
    for (_, order), img in zip(basis.torsion_generators, torsion_images):
        if any(group.scale(order, img)):
            raise IncompatibleTorsionImage(f"element {img} is not killed by {order}")
    n_e = C.count(1) if C.dim >= 1 else 0
    roots, order, tree = spanning_forest(C)
    parent_edge: dict[int, tuple[int, int]] = {w: (e, v) for w, e, v in order}
    depth = {roots[0]: 0}
    for w, e, v in order:
        depth[w] = depth[v] + 1
    faces1 = C.faces[1] if n_e else ()

    def path_to(v: int, u: int, chain: list[int]) -> None:
        # adds the tree path from v to u
        up_v, up_u = [], []
        while depth[v] > depth[u]:
            e, par = parent_edge[v]
            up_v.append((e, v, par))
            v = par
        while depth[u] > depth[v]:
            e, par = parent_edge[u]
            up_u.append((e, u, par))
            u = par
        while v != u:
            e, par = parent_edge[v]
            up_v.append((e, v, par))
            v = par
            e, par = parent_edge[u]
            up_u.append((e, u, par))
            u = par
        for e, frm, to in up_v:
            chain[e] += 1 if faces1[e][0] == to and faces1[e][1] == frm else -1
        for e, frm, to in up_u:
            # traversed from `to` down to `frm`
            chain[e] += 1 if faces1[e][0] == frm and faces1[e][1] == to else -1

    labels: list[Element] = [group.zero] * n_e
    for e in range(n_e):
        if e in tree:
            continue
        head, tail = faces1[e]
        cyc = [0] * n_e
        cyc[e] += 1
        path_to(head, tail, cyc)
        fc, tc = basis.express(cyc)
        lab = group.zero
        for coef, img in zip(fc, free_images):
            lab = group.add(lab, group.scale(coef, img))
        for coef, img in zip(tc, torsion_images):
            lab = group.add(lab, group.scale(coef, img))
        labels[e] = lab
    return EdgeCocycle(C, group, tuple(labels))


def build_cover(cocycle: EdgeCocycle) -> CoverResult:
    bad = cocycle.violations()
    if bad:
        raise CocycleViolation(f"cocycle condition fails on triangles {bad[:5]}")
    C, G = cocycle.base, cocycle.group
    n = G.order
    elems = list(G.elements())
    faces: list[tuple] = []
    for d in range(C.dim + 1):
        if d == 0:
            faces.append(tuple(() for _ in range(C.count(0) * n)))
            continue
        rows = []
        for s, fs in enumerate(C.faces[d]):
            e01 = C.face_by_positions(d, s, (0, 1))[1] if d > 1 else s
            lab = cocycle.labels[e01]
            for a in elems:
                shifted = G.index(G.add(a, lab))
                ia = G.index(a)
                rows.append(tuple((f * n + (shifted if i == 0 else ia)) for i, f in enumerate(fs)))
        faces.append(tuple(rows))
    orient = None
    if C.orientation is not None:
        orient = tuple(o for o in C.orientation for _ in range(n))
    E = DComplex(tuple(faces), orient)
    proj = CellMap(E, C, tuple(tuple(c // n for c in range(E.count(d))) for d in range(E.dim + 1)))
    return CoverResult(E, proj, G, cocycle, n)


def characteristic_cover(M: DComplex, group: DeckGroup, basis=None) -> CoverResult:
    """Cover sending the i-th free H_1 generator to the i-th unit, torsion to 0."""
    if basis is None:
        basis = h1_basis(M) if M.count(0) and is_connected(M) else None
    if basis is None or basis.rank == 0:
        if group.rank:
            raise ValueError("group rank must match the free rank of H_1")
        return build_cover(EdgeCocycle(M, group, tuple(group.zero for _ in range(M.count(1) if M.dim >= 1 else 0))))
    if group.rank != basis.rank:
        raise ValueError("group rank must match the free rank of H_1")
    cocycle = edge_labeling(M, group, [group.unit(i) for i in range(group.rank)], basis=basis)
    return build_cover(cocycle)


@dataclass
class Lemma1Result:
    cover: CoverResult
    consumed: tuple[int, ...]  # root indices
    exponents: tuple[int, ...]
    degree: int
    cursor: object  # remaining cursor


def lemma1_cover(M: DComplex, cursor, p: int, check: bool = True) -> Lemma1Result:
    """Consume l = rank H_1(M) entries and build the matching abelian p-cover.

    A 0-dimensional M (any number of points) gets the identity cover.
    """
    if M.dim <= 0:
        l, basis = 0, None
    else:
        if check:
            rep = check_closed_oriented_manifold(M, M.dim, links=False)
            if not (rep.is_pseudomanifold and rep.is_connected and rep.is_orientable):
                raise NotAManifold("these covers need a connected closed oriented manifold")
        basis = h1_basis(M)
        l = basis.rank
    indices, values, rest = cursor.take(l)
    group = DeckGroup(p, tuple(values))
    cov = characteristic_cover(M, group, basis)
    return Lemma1Result(cov, tuple(indices), tuple(values), group.order, rest)


# --- verification --------------------------------------------------------


@dataclass
class CoveringReport:
    degree: int
    fiber_failures: list[tuple[int, int, int]]  # (dim, base cell, fiber size)
    local_failures: list[tuple[int, int]]  # (dim, source cell)

    @property
    def ok(self) -> bool:
        return not self.fiber_failures and not self.local_failures

    def __bool__(self) -> bool:
        return self.ok


def verify_covering(r: CellMap, expected_degree: int, cells: Sequence[Sequence[int]] | None = None) -> CoveringReport:
    """Fiber sizes plus local isomorphism (cofaces of x map bijectively onto cofaces of r(x)).

    ``cells`` optionally restricts the target cells examined.
    """
    src, tgt = r.source, r.target
    sizes = r.fiber_sizes()
    fiber_bad = []
    for d in range(tgt.dim + 1):
        wanted = range(tgt.count(d)) if cells is None else cells[d] if d < len(cells) else ()
        for c in wanted:
            n = sizes[d][c] if d < len(sizes) else 0
            if n != expected_degree:
                fiber_bad.append((d, c, n))
    local_bad = []
    wanted_sets = None if cells is None else [set(x) for x in cells]
    for d in range(min(src.dim, tgt.dim) + 1):
        if d >= len(src.cofaces) or d >= len(tgt.cofaces):
            continue
        for x in range(src.count(d)):
            y = r(d, x)
            if wanted_sets is not None and (d >= len(wanted_sets) or y not in wanted_sets[d]):
                continue
            up = sorted((r(d + 1, s), i) for s, i in src.cofaces[d][x]) if d < src.dim else []
            down = sorted(tgt.cofaces[d][y]) if d < tgt.dim else []
            if up != down:
                local_bad.append((d, x))
    return CoveringReport(expected_degree, fiber_bad, local_bad)


def orbit_sizes(n_cells: Sequence[int], generators: Sequence[CellMap]) -> list[list[int]]:
    """Size of the orbit of every cell under the group generated by the maps."""
    out = []
    for d, n in enumerate(n_cells):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in generators:
            row = g.assignment[d]
            for x in range(n):
                a, b = find(x), find(row[x])
                if a != b:
                    parent[max(a, b)] = min(a, b)
        roots = [find(x) for x in range(n)]
        count: dict[int, int] = {}
        for r in roots:
            count[r] = count.get(r, 0) + 1
        out.append([count[r] for r in roots])
    return out


def deck_action_is_free(cov: CoverResult) -> bool:
    """Every orbit has |G| cells, i.e. stabilizers are trivial."""
    sizes = orbit_sizes(cov.total.counts(), cov.generators())
    return all(s == cov.deck.order for level in sizes for s in level)


# --- isomorphisms between covers -----------------------------------------


def _vertex0(C: DComplex, d: int, c: int) -> int:
    return C.vertex_table[d][c][0]


def _equivariant_map(src: CoverResult, dst: CoverResult, base_iso: CellMap, auto, phi) -> CellMap:
    G = src.deck
    n = G.order
    E = src.total
    B = src.cocycle.base
    rows = []
    for d in range(E.dim + 1):
        row = []
        for c in range(E.count(d)):
            s, a = c // n, G.element(c % n)
            b = G.add(auto(a), phi[_vertex0(B, d, s)])
            row.append(base_iso(d, s) * n + G.index(b))
        rows.append(tuple(row))
    return CellMap(E, dst.total, tuple(rows))


def compatible_iso(
    cov_i: CoverResult,
    cov_j: CoverResult,
    base_iso: CellMap,
    shared: Mapping[tuple[int, int], int] | None = None,
) -> CellMap:
    """Deck-equivariant isomorphism E_i → E_j over ``base_iso``.

    Candidate maps differ by a deck translation; the first in lexicographic
    order meeting the ``shared`` constraints (required images of given
    (dim, cell) pairs of E_i) is returned.
    """
    G = cov_i.deck
    if cov_j.deck != G:
        raise NoEquivariantIso("deck groups differ")
    B = cov_i.cocycle.base
    if not is_connected(B):
        raise NoEquivariantIso("base must be connected")
    diff = [
        G.sub(cov_j.cocycle.labels[base_iso(1, e)], cov_i.cocycle.labels[e]) for e in range(B.count(1) if B.dim >= 1 else 0)
    ]
    phi0 = solve_potential(B, diff, G.moduli)
    if phi0 is None:
        raise NoEquivariantIso("labelings are not cohomologous along the base isomorphism")
    for c in G.elements():
        phi = [G.add(x, c) for x in phi0]
        if shared:
            n = G.order
            ok = True
            for (d, x), want in shared.items():
                s, a = x // n, G.element(x % n)
                got = base_iso(d, s) * n + G.index(G.add(a, phi[_vertex0(B, d, s)]))
                if got != want:
                    ok = False
                    break
            if not ok:
                continue
        return _equivariant_map(cov_i, cov_j, base_iso, lambda a: a, phi).check()
    raise ConstraintUnsatisfiable("no deck translation meets the shared-cell constraint")


def lift_data(cov: CoverResult, gamma: CellMap, basis=None):
    """(A, φ0) with γ*λ - A∘λ = δφ0, or None when γ does not lift.

    A is the automorphism of the deck group induced by γ on H_1; lifts of γ
    are (σ, a) ↦ (γσ, A a + φ0(v0 σ) + c) for c in the deck group.
    """
    G = cov.deck
    B = cov.cocycle.base
    lam = cov.cocycle.labels
    n_e = B.count(1) if B.dim >= 1 else 0
    if G.rank == 0:
        return (lambda a: a), [G.zero] * B.count(0)
    if basis is None:
        basis = h1_basis(B)
    if basis.rank != G.rank:
        raise ValueError("cover is not characteristic for this basis")
    cols = []
    for g in basis.free_generators:
        acc = G.zero
        for e, c in enumerate(g):
            if c:
                acc = G.add(acc, G.scale(c, lam[gamma(1, e)]))
        cols.append(acc)
    for i, col in enumerate(cols):
        if any(G.scale(G.moduli[i], col)):
            return None

    def auto(a):
        acc = G.zero
        for x, col in zip(a, cols):
            acc = G.add(acc, G.scale(x, col))
        return acc

    if G.order <= 1 << 16 and len({auto(a) for a in G.elements()}) != G.order:
        return None
    diff = [G.sub(lam[gamma(1, e)], auto(lam[e])) for e in range(n_e)]
    phi0 = solve_potential(B, diff, G.moduli)
    if phi0 is None:
        return None
    return auto, phi0


def lift_with_translation(cov: CoverResult, gamma: CellMap, data, c: Sequence[int]) -> CellMap:
    auto, phi0 = data
    G = cov.deck
    phi = [G.add(x, c) for x in phi0]
    return _equivariant_map(cov, cov, gamma, auto, phi)


def lift_automorphism(cov: CoverResult, gamma: CellMap, basis=None, prefer_order: int | None = None) -> CellMap | None:
    """A lift of an automorphism of the base, or None when the cover's kernel is not γ-invariant.

    With ``prefer_order`` the first deck translate (lexicographic) whose
    order divides it is returned, falling back to the untranslated lift.
    """
    data = lift_data(cov, gamma, basis)
    if data is None:
        return None
    first = None
    for c in cov.deck.elements():
        f = lift_with_translation(cov, gamma, data, c)
        if first is None:
            first = f
        if prefer_order is None or map_order_divides(f, prefer_order):
            return f.check()
    return first.check()


def map_order_divides(f: CellMap, k: int) -> bool:
    """True when f^k is the identity."""
    for d, row in enumerate(f.assignment):
        for x in range(len(row)):
            y = x
            for _ in range(k):
                y = row[y]
            if y != x:
                return False
    return True


def restrict_automorphism(gamma: CellMap, inclusion: CellMap) -> CellMap | None:
    """γ restricted to a subcomplex it preserves (None if it does not)."""
    sub = inclusion.source
    back = [{y: x for x, y in enumerate(row)} for row in inclusion.assignment]
    rows = []
    for d in range(sub.dim + 1):
        row = []
        for x in range(sub.count(d)):
            y = back[d].get(gamma(d, inclusion(d, x)))
            if y is None:
                return None
            row.append(y)
        rows.append(tuple(row))
    return CellMap(sub, sub, tuple(rows))


__all__ = [
    "DeckGroup",
    "EdgeCocycle",
    "CoverResult",
    "CoveringReport",
    "Lemma1Result",
    "edge_labeling",
    "build_cover",
    "characteristic_cover",
    "lemma1_cover",
    "verify_covering",
    "orbit_sizes",
    "deck_action_is_free",
    "compatible_iso",
    "lift_data",
    "lift_with_translation",
    "lift_automorphism",
    "map_order_divides",
    "restrict_automorphism",
]
