"""The branched-cover construction over a simplex and its pullback to general complexes.

Stage k produces a complex ``tilde`` with a map ``s`` onto the subdivided
k-skeleton of Δ^m, and a quotient ``hat`` of it.  Going from k to k+1:
cover the preimage of the boundary of every (k+1)-face, cone each cover,
glue the cones along shared k-faces, then fold the new bottom back onto
the previous hat.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .complex import (
    CellMap,
    DComplex,
    disjoint_union,
    identity_map,
    is_connected,
    simplex_with_index,
    subcomplex,
)
from .constructions import (
    Subdivision,
    barycentric_subdivision,
    cone,
    induced_map_from_quotient,
    quotient_by_pairing,
)
from .covers import (
    DeckGroup,
    characteristic_cover,
    lift_data,
    lift_with_translation,
    map_order_divides,
    restrict_automorphism,
)
from .errors import (
    BudgetExceeded,
    ConfigError,
    InconsistentGluing,
    InvalidCellMap,
    ManifoldCheckFailure,
    MatchingViolation,
    StageCheckFailure,
)
from .homology import h1_basis, solve_potential
from .manifold import ManifoldReport, check_closed_oriented_manifold, is_isomorphic
from .sequences import SequenceCursor
from .snf import solve_mod

AbsChain = tuple[tuple[int, ...], ...]


class SimplexModel:
    """Δ^m, its subdivision, and translation between cell ids and absolute flags."""

    def __init__(self, m: int):
        self.m = m
        self.simplex, self.index = simplex_with_index(m)
        self.subsets = [sorted(ix, key=ix.get) for ix in self.index]
        self.sd: Subdivision = barycentric_subdivision(self.simplex)
        self.L = self.sd.complex
        self._abs = [
            [self._to_abs(d, i) for i in range(self.L.count(d))] for d in range(self.L.dim + 1)
        ]
        self._from = {ch: (d, i) for d, level in enumerate(self._abs) for i, ch in enumerate(level)}

    def _to_abs(self, d: int, i: int) -> AbsChain:
        e, c = self.sd.carrier[d][i]
        verts = self.subsets[e][c]
        return tuple(tuple(verts[j] for j in S) for S in self.sd.chains[d][i])

    def chain(self, d: int, i: int) -> AbsChain:
        return self._abs[d][i]

    def cell(self, chain: AbsChain) -> int:
        return self._from[tuple(tuple(s) for s in chain)][1]

    def carrier(self, d: int, i: int) -> tuple[int, ...]:
        return self._abs[d][i][0]

    def last_dim(self, d: int, i: int) -> int:
        return len(self._abs[d][i][-1]) - 1

    def skeleton_cells(self, k: int) -> list[set[int]]:
        """Cells of the subdivided k-skeleton."""
        return [
            {i for i in range(self.L.count(d)) if len(self.carrier(d, i)) <= k + 1}
            for d in range(self.L.dim + 1)
        ]


_MODELS: dict[int, SimplexModel] = {}


def simplex_model(m: int) -> SimplexModel:
    if m not in _MODELS:
        _MODELS[m] = SimplexModel(m)
    return _MODELS[m]


@dataclass
class FaceCover:
    """Data attached to one (k+1)-face Δ while building stage k+1."""

    face: tuple[int, ...]
    base_inclusion: CellMap  # M_Δ → tilde_k
    cover: object  # CoverResult
    basis: object  # H1Basis or None
    piece: CellMap  # cone(E_Δ) → tilde_{k+1}
    base_cells: tuple[int, ...]  # number of base cells of the cone per dimension


@dataclass
class StageRecord:
    k: int
    model: SimplexModel
    tilde: DComplex
    s: CellMap  # tilde → (Δ^m)'
    hat: DComplex
    q: CellMap  # tilde → hat
    p: CellMap  # hat → (Δ^m)'
    B: tuple[int, ...] = ()
    exponents: tuple[int, ...] = ()
    group: object = None  # DeckGroup of this stage
    N: tuple[int, ...] = (1,)
    generators: list[CellMap] = field(default_factory=list)
    generator_stage: list[int] = field(default_factory=list)
    r: CellMap | None = None  # bottom → tilde_{k-1}
    bottom: CellMap | None = None  # bottom → tilde
    hat_inclusion: CellMap | None = None  # hat_{k-1} → hat
    face_covers: list[FaceCover] = field(default_factory=list)
    glue_reports: list[ManifoldReport] = field(default_factory=list)
    isomorphic_faces: str = "n/a"
    checks: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.N[-1]


# --- gluing --------------------------------------------------------------


@dataclass
class GlueResult:
    complex: DComplex
    proj: CellMap  # disjoint union → glued
    offsets: list[list[int]]
    pieces: list[CellMap]  # piece → glued
    reports: list[ManifoldReport]


def glue_cones(
    cones: Sequence[DComplex],
    identifications: Sequence[tuple[int, tuple[int, int], tuple[int, int]]],
    groups: Sequence[Sequence[int]] = (),
    boundary: Sequence[Sequence[int]] | None = None,
    check_manifold: bool = True,
) -> GlueResult:
    """Glue pieces along ``(d, (piece, cell), (piece, cell))`` identifications.

    ``groups`` lists the pieces that together should close up into a
    manifold, one group per (k+2)-simplex.  Within a group every boundary
    top cell (``boundary[piece]``: ids of the base top cells) must meet
    exactly one partner.
    """
    U, offsets = disjoint_union(list(cones))
    pairs = []
    for d, (i, x), (j, y) in identifications:
        pairs.append((d, offsets[i][d] + x, offsets[j][d] + y))
    Q, proj = quotient_by_pairing(U, pairs)
    piece_maps = []
    for i, P in enumerate(cones):
        rows = tuple(
            tuple(proj.assignment[d][offsets[i][d] + c] for c in range(P.count(d)))
            for d in range(P.dim + 1)
        )
        piece_maps.append(CellMap(P, Q, rows))
    reports = []
    for grp in groups:
        if boundary is not None:
            top = None
            members: dict[int, list[tuple[int, int]]] = {}
            for i in grp:
                for c in boundary[i]:
                    top = cones[i].dim - 1
                    members.setdefault(piece_maps[i](top, c), []).append((i, c))
            for cls, mem in members.items():
                if len(mem) != 2 or mem[0][0] == mem[1][0]:
                    raise MatchingViolation(
                        f"boundary cell {mem[0]} is glued to {len(mem) - 1} partners within pieces {list(grp)}"
                    )
        if check_manifold:
            keep = [set() for _ in range(Q.dim + 1)]
            for i in grp:
                for d, row in enumerate(piece_maps[i].assignment):
                    keep[d].update(row)
            sub, _ = subcomplex(Q, keep)
            dim = max(cones[i].dim for i in grp)
            rep = check_closed_oriented_manifold(sub, dim)
            if not (rep.is_pseudomanifold and rep.is_orientable and rep.links_ok):
                raise ManifoldCheckFailure(f"glued pieces {list(grp)} do not form a closed oriented manifold")
            reports.append(rep)
    return GlueResult(Q, proj, offsets, piece_maps, reports)


def quotient_to_hat(
    tilde_next: DComplex, bottom: CellMap, boundary_map: CellMap
) -> tuple[DComplex, CellMap, CellMap]:
    """Fold the bottom of ``tilde_next`` onto the previous hat.

    ``bottom`` is the inclusion of the bottom subcomplex and ``boundary_map``
    sends it to the previous hat.  Returns (hat, q, inclusion of the
    previous hat).
    """
    if bottom.source is not boundary_map.source:
        raise InconsistentGluing("bottom inclusion and boundary map have different sources")
    try:
        boundary_map.check()
    except InvalidCellMap as exc:
        raise InconsistentGluing(f"boundary map is not a cell map: {exc}") from None
    B = bottom.source
    pairs = []
    for d in range(B.dim + 1):
        first: dict[int, int] = {}
        for c in range(B.count(d)):
            img = boundary_map(d, c)
            x = bottom(d, c)
            if img in first:
                pairs.append((d, first[img], x))
            else:
                first[img] = x
    H, q = quotient_by_pairing(tilde_next, pairs)
    prev = boundary_map.target
    rows = []
    for d in range(prev.dim + 1):
        row = [-1] * prev.count(d)
        for c in range(B.count(d) if d <= B.dim else 0):
            row[boundary_map(d, c)] = q(d, bottom(d, c))
        if -1 in row:
            raise InconsistentGluing("boundary map is not onto the previous hat")
        rows.append(tuple(row))
    inc = CellMap(prev, H, tuple(rows))
    if not inc.is_valid():
        raise InconsistentGluing("folded bottom does not embed the previous hat")
    # distinct bottom classes must stay distinct after face closure
    for d in range(prev.dim + 1):
        if len(set(inc.assignment[d])) != prev.count(d):
            raise InconsistentGluing("face closure merged cells with different images")
    return H, q, inc


# --- stage construction --------------------------------------------------

DEFAULT_CELL_BUDGET = 3_000_000


def _stage_zero(model: SimplexModel, p: int) -> StageRecord:
    m = model.m
    tilde = DComplex((tuple(() for _ in range(m + 1)),))
    s = CellMap(tilde, model.L, (tuple(model.cell(((v,),)) for v in range(m + 1)),))
    return StageRecord(
        k=0,
        model=model,
        tilde=tilde,
        s=s,
        hat=tilde,
        q=identity_map(tilde),
        p=s,
        group=DeckGroup(p, ()),
        N=(1,),
    )


def cone_extend(f: CellMap, cE: DComplex) -> CellMap:
    """Extend a self-map of E to its cone, fixing the apex."""
    E = f.source
    rows = []
    for d in range(cE.dim + 1):
        nb = E.count(d) if d <= E.dim else 0
        row = list(f.assignment[d]) if d <= E.dim else []
        if d == 0:
            row.append(cE.count(0) - 1)
        else:
            row.extend(nb + f(d - 1, j) for j in range(E.count(d - 1)))
        rows.append(tuple(row))
    return CellMap(cE, cE, tuple(rows))


def _assemble(glue: GlueResult, piece_self_maps: Sequence[CellMap]) -> CellMap | None:
    """Glue per-piece self-maps into a self-map of the glued complex."""
    Q = glue.complex
    rows = [[-1] * Q.count(d) for d in range(Q.dim + 1)]
    for pm, f in zip(glue.pieces, piece_self_maps):
        for d, level in enumerate(f.assignment):
            row, prow = rows[d], pm.assignment[d]
            for c, img in enumerate(level):
                t, v = prow[c], prow[img]
                if row[t] == -1:
                    row[t] = v
                elif row[t] != v:
                    return None
    return CellMap(Q, Q, tuple(tuple(r) for r in rows))


def map_order(f: CellMap) -> int:
    """Order of a bijective self-map (lcm of cycle lengths over all cells)."""
    from math import lcm

    out = 1
    for level in f.assignment:
        seen = [False] * len(level)
        for x in range(len(level)):
            if seen[x]:
                continue
            n, y = 0, x
            while not seen[y]:
                seen[y] = True
                y = level[y]
                n += 1
            out = lcm(out, n)
    return out


def _face_preimages(prev: StageRecord, faces):
    T, s, model = prev.tilde, prev.s, prev.model
    carriers = [[set(model.carrier(d, s(d, x))) for x in range(T.count(d))] for d in range(T.dim + 1)]
    out = []
    for face in faces:
        fs = set(face)
        keep = [[x for x, car in enumerate(level) if car <= fs] for level in carriers]
        out.append(subcomplex(T, keep))
    return out, carriers


def _next_stage(prev: StageRecord, cursor: SequenceCursor, p: int, budget: int):
    k, model = prev.k, prev.model
    m = model.m
    T, s = prev.tilde, prev.s
    faces = list(combinations(range(m + 1), k + 2))
    preimages, carriers = _face_preimages(prev, faces)

    # one batch of consumed indices per stage, checked to fit every face
    bases = []
    for face, (M, _) in zip(faces, preimages):
        if k == 0:
            bases.append(None)
            continue
        rep = check_closed_oriented_manifold(M, k, links=False)
        if not (rep.is_pseudomanifold and rep.is_connected and rep.is_orientable):
            raise StageCheckFailure(
                f"preimage over the boundary of face {face} is not a connected closed oriented {k}-manifold",
                stage=k + 1,
            )
        bases.append(h1_basis(M))
    ranks = [b.rank if b is not None else 0 for b in bases]
    if len(set(ranks)) > 1:
        raise StageCheckFailure(f"face preimages have different H_1 ranks {ranks}", stage=k + 1)
    B, exps, rest = cursor.take(ranks[0])
    G = DeckGroup(p, tuple(exps))
    n = G.order
    estimate = T.total_cells() + sum(2 * n * M.total_cells() + 1 for M, _ in preimages)
    if estimate > budget:
        raise BudgetExceeded(
            f"stage {k + 1} needs about {estimate} cells (deck group {G}), budget is {budget}"
        )
    iso_verdict = "isomorphic"
    for M, _ in preimages[1:]:
        res = is_isomorphic(preimages[0][0], M, budget=20_000)
        if res.verdict == "not_isomorphic":
            raise StageCheckFailure("face preimages are not isomorphic", stage=k + 1)
        if res.verdict == "unknown":
            iso_verdict = "unknown"
    covers = [characteristic_cover(M, G, b) for (M, _), b in zip(preimages, bases)]
    cones = [cone(cov.total)[0] for cov in covers]

    # faces sharing each k-simplex, and the regions of the preimage over it
    shared: dict[tuple[int, ...], list[int]] = {}
    for sigma in combinations(range(m + 1), k + 1):
        owners = [i for i, f in enumerate(faces) if set(sigma) <= set(f)]
        if len(owners) >= 2:
            shared[sigma] = owners
    back = [[{x: j for j, x in enumerate(row)} for row in inc.assignment] for _, inc in preimages]
    region: dict[tuple[int, ...], list[list[int]]] = {}
    for sigma in shared:
        ss = set(sigma)
        region[sigma] = [[x for x, car in enumerate(level) if car <= ss] for level in carriers]

    # potentials of each face labeling on each region, zero at the region's apex
    pot: dict[tuple[int, tuple[int, ...]], dict[int, tuple]] = {}
    for sigma, owners in shared.items():
        apex = next(x for x in region[sigma][0] if s(0, x) == model.cell((sigma,)))
        for i in owners:
            M, inc = preimages[i]
            keep = [[back[i][d][x] for x in xs] for d, xs in enumerate(region[sigma])]
            R, incR = subcomplex(M, keep)
            if G.rank and R.dim >= 1:
                labels = [covers[i].cocycle.labels[incR(1, e)] for e in range(R.count(1))]
                h = solve_potential(R, labels, G.moduli)
                if h is None:
                    raise StageCheckFailure(f"labeling is not exact over {sigma}", stage=k + 1)
            else:
                h = [G.zero] * R.count(0)
            by_vertex = {inc(0, incR(0, v)): h[v] for v in range(R.count(0))}
            h0 = by_vertex[apex]
            pot[(i, sigma)] = {v: G.sub(x, h0) for v, x in by_vertex.items()}

    offsets = _solve_offsets(G, shared, region, pot)
    if offsets is None:
        raise StageCheckFailure("no consistent choice of sheet offsets for the gluing", stage=k + 1)

    elems = list(G.elements()) if shared else []
    idents = []
    for sigma, owners in shared.items():
        i0 = owners[0]
        f0, a0 = pot[(i0, sigma)], offsets[(i0, sigma)]
        for j in owners[1:]:
            fj, aj = pot[(j, sigma)], offsets[(j, sigma)]
            for d, xs in enumerate(region[sigma]):
                vt = T.vertex_table[d]
                for x in xs:
                    x0, xj = back[i0][d][x], back[j][d][x]
                    v0 = vt[x][0]
                    shift = G.add(G.sub(fj[v0], f0[v0]), G.sub(a0, aj))
                    for a in elems:
                        idents.append((d, (i0, x0 * n + G.index(a)), (j, xj * n + G.index(G.add(a, shift)))))
    groups = []
    if k + 2 <= m:
        for big in combinations(range(m + 1), k + 3):
            groups.append([i for i, f in enumerate(faces) if set(f) <= set(big)])
    boundary = [range(cov.total.count(k)) for cov in covers]
    try:
        glue = glue_cones(cones, idents, groups, boundary, check_manifold=True)
    except (MatchingViolation, ManifoldCheckFailure) as exc:
        raise StageCheckFailure(str(exc), stage=k + 1) from exc
    TN = glue.complex

    # s_{k+1}, the bottom, and r_k
    srows = [[-1] * TN.count(d) for d in range(TN.dim + 1)]
    rrows: list[dict[int, int]] = [dict() for _ in range(T.dim + 1)]
    for i, (face, cov, cE) in enumerate(zip(faces, covers, cones)):
        E, inc, piece = cov.total, preimages[i][1], glue.pieces[i]
        for d in range(cE.dim + 1):
            nb = E.count(d) if d <= E.dim else 0
            for c in range(cE.count(d)):
                if c < nb:
                    x = inc(d, c // n)
                    val = s(d, x)
                    rr = rrows[d]
                    t = piece(d, c)
                    if rr.setdefault(t, x) != x:
                        raise InconsistentGluing("bottom cell lies over two different cells")
                elif d == 0:
                    val = model.cell((face,))
                else:
                    j = c - nb
                    x = inc(d - 1, j // n)
                    val = model.cell((face,) + model.chain(d - 1, s(d - 1, x)))
                t = piece(d, c)
                if srows[d][t] == -1:
                    srows[d][t] = val
                elif srows[d][t] != val:
                    raise InconsistentGluing("glued cells lie over different cells of the simplex")
    s_new = CellMap(TN, model.L, tuple(tuple(r) for r in srows)).check()
    bottom_sub, bottom = subcomplex(TN, [sorted(rr) for rr in rrows])
    r = CellMap(
        bottom_sub, T, tuple(tuple(rrows[d][t] for t in bottom.assignment[d]) for d in range(bottom_sub.dim + 1))
    ).check()
    hat, q, hat_inc = quotient_to_hat(TN, bottom, r.compose(prev.q))
    p_new = induced_map_from_quotient(q, s_new)
    if p_new is None:
        raise InconsistentGluing("s does not factor through the hat quotient")

    face_covers = [
        FaceCover(face, preimages[i][1], covers[i], bases[i], glue.pieces[i], covers[i].total.counts())
        for i, face in enumerate(faces)
    ]
    gens, gen_stage = _lift_generators(prev, covers, cones, preimages, bases, glue, idents)
    for u in range(G.rank):
        maps = [cone_extend(cov.translation(G.unit(u)), cE) for cov, cE in zip(covers, cones)]
        g = _assemble(glue, maps)
        if g is None:
            raise InconsistentGluing("deck translation is not compatible with the gluing")
        gens.append(g.check())
        gen_stage.append(k + 1)
    rec = StageRecord(
        k=k + 1,
        model=model,
        tilde=TN,
        s=s_new,
        hat=hat,
        q=q,
        p=p_new.check(),
        B=tuple(B),
        exponents=tuple(exps),
        group=G,
        N=prev.N + (prev.N[-1] * n,),
        generators=gens,
        generator_stage=gen_stage,
        r=r,
        bottom=bottom,
        hat_inclusion=hat_inc,
        face_covers=face_covers,
        glue_reports=glue.reports,
        isomorphic_faces=iso_verdict if len(faces) > 1 else "n/a",
    )
    return rec, rest


def _solve_offsets(G: DeckGroup, shared, region, pot):
    """Sheet offsets a[(face, σ)] making all gluings over lower cells agree.

    Unknowns are the offsets and one correction π per (face, vertex); the
    gluing is consistent exactly when a - f + π is the same for every face
    containing σ, at every vertex over σ.
    """
    keys = [(i, sigma) for sigma, owners in shared.items() for i in owners]
    out = {key: G.zero for key in keys}
    if not G.rank or not shared:
        return out
    cols: dict[tuple, int] = {}
    for i, sigma in keys:
        cols[("a", i, sigma)] = len(cols)
    eqs = []
    for sigma, owners in shared.items():
        i0 = owners[0]
        for v in region[sigma][0]:
            for j in owners[1:]:
                row: dict[int, int] = {}
                for key, sgn in ((("a", i0, sigma), 1), (("pi", i0, v), 1), (("a", j, sigma), -1), (("pi", j, v), -1)):
                    c = cols.setdefault(key, len(cols))
                    row[c] = row.get(c, 0) + sgn
                eqs.append((row, G.sub(pot[(i0, sigma)][v], pot[(j, sigma)][v])))
    ncols = len(cols)
    A = [[row.get(c, 0) for c in range(ncols)] for row, _ in eqs]
    sols = []
    for t, mod in enumerate(G.moduli):
        sol = solve_mod(A, [rhs[t] for _, rhs in eqs], mod, ncols)
        if sol is None:
            return None
        sols.append(sol)
    for i, sigma in keys:
        c = cols[("a", i, sigma)]
        out[(i, sigma)] = tuple(sol[c] for sol in sols)
    return out


def _lift_generators(prev: StageRecord, covers, cones, preimages, bases, glue: GlueResult, idents):
    """Lift every earlier group generator through the new covers and cones.

    Per face the lift is fixed up to a deck translation; faces are handled
    in order and each picks the first translation agreeing with the faces
    already chosen on the glued cells, preferring lifts with the same order.
    """
    gens: list[CellMap] = []
    stages: list[int] = []
    if not prev.generators:
        return gens, stages
    constraints: list[list[tuple]] = [[] for _ in covers]
    for d, (i0, x), (j, y) in idents:
        constraints[j].append((d, i0, x, y))
    for g, st in zip(prev.generators, prev.generator_stage):
        order = map_order(g)
        chosen: list[CellMap] = []
        for i, (cov, cE) in enumerate(zip(covers, cones)):
            gi = restrict_automorphism(g, preimages[i][1])
            if gi is None:
                raise StageCheckFailure("a group element does not preserve a face preimage", stage=prev.k + 1)
            data = lift_data(cov, gi, bases[i])
            if data is None:
                raise StageCheckFailure(
                    f"a stage-{st} group element does not lift to the cover over face {i}", stage=prev.k + 1
                )
            pick = fallback = None
            pieces = glue.pieces
            for c in cov.deck.elements():
                f = cone_extend(lift_with_translation(cov, gi, data, c), cE)
                if any(
                    pieces[i0](d, chosen[i0](d, x)) != pieces[i](d, f(d, y)) for d, i0, x, y in constraints[i]
                ):
                    continue
                if fallback is None:
                    fallback = f
                if map_order_divides(f, order):
                    pick = f
                    break
            pick = pick or fallback
            if pick is None:
                raise StageCheckFailure("lifted group elements disagree on glued cells", stage=prev.k + 1)
            chosen.append(pick)
        lifted = _assemble(glue, chosen)
        if lifted is None:
            raise StageCheckFailure("lifted group element is not compatible with the gluing", stage=prev.k + 1)
        gens.append(lifted.check())
        stages.append(st)
    return gens, stages


# --- drivers -------------------------------------------------------------


@dataclass
class HatResult:
    m: int
    p: int
    cursor_in: SequenceCursor
    cursor_out: SequenceCursor
    stages: list[StageRecord]
    hatL: DComplex
    consumed: tuple[int, ...]
    group: DeckGroup
    action: list[CellMap]  # generators acting on hatL
    orbit_proj: CellMap  # hatL → base
    base: DComplex
    complete: bool = True
    abelian: bool = True
    classifying: CellMap | None = None  # base → (Δ^m)' for the pullback form
    subdivisions: tuple[Subdivision, ...] = ()  # base is the last of these, over the input
    simplex_result: "HatResult | None" = None
    pullback_data: object = None  # Pullback for the general form
    notes: list[str] = field(default_factory=list)

    @property
    def batches(self) -> list[tuple[int, ...]]:
        return [st.B for st in self.stages[1:]]

    @property
    def degree(self) -> int:
        return self.group.order


def _commute(f: CellMap, g: CellMap) -> bool:
    return f.compose(g).assignment == g.compose(f).assignment


def _finish(stages: list[StageRecord], p: int, K: SequenceCursor, cursor: SequenceCursor, complete: bool) -> HatResult:
    last = stages[-1]
    model = last.model
    group = DeckGroup(p, ())
    for st in stages[1:]:
        group = group.product(st.group)
    notes = []
    action = []
    for g in last.generators:
        h = induced_map_from_quotient(last.q, g.compose(last.q))
        if h is None:
            notes.append("a group generator does not descend to the hat quotient")
            continue
        action.append(h.check())
    abelian = all(_commute(a, b) for i, a in enumerate(action) for b in action[i + 1:])
    if not abelian:
        notes.append("lifted generators do not commute; the acting group is an extension of the stage groups")
    consumed = tuple(i for st in stages[1:] for i in st.B)
    return HatResult(
        m=model.m,
        p=p,
        cursor_in=K,
        cursor_out=cursor,
        stages=stages,
        hatL=last.hat,
        consumed=consumed,
        group=group,
        action=action,
        orbit_proj=last.p,
        base=model.L,
        complete=complete,
        abelian=abelian,
        classifying=identity_map(model.L),
        subdivisions=(model.sd,),
        notes=notes,
    )


def hat_simplex(
    m: int,
    p: int,
    K: SequenceCursor,
    *,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    defer_checks: bool = False,
    run_checks: bool = True,
) -> HatResult:
    """Build the stages over Δ^m, checking every stage as it is produced.

    With ``defer_checks`` all stages are built first and the first failing
    stage is reported afterwards.  On budget overflow a BudgetExceeded
    carrying the partial result is raised.
    """
    from .gfp import is_prime
    from .hat_checks import verify_stage

    if m < 0:
        raise ValueError("dimension must be nonnegative")
    if not is_prime(p):
        raise ConfigError(f"{p} is not prime")
    model = simplex_model(m)
    stages = [_stage_zero(model, p)]
    cursor = K

    def check(st: StageRecord) -> None:
        st.checks = verify_stage(st, p)
        if not defer_checks and not all(c.passed for c in st.checks.values()):
            raise StageCheckFailure(_failure_text(st), stage=st.k, report=st.checks, witness=st)

    if run_checks:
        check(stages[0])
    for _ in range(m):
        used = sum(st.tilde.total_cells() for st in stages)
        try:
            rec, cursor = _next_stage(stages[-1], cursor, p, cell_budget - used)
        except BudgetExceeded as exc:
            partial = _finish(stages, p, K, cursor, complete=False)
            raise BudgetExceeded(str(exc), partial=partial) from None
        stages.append(rec)
        if run_checks:
            check(rec)
    if run_checks and defer_checks:
        for st in stages:
            if not all(c.passed for c in st.checks.values()):
                raise StageCheckFailure(_failure_text(st), stage=st.k, report=st.checks, witness=st)
    return _finish(stages, p, K, cursor, complete=True)


def _failure_text(st: StageRecord) -> str:
    bad = [f"{name}: {c.detail}" for name, c in st.checks.items() if not c.passed]
    return f"stage {st.k} failed " + "; ".join(bad)


def _simplex_iso(L: DComplex) -> CellMap | None:
    """Isomorphism L → Δ^m when L is a single simplex with its faces."""
    m = L.dim
    if m < 0:
        return None
    model = simplex_model(m)
    if L.counts() != model.simplex.counts():
        return None
    res = is_isomorphic(L, model.simplex, budget=50_000)
    return res.witness if res.verdict == "isomorphic" else None


def classifying_map(L: DComplex) -> tuple[CellMap, tuple[Subdivision, ...]]:
    """Base complex over L with a map onto (Δ^m)'.

    A simplex is identified with Δ^m directly, so its base is L'.  Any
    other L uses the subdivided dimension coloring (L')' → (Δ^m)'.
    Returns the map and the chain of subdivisions from L to the base.
    """
    from .constructions import dimension_coloring, subdivide_map

    m = L.dim
    model = simplex_model(m)
    iso = _simplex_iso(L)
    sd1 = barycentric_subdivision(L)
    if iso is not None:
        return subdivide_map(iso, sd1, model.sd).check(), (sd1,)
    color = dimension_coloring(sd1, m)
    sd2 = barycentric_subdivision(sd1.complex)
    return subdivide_map(color, sd2, model.sd).check(), (sd1, sd2)


def hat_complex(
    L: DComplex,
    p: int,
    K: SequenceCursor,
    *,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    defer_checks: bool = False,
    run_checks: bool = True,
) -> HatResult:
    """Pull the simplex construction back along a classifying map of L."""
    from .constructions import pullback

    if L.dim < 0:
        raise ValueError("empty complex")
    base_map, subs = classifying_map(L)
    est = base_map.source.total_cells()
    try:
        simp = hat_simplex(
            L.dim, p, K, cell_budget=max(1, cell_budget - est), defer_checks=defer_checks, run_checks=run_checks
        )
    except BudgetExceeded as exc:
        raise BudgetExceeded(str(exc), partial=exc.partial) from None
    degree = simp.group.order
    if est * degree > cell_budget:
        raise BudgetExceeded(
            f"pullback needs about {est * degree} cells, budget is {cell_budget}", partial=simp
        )
    pb = pullback(base_map, simp.orbit_proj)
    P = pb.complex
    action = []
    for g in simp.action:
        rows = tuple(
            tuple(pb.index[(d, a, g(d, b))] for a, b in level) for d, level in enumerate(pb.pairs)
        )
        action.append(CellMap(P, P, rows).check())
    return HatResult(
        m=simp.m,
        p=p,
        cursor_in=K,
        cursor_out=simp.cursor_out,
        stages=simp.stages,
        hatL=P,
        consumed=simp.consumed,
        group=simp.group,
        action=action,
        orbit_proj=pb.proj_a,
        base=base_map.source,
        complete=simp.complete,
        abelian=simp.abelian,
        classifying=base_map,
        subdivisions=subs,
        simplex_result=simp,
        pullback_data=pb,
        notes=list(simp.notes),
    )
