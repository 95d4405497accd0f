"""Per-stage verification of the branched-cover construction.

Each check is computed directly from the stage data; none relies on
another having passed.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .complex import is_connected
from .constructions import induced_map_from_quotient, orbit_quotient
from .covers import deck_action_is_free, orbit_sizes, restrict_automorphism, verify_covering
from .errors import NotPure
from .homology import pullback_kills_h1
from .manifold import check_closed_oriented_manifold

CHECK_NAMES = (
    "face_manifolds",
    "bottom_covering",
    "fiber_counts",
    "h1_killed",
    "deck_groups",
    "free_action",
    "orbit_space",
    "hat_injective",
)


@dataclass
class CheckResult:
    passed: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def verify_stage(st, p: int) -> dict[str, CheckResult]:
    checks = {
        "face_manifolds": _face_manifolds(st),
        "bottom_covering": _bottom_covering(st),
        "fiber_counts": _fiber_counts(st),
        "h1_killed": _h1_killed(st, p),
        "deck_groups": _deck_groups(st),
        "free_action": _free_action(st),
        "orbit_space": _orbit_space(st),
        "hat_injective": _hat_injective(st),
    }
    return checks


def stage_passed(checks: dict[str, CheckResult]) -> bool:
    return all(c.passed for c in checks.values())


def _face_manifolds(st) -> CheckResult:
    from .hat import _face_preimages

    j, m = st.k, st.model.m
    if j >= m:
        return CheckResult(True, "top stage, no faces above")
    faces = list(combinations(range(m + 1), j + 2))
    preimages, _ = _face_preimages(st, faces)
    chis = []
    for face, (M, _) in zip(faces, preimages):
        if j == 0:
            if M.dim != 0 or M.count(0) != 2:
                return CheckResult(False, f"preimage over the ends of edge {face} is not two points")
            continue
        try:
            rep = check_closed_oriented_manifold(M, j)
        except NotPure as exc:
            return CheckResult(False, f"face {face}: {exc}")
        if not rep.ok:
            return CheckResult(False, f"preimage over the boundary of face {face} is not a connected closed oriented manifold")
        chis.append(rep.euler_characteristic)
    detail = f"{len(faces)} faces" + (f", euler characteristics {sorted(set(chis))}" if chis else "")
    return CheckResult(True, detail)


def _bottom_covering(st) -> CheckResult:
    if st.k == 0:
        return CheckResult(True, "base stage")
    rep = verify_covering(st.r, st.group.order)
    if not rep.ok:
        return CheckResult(
            False, f"{len(rep.fiber_failures)} fiber and {len(rep.local_failures)} local failures (degree {st.group.order})"
        )
    return CheckResult(True, f"degree {st.group.order}")


def _fiber_counts(st) -> CheckResult:
    model, s, N, j = st.model, st.s, st.N, st.k
    sizes = s.fiber_sizes()
    for d in range(model.L.dim + 1):
        for t in range(model.L.count(d)):
            got = sizes[d][t] if d < len(sizes) else 0
            if len(model.carrier(d, t)) <= j + 1:
                want = N[j] // N[model.last_dim(d, t)]
            else:
                want = 0
            if got != want:
                return CheckResult(False, f"{d}-cell {model.chain(d, t)} has {got} preimages, expected {want}")
    if s.assignment != st.q.compose(st.p).assignment:
        return CheckResult(False, "s differs from p after q")
    return CheckResult(True, f"top fibers {N[j]}")


def _h1_killed(st, p: int) -> CheckResult:
    if st.k == 0:
        return CheckResult(True, "base stage")
    for fc in st.face_covers:
        if not pullback_kills_h1(fc.cover.projection, p):
            return CheckResult(False, f"pullback to the cover over face {fc.face} is nonzero on H^1")
    return CheckResult(True, f"{len(st.face_covers)} covers")


def _deck_groups(st) -> CheckResult:
    if st.k == 0:
        return CheckResult(True, "base stage")
    for fc in st.face_covers:
        cov = fc.cover
        if tuple(cov.deck.exponents) != tuple(st.exponents):
            return CheckResult(False, f"deck group over {fc.face} is {cov.deck}, batch exponents {st.exponents}")
        if st.k >= 2 and not is_connected(cov.total):
            return CheckResult(False, f"cover over face {fc.face} is disconnected")
        if not deck_action_is_free(cov):
            return CheckResult(False, f"deck action over face {fc.face} is not free")
    return CheckResult(True, f"deck group {st.group}")


def _free_action(st) -> CheckResult:
    if st.k == 0:
        return CheckResult(True, "base stage")
    sub = st.bottom.source
    gens = []
    for g, stage in zip(st.generators, st.generator_stage):
        if stage != st.k:
            continue
        h = restrict_automorphism(g, st.bottom)
        if h is None:
            return CheckResult(False, "a new deck generator does not preserve the bottom")
        gens.append(h)
    n = st.group.order
    sizes = orbit_sizes(sub.counts(), gens)
    if any(x != n for level in sizes for x in level):
        return CheckResult(False, f"some orbit in the bottom has size other than {n}")
    Q, proj = orbit_quotient(sub, gens)
    rbar = induced_map_from_quotient(proj, st.r)
    if rbar is None or not rbar.is_bijective():
        return CheckResult(False, "orbit space of the bottom does not match the previous stage")
    return CheckResult(True, f"free, orbit space has {Q.total_cells()} cells")


def _orbit_space(st) -> CheckResult:
    T = st.tilde
    for g in st.generators:
        if g.compose(st.s).assignment != st.s.assignment:
            return CheckResult(False, "a group generator does not commute with s")
    Q, proj = orbit_quotient(T, st.generators)
    sbar = induced_map_from_quotient(proj, st.s)
    if sbar is None:
        return CheckResult(False, "s is not constant on orbits")
    want = st.model.skeleton_cells(st.k)
    for d in range(st.model.L.dim + 1):
        row = sbar.assignment[d] if d <= Q.dim else ()
        if len(set(row)) != len(row) or set(row) != want[d]:
            return CheckResult(False, f"orbit space differs from the subdivided skeleton in dimension {d}")
    return CheckResult(True, f"{len(st.generators)} generators, orbit space {Q.counts()}")


def _hat_injective(st) -> CheckResult:
    if st.k == 0:
        ok = st.q.is_bijective()
        return CheckResult(ok, "identity" if ok else "q is not bijective")
    T, H, q = st.tilde, st.hat, st.q
    in_bottom = [set(row) for row in st.bottom.assignment]
    old = [set(row) for row in st.hat_inclusion.assignment]
    for d in range(T.dim + 1):
        seen = set()
        bset = in_bottom[d] if d < len(in_bottom) else set()
        oset = old[d] if d < len(old) else set()
        for x in range(T.count(d)):
            y = q(d, x)
            if x in bset:
                if y not in oset:
                    return CheckResult(False, f"bottom {d}-cell {x} leaves the previous hat")
                continue
            if y in seen or y in oset:
                return CheckResult(False, f"q is not injective off the bottom at {d}-cell {x}")
            seen.add(y)
        if len(seen) + len(oset) != H.count(d):
            return CheckResult(False, f"q misses {d}-cells of the hat")
    return CheckResult(True, f"hat {H.counts()}")
