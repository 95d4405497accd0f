"""Iterated tower L_0 ← L_1 ← L_2 ← ... of branched covers with group actions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .complex import CellMap, DComplex, identity_map
from .constructions import (
    Subdivision,
    barycentric_subdivision,
    induced_map_from_quotient,
    orbit_quotient,
    subdivide_map,
)
from .covers import DeckGroup
from .errors import BudgetExceeded, ConfigError, NotCompatible
from .gfp import is_prime
from .hat import DEFAULT_CELL_BUDGET, HatResult, hat_complex
from .sequences import SequenceCursor, remove_consumed, star_subsequence


@dataclass
class TowerConfig:
    p: int
    K: SequenceCursor
    L: DComplex
    depth: int = 1
    cell_budget: int = DEFAULT_CELL_BUDGET

    def __post_init__(self):
        if self.depth < 0:
            raise ConfigError("depth must be nonnegative")
        if self.cell_budget <= 0:
            raise ConfigError("cell budget must be positive")
        if not is_prime(self.p):
            raise ConfigError(f"{self.p} is not prime")


@dataclass
class TowerLevel:
    index: int
    complex: DComplex
    hat: HatResult | None = None  # construction producing this level
    cursor: SequenceCursor | None = None  # K_k fed to the construction
    generators: list[CellMap] = field(default_factory=list)
    generator_factor: list[int] = field(default_factory=list)

    @property
    def proj(self) -> CellMap | None:
        """Map onto the subdivided previous level."""
        return self.hat.orbit_proj if self.hat else None

    @property
    def B(self) -> tuple[int, ...]:
        return self.hat.consumed if self.hat else ()

    @property
    def group(self) -> DeckGroup | None:
        return self.hat.group if self.hat else None


@dataclass
class TowerResult:
    config: TowerConfig
    levels: list[TowerLevel]
    truncated: bool = False
    message: str = ""
    partial: HatResult | None = None  # stages built before a budget stop

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def group_factors(self) -> list[DeckGroup]:
        return [lv.group for lv in self.levels[1:]]

    @property
    def batches(self) -> list[tuple[int, ...]]:
        return [lv.B for lv in self.levels[1:]]


def _lift_generator(g: CellMap, hat: HatResult) -> CellMap:
    """Carry an automorphism of the previous level up through subdivision and pullback."""
    gs = g
    for sd in hat.subdivisions:
        gs = subdivide_map(gs, sd, sd)
    if gs.compose(hat.classifying).assignment != hat.classifying.assignment:
        raise NotCompatible("group element does not preserve the classifying map")
    pb = hat.pullback_data
    P = hat.hatL
    rows = tuple(tuple(pb.index[(d, gs(d, a), b)] for a, b in level) for d, level in enumerate(pb.pairs))
    return CellMap(P, P, rows).check()


def tower_build(cfg: TowerConfig, *, run_checks: bool = True, defer_checks: bool = False) -> TowerResult:
    """Iterate the construction: L_k is built over L_{k-1} from K_k = (K - B_1 - ... - B_{k-1})*."""
    levels = [TowerLevel(0, cfg.L)]
    used: set[int] = set()
    truncated, message, partial = False, "", None
    for k in range(1, cfg.depth + 1):
        prev = levels[-1]
        K_k = star_subsequence(remove_consumed(cfg.K, used))
        spent = sum(lv.complex.total_cells() for lv in levels)
        try:
            hat = hat_complex(
                prev.complex,
                cfg.p,
                K_k,
                cell_budget=max(1, cfg.cell_budget - spent),
                run_checks=run_checks,
                defer_checks=defer_checks,
            )
        except BudgetExceeded as exc:
            truncated, message, partial = True, f"level {k}: {exc}", exc.partial
            break
        B = set(hat.consumed)
        if B & used:
            raise NotCompatible(f"level {k} reused indices {sorted(B & used)}")
        used |= B
        gens, factors = [], []
        for g, f in zip(prev.generators, prev.generator_factor):
            gens.append(_lift_generator(g, hat))
            factors.append(f)
        for g in hat.action:
            gens.append(g)
            factors.append(k)
        levels.append(TowerLevel(k, hat.hatL, hat, K_k, gens, factors))
    return TowerResult(cfg, levels, truncated, message, partial)


# --- group action --------------------------------------------------------


def _power(f: CellMap, n: int) -> CellMap:
    out = identity_map(f.source)
    for _ in range(n):
        out = out.compose(f)
    return out


def group_element_action(tower: TowerResult, level: int, g: Sequence[Sequence[int]]) -> CellMap:
    """Action on L_level of an element given factor by factor (missing factors are 0).

    Within a factor, generator i is applied g_i times, generators in order.
    """
    if not 0 <= level <= tower.depth:
        raise ValueError(f"level {level} not built")
    lv = tower.levels[level]
    g = list(g)[:level]
    out = identity_map(lv.complex)
    for j, elem in enumerate(g, start=1):
        factor_gens = [h for h, f in zip(lv.generators, lv.generator_factor) if f == j]
        group = tower.levels[j].group
        if len(elem) != len(factor_gens) or group is None or len(elem) != group.rank:
            raise ValueError(f"element {elem} does not match factor {j}")
        for h, e, mod in zip(factor_gens, elem, group.moduli):
            out = out.compose(_power(h, e % mod))
    _check_equivariant(tower, level, g, out)
    return out


def _check_equivariant(tower: TowerResult, level: int, g, act: CellMap) -> None:
    if level == 0:
        return
    lv = tower.levels[level]
    below = group_element_action(tower, level - 1, g[: level - 1]) if level > 1 else identity_map(tower.levels[0].complex)
    for sd in lv.hat.subdivisions:
        below = subdivide_map(below, sd, sd)
    if act.compose(lv.proj).assignment != lv.proj.compose(below).assignment:
        raise NotCompatible(f"action on level {level} does not cover the action below")


# --- orbit spaces --------------------------------------------------------


@dataclass
class OrbitReport:
    level: int
    passed: bool
    detail: str
    witness: CellMap | None = None  # orbit space → subdivided previous level
    full_witness: CellMap | None = None  # full-group orbit space → iterated subdivision of L_0
    failure_cell: tuple[int, int] | None = None


def _bijective_factor(proj: CellMap, f: CellMap) -> tuple[CellMap | None, tuple[int, int] | None]:
    ind = induced_map_from_quotient(proj, f)
    if ind is None:
        for d, level in enumerate(proj.assignment):
            seen: dict[int, int] = {}
            for c, q in enumerate(level):
                if seen.setdefault(q, f(d, c)) != f(d, c):
                    return None, (d, c)
        return None, None
    if not ind.is_bijective():
        for d, level in enumerate(ind.assignment):
            if len(set(level)) != len(level) or len(level) != ind.target.count(d):
                return None, (d, -1)
    return ind, None


def iterated_projection(tower: TowerResult, level: int) -> CellMap:
    """L_level → iterated subdivision of L_0, composing projections and their subdivisions."""
    F = tower.levels[1].proj if level >= 1 else identity_map(tower.levels[0].complex)
    for k in range(2, level + 1):
        lv = tower.levels[k]
        for _ in lv.hat.subdivisions:
            src = barycentric_subdivision(F.source)
            tgt = barycentric_subdivision(F.target)
            F = subdivide_map(F, src, tgt)
        # F now starts at the base of level k, which is the source of lv.proj's target
        F = CellMap(lv.proj.target, F.target, F.assignment)
        F = lv.proj.compose(F)
    return F


def verify_orbit(tower: TowerResult, level: int, full: bool = True) -> OrbitReport:
    """Orbit space of L_level under its newest factor, and under the whole truncated group."""
    if level < 1:
        return OrbitReport(level, True, "level 0 carries no action")
    lv = tower.levels[level]
    newest = [h for h, f in zip(lv.generators, lv.generator_factor) if f == level]
    Q, proj = orbit_quotient(lv.complex, newest)
    w, bad = _bijective_factor(proj, lv.proj)
    if w is None:
        return OrbitReport(level, False, "orbit space differs from the subdivided previous level", failure_cell=bad)
    detail = f"orbit space {Q.counts()} matches the subdivided level {level - 1}"
    full_w = None
    if full and level > 1:
        Qf, projf = orbit_quotient(lv.complex, lv.generators)
        F = iterated_projection(tower, level)
        full_w, bad = _bijective_factor(projf, F)
        if full_w is None:
            return OrbitReport(level, False, "full orbit space differs from the subdivided base", w, None, bad)
        detail += f"; full orbit space {Qf.counts()} matches the iterated subdivision of level 0"
    return OrbitReport(level, True, detail, w, full_w)


# --- carriers and cochains -----------------------------------------------


def carrier_to_previous(tower: TowerResult, level: int) -> list[list[tuple[int, int]]]:
    """For each cell of L_level, the (dim, cell) of L_{level-1} whose interior contains its image."""
    lv = tower.levels[level]
    proj = lv.proj
    subs = lv.hat.subdivisions
    out = []
    for d, row in enumerate(proj.assignment):
        level_out = []
        for c in row:
            dd, cc = d, c
            for sd in reversed(subs):
                dd, cc = sd.carrier[dd][cc]
            level_out.append((dd, cc))
        out.append(level_out)
    return out


def preimage(tower: TowerResult, n: int, m: int, A: Sequence[set[int]]) -> list[set[int]]:
    """Cells of L_m lying over the subcomplex A of L_n."""
    cur = [set(x) for x in A]
    for k in range(n + 1, m + 1):
        car = carrier_to_previous(tower, k)
        nxt = []
        for d, level in enumerate(car):
            nxt.append({c for c, (e, x) in enumerate(level) if e < len(cur) and x in cur[e]})
        cur = nxt
    return cur


def last_vertex_pullback(sd: Subdivision, x: Sequence[int], p: int) -> list[int]:
    """Pull a 1-cochain back along the last-vertex map of a subdivision.

    An edge S_0 ⊋ S_1 of the subdivision maps to the edge of its carrier
    from the last vertex of S_1 to the last vertex of S_0, traversed
    backwards; it is degenerate when the two coincide.
    """
    C = sd.original
    out = []
    if sd.complex.dim < 1:
        return out
    for (e, c), chain in zip(sd.carrier[1], sd.chains[1]):
        a, b = max(chain[1]), max(chain[0])
        if a == b:
            out.append(0)
            continue
        _, t = C.face_by_positions(e, c, (a, b))
        out.append((-x[t]) % p)
    return out


def pull_cochain(tower: TowerResult, n: int, m: int, x: Sequence[int], p: int) -> list[int]:
    """1-cochain on L_n pulled back to L_m through every projection."""
    cur = [v % p for v in x]
    for k in range(n + 1, m + 1):
        lv = tower.levels[k]
        for sd in lv.hat.subdivisions:
            cur = last_vertex_pullback(sd, cur, p)
        cur = [cur[t] for t in lv.proj.assignment[1]] if lv.complex.dim >= 1 else []
    return cur


__all__ = [
    "TowerConfig",
    "TowerLevel",
    "TowerResult",
    "OrbitReport",
    "tower_build",
    "group_element_action",
    "verify_orbit",
    "iterated_projection",
    "carrier_to_previous",
    "preimage",
    "last_vertex_pullback",
    "pull_cochain",
]
