"""Finite-stage evidence for the mod-p dimension mechanism.

Two kinds of certificate: the pullback to every constructed cover kills
H^1(·; Z/p), and a cocycle on a subcomplex of one tower level extends over
the whole of some later level after pulling back.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .complex import face_closure, subcomplex
from .errors import NotACocycle
from .homology import coboundary, cohomology_mod_p, extend_cocycle, induced_h1_modp
from .tower import TowerResult, preimage, pull_cochain

FOUND = "Found"
NOT_FOUND = "NotFoundWithinDepth"


@dataclass
class Lemma2Report:
    stage: int
    face: tuple[int, ...]
    matrix: list[list[int]]

    @property
    def zero(self) -> bool:
        return not any(x for row in self.matrix for x in row)


def lemma2_sweep(hat, p: int) -> list[Lemma2Report]:
    """Matrix of the pullback on H^1(·; Z/p) for every face cover of every stage."""
    out = []
    for st in hat.stages[1:]:
        for fc in st.face_covers:
            out.append(Lemma2Report(st.k, fc.face, induced_h1_modp(fc.cover.projection, p)))
    return out


@dataclass
class ExtensionCertificate:
    level_from: int
    level_found: int | None
    subcomplex: list[list[int]]  # cells of A in L_n, per dimension
    class_in: dict[int, int]  # edge of A → value
    pullback: dict[int, int]  # edge of the preimage in L_m → value
    extension: list[int] | None
    status: str
    p: int
    tried: list[int] = field(default_factory=list)

    @property
    def gap(self) -> int | None:
        return None if self.level_found is None else self.level_found - self.level_from


def _check_on(A: Sequence[set[int]], z: Mapping[int, int], faces2, p: int) -> None:
    if len(A) > 2:
        for t in A[2]:
            e0, e1, e2 = faces2[t]
            if (z[e0] - z[e1] + z[e2]) % p:
                raise NotACocycle(f"class fails the cocycle condition on triangle {t}")


def certify_extension(
    tower: TowerResult,
    n: int,
    A: Sequence[set[int]],
    z: Mapping[int, int],
    search_depth: int,
    p: int | None = None,
) -> ExtensionCertificate:
    """Look for the first level m in [n, n + search_depth] where z extends after pullback."""
    p = p or tower.config.p
    if n + search_depth > tower.depth:
        raise ValueError(f"levels up to {n + search_depth} requested, {tower.depth} built")
    Ln = tower.levels[n].complex
    A = [set(a) for a in A]
    while len(A) < 2:
        A.append(set())
    if set(z) != A[1]:
        raise ValueError("class must be given on exactly the edges of A")
    z = {e: v % p for e, v in z.items()}
    if Ln.dim >= 2:
        _check_on(A, z, Ln.faces[2], p)
    full = [0] * (Ln.count(1) if Ln.dim >= 1 else 0)
    for e, v in z.items():
        full[e] = v
    tried = []
    last_pull: dict[int, int] = {}
    for m in range(n, n + search_depth + 1):
        tried.append(m)
        Lm = tower.levels[m].complex
        pre = preimage(tower, n, m, A)
        x = pull_cochain(tower, n, m, full, p)
        edges = pre[1] if len(pre) > 1 else set()
        tris = pre[2] if len(pre) > 2 else set()
        zz = {e: x[e] for e in edges}
        last_pull = zz
        ext = extend_cocycle(Lm, edges, tris, zz, p)
        if ext is not None:
            return ExtensionCertificate(n, m, [sorted(a) for a in A], z, zz, ext, FOUND, p, tried)
    return ExtensionCertificate(n, None, [sorted(a) for a in A], z, last_pull, None, NOT_FOUND, p, tried)


def reverify(tower: TowerResult, cert: ExtensionCertificate) -> bool:
    """Recompute the pullback from scratch and test the extension against it."""
    if cert.status != FOUND or cert.extension is None:
        return False
    p = cert.p
    n, m = cert.level_from, cert.level_found
    Lm = tower.levels[m].complex
    if any(coboundary(Lm, 1, cert.extension, p)):
        return False
    Ln = tower.levels[n].complex
    full = [0] * (Ln.count(1) if Ln.dim >= 1 else 0)
    for e, v in cert.class_in.items():
        full[e] = v
    x = pull_cochain(tower, n, m, full, p)
    A = [set(a) for a in cert.subcomplex]
    pre = preimage(tower, n, m, A)
    edges = pre[1] if len(pre) > 1 else set()
    return all(cert.extension[e] % p == x[e] % p for e in edges)


# --- campaign ------------------------------------------------------------


@dataclass
class CampaignSummary:
    seed: int
    samples: int
    p: int
    certificates: list[ExtensionCertificate]
    reverified: list[bool]

    @property
    def found(self) -> int:
        return sum(1 for c in self.certificates if c.status == FOUND)

    @property
    def success_rate(self) -> float:
        return self.found / len(self.certificates) if self.certificates else 1.0

    @property
    def max_gap(self) -> int:
        return max((c.gap for c in self.certificates if c.gap is not None), default=0)

    @property
    def failures(self) -> list[ExtensionCertificate]:
        return [c for c in self.certificates if c.status != FOUND]

    def lines(self) -> list[str]:
        out = [
            f"seed {self.seed}",
            f"samples {self.samples}",
            f"p {self.p}",
            f"found {self.found}",
            f"success_rate {self.success_rate:.4f}",
            f"max_gap {self.max_gap}",
            f"reverified {sum(self.reverified)}",
        ]
        for i, c in enumerate(self.certificates):
            out.append(
                f"sample {i}: from {c.level_from} status {c.status} at {c.level_found} "
                f"cells {[len(a) for a in c.subcomplex]} nonzero_edges {sum(1 for v in c.class_in.values() if v)}"
            )
        return out


def random_subcomplex(C, rng: random.Random, density: float | None = None) -> list[set[int]]:
    """Face closure of a random set of top cells."""
    top = C.dim
    if density is None:
        density = rng.random()
    seeds = [set() for _ in range(top + 1)]
    seeds[top] = {c for c in range(C.count(top)) if rng.random() < density}
    if not seeds[top]:
        seeds[top] = {rng.randrange(C.count(top))}
    return face_closure(C, seeds)


def random_class(C, A: Sequence[set[int]], p: int, rng: random.Random) -> dict[int, int]:
    """Random element of the cocycle space of A, as values on the edges of A."""
    sub, inc = subcomplex(C, A)
    edges = list(inc.assignment[1]) if sub.dim >= 1 else []
    if not edges:
        return {}
    H = cohomology_mod_p(sub, 1, p)
    vec = [0] * len(edges)
    for b in H.cocycle_basis:
        c = rng.randrange(p)
        for i, v in enumerate(b):
            vec[i] = (vec[i] + c * v) % p
    return {e: vec[i] for i, e in enumerate(edges)}


def certificate_campaign(
    tower: TowerResult,
    samples: int,
    seed: int,
    *,
    n: int | None = None,
    search_depth: int | None = None,
) -> CampaignSummary:
    """Seeded random certificates.

    When n is None each sample draws its source level uniformly from the
    levels that leave room for the search.
    """
    p = tower.config.p
    rng = random.Random(seed)
    certs, checks = [], []
    for _ in range(samples):
        top = tower.depth
        if n is not None:
            level = n
        elif search_depth is not None:
            level = rng.randrange(max(top - search_depth + 1, 1))
        else:
            level = rng.randrange(max(top, 1))
        depth = search_depth if search_depth is not None else top - level
        C = tower.levels[level].complex
        A = random_subcomplex(C, rng)
        z = random_class(C, A, p, rng)
        cert = certify_extension(tower, level, A, z, depth, p)
        certs.append(cert)
        checks.append(reverify(tower, cert) if cert.status == FOUND else False)
    return CampaignSummary(seed, samples, p, certs, checks)


__all__ = [
    "FOUND",
    "NOT_FOUND",
    "Lemma2Report",
    "lemma2_sweep",
    "ExtensionCertificate",
    "certify_extension",
    "reverify",
    "CampaignSummary",
    "random_subcomplex",
    "random_class",
    "certificate_campaign",
]
