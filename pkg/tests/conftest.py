from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import pytest
from hypothesis import strategies as st

import branched_tower.complex as complex_module
from branched_tower.complex import CellMap, DComplex, build_complex, cycle_graph
from branched_tower.errors import FaceIdentityViolation
from branched_tower.homology import boundary_squared_is_zero
from branched_tower.sequences import SequenceCursor

# Every DComplex built during the session has ∂∘∂ checked on construction.
# Complexes that validation rejects are dropped from the failure list.
BOUNDARY_LOG = {"checked": 0, "failures": {}}

# One line per acceptance criterion, repeated in the terminal summary.
ACCEPTANCE: dict[int, str] = {}

_plain_init = DComplex.__init__
_plain_check = complex_module.check_face_identities


def _recording_init(self, *args, **kwargs):
    _plain_init(self, *args, **kwargs)
    BOUNDARY_LOG["checked"] += 1
    if not boundary_squared_is_zero(self):
        BOUNDARY_LOG["failures"][id(self)] = self.counts()


def _forgetting_check(C):
    try:
        _plain_check(C)
    except FaceIdentityViolation:
        BOUNDARY_LOG["failures"].pop(id(C), None)
        raise


DComplex.__init__ = _recording_init
complex_module.check_face_identities = _forgetting_check


def pytest_collection_modifyitems(items):
    # acceptance last, so the boundary log covers the whole run
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


def pytest_sessionfinish(session, exitstatus):
    if BOUNDARY_LOG["failures"] and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    terminalreporter.write_line(
        f"boundary check: {BOUNDARY_LOG['checked']} complexes constructed, "
        f"{len(BOUNDARY_LOG['failures'])} with nonzero boundary squared"
    )
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])


def simplicial(facets) -> DComplex:
    """Δ-complex of the simplicial complex generated by the given vertex tuples."""
    simplices = set()
    for f in facets:
        f = tuple(sorted(f))
        for k in range(1, len(f) + 1):
            simplices.update(combinations(f, k))
    if not simplices:
        return DComplex(())
    dim = max(len(s) for s in simplices) - 1
    levels = [sorted(s for s in simplices if len(s) == d + 1) for d in range(dim + 1)]
    index = [{s: i for i, s in enumerate(level)} for level in levels]
    table = [len(levels[0])]
    for d in range(1, dim + 1):
        table.append([tuple(index[d - 1][s[:i] + s[i + 1:]] for i in range(d + 1)) for s in levels[d]])
    return build_complex(table)


@st.composite
def simplicial_complexes(draw, max_vertices: int = 6, max_dim: int = 3):
    n = draw(st.integers(1, max_vertices))
    facets = draw(
        st.lists(
            st.lists(st.integers(0, n - 1), min_size=1, max_size=max_dim + 1, unique=True),
            min_size=1,
            max_size=6,
        )
    )
    return simplicial(facets)


def rp2() -> DComplex:
    """Projective plane: 2 vertices, 3 edges, 2 triangles."""
    return build_complex([2, [(1, 0), (1, 0), (0, 0)], [(0, 1, 2), (1, 0, 2)]])


def rotation(n: int, k: int) -> CellMap:
    C = cycle_graph(n)
    row = tuple((i + k) % n for i in range(n))
    return CellMap(C, C, (row, row))


def wrap(n: int, d: int) -> CellMap:
    """Degree-d map from the n·d-cycle onto the n-cycle."""
    big, small = cycle_graph(n * d), cycle_graph(n)
    row = tuple(i % n for i in range(n * d))
    return CellMap(big, small, (row, row))


def cursor(text: str) -> SequenceCursor:
    return SequenceCursor.from_text(text)


@lru_cache(maxsize=None)
def cached_tower(m: int, p: int, rule: str, depth: int):
    from branched_tower.complex import standard_simplex
    from branched_tower.tower import TowerConfig, tower_build

    return tower_build(TowerConfig(p, cursor(rule), standard_simplex(m), depth))


@pytest.fixture(scope="session")
def tower_d2_depth2():
    return cached_tower(2, 2, "const:1", 2)
