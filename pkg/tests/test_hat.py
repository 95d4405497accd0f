from __future__ import annotations

import pytest
from conftest import cursor

from branched_tower.complex import CellMap, cycle_graph, standard_simplex, two_triangles
from branched_tower.constructions import barycentric_subdivision, cone, orbit_quotient
from branched_tower.errors import BudgetExceeded, ConfigError, InconsistentGluing, MatchingViolation
from branched_tower.hat import glue_cones, hat_complex, hat_simplex, quotient_to_hat, simplex_model
from branched_tower.hat_checks import CHECK_NAMES, stage_passed
from branched_tower.homology import homology
from branched_tower.manifold import is_isomorphic


def names(C):
    return [str(h) for h in homology(C)]


def test_simplex_model_layout():
    model = simplex_model(2)
    assert model.L.counts() == (7, 12, 6)
    assert [len(s) for s in model.skeleton_cells(1)] == [6, 6, 0]


def test_glue_two_disks_into_sphere():
    D, _, _ = cone(cycle_graph(3))
    ident = [(1, (0, e), (1, e)) for e in range(3)]
    res = glue_cones([D, D], ident, groups=[(0, 1)], boundary=[[0, 1, 2], [0, 1, 2]])
    assert res.complex.counts() == (5, 9, 6)
    assert res.reports[0].ok and res.reports[0].euler_characteristic == 2


def test_glue_three_disks_breaks_matching():
    D, _, _ = cone(cycle_graph(3))
    ident = [(1, (0, e), (j, e)) for j in (1, 2) for e in range(3)]
    with pytest.raises(MatchingViolation):
        glue_cones([D, D, D], ident, groups=[(0, 1, 2)], boundary=[[0, 1, 2]] * 3)


def test_quotient_to_hat_folds_bottom():
    # fold the whole 6-cycle onto the 3-cycle
    big = cycle_graph(6)
    small = cycle_graph(3)
    bottom = CellMap(big, big, (tuple(range(6)), tuple(range(6))))
    fold = CellMap(big, small, (tuple(i % 3 for i in range(6)),) * 2)
    H, q, inc = quotient_to_hat(big, bottom, fold)
    assert H.counts() == (3, 3) and inc.is_bijective()
    with pytest.raises(InconsistentGluing):
        quotient_to_hat(big, bottom, CellMap(small, small, ((0, 1, 2),) * 2))


def test_golden_triangle_p2():
    res = hat_simplex(2, 2, cursor("const:1"))
    H = res.hatL
    assert H.counts() == (7, 18, 12)
    assert H.euler_characteristic() == 1
    assert names(H) == ["Z", "Z/2", "0"]
    assert str(res.group) == "Z/2" and res.consumed == (1,)
    assert [st.N for st in res.stages] == [(1,), (1, 1), (1, 1, 2)]
    Q, _ = orbit_quotient(H, res.action)
    assert Q.counts() == (7, 12, 6)
    assert is_isomorphic(Q, barycentric_subdivision(standard_simplex(2)).complex).verdict == "isomorphic"
    for st in res.stages:
        assert stage_passed(st.checks) and set(st.checks) == set(CHECK_NAMES)


def test_golden_triangle_p3():
    res = hat_simplex(2, 3, cursor("const:1"))
    assert res.hatL.counts() == (7, 24, 18)
    assert names(res.hatL)[1] == "Z/3"


@pytest.mark.parametrize("m,counts", [(0, (1,)), (1, (3, 2))])
def test_low_dimensions_are_uncovered(m, counts):
    res = hat_simplex(m, 2, cursor("const:1"))
    assert res.hatL.counts() == counts and res.group.order == 1 and res.consumed == ()


def test_golden_tetrahedron_p2():
    res = hat_simplex(3, 2, cursor("const:1"))
    assert res.hatL.counts() == (15, 156, 336, 192)
    assert res.hatL.euler_characteristic() == 3
    assert str(res.group) == "Z/2 x Z/2 x Z/2" and res.consumed == (1, 2, 3) and res.abelian
    st2 = res.stages[2]
    assert [r.euler_characteristic for r in st2.glue_reports] == [0]
    assert all(stage_passed(st.checks) for st in res.stages)


def test_arithmetic_rule_grows_exponents():
    res = hat_simplex(3, 2, cursor("arith:1,1"))
    assert str(res.group) == "Z/2 x Z/4 x Z/8"
    assert res.stages[-1].N == (1, 1, 2, 64)
    assert all(stage_passed(st.checks) for st in res.stages)


def test_non_prime_rejected():
    with pytest.raises(ConfigError):
        hat_simplex(2, 4, cursor("const:1"))


def test_budget_overflow_carries_partial_result():
    with pytest.raises(BudgetExceeded) as info:
        hat_simplex(3, 3, cursor("arith:1,1"), cell_budget=100_000)
    partial = info.value.partial
    assert partial is not None and not partial.complete
    assert len(partial.stages) == 3


def test_hat_complex_of_two_triangles():
    res = hat_complex(two_triangles(), 2, cursor("const:1"))
    assert res.base.counts() == (45, 116, 72)
    assert res.hatL.counts() == (45, 188, 144)
    sizes = res.orbit_proj.fiber_sizes()
    assert set(sizes[2]) == {2}
    Q, proj = orbit_quotient(res.hatL, res.action)
    assert is_isomorphic(Q, res.base).verdict == "isomorphic"


def test_hat_complex_agrees_with_simplex_construction():
    direct = hat_simplex(2, 2, cursor("const:1"))
    pulled = hat_complex(standard_simplex(2), 2, cursor("const:1"))
    assert is_isomorphic(pulled.hatL, direct.hatL).verdict == "isomorphic"


def test_checks_catch_a_broken_action():
    from dataclasses import replace

    from branched_tower.complex import identity_map
    from branched_tower.hat_checks import verify_stage

    st = hat_simplex(2, 2, cursor("const:1")).stages[2]
    broken = replace(st, generators=[identity_map(st.tilde)])
    checks = verify_stage(broken, 2)
    assert not checks["orbit_space"].passed
    assert not checks["free_action"].passed
    assert checks["fiber_counts"].passed
