from __future__ import annotations

import pytest
from conftest import rp2, simplicial, simplicial_complexes
from hypothesis import given, settings
from oracles import rank_mod_p_dense

from branched_tower.complex import cycle_graph, simplex_boundary, standard_simplex, torus, two_triangles
from branched_tower.errors import NotACocycle
from branched_tower.homology import (
    boundary_matrix,
    boundary_squared_is_zero,
    coboundary,
    cohomology_mod_p,
    extend_cocycle,
    h1_basis,
    homology,
    is_coboundary_1,
    is_cocycle,
    solve_potential,
)
from branched_tower.snf import matmul


def names(C):
    return [str(h) for h in homology(C)]


@pytest.mark.parametrize(
    "C,expected",
    [
        (standard_simplex(3), ["Z", "0", "0", "0"]),
        (simplex_boundary(3), ["Z", "0", "Z"]),
        (simplex_boundary(4), ["Z", "0", "0", "Z"]),
        (torus(), ["Z", "Z^2", "Z"]),
        (rp2(), ["Z", "Z/2", "0"]),
        (cycle_graph(7), ["Z", "Z"]),
        (two_triangles(), ["Z", "0", "0"]),
    ],
)
def test_homology_goldens(C, expected):
    assert names(C) == expected


def test_klein_bottle():
    from branched_tower.complex import build_complex

    K = build_complex([1, [(0, 0)] * 3, [(0, 2, 1), (1, 0, 2)]])
    assert names(K) == ["Z", "Z + Z/2", "0"]
    assert cohomology_mod_p(K, 1, 2).dimension == 2


def test_boundary_matrices_compose_to_zero():
    C = simplex_boundary(4)
    for k in range(2, C.dim + 1):
        prod = matmul(boundary_matrix(C, k - 1), boundary_matrix(C, k))
        assert not any(x for row in prod for x in row)
    assert boundary_squared_is_zero(torus())


def test_h1_basis_expresses_cycles():
    B = h1_basis(torus())
    assert B.rank == 2 and not B.torsion_generators
    # edge loop a alone is a cycle in the one-vertex torus
    free, tors = B.express([1, 0, 0])
    assert free != [0, 0]
    R = h1_basis(rp2())
    assert R.rank == 0 and [o for _, o in R.torsion_generators] == [2]


def test_mod_p_cohomology_dimensions():
    assert cohomology_mod_p(rp2(), 1, 2).dimension == 1
    assert cohomology_mod_p(rp2(), 1, 3).dimension == 0
    assert cohomology_mod_p(torus(), 1, 5).dimension == 2
    assert cohomology_mod_p(rp2(), 2, 2).dimension == 1


def test_coboundaries_and_potentials():
    C = cycle_graph(4)
    assert is_coboundary_1(C, [1, 1, 1, 3], 2)
    assert not is_coboundary_1(C, [1, 0, 0, 0], 2)
    h = solve_potential(C, [(1,), (1,), (1,), (1,)], (4,))
    assert h is not None
    assert solve_potential(C, [(1,), (0,), (0,), (0,)], (4,)) is None
    D = standard_simplex(2)
    x = coboundary(D, 0, [0, 1, 0], 3)
    assert is_cocycle(D, 1, x, 3)


def test_extend_cocycle_over_disk():
    D = standard_simplex(2)
    # boundary circle with a nonzero class does not extend
    assert extend_cocycle(D, {0, 1, 2}, set(), {0: 1, 1: 0, 2: 0}, 2) is None
    ext = extend_cocycle(D, {0}, set(), {0: 1}, 2)
    assert ext is not None and is_cocycle(D, 1, ext, 2) and ext[0] == 1
    with pytest.raises(NotACocycle):
        extend_cocycle(D, {0, 1, 2}, {0}, {0: 1, 1: 0, 2: 0}, 2)


@settings(max_examples=40, deadline=None)
@given(simplicial_complexes(max_vertices=6, max_dim=2))
def test_mod2_dimension_from_ranks(C):
    if C.dim < 1:
        return
    rank1 = rank_mod_p_dense(boundary_matrix(C, 1), 2)
    rank2 = rank_mod_p_dense(boundary_matrix(C, 2), 2) if C.dim >= 2 else 0
    assert cohomology_mod_p(C, 1, 2).dimension == C.count(1) - rank1 - rank2


def test_simplicial_octahedron():
    octa = simplicial([(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)])
    assert names(octa) == ["Z", "0", "Z"]
