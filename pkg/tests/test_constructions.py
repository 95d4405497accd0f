from __future__ import annotations

import pytest
from conftest import rotation, simplicial_complexes, wrap
from hypothesis import given, settings

from branched_tower.complex import cycle_graph, disjoint_union, identity_map, standard_simplex, torus
from branched_tower.constructions import (
    barycentric_subdivision,
    cone,
    cone_cell,
    dimension_coloring,
    induced_map_from_quotient,
    orbit_quotient,
    pullback,
    quotient_by_pairing,
    subdivide_map,
)
from branched_tower.errors import InconsistentGluing, NotAnAction
from branched_tower.homology import homology
from branched_tower.manifold import is_isomorphic


@pytest.mark.parametrize(
    "m,counts", [(0, (1,)), (1, (3, 2)), (2, (7, 12, 6)), (3, (15, 50, 60, 24))]
)
def test_subdivided_simplex_counts(m, counts):
    assert barycentric_subdivision(standard_simplex(m)).complex.counts() == counts


def test_subdivided_torus():
    sd = barycentric_subdivision(torus())
    assert sd.complex.counts() == (6, 18, 12)
    assert sd.barycenter(2, 1) in range(6)


def test_largest_cell_comes_first():
    sd = barycentric_subdivision(standard_simplex(2))
    for chain in sd.chains[2]:
        assert len(chain[0]) == 3 and len(chain[-1]) == 1


def test_subdivide_map_is_functorial():
    f = rotation(4, 1)
    sd = barycentric_subdivision(f.source)
    g = subdivide_map(f, sd, sd)
    assert g.is_valid()
    assert subdivide_map(f.compose(f), sd, sd).assignment == g.compose(g).assignment


def test_dimension_coloring_sends_barycenters_by_dimension():
    sd = barycentric_subdivision(standard_simplex(2))
    col = dimension_coloring(sd)
    assert col.is_valid()
    for e in range(3):
        for c in range(standard_simplex(2).count(e)):
            assert col(0, sd.barycenter(e, c)) == 2 - e


def test_cone_layout():
    C = cycle_graph(4)
    cC, inc, apex = cone(C)
    assert cC.counts() == (5, 8, 4)
    assert apex == 4
    assert cone_cell(C, 0, 2) == 6
    assert [str(h) for h in homology(cC)] == ["Z", "0", "0"]
    assert inc.is_valid()


def test_pullback_of_double_cover_with_itself():
    f = wrap(3, 2)
    pb = pullback(f, f)
    assert pb.complex.counts() == (12, 12)
    assert str(homology(pb.complex)[0]) == "Z^2"
    assert pb.proj_a.is_valid() and pb.proj_b.is_valid()


def test_pullback_along_identity_is_isomorphic():
    f = wrap(4, 3)
    pb = pullback(identity_map(f.target), f)
    assert is_isomorphic(pb.complex, f.source).verdict == "isomorphic"


def test_quotient_by_pairing():
    Q, proj = quotient_by_pairing(cycle_graph(4), [(0, 0, 2)])
    assert Q.counts() == (3, 4)
    assert str(homology(Q)[1]) == "Z^2"
    U, _ = disjoint_union([standard_simplex(1), standard_simplex(1)])
    Q2, _ = quotient_by_pairing(U, [(1, 0, 1)])
    assert Q2.counts() == (2, 1)
    with pytest.raises(InconsistentGluing):
        quotient_by_pairing(U, [(1, 0, 7)])


def test_orbit_quotient_of_rotation():
    g = rotation(6, 3)
    Q, proj = orbit_quotient(g.source, [g])
    assert Q.counts() == (3, 3)
    w = induced_map_from_quotient(proj, wrap(3, 2))
    assert w is not None and w.is_bijective()
    with pytest.raises(NotAnAction):
        orbit_quotient(g.source, [g], closed=True)
    ident = identity_map(g.source)
    Q2, _ = orbit_quotient(g.source, [ident, g], closed=True)
    assert Q2.counts() == (3, 3)


@settings(max_examples=40, deadline=None)
@given(simplicial_complexes(max_vertices=5, max_dim=2))
def test_subdivision_preserves_homology(C):
    sd = barycentric_subdivision(C).complex
    assert [str(h) for h in homology(sd)] == [str(h) for h in homology(C)]
