from __future__ import annotations

import pytest
from conftest import cursor, rotation, rp2, wrap
from hypothesis import given, settings
from hypothesis import strategies as st

from branched_tower.complex import cycle_graph, standard_simplex, torus
from branched_tower.constructions import orbit_quotient
from branched_tower.covers import (
    DeckGroup,
    EdgeCocycle,
    build_cover,
    characteristic_cover,
    deck_action_is_free,
    edge_labeling,
    lemma1_cover,
    lift_automorphism,
    map_order_divides,
    orbit_sizes,
    verify_covering,
)
from branched_tower.errors import CocycleViolation, IncompatibleTorsionImage, NotAManifold
from branched_tower.homology import cohomology_mod_p, homology, induced_h1_modp, pullback_kills_h1
from branched_tower.manifold import check_closed_oriented_manifold, is_isomorphic


def test_deck_group_basics():
    G = DeckGroup(2, (1, 2))
    assert G.moduli == (2, 4) and G.order == 8 and G.rank == 2
    assert str(G) == "Z/2 x Z/4"
    assert G.add((1, 3), (1, 2)) == (0, 1)
    assert G.element_order((0, 2)) == 2
    assert not G.is_elementary_abelian()
    assert DeckGroup(3, (1, 1)).is_elementary_abelian()
    assert [G.index(g) for g in G.elements()] == list(range(8))
    assert str(DeckGroup(5, ())) == "0"


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(1, 3), max_size=3), st.data())
def test_deck_index_round_trip(p, exps, data):
    G = DeckGroup(p, tuple(exps))
    i = data.draw(st.integers(0, G.order - 1))
    assert G.index(G.element(i)) == i


def test_circle_analytic_cases():
    # degree d on H^1(S^1; Z/2) is multiplication by d
    assert induced_h1_modp(wrap(3, 2), 2) == [[0]]
    assert induced_h1_modp(wrap(3, 3), 2) == [[1]]
    assert pullback_kills_h1(wrap(4, 2), 2)
    assert not pullback_kills_h1(wrap(4, 3), 2)
    assert pullback_kills_h1(wrap(4, 3), 3)


def test_torus_characteristic_cover():
    T = torus()
    cov = characteristic_cover(T, DeckGroup(2, (1, 1)))
    assert cov.total.counts() == (4, 12, 8)
    rep = check_closed_oriented_manifold(cov.total, 2)
    assert rep.ok and rep.euler_characteristic == 0
    assert verify_covering(cov.projection, 4).ok
    assert deck_action_is_free(cov)
    assert pullback_kills_h1(cov.projection, 2)
    Q, _ = orbit_quotient(cov.total, cov.generators())
    assert is_isomorphic(Q, T).verdict == "isomorphic"


def test_torus_cover_with_mixed_exponents():
    cov = characteristic_cover(torus(), DeckGroup(3, (2, 1)))
    assert cov.degree == 27
    assert verify_covering(cov.projection, 27).ok
    assert cohomology_mod_p(cov.total, 1, 3).dimension == 2
    assert pullback_kills_h1(cov.projection, 3)


def test_identity_cover_for_trivial_group():
    cov = characteristic_cover(standard_simplex(2), DeckGroup(2, ()))
    assert cov.total == standard_simplex(2)


def test_cover_consumes_rank_many_entries():
    res = lemma1_cover(torus(), cursor("const:1"), 2)
    assert res.consumed == (1, 2) and res.exponents == (1, 1) and res.degree == 4
    res = lemma1_cover(torus(), cursor("arith:1,1"), 2)
    assert res.exponents == (1, 2) and res.degree == 8
    assert res.cursor.values(1) == [3]
    pts = lemma1_cover(standard_simplex(0), cursor("const:1"), 3)
    assert pts.consumed == () and pts.degree == 1
    with pytest.raises(NotAManifold):
        lemma1_cover(rp2(), cursor("const:1"), 2)


def test_labeling_errors():
    with pytest.raises(IncompatibleTorsionImage):
        edge_labeling(rp2(), DeckGroup(3, (1,)), [], [(1,)])
    with pytest.raises(CocycleViolation):
        build_cover(EdgeCocycle(standard_simplex(2), DeckGroup(2, (1,)), [(1,), (0,), (0,)]))


def test_rp2_double_cover_is_sphere():
    lab = edge_labeling(rp2(), DeckGroup(2, (1,)), [], [(1,)])
    cov = build_cover(lab)
    assert [str(h) for h in homology(cov.total)] == ["Z", "0", "Z"]


def test_lifting_a_rotation():
    base = cycle_graph(3)
    cov = characteristic_cover(base, DeckGroup(3, (1,)))
    gamma = rotation(3, 1)
    lift = lift_automorphism(cov, gamma, prefer_order=3)
    assert lift is not None and lift.is_bijective()
    assert lift.compose(cov.projection).assignment == cov.projection.compose(gamma).assignment
    # every lift of a 3-cycle rotation to the 9-cycle is a rotation of order 9
    assert map_order_divides(lift, 9) and not map_order_divides(lift, 3)


def test_orbit_sizes_of_free_action():
    cov = characteristic_cover(cycle_graph(4), DeckGroup(2, (2,)))
    sizes = orbit_sizes(cov.total.counts(), cov.generators())
    assert all(s == 4 for level in sizes for s in level)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.sampled_from([2, 3]), st.integers(1, 3))
def test_cycle_covers_are_connected_cycles(n, p, e):
    cov = characteristic_cover(cycle_graph(n), DeckGroup(p, (e,)))
    d = p**e
    assert cov.total.counts() == (n * d, n * d)
    assert verify_covering(cov.projection, d).ok
    assert str(homology(cov.total)[0]) == "Z"
