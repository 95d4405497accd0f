from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import det_fraction, invariant_factors_by_minors

from branched_tower.snf import (
    determinant,
    invariant_factors,
    matmul,
    smith_normal_form,
    snf_violations,
    solve_mod,
    sparse_invariant_factors,
)

small_matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(-12, 12), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


def test_known_invariant_factors():
    assert invariant_factors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert invariant_factors([[0, 0], [0, 0]]) == []
    assert invariant_factors([[6]]) == [6]
    assert invariant_factors([[-3]]) == [3]


def test_circle_boundary_has_no_torsion():
    # ∂_1 of a triangle graph: columns are edges
    M = [[-1, 0, 1], [1, -1, 0], [0, 1, -1]]
    assert invariant_factors(M) == [1, 1]


def test_empty_rows_need_ncols():
    res = smith_normal_form([], ncols=3)
    assert len(res.V) == 3 and res.rank == 0


def test_determinant_matches_fraction_elimination():
    M = [[2, -1, 0, 3], [1, 4, 2, 0], [0, 5, -3, 1], [7, 0, 1, 2]]
    assert determinant(M) == det_fraction(M) == 358


@settings(max_examples=150, deadline=None)
@given(small_matrices)
def test_snf_postconditions(M):
    assert snf_violations(M, smith_normal_form(M)) == []


@settings(max_examples=100, deadline=None)
@given(small_matrices)
def test_invariant_factors_match_minors(M):
    assert invariant_factors(M) == invariant_factors_by_minors(M)


@settings(max_examples=100, deadline=None)
@given(small_matrices, st.sampled_from([2, 4, 8, 9, 27, 6]), st.data())
def test_solve_mod_on_consistent_systems(A, modulus, data):
    x0 = data.draw(st.lists(st.integers(0, modulus - 1), min_size=len(A[0]), max_size=len(A[0])))
    b = [sum(a * x for a, x in zip(row, x0)) % modulus for row in A]
    x = solve_mod(A, b, modulus)
    assert x is not None
    assert [sum(a * y for a, y in zip(row, x)) % modulus for row in A] == b


def test_solve_mod_detects_inconsistency():
    assert solve_mod([[2]], [1], 4) is None
    assert solve_mod([[2, 0], [0, 0]], [0, 1], 8) is None
    assert solve_mod([[3]], [1], 9) is None
    assert solve_mod([[3]], [6], 9) in ([2], [5], [8])


def test_product_identity():
    M = [[4, 6], [8, 10], [2, 2]]
    U, D, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == D


@settings(max_examples=150, deadline=None)
@given(small_matrices)
def test_sparse_elimination_agrees_with_dense(M):
    cols = [{i: M[i][j] for i in range(len(M))} for j in range(len(M[0]))]
    assert sparse_invariant_factors(cols) == invariant_factors(M)
