from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from branched_tower.errors import ConfigError, IndexOutsideView
from branched_tower.sequences import SequenceCursor, parse_rule, remove_consumed, star_subsequence


def test_parse_rules():
    assert parse_rule("const:1").value(7) == 1
    r = parse_rule("arith:1,1")
    assert [r.value(i) for i in range(1, 5)] == [1, 2, 3, 4]
    r = parse_rule("list:3,1,4+const:2")
    assert [r.value(i) for i in range(1, 6)] == [3, 1, 4, 2, 2]
    assert str(r) == "list:3,1,4+const:2"
    for bad in ("const:0", "arith:1", "list:1,2", "geom:2", "const:x", "arith:1,-1"):
        with pytest.raises(ConfigError):
            parse_rule(bad)


def test_star_keeps_odd_positions():
    K = star_subsequence(SequenceCursor.from_text("arith:1,1"))
    assert K.values(5) == [1, 3, 5, 7, 9]
    KK = star_subsequence(K)
    assert KK.prefix(3) == [1, 5, 9]


def test_remove_then_star_differs_from_star_then_remove():
    K = SequenceCursor.from_text("arith:1,1")
    a = star_subsequence(remove_consumed(K, {1}))
    b = remove_consumed(star_subsequence(K), {1})
    assert a.prefix(3) == [2, 4, 6]
    assert b.prefix(3) == [3, 5, 7]


def test_take_consumes_and_records():
    K = SequenceCursor.from_text("arith:2,3")
    idx, vals, rest = K.take(2)
    assert idx == [1, 2] and vals == [2, 5]
    assert rest.consumed == frozenset({1, 2})
    assert rest.prefix(2) == [3, 4]
    assert K.take(0)[0] == []


def test_remove_outside_view_is_rejected():
    K = star_subsequence(SequenceCursor.from_text("const:1"))
    with pytest.raises(IndexOutsideView):
        remove_consumed(K, {2})
    assert not K.contains(2) and K.contains(3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=5))
def test_successive_batches_are_disjoint(sizes):
    K = SequenceCursor.from_text("arith:1,1")
    seen: set[int] = set()
    for l in sizes:
        idx, vals, K = K.take(l)
        assert not seen & set(idx)
        assert vals == idx  # arith:1,1 has k_i = i
        seen |= set(idx)
        K = star_subsequence(K)
