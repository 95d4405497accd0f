"""Rule-defined infinite sequences of positive integers with index bookkeeping.

A cursor is a view onto the root sequence k_1, k_2, ... built from two
operations: keep odd positions (``star``) and drop a set of root indices
(``remove_consumed``).  Every value a cursor hands out carries its root
index, so disjointness of consumed batches can be checked exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import ConfigError, CursorExhausted, IndexOutsideView


@dataclass(frozen=True)
class Rule:
    kind: str  # "const" | "arith" | "list"
    a: int = 1
    d: int = 0
    prefix: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("const", "arith", "list"):
            raise ConfigError(f"unknown rule kind {self.kind!r}")
        if self.a < 1 or any(x < 1 for x in self.prefix):
            raise ConfigError("sequence entries must be positive")
        if self.kind == "arith" and self.d < 0:
            raise ConfigError("arithmetic rule needs a nonnegative step")

    def value(self, i: int) -> int:
        """k_i for a 1-based root index."""
        if i < 1:
            raise IndexError(i)
        if self.kind == "const":
            return self.a
        if self.kind == "arith":
            return self.a + (i - 1) * self.d
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        return self.a

    def __str__(self) -> str:
        if self.kind == "const":
            return f"const:{self.a}"
        if self.kind == "arith":
            return f"arith:{self.a},{self.d}"
        return "list:" + ",".join(map(str, self.prefix)) + f"+const:{self.a}"


def parse_rule(text: str) -> Rule:
    """Parse ``const:c``, ``arith:a,d`` or ``list:x,y,...+const:c``."""
    text = text.strip()
    try:
        kind, _, body = text.partition(":")
        if kind == "const":
            return Rule("const", a=int(body))
        if kind == "arith":
            a, d = body.split(",")
            return Rule("arith", a=int(a), d=int(d))
        if kind == "list":
            head, _, tail = body.partition("+")
            prefix = tuple(int(x) for x in head.split(",") if x.strip())
            tkind, _, tval = tail.partition(":")
            if tkind != "const":
                raise ValueError("list rule needs a +const:c tail")
            return Rule("list", a=int(tval), prefix=prefix)
    except ValueError as exc:
        raise ConfigError(f"cannot parse sequence rule {text!r}: {exc}") from None
    raise ConfigError(f"cannot parse sequence rule {text!r}")


@dataclass(frozen=True)
class SequenceCursor:
    rule: Rule
    ops: tuple[tuple, ...] = ()  # ("star",) or ("remove", frozenset)
    consumed: frozenset[int] = field(default_factory=frozenset)

    @classmethod
    def from_text(cls, text: str) -> "SequenceCursor":
        return cls(parse_rule(text))

    def indices(self) -> Iterator[int]:
        """Root indices in view order (infinite)."""
        return _walk(self.ops)

    def prefix(self, n: int) -> list[int]:
        """First n root indices of the view."""
        out = []
        if n <= 0:
            return out
        for i in self.indices():
            out.append(i)
            if len(out) == n:
                break
        return out

    def values(self, n: int) -> list[int]:
        return [self.rule.value(i) for i in self.prefix(n)]

    def contains(self, root_index: int, horizon: int | None = None) -> bool:
        """Membership test; views only thin out, so scanning up to the index suffices."""
        for i in self.indices():
            if i == root_index:
                return True
            if i > root_index or (horizon is not None and i > horizon):
                return False
        return False

    def take(self, l: int) -> tuple[list[int], list[int], "SequenceCursor"]:
        """Consume the first l entries: (root indices, values, remaining cursor)."""
        if l < 0:
            raise ValueError("negative count")
        idx = self.prefix(l)
        if len(idx) < l:
            raise CursorExhausted(f"only {len(idx)} entries available, {l} requested")
        if any(self.rule.value(i) < 1 for i in idx):
            raise CursorExhausted("nonpositive entry in sequence")
        return idx, [self.rule.value(i) for i in idx], remove_consumed(self, idx, mark=True)


def _walk(ops: tuple[tuple, ...]) -> Iterator[int]:
    if not ops:
        i = 1
        while True:
            yield i
            i += 1
    *rest, last = ops
    parent = _walk(tuple(rest))
    if last[0] == "star":
        for pos, i in enumerate(parent):
            if pos % 2 == 0:
                yield i
    else:
        dropped = last[1]
        for i in parent:
            if i not in dropped:
                yield i


def star_subsequence(K: SequenceCursor) -> SequenceCursor:
    """Odd-position entries of the current view."""
    return SequenceCursor(K.rule, K.ops + (("star",),), K.consumed)


def remove_consumed(K: SequenceCursor, B: Iterable[int], mark: bool = False) -> SequenceCursor:
    """The view with the root indices in B removed; B must lie in the view."""
    B = frozenset(B)
    if not B:
        return K
    horizon = max(B)
    inside = set()
    for i in K.indices():
        if i > horizon:
            break
        if i in B:
            inside.add(i)
    missing = B - inside
    if missing:
        raise IndexOutsideView(f"indices {sorted(missing)} are not in the view")
    consumed = K.consumed | B if mark else K.consumed
    return SequenceCursor(K.rule, K.ops + (("remove", B),), consumed)


__all__ = ["Rule", "parse_rule", "SequenceCursor", "star_subsequence", "remove_consumed"]
