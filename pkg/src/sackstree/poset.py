"""Finite partial orders, initial segments, cones and schedules.

The iteration "length" is a finite poset.  Everything downstream keys
its bookkeeping on :class:`Segment` (a downward closed subset) and on
the canonical element order, which is the declaration order.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


class PosetError(ValueError):
    pass


class FinitePoset:
    """A finite strict partial order, transitively closed on construction."""

    def __init__(self, elements: Sequence[str], lt: Iterable[tuple[str, str]] = ()):
        elements = tuple(elements)
        if len(set(elements)) != len(elements):
            raise PosetError("duplicate element names")
        index = {e: k for k, e in enumerate(elements)}
        below: dict[str, set[str]] = {e: set() for e in elements}
        for a, b in lt:
            if a not in index or b not in index:
                raise PosetError(f"unknown element in pair ({a!r}, {b!r})")
            if a == b:
                raise PosetError(f"reflexive pair ({a!r}, {a!r})")
            below[b].add(a)
        _toposort(elements, below)
        # transitive closure; elements <= 16 in practice so the naive loop is fine
        changed = True
        while changed:
            changed = False
            for b in elements:
                extra = set()
                for a in below[b]:
                    extra |= below[a] - below[b]
                if extra:
                    below[b] |= extra
                    changed = True
        for b in elements:
            if b in below[b]:
                raise PosetError(f"cycle through {b!r}")
        self.elements = elements
        self.index = index
        self._below = {e: frozenset(s) for e, s in below.items()}
        self._above = {e: frozenset(b for b in elements if e in self._below[b])
                       for e in elements}
        self.lt = frozenset((a, b) for b in elements for a in self._below[b])
        # bitmask views used by xi_pair: bit k stands for elements[k]
        self._full_bits = (1 << len(elements)) - 1
        self._not_ge_bits = {
            e: self._full_bits & ~sum(1 << index[b] for b in self._above[e] | {e})
            for e in elements}
        self._bit_segments: dict[int, Segment] = {}

    def _segment_of_bits(self, bits: int) -> "Segment":
        seg = self._bit_segments.get(bits)
        if seg is None:
            seg = Segment(self, frozenset(e for k, e in enumerate(self.elements) if bits >> k & 1))
            self._bit_segments[bits] = seg
        return seg

    # -- basic relations ---------------------------------------------------
    def less(self, a: str, b: str) -> bool:
        return a in self._below[b]

    def below(self, e: str) -> frozenset:
        return self._below[e]

    def above(self, e: str) -> frozenset:
        return self._above[e]

    def sort(self, members: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(members, key=self.index.__getitem__))

    # -- segments ----------------------------------------------------------
    def segment(self, members: Iterable[str]) -> "Segment":
        members = frozenset(members)
        unknown = members - set(self.elements)
        if unknown:
            raise PosetError(f"unknown elements {sorted(unknown)}")
        if not is_initial_segment(self, members):
            raise PosetError(f"{self.sort(members)} is not downward closed")
        return Segment(self, members)

    @property
    def full(self) -> "Segment":
        return Segment(self, frozenset(self.elements))

    @property
    def empty(self) -> "Segment":
        return Segment(self, frozenset())

    def __eq__(self, other):
        return (isinstance(other, FinitePoset) and self.elements == other.elements
                and self.lt == other.lt)

    def __hash__(self):
        return hash((self.elements, self.lt))

    def __repr__(self):
        pairs = sorted(self.lt, key=lambda p: (self.index[p[0]], self.index[p[1]]))
        return f"FinitePoset({list(self.elements)}, lt={pairs})"

    @classmethod
    def chain(cls, n: int, prefix: str = "p") -> "FinitePoset":
        names = [f"{prefix}{k}" for k in range(n)]
        return cls(names, [(names[k], names[k + 1]) for k in range(n - 1)])

    @classmethod
    def antichain(cls, names: Sequence[str]) -> "FinitePoset":
        return cls(names, [])


def _toposort(elements, below):
    remaining = {e: set(below[e]) for e in elements}
    while remaining:
        ready = [e for e, deps in remaining.items() if not deps & remaining.keys()]
        if not ready:
            raise PosetError("strict order contains a cycle")
        for e in ready:
            del remaining[e]


@dataclass(frozen=True)
class Segment:
    """A downward closed subset of ``poset``."""

    poset: FinitePoset
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    @property
    def ordered(self) -> tuple[str, ...]:
        return self.poset.sort(self.members)

    def __contains__(self, e):
        return e in self.members

    def __iter__(self):
        return iter(self.ordered)

    def __len__(self):
        return len(self.members)

    def __and__(self, other: "Segment") -> "Segment":
        return Segment(self.poset, self.members & _members(other))

    def __or__(self, other: "Segment") -> "Segment":
        return Segment(self.poset, self.members | _members(other))

    def __le__(self, other) -> bool:
        return self.members <= _members(other)

    def __lt__(self, other) -> bool:
        return self.members < _members(other)

    def __eq__(self, other):
        if isinstance(other, Segment):
            return self.members == other.members and self.poset == other.poset
        return NotImplemented

    def __hash__(self):
        return hash(self.members)

    def __repr__(self):
        return "{" + ",".join(self.ordered) + "}"


def _members(x):
    return x.members if isinstance(x, Segment) else frozenset(x)


CONE_KINDS = ("lt", "le", "not_ge", "not_gt")


def cone(poset: FinitePoset, i: str, kind: str) -> Segment:
    """[<i], [<=i], [not>=i] or [not>i].

    All four are downward closed in any partial order, so each comes back
    as a :class:`Segment`.
    """
    if i not in poset.index:
        raise PosetError(f"unknown element {i!r}")
    below = poset.below(i)
    if kind == "lt":
        members = below
    elif kind == "le":
        members = below | {i}
    elif kind == "not_ge":
        members = frozenset(poset.elements) - poset.above(i) - {i}
    elif kind == "not_gt":
        members = frozenset(poset.elements) - poset.above(i)
    else:
        raise ValueError(f"cone kind must be one of {CONE_KINDS}, got {kind!r}")
    return Segment(poset, members)


def is_initial_segment(poset: FinitePoset, subset: Iterable[str]) -> bool:
    subset = _members(subset)
    return all(poset.below(j) <= subset for j in subset)


SEGMENT_CAP = 16


def all_initial_segments(poset: FinitePoset, cap: int = SEGMENT_CAP) -> list[Segment]:
    """Every downward closed subset once, ordered by size then membership."""
    n = len(poset.elements)
    if n > cap:
        raise PosetError(f"{n} elements exceeds the enumeration cap {cap}")
    out = []
    for size in range(n + 1):
        for combo in combinations(poset.elements, size):
            if is_initial_segment(poset, combo):
                out.append(Segment(poset, frozenset(combo)))
    return out


class Schedule:
    """A finite prefix of an admissible function with a declared fairness.

    ``fairness`` is the minimum number of times each support member must
    occur among ``values``.
    """

    def __init__(self, poset: FinitePoset, support, values: Sequence[str], fairness: int = 0):
        if not isinstance(support, Segment):
            support = poset.segment(support)
        if fairness < 0:
            raise PosetError("fairness must be non-negative")
        values = tuple(values)
        for v in values:
            if v not in support:
                raise PosetError(f"schedule value {v!r} outside the support {support}")
        for e in support:
            if values.count(e) < fairness:
                raise PosetError(f"{e!r} occurs {values.count(e)} < {fairness} times")
        self.poset = poset
        self.support = support
        self.values = values
        self.fairness = fairness
        self._xi_memo: dict = {}

    @property
    def horizon(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> str:
        if not 0 <= n < len(self.values):
            raise IndexError(f"schedule horizon {len(self.values)} exceeded at {n}")
        return self.values[n]

    def __len__(self):
        return len(self.values)

    def prefix(self, n: int) -> "Schedule":
        vals = self.values[:n]
        fair = min((vals.count(e) for e in self.support), default=0)
        return Schedule(self.poset, self.support, vals, min(self.fairness, fair))

    def __eq__(self, other):
        return (isinstance(other, Schedule) and self.poset == other.poset
                and self.support == other.support and self.values == other.values
                and self.fairness == other.fairness)

    def __repr__(self):
        return f"Schedule({list(self.values)}, fairness={self.fairness})"

    @classmethod
    def round_robin(cls, poset: FinitePoset, support=None, rounds: int = 1) -> "Schedule":
        support = poset.full if support is None else support
        if not isinstance(support, Segment):
            support = poset.segment(support)
        return cls(poset, support, list(support.ordered) * rounds, rounds)


def xi_pair(poset: FinitePoset, schedule: Schedule, u: str, v: str) -> Segment:
    """The agreement segment for two equal-length addresses.

    Starts from the whole poset and intersects with [not>=schedule[n]] at every
    position n where the addresses disagree.
    """
    if len(u) != len(v):
        raise ValueError(f"address lengths differ: {u!r} vs {v!r}")
    if len(u) > schedule.horizon:
        raise IndexError(f"address length {len(u)} exceeds horizon {schedule.horizon}")
    if u.strip("01") or v.strip("01"):
        raise ValueError(f"addresses must be bit strings: {u!r}, {v!r}")
    n = len(u)
    diff = int(u, 2) ^ int(v, 2) if n else 0
    memo = schedule._xi_memo if poset is schedule.poset else {}
    seg = memo.get((n, diff))
    if seg is None:
        bits, masks = poset._full_bits, poset._not_ge_bits
        for k in range(n):
            if diff >> (n - 1 - k) & 1:
                bits &= masks[schedule.values[k]]
        seg = memo[n, diff] = poset._segment_of_bits(bits)
    return seg
