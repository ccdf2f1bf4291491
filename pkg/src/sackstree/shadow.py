"""Depth-N shadows of points and closed sets of the product Cantor cube.

A point over support S at depth N is packed into one int: the element
that comes first in canonical order occupies the most significant N-bit
field, and inside a field coordinate 0 is the most significant bit.
Integer order therefore equals lexicographic order on the bit strings.

A :class:`TreeSystem` keeps only its depth-N point set; shallower levels
are recovered by truncation when needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable

from .poset import Segment, cone

BIT_CAP = 30


class ShadowError(ValueError):
    pass


class DegenerateSection(ShadowError):
    """A section with a single leaf has no proper root."""


class Layout:
    """Bit-field placement of a support at a given depth."""

    __slots__ = ("support", "depth", "elements", "shift", "field")

    def __init__(self, support: Segment, depth: int):
        if depth < 0:
            raise ShadowError("depth must be non-negative")
        if len(support) * depth > BIT_CAP:
            raise ShadowError(
                f"|support|*depth = {len(support) * depth} exceeds the {BIT_CAP}-bit cap")
        self.support = support
        self.depth = depth
        self.elements = support.ordered
        n = len(self.elements)
        self.shift = {e: depth * (n - 1 - k) for k, e in enumerate(self.elements)}
        self.field = (1 << depth) - 1

    @property
    def bits(self) -> int:
        return len(self.elements) * self.depth

    def get(self, code: int, e: str) -> int:
        return (code >> self.shift[e]) & self.field

    def mask(self, members) -> int:
        m = 0
        for e in members:
            if e in self.shift:
                m |= self.field << self.shift[e]
        return m

    def pack(self, values: dict) -> int:
        code = 0
        for e in self.elements:
            code |= values[e] << self.shift[e]
        return code

    def projector(self, sub: "Layout"):
        """Return a function compacting codes of this layout into ``sub``."""
        moves = [(self.shift[e], sub.shift[e]) for e in sub.elements]
        f = self.field

        def project(code):
            out = 0
            for src, dst in moves:
                out |= ((code >> src) & f) << dst
            return out
        return project

    def format(self, code: int) -> str:
        return ";".join(f"{e}:{bitstr(self.get(code, e), self.depth)}" for e in self.elements)

    def parse(self, text: str) -> int:
        values = {}
        text = text.strip()
        for frag in filter(None, (t.strip() for t in text.split(";"))):
            e, _, bits = frag.partition(":")
            e = e.strip()
            bits = bits.strip()
            if e not in self.shift:
                raise ShadowError(f"element {e!r} not in support {self.support}")
            if len(bits) != self.depth or set(bits) - {"0", "1"}:
                raise ShadowError(f"bad bit string {bits!r} for depth {self.depth}")
            values[e] = int(bits, 2) if bits else 0
        missing = set(self.elements) - values.keys()
        if missing:
            raise ShadowError(f"point {text!r} misses elements {sorted(missing)}")
        return self.pack(values)


def bitstr(value: int, length: int) -> str:
    return format(value, f"0{length}b") if length else ""


def lcp_len(lo: int, hi: int, depth: int) -> int:
    """Common prefix length of the depth-bit strings ``lo`` and ``hi``."""
    return depth - (lo ^ hi).bit_length()


@dataclass(frozen=True)
class ShadowPoint:
    support: Segment
    depth: int
    code: int

    @property
    def layout(self) -> Layout:
        return Layout(self.support, self.depth)

    @property
    def bits(self) -> dict:
        lay = self.layout
        return {e: bitstr(lay.get(self.code, e), self.depth) for e in lay.elements}

    def __getitem__(self, e):
        return self.bits[e]

    def __str__(self):
        return self.layout.format(self.code)

    @classmethod
    def from_bits(cls, support: Segment, depth: int, bits) -> "ShadowPoint":
        lay = Layout(support, depth)
        if isinstance(bits, str):
            return cls(support, depth, lay.parse(bits))
        if set(bits) != set(lay.elements):
            raise ShadowError("point must name exactly the support elements")
        for b in bits.values():
            if len(b) != depth:
                raise ShadowError(f"bit string {b!r} is not of length {depth}")
        return cls(support, depth, lay.pack({e: int(b, 2) if b else 0 for e, b in bits.items()}))


class TreeSystem:
    """Nonempty set of depth-N points over an initial segment."""

    def __init__(self, support: Segment, depth: int, points: Iterable[int]):
        self.layout = Layout(support, depth)
        self.support = support
        self.depth = depth
        pts = frozenset(points)
        if not pts:
            raise ShadowError("a tree system must be nonempty")
        limit = 1 << self.layout.bits
        if any(p < 0 or p >= limit for p in pts):
            raise ShadowError("point code out of range for layout")
        self.points = pts

    @classmethod
    def full_cube(cls, support: Segment, depth: int) -> "TreeSystem":
        lay = Layout(support, depth)
        return cls(support, depth, range(1 << lay.bits))

    @classmethod
    def from_strings(cls, support: Segment, depth: int, points: Iterable[str]) -> "TreeSystem":
        lay = Layout(support, depth)
        return cls(support, depth, [lay.parse(p) for p in points])

    @property
    def poset(self):
        return self.support.poset

    @cached_property
    def sorted_points(self) -> tuple:
        return tuple(sorted(self.points))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.sorted_points)

    def __contains__(self, x):
        if isinstance(x, ShadowPoint):
            return x.support == self.support and x.depth == self.depth and x.code in self.points
        return x in self.points

    def __eq__(self, other):
        if not isinstance(other, TreeSystem):
            return NotImplemented
        return (self.support == other.support and self.depth == other.depth
                and self.points == other.points)

    def __hash__(self):
        return hash((self.support, self.depth, self.points))

    def __le__(self, other: "TreeSystem") -> bool:
        self._compatible(other)
        return self.points <= other.points

    def __lt__(self, other: "TreeSystem") -> bool:
        self._compatible(other)
        return self.points < other.points

    def _compatible(self, other):
        if self.support != other.support or self.depth != other.depth:
            raise ShadowError("tree systems over different supports or depths")

    def with_points(self, points) -> "TreeSystem":
        return TreeSystem(self.support, self.depth, points)

    def union(self, other: "TreeSystem") -> "TreeSystem":
        self._compatible(other)
        return self.with_points(self.points | other.points)

    def point(self, code: int) -> ShadowPoint:
        return ShadowPoint(self.support, self.depth, code)

    def strings(self) -> list[str]:
        return [self.layout.format(c) for c in self.sorted_points]

    def coord(self, code: int, e: str) -> int:
        return self.layout.get(code, e)

    def mask(self, members) -> int:
        return self.layout.mask(members.members if isinstance(members, Segment) else members)

    def key_sets(self, members) -> frozenset:
        """Projection to ``members`` kept in this layout (masked codes)."""
        m = self.mask(members)
        return frozenset(p & m for p in self.points)

    def __repr__(self):
        return f"TreeSystem(support={self.support}, depth={self.depth}, |points|={len(self.points)})"


@dataclass(frozen=True)
class SectionTree:
    depth: int
    leaves: frozenset

    def __post_init__(self):
        if not self.leaves:
            raise ShadowError("a section must be nonempty")
        object.__setattr__(self, "leaves", frozenset(self.leaves))

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "SectionTree":
        strings = list(strings)
        lengths = {len(s) for s in strings}
        if len(lengths) != 1:
            raise ShadowError("section leaves must share one length")
        n = lengths.pop()
        return cls(n, frozenset(int(s, 2) if s else 0 for s in strings))

    def strings(self) -> list[str]:
        return [bitstr(v, self.depth) for v in sorted(self.leaves)]

    def __len__(self):
        return len(self.leaves)

    def __repr__(self):
        return "SectionTree(" + ",".join(self.strings()) + ")"


def _check_sub(seg, support: Segment):
    members = seg.members if isinstance(seg, Segment) else frozenset(seg)
    if not members <= support.members:
        raise ShadowError(f"{sorted(members)} is not a subset of the support {support}")
    return Segment(support.poset, members)


def project_point(x: ShadowPoint, seg) -> ShadowPoint:
    seg = _check_sub(seg, x.support)
    src = x.layout
    dst = Layout(seg, x.depth)
    return ShadowPoint(seg, x.depth, src.projector(dst)(x.code))


def project_set(X: TreeSystem, seg) -> TreeSystem:
    seg = _check_sub(seg, X.support)
    if seg.members == X.support.members:
        return X
    dst = Layout(seg, X.depth)
    proj = X.layout.projector(dst)
    return TreeSystem(seg, X.depth, {proj(p) for p in X.points})


def inverse_project(Y: TreeSystem, X: TreeSystem) -> TreeSystem:
    """Points of X whose projection to Y's support lies in Y."""
    proj = X.layout.projector(Y.layout)
    return X.with_points(p for p in X.points if proj(p) in Y.points)


def glue(x: ShadowPoint, y: ShadowPoint) -> ShadowPoint:
    if x.depth != y.depth:
        raise ShadowError("points of different depth")
    overlap = x.support & y.support
    if project_point(x, overlap).code != project_point(y, overlap).code:
        raise ShadowError(f"points disagree on the overlap {overlap}")
    union = x.support | y.support
    bits = {**x.bits, **y.bits}
    return ShadowPoint.from_bits(union, x.depth, bits)


def section(X: TreeSystem, i: str, z: ShadowPoint | None = None) -> SectionTree:
    """Leaves x(i) of points x in X lying over z = x restricted to [<i]."""
    if i not in X.support:
        raise ShadowError(f"{i!r} is not in the support {X.support}")
    below = cone(X.poset, i, "lt")
    lay = X.layout
    m = lay.mask(below.members)
    if z is None:
        if below.members:
            raise ShadowError("z is required when i has predecessors")
        key = 0
    else:
        if z.support.members != below.members or z.depth != X.depth:
            raise ShadowError(f"z must live over {below} at depth {X.depth}")
        zl = z.layout
        key = 0
        for e in zl.elements:
            key |= zl.get(z.code, e) << lay.shift[e]
    leaves = {lay.get(p, i) for p in X.points if p & m == key}
    if not leaves:
        raise ShadowError(f"{z} is not in the projection of X to {below}")
    return SectionTree(X.depth, frozenset(leaves))


def sections(X: TreeSystem, i: str) -> dict:
    """All sections at i keyed by the masked [<i]-projection."""
    lay = X.layout
    m = lay.mask(X.poset.below(i))
    out: dict = {}
    for p in X.points:
        out.setdefault(p & m, set()).add(lay.get(p, i))
    return out


def root_stem(A: SectionTree) -> tuple[str, int]:
    if len(A.leaves) < 2:
        raise DegenerateSection(f"section {A} has a single leaf")
    lo, hi = min(A.leaves), max(A.leaves)
    stem = lcp_len(lo, hi, A.depth)
    return bitstr(lo >> (A.depth - stem), stem), stem


def spl1d(A: SectionTree, e: int) -> SectionTree:
    _, stem = root_stem(A)
    pos = A.depth - 1 - stem
    return SectionTree(A.depth, frozenset(a for a in A.leaves if (a >> pos) & 1 == e))


def cube_points(support: Segment, depth: int):
    lay = Layout(support, depth)
    return range(1 << lay.bits)


def enumerate_strings(depth: int):
    return ["".join(t) for t in product("01", repeat=depth)]
