"""Condition validators and the operations that build new conditions.

Finite-depth reading of the axioms:

* P-1: nonempty (closedness is automatic for a finite shadow).
* P-2: every section has at least two leaves, and the splitting modulus
  is the least k such that each prefix-tree node at or below the root,
  of depth <= N-k, has a splitting node within k levels.
* P-3: for every i and every basic clopen [s], which z in X|<i admit an
  x(i) extending s is decided by the depth-t truncation of z; the modulus
  is the least m with min(N, m*|s|+m) >= t for all s.
* P-4: amalgamation of compatible projections, exhaustively over all
  pairs of initial segments inside the support.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

from .poset import Schedule, Segment, all_initial_segments, cone, is_initial_segment
from .shadow import (
    DegenerateSection,
    Layout,
    ShadowPoint,
    TreeSystem,
    bitstr,
    inverse_project,
    lcp_len,
    project_set,
    sections,
)

INF = float("inf")


class ConditionError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# validation

@dataclass
class P2Entry:
    modulus: int | None
    witness: tuple | None = None

    @property
    def ok(self):
        return self.witness is None


@dataclass
class P3Entry:
    modulus: int
    depths: tuple
    witness: tuple | None = None

    @property
    def ok(self):
        return self.witness is None


@dataclass
class ValidationReport:
    p1: bool
    p2: dict
    p3: dict
    p4: bool
    p4_witness: tuple | None = None
    shrink: "ShrinkReport | None" = None

    @property
    def p2_ok(self):
        return all(e.ok for e in self.p2.values())

    @property
    def p3_ok(self):
        return all(e.ok for e in self.p3.values())

    @property
    def ok(self):
        return self.p1 and self.p2_ok and self.p3_ok and self.p4

    @property
    def p2_modulus(self) -> int:
        mods = [e.modulus for e in self.p2.values() if e.modulus is not None]
        return max(mods, default=1)

    @property
    def p3_modulus(self) -> int:
        return max((e.modulus for e in self.p3.values()), default=0)

    def lines(self) -> list[str]:
        out = [f"P-1: {'pass' if self.p1 else 'FAIL'}"]
        for i, e in self.p2.items():
            tag = "pass" if e.ok else "FAIL"
            out.append(f"P-2[{i}]: {tag} modulus={e.modulus}"
                       + (f" witness={_fmt_witness(e.witness)}" if e.witness else ""))
        for i, e in self.p3.items():
            tag = "pass" if e.ok else "FAIL"
            out.append(f"P-3[{i}]: {tag} modulus={e.modulus}"
                       + (f" witness={_fmt_witness(e.witness)}" if e.witness else ""))
        out.append(f"P-4: {'pass' if self.p4 else 'FAIL'}"
                   + (f" witness={_fmt_witness(self.p4_witness)}" if self.p4_witness else ""))
        if self.shrink is not None:
            out.append(f"shrink: {'pass' if self.shrink.shrunk else 'FAIL'} "
                       f"max_residual={self.shrink.max_residual}")
        return out

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "p1": self.p1,
            "p2": {i: {"modulus": e.modulus, "witness": _fmt_witness(e.witness)}
                   for i, e in self.p2.items()},
            "p3": {i: {"modulus": e.modulus, "depths": list(e.depths),
                       "witness": _fmt_witness(e.witness)} for i, e in self.p3.items()},
            "p4": self.p4,
            "p4_witness": _fmt_witness(self.p4_witness),
        }


def _fmt_witness(w):
    if w is None:
        return None
    return [str(x) if not isinstance(x, (int, str)) else x for x in w]


def section_modulus(leaves: Iterable[int], depth: int) -> int:
    """Least splitting modulus of one section (at least two leaves)."""
    leaves = set(leaves)
    lo, hi = min(leaves), max(leaves)
    stem = lcp_len(lo, hi, depth)
    # dist[node] = levels down to the nearest splitting descendant (0 if it splits)
    level = {a: INF for a in leaves}
    need = 1
    for d in range(depth - 1, stem - 1, -1):
        parents: dict = {}
        for node, dist in level.items():
            parents.setdefault(node >> 1, []).append(dist)
        level = {}
        for node, dists in parents.items():
            dist = 0 if len(dists) == 2 else dists[0] + 1
            level[node] = dist
            need = max(need, min(depth - d + 1, dist + 1))
    return need


def _p2(X: TreeSystem, i: str, budget: int | None) -> P2Entry:
    worst = 1
    for key, leaves in sorted(sections(X, i).items()):
        if len(leaves) < 2:
            z = _key_point(X, i, key)
            return P2Entry(None, ("degenerate", i, z, bitstr(next(iter(leaves)), X.depth)))
        k = section_modulus(leaves, X.depth)
        if budget is not None and k > budget:
            return P2Entry(k, ("modulus", i, _key_point(X, i, key), k))
        worst = max(worst, k)
    return P2Entry(worst)


def _key_point(X: TreeSystem, i: str, key: int) -> ShadowPoint:
    below = cone(X.poset, i, "lt")
    sub = Layout(below, X.depth)
    return ShadowPoint(below, X.depth, X.layout.projector(sub)(key))


def _truncation_mask(X: TreeSystem, members, t: int) -> int:
    lay = X.layout
    top = ((1 << t) - 1) << (X.depth - t)
    m = 0
    for e in members:
        m |= top << lay.shift[e]
    return m


def _p3(X: TreeSystem, i: str, budget: int | None) -> P3Entry:
    N = X.depth
    below = X.poset.below(i)
    secs = sections(X, i)
    zs = sorted(secs)
    depths = []
    for ell in range(N + 1):
        prefixes = {z: frozenset(a >> (N - ell) for a in secs[z]) for z in zs}
        for t in range(N + 1):
            tm = _truncation_mask(X, below, t)
            seen: dict = {}
            if all(seen.setdefault(z & tm, prefixes[z]) == prefixes[z] for z in zs):
                depths.append(t)
                break
    modulus = max((-(-t // (ell + 1)) for ell, t in enumerate(depths)), default=0)
    witness = None
    if budget is not None and modulus > budget:
        ell = next(ell for ell, t in enumerate(depths) if -(-t // (ell + 1)) > budget)
        witness = ("openness", i, ell, depths[ell])
    return P3Entry(modulus, tuple(depths), witness)


def _segments_in(X: TreeSystem):
    return [s for s in all_initial_segments(X.poset) if s.members <= X.support.members]


def p4_scan(X: TreeSystem):
    """Return None if P-4 holds, else a witness (seg, other_seg, x, y)."""
    segs = _segments_in(X)
    for seg, other_seg in combinations(segs, 2):
        if seg.members <= other_seg.members or other_seg.members <= seg.members:
            continue
        w = _p4_pair(X, seg, other_seg)
        if w is not None:
            return w
    return None


def _p4_pair(X: TreeSystem, seg: Segment, other_seg: Segment):
    lay = X.layout
    mx, my = lay.mask(seg.members), lay.mask(other_seg.members)
    mi = mx & my
    Px: dict = {}
    Py: dict = {}
    U: dict = {}
    for p in X.points:
        k = p & mi
        Px.setdefault(k, set()).add(p & mx)
        Py.setdefault(k, set()).add(p & my)
        U.setdefault(k, set()).add(p & (mx | my))
    for k in sorted(Px):
        if len(U[k]) != len(Px[k]) * len(Py[k]):
            for a in sorted(Px[k]):
                for b in sorted(Py[k]):
                    if a | b not in U[k]:
                        return (seg, other_seg, _sub_point(X, seg, a), _sub_point(X, other_seg, b))
    return None


def _sub_point(X: TreeSystem, seg: Segment, masked: int) -> ShadowPoint:
    sub = Layout(seg, X.depth)
    return ShadowPoint(seg, X.depth, X.layout.projector(sub)(masked))


def replay_p4_witness(X: TreeSystem, witness) -> bool:
    """True iff the witness really violates P-4 on X."""
    seg, other_seg, x, y = witness
    Xx = project_set(X, seg)
    Xy = project_set(X, other_seg)
    if x.code not in Xx.points or y.code not in Xy.points:
        return False
    inter = seg & other_seg
    lx, ly = Layout(seg, X.depth), Layout(other_seg, X.depth)
    li = Layout(inter, X.depth)
    if lx.projector(li)(x.code) != ly.projector(li)(y.code):
        return False
    union = seg | other_seg
    bits = {**x.bits, **y.bits}
    glued = Layout(union, X.depth).pack({e: int(b, 2) if b else 0 for e, b in bits.items()})
    return glued not in project_set(X, union).points


def validate(X: TreeSystem, modulus_budget: int | None = None,
             openness_budget: int | None = None,
             schedule: Schedule | None = None) -> ValidationReport:
    p2 = {i: _p2(X, i, modulus_budget) for i in X.support}
    p3 = {i: _p3(X, i, openness_budget) for i in X.support}
    w = p4_scan(X)
    shrink = shrink_check(X, schedule) if schedule is not None else None
    return ValidationReport(bool(X.points), p2, p3, w is None, w, shrink)


def is_condition(X: TreeSystem, modulus_budget: int | None = None) -> bool:
    """Cheap P-1/P-2/P-4 check (P-3 always holds at finite depth)."""
    for i in X.support:
        for leaves in sections(X, i).values():
            if len(leaves) < 2:
                return False
            if modulus_budget is not None and section_modulus(leaves, X.depth) > modulus_budget:
                return False
    return p4_scan(X) is None


# ---------------------------------------------------------------------------
# building conditions

def spl(X: TreeSystem, i: str, e: int) -> TreeSystem:
    if i not in X.support:
        raise ConditionError(f"{i!r} is not in the support {X.support}")
    lay = X.layout
    m = lay.mask(X.poset.below(i))
    N = X.depth
    bounds: dict = {}
    for p in X.points:
        v = lay.get(p, i)
        k = p & m
        lo, hi = bounds.get(k, (v, v))
        bounds[k] = (min(lo, v), max(hi, v))
    pos: dict = {}
    for k, (lo, hi) in bounds.items():
        if lo == hi:
            raise DegenerateSection(
                f"section of {i!r} over {lay.format(k)} is the single leaf {bitstr(lo, N)}")
        pos[k] = N - 1 - lcp_len(lo, hi, N)
    return X.with_points(p for p in X.points
                         if (lay.get(p, i) >> pos[p & m]) & 1 == e)


def restrict(X: TreeSystem, seg) -> TreeSystem:
    members = seg.members if isinstance(seg, Segment) else frozenset(seg)
    if not is_initial_segment(X.poset, members):
        raise ConditionError(f"{sorted(members)} is not an initial segment")
    return project_set(X, members)


def amalgam(X: TreeSystem, Y: TreeSystem) -> TreeSystem:
    """{x in X : x restricted to Y's support lies in Y}."""
    if not Y.support.members <= X.support.members:
        raise ConditionError("Y's support is not inside X's support")
    if Y.depth != X.depth:
        raise ConditionError("depth mismatch")
    if not is_initial_segment(X.poset, Y.support.members):
        raise ConditionError("Y's support is not an initial segment")
    base = project_set(X, Y.support)
    if not Y.points <= base.points:
        raise ConditionError("Y is not a subset of the restriction of X")
    return inverse_project(Y, X)


def iterate_spl(X: TreeSystem, schedule: Schedule, u: str) -> TreeSystem:
    if len(u) > schedule.horizon:
        raise ConditionError(f"address {u!r} longer than horizon {schedule.horizon}")
    for n, bit in enumerate(u):
        try:
            X = spl(X, schedule[n], int(bit))
        except DegenerateSection as exc:
            raise DegenerateSection(f"step {n}: {exc}") from exc
    return X


def split_tree(X: TreeSystem, schedule: Schedule, m: int) -> dict:
    """{u: X[u]} for every address of length <= m."""
    if m > schedule.horizon:
        raise ConditionError(f"order {m} exceeds horizon {schedule.horizon}")
    out = {"": X}
    level = [""]
    for n in range(m):
        nxt = []
        for u in level:
            for e in (0, 1):
                try:
                    out[u + str(e)] = spl(out[u], schedule[n], e)
                except DegenerateSection as exc:
                    raise DegenerateSection(f"step {n} at {u!r}: {exc}") from exc
                nxt.append(u + str(e))
        level = nxt
    return out


def pinned_depths(X: TreeSystem) -> dict:
    """Common-prefix length of each coordinate across X."""
    out = {}
    for e in X.layout.elements:
        vals = [X.coord(p, e) for p in X.points]
        out[e] = lcp_len(min(vals), max(vals), X.depth)
    return out


@dataclass
class Branch:
    address: str
    size: int
    pinned: dict
    degenerate_step: int | None = None


@dataclass
class ShrinkReport:
    horizon: int
    branches: list = field(default_factory=list)

    @property
    def shrunk(self) -> bool:
        return all(b.size == 1 for b in self.branches)

    @property
    def residuals(self) -> dict:
        return {b.address: b.size for b in self.branches}

    @property
    def max_residual(self) -> int:
        return max(b.size for b in self.branches)

    @property
    def min_residual(self) -> int:
        return min(b.size for b in self.branches)


def shrink_check(X: TreeSystem, schedule: Schedule) -> ShrinkReport:
    """Follow every branch of the split tree to the horizon.

    A branch stops early when its cell is a single point or when the next
    split meets a degenerate section (recorded as ``degenerate_step``).
    """
    report = ShrinkReport(schedule.horizon)
    stack = [("", X)]
    while stack:
        u, C = stack.pop()
        n = len(u)
        if len(C) == 1 or n == schedule.horizon:
            report.branches.append(Branch(u, len(C), pinned_depths(C)))
            continue
        try:
            kids = [spl(C, schedule[n], e) for e in (0, 1)]
        except DegenerateSection:
            report.branches.append(Branch(u, len(C), pinned_depths(C), n))
            continue
        stack.append((u + "1", kids[1]))
        stack.append((u + "0", kids[0]))
    report.branches.sort(key=lambda b: b.address)
    return report


# ---------------------------------------------------------------------------
# clopen predicates

class Clopen:
    """Boolean combination of prefix tests on single coordinates."""

    def holds(self, lay: Layout, code: int) -> bool:
        raise NotImplementedError

    def __call__(self, X: TreeSystem, code: int) -> bool:
        return self.holds(X.layout, code)

    def __invert__(self):
        return Not(self)

    def __and__(self, other):
        return AllOf((self, other))

    def __or__(self, other):
        return AnyOf((self, other))


@dataclass(frozen=True)
class Atom(Clopen):
    coord: str
    prefix: str

    def holds(self, lay, code):
        n = len(self.prefix)
        if n > lay.depth:
            raise ConditionError(f"prefix {self.prefix!r} deeper than depth {lay.depth}")
        if n == 0:
            return True
        return lay.get(code, self.coord) >> (lay.depth - n) == int(self.prefix, 2)

    def to_json(self):
        return {"coord": self.coord, "prefix": self.prefix}


@dataclass(frozen=True)
class AllOf(Clopen):
    parts: tuple

    def holds(self, lay, code):
        return all(p.holds(lay, code) for p in self.parts)

    def to_json(self):
        return {"all_of": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class AnyOf(Clopen):
    parts: tuple

    def holds(self, lay, code):
        return any(p.holds(lay, code) for p in self.parts)

    def to_json(self):
        return {"any_of": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Not(Clopen):
    part: Clopen

    def holds(self, lay, code):
        return not self.part.holds(lay, code)

    def to_json(self):
        return {"not": self.part.to_json()}


TRUE = AllOf(())


class PointSet(Clopen):
    """Clopen given extensionally by depth-N codes (e.g. an F-preimage)."""

    def __init__(self, codes):
        self.codes = frozenset(codes)

    def holds(self, lay, code):
        return code in self.codes


class Predicate(Clopen):
    def __init__(self, fn: Callable[[ShadowPoint], bool]):
        self.fn = fn

    def holds(self, lay, code):
        return bool(self.fn(ShadowPoint(lay.support, lay.depth, code)))


def parse_clopen(obj) -> Clopen:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if "coord" in obj:
        return Atom(obj["coord"], obj.get("prefix", ""))
    if "all_of" in obj:
        return AllOf(tuple(parse_clopen(o) for o in obj["all_of"]))
    if "any_of" in obj:
        return AnyOf(tuple(parse_clopen(o) for o in obj["any_of"]))
    if "not" in obj:
        return Not(parse_clopen(obj["not"]))
    raise ConditionError(f"cannot parse clopen predicate {obj!r}")


def _as_clopen(U) -> Clopen:
    if isinstance(U, Clopen):
        return U
    if isinstance(U, dict):
        return parse_clopen(U)
    if callable(U):
        return Predicate(U)
    raise TypeError(f"not a clopen predicate: {U!r}")


def _code(X: TreeSystem, x0) -> int:
    if isinstance(x0, ShadowPoint):
        if x0.support != X.support or x0.depth != X.depth:
            raise ConditionError("point lives over a different support or depth")
        return x0.code
    if isinstance(x0, str):
        return X.layout.parse(x0)
    return int(x0)


def locate_clopen(X: TreeSystem, schedule: Schedule, x0, U) -> str:
    """Shortest address u with x0 in X[u] and X[u] inside U."""
    U = _as_clopen(U)
    c = _code(X, x0)
    if c not in X.points:
        raise ConditionError("x0 is not a point of X")
    lay = X.layout
    if not U.holds(lay, c):
        raise ConditionError("x0 does not satisfy U")
    u = ""
    C = X
    while True:
        if all(U.holds(lay, p) for p in C.points):
            return u
        n = len(u)
        if n >= schedule.horizon:
            raise BudgetExhausted(f"horizon {schedule.horizon} reached before containment")
        try:
            half = spl(C, schedule[n], 0)
        except DegenerateSection as exc:
            raise BudgetExhausted(f"degenerate split at step {n}: {exc}") from exc
        if c in half.points:
            C, u = half, u + "0"
        else:
            C, u = C.with_points(C.points - half.points), u + "1"


def localize(X: TreeSystem, schedule: Schedule, x0, U, skip_pinned: bool = False) -> TreeSystem:
    """Follow x0's branch of the split tree until the cell lies inside U.

    With ``skip_pinned`` a schedule step whose coordinate is already a
    single leaf in some section of the cell is passed over instead of
    ending the walk; the result is then an iterated split along the
    subsequence of steps actually taken.
    """
    if not skip_pinned:
        return iterate_spl(X, schedule, locate_clopen(X, schedule, x0, U))
    U = _as_clopen(U)
    c = _code(X, x0)
    if c not in X.points or not U.holds(X.layout, c):
        raise ConditionError("x0 is not a point of X inside U")
    C = X
    for n in range(schedule.horizon + 1):
        if all(U.holds(X.layout, p) for p in C.points):
            return C
        if n == schedule.horizon:
            break
        try:
            half = spl(C, schedule[n], 0)
        except DegenerateSection:
            continue
        C = half if c in half.points else C.with_points(C.points - half.points)
    raise BudgetExhausted(f"horizon {schedule.horizon} reached before containment")


def decide_clopen(X: TreeSystem, schedule: Schedule, C, modulus_budget: int | None = None):
    """Shrink X to a condition lying inside or outside C.

    Returns (Y, "inside" | "outside").
    """
    C = _as_clopen(C)
    lay = X.layout
    inside = [p for p in X.sorted_points if C.holds(lay, p)]
    if len(inside) == len(X):
        return X, "inside"
    if not inside:
        return X, "outside"
    x0 = X.sorted_points[0]
    side = "inside" if C.holds(lay, x0) else "outside"
    target = C if side == "inside" else Not(C)
    u = locate_clopen(X, schedule, x0, target)
    Y = iterate_spl(X, schedule, u)
    if not is_condition(Y, modulus_budget):
        raise BudgetExhausted(f"cell {u!r} deciding the clopen is no longer a condition")
    return Y, side


def decide_clopens(X: TreeSystem, schedule: Schedule, preds, modulus_budget=None):
    """Decide a finite list of clopens one after another."""
    sides = []
    for C in preds:
        X, side = decide_clopen(X, schedule, C, modulus_budget)
        sides.append(side)
    return X, sides
