"""Splitting systems, their refinement and expansion, and finite fusion."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

from .poset import Schedule, Segment, cone, xi_pair
from .precond import (
    ConditionError,
    is_condition,
    p4_scan,
    pinned_depths,
    spl,
    split_tree,
    validate,
)
from .shadow import DegenerateSection, TreeSystem

ORDER_CAP = 12


def addresses(m: int) -> list[str]:
    return ["".join(t) for t in product("01", repeat=m)]


class SplittingSystem:
    """Family X_u indexed by every address u of length <= order."""

    def __init__(self, schedule: Schedule, order: int, family: dict):
        if order > ORDER_CAP:
            raise ConditionError(f"order {order} exceeds cap {ORDER_CAP}")
        if order > schedule.horizon:
            raise ConditionError(f"order {order} exceeds schedule horizon {schedule.horizon}")
        missing = [u for n in range(order + 1) for u in addresses(n) if u not in family]
        if missing:
            raise ConditionError(f"family misses addresses {missing[:4]}")
        root = family[""]
        for u, X in family.items():
            if X.support != root.support or X.depth != root.depth:
                raise ConditionError(f"member {u!r} has a different support or depth")
        self.schedule = schedule
        self.order = order
        self.family = {u: family[u] for n in range(order + 1) for u in addresses(n)}

    @property
    def poset(self):
        return self.schedule.poset

    @property
    def support(self) -> Segment:
        return self.family[""].support

    def level(self, m: int) -> dict:
        return {u: self.family[u] for u in addresses(m)}

    def agreement(self, u: str, v: str) -> Segment:
        return xi_pair(self.poset, self.schedule, u, v) & self.support

    def __getitem__(self, u):
        return self.family[u]

    def __eq__(self, other):
        return (isinstance(other, SplittingSystem) and self.order == other.order
                and self.schedule == other.schedule and self.family == other.family)

    def __repr__(self):
        return f"SplittingSystem(order={self.order}, schedule={self.schedule})"

    @classmethod
    def canonical(cls, X: TreeSystem, schedule: Schedule, order: int) -> "SplittingSystem":
        return cls(schedule, order, split_tree(X, schedule, order))


@dataclass
class SystemReport:
    s1: list = field(default_factory=list)
    s2: list = field(default_factory=list)
    s3: list = field(default_factory=list)

    @property
    def ok(self):
        return not (self.s1 or self.s2 or self.s3)

    def lines(self):
        out = []
        for name in ("s1", "s2", "s3"):
            fails = getattr(self, name)
            out.append(f"{name.upper().replace('S', 'S-')}: "
                       + ("pass" if not fails else f"FAIL first={fails[0]}"))
        return out


def _le_key(X: TreeSystem, i: str) -> frozenset:
    return X.key_sets(cone(X.poset, i, "le").members & X.support.members)


def verify_system(sys: SplittingSystem, first_only: bool = False) -> SystemReport:
    """Exhaustive S-1/S-2/S-3 scan; failures are (kind, u, v/e, detail)."""
    rep = SystemReport()
    sched = sys.schedule
    for n in range(sys.order):
        i = sched[n]
        for u in addresses(n):
            for e in (0, 1):
                try:
                    ok = sys.family[u + str(e)].points <= spl(sys.family[u], i, e).points
                except DegenerateSection:
                    ok = False
                if not ok:
                    rep.s1.append((u, e, i))
                    if first_only:
                        return rep
    elements = sys.support.ordered
    for n in range(sys.order + 1):
        level = addresses(n)
        for u, v in combinations(level, 2):
            Xu, Xv = sys.family[u], sys.family[v]
            seg = sys.agreement(u, v)
            if Xu.key_sets(seg) != Xv.key_sets(seg):
                rep.s2.append((u, v, seg))
                if first_only:
                    return rep
            for i in elements:
                if i in seg:
                    continue
                if _le_key(Xu, i) & _le_key(Xv, i):
                    rep.s3.append((u, v, i))
                    if first_only:
                        return rep
    return rep


def refine(sys: SplittingSystem, u0: str, X: TreeSystem, check: bool = True) -> SplittingSystem:
    """Shrink X_{u0} to X and re-match the rest of the top level."""
    m = sys.order
    if len(u0) != m:
        raise ConditionError(f"{u0!r} is not a top-level address of order {m}")
    if not X.points <= sys.family[u0].points:
        raise ConditionError("X is not a subset of the member it replaces")
    if check and not is_condition(X):
        raise ConditionError("replacement set fails validation")
    family = dict(sys.family)
    for u in addresses(m):
        seg = sys.agreement(u, u0)
        keys = X.key_sets(seg)
        mask = X.mask(seg)
        Xu = sys.family[u]
        pts = frozenset(p for p in Xu.points if p & mask in keys)
        if not pts:
            raise ConditionError(f"re-matching emptied {u!r}")
        family[u] = Xu.with_points(pts)
    family[u0] = X
    return SplittingSystem(sys.schedule, m, family)


def expand(sys: SplittingSystem) -> SplittingSystem:
    m = sys.order
    if m >= sys.schedule.horizon:
        raise ConditionError(f"horizon {sys.schedule.horizon} exceeded")
    i = sys.schedule[m]
    family = dict(sys.family)
    for u in addresses(m):
        for e in (0, 1):
            family[u + str(e)] = spl(sys.family[u], i, e)
    return SplittingSystem(sys.schedule, m + 1, family)


@dataclass
class FusionResult:
    system: SplittingSystem
    fused: TreeSystem
    cell_map: dict
    pinned_profile: list

    @property
    def min_pinned(self) -> list:
        return [min(p.values(), default=0) for p in self.pinned_profile]


def fuse(sys: SplittingSystem, verify: bool = True) -> FusionResult:
    if verify:
        rep = verify_system(sys, first_only=True)
        if not rep.ok:
            raise ConditionError(f"system fails verification: {rep.lines()}")
    cells = sys.level(sys.order)
    fused = None
    for C in cells.values():
        fused = C if fused is None else fused.union(C)
    profile = []
    for m in range(sys.order + 1):
        per = [pinned_depths(C) for C in sys.level(m).values()]
        profile.append({e: min(p[e] for p in per) for e in sys.support.ordered})
    return FusionResult(sys, fused, cells, profile)


@dataclass
class GenericPoint:
    address: str
    cell: TreeSystem

    @property
    def resolved(self) -> bool:
        return len(self.cell) == 1

    @property
    def point(self):
        return self.cell.point(self.cell.sorted_points[0]) if self.resolved else None


def generic_point(fusion: FusionResult, a: str) -> GenericPoint:
    m = fusion.system.order
    if len(a) < m:
        raise ConditionError(f"address {a!r} shorter than the fusion order {m}")
    return GenericPoint(a[:m], fusion.cell_map[a[:m]])


def check_star(fusion: FusionResult) -> list:
    """Agreement/disjointness law on every pair of top-level cells.

    Returns the list of violations (empty when the law holds).
    """
    sys = fusion.system
    bad = []
    cells = fusion.cell_map
    for u, v in combinations(sorted(cells), 2):
        seg = sys.agreement(u, v)
        if cells[u].key_sets(seg) != cells[v].key_sets(seg):
            bad.append(("agree", u, v, seg))
        for i in sys.support.ordered:
            if i not in seg and _le_key(cells[u], i) & _le_key(cells[v], i):
                bad.append(("disjoint", u, v, i))
    return bad


def fusion_p4(fusion: FusionResult):
    """P-4 on a fully resolved fusion via the branch-address construction.

    For points x_a', x_a'' agreeing on seg & other_seg, build the address a bit by
    bit (copy a' on seg-only coordinates, a'' on other_seg-only ones, either on the
    overlap, 0 elsewhere) and check x_a glues the two projections.  Returns
    None when every case succeeds, otherwise the failing (seg, other_seg, a', a'').
    """
    from .poset import all_initial_segments

    sys = fusion.system
    cells = fusion.cell_map
    if not all(len(C) == 1 for C in cells.values()):
        raise ConditionError("fusion is not fully resolved")
    pts = {a: next(iter(C.points)) for a, C in cells.items()}
    X = fusion.fused
    segs = [s for s in all_initial_segments(sys.poset) if s.members <= sys.support.members]
    sched = sys.schedule
    for seg, other_seg in combinations(segs, 2):
        mx, my = X.mask(seg), X.mask(other_seg)
        mi = mx & my
        for a1, a2 in product(sorted(pts), repeat=2):
            if pts[a1] & mi != pts[a2] & mi:
                continue
            a = []
            for n, (b1, b2) in enumerate(zip(a1, a2)):
                i = sched[n]
                if i in seg and i in other_seg:
                    if b1 != b2:
                        return (seg, other_seg, a1, a2)
                    a.append(b1)
                elif i in seg:
                    a.append(b1)
                elif i in other_seg:
                    a.append(b2)
                else:
                    a.append("0")
            x = pts["".join(a)]
            if x & mx != pts[a1] & mx or x & my != pts[a2] & my:
                return (seg, other_seg, a1, a2)
    return None


def fused_p4_matches(fusion: FusionResult) -> bool:
    """The address construction and the direct scan agree on P-4."""
    return (fusion_p4(fusion) is None) == (p4_scan(fusion.fused) is None)


def verify_and_validate(fusion: FusionResult, modulus_budget=None):
    return validate(fusion.fused, modulus_budget)
