"""Finite-table functions, reducibility, capture and the dichotomy searches.

Every search is budgeted.  Returned certificates are sound (they replay
against their carriers); the searches themselves are not complete, and
say so by returning an ``exhausted`` certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .poset import Schedule, Segment, cone, is_initial_segment, xi_pair
from .precond import (
    BudgetExhausted,
    ConditionError,
    Predicate,
    is_condition,
    localize,
    spl,
)
from .shadow import DegenerateSection, Layout, ShadowPoint, TreeSystem, bitstr, cube_points


class ShadowFunction:
    """F: depth-N points over ``in_support`` -> K-bit outputs, as a table."""

    def __init__(self, in_support: Segment, in_depth: int, out_depth: int, table: dict,
                 name: str = "table"):
        self.in_support = in_support
        self.in_depth = in_depth
        self.out_depth = out_depth
        self.layout = Layout(in_support, in_depth)
        limit = 1 << out_depth
        for v in table.values():
            if not 0 <= v < limit:
                raise ConditionError(f"output {v} does not fit in {out_depth} bits")
        self.table = dict(table)
        self.name = name

    def __call__(self, code) -> int:
        if isinstance(code, ShadowPoint):
            code = code.code
        try:
            return self.table[code]
        except KeyError:
            raise ConditionError(
                f"F is undefined at {self.layout.format(code)}") from None

    def image(self, X: TreeSystem) -> frozenset:
        self._check(X)
        return frozenset(self(p) for p in X.points)

    def _check(self, X: TreeSystem):
        if X.support != self.in_support or X.depth != self.in_depth:
            raise ConditionError("F and X live over different supports or depths")

    def __repr__(self):
        return f"ShadowFunction({self.name}, N={self.in_depth}, K={self.out_depth})"

    # -- generators ---------------------------------------------------------
    @classmethod
    def from_callable(cls, support, depth, out_depth, fn, name="fn"):
        lay = Layout(support, depth)
        table = {c: fn(lay, c) for c in cube_points(support, depth)}
        return cls(support, depth, out_depth, table, name)

    @classmethod
    def const(cls, support, depth, value: int = 0, out_depth: int = 1):
        return cls.from_callable(support, depth, out_depth, lambda lay, c: value, "const")

    @classmethod
    def coord(cls, support, depth, i: str):
        return cls.from_callable(support, depth, depth, lambda lay, c: lay.get(c, i),
                                 f"coord:{i}")

    @classmethod
    def xor(cls, support, depth, a: str, b: str):
        return cls.from_callable(support, depth, depth,
                                 lambda lay, c: lay.get(c, a) ^ lay.get(c, b), f"xor:{a},{b}")

    @classmethod
    def tuple_of(cls, support, depth, i: str, j: str):
        return cls.from_callable(support, depth, 2 * depth,
                                 lambda lay, c: (lay.get(c, i) << depth) | lay.get(c, j),
                                 f"tuple:{i},{j}")

    @classmethod
    def generator(cls, text: str, support, depth):
        kind, _, args = text.partition(":")
        names = [a.strip() for a in args.split(",") if a.strip()]
        if kind == "const":
            return cls.const(support, depth)
        if kind == "coord" and len(names) == 1:
            return cls.coord(support, depth, names[0])
        if kind == "xor" and len(names) == 2:
            return cls.xor(support, depth, *names)
        if kind == "tuple" and len(names) == 2:
            return cls.tuple_of(support, depth, *names)
        raise ConditionError(f"unknown function generator {text!r}")


@dataclass
class Verdict:
    holds: bool
    table: dict | None = None
    witness: tuple | None = None

    def __bool__(self):
        return self.holds


def _members(seg) -> frozenset:
    return seg.members if isinstance(seg, Segment) else frozenset(seg)


def reducible(F: ShadowFunction, seg, X: TreeSystem) -> Verdict:
    """F(x) depends only on x|seg over X.  On success ``table`` is H."""
    F._check(X)
    m = X.mask(_members(seg) & X.support.members)
    H: dict = {}
    src: dict = {}
    for p in X.sorted_points:
        k = p & m
        v = F(p)
        if k in H and H[k] != v:
            return Verdict(False, witness=(X.point(src[k]), X.point(p)))
        H.setdefault(k, v)
        src.setdefault(k, p)
    return Verdict(True, table=H)


def captures(F: ShadowFunction, i: str, X: TreeSystem) -> Verdict:
    """x(i) is a function of F(x) over X.  On success ``table`` is E."""
    F._check(X)
    E: dict = {}
    src: dict = {}
    for p in X.sorted_points:
        v = F(p)
        val = X.coord(p, i)
        if v in E and E[v] != val:
            return Verdict(False, witness=(X.point(src[v]), X.point(p)))
        E.setdefault(v, val)
        src.setdefault(v, p)
    return Verdict(True, table=E)


def check_inter(F: ShadowFunction, seg, other_seg, X: TreeSystem) -> bool:
    if not is_condition(X):
        raise ConditionError("X does not validate")
    if not reducible(F, seg, X) or not reducible(F, other_seg, X):
        raise ConditionError("F is not reducible to both segments")
    return reducible(F, _members(seg) & _members(other_seg), X).holds


# ---------------------------------------------------------------------------
# certificates

KINDS = ("reduced", "captured", "captured_all", "separated", "exhausted")


@dataclass
class Certificate:
    kind: str
    carrier: TreeSystem
    segment: Segment | None = None
    element: str | None = None
    elements: tuple = ()
    table: dict | None = None
    other: TreeSystem | None = None
    validated: bool = True
    budget: int | None = None
    reason: str = ""
    steps: list = field(default_factory=list)

    def replay(self, F: ShadowFunction) -> bool:
        """Recheck the claim from scratch against the carrier(s)."""
        if self.kind == "exhausted":
            return True
        if self.validated and not is_condition(self.carrier):
            return False
        if self.kind == "reduced":
            v = reducible(F, self.segment, self.carrier)
            return v.holds and v.table == self.table
        if self.kind == "captured":
            v = captures(F, self.element, self.carrier)
            return v.holds and v.table == self.table
        if self.kind == "captured_all":
            return all(captures(F, i, self.carrier).holds for i in self.elements)
        if self.kind == "separated":
            X1, X2 = self.carrier, self.other
            if self.validated and not is_condition(X2):
                return False
            return (not F.image(X1) & F.image(X2)
                    and X1.key_sets(self.segment) == X2.key_sets(self.segment))
        raise ValueError(f"unknown certificate kind {self.kind!r}")

    def summary(self) -> str:
        if self.kind == "reduced":
            return f"Reduced({self.segment})"
        if self.kind == "captured":
            return f"Captured({self.element})"
        if self.kind == "captured_all":
            return "CapturedAll({" + ",".join(self.elements) + "})"
        if self.kind == "separated":
            return f"Separated(|Z1|={len(self.carrier)}, |Z2|={len(self.other)})"
        return f"Exhausted(budget={self.budget}: {self.reason})"

    def to_dict(self, F: "ShadowFunction | None" = None) -> dict:
        out = {"kind": self.kind, "summary": self.summary(),
               "carrier": self.carrier.strings(), "validated": self.validated}
        if self.segment is not None:
            out["segment"] = list(self.segment.ordered)
        if self.element is not None:
            out["element"] = self.element
        if self.elements:
            out["elements"] = list(self.elements)
        if self.table is not None:
            out["table"] = self._table_rows(F)
        if self.other is not None:
            out["other"] = self.other.strings()
        if self.kind == "exhausted":
            out["budget"] = self.budget
            out["reason"] = self.reason
        return out

    def _table_rows(self, F=None):
        X = self.carrier

        def out(v):
            return bitstr(v, F.out_depth) if F is not None else v
        if self.kind == "reduced":
            sub = Layout(self.segment, X.depth)
            proj = X.layout.projector(sub)
            return [[sub.format(proj(k)), out(v)] for k, v in sorted(self.table.items())]
        return [[out(k), bitstr(v, X.depth)] for k, v in sorted(self.table.items())]


def _exhausted(X, budget, reason, steps=None):
    return Certificate("exhausted", X, validated=False, budget=budget, reason=reason,
                       steps=steps or [])


# ---------------------------------------------------------------------------
# separation

def _first_diff(a: int, b: int, K: int) -> int:
    return K - (a ^ b).bit_length()


def _prefix_region(F: ShadowFunction, value: int, length: int) -> Predicate:
    shift = F.out_depth - length
    want = value >> shift

    def inside(pt):
        return F(pt.code) >> shift == want
    return Predicate(inside)


def _match(X: TreeSystem, Y: TreeSystem, seg) -> TreeSystem:
    """Points of X whose seg-projection occurs in Y."""
    keys = Y.key_sets(seg)
    m = X.mask(seg)
    return X.with_points(p for p in X.points if p & m in keys)


def separate_or_reduce(F: ShadowFunction, seg, X1: TreeSystem, X2: TreeSystem,
                       schedule: Schedule, strict: bool = True) -> Certificate:
    """Either F is reducible to seg on X1 u X2, or shrink to separated pieces.

    ``strict`` demands that both returned pieces validate; the fusion
    searches relax this for intermediate cells and validate their final
    carrier instead.
    """
    seg = Segment(X1.poset, _members(seg) & X1.support.members)
    if not is_initial_segment(X1.poset, seg.members):
        raise ConditionError(f"{seg} is not an initial segment")
    if X1.key_sets(seg) != X2.key_sets(seg):
        raise ConditionError("X1 and X2 have different projections to seg")
    union = X1.union(X2)
    v = reducible(F, seg, union)
    if v:
        return Certificate("reduced", union, segment=seg, table=v.table, validated=False)
    if not F.image(X1) & F.image(X2):
        return Certificate("separated", X1, segment=seg, other=X2, validated=strict)
    m = X1.mask(seg)
    by_key: dict = {}
    for p in X2.sorted_points:
        by_key.setdefault(p & m, []).append(p)
    K = F.out_depth
    vals1: dict = {}
    for p in X1.points:
        vals1.setdefault(p & m, set()).add(F(p))
    vals2 = {k: {F(q) for q in qs} for k, qs in by_key.items()}
    t = min(_first_diff(a, b, K) for k, A in vals1.items() for a in A
            for b in vals2.get(k, ()) if a != b)
    # first witness pair in point order reaching the least differing bit
    x1, x2 = next((p, q) for p in X1.sorted_points for q in by_key.get(p & m, ())
                  if F(p) != F(q) and _first_diff(F(p), F(q), K) == t)
    U1 = _prefix_region(F, F(x1), t + 1)
    U2 = _prefix_region(F, F(x2), t + 1)
    try:
        X1a = localize(X1, schedule, x1, U1, skip_pinned=not strict)
        X2a = _match(X2, X1a, seg)
        Z2 = localize(X2a, schedule, x2, U2, skip_pinned=not strict)
    except (BudgetExhausted, DegenerateSection) as exc:
        return _exhausted(union, schedule.horizon, f"localization failed: {exc}")
    Z1 = _match(X1a, Z2, seg)
    if strict and not (is_condition(Z1) and is_condition(Z2)):
        return _exhausted(union, schedule.horizon, "separated pieces do not validate")
    return Certificate("separated", Z1, segment=seg, other=Z2, validated=strict)


# ---------------------------------------------------------------------------
# fusion with pairwise reduction/separation

def _rematch(level: dict, u0: str, X: TreeSystem, xi_of) -> dict:
    out = {}
    for w, Y in level.items():
        out[w] = X if w == u0 else _match(Y, X, xi_of(w, u0))
    return out


def star_fusion(F: ShadowFunction, X: TreeSystem, schedule: Schedule, order: int,
                stop=None, after_level=None):
    """Fusion to ``order`` where every top-level pair is reduced or separated.

    ``stop(u, v, seg, cert, level)`` and ``after_level(level)`` may return a
    certificate to end early.  Returns (level dict, None) or
    (None, certificate).
    """
    if order > schedule.horizon:
        raise ConditionError(f"budget {order} exceeds schedule horizon {schedule.horizon}")
    poset, support = X.poset, X.support

    def xi_of(u, v):
        return xi_pair(poset, schedule, u, v) & support

    level = {"": X}
    for m in range(order):
        i = schedule[m]
        nxt = {}
        for u in sorted(level):
            for e in (0, 1):
                try:
                    nxt[u + str(e)] = spl(level[u], i, e)
                except DegenerateSection as exc:
                    return None, _exhausted(X, order, f"level {m + 1}: {exc}")
        level = nxt
        for u, v in combinations(sorted(level), 2):
            seg = xi_of(u, v)
            cert = separate_or_reduce(F, seg, level[u], level[v], schedule, strict=False)
            if stop is not None:
                early = stop(u, v, seg, cert, level)
                if early is not None:
                    return None, early
            if cert.kind == "exhausted":
                cert.reason = f"level {m + 1} pair ({u},{v}): {cert.reason}"
                cert.carrier, cert.budget = X, order
                return None, cert
            if cert.kind == "separated":
                level = _rematch(level, u, cert.carrier, xi_of)
                level = _rematch(level, v, cert.other, xi_of)
        if after_level is not None:
            early = after_level(level)
            if early is not None:
                return None, early
    return level, None


def pin(X: TreeSystem, i: str) -> TreeSystem:
    """Keep, over each [<i]-projection, only the smallest i-leaf.

    This is where iterating spl(., i, 0) ends up; at finite depth it plays
    the part of the fusion limit along coordinate i.
    """
    lay = X.layout
    m = lay.mask(X.poset.below(i))
    low: dict = {}
    for p in X.points:
        k, v = p & m, lay.get(p, i)
        if v < low.get(k, v + 1):
            low[k] = v
    return X.with_points(p for p in X.points if lay.get(p, i) == low[p & m])


def pinned_level(level: dict, i: str, xi_of) -> dict:
    """Pin i in every cell, re-matching the others after each one."""
    level = dict(level)
    for u in sorted(level):
        level = _rematch(level, u, pin(level[u], i), xi_of)
    return level


def _union(level: dict) -> TreeSystem:
    cells = list(level.values())
    out = cells[0]
    for C in cells[1:]:
        out = out.union(C)
    return out


def capture_or_reduce(F: ShadowFunction, i: str, X: TreeSystem, schedule: Schedule,
                      budget: int) -> Certificate:
    """Find a sub-carrier on which F is reducible to [not>=i] or captures i."""
    F._check(X)
    not_ge = cone(X.poset, i, "not_ge") & X.support
    v = captures(F, i, X)
    if v and is_condition(X):
        return Certificate("captured", X, element=i, table=v.table)
    r = reducible(F, not_ge, X)
    if r and is_condition(X):
        return Certificate("reduced", X, segment=not_ge, table=r.table)

    def stop(u, w, seg, cert, level):
        if cert.kind != "reduced" or i in seg:
            return None
        for cell in (level[u], level[w]):
            if is_condition(cell):
                return Certificate("reduced", cell, segment=not_ge,
                                   table=reducible(F, not_ge, cell).table)
        return None

    def xi_of(u, w):
        return xi_pair(X.poset, schedule, u, w) & X.support

    def after_level(level):
        for cand in (level, pinned_level(level, i, xi_of)):
            if any(not C.points for C in cand.values()):
                continue
            fused = _union(cand)
            v = captures(F, i, fused)
            if v and is_condition(fused):
                depth = len(next(iter(cand)))
                how = "pinned" if cand is not level else "fused"
                return Certificate("captured", fused, element=i, table=v.table, budget=budget,
                                   steps=[f"{how} union after level {depth}"])
        return None

    level, cert = star_fusion(F, X, schedule, budget, stop, after_level)
    if cert is not None:
        return cert
    fused = _union(level)
    if not captures(F, i, fused):
        return _exhausted(X, budget, f"fused carrier does not capture {i}")
    return _exhausted(X, budget, "fused carrier does not validate")


def dichotomy(F: ShadowFunction, seg, X: TreeSystem, schedule: Schedule,
              budget: int) -> Certificate:
    """Find a carrier where F is reducible to seg or captures some i outside seg."""
    F._check(X)
    seg = Segment(X.poset, _members(seg) & X.support.members)
    r = reducible(F, seg, X)
    if r and is_condition(X):
        return Certificate("reduced", X, segment=seg, table=r.table)
    outside = [i for i in X.support.ordered if i not in seg]
    for i in outside:
        cert = capture_or_reduce(F, i, X, schedule, budget)
        if cert.kind == "captured":
            return cert
    # every probe failed to capture: carry reductions down a fusion
    if budget > schedule.horizon:
        raise ConditionError(f"budget {budget} exceeds schedule horizon {schedule.horizon}")
    poset, support = X.poset, X.support

    def xi_of(u, v):
        return xi_pair(poset, schedule, u, v) & support

    level = {"": X}
    for m in range(budget):
        j = schedule[m]
        if j not in seg:
            for u in sorted(level):
                cert = capture_or_reduce(F, j, level[u], schedule, budget)
                if cert.kind == "captured":
                    return cert
                if cert.kind != "reduced":
                    return _exhausted(X, budget, f"level {m} cell {u!r}: {cert.reason}")
                level = _rematch(level, u, cert.carrier, xi_of)
        nxt = {}
        for u in sorted(level):
            for e in (0, 1):
                try:
                    nxt[u + str(e)] = spl(level[u], j, e)
                except DegenerateSection as exc:
                    return _exhausted(X, budget, f"level {m + 1}: {exc}")
        level = nxt
    fused = _union(level)
    r = reducible(F, seg, fused)
    if r and is_condition(fused):
        return Certificate("reduced", fused, segment=seg, table=r.table, budget=budget)
    return _exhausted(X, budget, "fused carrier is not reducible to the segment")


def capture_all(F: ShadowFunction, seg, X: TreeSystem, schedule: Schedule,
                budget: int) -> Certificate:
    """One carrier on which F captures every element of seg."""
    F._check(X)
    elements = tuple(e for e in X.support.ordered if e in _members(seg))
    if all(captures(F, i, X) for i in elements) and is_condition(X):
        return Certificate("captured_all", X, elements=elements)
    for i in elements:
        probe = capture_or_reduce(F, i, X, schedule, budget)
        if probe.kind != "captured":
            return _exhausted(X, budget, f"probe for {i} gave {probe.summary()}")
    def xi_of(u, w):
        return xi_pair(X.poset, schedule, u, w) & X.support

    def after_level(level):
        pinned = level
        for i in elements:
            pinned = pinned_level(pinned, i, xi_of)
        for cand in (level, pinned):
            if any(not C.points for C in cand.values()):
                continue
            fused = _union(cand)
            if all(captures(F, i, fused) for i in elements) and is_condition(fused):
                return Certificate("captured_all", fused, elements=elements, budget=budget)
        return None

    level, cert = star_fusion(F, X, schedule, budget, after_level=after_level)
    if cert is not None:
        return cert
    return _exhausted(X, budget, "fused carrier misses a capture")
