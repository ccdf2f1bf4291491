"""Small scripted scenarios shared by the CLI demos and the tests."""
from __future__ import annotations

from dataclasses import dataclass

from .homeo import build_homeo, check_cells, check_h1, check_h2, resolving_schedule
from .poset import FinitePoset, Schedule
from .precond import ShrinkReport, shrink_check, spl, validate
from .shadow import Layout, TreeSystem
from .splitsys import SplittingSystem, check_star, fuse, refine, verify_system


def constant_first_bit(L: int, N: int) -> TreeSystem:
    """Points over the chain p0<...<p_{L-1} whose coordinates all start with
    the same bit, and whose minimal coordinate is 0^N or 1^N.

    Pinning the minimal coordinate stands in for the infinitely many
    splits below it that a finite chain cannot supply.
    """
    if L < 2 or N < 2:
        raise ValueError("need chain length >= 2 and depth >= 2")
    P = FinitePoset.chain(L)
    lay = Layout(P.full, N)
    rest = N - 1
    pts = []
    for b in (0, 1):
        head = (1 << N) - 1 if b else 0
        for tail in range(1 << (rest * (L - 1))):
            vals = {"p0": head}
            for k in range(1, L):
                chunk = (tail >> (rest * (k - 1))) & ((1 << rest) - 1)
                vals[f"p{k}"] = (b << rest) | chunk
            pts.append(lay.pack(vals))
    return TreeSystem(P.full, N, pts)


def minimal_omitting_schedule(X: TreeSystem) -> Schedule:
    """Every non-minimal element depth-1 times, the minimal one never."""
    P = X.poset
    others = [e for e in P.elements if P.below(e)]
    return Schedule(P, P.full, others * (X.depth - 1), 0)


def fair_schedule(X: TreeSystem) -> Schedule:
    P = X.poset
    others = [e for e in P.elements if P.below(e)]
    minimal = [e for e in P.elements if not P.below(e)]
    return Schedule(P, P.full, minimal + others * (X.depth - 1), 1)


@dataclass
class NonshrinkReport:
    omitting: ShrinkReport
    fair: ShrinkReport

    def lines(self):
        return [
            f"minimal-omitting schedule: branches={len(self.omitting.branches)} "
            f"residuals={sorted(set(self.omitting.residuals.values()))}",
            f"fair schedule: branches={len(self.fair.branches)} "
            f"residuals={sorted(set(self.fair.residuals.values()))}",
        ]

    @property
    def ok(self):
        return (set(self.omitting.residuals.values()) == {2}
                and set(self.fair.residuals.values()) == {1})


def nonshrinkable(L: int, N: int) -> NonshrinkReport:
    X = constant_first_bit(L, N)
    return NonshrinkReport(shrink_check(X, minimal_omitting_schedule(X)),
                           shrink_check(X, fair_schedule(X)))


def fusion_walkthrough(L: int, N: int) -> list[str]:
    """Canonical system, one refinement, fusion, validation."""
    P = FinitePoset.chain(L)
    X = TreeSystem.full_cube(P.full, N)
    S = Schedule.round_robin(P, rounds=N)
    m = max(1, min(L - 1, S.horizon))
    sys = SplittingSystem.canonical(X, S, m)
    out = [f"canonical system of order {m}: {verify_system(sys).lines()}"]
    u0 = "0" * m
    last = P.elements[-1]
    sub = spl(sys[u0], last, 0)
    sys = refine(sys, u0, sub)
    out.append(f"refined cell {u0!r} by splitting {last}: {verify_system(sys).lines()}")
    res = fuse(sys)
    out.append(f"fused: {len(res.fused)} points in {len(res.cell_map)} cells")
    out.append(f"agreement/disjointness violations: {len(check_star(res))}")
    out.append(f"pinned profile (min per level): {res.min_pinned}")
    out.extend(validate(res.fused).lines())
    return out


def homeo_walkthrough(L: int, N: int) -> list[str]:
    P = FinitePoset.chain(L)
    X = TreeSystem.full_cube(P.full, N)
    last = P.elements[-1]
    A, B = spl(X, last, 0), spl(X, last, 1)
    S = resolving_schedule(A)
    h = build_homeo(A, B, S, S.horizon)
    out = [f"schedule {list(S.values)}; resolved cells {len(h.resolved)}/{len(h.pairs)}; "
           f"bijective={h.is_bijective()}"]
    out.append(f"h1 violations: {check_h1(h)}")
    out.append(f"cell pattern mismatch: {check_cells(h)}")
    below = P.segment(P.elements[:-1])
    out.append(f"h2 on {below}: {check_h2(h, below)}")
    return out
