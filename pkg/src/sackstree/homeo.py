"""Cell correspondence between two conditions and the induced point map.

Two conditions split along the same schedule give matching cells X[u],
Y[u].  Where both cells have shrunk to single points the pairing is an
honest point map x_u -> y_u, and the projection laws can be checked on it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product

from .poset import Schedule, Segment, all_initial_segments
from .precond import ConditionError, amalgam, iterate_spl, restrict, spl, validate
from .shadow import DegenerateSection, SectionTree, TreeSystem, sections, spl1d


class PreconditionError(ConditionError):
    pass


class TransferError(ConditionError):
    pass


def _step(C: TreeSystem, i: str, e: int) -> TreeSystem:
    """spl, except a coordinate already pinned in every section stays put."""
    secs = sections(C, i)
    if all(len(v) == 1 for v in secs.values()):
        return C
    return spl(C, i, e)


@dataclass
class CellHomeo:
    source: TreeSystem
    target: TreeSystem
    schedule: Schedule
    order: int
    pairs: dict
    point_map: dict = field(default_factory=dict)

    @property
    def resolved(self) -> list:
        return [u for u, (a, b) in self.pairs.items() if len(a) == 1 and len(b) == 1]

    @property
    def fully_resolved(self) -> bool:
        return len(self.resolved) == len(self.pairs)

    def resolved_points(self) -> dict:
        """u -> (x_u, y_u) codes on resolved cells."""
        return {u: (next(iter(self.pairs[u][0].points)), next(iter(self.pairs[u][1].points)))
                for u in self.resolved}

    def is_bijective(self) -> bool:
        pts = self.resolved_points()
        xs = {x for x, _ in pts.values()}
        ys = {y for _, y in pts.values()}
        return len(xs) == len(ys) == len(pts)

    def image(self, codes) -> TreeSystem:
        return self.target.with_points(self.point_map[c] for c in codes)


def build_homeo(X: TreeSystem, Y: TreeSystem, schedule: Schedule, order: int) -> CellHomeo:
    if X.support != Y.support or X.depth != Y.depth:
        raise ConditionError("source and target live over different supports or depths")
    if order > schedule.horizon:
        raise ConditionError(f"order {order} exceeds horizon {schedule.horizon}")
    pairs = {"": (X, Y)}
    for n in range(order):
        i = schedule[n]
        nxt = {}
        for u, (A, B) in pairs.items():
            for e in (0, 1):
                try:
                    nxt[u + str(e)] = (_step(A, i, e), _step(B, i, e))
                except DegenerateSection as exc:
                    raise ConditionError(f"degenerate split at step {n}, cell {u!r}: {exc}")
        pairs = nxt
    h = CellHomeo(X, Y, schedule, order, pairs)
    point_map = {}
    for x, y in h.resolved_points().values():
        if point_map.setdefault(x, y) != y:
            point_map = None
            break
    h.point_map = point_map if point_map is not None else {}
    return h


def resolving_schedule(X: TreeSystem) -> Schedule:
    """Round robin hitting each coordinate exactly as often as it can split.

    Needs every section of a coordinate to hang below a stem of one
    common length (true for sets built from full cubes by spl); the
    number of splits left is depth minus that stem.
    """
    left = {}
    for e in X.support.ordered:
        stems = set()
        for leaves in sections(X, e).values():
            stem = X.depth - (min(leaves) ^ max(leaves)).bit_length()
            if len(leaves) != 1 << (X.depth - stem):
                raise ConditionError(f"sections of {e!r} are not full cones")
            stems.add(stem)
        if len(stems) != 1:
            raise ConditionError(f"sections of {e!r} have unequal stems")
        left[e] = X.depth - stems.pop()
    values = []
    while any(left.values()):
        for e in X.support.ordered:
            if left[e]:
                values.append(e)
                left[e] -= 1
    return Schedule(X.poset, X.support, values, 0)


def _segments(h: CellHomeo):
    return [s for s in all_initial_segments(h.source.poset)
            if s.members <= h.source.support.members]


def check_h1(h: CellHomeo, seg: Segment | None = None):
    """x_a|seg = x_b|seg iff y_a|seg = y_b|seg over resolved cells.

    Returns None when the law holds for ``seg`` (or every initial segment),
    else (seg, a, b).
    """
    pts = h.resolved_points()
    segs = [seg] if seg is not None else _segments(h)
    X, Y = h.source, h.target
    for s in segs:
        mx, my = X.mask(s), Y.mask(s)
        by_x: dict = {}
        by_y: dict = {}
        for u in sorted(pts):
            x, y = pts[u]
            by_x.setdefault(x & mx, []).append(u)
            by_y.setdefault(y & my, []).append(u)
        cls_x = {u: tuple(by_x[pts[u][0] & mx]) for u in pts}
        cls_y = {u: tuple(by_y[pts[u][1] & my]) for u in pts}
        for u in sorted(pts):
            if cls_x[u] != cls_y[u]:
                other = sorted(set(cls_x[u]) ^ set(cls_y[u]))[0]
                return (s, u, other)
    return None


def check_h2(h: CellHomeo, seg: Segment) -> bool:
    """If X|seg = Y|seg then every resolved pair agrees on seg."""
    if h.source.key_sets(seg) != h.target.key_sets(seg):
        raise PreconditionError(f"X and Y differ on their projections to {seg}")
    m = h.source.mask(seg)
    return all(x & m == y & m for x, y in h.resolved_points().values())


def check_cells(h: CellHomeo):
    """Both sides show the same agreement and disjointness pattern.

    For every pair of cells and every initial segment seg: projections to
    seg equal on one side iff on the other, and likewise disjoint.
    Returns None or the first (seg, u, v, kind) mismatch.
    """
    us = sorted(h.pairs)
    for s in _segments(h):
        for a in range(len(us)):
            for b in range(a + 1, len(us)):
                u, v = us[a], us[b]
                (A1, B1), (A2, B2) = h.pairs[u], h.pairs[v]
                ka1, ka2 = A1.key_sets(s), A2.key_sets(s)
                kb1, kb2 = B1.key_sets(s), B2.key_sets(s)
                if (ka1 == ka2) != (kb1 == kb2):
                    return (s, u, v, "equal")
                if (not ka1 & ka2) != (not kb1 & kb2):
                    return (s, u, v, "disjoint")
    return None


def sample_h3(h: CellHomeo, rng: random.Random, samples: int = 8) -> list:
    """Images of validated subsets built by spl/amalgam; returns failures."""
    if not h.fully_resolved or not h.point_map:
        raise ConditionError("h3 sampling needs a fully resolved bijective map")
    X = h.source
    bad = []
    segs = [s for s in _segments(h) if 0 < len(s) < len(X.support)]
    for _ in range(samples):
        depth = rng.randrange(0, h.order + 1)
        u = "".join(rng.choice("01") for _ in range(depth))
        try:
            sub = iterate_spl(X, h.schedule, u)
        except DegenerateSection:
            continue
        if segs and rng.random() < 0.5:
            s = rng.choice(segs)
            proj = restrict(sub, s)
            keep = rng.sample(sorted(proj.points), max(1, len(proj) // 2))
            try:
                sub = amalgam(sub, proj.with_points(keep))
            except ConditionError:
                continue
        if not validate(sub).ok:
            continue
        img = h.image(sub.points)
        if not validate(img).ok:
            bad.append((u, sub))
    return bad


# ---------------------------------------------------------------------------
# one-dimensional transfer

def split_addresses(P: SectionTree) -> dict:
    """leaf -> its address in P's splitting tree."""
    out = {}
    stack = [("", P)]
    while stack:
        a, A = stack.pop()
        if len(A) == 1:
            out[next(iter(A.leaves))] = a
            continue
        stack.append((a + "1", spl1d(A, 1)))
        stack.append((a + "0", spl1d(A, 0)))
    return out


def iterate_spl1d(A: SectionTree, u: str) -> SectionTree:
    for n, bit in enumerate(u):
        if len(A) < 2:
            raise TransferError(f"tree resolved after {n} steps of {u!r}")
        A = spl1d(A, int(bit))
    return A


def transfer_map(P: SectionTree, Q: SectionTree) -> dict:
    """f(p_a) = q_a, matching leaves by splitting address."""
    ap = split_addresses(P)
    aq = {a: q for q, a in split_addresses(Q).items()}
    if set(ap.values()) != set(aq):
        raise TransferError("P and Q resolve at different splitting addresses")
    return {p: aq[a] for p, a in ap.items()}


@dataclass
class Transfer:
    image: SectionTree
    expected: SectionTree
    s_source: str
    s_target: str

    @property
    def ok(self) -> bool:
        return self.image == self.expected and self.s_source == self.s_target


def maximal_split_address(P: SectionTree, sub: SectionTree) -> str:
    """The longest s with sub inside P[s]."""
    if not sub.leaves <= P.leaves:
        raise TransferError("not a subset")
    s, A = "", P
    while len(A) > 1:
        for e in (0, 1):
            B = spl1d(A, e)
            if sub.leaves <= B.leaves:
                s, A = s + str(e), B
                break
        else:
            break
    return s


def transfer_1d(P: SectionTree, Q: SectionTree, Pp: SectionTree, u: str) -> Transfer:
    """f''(P'[u]) together with (f''P')[u] and the maximal addresses."""
    if not Pp.leaves <= P.leaves:
        raise TransferError("P' is not inside P")
    f = transfer_map(P, Q)
    image_full = SectionTree(Q.depth, frozenset(f[p] for p in Pp.leaves))
    cell = iterate_spl1d(Pp, u)
    image = SectionTree(Q.depth, frozenset(f[p] for p in cell.leaves))
    expected = iterate_spl1d(image_full, u)
    return Transfer(image, expected, maximal_split_address(P, cell),
                    maximal_split_address(Q, image))


# shapes: None is a leaf, (left, right) a splitting node

def random_shape(rng: random.Random, height: int, p_split: float = 0.7):
    if height == 0 or rng.random() > p_split:
        return None
    return (random_shape(rng, height - 1, p_split), random_shape(rng, height - 1, p_split))


def shape_height(shape) -> int:
    return 0 if shape is None else 1 + max(shape_height(shape[0]), shape_height(shape[1]))


def realize(shape, depth: int, rng: random.Random) -> SectionTree:
    """A depth-``depth`` tree whose splitting structure is ``shape``."""
    if shape_height(shape) > depth:
        raise TransferError("depth too small for the shape")
    leaves = []

    def walk(node, prefix, left):
        if node is None:
            tail = rng.getrandbits(left) if left else 0
            leaves.append((prefix << left) | tail)
            return
        room = left - shape_height(node)
        stem = rng.randrange(room + 1)
        bits = rng.getrandbits(stem) if stem else 0
        base = (prefix << stem) | bits
        walk(node[0], base << 1, left - stem - 1)
        walk(node[1], (base << 1) | 1, left - stem - 1)

    walk(shape, 0, depth)
    return SectionTree(depth, frozenset(leaves))


def enumerate_subtrees(P: SectionTree):
    """Every union of cells P[s] (nonempty), as the candidate P' sets."""
    cells = {}
    stack = [("", P)]
    while stack:
        a, A = stack.pop()
        cells[a] = A
        if len(A) > 1:
            stack.append((a + "0", spl1d(A, 0)))
            stack.append((a + "1", spl1d(A, 1)))
    return cells


def all_addresses(max_len: int):
    for n in range(max_len + 1):
        for t in product("01", repeat=n):
            yield "".join(t)
