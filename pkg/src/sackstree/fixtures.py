"""JSON fixture formats for posets, schedules, conditions, systems and functions.

Condition, system and function fixtures may carry their poset inline
under "poset"; otherwise the caller supplies one.
"""
from __future__ import annotations

import json
from pathlib import Path

from .poset import FinitePoset, PosetError, Schedule
from .precond import ConditionError
from .reduce import ShadowFunction
from .shadow import Layout, ShadowError, TreeSystem, bitstr
from .splitsys import SplittingSystem


class FixtureError(ValueError):
    pass


def load_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FixtureError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path}: malformed JSON ({exc})") from None


def dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise FixtureError(f"{where} fixture lacks {key!r}")
    return obj[key]


def poset_from_json(obj) -> FinitePoset:
    elements = _need(obj, "elements", "poset")
    try:
        return FinitePoset(elements, [tuple(p) for p in obj.get("lt", [])])
    except (PosetError, TypeError, ValueError) as exc:
        raise FixtureError(f"bad poset: {exc}") from None


def poset_to_json(P: FinitePoset) -> dict:
    pairs = sorted(P.lt, key=lambda ab: (P.index[ab[0]], P.index[ab[1]]))
    return {"elements": list(P.elements), "lt": [list(p) for p in pairs]}


def _poset(obj, poset):
    if isinstance(obj, dict) and "poset" in obj:
        return poset_from_json(obj["poset"])
    if poset is None:
        raise FixtureError("no poset given (embed one under 'poset' or pass it separately)")
    return poset


def schedule_from_json(obj, poset=None) -> Schedule:
    P = _poset(obj, poset)
    try:
        return Schedule(P, _need(obj, "support", "schedule"), _need(obj, "values", "schedule"),
                        int(obj.get("fairness", 0)))
    except (PosetError, TypeError, ValueError) as exc:
        raise FixtureError(f"bad schedule: {exc}") from None


def schedule_to_json(S: Schedule, with_poset: bool = True) -> dict:
    out = {"support": list(S.support.ordered), "values": list(S.values), "fairness": S.fairness}
    if with_poset:
        out["poset"] = poset_to_json(S.poset)
    return out


def condition_from_json(obj, poset=None) -> TreeSystem:
    P = _poset(obj, poset)
    try:
        support = P.segment(_need(obj, "support", "condition"))
        depth = int(_need(obj, "depth", "condition"))
        points = _need(obj, "points", "condition")
        if not isinstance(points, list):
            raise FixtureError("condition 'points' must be a list")
        return TreeSystem.from_strings(support, depth, points)
    except (PosetError, ShadowError, TypeError) as exc:
        raise FixtureError(f"bad condition: {exc}") from None


def condition_to_json(X: TreeSystem, with_poset: bool = True) -> dict:
    out = {"support": list(X.support.ordered), "depth": X.depth, "points": X.strings()}
    if with_poset:
        out = {"poset": poset_to_json(X.poset), **out}
    return out


def system_from_json(obj, poset=None) -> SplittingSystem:
    P = _poset(obj, poset)
    sched = schedule_from_json(_need(obj, "schedule", "system"), P)
    family = _need(obj, "family", "system")
    if not isinstance(family, dict) or "" not in family:
        raise FixtureError("system family must map bit strings to conditions, including ''")
    fam = {}
    for key, cond in family.items():
        if set(key) - {"0", "1"}:
            raise FixtureError(f"bad address {key!r}")
        fam[key] = condition_from_json(cond, P)
    order = max(len(k) for k in fam)
    try:
        return SplittingSystem(sched, order, fam)
    except ConditionError as exc:
        raise FixtureError(f"bad system: {exc}") from None


def system_to_json(sys: SplittingSystem) -> dict:
    return {
        "poset": poset_to_json(sys.poset),
        "schedule": schedule_to_json(sys.schedule, with_poset=False),
        "family": {u: condition_to_json(X, with_poset=False) for u, X in sys.family.items()},
    }


def function_from_json(obj, poset=None) -> ShadowFunction:
    P = _poset(obj, poset)
    try:
        support = P.segment(_need(obj, "in_support", "function"))
        depth = int(_need(obj, "in_depth", "function"))
        if "generator" in obj:
            return ShadowFunction.generator(obj["generator"], support, depth)
        K = int(_need(obj, "out_depth", "function"))
        lay = Layout(support, depth)
        table = {}
        for row in _need(obj, "table", "function"):
            pt, out = row
            if len(out) != K or set(out) - {"0", "1"}:
                raise FixtureError(f"bad output {out!r} for out_depth {K}")
            table[lay.parse(pt)] = int(out, 2) if out else 0
        return ShadowFunction(support, depth, K, table, obj.get("name", "table"))
    except (PosetError, ShadowError, ConditionError, TypeError, ValueError) as exc:
        if isinstance(exc, FixtureError):
            raise
        raise FixtureError(f"bad function: {exc}") from None


def function_to_json(F: ShadowFunction, with_poset: bool = True) -> dict:
    lay = F.layout
    out = {"in_support": list(F.in_support.ordered), "in_depth": F.in_depth,
           "out_depth": F.out_depth, "name": F.name,
           "table": [[lay.format(c), bitstr(v, F.out_depth)] for c, v in sorted(F.table.items())]}
    if with_poset:
        out = {"poset": poset_to_json(F.in_support.poset), **out}
    return out
