"""Command line front end.

Exit codes: 0 success or property holds, 1 property fails or an
operation errs, 2 malformed input or cap violation, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import shlex
import sys
from pathlib import Path

from . import fixtures as fx
from .homeo import PreconditionError, build_homeo, check_cells, check_h1, check_h2, resolving_schedule
from .poset import PosetError, Schedule, xi_pair
from .precond import (
    BudgetExhausted,
    ConditionError,
    amalgam,
    iterate_spl,
    restrict,
    spl,
    validate,
)
from .reduce import (
    Certificate,
    capture_all,
    capture_or_reduce,
    dichotomy,
    reducible,
)
from .scenarios import fusion_walkthrough, homeo_walkthrough, nonshrinkable
from .shadow import BIT_CAP, DegenerateSection, ShadowError, TreeSystem
from .splitsys import ORDER_CAP, SplittingSystem, check_star, expand, fuse, refine, verify_system

OK, FAIL, BAD_INPUT, EXHAUSTED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _cap_message(exc) -> str:
    return f"cap exceeded (|support|*depth <= {BIT_CAP} bits, order <= {ORDER_CAP}): {exc}"


def _emit(lines, out=None):
    for line in lines:
        print(line, file=out or sys.stdout)


def _poset_arg(args):
    return fx.poset_from_json(fx.load_json(args.poset)) if getattr(args, "poset", None) else None


def _write_json(args, payload):
    if getattr(args, "json", None):
        fx.dump_json(payload, args.json)


def _segment(P, text):
    names = [t for t in (text or "").replace(";", ",").split(",") if t.strip()]
    try:
        return P.segment(n.strip() for n in names)
    except PosetError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands

def cmd_check(args) -> int:
    X = fx.condition_from_json(fx.load_json(args.condition), _poset_arg(args))
    sched = None
    if args.schedule:
        sched = fx.schedule_from_json(fx.load_json(args.schedule), X.poset)
    rep = validate(X, args.modulus, args.openness, sched)
    _emit([f"points: {len(X)}", f"support: {X.support}", f"depth: {X.depth}"] + rep.lines())
    ok = rep.ok and (rep.shrink is None or rep.shrink.shrunk)
    _emit([f"result: {'pass' if ok else 'FAIL'}"])
    _write_json(args, rep.to_dict())
    return OK if ok else FAIL


def cmd_xi(args) -> int:
    S = fx.schedule_from_json(fx.load_json(args.schedule), _poset_arg(args))
    for w in (args.u, args.v):
        if set(w) - {"0", "1"}:
            raise InputError(f"bad address {w!r}")
    try:
        seg = xi_pair(S.poset, S, args.u, args.v)
    except (ValueError, IndexError) as exc:
        raise InputError(str(exc)) from None
    _emit([f"agreement segment of {args.u} and {args.v}: {seg}"])
    _write_json(args, {"u": args.u, "v": args.v, "segment": list(seg.ordered)})
    return OK


def _load_system(args) -> SplittingSystem:
    return fx.system_from_json(fx.load_json(args.system), _poset_arg(args))


def _save_system(args, sys_):
    if args.out:
        fx.dump_json(fx.system_to_json(sys_), args.out)


def cmd_sys_verify(args) -> int:
    sys_ = _load_system(args)
    rep = verify_system(sys_)
    _emit([f"order: {sys_.order}"] + rep.lines())
    _write_json(args, {"ok": rep.ok, "s1": [list(map(str, w)) for w in rep.s1],
                       "s2": [list(map(str, w)) for w in rep.s2],
                       "s3": [list(map(str, w)) for w in rep.s3]})
    return OK if rep.ok else FAIL


def cmd_sys_expand(args) -> int:
    sys_ = expand(_load_system(args))
    rep = verify_system(sys_)
    _emit([f"order: {sys_.order}"] + rep.lines())
    _save_system(args, sys_)
    return OK if rep.ok else FAIL


def cmd_sys_refine(args) -> int:
    sys_ = _load_system(args)
    X = fx.condition_from_json(fx.load_json(args.with_), sys_.poset)
    sys_ = refine(sys_, args.at, X)
    rep = verify_system(sys_)
    _emit([f"order: {sys_.order}", f"refined at: {args.at!r}"] + rep.lines())
    _save_system(args, sys_)
    return OK if rep.ok else FAIL


def cmd_fuse(args) -> int:
    sys_ = _load_system(args)
    res = fuse(sys_)
    rep = validate(res.fused)
    star = check_star(res)
    lines = [f"order: {sys_.order}", f"cells: {len(res.cell_map)}",
             f"fused points: {len(res.fused)}", f"pinned profile: {res.min_pinned}",
             f"agreement/disjointness violations: {len(star)}"] + rep.lines()
    _emit(lines)
    if args.out:
        fx.dump_json(fx.condition_to_json(res.fused), args.out)
    _write_json(args, {"validate": rep.to_dict(), "star_violations": len(star),
                       "pinned_profile": res.pinned_profile})
    return OK if rep.ok and not star else FAIL


def cmd_homeo(args) -> int:
    P = _poset_arg(args)
    X = fx.condition_from_json(fx.load_json(args.source), P)
    Y = fx.condition_from_json(fx.load_json(args.target), X.poset)
    if args.schedule:
        S = fx.schedule_from_json(fx.load_json(args.schedule), X.poset)
    else:
        S = resolving_schedule(X)
    order = S.horizon if args.order is None else args.order
    h = build_homeo(X, Y, S, order)
    h1 = check_h1(h)
    cells = check_cells(h)
    lines = [f"order: {order}", f"resolved cells: {len(h.resolved)}/{len(h.pairs)}",
             f"bijective on resolved cells: {h.is_bijective()}",
             f"h1: {'pass' if h1 is None else f'FAIL {h1}'}",
             f"cell pattern: {'pass' if cells is None else f'FAIL {cells}'}"]
    ok = h1 is None and cells is None
    if args.segment is not None:
        seg = _segment(X.poset, args.segment)
        try:
            h2 = check_h2(h, seg)
            lines.append(f"h2 on {seg}: {'pass' if h2 else 'FAIL'}")
            ok = ok and h2
        except PreconditionError as exc:
            lines.append(f"h2 on {seg}: precondition fails ({exc})")
            ok = False
    _emit(lines)
    return OK if ok else FAIL


def _default_schedule(X: TreeSystem, budget: int) -> Schedule:
    rounds = max(1, X.depth, -(-budget // max(1, len(X.support))))
    return Schedule.round_robin(X.poset, X.support, rounds)


def cmd_analyze(args) -> int:
    P = _poset_arg(args)
    F = fx.function_from_json(fx.load_json(args.function), P)
    X = fx.condition_from_json(fx.load_json(args.condition), F.in_support.poset)
    if X.depth != F.in_depth or X.support != F.in_support:
        raise InputError("function and condition have different supports or depths")
    seg = _segment(X.poset, args.segment)
    if args.schedule:
        S = fx.schedule_from_json(fx.load_json(args.schedule), X.poset)
    else:
        S = _default_schedule(X, args.budget)
    if args.budget > S.horizon:
        raise InputError(f"budget {args.budget} exceeds schedule horizon {S.horizon}")
    mode = args.mode
    if mode == "reduce":
        v = reducible(F, seg, X)
        if v:
            cert = Certificate("reduced", X, segment=seg, table=v.table, validated=False)
        else:
            _emit([f"not reducible to {seg}: witness {v.witness[0]} / {v.witness[1]}"])
            return FAIL
    elif mode == "capture":
        element = args.element or (seg.ordered[-1] if len(seg) else None)
        if element is None:
            raise InputError("capture mode needs --element or a nonempty --segment")
        cert = capture_or_reduce(F, element, X, S, args.budget)
    elif mode == "capture-all":
        cert = capture_all(F, seg, X, S, args.budget)
    else:
        cert = dichotomy(F, seg, X, S, args.budget)
    replay = cert.replay(F)
    _emit([f"mode: {mode}", f"certificate: {cert.summary()}",
           f"carrier points: {len(cert.carrier)}", f"replay: {'pass' if replay else 'FAIL'}"])
    if args.out:
        fx.dump_json(cert.to_dict(F), args.out)
    _write_json(args, cert.to_dict(F))
    if cert.kind == "exhausted":
        return EXHAUSTED
    return OK if replay else FAIL


def cmd_demo(args) -> int:
    L, N = args.chain_length, args.depth
    if L < 2 or N < 2:
        raise InputError("demos need --chain-length >= 2 and --depth >= 2")
    if L * N > BIT_CAP:
        raise InputError(_cap_message(f"{L}*{N}"))
    if args.name == "nonshrinkable":
        rep = nonshrinkable(L, N)
        _emit(rep.lines() + [f"result: {'pass' if rep.ok else 'FAIL'}"])
        return OK if rep.ok else FAIL
    lines = fusion_walkthrough(L, N) if args.name == "fusion" else homeo_walkthrough(L, N)
    _emit(lines)
    bad = any("FAIL" in line for line in lines) or any(
        line.startswith(("h1 violations", "cell pattern")) and not line.endswith("None")
        for line in lines)
    return FAIL if bad else OK


# ---------------------------------------------------------------------------
# pipeline scripts

class Pipeline:
    """Line-oriented scripts: ``verb args... [as NAME]``, ';' or newline separated."""

    def __init__(self, base: Path, poset=None, out=None):
        self.base = base
        self.poset = poset
        self.env: dict = {}
        self.out = out or sys.stdout
        self.failed_checks = 0

    def _get(self, name, kind=None):
        if name not in self.env:
            raise InputError(f"unbound name {name!r}")
        val = self.env[name]
        if kind is not None and not isinstance(val, kind):
            raise InputError(f"{name!r} is not a {kind.__name__}")
        return val

    def _path(self, text):
        p = Path(text)
        return p if p.is_absolute() else self.base / p

    def _load(self, name, path=None):
        path = self._path(path or f"{name}.json")
        obj = fx.load_json(path)
        if "family" in obj:
            return fx.system_from_json(obj, self.poset)
        if "values" in obj:
            return fx.schedule_from_json(obj, self.poset)
        if "in_support" in obj:
            return fx.function_from_json(obj, self.poset)
        return fx.condition_from_json(obj, self.poset)

    def run(self, text: str) -> int:
        steps = []
        for raw in text.splitlines():
            raw = raw.split("#", 1)[0]
            steps.extend(s.strip() for s in raw.split(";") if s.strip())
        # bind-check first so unbound names are input errors, not step failures
        self._static_check(steps)
        for k, step in enumerate(steps):
            try:
                self._exec(step)
            except (InputError, fx.FixtureError):
                raise
            except (ConditionError, ShadowError, PosetError, IndexError) as exc:
                print(f"step {k} ({step}): error: {exc}", file=self.out)
                return FAIL
        return FAIL if self.failed_checks else OK

    _BINDERS = {"load", "cube", "split", "restrict", "amalgam", "itspl", "roundrobin",
                "system", "expand", "refine", "fuse"}

    def _static_check(self, steps):
        bound = set()
        for k, step in enumerate(steps):
            words = shlex.split(step)
            if not words:
                continue
            verb, rest = words[0], words[1:]
            target = None
            if len(rest) >= 2 and rest[-2] == "as":
                target, rest = rest[-1], rest[:-2]
            uses = {
                "split": rest[:1], "restrict": rest[:1], "amalgam": rest[:2],
                "itspl": rest[:2], "system": rest[:2], "expand": rest[:1],
                "refine": [rest[0], rest[2]] if len(rest) >= 3 else rest[:1],
                "fuse": rest[:1], "verify": rest[:1], "check": rest[:1], "save": rest[:1],
                "show": rest[:1],
            }.get(verb, [])
            for name in uses:
                if name not in bound:
                    raise InputError(f"step {k} ({step}): unbound name {name!r}")
            if verb == "load":
                bound.add(target or rest[0])
            elif target:
                bound.add(target)
            elif verb not in self._BINDERS | {"verify", "check", "save", "show"}:
                raise InputError(f"step {k}: unknown verb {verb!r}")

    def _exec(self, step):
        words = shlex.split(step)
        verb, rest = words[0], words[1:]
        target = None
        if len(rest) >= 2 and rest[-2] == "as":
            target, rest = rest[-1], rest[:-2]

        def bind(val, default=None):
            self.env[target or default] = val

        if verb == "load":
            name = rest[0]
            bind(self._load(name, rest[1] if len(rest) > 1 else None), name)
        elif verb == "cube":
            if self.poset is None:
                raise InputError("cube needs a poset (--poset)")
            bind(TreeSystem.full_cube(_segment(self.poset, rest[0]), int(rest[1])))
        elif verb == "split":
            bind(spl(self._get(rest[0], TreeSystem), rest[1], int(rest[2])))
        elif verb == "restrict":
            X = self._get(rest[0], TreeSystem)
            bind(restrict(X, _segment(X.poset, rest[1])))
        elif verb == "amalgam":
            bind(amalgam(self._get(rest[0], TreeSystem), self._get(rest[1], TreeSystem)))
        elif verb == "roundrobin":
            P = self.poset
            if P is None:
                raise InputError("roundrobin needs a poset (--poset)")
            bind(Schedule.round_robin(P, _segment(P, rest[0]), int(rest[1])))
        elif verb == "itspl":
            bind(iterate_spl(self._get(rest[0], TreeSystem), self._get(rest[1], Schedule),
                             rest[2] if len(rest) > 2 else ""))
        elif verb == "system":
            bind(SplittingSystem.canonical(self._get(rest[0], TreeSystem),
                                           self._get(rest[1], Schedule), int(rest[2])))
        elif verb == "expand":
            bind(expand(self._get(rest[0], SplittingSystem)))
        elif verb == "refine":
            bind(refine(self._get(rest[0], SplittingSystem), rest[1],
                        self._get(rest[2], TreeSystem)))
        elif verb == "fuse":
            bind(fuse(self._get(rest[0], SplittingSystem)).fused)
        elif verb == "verify":
            rep = verify_system(self._get(rest[0], SplittingSystem))
            print(f"verify {rest[0]}: " + "; ".join(rep.lines()), file=self.out)
            self.failed_checks += not rep.ok
        elif verb == "check":
            X = self._get(rest[0], TreeSystem)
            rep = validate(X, int(rest[1]) if len(rest) > 1 else None)
            print(f"check {rest[0]}: {'pass' if rep.ok else 'FAIL'} "
                  f"(points={len(X)}, P-2 modulus={rep.p2_modulus})", file=self.out)
            self.failed_checks += not rep.ok
        elif verb == "save":
            val = self._get(rest[0])
            if isinstance(val, SplittingSystem):
                payload = fx.system_to_json(val)
            elif isinstance(val, Schedule):
                payload = fx.schedule_to_json(val)
            else:
                payload = fx.condition_to_json(val)
            fx.dump_json(payload, self._path(rest[1]))
        elif verb == "show":
            print(f"{rest[0]}: {self._get(rest[0])!r}", file=self.out)


def cmd_pipeline(args) -> int:
    if args.script == "-":
        return Pipeline(Path.cwd(), _poset_arg(args)).run(sys.stdin.read())
    path = Path(args.script)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return Pipeline(path.parent, _poset_arg(args)).run(text)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sackstree",
                                 description="Finite-depth perfect-set machinery over finite posets.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, poset=True):
        if poset:
            p.add_argument("--poset", help="poset fixture (if not embedded)")
        p.add_argument("--json", help="write a machine-readable report here")
        return p

    p = common(sub.add_parser("check", help="validate a condition"))
    p.add_argument("condition")
    p.add_argument("--modulus", type=int, default=None)
    p.add_argument("--openness", type=int, default=None)
    p.add_argument("--schedule", help="also run the shrinkability check along this schedule")
    p.set_defaults(fn=cmd_check)

    p = common(sub.add_parser("pipeline", help="run a script of operations"))
    p.add_argument("script", help="script file, or - for stdin")
    p.set_defaults(fn=cmd_pipeline)

    p = common(sub.add_parser("xi", help="agreement segment of two addresses"))
    p.add_argument("schedule")
    p.add_argument("u")
    p.add_argument("v")
    p.set_defaults(fn=cmd_xi)

    for name, fn, help_ in (("sys-verify", cmd_sys_verify, "check S-1..S-3"),
                            ("sys-expand", cmd_sys_expand, "add one level"),
                            ("fuse", cmd_fuse, "fuse a verified system")):
        p = common(sub.add_parser(name, help=help_))
        p.add_argument("system")
        if name != "sys-verify":
            p.add_argument("--out")
        p.set_defaults(fn=fn)

    p = common(sub.add_parser("sys-refine", help="shrink one top-level member"))
    p.add_argument("system")
    p.add_argument("--at", required=True)
    p.add_argument("--with", dest="with_", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sys_refine)

    p = common(sub.add_parser("homeo", help="cell correspondence between two conditions"))
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--schedule")
    p.add_argument("--order", type=int)
    p.add_argument("--segment", help="also check h2 on this initial segment")
    p.set_defaults(fn=cmd_homeo)

    p = common(sub.add_parser("analyze", help="reducibility / capture analysis"))
    p.add_argument("function")
    p.add_argument("condition")
    p.add_argument("--segment", default="")
    p.add_argument("--mode", choices=["reduce", "capture", "dichotomy", "capture-all"],
                   default="dichotomy")
    p.add_argument("--element")
    p.add_argument("--budget", type=int, default=2)
    p.add_argument("--schedule")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("demo", help="scripted scenarios")
    p.add_argument("name", choices=["nonshrinkable", "fusion", "homeo"])
    p.add_argument("--chain-length", type=int, default=3)
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(fn=cmd_demo)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return args.fn(args)
    except (InputError, fx.FixtureError, PreconditionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except ShadowError as exc:
        if "cap" in str(exc):
            print(f"input error: {_cap_message(exc)}", file=sys.stderr)
            return BAD_INPUT
        print(f"error: {exc}", file=sys.stderr)
        return FAIL
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXHAUSTED
    except (ConditionError, PosetError, DegenerateSection) as exc:
        msg = str(exc)
        if "cap" in msg:
            print(f"input error: {_cap_message(exc)}", file=sys.stderr)
            return BAD_INPUT
        print(f"error: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
