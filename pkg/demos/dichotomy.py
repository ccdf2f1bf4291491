"""Reduce or capture: what a function on a chain condition can depend on.

A function of the top coordinate of p0 < p1 either reads off p0 on a
smaller condition or depends only on coordinates not above p0.  Each
answer comes with a certificate that is replayed from scratch.

    python3 demos/dichotomy.py
"""
from sackstree import FinitePoset, Schedule, ShadowFunction, TreeSystem
from sackstree import capture_or_reduce, dichotomy


def show(title, cert, F):
    print(f"{title}: {cert.summary()}")
    replay = "n/a" if cert.kind == "exhausted" else ("ok" if cert.replay(F) else "FAILED")
    print(f"   carrier {len(cert.carrier)} points, replay {replay}")
    for step in cert.steps:
        print("  ", step)


def main():
    P = FinitePoset.chain(2)
    X = TreeSystem.full_cube(P.full, 3)
    S = Schedule(P, P.full, ["p0", "p1"] * 3, 3)

    F = ShadowFunction.coord(P.full, 3, "p1")
    show("x(p1) against p0", capture_or_reduce(F, "p0", X, S, 2), F)

    G = ShadowFunction.coord(P.full, 3, "p0")
    show("x(p0) against the segment {p0}", dichotomy(G, P.segment(["p0"]), X, S, 2), G)

    H = ShadowFunction.xor(P.full, 3, "p0", "p1")
    show("x(p0) xor x(p1), no budget", capture_or_reduce(H, "p0", X, S, 0), H)


if __name__ == "__main__":
    main()
