"""Pair up the cells of two conditions and check the projection laws.

The two halves of a cube split at the top chain element look the same
below it, so the induced point map must fix every lower projection.

    python3 demos/homeo.py
"""
from sackstree import FinitePoset, TreeSystem, build_homeo, check_h1, check_h2, spl
from sackstree.homeo import resolving_schedule


def main():
    P = FinitePoset.chain(3)
    X = TreeSystem.full_cube(P.full, 2)
    A, B = spl(X, "p2", 0), spl(X, "p2", 1)
    S = resolving_schedule(A)
    h = build_homeo(A, B, S, S.horizon)
    print("resolving schedule:", list(S.values))
    print(f"cells resolved: {len(h.resolved)}/{len(h.pairs)}, bijective: {h.is_bijective()}")
    u = sorted(h.resolved)[5]
    x, y = h.resolved_points()[u]
    print(f"cell {u}: {A.point(x)}  ->  {B.point(y)}")
    print("h1 violations:", check_h1(h))
    below = P.segment(["p0", "p1"])
    print(f"points keep their projection to {below}:", check_h2(h, below))


if __name__ == "__main__":
    main()
