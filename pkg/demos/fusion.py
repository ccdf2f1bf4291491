"""Build a splitting system, refine one cell, fuse, and validate the result.

    python3 demos/fusion.py [chain length] [depth]
"""
import sys

from sackstree import FinitePoset, Schedule, SplittingSystem, TreeSystem, fuse, refine, spl
from sackstree import check_star, validate, verify_system


def main(L=3, N=3):
    P = FinitePoset.chain(L)
    S = Schedule.round_robin(P, rounds=N)
    sys_ = SplittingSystem.canonical(TreeSystem.full_cube(P.full, N), S, 2)
    print("schedule:", list(S.values))
    print("canonical system of order 2:", "; ".join(verify_system(sys_).lines()))

    top = P.elements[-1]
    sys_ = refine(sys_, "01", spl(sys_["01"], top, 1))
    print(f"after shrinking cell '01' along {top}:", "; ".join(verify_system(sys_).lines()))

    res = fuse(sys_)
    print(f"fused set: {len(res.fused)} of {2 ** (L * N)} cube points, {len(res.cell_map)} cells")
    print("agreement/disjointness violations:", len(check_star(res)))
    for line in validate(res.fused).lines():
        print("  ", line)


if __name__ == "__main__":
    main(*map(int, sys.argv[1:3]))
