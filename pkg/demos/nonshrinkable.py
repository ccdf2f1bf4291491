"""A condition that a schedule skipping the least chain element cannot shrink.

Every point of the fixture starts all its coordinates with one shared bit,
and the bottom coordinate is pinned to 0...0 or 1...1.  Splitting only the
upper coordinates never separates the two halves, so every branch keeps two
points.  Adding the bottom coordinate to the schedule resolves everything.

    python3 demos/nonshrinkable.py [chain length] [depth]
"""
import sys

from sackstree.scenarios import constant_first_bit, nonshrinkable


def main(L=3, N=3):
    X = constant_first_bit(L, N)
    print(f"fixture over a chain of length {L}, depth {N}: {len(X)} points")
    for s in X.strings()[:4]:
        print("  ", s)
    print("   ...")
    rep = nonshrinkable(L, N)
    for line in rep.lines():
        print(line)
    print("as expected" if rep.ok else "UNEXPECTED residuals")


if __name__ == "__main__":
    main(*map(int, sys.argv[1:3]))
