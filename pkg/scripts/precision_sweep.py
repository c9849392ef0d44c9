"""Residue characteristic recovery on the rational slot machine as the
p-adic precision grows.  Prints, per precision, how many primes were
identified and how many came back undecided or wrong."""
import argparse

from sympy import primerange

from arithquandle.arith import build_slot_machine
from arithquandle.padic import Inconclusive
from arithquandle.reconstruct import reciprocity_coordinates, recover_residue_chars


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--B", type=int, default=100)
    ap.add_argument("--digits", type=int, nargs="+", default=[4, 6, 8, 12, 16, 24])
    args = ap.parse_args()
    M = [l for l in primerange(2, args.B + 1) if l != args.p]
    lev = build_slot_machine(args.p, M, 2)
    for d in args.digits:
        data = reciprocity_coordinates(lev, d)
        try:
            res = recover_residue_chars(data.scalars(), args.p)
        except Inconclusive as exc:
            print(f"{d:3d} digits: inconclusive ({exc})")
            continue
        right = sum(c == l for c, l in zip(res.chars, M))
        undecided = sum(c is None for c in res.chars)
        print(f"{d:3d} digits: {right}/{len(M)} correct, {undecided} undecided, height {res.height}")


if __name__ == "__main__":
    main()
