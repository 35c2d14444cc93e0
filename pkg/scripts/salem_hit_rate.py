"""Fraction of random words whose characteristic polynomial has a full-degree Salem factor.

Words alternate between the two parabolic groups of a catalog lattice; the
table shows how the hit rate grows with word length.
"""
import argparse
import random
from collections import Counter

from salemforge.catalog import catalog_entry, demo_generators
from salemforge.intpoly import char_poly, classify
from salemforge.search import word_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entry", default="U+E8+E8+D4")
    ap.add_argument("--lengths", type=int, nargs="+", default=[4, 8, 16, 32, 64, 80])
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    lat, groups = demo_generators(catalog_entry(args.entry))
    sets = [pg.generators for pg in groups]
    rng = random.Random(args.seed)
    print(f"{args.entry}: rank {lat.rank}")
    print("length  full_salem  any_salem  kinds")
    for length in args.lengths:
        kinds, full = Counter(), 0
        for _ in range(args.samples):
            word = [(k % 2, rng.randrange(len(sets[k % 2])), rng.choice([1, -1])) for k in range(length)]
            c = classify(char_poly(word_matrix(word, sets, lat)))
            kinds[c.kind] += 1
            full += c.salem_degree == lat.rank
        anyf = kinds["salem"] + kinds["mixed"]
        print(f"{length:6d}  {full / args.samples:10.2f}  {anyf / args.samples:9.2f}  {dict(kinds)}")


if __name__ == "__main__":
    main()
