"""Words examined until the first full-degree certificate, per strategy and seed."""
import argparse

from salemforge.catalog import catalog_entry, demo_generators
from salemforge.errors import ExhaustedError
from salemforge.search import SearchConfig, salem_search


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--entries", nargs="+", default=["U+A2", "U+E8", "U(3)+E8+E8"])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--budget", type=int, default=20000)
    args = ap.parse_args()
    print("entry         strategy     seed  words  word_len  seconds")
    for name in args.entries:
        lat, groups = demo_generators(catalog_entry(name))
        for strategy in ("bfs", "random-walk", "interleaved"):
            for seed in range(1 if strategy == "bfs" else args.seeds):
                cfg = SearchConfig(strategy=strategy, rng_seed=seed, max_words=args.budget)
                try:
                    cert = salem_search(groups, lat, cfg)
                    row = f"{cert.stats['words_examined']:5d}  {len(cert.word):8d}  {cert.wall_time:7.2f}"
                except ExhaustedError as exc:
                    row = f"exhausted after {exc.stats['words_examined']}"
                print(f"{name:12s}  {strategy:11s}  {seed:4d}  {row}")


if __name__ == "__main__":
    main()
