"""Run the rank-22 demo for several seeds and report word counts and timings."""
import argparse
import time

from salemforge.catalog import RunConfig, run_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--entry", default="U+E8+E8+D4")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--strategy", default="interleaved")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="runs")
    args = ap.parse_args()
    print("seed  degree  word_len  words  seconds  log_lower")
    for seed in args.seeds:
        cfg = RunConfig(entry=args.entry, seed=seed, strategy=args.strategy, workers=args.workers,
                        out_dir=args.out_dir)
        t0 = time.perf_counter()
        cert = run_demo(args.entry, cfg)
        dt = time.perf_counter() - t0
        print(f"{seed:4d}  {cert.classification.salem_degree:6d}  {len(cert.word):8d}  "
              f"{cert.stats['words_examined']:5d}  {dt:7.1f}  {cert.entropy.log_lower[:12]}")


if __name__ == "__main__":
    main()
