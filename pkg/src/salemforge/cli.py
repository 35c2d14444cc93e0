"""``salemforge`` command line.

Exit codes: 0 success, 2 validation error, 3 search exhausted, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import lattice as lat_mod
from .catalog import RunConfig, catalog_entry, catalog_list, replay, run_demo
from .errors import ExhaustedError, SalemforgeError, ValidationError
from .intpoly import IntPolynomial, classify, spectral_radius
from .isometry import check_parabolic, in_so_plus, parabolic_group, validate
from .lattice import GramLattice
from .search import SearchConfig, check_certificate, load_certificate, salem_search

EXIT_IO = 4


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def _write_or_print(data, out):
    text = json.dumps(data, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_lattice(ref) -> GramLattice:
    """A lattice from a JSON file path, an inline dict, a catalog name or an expression."""
    if isinstance(ref, dict):
        return GramLattice.from_json(ref)
    if Path(ref).is_file() or ref.endswith(".json"):
        return GramLattice.from_json(_read_json(ref))
    try:
        return catalog_entry(ref).build()
    except ValidationError:
        return lat_mod.build(ref)


def _load_generator_sets(paths, lat):
    sets = []
    for p in paths:
        data = _read_json(p)
        for item in data if isinstance(data, list) else [data]:
            sets.append([validate(m, lat) for m in item["generators"]])
    return sets


def _emit(args, payload: dict, text: str):
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


# ---------------------------------------------------------------- handlers

def cmd_lattice_build(args):
    lat = lat_mod.build(args.expr, assert_even=args.even)
    data = lat.to_json()
    if args.out:
        _write_or_print(data, args.out)
    _emit(args, data, json.dumps(data) if not args.out else f"wrote {args.out}")


def cmd_lattice_info(args):
    lat = _load_lattice(args.file)
    info = {"name": lat.name, "rank": lat.rank, "signature": list(lat.signature),
            "even": lat_mod.is_even(lat), "hyperbolic": lat.is_hyperbolic,
            "cone_reference": list(lat.cone_reference) if lat.cone_reference else None, "hash": lat.digest}
    _emit(args, info, "\n".join(f"{k}: {v}" for k, v in info.items()))


def cmd_lattice_disc(args):
    d = lat_mod.discriminant(_load_lattice(args.file)).to_json()
    _emit(args, d, "\n".join(f"{k}: {v}" for k, v in d.items()))


def cmd_lattice_isotropic(args):
    vecs = lat_mod.find_isotropic(_load_lattice(args.file), args.bound)
    _emit(args, {"vectors": [list(v) for v in vecs]}, "\n".join(" ".join(map(str, v)) for v in vecs))


def _load_poly(path) -> IntPolynomial:
    return IntPolynomial.from_json(_read_json(path))


def cmd_poly_classify(args):
    c = classify(_load_poly(args.file), strict=args.strict)
    d = c.to_json()
    factors = " ".join(f"Phi_{n}^{m}" for n, m in c.cyclotomic_factors) or "-"
    _emit(args, d, f"kind: {c.kind}\ncyclotomic: {factors}\nsalem degree: {c.salem_degree}")


def cmd_poly_radius(args):
    c = classify(_load_poly(args.file))
    e = spectral_radius(c, Fraction(args.tol))
    _emit(args, e.to_json(), f"spectral radius in [{float(e.lower):.12g}, {float(e.upper):.12g}]\n"
                             f"entropy in [{e.log_lower}, {e.log_upper}]")


def cmd_isometry_check(args):
    lat = _load_lattice(args.lattice)
    g = validate(_read_json(args.matrix), lat)
    d = {"det": g.det, "cone_preserving": g.cone_preserving, "so_plus": in_so_plus(g)}
    _emit(args, d, "\n".join(f"{k}: {v}" for k, v in d.items()))


def cmd_isometry_parabolic(args):
    lat = _load_lattice(args.lattice)
    e = [int(x) for x in args.e.replace(",", " ").split()]
    pg = parabolic_group(lat, e)
    problems = check_parabolic(pg)
    data = pg.to_json(lat)
    if args.out:
        _write_or_print(data, args.out)
    _emit(args, {**data, "problems": problems} if not args.out else {"out": args.out, "rank": pg.rank},
          f"{pg.rank} generators fixing {e}" + (f", wrote {args.out}" if args.out else ""))


def cmd_search_salem(args):
    lat = _load_lattice(args.lattice)
    sets = _load_generator_sets(args.gens, lat)
    cfg = SearchConfig(strategy=args.strategy, max_word_length=args.max_len, max_words=args.budget,
                       rng_seed=args.seed, tol=Fraction(args.tol), workers=args.workers)
    cert = salem_search(sets, lat, cfg)
    Path(args.out).write_text(cert.dumps())
    summary = {"out": args.out, "salem_degree": cert.classification.salem_degree,
               "word_length": len(cert.word), "entropy": cert.entropy.to_json(), "stats": cert.stats}
    _emit(args, summary, f"Salem degree {cert.classification.salem_degree}, word length {len(cert.word)}, "
                         f"entropy in [{cert.entropy.log_lower}, {cert.entropy.log_upper}]; wrote {args.out}")


def cmd_search_verify(args):
    d, lat, sets = load_certificate(_read_json(args.cert))
    if args.lattice:
        lat = _load_lattice(args.lattice)
    if args.gens:
        sets = _load_generator_sets(args.gens, lat)
    diffs = check_certificate(d, lat, sets)
    _emit(args, {"valid": not diffs, "diffs": diffs}, "valid" if not diffs else "INVALID\n" + "\n".join(diffs))
    return 0 if not diffs else 2


def cmd_catalog_list(args):
    entries = catalog_list()
    _emit(args, {"entries": [e.to_json() for e in entries]},
          "\n".join(f"{e.name:14s} rank {e.rank:2d} sig {e.signature} disc {list(e.divisors)}" for e in entries))


def cmd_demo(args):
    if args.replay:
        cert, same = replay(args.replay)
        _emit(args, {"identical": same}, "identical" if same else "DIFFERENT")
        return 0 if same else 2
    if not args.entry:
        raise ValidationError("demo needs an entry name or --replay")
    cfg = RunConfig(entry=args.entry, seed=args.seed, tol=args.tol, budget=args.budget, max_len=args.max_len,
                    strategy=args.strategy, workers=args.workers, out_dir=args.out_dir, height_bound=args.bound)
    cert = run_demo(args.entry, cfg)
    summary = {"entry": args.entry, "salem_degree": cert.classification.salem_degree,
               "non_liftable_flag": cert.non_liftable_flag, "word_length": len(cert.word),
               "entropy": cert.entropy.to_json(), "stats": cert.stats, "wall_time": cert.wall_time}
    _emit(args, summary, f"{args.entry}: Salem degree {cert.classification.salem_degree}, "
                         f"non-liftable flag {cert.non_liftable_flag}, word length {len(cert.word)}, "
                         f"entropy in [{cert.entropy.log_lower}, {cert.entropy.log_upper}], "
                         f"{cert.stats['words_examined']} words, {cert.wall_time:.1f}s")


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    p = argparse.ArgumentParser(prog="salemforge", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    top = p.add_subparsers(dest="group", required=True)

    lat = top.add_parser("lattice").add_subparsers(dest="cmd", required=True)
    s = lat.add_parser("build", parents=[common])
    s.add_argument("expr")
    s.add_argument("--even", action="store_true", help="reject odd diagonal entries")
    s.add_argument("--out")
    s.set_defaults(func=cmd_lattice_build)
    for name, fn in (("info", cmd_lattice_info), ("disc", cmd_lattice_disc)):
        s = lat.add_parser(name, parents=[common])
        s.add_argument("file")
        s.set_defaults(func=fn)
    s = lat.add_parser("isotropic", parents=[common])
    s.add_argument("file")
    s.add_argument("--bound", type=int, default=1)
    s.set_defaults(func=cmd_lattice_isotropic)

    poly = top.add_parser("poly").add_subparsers(dest="cmd", required=True)
    s = poly.add_parser("classify", parents=[common])
    s.add_argument("file")
    s.add_argument("--strict", action="store_true", help="reject degree-2 Salem factors")
    s.set_defaults(func=cmd_poly_classify)
    s = poly.add_parser("radius", parents=[common])
    s.add_argument("file")
    s.add_argument("--tol", default="1/1000000")
    s.set_defaults(func=cmd_poly_radius)

    iso = top.add_parser("isometry").add_subparsers(dest="cmd", required=True)
    s = iso.add_parser("check", parents=[common])
    s.add_argument("lattice")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_isometry_check)
    s = iso.add_parser("parabolic", parents=[common])
    s.add_argument("lattice")
    s.add_argument("--e", required=True, help="isotropic vector, e.g. '1,0,0,0'")
    s.add_argument("--out")
    s.set_defaults(func=cmd_isometry_parabolic)

    search = top.add_parser("search").add_subparsers(dest="cmd", required=True)
    s = search.add_parser("salem", parents=[common])
    s.add_argument("--lattice", required=True)
    s.add_argument("--gens", action="append", required=True, help="generator-set JSON (repeatable)")
    s.add_argument("--strategy", default="interleaved", choices=["bfs", "rw", "random-walk", "mix", "interleaved"])
    s.add_argument("--budget", type=int, default=10**6)
    s.add_argument("--max-len", type=int, default=128)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", default="1/1000000")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_search_salem)
    s = search.add_parser("verify", parents=[common])
    s.add_argument("cert")
    s.add_argument("--lattice")
    s.add_argument("--gens", action="append")
    s.set_defaults(func=cmd_search_verify)

    cat = top.add_parser("catalog").add_subparsers(dest="cmd", required=True)
    s = cat.add_parser("list", parents=[common])
    s.set_defaults(func=cmd_catalog_list)

    s = top.add_parser("demo", parents=[common])
    s.add_argument("entry", nargs="?")
    s.add_argument("--replay", help="config.json or latest.json of a persisted run")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", default="1/1000000")
    s.add_argument("--budget", type=int, default=10**6)
    s.add_argument("--max-len", type=int, default=128)
    s.add_argument("--strategy", default="interleaved", choices=["bfs", "rw", "random-walk", "mix", "interleaved"])
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--bound", type=int, default=1, help="height bound for isotropic vectors")
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        rc = args.func(args)
    except ExhaustedError as exc:
        payload = {"error": str(exc), "stats": exc.stats, "degenerate": exc.degenerate}
        print(json.dumps(payload) if getattr(args, "json", False) else f"exhausted: {exc}", file=sys.stderr)
        return exc.exit_code
    except SalemforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
