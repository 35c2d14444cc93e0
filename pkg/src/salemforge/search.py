"""Word search for isometries with a Salem characteristic polynomial, and certificates.

A word is a sequence of letters ``(set index, generator index, exponent)``;
its matrix is the left-to-right product of the letter matrices.  Candidate
words come from a deterministic stream (BFS, seeded random walk, or the two
interleaved) so a run is reproducible from its config alone.
"""
from __future__ import annotations

import itertools
import math
import json
import logging
import random
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Context, Decimal
from fractions import Fraction
from typing import Iterator, Sequence

from . import linalg
from .errors import ExhaustedError, PreconditionError, ValidationError
from .intpoly import (NOT_O_PLUS, EntropyInterval, IntPolynomial, SalemClassification, char_poly,
                      classify, spectral_radius, sturm_count)
from .isometry import Isometry, ParabolicGroup, _Echelon, fixed_subspace, in_so_plus, validate
from .lattice import GramLattice
from .linalg import Matrix

log = logging.getLogger(__name__)

SCHEMA = 1
STRATEGIES = {"bfs": "bfs", "random-walk": "random-walk", "rw": "random-walk",
              "interleaved": "interleaved", "mix": "interleaved"}
RESTART_P = 0.1


@dataclass(frozen=True)
class SearchConfig:
    strategy: str = "interleaved"
    max_word_length: int = 128
    max_words: int = 10**6
    rng_seed: int = 0
    tol: Fraction = Fraction(1, 10**6)
    require_full_degree: bool = True
    max_exponent: int = 3
    max_entry_bits: int = 4096
    workers: int = 1
    batch_size: int = 32

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}")
        object.__setattr__(self, "strategy", STRATEGIES[self.strategy])
        object.__setattr__(self, "tol", Fraction(self.tol))
        for name in ("max_word_length", "max_words", "max_exponent", "max_entry_bits", "workers", "batch_size"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")

    def to_json(self) -> dict:
        return {"strategy": self.strategy, "max_word_length": self.max_word_length,
                "max_words": self.max_words, "rng_seed": self.rng_seed, "tol": str(self.tol),
                "require_full_degree": self.require_full_degree, "max_exponent": self.max_exponent,
                "max_entry_bits": self.max_entry_bits}

    @classmethod
    def from_json(cls, d: dict, **overrides) -> "SearchConfig":
        kw = dict(d)
        kw["tol"] = Fraction(kw["tol"])
        kw.update(overrides)
        return cls(**kw)


Letter = tuple[int, int, int]


@dataclass(frozen=True)
class SalemCertificate:
    lattice: GramLattice
    generator_sets: tuple[tuple[Matrix, ...], ...]
    fixed_vectors: tuple
    word: tuple[Letter, ...]
    matrix: Matrix
    char_poly: IntPolynomial
    classification: SalemClassification
    entropy: EntropyInterval
    full_degree: bool
    non_liftable_flag: bool
    config: SearchConfig
    stats: dict
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "lattice": {"name": self.lattice.name, "hash": self.lattice.digest,
                        "gram": [list(r) for r in self.lattice.gram],
                        "cone_reference": list(self.lattice.cone_reference)},
            "generator_sets": [{"e": list(e) if e is not None else None,
                                "generators": [[list(r) for r in m] for m in gens]}
                               for e, gens in zip(self.fixed_vectors, self.generator_sets)],
            "word": [list(x) for x in self.word],
            "matrix": [[str(x) for x in r] for r in self.matrix],
            "char_poly": self.char_poly.to_json(),
            "classification": self.classification.to_json(),
            "entropy": self.entropy.to_json(),
            "full_degree": self.full_degree,
            "non_liftable_flag": self.non_liftable_flag,
            "search": self.config.to_json(),
            "stats": dict(sorted(self.stats.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"


def load_certificate(d: dict) -> tuple[dict, GramLattice, list[list[Isometry]]]:
    """Parse certificate JSON into (raw dict, lattice, generator sets) for :func:`verify`."""
    if d.get("schema") != SCHEMA:
        raise ValidationError(f"unsupported certificate schema {d.get('schema')!r}")
    lat = GramLattice(d["lattice"]["name"], linalg.as_matrix(d["lattice"]["gram"]),
                      tuple(d["lattice"]["cone_reference"]))
    sets = [[validate(m, lat) for m in s["generators"]] for s in d["generator_sets"]]
    return d, lat, sets


# ---------------------------------------------------------------- alphabet

class _Alphabet:
    def __init__(self, sets: list[list[Isometry]], max_exp: int, lat: GramLattice):
        self.n = lat.rank
        exps = [x for k in range(1, max_exp + 1) for x in (k, -k)]
        self.letters: list[Letter] = [(s, i, x) for s, gens in enumerate(sets)
                                      for i in range(len(gens)) for x in exps]
        self.matrices: list[Matrix] = []
        self.defect_rows: list[list[list[Fraction]]] = []
        ident = linalg.identity(self.n)
        powers = {}
        for s, gens in enumerate(sets):
            for i, g in enumerate(gens):
                pos, neg = g.matrix, g.inverse.matrix
                acc_p, acc_n = pos, neg
                for k in range(1, max_exp + 1):
                    powers[(s, i, k)] = acc_p
                    powers[(s, i, -k)] = acc_n
                    acc_p = linalg.matmul(acc_p, pos)
                    acc_n = linalg.matmul(acc_n, neg)
        for letter in self.letters:
            m = powers[letter]
            self.matrices.append(m)
            red, _ = linalg.rref(linalg.mat_sub(m, ident))
            self.defect_rows.append(red)
        self.abelian = [all(linalg.matmul(a.matrix, b.matrix) == linalg.matmul(b.matrix, a.matrix)
                            for a, b in itertools.combinations(gens, 2)) for gens in sets]
        self._live_cache: dict[frozenset, bool] = {}

    def follows(self, prev: int | None, nxt: int) -> bool:
        """Reduced-word rule: no repeated generator; ascending inside an abelian run."""
        if prev is None:
            return True
        ps, pi, _ = self.letters[prev]
        ns, ni, _ = self.letters[nxt]
        if ps != ns:
            return True
        if pi == ni:
            return False
        return ni > pi or not self.abelian[ps]

    def live(self, ids: frozenset) -> bool:
        """False when the letters share a fixed vector, so the product has eigenvalue 1."""
        hit = self._live_cache.get(ids)
        if hit is None:
            if sum(len(self.defect_rows[k]) for k in ids) < self.n:
                hit = False
            else:
                ech = _Echelon(self.n)
                for k in ids:
                    for row in self.defect_rows[k]:
                        ech.add(row)
                hit = len(ech.rows) == self.n
            if len(self._live_cache) < 100_000:
                self._live_cache[ids] = hit
        return hit

    def product(self, word: Sequence[int]) -> Matrix:
        m = self.matrices[word[0]]
        for k in word[1:]:
            m = linalg.matmul(m, self.matrices[k])
        return m


# ---------------------------------------------------------------- candidate streams
# Each stream yields (letter ids, matrix or None); None marks a pruned word.

def _bfs_stream(alpha: _Alphabet, cfg: SearchConfig) -> Iterator[tuple[tuple[int, ...], Matrix | None]]:
    nletters = len(alpha.letters)

    def words(length, prefix):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        prev = prefix[-1] if prefix else None
        for k in range(nletters):
            if alpha.follows(prev, k):
                prefix.append(k)
                yield from words(length, prefix)
                prefix.pop()

    for length in range(1, cfg.max_word_length + 1):
        for w in words(length, []):
            if cfg.require_full_degree and not alpha.live(frozenset(w)):
                yield w, None
                continue
            yield w, alpha.product(w)


def _walk_stream(alpha: _Alphabet, cfg: SearchConfig, rng: random.Random):
    n = alpha.n
    nletters = len(alpha.letters)
    while True:
        word: list[int] = []
        m = linalg.identity(n)
        ech = _Echelon(n)
        used: set[int] = set()
        live = not cfg.require_full_degree
        while len(word) < cfg.max_word_length:
            prev = word[-1] if word else None
            choices = [k for k in range(nletters) if alpha.follows(prev, k)]
            k = choices[rng.randrange(len(choices))]
            word.append(k)
            m = linalg.matmul(m, alpha.matrices[k])
            if not live and k not in used:
                used.add(k)
                for row in alpha.defect_rows[k]:
                    ech.add(row)
                live = len(ech.rows) == n
            if linalg.max_bits(m) > cfg.max_entry_bits:
                yield tuple(word), "guard"
                break
            if not live:
                yield tuple(word), None
                continue
            yield tuple(word), m
            if rng.random() < RESTART_P:
                break


def _stream(alpha: _Alphabet, cfg: SearchConfig):
    if cfg.strategy == "bfs":
        yield from _bfs_stream(alpha, cfg)
        return
    walks = _walk_stream(alpha, cfg, random.Random(cfg.rng_seed))
    if cfg.strategy == "random-walk":
        yield from walks
        return
    bfs = _bfs_stream(alpha, cfg)
    for item in bfs:
        yield item
        yield next(walks)
    yield from walks


# ---------------------------------------------------------------- evaluation

def _evaluate(m: Matrix) -> tuple[IntPolynomial, SalemClassification]:
    p = char_poly(m)
    return p, classify(p)


def _normalise_sets(sets, lat: GramLattice) -> tuple[list[list[Isometry]], list]:
    out, fixed = [], []
    for s in sets:
        if isinstance(s, ParabolicGroup):
            fixed.append(s.e)
            s = s.generators
        else:
            fixed.append(None)
        gens = []
        for g in s:
            if not isinstance(g, Isometry):
                g = validate(g, lat)
            if g.lattice != lat:
                raise PreconditionError("generator lives on a different lattice")
            if not in_so_plus(g):
                raise PreconditionError("generator is not in SO+")
            gens.append(g)
        out.append(gens)
    return out, fixed


def salem_search(sets, lat: GramLattice, cfg: SearchConfig = SearchConfig()) -> SalemCertificate:
    """First word in the candidate stream whose characteristic polynomial has a Salem factor.

    With ``require_full_degree`` the Salem factor must have degree equal to
    the lattice rank.  Raises :class:`ExhaustedError` when the budget runs out.
    """
    t0 = time.perf_counter()
    gsets, fixed = _normalise_sets(sets, lat)
    if not any(gsets):
        raise PreconditionError("no generators given")
    stats = {"words_examined": 0, "pruned": 0, "duplicates": 0, "classified": 0,
             "entry_guard_hits": 0, "shape_violations": 0}
    if cfg.require_full_degree:
        common = fixed_subspace([g for gens in gsets for g in gens])
        if common.dimension:
            warnings.warn("degenerate configuration: all generators fix a common vector, "
                          "so every word has eigenvalue 1", RuntimeWarning, stacklevel=2)
            raise ExhaustedError("degenerate generator configuration", stats, degenerate=True)
    alpha = _Alphabet(gsets, cfg.max_exponent, lat)
    seen: set[Matrix] = set()
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    stream = _stream(alpha, cfg)
    exhausted = False
    try:
        while not exhausted:
            # batch entries carry a snapshot of the stream-order counters, so the
            # reported stats do not depend on batch size or worker count
            batch = []
            while len(batch) < cfg.batch_size * cfg.workers:
                item = next(stream, None) if stats["words_examined"] < cfg.max_words else None
                if item is None:
                    exhausted = True
                    break
                word, m = item
                stats["words_examined"] += 1
                if m is None:
                    stats["pruned"] += 1
                elif isinstance(m, str):
                    stats["entry_guard_hits"] += 1
                elif m in seen:
                    stats["duplicates"] += 1
                else:
                    seen.add(m)
                    batch.append((word, m, dict(stats)))
            mats = [m for _, m, _ in batch]
            results = list(pool.map(_evaluate, mats)) if pool else [_evaluate(m) for m in mats]
            for (word, m, snap), (p, c) in zip(batch, results):
                stats["classified"] += 1
                if c.kind == NOT_O_PLUS:
                    stats["shape_violations"] += 1
                    log.warning("word %s has a non-Salem shaped characteristic polynomial", word)
                if c.salem_factor is None or (cfg.require_full_degree and c.salem_degree != lat.rank):
                    continue
                snap.update(classified=stats["classified"], shape_violations=stats["shape_violations"])
                return _certificate(lat, gsets, fixed, alpha, word, m, p, c, cfg, snap,
                                    time.perf_counter() - t0)
    finally:
        if pool:
            pool.shutdown()
    raise ExhaustedError(f"no Salem word within budget ({stats['words_examined']} words)", stats)


def _certificate(lat, gsets, fixed, alpha, word, m, p, c, cfg, stats, wall) -> SalemCertificate:
    full = c.salem_degree == lat.rank
    return SalemCertificate(
        lattice=lat,
        generator_sets=tuple(tuple(g.matrix for g in gens) for gens in gsets),
        fixed_vectors=tuple(fixed),
        word=tuple(alpha.letters[k] for k in word),
        matrix=m,
        char_poly=p,
        classification=c,
        entropy=spectral_radius(c, cfg.tol),
        full_degree=full,
        non_liftable_flag=full and lat.rank == 22,
        config=cfg,
        stats=stats,
        wall_time=wall,
    )


# ---------------------------------------------------------------- verification

def word_matrix(word: Sequence[Sequence[int]], sets: list[list[Isometry]], lat: GramLattice) -> Matrix:
    m = linalg.identity(lat.rank)
    for s, i, x in word:
        g = sets[s][i]
        base = g.matrix if x > 0 else g.inverse.matrix
        for _ in range(abs(x)):
            m = linalg.matmul(m, base)
    return m


def check_certificate(cert, lat: GramLattice, sets) -> list[str]:
    """Recompute a certificate from scratch; returns human-readable mismatches."""
    d = cert.to_json() if isinstance(cert, SalemCertificate) else cert
    diffs = []
    if d.get("schema") != SCHEMA:
        return [f"schema {d.get('schema')!r} != {SCHEMA}"]
    if d["lattice"]["hash"] != lat.digest:
        diffs.append("lattice hash mismatch")
    gsets, _ = _normalise_sets(sets, lat)
    try:
        m = word_matrix(d["word"], gsets, lat)
    except (IndexError, ValueError) as exc:
        return diffs + [f"word does not index the generator sets: {exc}"]
    stated = linalg.as_matrix(d["matrix"])
    if m != stated:
        bad = [(i, j) for i in range(lat.rank) for j in range(lat.rank) if m[i][j] != stated[i][j]]
        diffs.append(f"word product differs from stated matrix at {len(bad)} entries, first {bad[:3]}")
        return diffs
    p = char_poly(m)
    if p.to_json() != d["char_poly"]:
        diffs.append("characteristic polynomial mismatch")
    c = classify(p)
    if c.to_json() != d["classification"]:
        diffs.append(f"classification mismatch: recomputed {c.to_json()['kind']} "
                     f"degree {c.salem_degree}")
    if c.salem_factor is None:
        diffs.append("no Salem factor")
        return diffs
    full = c.salem_degree == lat.rank
    if d["full_degree"] != full:
        diffs.append(f"full_degree flag {d['full_degree']} != {full}")
    if d["non_liftable_flag"] != (full and lat.rank == 22):
        diffs.append("non_liftable_flag inconsistent")
    stated_e = EntropyInterval.from_json(d["entropy"])
    diffs.extend(_check_enclosure(c.salem_factor, stated_e))
    return diffs


def _exp_bound(x: str, up: bool) -> Fraction:
    ctx = Context(prec=60)
    y = ctx.exp(Decimal(x))
    ulp = Decimal(1).scaleb(y.adjusted() - 59)
    return Fraction(ctx.add(y, ulp) if up else ctx.subtract(y, ulp))


def _check_enclosure(salem: IntPolynomial, e: EntropyInterval) -> list[str]:
    """Exact containment checks: the Salem number is the only root of ``salem`` above 1."""
    out = []
    lo = max(e.lower, Fraction(1))
    if not (lo < e.upper and sturm_count(salem, lo, e.upper) == 1):
        out.append(f"entropy interval [{e.lower}, {e.upper}] does not contain the Salem number")
    log_lo = max(_exp_bound(e.log_lower, up=True), Fraction(1))
    log_hi = _exp_bound(e.log_upper, up=False)
    if sturm_count(salem, log_lo, math.inf) != 1:
        out.append(f"log_lower {e.log_lower} exceeds the log of the Salem number")
    if log_hi <= 1 or sturm_count(salem, 1, log_hi) != 1:
        out.append(f"log_upper {e.log_upper} is below the log of the Salem number")
    return out


def verify(cert, lat: GramLattice, sets) -> bool:
    return not check_certificate(cert, lat, sets)


def entropy_of(g: Isometry, tol=Fraction(1, 10**6)) -> EntropyInterval:
    """log of the spectral radius of a cone-preserving isometry, as an enclosure."""
    if not g.cone_preserving:
        raise PreconditionError("entropy is defined for cone-preserving isometries only")
    return spectral_radius(classify(char_poly(g.matrix)), tol)
