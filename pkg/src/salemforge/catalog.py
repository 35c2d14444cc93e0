"""Built-in lattice catalog, demo runs and certificate persistence."""
from __future__ import annotations

import json
import os
import re
import tempfile
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from .errors import ExhaustedError, UnsupportedError, ValidationError
from .isometry import parabolic_group
from .lattice import GramLattice, build, discriminant, find_isotropic, is_even
from .search import SalemCertificate, SearchConfig, salem_search


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    expression: str
    rank: int
    signature: tuple[int, int, int]
    even: bool
    divisors: tuple[int, ...]
    p_sigma: tuple[int, int] | None
    note: str

    def build(self) -> GramLattice:
        return build(self.expression, assert_even=self.even, name=self.name)

    def check(self) -> GramLattice:
        lat = self.build()
        disc = discriminant(lat)
        got = (lat.rank, lat.signature, is_even(lat), disc.elementary_divisors, disc.p_elementary_sigma)
        want = (self.rank, self.signature, self.even, self.divisors, self.p_sigma)
        if got != want:
            raise ValidationError(f"catalog entry {self.name} drifted: expected {want}, computed {got}")
        return lat

    def to_json(self) -> dict:
        return asdict(self)


_BUILTIN = [
    CatalogEntry("U", "U", 2, (1, 0, 1), True, (), None, "hyperbolic plane, unimodular"),
    CatalogEntry("U+E8", "U+E8", 10, (1, 0, 9), True, (), None, "even unimodular of signature (1, 9)"),
    CatalogEntry("U+U", "U+U", 4, (2, 0, 2), True, (), None,
                 "rank 4 but signature (2, 2): not hyperbolic, so it has no positive cone; "
                 "see U+A2 for a rank-4 hyperbolic case"),
    CatalogEntry("U+A2", "U+A2", 4, (1, 0, 3), True, (3,), None, "smallest even rank hyperbolic case, rank 4"),
    CatalogEntry("U+E8+E8+D4", "U+E8+E8+D4", 22, (1, 0, 21), True, (2, 2), (2, 1),
                 "rank 22 with discriminant (Z/2)^2: the Artin invariant 1 profile for p = 2"),
]
_P_FAMILY = re.compile(r"^U\((\d+)\)\+E8\+E8$")
FAMILY_PRIMES = (2, 3, 5, 7, 11, 13)


def _p_entry(p: int) -> CatalogEntry:
    return CatalogEntry(f"U({p})+E8+E8", f"U({p})+E8+E8", 18, (1, 0, 17), True, (p, p), (p, 1),
                        f"rank 18, {p}-elementary discriminant (Z/{p})^2")


def catalog_list(primes=FAMILY_PRIMES) -> list[CatalogEntry]:
    entries = _BUILTIN + [_p_entry(p) for p in primes]
    for entry in entries:
        entry.check()
    return entries


def catalog_entry(name: str) -> CatalogEntry:
    name = name.replace(" ", "")
    for entry in _BUILTIN:
        if entry.name == name:
            entry.check()
            return entry
    m = _P_FAMILY.match(name)
    if m:
        p = int(m.group(1))
        if p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
            raise ValidationError(f"U(p)+E8+E8 needs a prime p, got {p}")
        entry = _p_entry(p)
        entry.check()
        return entry
    raise ValidationError(f"no catalog entry named {name!r}")


# ---------------------------------------------------------------- runs

@dataclass(frozen=True)
class RunConfig:
    entry: str
    seed: int = 0
    tol: str = "1/1000000"
    budget: int = 10**6
    max_len: int = 128
    strategy: str = "interleaved"
    workers: int = 1
    out_dir: str = "."
    height_bound: int = 1
    max_exponent: int = 3

    def __post_init__(self):
        if self.budget < 1 or self.max_len < 1 or self.workers < 1 or self.height_bound < 1:
            raise ValidationError("budget, max_len, workers and height_bound must be positive")
        if Fraction(self.tol) <= 0:
            raise ValidationError("tolerance must be positive")
        object.__setattr__(self, "tol", str(Fraction(self.tol)))
        self.search_config()

    def search_config(self) -> SearchConfig:
        return SearchConfig(strategy=self.strategy, max_word_length=self.max_len, max_words=self.budget,
                            rng_seed=self.seed, tol=Fraction(self.tol), max_exponent=self.max_exponent,
                            workers=self.workers)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        return cls(**d)


def demo_generators(entry: CatalogEntry, height_bound: int = 1):
    """Lattice plus parabolic groups at its two smallest isotropic vectors."""
    lat = entry.check()
    if lat.rank < 4:
        raise UnsupportedError(f"{entry.name} has rank {lat.rank}; the construction needs rank >= 4")
    if not lat.is_hyperbolic:
        raise UnsupportedError(f"{entry.name} has signature {lat.signature}, not (1, 0, n-)")
    iso = find_isotropic(lat, height_bound)
    if len(iso) < 2:
        raise UnsupportedError(f"fewer than two isotropic vectors within height {height_bound}")
    return lat, [parabolic_group(lat, iso[0]), parabolic_group(lat, iso[1])]


def run_demo(entry_name: str, cfg: RunConfig, persist: bool = True) -> SalemCertificate:
    entry = catalog_entry(entry_name)
    lat, sets = demo_generators(entry, cfg.height_bound)
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    t0 = time.perf_counter()
    try:
        cert = salem_search(sets, lat, cfg.search_config())
    except ExhaustedError as exc:
        if persist:
            _persist(entry.name, cfg, stamp, None, {"exhausted": True, "stats": exc.stats,
                                                    "wall_time": time.perf_counter() - t0})
        raise
    if persist:
        _persist(entry.name, cfg, stamp, cert, {"wall_time": cert.wall_time})
    return cert


def run_dir(out_dir, entry_name: str) -> Path:
    return Path(out_dir) / "certs" / entry_name


def _persist(entry_name, cfg: RunConfig, stamp, cert, extra) -> Path:
    d = run_dir(cfg.out_dir, entry_name)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"{stamp}-{cfg.seed}"
    record = {"run_config": cfg.to_json(), "timestamp": stamp, **extra}
    if cert is not None:
        record["certificate"] = f"{stem}.json"
        atomic_write(d / f"{stem}.json", cert.dumps())
    atomic_write(d / f"{stem}.config.json", json.dumps(record, indent=1, sort_keys=True) + "\n")
    if cert is not None:
        atomic_write(d / "latest.json", json.dumps({"certificate": f"{stem}.json",
                                                    "config": f"{stem}.config.json"}, indent=1) + "\n")
    return d / f"{stem}.config.json"


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def replay(config_path) -> tuple[SalemCertificate, bool]:
    """Re-run a persisted demo single-worker; True if the certificate bytes match."""
    config_path = Path(config_path)
    record = json.loads(config_path.read_text())
    if "config" in record and "run_config" not in record:  # a latest.json index
        config_path = config_path.parent / record["config"]
        record = json.loads(config_path.read_text())
    cfg = RunConfig.from_json({**record["run_config"], "workers": 1})
    cert = run_demo(cfg.entry, cfg, persist=False)
    stored = (config_path.parent / record["certificate"]).read_text()
    return cert, cert.dumps() == stored
