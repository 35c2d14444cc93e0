"""Integral lattices given by Gram matrices.

Root lattices are negative definite, so ``U + E8 + E8 + D4`` has signature
(1, 21).  Expressions are ``+``-separated atoms: ``U``, ``U(m)``, ``A<n>``,
``D<n>``, ``E6``, ``E7``, ``E8``, any of those with a ``(m)`` scaling, or a
literal JSON Gram matrix such as ``[[2,1],[1,-2]]``.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Sequence

from . import linalg
from .errors import NoConeError, RankError, ValidationError
from .intpoly import char_poly, sturm_count
from .linalg import Matrix, Vector


@dataclass(frozen=True)
class DiscriminantProfile:
    elementary_divisors: tuple[int, ...]
    group_order: int
    p_elementary_sigma: tuple[int, int] | None

    def to_json(self) -> dict:
        return {"elementary_divisors": list(self.elementary_divisors),
                "group_order": self.group_order,
                "p_elementary_sigma": list(self.p_elementary_sigma) if self.p_elementary_sigma else None}


@dataclass(frozen=True)
class GramLattice:
    name: str
    gram: Matrix
    cone_reference: Vector | None = None
    assert_even: bool = field(default=False, compare=False)

    def __post_init__(self):
        g = linalg.as_matrix(self.gram, square=True)
        if not g:
            raise ValidationError("empty Gram matrix")
        if any(g[i][j] != g[j][i] for i in range(len(g)) for j in range(i)):
            raise ValidationError("Gram matrix is not symmetric")
        if self.assert_even and any(g[i][i] % 2 for i in range(len(g))):
            raise ValidationError("odd diagonal entry in a lattice asserted to be even")
        object.__setattr__(self, "gram", g)
        ref = self.cone_reference
        if ref is not None:
            ref = tuple(int(x) for x in ref)
            if len(ref) != len(g) or linalg.bilinear(g, ref, ref) <= 0:
                raise ValidationError("cone reference must have positive norm")
        elif self.is_hyperbolic:
            ref = _positive_vector(g)
        object.__setattr__(self, "cone_reference", ref)

    @property
    def rank(self) -> int:
        return len(self.gram)

    def form(self, x, y):
        return linalg.bilinear(self.gram, x, y)

    def norm(self, x):
        return linalg.bilinear(self.gram, x, x)

    @cached_property
    def signature(self) -> tuple[int, int, int]:
        return signature(self)

    @property
    def is_hyperbolic(self) -> bool:
        s = self.signature
        return s[0] == 1 and s[1] == 0 and s[2] >= 1

    @cached_property
    def digest(self) -> str:
        blob = json.dumps([list(r) for r in self.gram], separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> dict:
        return {"name": self.name, "gram": [list(r) for r in self.gram],
                "cone_reference": list(self.cone_reference) if self.cone_reference else None}

    @classmethod
    def from_json(cls, d: dict) -> "GramLattice":
        ref = d.get("cone_reference")
        return cls(d.get("name", "literal"), linalg.as_matrix(d["gram"]), tuple(ref) if ref else None)


def _positive_vector(g: Matrix) -> Vector:
    n = len(g)
    for i in range(n):
        if g[i][i] > 0:
            return tuple(int(k == i) for k in range(n))
    for i, j in itertools.combinations(range(n), 2):
        for s in (1, -1):
            v = [0] * n
            v[i], v[j] = 1, s
            if linalg.bilinear(g, v, v) > 0:
                return tuple(v)
    return _positive_by_diagonalisation(g)


def _positive_by_diagonalisation(g: Matrix) -> Vector:
    """Rational Gram-Schmidt until a vector of positive norm appears."""
    pending = [[Fraction(int(i == j)) for j in range(len(g))] for i in range(len(g))]
    while pending:
        p = next((v for v in pending if linalg.bilinear(g, v, v)), None)
        if p is None:
            # all norms zero: u + w has norm 2(u, w) for any non-orthogonal pair
            pair = next(((u, w) for u, w in itertools.combinations(pending, 2) if linalg.bilinear(g, u, w)), None)
            if pair is None:
                break
            u, w = pair
            pending.remove(u)
            p = [a + b for a, b in zip(u, w)]
            pending.append(p)
        q = linalg.bilinear(g, p, p)
        if q > 0:
            return linalg.clear_denominators(p)
        pending.remove(p)
        pending = [[a - linalg.bilinear(g, v, p) / q * b for a, b in zip(v, p)] for v in pending]
    raise ValidationError("no vector of positive norm")


# ---------------------------------------------------------------- constructors

def root_lattice(kind: str, n: int) -> Matrix:
    """Negative definite Cartan-type Gram matrix of A_n, D_n or E_n."""
    edges = []
    if kind == "A":
        if n < 1:
            raise ValidationError("A_n needs n >= 1")
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "D":
        if n < 4:
            raise ValidationError("D_n needs n >= 4")
        edges = [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    elif kind == "E":
        if n not in (6, 7, 8):
            raise ValidationError("E_n exists for n = 6, 7, 8")
        # chain of n-1 nodes, extra node hanging off the third
        edges = [(i, i + 1) for i in range(n - 2)] + [(2, n - 1)]
    else:
        raise ValidationError(f"unknown root system {kind}")
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = -2
    for i, j in edges:
        g[i][j] = g[j][i] = 1
    return linalg.as_matrix(g)


_ATOM = re.compile(r"^(U|A|D|E)(\d*)(?:\((-?\d+)\))?$")


def _split_terms(expr: str) -> list[str]:
    terms, depth, cur = [], 0, ""
    for ch in expr.replace(" ", ""):
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == "+" and depth == 0:
            terms.append(cur)
            cur = ""
        else:
            cur += ch
    terms.append(cur)
    if any(not t for t in terms):
        raise ValidationError(f"malformed lattice expression {expr!r}")
    return terms


def _atom(term: str) -> Matrix:
    if term.startswith("["):
        try:
            return linalg.as_matrix(json.loads(term), square=True)
        except (json.JSONDecodeError, TypeError) as exc:
            raise ValidationError(f"bad literal Gram matrix {term!r}") from exc
    m = _ATOM.match(term)
    if not m:
        raise ValidationError(f"unknown lattice atom {term!r}")
    kind, idx, scale = m.group(1), m.group(2), m.group(3)
    if kind == "U":
        if idx:
            raise ValidationError("U takes no index")
        g = ((0, 1), (1, 0))
    else:
        if not idx:
            raise ValidationError(f"{kind} needs an index")
        g = root_lattice(kind, int(idx))
    if scale is not None:
        s = int(scale)
        if s == 0:
            raise ValidationError("zero scaling")
        g = tuple(tuple(s * x for x in row) for row in g)
    return g


def build(expr: str, assert_even: bool = False, name: str | None = None) -> GramLattice:
    blocks = [_atom(t) for t in _split_terms(expr.strip())]
    return GramLattice(name or expr.replace(" ", ""), linalg.block_diag(blocks), assert_even=assert_even)


# ---------------------------------------------------------------- invariants

def signature(lat: GramLattice) -> tuple[int, int, int]:
    """Exact inertia (n+, n0, n-) from Sturm counts on the Gram characteristic polynomial."""
    p = char_poly(lat.gram)
    pos = neg = 0
    for factor, mult in p.squarefree_decomposition():
        pos += mult * sturm_count(factor, 0, math.inf)
        neg += mult * sturm_count(factor, -math.inf, 0) - mult * (factor(0) == 0)
    zero = next((i for i, c in enumerate(p.coeffs) if c), 0)
    return pos, zero, neg


def is_even(lat: GramLattice) -> bool:
    return all(lat.gram[i][i] % 2 == 0 for i in range(lat.rank))


def discriminant(lat: GramLattice) -> DiscriminantProfile:
    if linalg.det(lat.gram) == 0:
        raise RankError("degenerate Gram matrix has no finite discriminant group")
    divisors = tuple(d for d in linalg.smith_diagonal(lat.gram) if d > 1)
    order = math.prod(divisors)
    p_sigma = None
    if divisors and len(set(divisors)) == 1 and len(divisors) % 2 == 0 and _is_prime(divisors[0]):
        p_sigma = (divisors[0], len(divisors) // 2)
    return DiscriminantProfile(divisors, order, p_sigma)


def _is_prime(n: int) -> bool:
    return n > 1 and all(n % k for k in range(2, math.isqrt(n) + 1))


# ---------------------------------------------------------------- isotropic vectors

def _components(g: Matrix) -> list[list[int]]:
    n = len(g)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if g[i][j] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


MAX_BLOCK_BOX = 5_000_000


def find_isotropic(lat: GramLattice, height_bound: int) -> list[Vector]:
    """Primitive isotropic vectors with coordinates in [-h, h], first nonzero entry positive.

    Ordered by L1 norm, then lexicographically descending, so the standard
    isotropic basis vectors of a U block come first.  Orthogonal blocks of the
    Gram matrix are enumerated separately and glued by matching norms.
    """
    if height_bound < 1:
        raise ValidationError("height bound must be >= 1")
    if not lat.is_hyperbolic:
        raise NoConeError(f"signature {lat.signature} is not hyperbolic (1, 0, n-)")
    g = lat.gram
    h = height_bound
    comps = _components(g)
    buckets = []
    for comp in comps:
        if (2 * h + 1) ** len(comp) > MAX_BLOCK_BOX:
            raise ValidationError(f"block of rank {len(comp)} too large to enumerate at height {h}")
        sub = [[g[i][j] for j in comp] for i in comp]
        b: dict[int, list[tuple[int, ...]]] = {}
        for v in itertools.product(range(-h, h + 1), repeat=len(comp)):
            b.setdefault(linalg.bilinear(sub, v, v), []).append(v)
        buckets.append(b)
    # reachable norm sums of each suffix of blocks
    reach = [{0}]
    for b in reversed(buckets):
        reach.append({x + y for x in b for y in reach[-1]})
    reach.reverse()

    out = []
    n = lat.rank

    def rec(k: int, target: int, chosen: list):
        if k == len(buckets):
            if target == 0:
                for parts in itertools.product(*chosen):
                    v = [0] * n
                    for comp, part in zip(comps, parts):
                        for i, x in zip(comp, part):
                            v[i] = x
                    _keep(v)
            return
        for norm, vecs in buckets[k].items():
            if target - norm in reach[k + 1]:
                chosen.append(vecs)
                rec(k + 1, target - norm, chosen)
                chosen.pop()

    def _keep(v):
        first = next((x for x in v if x), 0)
        if first <= 0:
            return
        d = 0
        for x in v:
            d = gcd(d, x)
        if d == 1:
            out.append(tuple(v))

    rec(0, 0, [])
    out.sort(key=lambda v: (sum(map(abs, v)), tuple(-x for x in v)))
    return out


def is_primitive(v: Sequence[int]) -> bool:
    d = 0
    for x in v:
        d = gcd(d, x)
    return d == 1
