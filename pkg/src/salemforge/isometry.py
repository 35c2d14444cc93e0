"""Isometries of a Gram lattice, Eichler transvections and invariant subspaces.

Matrices act on column vectors, so ``g(x) = M x`` and preserving the form
means ``M^T G M = G``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import linalg
from .errors import (DimensionError, IntegralityError, NoConeError, NotIsometryError,
                     PreconditionError)
from .lattice import GramLattice, is_primitive
from .linalg import Matrix, Vector


@dataclass(frozen=True)
class Isometry:
    matrix: Matrix
    lattice: GramLattice = field(repr=False, compare=False)
    det: int
    cone_preserving: bool

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def __call__(self, x):
        return linalg.matvec(self.matrix, x)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return validate(linalg.matmul(self.matrix, other.matrix), self.lattice)

    @cached_property
    def inverse(self) -> "Isometry":
        return validate(isometry_inverse(self.matrix, self.lattice.gram), self.lattice)


def isometry_inverse(m: Matrix, gram: Matrix) -> Matrix:
    """M^{-1} = G^{-1} M^T G for a form-preserving M."""
    ginv = linalg.inverse(gram)
    prod = linalg.matmul(linalg.matmul(ginv, linalg.transpose(m)), gram)
    if any(Fraction(x).denominator != 1 for row in prod for x in row):
        raise NotIsometryError("inverse is not integral")
    return linalg.as_matrix(prod)


def validate(m, lat: GramLattice) -> Isometry:
    m = linalg.as_matrix(m, square=True)
    if len(m) != lat.rank:
        raise DimensionError(f"matrix has size {len(m)}, lattice has rank {lat.rank}")
    g = lat.gram
    if linalg.matmul(linalg.matmul(linalg.transpose(m), g), m) != g:
        raise NotIsometryError("matrix does not preserve the form")
    d = linalg.det(m)
    assert d in (1, -1), "form-preserving integer matrix with det not +/-1"
    if lat.cone_reference is None:
        raise NoConeError(f"lattice {lat.name} has no positive cone (signature {lat.signature})")
    v = lat.cone_reference
    cone = lat.form(linalg.matvec(m, v), v) > 0
    return Isometry(m, lat, d, cone)


def in_so_plus(g: Isometry) -> bool:
    return g.det == 1 and g.cone_preserving


def eichler_matrix(gram: Matrix, e: Sequence[int], a: Sequence[int]) -> Matrix:
    """Matrix of x -> x + (x,e)a - (x,a)e - ((a,a)/2)(x,e)e; no checks."""
    f = linalg.matvec(gram, e)
    h = linalg.matvec(gram, a)
    q = linalg.bilinear(gram, a, a) // 2
    n = len(gram)
    return tuple(tuple(int(i == j) + a[i] * f[j] - e[i] * h[j] - q * e[i] * f[j] for j in range(n))
                 for i in range(n))


def eichler(lat: GramLattice, e: Sequence[int], a: Sequence[int]) -> Isometry:
    e, a = tuple(e), tuple(a)
    if len(e) != lat.rank or len(a) != lat.rank:
        raise DimensionError("vector length does not match lattice rank")
    if lat.norm(e) != 0:
        raise PreconditionError("e is not isotropic")
    if lat.form(e, a) != 0:
        raise PreconditionError("a is not orthogonal to e")
    if not is_primitive(e):
        raise PreconditionError("e is not primitive")
    if lat.norm(a) % 2:
        raise IntegralityError("(a, a) is odd; transvection would not be integral")
    return validate(eichler_matrix(lat.gram, e, a), lat)


# ---------------------------------------------------------------- parabolic groups

@dataclass(frozen=True)
class ParabolicGroup:
    e: Vector
    generators: tuple[Isometry, ...]
    basis_witness: tuple[tuple[Fraction, ...], ...]  # e, w_1..w_r, u
    b_vectors: tuple[tuple[Fraction, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def lattice(self) -> GramLattice:
        return self.generators[0].lattice

    def to_json(self, lat: GramLattice) -> dict:
        return {"lattice": lat.name, "e": list(self.e),
                "generators": [[list(r) for r in g.matrix] for g in self.generators]}


def perp_basis(lat: GramLattice, e: Sequence[int]) -> tuple[list[Vector], tuple[Fraction, ...]]:
    """Integral basis (e, w_1, ..., w_r) of e^perp and a rational u with (e, u) = 1.

    ``u`` has the smallest possible denominator, namely the divisibility of e.
    """
    n = lat.rank
    f = linalg.matvec(lat.gram, e)
    g, umat = linalg.column_reduce_row(f)
    if g == 0:
        raise PreconditionError("e lies in the radical")
    cols = linalg.transpose(umat)
    kernel = cols[1:]
    coords = linalg.matvec(linalg.integer_inverse(umat), e)
    assert coords[0] == 0
    v = linalg.complete_to_unimodular(coords[1:])
    basis = [tuple(sum(kernel[k][i] * v[k][j] for k in range(n - 1)) for i in range(n))
             for j in range(n - 1)]
    assert basis[0] == tuple(e)
    u = tuple(Fraction(x, g) for x in cols[0])
    return basis, u


def parabolic_group(lat: GramLattice, e: Sequence[int]) -> ParabolicGroup:
    """Free abelian unipotent group of rank r = rank - 2 fixing the isotropic vector e.

    Generators are the transvections E(e, w_j) for the basis w_j of
    e^perp / Ze; each has b-vector equal to the j-th unit vector.
    """
    e = tuple(int(x) for x in e)
    if not lat.is_hyperbolic:
        raise PreconditionError(f"lattice signature {lat.signature} is not hyperbolic")
    if len(e) != lat.rank or not any(e):
        raise PreconditionError("e must be a nonzero vector of the lattice")
    if lat.norm(e) != 0 or not is_primitive(e):
        raise PreconditionError("e must be primitive isotropic")
    basis, u = perp_basis(lat, e)
    ws = basis[1:]
    gens = tuple(eichler(lat, e, w) for w in ws)
    witness = (tuple(map(Fraction, e)),) + tuple(tuple(map(Fraction, w)) for w in ws) + (u,)
    return ParabolicGroup(e, gens, witness, tuple(b_vector(g, witness) for g in gens))


def b_vector(g: Isometry, witness) -> tuple[Fraction, ...]:
    """w-coordinates of g(u) - u in the basis (e, w_1..w_r, u)."""
    u = witness[-1]
    gu = linalg.matvec(g.matrix, u)
    coords = _solve(linalg.transpose(witness), [x - y for x, y in zip(gu, u)])
    return tuple(coords[1:-1])


def _solve(a, b) -> list[Fraction]:
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, piv = linalg.rref(aug)
    n = len(a[0])
    if piv != list(range(n)):
        raise DimensionError("system is singular or inconsistent")
    return [row[-1] for row in red]


def check_parabolic(pg: ParabolicGroup) -> list[str]:
    """Invariant violations, empty when the group is well formed."""
    problems = []
    n = len(pg.e)
    ident = linalg.identity(n)
    for k, g in enumerate(pg.generators):
        if g(pg.e) != pg.e:
            problems.append(f"generator {k} moves e")
        if not in_so_plus(g):
            problems.append(f"generator {k} not in SO+")
        d = linalg.mat_sub(g.matrix, ident)
        if any(any(row) for row in linalg.matmul(linalg.matmul(d, d), d)):
            problems.append(f"generator {k} is not unipotent of step 3")
    if pg.b_vectors and linalg.rank(pg.b_vectors) != len(pg.b_vectors):
        problems.append("b-vectors are dependent")
    return problems


# ---------------------------------------------------------------- subspaces

class _Echelon:
    """Incremental reduced basis over Q keyed by pivot column."""

    def __init__(self, n: int):
        self.n = n
        self.rows: dict[int, list[Fraction]] = {}

    def reduce(self, v) -> list[Fraction]:
        v = [Fraction(x) for x in v]
        for p, row in self.rows.items():
            if v[p]:
                c = v[p]
                v = [x - c * y for x, y in zip(v, row)]
        return v

    def add(self, v) -> bool:
        v = self.reduce(v)
        p = next((i for i, x in enumerate(v) if x), None)
        if p is None:
            return False
        inv = 1 / v[p]
        v = [x * inv for x in v]
        for q, row in self.rows.items():
            if row[p]:
                c = row[p]
                self.rows[q] = [x - c * y for x, y in zip(row, v)]
        self.rows[p] = v
        return True


@dataclass(frozen=True)
class Subspace:
    basis: tuple[tuple[Fraction, ...], ...]  # reduced row echelon rows
    ambient: int

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @classmethod
    def span(cls, vectors, ambient: int) -> "Subspace":
        ech = _Echelon(ambient)
        for v in vectors:
            ech.add(v)
        return cls._from(ech)

    @classmethod
    def _from(cls, ech: _Echelon) -> "Subspace":
        return cls(tuple(tuple(ech.rows[p]) for p in sorted(ech.rows)), ech.n)

    def contains(self, v) -> bool:
        ech = _Echelon(self.ambient)
        ech.rows = {next(i for i, x in enumerate(r) if x): list(r) for r in self.basis}
        return not any(ech.reduce(v))

    def is_full(self) -> bool:
        return self.dimension == self.ambient

    def inside_perp(self, lat: GramLattice, e) -> bool:
        f = linalg.matvec(lat.gram, e)
        return all(sum(x * y for x, y in zip(f, b)) == 0 for b in self.basis)


def _matrices(gs) -> list[Matrix]:
    return [g.matrix if isinstance(g, Isometry) else linalg.as_matrix(g) for g in gs]


def orbit_span(gs: Sequence[Isometry], v: Sequence) -> Subspace:
    """Smallest subspace containing v and stable under every g in gs."""
    mats = _matrices(gs)
    n = len(v)
    if any(len(m) != n for m in mats):
        raise DimensionError("isometries and seed have different dimensions")
    lats = [g.lattice for g in gs if isinstance(g, Isometry)]
    if any(lat != lats[0] for lat in lats):
        raise DimensionError("isometries live on different lattices")
    ech = _Echelon(n)
    queue = []
    if ech.add(v):
        queue.append([Fraction(x) for x in v])
    while queue and len(ech.rows) < n:
        x = queue.pop()
        for m in mats:
            y = linalg.matvec(m, x)
            if ech.add(y):
                queue.append(list(y))
    return Subspace._from(ech)


def fixed_subspace(gs: Sequence[Isometry]) -> Subspace:
    """Common fixed vectors: intersection of ker(g - I)."""
    mats = _matrices(gs)
    if not mats:
        raise DimensionError("need at least one isometry")
    n = len(mats[0])
    ident = linalg.identity(n)
    stacked = [row for m in mats for row in linalg.mat_sub(m, ident)]
    return Subspace.span(linalg.nullspace(stacked, n), n)
