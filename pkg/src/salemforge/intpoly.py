"""Exact integer polynomials, cyclotomic detection and Salem classification.

Coefficients are stored in ascending degree order.  Nothing in this module
touches floating point: root counting uses Sturm sequences evaluated at
rationals, and spectral radii are returned as rational enclosures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DimensionError, DomainError, IntervalError, ShapeError


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_roots(cls, roots: Iterable[int]) -> "IntPolynomial":
        p = cls((1,))
        for r in roots:
            p = p * cls((-r, 1))
        return p

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPolynomial":
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading == 1

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other):
        a, b = self.coeffs, _coerce(other).coeffs
        n = max(len(a), len(b))
        return IntPolynomial(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        a, b = self.coeffs, _coerce(other).coeffs
        if not a or not b:
            return IntPolynomial(())
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = IntPolynomial((1,))
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, x) -> int:
        """Sign of P(x) for rational x, or for x = +/-inf."""
        if not self.coeffs:
            return 0
        if isinstance(x, float) and math.isinf(x):
            s = 1 if self.leading > 0 else -1
            if x < 0 and self.degree % 2:
                s = -s
            return s
        x = Fraction(x)
        p, q = x.numerator, x.denominator
        # q^deg * P(p/q) is an integer with the same sign (q > 0)
        acc = 0
        qpow = 1
        for c in reversed(self.coeffs):
            acc = acc * p + c * qpow
            qpow *= q
        return (acc > 0) - (acc < 0)

    def divmod(self, other: "IntPolynomial") -> tuple["IntPolynomial", "IntPolynomial"]:
        """Division by a divisor whose leading coefficient is +/-1."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lc = other.leading
        if lc not in (1, -1):
            raise ShapeError("divmod needs a unit leading coefficient; use pseudo_rem")
        r = list(self.coeffs)
        db = other.degree
        if len(r) - 1 < db:
            return IntPolynomial(()), self
        q = [0] * (len(r) - db)
        b = other.coeffs
        for k in range(len(r) - 1, db - 1, -1):
            c = r[k] * lc
            if c:
                q[k - db] = c
                for j in range(db + 1):
                    r[k - db + j] -= c * b[j]
        return IntPolynomial(tuple(q)), IntPolynomial(tuple(r[:db]))

    def exact_div(self, other: "IntPolynomial") -> "IntPolynomial":
        """Quotient when ``other`` divides ``self`` in Z[t]; raises otherwise."""
        if other.leading in (1, -1):
            q, r = self.divmod(other)
            if r:
                raise ArithmeticError("not divisible")
            return q
        # general exact division over Z: work over Q and check integrality
        r = [Fraction(c) for c in self.coeffs]
        db = other.degree
        b = other.coeffs
        q = [Fraction(0)] * max(len(r) - db, 0)
        for k in range(len(r) - 1, db - 1, -1):
            c = r[k] / b[-1]
            if c:
                q[k - db] = c
                for j in range(db + 1):
                    r[k - db + j] -= c * b[j]
        if any(r[:db]) or any(x.denominator != 1 for x in q):
            raise ArithmeticError("not divisible")
        return IntPolynomial(tuple(int(x) for x in q))

    def divides(self, other: "IntPolynomial") -> bool:
        """True iff ``self`` divides ``other`` (``self`` monic)."""
        return not other.divmod(self)[1]

    def pseudo_rem(self, other: "IntPolynomial") -> "IntPolynomial":
        """Remainder of |lc(other)|^k * self by other; the positive multiplier keeps signs."""
        lc = other.leading
        m = abs(lc)
        s = 1 if lc > 0 else -1
        r = list(self.coeffs)
        db = other.degree
        b = other.coeffs
        while len(r) - 1 >= db and r:
            k = len(r) - 1
            c = r[k]
            # r <- m*r - s*c*t^(k-db)*b ; eliminates top term since m*s = lc
            r = [m * x for x in r]
            for j in range(db + 1):
                r[k - db + j] -= s * c * b[j]
            while r and r[-1] == 0:
                r.pop()
        return IntPolynomial(tuple(r))

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPolynomial":
        """Divide by the content, normalising to a positive leading coefficient."""
        g = self.content()
        if g == 0:
            return self
        if self.leading < 0:
            g = -g
        return IntPolynomial(tuple(c // g for c in self.coeffs))

    def gcd(self, other: "IntPolynomial") -> "IntPolynomial":
        """Primitive gcd in Z[t] (primitive remainder sequence)."""
        a, b = self.primitive(), other.primitive()
        if a.degree < b.degree:
            a, b = b, a
        while b:
            a, b = b, a.pseudo_rem(b).primitive()
        return a.primitive() if a else a

    def squarefree(self) -> "IntPolynomial":
        if self.degree <= 0:
            return self.primitive()
        g = self.gcd(self.derivative())
        return self.primitive().exact_div(g).primitive() if g.degree > 0 else self.primitive()

    def squarefree_decomposition(self) -> list[tuple["IntPolynomial", int]]:
        """``[(A_i, i)]`` with self ~ prod A_i^i, each A_i squarefree and primitive."""
        f = self.primitive()
        out = []
        if f.degree <= 0:
            return out
        c = f.gcd(f.derivative())
        w = f.exact_div(c).primitive()
        i = 1
        while w.degree > 0:
            y = w.gcd(c)
            z = w.exact_div(y).primitive()
            if z.degree > 0:
                out.append((z, i))
            c = c.exact_div(y).primitive()
            w = y
            i += 1
        return out

    def reverse(self) -> "IntPolynomial":
        return IntPolynomial(tuple(reversed(self.coeffs)))

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence) -> "IntPolynomial":
        return cls(tuple(int(x) for x in data))

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mag = abs(c)
            mon = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            body = str(mag) if (mag != 1 or k == 0) else ""
            body = body + ("*" if body and mon else "") + mon
            terms.append(("-" if c < 0 else "+", body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s


def _coerce(x) -> IntPolynomial:
    if isinstance(x, IntPolynomial):
        return x
    return IntPolynomial((int(x),))


T = IntPolynomial((0, 1))
ONE = IntPolynomial((1,))


# ---------------------------------------------------------------- matrices

def char_poly(m: Sequence[Sequence[int]]) -> IntPolynomial:
    """det(tI - M) by the division-free Samuelson-Berkowitz recurrence."""
    n = len(m)
    if any(len(row) != n for row in m):
        raise DimensionError("char_poly needs a square matrix")
    vect = [1]  # highest degree first
    for k in range(n - 1, -1, -1):
        size = n - k
        row = m[k][k + 1:]
        sub = [r[k + 1:] for r in m[k + 1:]]
        x = [m[i][k] for i in range(k + 1, n)]
        col = [1, -m[k][k]]
        for _ in range(size - 1):
            col.append(-sum(a * b for a, b in zip(row, x)))
            x = [sum(a * b for a, b in zip(r, x)) for r in sub]
        vect = [sum(col[i - j] * vect[j] for j in range(max(0, i - size), min(i, len(vect) - 1) + 1))
                for i in range(size + 1)]
    return IntPolynomial(tuple(reversed(vect)))


# ---------------------------------------------------------------- cyclotomics

def totient(n: int) -> int:
    if n < 1:
        raise DomainError("totient needs n >= 1")
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> IntPolynomial:
    """Phi_n, by dividing t^n - 1 by Phi_d for the proper divisors d of n."""
    if n < 1:
        raise DomainError("cyclotomic index must be >= 1")
    p = IntPolynomial.monomial(n) - 1
    for d in range(1, n):
        if n % d == 0:
            p = p.exact_div(cyclotomic(d))
    return p


@lru_cache(maxsize=None)
def _cyclotomic_indices(max_degree: int) -> tuple[int, ...]:
    # phi(n) >= sqrt(n/2), so phi(n) <= D forces n <= 2 D^2
    return tuple(n for n in range(1, 2 * max_degree * max_degree + 1) if totient(n) <= max_degree)


def cyclotomics_up_to_degree(max_degree: int) -> list[tuple[int, IntPolynomial]]:
    if max_degree < 1:
        raise DomainError("degree bound must be >= 1")
    return [(n, cyclotomic(n)) for n in _cyclotomic_indices(max_degree)]


# ---------------------------------------------------------------- reciprocity

def is_reciprocal(p: IntPolynomial) -> bool:
    if p.is_zero():
        raise DomainError("zero polynomial")
    return p.coeffs == p.coeffs[::-1]


def trace_polynomial(p: IntPolynomial) -> IntPolynomial:
    """Monic T of degree d with p(x) = x^d T(x + 1/x), for p monic reciprocal of degree 2d."""
    if not p.is_monic():
        raise ShapeError("trace polynomial needs a monic input")
    if p.degree % 2:
        raise ShapeError("trace polynomial needs even degree")
    if not is_reciprocal(p):
        raise ShapeError("trace polynomial needs a reciprocal input")
    if p(1) == 0 or p(-1) == 0:
        raise ShapeError("trace polynomial needs no root at +1 or -1")
    d = p.degree // 2
    # x^d P(x + 1/x) contributes c_k (x^k + x^-k) for the palindromic pair
    # k = d - j; peel off Chebyshev-like z_k = x^k + x^-k in terms of y.
    zs = [IntPolynomial((2,)), IntPolynomial((0, 1))]
    y = IntPolynomial((0, 1))
    for k in range(2, d + 1):
        zs.append(y * zs[k - 1] - zs[k - 2])
    c = p.coeffs
    out = IntPolynomial((c[d],))
    for k in range(1, d + 1):
        out = out + zs[k] * c[d + k]
    return out


def expand_trace_polynomial(t: IntPolynomial) -> IntPolynomial:
    """Inverse of :func:`trace_polynomial`: x^d T(x + 1/x)."""
    d = t.degree
    out = IntPolynomial(())
    base = IntPolynomial((1, 0, 1))  # x^2 + 1 = x (x + 1/x)
    for k, c in enumerate(t.coeffs):
        if c:
            out = out + (base ** k) * IntPolynomial.monomial(d - k, c)
    return out


# ---------------------------------------------------------------- Sturm

def sturm_sequence(p: IntPolynomial) -> list[IntPolynomial]:
    seq = [p, p.derivative()]
    while seq[-1].degree > 0:
        r = -seq[-2].pseudo_rem(seq[-1])
        if not r:
            break
        g = r.content()
        seq.append(IntPolynomial(tuple(c // g for c in r.coeffs)))
    return seq


def _variations(seq: list[IntPolynomial], x) -> int:
    signs = [s for s in (q.sign_at(x) for q in seq) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_count(p: IntPolynomial, a, b) -> int:
    """Number of distinct real roots of p in (a, b]; a, b rational or +/-inf."""
    if p.is_zero():
        raise DomainError("zero polynomial has infinitely many roots")
    if not a < b:
        raise IntervalError(f"empty interval ({a}, {b}]")
    sf = p.squarefree()
    if sf.degree <= 0:
        return 0
    seq = sturm_sequence(sf)
    return _variations(seq, a) - _variations(seq, b)


def cauchy_bound(p: IntPolynomial) -> Fraction:
    """All complex roots satisfy |z| < bound."""
    lc = abs(p.leading)
    return 1 + Fraction(max((abs(c) for c in p.coeffs[:-1]), default=0), lc)


# ---------------------------------------------------------------- classification

CYCLOTOMIC_PRODUCT = "cyclotomic-product"
SALEM = "salem"
MIXED = "mixed"
NOT_O_PLUS = "not-O-plus-shape"


@dataclass(frozen=True)
class SalemClassification:
    kind: str
    cyclotomic_factors: tuple[tuple[int, int], ...]
    salem_factor: IntPolynomial | None = None
    salem_degree: int | None = None
    remainder: IntPolynomial | None = field(default=None, compare=False)

    def reconstruct(self) -> IntPolynomial:
        out = ONE
        for n, mult in self.cyclotomic_factors:
            out = out * cyclotomic(n) ** mult
        rest = self.salem_factor if self.salem_factor is not None else self.remainder
        if rest is not None:
            out = out * rest
        return out

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "cyclotomic_factors": [[n, m] for n, m in self.cyclotomic_factors],
            "salem_factor": self.salem_factor.to_json() if self.salem_factor is not None else None,
            "salem_degree": self.salem_degree,
        }


def _is_salem_remainder(r: IntPolynomial) -> bool:
    if r.degree < 2 or r.degree % 2 or not r.is_monic() or not is_reciprocal(r):
        return False
    if r(1) == 0 or r(-1) == 0:
        return False
    t = trace_polynomial(r)
    d = t.degree
    # all d roots real and simple, exactly one beyond 2, the rest in (-2, 2)
    return (sturm_count(t, -math.inf, math.inf) == d
            and sturm_count(t, 2, math.inf) == 1
            and sturm_count(t, -2, 2) == d - 1
            and t.sign_at(-2) != 0)


def classify(p: IntPolynomial, max_degree: int | None = None, strict: bool = False) -> SalemClassification:
    """Split p into cyclotomic factors and at most one Salem factor.

    The remainder after removing every cyclotomic factor is accepted as Salem
    when it is reciprocal of even degree with its trace polynomial having one
    root in (2, inf) and the rest in (-2, 2).  That already makes it
    irreducible: a proper monic factor B not containing the large root would
    either contain 1/lambda, forcing 0 < |B(0)| < 1, or have every root on the
    unit circle, making it a cyclotomic product by Kronecker's theorem.  Both
    are impossible here, so no integer factorisation is needed.

    ``strict`` rejects degree-2 Salem factors (the classical convention
    requires degree >= 4).
    """
    if p.degree < 1 or not p.is_monic():
        raise ShapeError("classify needs a monic polynomial of degree >= 1")
    bound = p.degree if max_degree is None else max_degree
    rest = p
    factors = []
    for n in _cyclotomic_indices(max(bound, 1)):
        phi = cyclotomic(n)
        if phi.degree > rest.degree:
            continue
        mult = 0
        while rest.degree >= phi.degree:
            q, r = rest.divmod(phi)
            if r:
                break
            rest = q
            mult += 1
        if mult:
            factors.append((n, mult))
        if rest.degree == 0:
            break
    factors = tuple(factors)
    if rest.degree == 0:
        return SalemClassification(CYCLOTOMIC_PRODUCT, factors)
    if _is_salem_remainder(rest) and not (strict and rest.degree == 2):
        return SalemClassification(MIXED if factors else SALEM, factors, rest, rest.degree)
    return SalemClassification(NOT_O_PLUS, factors, remainder=rest)


# ---------------------------------------------------------------- spectral radius

@dataclass(frozen=True)
class EntropyInterval:
    lower: Fraction
    upper: Fraction
    log_lower: str
    log_upper: str
    digits: int

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper

    def to_json(self) -> dict:
        return {"lower": str(self.lower), "upper": str(self.upper),
                "log_lower": self.log_lower, "log_upper": self.log_upper, "digits": self.digits}

    @classmethod
    def from_json(cls, d: dict) -> "EntropyInterval":
        return cls(Fraction(d["lower"]), Fraction(d["upper"]), d["log_lower"], d["log_upper"], int(d["digits"]))


def _sqrt_bounds(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rational lower/upper bounds for sqrt(q), q >= 0, within 2^-bits."""
    scale = 1 << (2 * bits)
    num, den = q.numerator * scale, q.denominator
    lo = math.isqrt(num // den)
    hi_sq = -(-num // den)
    hi = math.isqrt(hi_sq)
    if hi * hi < hi_sq:
        hi += 1
    return Fraction(lo, 1 << bits), Fraction(hi, 1 << bits)


def _log_bounds(lo: Fraction, hi: Fraction, digits: int) -> tuple[str, str]:
    work = digits + 10
    down = Context(prec=work, rounding=ROUND_FLOOR)
    up = Context(prec=work, rounding=ROUND_CEILING)
    wide = Context(prec=2 * work + 20)
    a = down.divide(Decimal(lo.numerator), Decimal(lo.denominator))
    b = up.divide(Decimal(hi.numerator), Decimal(hi.denominator))
    # Decimal ln is correctly rounded to half an ulp; widen by a full ulp each way
    la = Context(prec=work).ln(a)
    lb = Context(prec=work).ln(b)
    la = down.subtract(la, Decimal(1).scaleb(la.adjusted() - work + 1)) if la else la
    lb = up.add(lb, Decimal(1).scaleb(lb.adjusted() - work + 1)) if lb else lb
    quantum = Decimal(1).scaleb(-digits)
    la = la.quantize(quantum, rounding=ROUND_FLOOR, context=wide)
    lb = lb.quantize(quantum, rounding=ROUND_CEILING, context=wide)
    if la < 0:
        la = Decimal(0).quantize(quantum, context=wide)
    return format(la, "f"), format(lb, "f")


def spectral_radius(c: SalemClassification, tol, digits: int = 30) -> EntropyInterval:
    """Rational enclosure of the spectral radius, of width <= tol.

    The unique trace root in (2, inf) is bisected with Sturm counts, then
    mapped through lambda = (y + sqrt(y^2 - 4)) / 2 with outward rounding.
    """
    tol = Fraction(tol)
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if c.salem_factor is None:
        if c.kind == NOT_O_PLUS:
            raise ShapeError("spectral radius needs a cyclotomic or Salem classification")
        zero = "0." + "0" * digits
        return EntropyInterval(Fraction(1), Fraction(1), zero, zero, digits)
    t = trace_polynomial(c.salem_factor)
    seq = sturm_sequence(t.squarefree())
    lo, hi = Fraction(2), cauchy_bound(t)
    bits = max(32, 2 * tol.denominator.bit_length() - tol.numerator.bit_length() + 8)
    while True:
        lam_lo = (lo + _sqrt_bounds(lo * lo - 4, bits)[0]) / 2
        lam_hi = (hi + _sqrt_bounds(hi * hi - 4, bits)[1]) / 2
        if lo > 2 and lam_hi - lam_lo <= tol:
            break
        mid = (lo + hi) / 2
        if _variations(seq, lo) - _variations(seq, mid) == 1:
            hi = mid
        else:
            lo = mid
    # snap to short dyadic endpoints, still outward
    lam_lo = Fraction(math.floor(lam_lo * (1 << bits)), 1 << bits)
    lam_hi = Fraction(math.ceil(lam_hi * (1 << bits)), 1 << bits)
    if lam_hi - lam_lo > tol:
        lam_lo, lam_hi = (lo + _sqrt_bounds(lo * lo - 4, bits)[0]) / 2, (hi + _sqrt_bounds(hi * hi - 4, bits)[1]) / 2
    log_lo, log_hi = _log_bounds(lam_lo, lam_hi, digits)
    return EntropyInterval(lam_lo, lam_hi, log_lo, log_hi, digits)
