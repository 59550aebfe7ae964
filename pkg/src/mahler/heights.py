"""Weil heights and Mahler measures via two independent pipelines.

`mahler_roots` multiplies the leading coefficient by the conjugate moduli
outside the unit circle; `mahler_places` assembles the same quantity from
local data: finite places read off prime valuations of the leading
coefficient, archimedean places grouped by real embeddings and conjugate
pairs (no square roots, so the rounding paths genuinely differ).  Roots that
lie exactly on the unit circle are detected algebraically first (reciprocal
test plus a Sturm count in the z + 1/z coordinate), which keeps every
max{1, |conjugate|} comparison decidable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import sympy

from .errors import UndecidedComparisonError, ZeroPolynomialError
from ._intervals import Box, Ival, Rat, rat_root_lower, rat_root_upper
from . import polycore
from .algnum import AlgebraicNumber, SurdExpr, detect_surd, from_surd, is_torsion
from .polycore import (DEFAULT_PRECISION, IntPoly, factor_rational,
                       root_engine, unit_circle_root_count)

_MAX_BITS = 1 << 14


# ---------------------------------------------------------------------------
# Exact rational-power values and measure enclosures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactPow:
    """base^exp with rational base >= 1 and rational exp > 0.

    Canonical form: base is 1 (with exp 1) or not a perfect power, so that
    equal values have equal representations.
    """

    base: Fraction
    exp: Fraction

    @staticmethod
    def of(base, exp=1) -> "ExactPow":
        base, exp = Fraction(base), Fraction(exp)
        if base < 1 or exp <= 0:
            if base == 1 or exp == 0:
                return ExactPow(Fraction(1), Fraction(1))
            raise ValueError(f"not a canonical measure power: {base}^{exp}")
        if base == 1:
            return ExactPow(Fraction(1), Fraction(1))
        from .algnum import _perfect_power_split
        c, k = _perfect_power_split(base)
        return ExactPow(c, k * exp)

    def is_one(self) -> bool:
        return self.base == 1

    def as_rational(self) -> Optional[Fraction]:
        if self.exp.denominator == 1:
            return self.base ** self.exp.numerator
        return None

    def __mul__(self, other: "ExactPow") -> "ExactPow":
        if self.is_one():
            return other
        if other.is_one():
            return self
        q = math.lcm(self.exp.denominator, other.exp.denominator)
        b = (self.base ** int(self.exp * q)) * (other.base ** int(other.exp * q))
        return ExactPow.of(b, Fraction(1, q))

    def pow(self, r: Fraction) -> "ExactPow":
        r = Fraction(r)
        if r <= 0:
            raise ValueError("measure powers need positive exponents")
        if self.is_one():
            return self
        return ExactPow.of(self.base, self.exp * r)

    def cmp(self, other: "ExactPow") -> int:
        q = math.lcm(self.exp.denominator, other.exp.denominator)
        a = self.base ** int(self.exp * q)
        b = other.base ** int(other.exp * q)
        return (a > b) - (a < b)

    def cmp_rational(self, r: Fraction) -> int:
        q = self.exp.denominator
        a = self.base ** self.exp.numerator
        b = Fraction(r) ** q
        return (a > b) - (a < b)

    def enclosure(self, bits: int) -> Ival:
        v = self.base ** self.exp.numerator
        q = self.exp.denominator
        return Ival(rat_root_lower(v, q, bits), rat_root_upper(v, q, bits))

    def __str__(self) -> str:
        if self.exp == 1:
            return str(self.base)
        return f"{self.base}^({self.exp.numerator}/{self.exp.denominator})" \
            if self.exp.denominator > 1 else f"{self.base}^{self.exp.numerator}"


ONE_POW = ExactPow(Fraction(1), Fraction(1))


@dataclass(frozen=True)
class MeasureValue:
    """An exact nonnegative real >= 1: certified enclosure plus, when the
    value lies in rad(Q), an exact rational power."""

    lo: Fraction
    hi: Fraction
    exact: Optional[ExactPow] = None
    _refiner: Optional[Callable[[int], tuple[Fraction, Fraction]]] = \
        field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty measure enclosure")
        if self.lo < 1:
            object.__setattr__(self, "lo", Fraction(1))

    @staticmethod
    def from_exact(e: ExactPow, bits: int = 64) -> "MeasureValue":
        iv = e.enclosure(bits)
        return MeasureValue(iv.lo, iv.hi, e)

    @staticmethod
    def one() -> "MeasureValue":
        return MeasureValue(Fraction(1), Fraction(1), ONE_POW)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def refined(self, bits: int) -> "MeasureValue":
        if self.exact is not None:
            iv = self.exact.enclosure(bits)
            lo, hi = max(iv.lo, self.lo), min(iv.hi, self.hi)
            return MeasureValue(lo, hi, self.exact, self._refiner)
        if self._refiner is not None:
            lo, hi = self._refiner(bits)
            return MeasureValue(max(lo, self.lo), min(hi, self.hi),
                                None, self._refiner)
        return self

    def interval(self) -> Ival:
        return Ival(self.lo, self.hi)

    def as_rational(self) -> Optional[Fraction]:
        return self.exact.as_rational() if self.exact is not None else None

    def __str__(self) -> str:
        if self.exact is not None:
            return str(self.exact)
        return f"[{self.lo},{self.hi}]"


def compare(a: MeasureValue, b: MeasureValue, max_bits: int = 4096) -> int:
    """Total comparison of measure values: -1, 0, +1.

    Exact-vs-exact compares via integer exponent clearing; mixed and
    enclosure comparisons refine until the intervals separate.  Raises
    UndecidedComparisonError if enclosures keep overlapping at the cap (which
    cannot happen when at least one side is exact and the values differ).
    """
    if a.exact is not None and b.exact is not None:
        return a.exact.cmp(b.exact)
    bits = 64
    while bits <= max_bits:
        ra, rb = a.refined(bits), b.refined(bits)
        if ra.hi < rb.lo:
            return -1
        if rb.hi < ra.lo:
            return 1
        bits *= 2
    raise UndecidedComparisonError(
        f"measures {a} and {b} undecided at {max_bits} bits")


def le(a: MeasureValue, b: MeasureValue, max_bits: int = 4096) -> bool:
    """a <= b, treating enclosure-overlap-at-cap with equal exact forms as
    equality; raises when genuinely undecided."""
    if a.exact is not None and b.exact is not None:
        return a.exact.cmp(b.exact) <= 0
    bits = 64
    while bits <= max_bits:
        ra, rb = a.refined(bits), b.refined(bits)
        if ra.hi <= rb.lo:
            return True
        if rb.hi < ra.lo:
            return False
        bits *= 2
    raise UndecidedComparisonError(f"le({a}, {b}) undecided")


# ---------------------------------------------------------------------------
# Conjugate classification against the unit circle
# ---------------------------------------------------------------------------

_OUT, _IN, _ON = 1, -1, 0


def _classify_roots(p: IntPoly, bits: int) -> list[tuple[int, int, Ival]]:
    """(index, status, |z|^2 interval) per root of the irreducible p.

    Status: +1 strictly outside the unit circle, -1 strictly inside, 0
    exactly on it.  The on-circle count is known algebraically, so the
    refinement loop terminates: it stops as soon as the number of undecided
    boxes equals that count.
    """
    on_count = unit_circle_root_count(p)
    eng = root_engine(p)
    work = bits
    while True:
        out = []
        undecided = 0
        for i in range(eng.count):
            a2 = eng.refined(i, work).abs2()
            if a2.lo > 1:
                out.append((i, _OUT, a2))
            elif a2.hi < 1:
                out.append((i, _IN, a2))
            else:
                out.append((i, _ON, a2))
                undecided += 1
        if undecided == on_count:
            return out
        work += 48
        if work > _MAX_BITS:
            raise UndecidedComparisonError(
                f"could not classify roots of {p} against the unit circle")


# ---------------------------------------------------------------------------
# The measure pipelines
# ---------------------------------------------------------------------------


def measure_of_surd(s: SurdExpr) -> MeasureValue:
    """Exact Mahler measure of an element of rad(Q).

    For gamma with zeta*gamma^L rational (L the exponent denominator), the
    measure is the rational's height raised to deg(gamma)/L, an exact
    rational power; here gamma = zeta * (A/B)^(P/Q) canonical gives
    M = max(A, B)^(|P| * deg / Q).
    """
    s = s.canonical()
    if s.base == 1:
        return MeasureValue.one()
    deg = from_surd(s).degree
    h = max(s.base.numerator, s.base.denominator)
    e = ExactPow.of(Fraction(h), Fraction(abs(s.exp.numerator) * deg,
                                          s.exp.denominator))
    return MeasureValue.from_exact(e)


def _bits_for(precision: Rat) -> int:
    return polycore._bits_for_precision(precision)


def mahler_roots(x: AlgebraicNumber, precision: Rat = DEFAULT_PRECISION) -> MeasureValue:
    """M(x) = |A| * prod max{1, |conjugate|}, as a certified enclosure; the
    exact rational-power form is attached whenever x lies in rad(Q)."""
    if x.is_zero():
        raise ZeroPolynomialError("measure of zero")
    exact = None
    s = detect_surd(x)
    if s is not None:
        exact = measure_of_surd(s).exact
    if is_torsion(x):
        return MeasureValue.one()
    p = x.minpoly

    def enclose(bits: int) -> tuple[Fraction, Fraction]:
        states = _classify_roots(p, bits)
        acc = Ival.point(abs(p.lc))
        for i, st, a2 in states:
            if st == _OUT:
                acc = acc * a2.sqrt(bits)
        return acc.lo, acc.hi

    target = Fraction(precision)
    bits = max(32, _bits_for(precision))
    while True:
        lo, hi = enclose(bits)
        if hi - lo <= target or bits > _MAX_BITS:
            break
        bits *= 2
    return MeasureValue(lo, hi, exact, enclose)


@dataclass(frozen=True)
class PlaceDecomposition:
    """Local data of an algebraic number.

    archimedean: per conjugate index, an enclosure of its complex modulus.
    nonarchimedean: per rational prime p dividing numerator or denominator
    data of the minimal polynomial, the exact exponent e_p with
    prod_{v | p} |x|_v = p^{e_p} (local degrees already folded in).
    """

    archimedean: tuple[tuple[int, Ival], ...]
    nonarchimedean: tuple[tuple[int, Fraction], ...]
    degree: int
    lead: int
    constant: int

    def finite_product_exponents_consistent(self) -> bool:
        """Exact product-formula bookkeeping on the finite side:
        prod_p p^{e_p * degree} must equal |lead| / |constant|."""
        val = Fraction(1)
        for p, e in self.nonarchimedean:
            val *= Fraction(p) ** int(e * self.degree)
        return val == Fraction(abs(self.lead), abs(self.constant))

    def archimedean_product_contains_norm(self) -> bool:
        """The enclosure of prod |conjugates| must contain |a0 / ad|."""
        acc = Ival.point(1)
        for _, m in self.archimedean:
            acc = acc * m
        return acc.contains(Fraction(abs(self.constant), abs(self.lead)))


def place_decomposition(x: AlgebraicNumber,
                        precision: Rat = DEFAULT_PRECISION) -> PlaceDecomposition:
    if x.is_zero():
        raise ZeroPolynomialError("places of zero")
    p = x.minpoly
    d = p.degree
    bits = max(32, _bits_for(precision))
    eng = root_engine(p)
    arch = tuple((i, eng.refined(i, bits).abs2().sqrt(bits))
                 for i in range(eng.count))
    primes: set[int] = set()
    for v in (abs(p.lc), abs(p.coeffs[0])):
        if v > 1:
            primes.update(int(q) for q in sympy.factorint(v))
    nonarch = []
    for q in sorted(primes):
        vd = _valuation(p.lc, q)
        v0 = _valuation(p.coeffs[0], q)
        nonarch.append((q, Fraction(vd - v0, d)))
    return PlaceDecomposition(arch, tuple(nonarch), d, p.lc, p.coeffs[0])


def _valuation(n: int, q: int) -> int:
    n = abs(n)
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


def mahler_places(x: AlgebraicNumber, precision: Rat = DEFAULT_PRECISION) -> MeasureValue:
    """M(x) assembled from places: the finite part is prod_p p^{v_p(lead)}
    (exact), the archimedean part multiplies real-embedding moduli and
    conjugate-pair squared-moduli, staying in rational arithmetic."""
    if x.is_zero():
        raise ZeroPolynomialError("measure of zero")
    exact = None
    s = detect_surd(x)
    if s is not None:
        exact = measure_of_surd(s).exact
    if is_torsion(x):
        return MeasureValue.one()
    p = x.minpoly
    eng = root_engine(p)
    finite = Fraction(1)
    if abs(p.lc) > 1:
        for q, e in sympy.factorint(abs(p.lc)).items():
            finite *= Fraction(int(q)) ** int(e)
    assert finite == abs(p.lc)

    def enclose(bits: int) -> tuple[Fraction, Fraction]:
        states = _classify_roots(p, bits)
        acc = Ival.point(finite)
        for i, st, a2 in states:
            if st != _OUT:
                continue
            if eng.roots[i].is_real:
                acc = acc * eng.refined(i, bits).re.abs()
            else:
                b = eng.refined(i, bits)
                if b.im.lo > 0:  # count each conjugate pair once, squared
                    acc = acc * a2
        return acc.lo, acc.hi

    target = Fraction(precision)
    bits = max(32, _bits_for(precision))
    while True:
        lo, hi = enclose(bits)
        if hi - lo <= target or bits > _MAX_BITS:
            break
        bits *= 2
    return MeasureValue(lo, hi, exact, enclose)


def weil_height(x: AlgebraicNumber, precision: Rat = DEFAULT_PRECISION) -> MeasureValue:
    """H(x) = M(x)^(1/deg x), exact form propagated."""
    if x.is_zero():
        raise ZeroPolynomialError("height of zero")
    d = x.degree
    m = mahler_roots(x, precision)
    exact = m.exact.pow(Fraction(1, d)) if m.exact is not None else None

    def enclose(bits: int) -> tuple[Fraction, Fraction]:
        mm = m.refined(bits + 4 * d)
        iv = Ival(mm.lo, mm.hi).root(d, bits)
        return iv.lo, iv.hi

    target = Fraction(precision)
    bits = max(32, _bits_for(precision))
    while True:
        lo, hi = enclose(bits)
        if hi - lo <= target or bits > _MAX_BITS:
            break
        bits *= 2
    return MeasureValue(lo, hi, exact, enclose)


def mahler_of_poly(p: IntPoly, precision: Rat = DEFAULT_PRECISION) -> MeasureValue:
    """Mahler measure of an arbitrary nonzero integer polynomial:
    |content| times the product of the measures of its irreducible factors
    with multiplicity."""
    if p.is_zero():
        raise ZeroPolynomialError("measure of the zero polynomial")
    c, factors = factor_rational(p)
    out = MeasureValue.from_exact(ExactPow.of(abs(Fraction(c))))
    target = Fraction(precision)
    pieces = []
    for f, mult in factors:
        if f == polycore.X:
            continue
        xf = AlgebraicNumber(f, 0)
        for _ in range(mult):
            pieces.append(xf)
    bits = max(32, _bits_for(precision))
    while True:
        acc = Ival.point(abs(Fraction(c)))
        exacts: Optional[ExactPow] = ExactPow.of(abs(Fraction(c)))
        for xf in pieces:
            mv = mahler_roots(xf, Fraction(1, 1 << bits))
            acc = acc * mv.interval()
            exacts = exacts * mv.exact if (exacts is not None and mv.exact is not None) else None
        if acc.width() <= target or bits > _MAX_BITS:
            return MeasureValue(acc.lo, acc.hi, exacts)
        bits *= 2
