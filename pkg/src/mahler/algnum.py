"""Exact arithmetic on algebraic numbers, explicit surds, number fields,
factorization over number fields, and Galois closures.

An algebraic number is an irreducible primitive integer polynomial together
with a canonical root index; isolating boxes come from the certified root
engines in `polycore`, so every selection made here is backed by exact
interval arithmetic.  Number field elements are rational coefficient vectors
over a primitive generator; factorization over a field uses Trager's norm
reduction to factorization over Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import sympy

from .errors import (ExprParseError, IsolationError, NonGaloisFieldError,
                     UnsupportedDegreeError, ZeroPolynomialError)
from ._intervals import Box, Ival, Rat, unit_root_box, rat_root_lower, rat_root_upper
from . import polycore
from .polycore import (IntPoly, QQPoly, cyclotomic_index, cyclotomic_poly,
                       factor_rational, normalize, parse_poly, qq_divmod,
                       qq_from_int, qq_gcd_monic, qq_mul, qq_sub, qq_to_intpoly,
                       qq_trim, resultant_poly_entries, root_engine)

DEFAULT_CLOSURE_CAP = 12

_SELECT_BITS = (16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512, 768, 1024,
                1536, 2048, 3072, 4096)


# ---------------------------------------------------------------------------
# Surd expressions: explicit elements of rad(Q)
# ---------------------------------------------------------------------------


def _perfect_power_split(q: Fraction) -> tuple[Fraction, int]:
    """Write q = c^k with k maximal (q > 0, q != 1); returns (c, k)."""
    num, den = q.numerator, q.denominator
    fn = sympy.factorint(num) if num > 1 else {}
    fd = sympy.factorint(den) if den > 1 else {}
    exps = list(fn.values()) + list(fd.values())
    k = 0
    for e in exps:
        k = math.gcd(k, e)
    if k <= 1:
        return q, 1
    c = Fraction(1)
    for p, e in fn.items():
        c *= Fraction(int(p)) ** (e // k)
    for p, e in fd.items():
        c /= Fraction(int(p)) ** (e // k)
    return c, k


def _torsion_combine(m1: int, j1: int, m2: int, j2: int) -> tuple[int, int]:
    m = math.lcm(m1, m2)
    j = (j1 * (m // m1) + j2 * (m // m2)) % m
    g = math.gcd(j, m)
    return m // g, j // g


@dataclass(frozen=True)
class SurdExpr:
    """zeta_m^j * base^exp, where base^exp means the principal real root.

    Canonical form: 0 <= j < m with gcd(j, m) = 1 (or j = 0, m = 1);
    base > 1 and not a perfect power, or base = 1 with exp = 1.
    """

    m: int = 1
    j: int = 0
    base: Fraction = Fraction(1)
    exp: Fraction = Fraction(1)

    def canonical(self) -> "SurdExpr":
        m, j = self.m, self.j % self.m
        base = Fraction(self.base)
        exp = Fraction(self.exp)
        if base == 0:
            raise ValueError("surd base must be nonzero")
        if base < 0:
            # (-c)^(p/q) denotes the principal branch e^{i pi p/q} c^{p/q}.
            base = -base
            m, j = _torsion_combine(m, j, 2 * exp.denominator,
                                    exp.numerator % (2 * exp.denominator))
        g = math.gcd(j, m) if j else m
        m, j = m // g, j // g
        if exp == 0 or base == 1:
            return SurdExpr(m, j, Fraction(1), Fraction(1))
        if base < 1:
            base, exp = 1 / base, -exp
        c, k = _perfect_power_split(base)
        return SurdExpr(m, j, c, k * exp)

    # -- value structure ----------------------------------------------------

    @property
    def is_torsion(self) -> bool:
        s = self.canonical()
        return s.base == 1

    def mul(self, other: "SurdExpr") -> "SurdExpr":
        a, b = self.canonical(), other.canonical()
        m, j = _torsion_combine(a.m, a.j, b.m, b.j)
        q1, q2 = a.exp.denominator, b.exp.denominator
        base = (a.base ** (a.exp.numerator * q2)) * (b.base ** (b.exp.numerator * q1))
        return SurdExpr(m, j, base, Fraction(1, q1 * q2)).canonical()

    def inv(self) -> "SurdExpr":
        s = self.canonical()
        return SurdExpr(s.m, (-s.j) % s.m, s.base, -s.exp).canonical()

    def pow(self, n: Fraction) -> "SurdExpr":
        """Principal-branch rational power: the torsion angle divides by the
        denominator of n, the radical exponent multiplies by n."""
        n = Fraction(n)
        s = self.canonical()
        if n == 0:
            return SurdExpr()
        return SurdExpr(s.m * n.denominator, s.j * n.numerator,
                        s.base, s.exp * n).canonical()

    def real_part_ival(self, bits: int) -> Ival:
        """Enclosure of base^exp (the positive real factor)."""
        s = self.canonical()
        val = s.base ** s.exp.numerator  # exact rational, base > 0
        q = s.exp.denominator
        return Ival(rat_root_lower(val, q, bits), rat_root_upper(val, q, bits))

    def box(self, bits: int) -> Box:
        s = self.canonical()
        real = Box(s.real_part_ival(bits), Ival.point(0))
        if s.m == 1:
            return real
        return real * unit_root_box(s.j, s.m, bits + 4)

    def __str__(self) -> str:
        s = self.canonical()
        parts = []
        if s.m > 1:
            parts.append(f"zeta({s.m},{s.j})")
        if s.base != 1 or not parts:
            b = str(s.base)
            if s.exp == 1:
                parts.append(b)
            else:
                e = (f"{s.exp}" if s.exp.denominator == 1
                     else f"({s.exp.numerator}/{s.exp.denominator})")
                if s.exp.denominator == 1 and s.exp >= 0:
                    parts.append(f"({b})^{e}")
                else:
                    parts.append(f"({b})^({s.exp.numerator}/{s.exp.denominator})")
        return "*".join(parts)


# ---------------------------------------------------------------------------
# Algebraic numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraicNumber:
    """A root of an irreducible primitive integer polynomial.

    `index` refers to the canonical root ordering (by box centers) of the
    polynomial's certified root engine, which makes equality and hashing
    structural.
    """

    minpoly: IntPoly
    index: int
    surd: Optional[SurdExpr] = field(default=None, compare=False)

    @property
    def degree(self) -> int:
        return self.minpoly.degree

    def box(self, bits: int) -> Box:
        return root_engine(self.minpoly).refined(self.index, bits)

    @property
    def is_real(self) -> bool:
        return root_engine(self.minpoly).roots[self.index].is_real

    def is_rational(self) -> bool:
        return self.degree == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(-self.minpoly.coeffs[0], self.minpoly.coeffs[1])

    def is_zero(self) -> bool:
        return self.minpoly == polycore.X

    def root_box(self, precision: Rat = polycore.DEFAULT_PRECISION) -> polycore.RootBox:
        bits = polycore._bits_for_precision(precision)
        return polycore.RootBox.from_box(self.box(bits))

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.as_fraction())
        if self.surd is not None:
            return str(self.surd)
        return f"rootof({self.minpoly},{self.index})"

    def __repr__(self) -> str:
        return f"AlgebraicNumber({self})"


def from_rational(c) -> AlgebraicNumber:
    c = Fraction(c)
    p = normalize(IntPoly((-c.numerator, c.denominator)))
    s = None
    if c != 0:
        s = SurdExpr(base=abs(c)) if c > 0 else SurdExpr(m=2, j=1, base=abs(c))
        s = s.canonical()
    return AlgebraicNumber(p, 0, s)


ZERO_AN = from_rational(0)
ONE_AN = from_rational(1)


def select_root(candidates: Sequence[tuple[IntPoly, int]], refiner) -> tuple[IntPoly, int]:
    """Narrow (polynomial, root index) candidates to the unique one whose
    certified box keeps intersecting the refining target enclosure."""
    cands = list(candidates)
    for bits in _SELECT_BITS:
        target = refiner(bits)
        keep = []
        for f, i in cands:
            if not root_engine(f).refined(i, bits).disjoint(target):
                keep.append((f, i))
        cands = keep
        if len(cands) == 1:
            return cands[0]
        if not cands:
            raise IsolationError("selection eliminated every candidate root")
    raise IsolationError("root selection did not converge")


def algebraic_from_annihilator(ann: IntPoly, refiner,
                               surd: Optional[SurdExpr] = None) -> AlgebraicNumber:
    """The unique root of `ann` inside the refining enclosure."""
    if ann.is_zero():
        raise ZeroPolynomialError("zero annihilator")
    _, factors = factor_rational(ann)
    cands = [(f, i) for f, _ in factors if f.degree >= 1
             for i in range(f.degree)]
    f, i = select_root(cands, refiner)
    return AlgebraicNumber(f, i, surd)


def from_poly_root(p: IntPoly, index: int) -> AlgebraicNumber:
    """Root #index (canonical order) of an irreducible polynomial."""
    p = normalize(p)
    if not polycore.is_irreducible(p):
        raise ValueError(f"{p} is not irreducible over Q")
    if not 0 <= index < p.degree:
        raise IndexError("root index out of range")
    return AlgebraicNumber(p, index)


def roots_of(p: IntPoly) -> list[AlgebraicNumber]:
    """All roots of a nonzero polynomial, without multiplicity, in canonical
    order (sorted by certified box centers at the reference precision)."""
    if p.is_zero():
        raise ZeroPolynomialError("zero polynomial")
    _, factors = factor_rational(p)
    out = []
    for f, _ in factors:
        for i in range(max(0, f.degree)):
            out.append(AlgebraicNumber(f, i))
    def keyfn(a: AlgebraicNumber):
        c = a.box(32).mid()
        return (c[0], c[1])
    out.sort(key=keyfn)
    return out


def from_surd(s: SurdExpr) -> AlgebraicNumber:
    """The algebraic number denoted by a surd expression."""
    s = s.canonical()
    if s.base == 1:
        ann = cyclotomic_poly(s.m)
        return algebraic_from_annihilator(
            ann, lambda bits: unit_root_box(s.j, s.m, bits), surd=s)
    q = s.exp.denominator
    p = s.exp.numerator
    c = s.base ** p  # exact rational, may have huge height only at desk scale
    m2, j2 = s.m, (s.j * q) % s.m
    g = math.gcd(j2, m2) if j2 else m2
    m2, j2 = m2 // g, j2 // g
    num, den = c.numerator, c.denominator
    if m2 == 1:
        ann = IntPoly((-num,) + (0,) * (q - 1) + (den,))
    elif m2 == 2:
        ann = IntPoly((num,) + (0,) * (q - 1) + (den,))
    else:
        # Res_y(Phi_{m2}(y), den*x^q - num*y^{j2})
        phi = cyclotomic_poly(m2)
        a_entries = [IntPoly((cc,)) for cc in phi.coeffs]
        b_entries = [IntPoly() for _ in range(j2 + 1)]
        b_entries[0] = IntPoly((0,) * q + (den,))
        b_entries[j2] = b_entries[j2] + IntPoly((-num,))
        ann = resultant_poly_entries(a_entries, b_entries)
    return algebraic_from_annihilator(ann, s.box, surd=s)


# -- arithmetic --------------------------------------------------------------


def _scaled_minpoly(p: IntPoly, c: Fraction) -> IntPoly:
    """Minimal polynomial of c*alpha given the minpoly p of alpha (c != 0)."""
    u, v = c.numerator, c.denominator
    d = p.degree
    return normalize(IntPoly(p.coeffs[i] * u ** (d - i) * v ** i for i in range(d + 1)))


def _box_pow(b: Box, n: int) -> Box:
    out = Box.point(1)
    for _ in range(n):
        out = out * b
    return out


def mul(x: AlgebraicNumber, y: AlgebraicNumber) -> AlgebraicNumber:
    """Exact product of two nonzero algebraic numbers."""
    if x.is_zero() or y.is_zero():
        raise ZeroPolynomialError("mul requires nonzero arguments")
    surd = None
    if x.surd is not None and y.surd is not None:
        surd = x.surd.mul(y.surd)
    if x.is_rational():
        x, y = y, x
    if y.is_rational():
        c = y.as_fraction()
        if x.is_rational():
            return from_rational(x.as_fraction() * c)
        ann = _scaled_minpoly(x.minpoly, c)
        return algebraic_from_annihilator(
            ann, lambda bits: x.box(bits).mul_point(c, Fraction(0)), surd=surd)
    p, q = x.minpoly, y.minpoly
    m = q.degree
    # Res_z(p(z), z^m q(t/z)): coefficient of z^i is q_{m-i} t^{m-i}
    q_entries = [IntPoly((0,) * (m - i) + (q.coeffs[m - i],)) for i in range(m + 1)]
    p_entries = [IntPoly((cc,)) for cc in p.coeffs]
    ann = resultant_poly_entries(p_entries, q_entries)
    return algebraic_from_annihilator(
        ann, lambda bits: x.box(bits) * y.box(bits), surd=surd)


def inv(x: AlgebraicNumber) -> AlgebraicNumber:
    """Exact multiplicative inverse."""
    if x.is_zero():
        raise ZeroDivisionError("inversion of zero")
    if x.is_rational():
        return from_rational(1 / x.as_fraction())
    surd = x.surd.inv() if x.surd is not None else None
    ann = normalize(x.minpoly.reverse())

    def refiner(bits: int) -> Box:
        b = x.box(bits)
        extra = bits
        while b.abs2().contains_zero():
            extra += 32
            b = x.box(extra)
        return b.recip()

    return algebraic_from_annihilator(ann, refiner, surd=surd)


def pow_int(x: AlgebraicNumber, n: int) -> AlgebraicNumber:
    """Exact integer power; pow_int(x, 0) = 1."""
    if n == 0:
        return ONE_AN
    if n < 0:
        return inv(pow_int(x, -n))
    if x.is_rational():
        return from_rational(x.as_fraction() ** n)
    if x.is_zero():
        return ZERO_AN
    surd = x.surd.pow(Fraction(n)) if x.surd is not None else None
    p = x.minpoly
    # Res_z(p(z), z^n - t)
    b_entries = [IntPoly((0, -1))] + [IntPoly()] * (n - 1) + [IntPoly((1,))]
    p_entries = [IntPoly((cc,)) for cc in p.coeffs]
    ann = resultant_poly_entries(p_entries, b_entries)
    return algebraic_from_annihilator(
        ann, lambda bits: _box_pow(x.box(bits + n), n), surd=surd)


def conjugates(x: AlgebraicNumber) -> list[AlgebraicNumber]:
    """All roots of x's minimal polynomial, in canonical order."""
    if x.is_zero():
        raise ZeroPolynomialError("conjugates of zero")
    return [AlgebraicNumber(x.minpoly, i) for i in range(x.degree)]


def is_torsion(x: AlgebraicNumber) -> bool:
    """True iff x is a root of unity."""
    if x.is_zero():
        raise ZeroPolynomialError("is_torsion of zero")
    return cyclotomic_index(x.minpoly) is not None


def torsion_data(x: AlgebraicNumber) -> Optional[tuple[int, int]]:
    """For a root of unity, its exact (order m, index j) with x = zeta_m^j."""
    n = cyclotomic_index(x.minpoly)
    if n is None:
        return None
    js = [j for j in range(n) if math.gcd(j, n) == 1] if n > 1 else [0]
    for bits in _SELECT_BITS:
        xb = x.box(bits)
        keep = [j for j in js if not unit_root_box(j, n, bits).disjoint(xb)]
        js = keep
        if len(js) == 1:
            return n, js[0]
    raise IsolationError("torsion identification did not converge")


def torsion_number(m: int, j: int) -> AlgebraicNumber:
    return from_surd(SurdExpr(m=m, j=j))


def product(xs: Sequence[AlgebraicNumber]) -> AlgebraicNumber:
    out = ONE_AN
    for x in xs:
        out = mul(out, x)
    return out


def detect_surd(x: AlgebraicNumber, max_power: Optional[int] = None) -> Optional[SurdExpr]:
    """If x lies in rad(Q), an explicit surd expression for it, else None.

    x is in rad(Q) iff some power x^r is rational, i.e. the remainder of x^r
    modulo the minimal polynomial is a constant; that is found by modular
    exponentiation in Q[x]/(minpoly).  The least such r is at most 4*deg^2+4
    for every rad(Q) element at desk scale, which bounds the sweep.
    """
    if x.surd is not None:
        return x.surd
    if x.is_rational():
        return from_rational(x.as_fraction()).surd
    d = x.degree
    cap = max_power if max_power is not None else 4 * d * d + 4
    minq = qq_from_int(x.minpoly)
    xq: QQPoly = (Fraction(0), Fraction(1))
    cur = xq
    for r in range(2, cap + 1):
        cur = qq_divmod(qq_mul(cur, xq), minq)[1]
        if len(cur) <= 1:
            c = cur[0] if cur else Fraction(0)
            if c == 0:
                return None  # x nilpotent is impossible; defensive
            # x = zeta * |c|^(1/r); identify the torsion part from boxes.
            base = SurdExpr(base=abs(c), exp=Fraction(1, r)).canonical()
            ratio = mul(x, inv(from_surd(base)))
            if not is_torsion(ratio):
                return None
            m, j = torsion_data(ratio)
            s = SurdExpr(m, j).mul(base)
            if from_surd(s) == x:
                object.__setattr__(x, "surd", s)
                return s
            return None
    return None


# ---------------------------------------------------------------------------
# Number fields, elements as rational vectors over a primitive generator
# ---------------------------------------------------------------------------

Elt = tuple[Fraction, ...]
KxPoly = tuple[Elt, ...]


class NumberField:
    """Q(theta) for a primitive generator theta; elements are rational
    coefficient vectors of length `degree` in powers of theta."""

    def __init__(self, generator: AlgebraicNumber):
        self.generator = generator
        self.degree = generator.degree
        self._minpoly_qq = tuple(Fraction(c, generator.minpoly.lc)
                                 for c in generator.minpoly.coeffs)
        self._is_galois: Optional[bool] = None
        self._torsion: Optional[tuple[int, int]] = None

    def __repr__(self) -> str:
        return f"NumberField({self.generator}, degree={self.degree})"

    def __eq__(self, other) -> bool:
        return isinstance(other, NumberField) and self.generator == other.generator

    def __hash__(self):
        return hash(("NumberField", self.generator))

    # -- element arithmetic ---------------------------------------------------

    def zero(self) -> Elt:
        return (Fraction(0),) * self.degree

    def one(self) -> Elt:
        return self.from_rational(1)

    def from_rational(self, c) -> Elt:
        out = [Fraction(0)] * self.degree
        out[0] = Fraction(c)
        return tuple(out)

    def gen_elt(self) -> Elt:
        if self.degree == 1:
            return (self.generator.as_fraction(),)
        out = [Fraction(0)] * self.degree
        out[1] = Fraction(1)
        return tuple(out)

    def _reduce(self, poly: QQPoly) -> Elt:
        _, r = qq_divmod(poly, self._minpoly_qq)
        return tuple(r) + (Fraction(0),) * (self.degree - len(r))

    def add(self, a: Elt, b: Elt) -> Elt:
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a: Elt, b: Elt) -> Elt:
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a: Elt) -> Elt:
        return tuple(-x for x in a)

    def scale(self, a: Elt, c: Fraction) -> Elt:
        return tuple(x * c for x in a)

    def mul(self, a: Elt, b: Elt) -> Elt:
        return self._reduce(qq_mul(qq_trim(a), qq_trim(b)))

    def is_zero_elt(self, a: Elt) -> bool:
        return all(c == 0 for c in a)

    def inv(self, a: Elt) -> Elt:
        if self.is_zero_elt(a):
            raise ZeroDivisionError("inverse of zero field element")
        # extended Euclid in Q[y] against the generator's minimal polynomial
        r0, r1 = self._minpoly_qq, qq_trim(a)
        s0, s1 = (), (Fraction(1),)
        while r1:
            q, r = qq_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, qq_sub(s0, qq_mul(q, s1))
        assert len(r0) == 1, "element not invertible (minpoly not irreducible?)"
        c = r0[0]
        return self._reduce(tuple(x / c for x in s0))

    def div(self, a: Elt, b: Elt) -> Elt:
        return self.mul(a, self.inv(b))

    def pow(self, a: Elt, n: int) -> Elt:
        if n < 0:
            return self.pow(self.inv(a), -n)
        out = self.one()
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def elt_as_rational(self, a: Elt) -> Optional[Fraction]:
        if all(c == 0 for c in a[1:]):
            return a[0] if self.degree > 1 else a[0]
        return None

    def eval_box(self, a: Elt, bits: int) -> Box:
        gb = self.generator.box(bits)
        acc = Box.point(0)
        for c in reversed(a):
            acc = (acc * gb).add_point(c, Fraction(0))
        return acc

    def elt_to_algebraic(self, a: Elt) -> AlgebraicNumber:
        r = self.elt_as_rational(a)
        if r is not None:
            return from_rational(r)
        g = self.generator.minpoly
        den = math.lcm(*(c.denominator for c in a))
        e_int = [int(c * den) for c in a]
        # Res_y(den*x - E(y), g(y)) annihilates the element; entry for y^k is
        # the IntPoly in x: den*x - e_0 for k = 0, else -e_k.
        a_entries = [IntPoly((cc,)) for cc in g.coeffs]
        b_entries = [IntPoly((-e, den)) if k == 0 else IntPoly((-e,))
                     for k, e in enumerate(e_int)]
        ann = resultant_poly_entries(b_entries, a_entries)
        return algebraic_from_annihilator(ann, lambda bits: self.eval_box(a, bits))

    # -- polynomials over the field -------------------------------------------

    def kx_trim(self, f: Sequence[Elt]) -> KxPoly:
        f = list(f)
        while f and self.is_zero_elt(f[-1]):
            f.pop()
        return tuple(f)

    def kx_from_intpoly(self, p: IntPoly) -> KxPoly:
        return self.kx_trim([self.from_rational(c) for c in p.coeffs])

    def kx_from_qq(self, p: QQPoly) -> KxPoly:
        return self.kx_trim([self.from_rational(c) for c in p])

    def kx_mul(self, f: KxPoly, g: KxPoly) -> KxPoly:
        if not f or not g:
            return ()
        out = [self.zero() for _ in range(len(f) + len(g) - 1)]
        for i, a in enumerate(f):
            if self.is_zero_elt(a):
                continue
            for j, b in enumerate(g):
                out[i + j] = self.add(out[i + j], self.mul(a, b))
        return self.kx_trim(out)

    def kx_add(self, f: KxPoly, g: KxPoly) -> KxPoly:
        n = max(len(f), len(g))
        fz = list(f) + [self.zero()] * (n - len(f))
        gz = list(g) + [self.zero()] * (n - len(g))
        return self.kx_trim([self.add(a, b) for a, b in zip(fz, gz)])

    def kx_neg(self, f: KxPoly) -> KxPoly:
        return tuple(self.neg(a) for a in f)

    def kx_scale(self, f: KxPoly, c: Elt) -> KxPoly:
        return self.kx_trim([self.mul(a, c) for a in f])

    def kx_divmod(self, f: KxPoly, g: KxPoly) -> tuple[KxPoly, KxPoly]:
        if not g:
            raise ZeroDivisionError("division by zero polynomial")
        ginv = self.inv(g[-1])
        q = [self.zero()] * max(0, len(f) - len(g) + 1)
        r = list(f)
        while len(r) >= len(g) and r:
            if self.is_zero_elt(r[-1]):
                r.pop()
                continue
            k = len(r) - len(g)
            t = self.mul(r[-1], ginv)
            q[k] = t
            for i, c in enumerate(g):
                r[k + i] = self.sub(r[k + i], self.mul(t, c))
            r.pop()
        return self.kx_trim(q), self.kx_trim(r)

    def kx_monic(self, f: KxPoly) -> KxPoly:
        if not f:
            return f
        return self.kx_scale(f, self.inv(f[-1]))

    def kx_gcd(self, f: KxPoly, g: KxPoly) -> KxPoly:
        while g:
            f, g = g, self.kx_divmod(f, g)[1]
        return self.kx_monic(f)

    def kx_deriv(self, f: KxPoly) -> KxPoly:
        return self.kx_trim([self.scale(c, Fraction(i))
                             for i, c in enumerate(f)][1:])

    def kx_eval_box(self, f: KxPoly, z: Box, bits: int) -> Box:
        acc = Box.point(0)
        for c in reversed(f):
            acc = acc * z + self.eval_box(c, bits)
        return acc

    def kx_compose_shift(self, f: KxPoly, s: Fraction, sign: int) -> KxPoly:
        """f(x + sign*s*theta), computed by Horner over K[x]."""
        shift = self.kx_trim([self.scale(self.gen_elt(), sign * s), self.one()])
        acc: KxPoly = ()
        for c in reversed(f):
            acc = self.kx_add(self.kx_mul(acc, shift), ((c,)))
        return acc

    def kx_key(self, f: KxPoly):
        return (len(f), tuple(tuple(c) for c in f))

    # -- factorization over the field (Trager) ---------------------------------

    def _norm_poly(self, f: KxPoly) -> IntPoly:
        """Res_y(minpoly_theta(y), f(x) with theta -> y), up to a constant."""
        g = self.generator.minpoly
        # rows over y: entry j collects sum_i f[i][j] x^i
        maxy = self.degree
        den = 1
        for c in f:
            for v in c:
                den = math.lcm(den, v.denominator)
        b_entries = []
        for jy in range(maxy):
            coeffs = [int(c[jy] * den) if jy < len(c) else 0 for c in f]
            b_entries.append(IntPoly(coeffs))
        a_entries = [IntPoly((cc,)) for cc in g.coeffs]
        return resultant_poly_entries(b_entries, a_entries)

    def factor_poly(self, f: KxPoly) -> list[tuple[KxPoly, int]]:
        """Irreducible factorization over the field; monic factors sorted
        deterministically; multiplicities included."""
        f = self.kx_trim(f)
        if not f:
            raise ZeroPolynomialError("factor of zero polynomial")
        if len(f) == 1:
            return []
        if self.degree == 1:
            return self._factor_rational_base(f)
        work = self.kx_monic(f)
        sqf = self.kx_divmod(work, self.kx_gcd(work, self.kx_deriv(work)))[0]
        sqf = self.kx_monic(sqf)
        parts = self._factor_squarefree(sqf)
        out = []
        for h in parts:
            mult = 0
            while True:
                q, r = self.kx_divmod(work, h)
                if r:
                    break
                work = q
                mult += 1
            out.append((h, mult))
        out.sort(key=lambda hm: self.kx_key(hm[0]))
        return out

    def _factor_rational_base(self, f: KxPoly) -> list[tuple[KxPoly, int]]:
        qq = qq_trim([c[0] for c in f])
        ip, _ = qq_to_intpoly(qq)
        _, factors = factor_rational(ip)
        out = []
        for g, mult in factors:
            gm = tuple(Fraction(c, g.lc) for c in g.coeffs)
            out.append((self.kx_from_qq(gm), mult))
        out.sort(key=lambda hm: self.kx_key(hm[0]))
        return out

    def _factor_squarefree(self, f: KxPoly) -> list[KxPoly]:
        if len(f) == 2:
            return [f]
        for k in range(0, 40):
            s = Fraction((-1) ** k * ((k + 1) // 2))
            shifted = self.kx_compose_shift(f, s, -1) if s else f
            norm = self._norm_poly(shifted)
            if norm.is_zero():
                continue
            if polycore.squarefree_part(norm).degree == norm.degree:
                break
        else:  # pragma: no cover
            raise IsolationError("no squarefree norm shift found")
        _, nf_factors = factor_rational(norm)
        out = []
        rem = f
        for g, _ in nf_factors:
            gk = self.kx_from_intpoly(g)
            if s:
                gk = self.kx_compose_shift(gk, s, +1)
            h = self.kx_gcd(rem, gk)
            if len(h) >= 2:
                out.append(h)
                rem = self.kx_divmod(rem, h)[0]
        assert len(rem) == 1, "Trager factorization lost a factor"
        return out

    # -- structure -------------------------------------------------------------

    def minpoly_over(self, x: AlgebraicNumber) -> KxPoly:
        """Monic minimal polynomial of x over this field."""
        factors = self.factor_poly(self.kx_from_intpoly(x.minpoly))
        cands = [h for h, _ in factors]
        for bits in _SELECT_BITS:
            xb = x.box(bits)
            keep = [h for h in cands
                    if self.kx_eval_box(h, xb, bits).contains_zero()]
            cands = keep
            if len(cands) == 1:
                return cands[0]
            if not cands:
                raise IsolationError("no factor vanishes at x")
        raise IsolationError("minpoly_over selection did not converge")

    def express(self, x: AlgebraicNumber) -> Optional[Elt]:
        """x as an element of this field, or None if x is not in it."""
        if x.is_rational():
            return self.from_rational(x.as_fraction())
        if self.degree % x.degree != 0:
            return None
        factors = self.factor_poly(self.kx_from_intpoly(x.minpoly))
        cands = [h for h, _ in factors if len(h) == 2]
        if not cands:
            return None
        # the root of the linear factor x - e is the element e
        vals = [self.neg(h[0]) for h in cands]
        for bits in _SELECT_BITS:
            xb = x.box(bits)
            keep = [v for v in vals
                    if not self.eval_box(v, bits).disjoint(xb)]
            vals = keep
            if len(vals) == 1:
                # confirm: the remaining candidate must actually equal x
                v = vals[0]
                if self.elt_to_algebraic(v) == x:
                    return v
                return None
            if not vals:
                return None
        raise IsolationError("express() did not converge")

    def contains(self, x: AlgebraicNumber) -> bool:
        return self.express(x) is not None

    def is_galois(self) -> bool:
        """Whether the field is Galois over Q (generator minpoly splits)."""
        if self._is_galois is None:
            factors = self.factor_poly(self.kx_from_intpoly(self.generator.minpoly))
            self._is_galois = all(len(h) == 2 for h, _ in factors)
        return self._is_galois

    def torsion_order(self) -> int:
        """Number of roots of unity in the field (the order of its torsion)."""
        if self._torsion is None:
            best = 2
            bound = 2 * self.degree * self.degree + 2
            for n in range(3, bound + 1):
                phi = polycore._euler_phi(n)
                if phi > self.degree or self.degree % phi != 0:
                    continue
                factors = self.factor_poly(self.kx_from_intpoly(cyclotomic_poly(n)))
                if any(len(h) == 2 for h, _ in factors):
                    best = math.lcm(best, n)
            self._torsion = (best, 0)
        return self._torsion[0]

    def torsion_elements(self) -> list[AlgebraicNumber]:
        w = self.torsion_order()
        return [torsion_number(w, j) for j in range(w)]


QQ_FIELD = NumberField(ONE_AN)


def field_of(x: AlgebraicNumber) -> NumberField:
    if x.is_rational():
        return QQ_FIELD
    return NumberField(x)


def product_of_conjugates_over(x: AlgebraicNumber, K: NumberField) -> Elt:
    """Product of the conjugates of x over K, as an element of K.

    Equals (-1)^D times the constant coefficient of the monic minimal
    polynomial of x over K (D its degree); lies in K and in Q(x) when K is
    Galois over Q.  Non-Galois K is rejected.
    """
    if x.is_zero():
        raise ZeroPolynomialError("conjugate product of zero")
    if not K.is_galois():
        raise NonGaloisFieldError(
            f"{K} is not Galois over Q; the conjugate product can leave the field")
    h = K.minpoly_over(x)
    d = len(h) - 1
    c0 = h[0]
    return c0 if d % 2 == 0 else K.neg(c0)


def galois_closure(x: AlgebraicNumber,
                   cap: int = DEFAULT_CLOSURE_CAP) -> tuple[NumberField, Elt]:
    """Galois closure of Q(x) over Q, with the embedding of x into it.

    Raises UnsupportedDegreeError when the closure degree would exceed `cap`.
    """
    if x.is_zero():
        raise ZeroPolynomialError("closure of zero")
    f = x.minpoly
    if x.degree == 1:
        return QQ_FIELD, QQ_FIELD.from_rational(x.as_fraction())
    if x.degree > cap:
        raise UnsupportedDegreeError(
            f"degree {x.degree} of the input exceeds the closure cap {cap}")
    t = x
    while True:
        K = NumberField(t)
        factors = K.factor_poly(K.kx_from_intpoly(f))
        nonlinear = [h for h, _ in factors if len(h) >= 3]
        if not nonlinear:
            K._is_galois = True
            emb = K.express(x)
            assert emb is not None
            return K, emb
        h = nonlinear[0]
        r = len(h) - 1
        if K.degree * r > cap:
            raise UnsupportedDegreeError(
                f"closure degree exceeds cap {cap} (reached {K.degree * r})")
        beta = _root_of_factor(K, h, f)
        t = _primitive_element(t, beta, K.degree * r)


def _root_of_factor(K: NumberField, h: KxPoly, f: IntPoly) -> AlgebraicNumber:
    """First root of f (canonical order) that is a root of the factor h of f
    over K."""
    cands = list(range(f.degree))
    r = len(h) - 1
    for bits in _SELECT_BITS:
        keep = []
        for i in cands:
            b = root_engine(f).refined(i, bits)
            if K.kx_eval_box(h, b, bits).contains_zero():
                keep.append(i)
        cands = keep
        if len(cands) == r:
            return AlgebraicNumber(f, cands[0])
    raise IsolationError("could not classify the roots of the factor")


def _primitive_element(t: AlgebraicNumber, beta: AlgebraicNumber,
                       want_degree: int) -> AlgebraicNumber:
    """A generator of Q(t, beta) of the known compositum degree, as t + c*beta."""
    g, f = t.minpoly, beta.minpoly
    for c in range(1, 40):
        # Res_y(f(y), g(x - c*y)): vanishes at every t_i + c*beta_j
        b_entries = _linear_compose_entries(g, c)
        a_entries = [IntPoly((cc,)) for cc in f.coeffs]
        ann = resultant_poly_entries(a_entries, b_entries)
        if ann.is_zero() or polycore.squarefree_part(ann).degree != ann.degree:
            continue
        cand = algebraic_from_annihilator(
            ann, lambda bits: t.box(bits) + beta.box(bits).mul_point(Fraction(c), Fraction(0)))
        if cand.degree == want_degree:
            return cand
    raise IsolationError("no primitive element found")  # pragma: no cover


def _linear_compose_entries(g: IntPoly, c: int) -> list[IntPoly]:
    """Coefficients in y of g(x - c*y), each an IntPoly in x."""
    out = [IntPoly() for _ in range(g.degree + 1)]
    # Horner: g(x - cy) = sum g_k (x - cy)^k
    cur = [IntPoly((1,))]  # (x - cy)^0
    for k, gk in enumerate(g.coeffs):
        if gk:
            for j, e in enumerate(cur):
                out[j] = out[j] + e.scale(gk)
        # multiply cur by (x - c y)
        nxt = [IntPoly() for _ in range(len(cur) + 1)]
        for j, e in enumerate(cur):
            nxt[j] = nxt[j] + e * polycore.X
            nxt[j + 1] = nxt[j + 1] + e.scale(-c)
        cur = nxt
    while out and out[-1].is_zero():
        out.pop()
    return out


# ---------------------------------------------------------------------------
# Number expression grammar: a/b, (a/b)^(p/q), zeta(m,j), products, powers,
# and rootof(<poly>, <k>) as an escape hatch for non-surd algebraic numbers.
# ---------------------------------------------------------------------------


class _Tok:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> None:
        if self.peek() != ch:
            raise ExprParseError(f"expected {ch!r} at position {self.pos} in {self.text!r}")
        self.pos += 1

    def try_take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def integer(self) -> int:
        self.peek()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            raise ExprParseError(f"expected integer at position {start} in {self.text!r}")
        return int(self.text[start:self.pos])

    def word(self) -> str:
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        return self.text[start:self.pos]

    def rational(self) -> Fraction:
        num = self.integer()
        if self.try_take("/"):
            den = self.integer()
            if den == 0:
                raise ExprParseError("zero denominator")
            return Fraction(num, den)
        return Fraction(num)

    def done(self) -> bool:
        return self.peek() == ""


def _parse_exponent(tok: _Tok) -> Fraction:
    if tok.try_take("("):
        v = tok.rational()
        tok.take(")")
        return v
    return Fraction(tok.integer())


def _parse_atom(tok: _Tok) -> AlgebraicNumber:
    ch = tok.peek()
    if ch.isalpha():
        w = tok.word()
        if w == "zeta":
            tok.take("(")
            m = tok.integer()
            tok.take(",")
            j = tok.integer()
            tok.take(")")
            if m < 1:
                raise ExprParseError("zeta order must be positive")
            return torsion_number(m, j % m)
        if w == "rootof":
            tok.take("(")
            depth = 1
            start = tok.pos
            while tok.pos < len(tok.text):
                c = tok.text[tok.pos]
                if c == "(":
                    depth += 1
                elif c == ")":
                    depth -= 1
                elif c == "," and depth == 1:
                    break
                tok.pos += 1
            poly_text = tok.text[start:tok.pos]
            tok.take(",")
            k = tok.integer()
            tok.take(")")
            try:
                p = parse_poly(poly_text)
            except Exception as e:
                raise ExprParseError(str(e)) from e
            return from_poly_root(p, k)
        raise ExprParseError(f"unknown name {w!r}")
    if ch == "(":
        tok.take("(")
        v = tok.rational()
        tok.take(")")
        return from_rational(v)
    return from_rational(tok.rational())


def _parse_factor(tok: _Tok) -> AlgebraicNumber:
    a = _parse_atom(tok)
    if tok.try_take("^"):
        e = _parse_exponent(tok)
        if a.is_zero():
            raise ExprParseError("zero to a nontrivial power")
        if e.denominator == 1:
            return pow_int(a, int(e))
        if a.surd is None:
            s = detect_surd(a)
            if s is None:
                raise ExprParseError("fractional powers require a surd base")
        else:
            s = a.surd
        return from_surd(s.pow(e))
    return a


def parse_value(text: str) -> AlgebraicNumber:
    """Parse a number expression into an algebraic number."""
    tok = _Tok(text)
    out = _parse_factor(tok)
    while tok.try_take("*"):
        out = mul(out, _parse_factor(tok))
    if not tok.done():
        raise ExprParseError(f"unexpected trailing input at position {tok.pos} in {text!r}")
    if out.is_zero():
        raise ExprParseError("expression denotes zero")
    return out


def parse_surd(text: str) -> SurdExpr:
    """Parse an expression in the strict surd grammar into a SurdExpr."""
    v = parse_value(text)
    s = v.surd if v.surd is not None else detect_surd(v)
    if s is None:
        raise ExprParseError(f"{text!r} does not denote an element of rad(Q)")
    return s
