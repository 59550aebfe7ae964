"""Exact rational interval arithmetic on the real line and on complex rectangles.

All endpoints are `fractions.Fraction`; every operation returns an interval
that provably contains the true image set.  Transcendental enclosures (pi,
atan, cos/sin) are computed in integer fixed-point arithmetic with directed
rounding, so no floating point is involved anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0:
        raise ValueError("iroot of negative integer")
    if n == 0:
        return 0
    if k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration on integers, seeded from bit length.
    r = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        nr = ((k - 1) * r + n // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > n:
        r -= 1
    return r


def dyadic_floor(x: Rat, bits: int) -> Rat:
    s = 1 << bits
    return Fraction(math.floor(x * s), s)


def dyadic_ceil(x: Rat, bits: int) -> Rat:
    s = 1 << bits
    return Fraction(math.ceil(x * s), s)


@dataclass(frozen=True)
class Ival:
    """Closed interval [lo, hi] of rationals."""

    lo: Rat
    hi: Rat

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x) -> "Ival":
        x = Fraction(x)
        return Ival(x, x)

    def width(self) -> Rat:
        return self.hi - self.lo

    def mid(self) -> Rat:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "Ival") -> "Ival":
        return Ival(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Ival") -> "Ival":
        return Ival(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Ival":
        return Ival(-self.hi, -self.lo)

    def __mul__(self, other: "Ival") -> "Ival":
        c = (self.lo * other.lo, self.lo * other.hi,
             self.hi * other.lo, self.hi * other.hi)
        return Ival(min(c), max(c))

    def scale(self, c: Rat) -> "Ival":
        if c >= 0:
            return Ival(self.lo * c, self.hi * c)
        return Ival(self.hi * c, self.lo * c)

    def shift(self, c: Rat) -> "Ival":
        return Ival(self.lo + c, self.hi + c)

    def square(self) -> "Ival":
        if self.lo >= 0:
            return Ival(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return Ival(self.hi * self.hi, self.lo * self.lo)
        return Ival(ZERO, max(self.lo * self.lo, self.hi * self.hi))

    def recip(self) -> "Ival":
        if self.contains_zero():
            raise ZeroDivisionError("interval contains zero")
        return Ival(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other: "Ival") -> "Ival":
        return self * other.recip()

    def abs(self) -> "Ival":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Ival(ZERO, max(-self.lo, self.hi))

    def max1(self) -> "Ival":
        """Interval image of x -> max(1, x)."""
        return Ival(max(ONE, self.lo), max(ONE, self.hi))

    def contains(self, x: Rat) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def strictly_inside(self, other: "Ival") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def subset(self, other: "Ival") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def disjoint(self, other: "Ival") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def intersect(self, other: "Ival") -> "Ival":
        return Ival(max(self.lo, other.lo), min(self.hi, other.hi))

    def hull(self, other: "Ival") -> "Ival":
        return Ival(min(self.lo, other.lo), max(self.hi, other.hi))

    def round_out(self, bits: int) -> "Ival":
        return Ival(dyadic_floor(self.lo, bits), dyadic_ceil(self.hi, bits))

    def root(self, k: int, bits: int) -> "Ival":
        """Enclosure of the principal k-th root; requires lo >= 0."""
        if self.lo < 0:
            raise ValueError("k-th root of interval with negative part")
        return Ival(rat_root_lower(self.lo, k, bits), rat_root_upper(self.hi, k, bits))

    def sqrt(self, bits: int) -> "Ival":
        return self.root(2, bits)

    def pow_int(self, n: int) -> "Ival":
        if n == 0:
            return Ival.point(1)
        if n < 0:
            return self.pow_int(-n).recip()
        out = self
        for _ in range(n - 1):
            out = out * self
        return out


def rat_root_lower(x: Rat, k: int, bits: int) -> Rat:
    """Largest dyadic with denominator 2^bits that is <= x^(1/k); x >= 0."""
    if x < 0:
        raise ValueError("negative radicand")
    s = 1 << bits
    n = (x.numerator * s ** k) // x.denominator
    return Fraction(iroot(n, k), s)


def rat_root_upper(x: Rat, k: int, bits: int) -> Rat:
    """Small dyadic upper bound for x^(1/k); x >= 0."""
    if x < 0:
        raise ValueError("negative radicand")
    s = 1 << bits
    n = -((-x.numerator * s ** k) // x.denominator)  # ceil(x * s^k)
    r = iroot(n, k)
    if r ** k < n:
        r += 1
    return Fraction(r, s)


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed rectangle in the complex plane."""

    re: Ival
    im: Ival

    @staticmethod
    def point(re, im=0) -> "Box":
        return Box(Ival.point(re), Ival.point(im))

    def __add__(self, other: "Box") -> "Box":
        return Box(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Box") -> "Box":
        return Box(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Box":
        return Box(-self.re, -self.im)

    def __mul__(self, other: "Box") -> "Box":
        return Box(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    def conj(self) -> "Box":
        return Box(self.re, -self.im)

    def mul_point(self, a: Rat, b: Rat) -> "Box":
        """Multiply by the exact complex rational a + b*i."""
        return Box(self.re.scale(a) - self.im.scale(b),
                   self.re.scale(b) + self.im.scale(a))

    def add_point(self, a: Rat, b: Rat) -> "Box":
        return Box(self.re.shift(a), self.im.shift(b))

    def abs2(self) -> Ival:
        """Exact interval of |z|^2 (re and im vary independently, so tight)."""
        return self.re.square() + self.im.square()

    def abs_ival(self, bits: int) -> Ival:
        return self.abs2().sqrt(bits)

    def recip(self) -> "Box":
        """Enclosure of 1/z; requires the box to exclude the origin."""
        d = self.abs2()
        if d.contains_zero():
            raise ZeroDivisionError("box contains zero")
        return Box(self.re / d, (-self.im) / d)

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def width(self) -> Rat:
        return max(self.re.width(), self.im.width())

    def mid(self) -> tuple[Rat, Rat]:
        return self.re.mid(), self.im.mid()

    def strictly_inside(self, other: "Box") -> bool:
        return self.re.strictly_inside(other.re) and self.im.strictly_inside(other.im)

    def subset(self, other: "Box") -> bool:
        return self.re.subset(other.re) and self.im.subset(other.im)

    def disjoint(self, other: "Box") -> bool:
        return self.re.disjoint(other.re) or self.im.disjoint(other.im)

    def intersect(self, other: "Box") -> "Box":
        return Box(self.re.intersect(other.re), self.im.intersect(other.im))

    def round_out(self, bits: int) -> "Box":
        return Box(self.re.round_out(bits), self.im.round_out(bits))

    def is_real_symmetric(self) -> bool:
        return self.im.lo == -self.im.hi


def cplx_recip(a: Rat, b: Rat) -> tuple[Rat, Rat]:
    """Exact reciprocal of the complex rational a + b*i."""
    d = a * a + b * b
    if d == 0:
        raise ZeroDivisionError("reciprocal of zero")
    return a / d, -b / d


def cplx_mul(a: Rat, b: Rat, c: Rat, d: Rat) -> tuple[Rat, Rat]:
    return a * c - b * d, a * d + b * c


# ---------------------------------------------------------------------------
# Fixed-point enclosures of pi, atan, cos, sin.
#
# A fixed-point interval at precision p is a pair of integers (lo, hi)
# denoting [lo/2^p, hi/2^p].  Rounding is always outward.
# ---------------------------------------------------------------------------


def _atan_inv_fixed(q: int, prec: int) -> tuple[int, int]:
    """Fixed-point enclosure of atan(1/q) for an integer q >= 2."""
    one = 1 << prec
    lo = hi = 0
    k = 0
    while True:
        denom = (2 * k + 1) * q ** (2 * k + 1)
        t = one // denom  # floor of term magnitude
        if k % 2 == 0:
            lo += t
            hi += t + 1
        else:
            lo -= t + 1
            hi -= t
        if t == 0:
            # Alternating tail is bounded by the first omitted term (< 1 ulp).
            lo -= 1
            hi += 1
            return lo, hi
        k += 1


@lru_cache(maxsize=None)
def _pi_fixed(prec: int) -> tuple[int, int]:
    """Machin: pi = 16 atan(1/5) - 4 atan(1/239)."""
    wp = prec + 16
    a5 = _atan_inv_fixed(5, wp)
    a239 = _atan_inv_fixed(239, wp)
    lo = 16 * a5[0] - 4 * a239[1]
    hi = 16 * a5[1] - 4 * a239[0]
    shift = wp - prec
    return lo >> shift, -((-hi) >> shift)


def pi_ival(bits: int) -> Ival:
    lo, hi = _pi_fixed(bits)
    s = 1 << bits
    return Ival(Fraction(lo, s), Fraction(hi, s))


def _atan_series(x: Rat, bits: int) -> Ival:
    """atan via alternating series; requires |x| <= 1/2."""
    if x < 0:
        return -_atan_series(-x, bits)
    tol = Fraction(1, 1 << (bits + 4))
    term = x
    x2 = x * x
    k = 0
    s_prev = ZERO
    s = ZERO
    while True:
        s_prev = s
        if k % 2 == 0:
            s = s + term / (2 * k + 1)
        else:
            s = s - term / (2 * k + 1)
        term = term * x2
        # Keep denominators bounded.
        term = Fraction(math.ceil(term * (1 << (bits + 8))), 1 << (bits + 8))
        k += 1
        if term / (2 * k + 1) < tol:
            break
    lo, hi = min(s_prev, s), max(s_prev, s)
    return Ival(lo - tol, hi + tol).round_out(bits + 2)


def atan_ival(x: Rat, bits: int) -> Ival:
    """Certified enclosure of atan(x) for rational x."""
    if x < 0:
        return -atan_ival(-x, bits)
    if x > 1:
        return pi_ival(bits + 4).scale(Fraction(1, 2)) - atan_ival(1 / x, bits)
    if x > Fraction(1, 2):
        return pi_ival(bits + 4).scale(Fraction(1, 4)) + _atan_series((x - 1) / (x + 1), bits)
    return _atan_series(x, bits)


def _cos_taylor_point(x: Rat, bits: int) -> Ival:
    """Enclosure of cos(x) at a rational point with |x| <= pi using Taylor."""
    tol = Fraction(1, 1 << (bits + 6))
    cap = 1 << (bits + 10)
    x2 = x * x
    term = ONE  # x^0 / 0!
    s = Ival.point(0)
    k = 0
    slack = ZERO
    while True:
        s = s.shift(term if k % 2 == 0 else -term)
        nxt = term * x2 / ((2 * k + 1) * (2 * k + 2))
        # Outward rounding of the term keeps denominators bounded; rounding
        # slack is absorbed into the enclosure at the end.
        nr = Fraction(math.ceil(nxt * cap), cap)
        slack += nr - nxt
        term = nr
        k += 1
        if term < tol and x2 < (2 * k + 1) * (2 * k + 2):
            # Terms now decrease, so the alternating tail is <= term.
            break
    pad = term + slack + tol
    return Ival(s.lo - pad, s.hi + pad).round_out(bits + 2)


def _sin_taylor_point(x: Rat, bits: int) -> Ival:
    tol = Fraction(1, 1 << (bits + 6))
    cap = 1 << (bits + 10)
    x2 = x * x
    term = x
    s = Ival.point(0)
    k = 0
    slack = ZERO
    while True:
        s = s.shift(term if k % 2 == 0 else -term)
        nxt = term * x2 / ((2 * k + 2) * (2 * k + 3))
        sign = 1 if nxt >= 0 else -1
        nr = Fraction(sign * math.ceil(abs(nxt) * cap), cap)
        slack += abs(nr - nxt)
        term = nr
        k += 1
        if abs(term) < tol and x2 < (2 * k + 2) * (2 * k + 3):
            break
    pad = abs(term) + slack + tol
    return Ival(s.lo - pad, s.hi + pad).round_out(bits + 2)


def cos_ival(t: Ival, bits: int) -> Ival:
    """Enclosure of cos over an interval (Lipschitz bound |cos'| <= 1)."""
    m = t.mid()
    base = _cos_taylor_point(m, bits)
    h = t.width() / 2
    return Ival(max(Fraction(-1), base.lo - h), min(Fraction(1), base.hi + h))


def sin_ival(t: Ival, bits: int) -> Ival:
    m = t.mid()
    base = _sin_taylor_point(m, bits)
    h = t.width() / 2
    return Ival(max(Fraction(-1), base.lo - h), min(Fraction(1), base.hi + h))


def unit_root_box(j: int, m: int, bits: int) -> Box:
    """Certified enclosure of exp(2*pi*i*j/m)."""
    j %= m
    if m == 1 or j == 0:
        return Box.point(1)
    if 2 * j == m:
        return Box.point(-1)
    if 4 * j == m:
        return Box.point(0, 1)
    if 4 * j == 3 * m:
        return Box.point(0, -1)
    theta = pi_ival(bits + 8).scale(Fraction(2 * j, m))
    return Box(cos_ival(theta, bits), sin_ival(theta, bits))


def arg_ival(b: Box, bits: int) -> Ival:
    """Enclosure of the principal argument of a box.

    Requires the box to avoid the origin and not to cross the branch cut
    (the closed negative real axis); callers refine until that holds or
    handle exact negative reals separately.
    """
    if b.contains_zero():
        raise ValueError("argument of a box containing zero")
    if b.im.contains_zero() and b.re.lo < 0:
        raise ValueError("box crosses the negative real axis")
    corners = [(b.re.lo, b.im.lo), (b.re.lo, b.im.hi),
               (b.re.hi, b.im.lo), (b.re.hi, b.im.hi)]
    vals = [_arg_point(a, c, bits) for a, c in corners]
    lo = min(v.lo for v in vals)
    hi = max(v.hi for v in vals)
    # arg is monotone along each edge of a rectangle in a half plane, so the
    # extreme values occur at corners.
    return Ival(lo, hi)


def _arg_point(a: Rat, b: Rat, bits: int) -> Ival:
    if a > 0:
        return atan_ival(b / a, bits)
    half_pi = pi_ival(bits + 4).scale(Fraction(1, 2))
    if a == 0:
        if b > 0:
            return half_pi
        if b < 0:
            return -half_pi
        raise ValueError("argument of zero")
    # a < 0: atan(b/a) shifted by +-pi depending on the sign of b
    base = atan_ival(b / a, bits)
    pi_iv = pi_ival(bits + 4)
    if b >= 0:
        return base + pi_iv
    return base - pi_iv
