"""Exact integer polynomial arithmetic, factorization over Q, cyclotomic
detection, and certified complex root isolation.

Polynomials are dense integer coefficient vectors, constant term first.
Factorization into irreducibles delegates to sympy (squarefree decomposition
plus Zassenhaus lifting/recombination); everything else, including the
certified isolation of complex roots via an exact-rational Krawczyk operator,
is self-contained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import mpmath
import sympy

from .errors import IsolationError, PolyParseError, ZeroPolynomialError
from ._intervals import Box, Ival, Rat, dyadic_ceil, dyadic_floor

DEFAULT_PRECISION = Fraction(1, 2 ** 60)


@dataclass(frozen=True)
class IntPoly:
    """Dense integer polynomial; coeffs[i] is the coefficient of x^i.

    The zero polynomial is stored with an empty coefficient tuple and has
    degree -1 by convention.
    """

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Iterable[int] = ()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> int:
        if not self.coeffs:
            return 0
        return self.coeffs[-1]

    def content(self) -> int:
        return math.gcd(*self.coeffs) if self.coeffs else 0

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly(out)

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __neg__(self) -> "IntPoly":
        return IntPoly(-c for c in self.coeffs)

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        if self.is_zero() or other.is_zero():
            return IntPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPoly(out)

    def scale(self, c: int) -> "IntPoly":
        return IntPoly(c * a for a in self.coeffs)

    def __pow__(self, n: int) -> "IntPoly":
        if n < 0:
            raise ValueError("negative polynomial power")
        out = IntPoly((1,))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def deriv(self) -> "IntPoly":
        return IntPoly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def reverse(self) -> "IntPoly":
        """x^deg * p(1/x)."""
        return IntPoly(reversed(self.coeffs))

    def eval_rat(self, x: Rat) -> Rat:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_int(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_box(self, z: Box) -> Box:
        acc = Box.point(0)
        for c in reversed(self.coeffs):
            acc = (acc * z).add_point(Fraction(c), Fraction(0))
        return acc

    def eval_cplx(self, a: Rat, b: Rat) -> tuple[Rat, Rat]:
        """Exact evaluation at the complex rational a + b*i."""
        ra, rb = Fraction(0), Fraction(0)
        for c in reversed(self.coeffs):
            ra, rb = ra * a - rb * b + c, ra * b + rb * a
        return ra, rb

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if parts else "")
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                xs = "x" if i == 1 else f"x^{i}"
                body = xs if mag == 1 else f"{mag}*{xs}"
            parts.append(sign + body)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"IntPoly('{self}')"


X = IntPoly((0, 1))
ONE_POLY = IntPoly((1,))


def _require_nonzero(p: IntPoly) -> None:
    if p.is_zero():
        raise ZeroPolynomialError("zero polynomial")


def normalize(p: IntPoly) -> IntPoly:
    """Primitive part with positive leading coefficient; zero maps to zero."""
    if p.is_zero():
        return p
    c = p.content()
    if p.lc < 0:
        c = -c
    return IntPoly(a // c for a in p.coeffs)


# ---------------------------------------------------------------------------
# Rational-coefficient helpers (private; the public surface stays integral)
# ---------------------------------------------------------------------------

QQPoly = tuple[Fraction, ...]


def qq_from_int(p: IntPoly) -> QQPoly:
    return tuple(Fraction(c) for c in p.coeffs)


def qq_trim(c: Sequence[Fraction]) -> QQPoly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def qq_add(a: QQPoly, b: QQPoly) -> QQPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return qq_trim(out)


def qq_neg(a: QQPoly) -> QQPoly:
    return tuple(-c for c in a)


def qq_sub(a: QQPoly, b: QQPoly) -> QQPoly:
    return qq_add(a, qq_neg(b))


def qq_mul(a: QQPoly, b: QQPoly) -> QQPoly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return qq_trim(out)


def qq_scale(a: QQPoly, c: Fraction) -> QQPoly:
    if c == 0:
        return ()
    return tuple(x * c for x in a)


def qq_divmod(a: QQPoly, b: QQPoly) -> tuple[QQPoly, QQPoly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    db, lb = len(b) - 1, b[-1]
    while len(r) - 1 >= db and any(c != 0 for c in r):
        while r and r[-1] == 0:
            r.pop()
        if len(r) - 1 < db:
            break
        k = len(r) - 1 - db
        t = r[-1] / lb
        q[k] = t
        for i, c in enumerate(b):
            r[k + i] -= t * c
        r.pop()
    return qq_trim(q), qq_trim(r)


def qq_gcd_monic(a: QQPoly, b: QQPoly) -> QQPoly:
    while b:
        a, b = b, qq_divmod(a, b)[1]
    if not a:
        return ()
    return tuple(c / a[-1] for c in a)


def qq_deriv(a: QQPoly) -> QQPoly:
    return qq_trim(tuple(i * c for i, c in enumerate(a))[1:]) if a else ()


def qq_to_intpoly(a: QQPoly) -> tuple[IntPoly, Fraction]:
    """Write a = c * f with f primitive integral, positive leading coeff."""
    if not a:
        return IntPoly(), Fraction(0)
    den = math.lcm(*(c.denominator for c in a))
    ints = [int(c * den) for c in a]
    g = math.gcd(*ints)
    if ints[-1] < 0:
        g = -g
    f = IntPoly(i // g for i in ints)
    return f, Fraction(g, den)


# ---------------------------------------------------------------------------
# Resultants (fraction-free Bareiss over an integral domain)
# ---------------------------------------------------------------------------


def _bareiss_det(mat: list[list], one, mul: Callable, sub: Callable,
                 divexact: Callable, is_zero: Callable):
    """Determinant by fraction-free Gaussian elimination.

    Works over any integral domain where `divexact` performs the (always
    exact) Bareiss division by the previous pivot.
    """
    n = len(mat)
    if n == 0:
        return one
    sign = 1
    prev = one
    for k in range(n - 1):
        if is_zero(mat[k][k]):
            for i in range(k + 1, n):
                if not is_zero(mat[i][k]):
                    mat[k], mat[i] = mat[i], mat[k]
                    sign = -sign
                    break
            else:
                return None  # singular
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = sub(mul(mat[k][k], mat[i][j]), mul(mat[i][k], mat[k][j]))
                mat[i][j] = divexact(num, prev)
            mat[i][k] = None
        prev = mat[k][k]
    d = mat[n - 1][n - 1]
    return -d if sign < 0 else d


def _sylvester(p: Sequence, q: Sequence, zero) -> list[list]:
    """Sylvester matrix rows for p (degree m) and q (degree n), coefficient
    sequences given constant-first."""
    m, n = len(p) - 1, len(q) - 1
    size = m + n
    rows = []
    prev = list(reversed(p))  # leading first
    for i in range(n):
        rows.append([zero] * i + list(prev) + [zero] * (size - m - 1 - i))
    prevq = list(reversed(q))
    for i in range(m):
        rows.append([zero] * i + list(prevq) + [zero] * (size - n - 1 - i))
    return rows


def resultant(p: IntPoly, q: IntPoly) -> int:
    """Exact resultant Res(p, q); zero iff p and q share a root."""
    if p.is_zero() or q.is_zero():
        raise ZeroPolynomialError("resultant of the zero polynomial")
    m, n = p.degree, q.degree
    if m == 0:
        return p.coeffs[0] ** n
    if n == 0:
        return q.coeffs[0] ** m
    mat = _sylvester(p.coeffs, q.coeffs, 0)
    det = _bareiss_det(mat, 1, lambda a, b: a * b, lambda a, b: a - b,
                       lambda a, b: a // b, lambda a: a == 0)
    return 0 if det is None else det


def _ip_divexact(a: IntPoly, b: IntPoly) -> IntPoly:
    """Exact division in Z[x]; raises if not exact (Bareiss guarantees it)."""
    qa = qq_from_int(a)
    qb = qq_from_int(b)
    q, r = qq_divmod(qa, qb)
    assert not r and all(c.denominator == 1 for c in q)
    return IntPoly(int(c) for c in q)


def resultant_poly_entries(p: Sequence[IntPoly], q: Sequence[IntPoly]) -> IntPoly:
    """Resultant in an auxiliary variable of two polynomials whose
    coefficients are themselves integer polynomials in x.

    `p` and `q` are coefficient sequences (constant-in-aux-variable first)
    with IntPoly entries. Returns an IntPoly in x.
    """
    p = list(p)
    q = list(q)
    while p and p[-1].is_zero():
        p.pop()
    while q and q[-1].is_zero():
        q.pop()
    if not p or not q:
        raise ZeroPolynomialError("resultant of the zero polynomial")
    m, n = len(p) - 1, len(q) - 1
    if m == 0:
        return p[0] ** n
    if n == 0:
        return q[0] ** m
    mat = _sylvester(p, q, IntPoly())
    det = _bareiss_det(mat, ONE_POLY, lambda a, b: a * b, lambda a, b: a - b,
                       _ip_divexact, lambda a: a.is_zero())
    return IntPoly() if det is None else det


# ---------------------------------------------------------------------------
# gcd / squarefree / factorization
# ---------------------------------------------------------------------------


def poly_gcd(p: IntPoly, q: IntPoly) -> IntPoly:
    """Primitive gcd in Z[x] with positive leading coefficient."""
    if p.is_zero():
        return normalize(q)
    if q.is_zero():
        return normalize(p)
    g = qq_gcd_monic(qq_from_int(p), qq_from_int(q))
    f, _ = qq_to_intpoly(g)
    return f


def squarefree_decomposition(p: IntPoly) -> tuple[Fraction, list[tuple[IntPoly, int]]]:
    """Yun decomposition p = c * prod f_i^i with f_i primitive squarefree."""
    _require_nonzero(p)
    f = normalize(p)
    parts: list[tuple[IntPoly, int]] = []
    a = qq_from_int(f)
    d = qq_deriv(a)
    g = qq_gcd_monic(a, d)
    if len(g) <= 1:
        parts.append((f, 1))
    else:
        c = qq_divmod(a, g)[0]
        w = qq_divmod(d, g)[0]
        i = 1
        while len(c) > 1:
            y = qq_sub(w, qq_deriv(c))
            z = qq_gcd_monic(c, y)
            if len(z) > 1:
                fz, _ = qq_to_intpoly(z)
                parts.append((fz, i))
            c = qq_divmod(c, z)[0]
            w = qq_divmod(y, z)[0]
            i += 1
    prod = ONE_POLY
    for fz, mult in parts:
        prod = prod * fz ** mult
    const = Fraction(p.lc, prod.lc)
    return const, parts


def squarefree_part(p: IntPoly) -> IntPoly:
    _, parts = squarefree_decomposition(p)
    out = ONE_POLY
    for f, _ in parts:
        out = out * f
    return normalize(out)


_X_SYM = sympy.Symbol("x")


def factor_rational(p: IntPoly) -> tuple[Fraction, list[tuple[IntPoly, int]]]:
    """Factor into irreducibles over Q.

    Returns (c, [(f_i, m_i), ...]) with each f_i primitive, irreducible, and
    positive leading coefficient, sorted by (degree, coefficients), such that
    p = c * prod f_i^{m_i} exactly.
    """
    _require_nonzero(p)
    if p.degree == 0:
        return Fraction(p.coeffs[0]), []
    sp = sympy.Poly(list(reversed(p.coeffs)), _X_SYM, domain=sympy.ZZ)
    const, factors = sp.factor_list()
    out: list[tuple[IntPoly, int]] = []
    c = Fraction(int(const))
    for f, mult in factors:
        cs = [int(v) for v in reversed(f.all_coeffs())]
        g = normalize(IntPoly(cs))
        if g.degree == 0:
            c *= Fraction(g.coeffs[0]) ** mult
            continue
        if IntPoly(cs).lc < 0:
            c *= Fraction(-1) ** mult
        out.append((g, mult))
    out.sort(key=lambda fm: (fm[0].degree, fm[0].coeffs))
    return c, out


def is_irreducible(p: IntPoly) -> bool:
    if p.is_zero() or p.degree < 1:
        return False
    _, factors = factor_rational(p)
    return len(factors) == 1 and factors[0][1] == 1 and factors[0][0].degree == p.degree


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> IntPoly:
    """The n-th cyclotomic polynomial, exactly."""
    if n < 1:
        raise ValueError("cyclotomic index must be positive")
    num = IntPoly([-1] + [0] * (n - 1) + [1])  # x^n - 1
    q = qq_from_int(num)
    for d in range(1, n):
        if n % d == 0:
            q, r = qq_divmod(q, qq_from_int(cyclotomic_poly(d)))
            assert not r
    f, c = qq_to_intpoly(q)
    assert c == 1
    return f


def _euler_phi(n: int) -> int:
    out = n
    d = 2
    while d * d <= n:
        if n % d == 0:
            out -= out // d
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out -= out // n
    return out


def cyclotomic_index(p: IntPoly) -> Optional[int]:
    """If the primitive polynomial p equals some cyclotomic Phi_n, return n."""
    p = normalize(p)
    d = p.degree
    if d < 1 or p.lc != 1:
        return None
    bound = max(2, 2 * d * d + 1)
    for n in range(1, bound + 1):
        if _euler_phi(n) == d and p == cyclotomic_poly(n):
            return n
    return None


def is_cyclotomic_product(p: IntPoly) -> bool:
    """True iff every root of p is zero or a root of unity (Kronecker)."""
    _require_nonzero(p)
    if p.degree == 0:
        return True  # no roots at all
    _, factors = factor_rational(p)
    for f, _ in factors:
        if f == X:
            continue
        if cyclotomic_index(f) is None:
            return False
    return True


def is_reciprocal(p: IntPoly) -> bool:
    """p equals +- its own reversal (root set closed under z -> 1/z)."""
    return normalize(p) == normalize(p.reverse())


# ---------------------------------------------------------------------------
# Real-root counting (Sturm) and unit-circle root counting
# ---------------------------------------------------------------------------


def _sturm_chain(p: QQPoly) -> list[QQPoly]:
    chain = [p, qq_deriv(p)]
    while chain[-1]:
        r = qq_divmod(chain[-2], chain[-1])[1]
        if not r:
            break
        chain.append(qq_neg(r))
    return [c for c in chain if c]


def _sign_variations(chain: list[QQPoly], x: Rat) -> int:
    signs = []
    for c in chain:
        acc = Fraction(0)
        for a in reversed(c):
            acc = acc * x + a
        if acc != 0:
            signs.append(1 if acc > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(p: IntPoly, a: Rat, b: Rat) -> int:
    """Number of distinct real roots of p in the half-open interval (a, b].

    Requires p(a) != 0.  The polynomial need not be squarefree; the count is
    of distinct roots.
    """
    _require_nonzero(p)
    sf = squarefree_part(p)
    chain = _sturm_chain(qq_from_int(sf))
    return _sign_variations(chain, Fraction(a)) - _sign_variations(chain, Fraction(b))


def unit_circle_root_count(p: IntPoly) -> int:
    """Exact number of roots of an irreducible p that lie on |z| = 1.

    A non-reciprocal irreducible polynomial has none; a reciprocal one of
    even degree 2k maps to a degree-k polynomial in y = z + 1/z whose real
    roots in (-2, 2) correspond to conjugate pairs on the circle.
    """
    p = normalize(p)
    d = p.degree
    if d < 1:
        return 0
    if cyclotomic_index(p) is not None:
        return d
    if d == 1 or not is_reciprocal(p):
        return 0
    if p != normalize(p.reverse()) or p.coeffs != tuple(reversed(p.coeffs)):
        # anti-palindromic irreducibles of degree >= 2 do not exist
        return 0
    if d % 2 == 1:
        return 0  # odd palindromic has root -1, hence equals Phi_2
    k = d // 2
    # z^j + z^-j = v_j(z + 1/z): v_0 = 2, v_1 = y, v_{j+1} = y v_j - v_{j-1}
    vs = [IntPoly((2,)), X]
    for _ in range(2, k + 1):
        vs.append(X * vs[-1] - vs[-2])
    tp = IntPoly((p.coeffs[k],))
    for j in range(1, k + 1):
        tp = tp + vs[j].scale(p.coeffs[k + j])
    assert tp.eval_int(2) != 0 and tp.eval_int(-2) != 0
    return 2 * count_real_roots(tp, Fraction(-2), Fraction(2))


# ---------------------------------------------------------------------------
# Certified root isolation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootBox:
    """Certified isolating rectangle for a root of a polynomial."""

    re_lo: Rat
    re_hi: Rat
    im_lo: Rat
    im_hi: Rat
    multiplicity: int = 1

    @property
    def box(self) -> Box:
        return Box(Ival(self.re_lo, self.re_hi), Ival(self.im_lo, self.im_hi))

    @property
    def center(self) -> tuple[Rat, Rat]:
        return self.box.mid()

    def width(self) -> Rat:
        return self.box.width()

    @staticmethod
    def from_box(b: Box, multiplicity: int = 1) -> "RootBox":
        return RootBox(b.re.lo, b.re.hi, b.im.lo, b.im.hi, multiplicity)


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


class _CertRoot:
    __slots__ = ("box", "is_real", "bits")

    def __init__(self, box: Box, is_real: bool, bits: int):
        self.box = box
        self.is_real = is_real
        self.bits = bits


class RootEngine:
    """Maintains certified, refinable root boxes of one squarefree polynomial.

    Initial approximations come from mpmath; every box is then certified by
    the Krawczyk interval operator in exact rational arithmetic, so the mpmath
    hints never enter the trust chain.  Boxes for real roots are kept
    symmetric about the real axis: a symmetric box containing exactly one
    root must contain a real one.
    """

    def __init__(self, poly: IntPoly):
        poly = normalize(poly)
        if poly.degree < 1:
            raise ZeroPolynomialError("cannot isolate roots of a constant")
        self.poly = poly
        self.deriv = poly.deriv()
        self.roots: list[_CertRoot] = []
        self._certify_initial()
        self._canonical_sort()

    # -- initial certification ------------------------------------------------

    def _certify_initial(self) -> None:
        d = self.poly.degree
        if d == 1:
            a, b = self.poly.coeffs[1], self.poly.coeffs[0]
            r = Fraction(-b, a)
            w = Fraction(1, 1 << 8)
            box = Box(Ival(r - w, r + w), Ival(-w, w))
            self.roots = [_CertRoot(box, True, 8)]
            return
        for dps in (40, 80, 160, 320, 640):
            try:
                cand = self._attempt(dps)
            except (mpmath.libmp.NoConvergence, ZeroDivisionError):
                cand = None
            if cand is not None:
                self.roots = cand
                return
        raise IsolationError(f"could not certify roots of {self.poly}")

    def _attempt(self, dps: int) -> Optional[list[_CertRoot]]:
        with mpmath.workdps(dps):
            hints = mpmath.polyroots([mpmath.mpf(c) for c in reversed(self.poly.coeffs)],
                                     maxsteps=200, extraprec=4 * dps)
        pts = [(_mpf_to_fraction(h.real), _mpf_to_fraction(h.imag)) for h in hints]
        # Minimum pairwise separation in the max metric.
        sep = None
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                dmax = max(abs(pts[i][0] - pts[j][0]), abs(pts[i][1] - pts[j][1]))
                if sep is None or dmax < sep:
                    sep = dmax
        if sep is None or sep == 0:
            return None
        for shrink in (8, 32, 128, 512):
            radius = sep / shrink
            # Dyadic center rounding must move hints by well under `radius`.
            bits = (radius.denominator.bit_length() - radius.numerator.bit_length()) + 12
            bits = max(16, bits)
            out: list[_CertRoot] = []
            ok = True
            for re, im in pts:
                real = abs(im) < radius / 2
                c_re = dyadic_floor(re, bits)
                c_im = Fraction(0) if real else dyadic_floor(im, bits)
                box = Box(Ival(c_re - radius, c_re + radius),
                          Ival(c_im - radius, c_im + radius))
                k = self._krawczyk(box)
                if k is None:
                    ok = False
                    break
                out.append(_CertRoot(self._resym(k, real), real, bits))
            if not ok:
                continue
            if all(a.box.disjoint(b.box) for i, a in enumerate(out)
                   for b in out[i + 1:]):
                return out
        return None

    # -- Krawczyk operator ----------------------------------------------------

    def _krawczyk(self, x: Box) -> Optional[Box]:
        """One Krawczyk step; returns a contracted certified box or None.

        K(X) = m - p(m)/p'(m) + (1 - p'(X)/p'(m)) (X - m).  If K(X) lies
        strictly inside X, then X contains exactly one root of p and that
        root lies in K(X).
        """
        ma, mb = x.mid()
        dpa, dpb = self.deriv.eval_cplx(ma, mb)
        if dpa == 0 and dpb == 0:
            return None
        d = dpa * dpa + dpb * dpb
        ca, cb = dpa / d, -dpb / d  # 1 / p'(m)
        pa, pb = self.poly.eval_cplx(ma, mb)
        na = ma - (ca * pa - cb * pb)
        nb = mb - (ca * pb + cb * pa)
        dpx = self.deriv.eval_box(x)
        j = Box.point(1) - dpx.mul_point(ca, cb)
        k = j * (x - Box.point(ma, mb))
        k = k.add_point(na, nb)
        if k.strictly_inside(x):
            return k.intersect(x)
        return None

    @staticmethod
    def _resym(b: Box, real: bool) -> Box:
        if not real:
            return b
        h = max(-b.im.lo, b.im.hi, Fraction(0))
        return Box(b.re, Ival(-h, h))

    # -- refinement -------------------------------------------------------

    def refined(self, idx: int, bits: int) -> Box:
        """Certified box of root idx with width at most 2^-bits."""
        cr = self.roots[idx]
        target = Fraction(1, 1 << bits)
        box = cr.box
        guard = bits + 16
        steps = 0
        while box.width() > target:
            k = self._krawczyk(box)
            if k is None:
                # Rounding made the box too fat; retry with more guard bits.
                guard += 32
                steps += 1
                if steps > 300:
                    raise IsolationError(f"refinement stalled on {self.poly}")
                box = cr.box
                continue
            box = self._resym(k.round_out(guard).intersect(box), cr.is_real)
            steps += 1
            if steps > 300:
                raise IsolationError(f"refinement stalled on {self.poly}")
        if box.re.width() == 0 or box.im.width() == 0:
            # Exact rational roots contract to points; keep widths positive.
            pad = Fraction(1, 1 << (bits + 2))
            re = Ival(box.re.lo - pad, box.re.hi + pad) if box.re.width() == 0 else box.re
            im = Ival(box.im.lo - pad, box.im.hi + pad) if box.im.width() == 0 else box.im
            box = Box(re, im)
        if box.width() < cr.box.width():
            cr.box = box
            cr.bits = bits
        return box

    def _canonical_sort(self) -> None:
        # Reference order: centers after refining every box to width 2^-32.
        for i in range(len(self.roots)):
            self.refined(i, 32)
        self.roots.sort(key=lambda r: (r.box.mid()[0], r.box.mid()[1]))

    @property
    def count(self) -> int:
        return len(self.roots)


_ENGINES: dict[tuple[int, ...], RootEngine] = {}


def root_engine(p: IntPoly) -> RootEngine:
    """Cached certified-root engine for the squarefree part of p."""
    key = normalize(p).coeffs
    eng = _ENGINES.get(key)
    if eng is None:
        eng = RootEngine(IntPoly(key))
        _ENGINES[key] = eng
    return eng


def _bits_for_precision(precision: Rat) -> int:
    precision = Fraction(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")
    bits = 1
    while Fraction(1, 1 << bits) > precision:
        bits += 1
    return bits


def isolate_roots(p: IntPoly, precision: Rat = DEFAULT_PRECISION) -> list[RootBox]:
    """Certified isolating boxes for all complex roots of p.

    One box per distinct root, tagged with its multiplicity; widths are at
    most `precision`; boxes of distinct roots are pairwise disjoint.  Calling
    again with a smaller precision yields smaller boxes around the same
    roots.
    """
    _require_nonzero(p)
    bits = _bits_for_precision(precision)
    _, parts = squarefree_decomposition(p)
    found: list[tuple[Box, int, IntPoly, int]] = []
    for f, mult in parts:
        if f.degree < 1:
            continue
        eng = root_engine(f)
        for i in range(eng.count):
            found.append((eng.refined(i, bits), mult, f, i))
    # Distinct roots of distinct squarefree factors may still have touching
    # rectangles at this precision; refine pairs until disjoint.
    extra = bits
    changed = True
    while changed:
        changed = False
        for i in range(len(found)):
            for j in range(i + 1, len(found)):
                bi, bj = found[i][0], found[j][0]
                if not bi.disjoint(bj):
                    extra += 16
                    if extra > bits + 2048:
                        raise IsolationError("could not separate root boxes")
                    fi, fj = found[i], found[j]
                    found[i] = (root_engine(fi[2]).refined(fi[3], extra),) + fi[1:]
                    found[j] = (root_engine(fj[2]).refined(fj[3], extra),) + fj[1:]
                    changed = True
    found.sort(key=lambda t: (t[0].mid()[0], t[0].mid()[1]))
    return [RootBox.from_box(b, mult) for b, mult, _, _ in found]


# ---------------------------------------------------------------------------
# Polynomial text grammar
# ---------------------------------------------------------------------------


def parse_poly(text: str) -> IntPoly:
    """Parse `x^10+x^9-x^7+2*x+1` style polynomials (integer coefficients,
    variable x, ^ for powers, optional * between coefficient and x)."""
    s = "".join(text.split())
    if not s:
        raise PolyParseError("empty polynomial")
    coeffs: dict[int, int] = {}
    i = 0
    n = len(s)
    first = True
    while i < n:
        sign = 1
        if s[i] in "+-":
            if s[i] == "-":
                sign = -1
            i += 1
        elif not first:
            raise PolyParseError(f"expected '+' or '-' at position {i} in {text!r}")
        first = False
        if i >= n:
            raise PolyParseError("dangling sign")
        coef = None
        j = i
        while j < n and s[j].isdigit():
            j += 1
        if j > i:
            coef = int(s[i:j])
            i = j
            if i < n and s[i] == "*":
                i += 1
                if i >= n or s[i] != "x":
                    raise PolyParseError(f"expected 'x' after '*' in {text!r}")
        power = 0
        if i < n and s[i] == "x":
            i += 1
            power = 1
            if i < n and s[i] == "^":
                i += 1
                j = i
                while j < n and s[j].isdigit():
                    j += 1
                if j == i:
                    raise PolyParseError(f"missing exponent in {text!r}")
                power = int(s[i:j])
                i = j
        elif coef is None:
            raise PolyParseError(f"unexpected character {s[i]!r} in {text!r}")
        if coef is None:
            coef = 1
        coeffs[power] = coeffs.get(power, 0) + sign * coef
    if not coeffs:
        raise PolyParseError("empty polynomial")
    deg = max(coeffs)
    return IntPoly(coeffs.get(k, 0) for k in range(deg + 1))
