"""Metric (M1) and ultrametric (M-infinity) Mahler measures with achieving
witnesses.

The solvers turn the achievement proofs into search procedures: arbitrary
representations reduce into rad(K_alpha) without increasing any factor
measure; measures of rad(Q) elements are integers, which quantizes the
candidate values; Northcott enumeration bounds q(alpha) and hence the
representation length.  For rational targets (and rad(Q) targets generally)
both solvers return exact values with verified witnesses; other targets get
certified bounds plus a Northcott-narrowed candidate value list when the
Galois closure is quadratic.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import sympy

from .errors import (BranchSearchError, RadMembershipError,
                     UndecidedComparisonError, UnsupportedDegreeError,
                     ZeroPolynomialError)
from ._intervals import Box, Ival, arg_ival, cos_ival, sin_ival, unit_root_box
from . import algnum, heights
from .algnum import (AlgebraicNumber, NumberField, SurdExpr, detect_surd,
                     from_rational, from_surd, galois_closure, inv,
                     is_torsion, mul, pow_int, product, torsion_data,
                     torsion_number)
from .heights import (ExactPow, MeasureValue, compare, mahler_roots,
                      measure_of_surd, weil_height)
from .polycore import DEFAULT_PRECISION, IntPoly, count_real_roots


@dataclass(frozen=True)
class SolverConfig:
    precision: Fraction = DEFAULT_PRECISION
    kmax: int = 12
    closure_cap: int = algnum.DEFAULT_CLOSURE_CAP
    compare_bits: int = 4096


DEFAULT_CONFIG = SolverConfig()


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Representation:
    """target together with an ordered factor list; when torsion_slack is
    set, prod(factors) = zeta * target for the recorded root of unity."""

    target: AlgebraicNumber
    factors: tuple[AlgebraicNumber, ...]
    torsion_slack: bool = False
    slack: tuple[int, int] = (1, 0)

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a representation needs at least one factor")

    def product(self) -> AlgebraicNumber:
        return product(self.factors)

    def slack_number(self) -> AlgebraicNumber:
        return torsion_number(*self.slack)

    def verify(self) -> bool:
        prod = self.product()
        if not self.torsion_slack:
            return prod == self.target
        return prod == mul(self.slack_number(), self.target)

    def factor_measures(self, precision=DEFAULT_PRECISION) -> list[MeasureValue]:
        return [mahler_roots(f, precision) for f in self.factors]

    def render(self) -> list[str]:
        return [str(f) for f in self.factors]


@dataclass(frozen=True)
class RestrictedRep:
    """A representation certified B-restricted: measure product <= B, all
    factors in rad(K_alpha), at most one torsion factor."""

    rep: Representation
    bound: Fraction
    measures_within_bound: bool
    factors_in_radical: bool
    at_most_one_torsion: bool


def restrict(rep: Representation, bound: Fraction,
             config: SolverConfig = DEFAULT_CONFIG) -> RestrictedRep:
    """Check the three B-restricted conditions, exactly where possible."""
    bound = Fraction(bound)
    prod_m = MeasureValue.one()
    for mv in rep.factor_measures(config.precision):
        if prod_m.exact is not None and mv.exact is not None:
            prod_m = MeasureValue.from_exact(prod_m.exact * mv.exact)
        else:
            iv = prod_m.interval() * mv.interval()
            prod_m = MeasureValue(iv.lo, iv.hi)
    if prod_m.exact is not None:
        meas_ok = prod_m.exact.cmp_rational(bound) <= 0
    else:
        meas_ok = prod_m.hi <= bound
    K, _ = galois_closure(rep.target, config.closure_cap)
    rad_ok = all(_in_radical(f, K) for f in rep.factors)
    torsion_count = sum(1 for f in rep.factors if is_torsion(f))
    return RestrictedRep(rep, bound, meas_ok, rad_ok, torsion_count <= 1)


def _in_radical(x: AlgebraicNumber, K: NumberField) -> bool:
    """x in rad(K): some positive power of x lies in K."""
    if K.degree == 1:
        return detect_surd(x) is not None
    h = K.minpoly_over(x)
    r = len(h) - 1
    delta = K.elt_to_algebraic(_conj_product_from_minpoly(K, h))
    # For x in rad(K) the conjugates over K are zeta*x, so the product is
    # zeta' * x^r; otherwise it is not.
    ratio = mul(delta, inv(pow_int(x, r)))
    return is_torsion(ratio)


def _conj_product_from_minpoly(K: NumberField, h) -> tuple:
    d = len(h) - 1
    c0 = h[0]
    return c0 if d % 2 == 0 else K.neg(c0)


# ---------------------------------------------------------------------------
# Exponent vectors over rational primes (the rad(Q) search space)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentVector:
    """zeta * prod primes[i]^exps[i]; canonical: primes ascending, no zero
    exponents, sign and other torsion in the (m, j) tag."""

    primes: tuple[int, ...]
    exps: tuple[Fraction, ...]
    torsion: tuple[int, int] = (1, 0)

    @staticmethod
    def from_surd(s: SurdExpr) -> "ExponentVector":
        s = s.canonical()
        items: dict[int, Fraction] = {}
        if s.base != 1:
            for q, e in sympy.factorint(s.base.numerator).items():
                items[int(q)] = items.get(int(q), Fraction(0)) + e * s.exp
            for q, e in sympy.factorint(s.base.denominator).items():
                items[int(q)] = items.get(int(q), Fraction(0)) - e * s.exp
        primes = tuple(sorted(q for q, e in items.items() if e != 0))
        exps = tuple(items[q] for q in primes)
        return ExponentVector(primes, exps, (s.m, s.j))

    @staticmethod
    def from_algebraic(x: AlgebraicNumber) -> Optional["ExponentVector"]:
        s = detect_surd(x)
        return ExponentVector.from_surd(s) if s is not None else None

    def is_torsion_only(self) -> bool:
        return not self.primes

    def integral(self) -> bool:
        return all(e.denominator == 1 for e in self.exps)

    def surd(self) -> SurdExpr:
        base = Fraction(1)
        den = 1
        for e in self.exps:
            den = math.lcm(den, e.denominator)
        for q, e in zip(self.primes, self.exps):
            base *= Fraction(q) ** int(e * den)
        return SurdExpr(self.torsion[0], self.torsion[1], base,
                        Fraction(1, den)).canonical()

    def encode(self) -> str:
        parts = [f"{q}^{e}" for q, e in zip(self.primes, self.exps)]
        return f"zeta({self.torsion[0]},{self.torsion[1]})*" + "*".join(parts)


def _support_measure(primes: Sequence[int], exps: Sequence[int]) -> int:
    """max(numerator, denominator) of prod p^e for an integer vector."""
    num = den = 1
    for p, e in zip(primes, exps):
        if e > 0:
            num *= p ** e
        elif e < 0:
            den *= p ** (-e)
    return max(num, den)


def _feasible_ceiling(vec: ExponentVector, m: int) -> bool:
    """Whether the target factors into surds of measure <= m.

    A surd of measure <= m has its exponent vector supported on primes <= m
    (the prime's contribution alone already reaches its value), and
    conversely single-prime surds p^(e/D) with p <= m realize any rational
    exponent; so feasibility is exactly prime-support containment.
    """
    return all(q <= m for q in vec.primes)


def _witness_factors(vec: ExponentVector, m: int) -> list[AlgebraicNumber]:
    """Deterministic witness with every factor measure <= m.

    Integer exponents: per-prime chunks p^s with p^s <= m, then positive
    chunks are paired with negative chunks into single rational factors
    (keeping N = max of the two chunk counts); the sign rides on the first
    factor.  Fractional exponents: single-prime surd chunks, unpaired.
    """
    tors_m, tors_j = vec.torsion
    if vec.is_torsion_only():
        return [torsion_number(tors_m, tors_j)]
    if vec.integral():
        pos: list[Fraction] = []
        neg: list[Fraction] = []
        for q, e in zip(vec.primes, vec.exps):
            side = pos if e > 0 else neg
            side.extend(Fraction(q) ** s for s in _chunks(abs(int(e)), q, m))
        factors_q: list[Fraction] = []
        for i in range(max(len(pos), len(neg))):
            a = pos[i] if i < len(pos) else Fraction(1)
            b = neg[i] if i < len(neg) else Fraction(1)
            factors_q.append(a / b)
        out = [from_rational(c) for c in factors_q]
        if tors_m == 2:
            out[0] = from_rational(-factors_q[0])
        elif tors_m > 2:
            out.insert(0, torsion_number(tors_m, tors_j))
        return out
    out = []
    if tors_m > 1:
        out.append(torsion_number(tors_m, tors_j))
    for q, e in zip(vec.primes, vec.exps):
        sign = 1 if e > 0 else -1
        w = e.denominator
        for s in _chunks(abs(e.numerator), q, m):
            out.append(from_surd(SurdExpr(base=Fraction(q),
                                          exp=Fraction(sign * s, w))))
    return out


def _chunks(total: int, p: int, m: int) -> list[int]:
    s_max = 0
    v = 1
    while v * p <= m:
        v *= p
        s_max += 1
    assert s_max >= 1, "prime exceeds the ceiling"
    out = [s_max] * (total // s_max)
    if total % s_max:
        out.append(total % s_max)
    return out


# ---------------------------------------------------------------------------
# Northcott enumeration and q(alpha)
# ---------------------------------------------------------------------------


class _QuadVal:
    """u + v*sqrt(D) for exact comparisons of quadratic measure values."""

    __slots__ = ("u", "v", "D")

    def __init__(self, u: Fraction, v: Fraction, D: int):
        self.u, self.v, self.D = Fraction(u), Fraction(v), D

    def cmp_rational(self, r: Fraction) -> int:
        t = Fraction(r) - self.u
        v = self.v
        if v == 0:
            return (0 > t) - (0 < t)
        if v > 0 and t <= 0:
            return 1
        if v < 0 and t >= 0:
            return -1
        lhs, rhs = v * v * self.D, t * t
        s = 1 if v > 0 else -1
        return s * ((lhs > rhs) - (lhs < rhs))

    def cmp(self, other: "_QuadVal") -> int:
        assert self.D == other.D
        diff = _QuadVal(self.u - other.u, self.v - other.v, self.D)
        return diff.cmp_rational(Fraction(0))

    def square(self) -> "_QuadVal":
        return _QuadVal(self.u * self.u + self.v * self.v * self.D,
                        2 * self.u * self.v, self.D)

    def as_rational(self) -> Optional[Fraction]:
        return self.u if self.v == 0 else None


MVal = Union[Fraction, _QuadVal]


def _mval_cmp(a: MVal, b: MVal) -> int:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return (a > b) - (a < b)
    if isinstance(a, Fraction):
        return -_mval_cmp(b, a)
    if isinstance(b, Fraction):
        return a.cmp_rational(b)
    return a.cmp(b)


def _squarefree_part(n: int) -> int:
    s = 1
    for q, e in sympy.factorint(abs(n)).items():
        if e % 2:
            s *= int(q)
    return s if n > 0 else -s


@dataclass(frozen=True)
class _Candidate:
    elem: AlgebraicNumber
    mval: MVal  # exact Mahler measure
    degree: int

    def height_cmp(self, other: "_Candidate") -> int:
        # H = M^(1/deg): compare M_a^(deg_b) against M_b^(deg_a)
        aa = self._pow(self.mval, other.degree)
        bb = self._pow(other.mval, self.degree)
        return _mval_cmp(aa, bb)

    @staticmethod
    def _pow(v: MVal, n: int) -> MVal:
        if n == 1:
            return v
        assert n == 2
        return v.square() if isinstance(v, _QuadVal) else v * v


def _quadratic_measure(a: int, b: int, c: int, disc: int) -> MVal:
    """Exact Mahler measure of the irreducible primitive quadratic
    a x^2 + b x + c (a > 0)."""
    if disc < 0:
        return Fraction(max(a, c))
    p = IntPoly((c, b, a))
    inside = count_real_roots(p, Fraction(-1), Fraction(1))
    if inside == 2:
        return Fraction(a)
    if inside == 0:
        return Fraction(abs(c))
    # one root inside, one outside: M = |a * r_out| = |(-b +- t sqrt(D))/2|
    D = _squarefree_part(disc)
    t2 = disc // D
    t = math.isqrt(t2)
    assert t * t == t2
    for sgn in (1, -1):
        val = _QuadVal(Fraction(-b, 2), Fraction(sgn * t, 2), D)
        other = _QuadVal(Fraction(-b, 2), Fraction(-sgn * t, 2), D)
        # outside root: |val| > 1 and |other| < 1
        if val.square().cmp_rational(Fraction(1)) > 0 \
                and other.square().cmp_rational(Fraction(1)) < 0:
            if val.cmp_rational(Fraction(0)) < 0:
                val = _QuadVal(-val.u, -val.v, D)
            return val
    raise AssertionError("quadratic root classification failed")


def northcott_enumerate(K: NumberField, B) -> list[AlgebraicNumber]:
    """The complete finite list {x in K^x : H(x) <= B}, deterministic order.

    Supports K = Q and quadratic fields.
    """
    B = Fraction(B)
    if B < 1:
        return []
    if K.degree == 1:
        return [c.elem for c in sorted(_northcott_q(B), key=_rat_sort_key)]
    if K.degree == 2:
        cands = _northcott_q(B) + _northcott_quadratic(K, B)
        def cmp(x: _Candidate, y: _Candidate) -> int:
            h = x.height_cmp(y)
            if h:
                return h
            if x.degree != y.degree:
                return x.degree - y.degree
            kx = (x.elem.minpoly.coeffs, x.elem.index)
            ky = (y.elem.minpoly.coeffs, y.elem.index)
            return (kx > ky) - (kx < ky)
        return [c.elem for c in sorted(cands, key=functools.cmp_to_key(cmp))]
    raise UnsupportedDegreeError(
        f"Northcott enumeration supports degree <= 2, got {K.degree}")


def _rat_sort_key(c: _Candidate):
    v = c.elem.as_fraction()
    return (c.mval, v.denominator != 1, abs(v.numerator), v.denominator, v < 0)


def _northcott_q(B: Fraction) -> list[_Candidate]:
    out = []
    nmax = math.floor(B)
    for den in range(1, nmax + 1):
        for num in range(1, nmax + 1):
            if math.gcd(num, den) != 1:
                continue
            h = Fraction(max(num, den))
            if h <= B:
                for s in (1, -1):
                    out.append(_Candidate(from_rational(Fraction(s * num, den)),
                                          h, 1))
    return out


def _northcott_quadratic(K: NumberField, B: Fraction) -> list[_Candidate]:
    g = K.generator.minpoly
    ga, gb, gc = g.coeffs[2], g.coeffs[1], g.coeffs[0]
    D = _squarefree_part(gb * gb - 4 * ga * gc)
    out = []
    b2 = B * B
    amax = math.floor(b2)
    for a in range(1, amax + 1):
        cmax = math.floor(b2)
        bmax = math.floor(2 * b2)
        for c in range(-cmax, cmax + 1):
            for b in range(-bmax, bmax + 1):
                disc = b * b - 4 * a * c
                if disc == 0 or _is_square(disc):
                    continue  # reducible over Q
                if math.gcd(math.gcd(a, b), c) != 1:
                    continue
                if _squarefree_part(disc) != D:
                    continue  # roots not in K
                m = _quadratic_measure(a, b, c, disc)
                if _mval_cmp(m, b2) > 0:
                    continue
                p = IntPoly((c, b, a))
                out.append(_Candidate(algnum.from_poly_root(p, 0), m, 2))
                out.append(_Candidate(algnum.from_poly_root(p, 1), m, 2))
    return out


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def q_of(alpha: AlgebraicNumber,
         config: SolverConfig = DEFAULT_CONFIG) -> MeasureValue:
    """inf{H(x) : x in K_alpha^x non-torsion}, realized as a minimum by an
    expanding Northcott sweep.  Exact rational power when the minimizer
    admits one, certified enclosure otherwise."""
    mv, _ = q_of_with_witness(alpha, config)
    return mv


def q_of_with_witness(alpha: AlgebraicNumber,
                      config: SolverConfig = DEFAULT_CONFIG
                      ) -> tuple[MeasureValue, AlgebraicNumber]:
    K, _ = galois_closure(alpha, config.closure_cap)
    if K.degree == 1:
        return MeasureValue.from_exact(ExactPow.of(2)), from_rational(2)
    if K.degree > 2:
        raise UnsupportedDegreeError(
            f"q_of supports closure degree <= 2, got {K.degree}")
    B = 2
    while True:
        cands = [c for c in _northcott_q(Fraction(B)) + _northcott_quadratic(K, Fraction(B))
                 if not is_torsion(c.elem)]
        if cands:
            best = cands[0]
            for c in cands[1:]:
                if c.height_cmp(best) < 0:
                    best = c
            mfrac = best.mval if isinstance(best.mval, Fraction) else None
            if mfrac is not None:
                mv = MeasureValue.from_exact(
                    ExactPow.of(mfrac, Fraction(1, best.degree)))
            else:
                mm = mahler_roots(best.elem, config.precision)
                iv = mm.interval().root(best.degree, 96)
                mv = MeasureValue(iv.lo, iv.hi)
            return mv, best.elem
        B += 1


def length_bound(alpha: AlgebraicNumber, B,
                 config: SolverConfig = DEFAULT_CONFIG) -> int:
    """floor(1 + log B / log q(alpha)): the maximal length of a B-restricted
    representation."""
    B = Fraction(B)
    if B < 1:
        raise ValueError("B must be at least 1")
    q = q_of(alpha, config)
    n = 1
    while _q_power_le(q, n, B):
        n += 1
        if n > 10 ** 6:  # pragma: no cover
            raise ArithmeticError("length bound runaway")
    return n


def _q_power_le(q: MeasureValue, n: int, B: Fraction) -> bool:
    """q^n <= B, exactly when q is exact, else via the certified lower end
    (which can only overestimate the bound, never underestimate)."""
    if q.exact is not None:
        return q.exact.pow(n).cmp_rational(B) <= 0
    return q.lo ** n <= B


# ---------------------------------------------------------------------------
# Theorem 2.1: reduction into rad(K_alpha)
# ---------------------------------------------------------------------------


def _principal_root_refiner(rho: AlgebraicNumber, r: int):
    """bits -> certified box of the principal r-th root of rho."""

    def refiner(bits: int) -> Box:
        work = bits + 8
        b = rho.box(work)
        while b.contains_zero():
            work += 32
            b = rho.box(work)
        if rho.is_real:
            sgn = 1 if b.re.lo > 0 else (-1 if b.re.hi < 0 else 0)
            while sgn == 0:
                work += 32
                b = rho.box(work)
                sgn = 1 if b.re.lo > 0 else (-1 if b.re.hi < 0 else 0)
            mag = b.re.abs().root(r, bits + 4)
            root_box = Box(mag, Ival.point(0))
            if sgn < 0:
                root_box = root_box * unit_root_box(1, 2 * r, bits + 4)
            return root_box
        while b.im.contains_zero():
            work += 32
            b = rho.box(work)
        mag = b.abs2().sqrt(bits + 4).root(r, bits + 4)
        theta = arg_ival(b, bits + 4).scale(Fraction(1, r))
        return Box(mag * cos_ival(theta, bits + 4),
                   mag * sin_ival(theta, bits + 4))

    return refiner


def _principal_root(rho: AlgebraicNumber, r: int) -> AlgebraicNumber:
    """The principal r-th root of rho (positive real root for positive real
    rho, argument divided by r otherwise)."""
    if r == 1:
        return rho
    g = rho.minpoly
    spread = [0] * (g.degree * r + 1)
    for i, c in enumerate(g.coeffs):
        spread[i * r] = c
    ann = IntPoly(spread)
    surd = None
    if rho.surd is not None:
        surd = rho.surd.pow(Fraction(1, r))
    return algnum.algebraic_from_annihilator(
        ann, _principal_root_refiner(rho, r), surd=surd)


def reduce_representation(rep: Representation,
                          config: SolverConfig = DEFAULT_CONFIG
                          ) -> tuple[AlgebraicNumber, Representation]:
    """Replace each factor a_n by an r-th root of the product of its
    conjugates over K_alpha (r the relative degree), yielding factors in
    rad(K_alpha) with no larger measures and the same product up to an
    explicit root of unity zeta: target = zeta * prod(beta_n).

    The root branch is chosen by twisting the radicand with a torsion
    element of K_alpha (preferring a positive real radicand) and verified;
    the product identity is checked exactly and failure raises, never
    returning an unverified output.
    """
    alpha = rep.target
    K, _ = galois_closure(alpha, config.closure_cap)
    betas = []
    for a_n in rep.factors:
        betas.append(_reduce_factor(a_n, K, config))
    prod = product(betas)
    zeta = mul(alpha, inv(prod))
    if not is_torsion(zeta):
        raise BranchSearchError(
            "reduced product does not match the target up to torsion")
    zm, zj = torsion_data(zeta)
    slack = torsion_data(inv(zeta))
    reduced = Representation(alpha, tuple(betas),
                             torsion_slack=(zm != 1), slack=slack)
    return torsion_number(zm, zj), reduced


def _reduce_factor(a_n: AlgebraicNumber, K: NumberField,
                   config: SolverConfig) -> AlgebraicNumber:
    h = K.minpoly_over(a_n)
    r = len(h) - 1
    if r == 1:
        return a_n  # already in K, the 1st root of its own conjugate product
    c_elt = _conj_product_from_minpoly(K, h)
    c_alg = K.elt_to_algebraic(c_elt)
    m_an = mahler_roots(a_n, config.precision)
    candidates: list[AlgebraicNumber] = []
    if c_alg.is_real and c_alg.box(32).re.hi < 0:
        # twist a negative real radicand positive (-1 is in every field)
        candidates.append(mul(from_rational(-1), c_alg))
    candidates.append(c_alg)
    last_err: Optional[Exception] = None
    for rho in candidates:
        beta = _principal_root(rho, r)
        try:
            m_beta = mahler_roots(beta, config.precision)
            if heights.le(m_beta, m_an, config.compare_bits):
                if pow_int(beta, r) == rho:  # rad(K_alpha) witness
                    return beta
        except UndecidedComparisonError as e:
            last_err = e
    raise BranchSearchError(
        f"no verified branch for factor {a_n}") from last_err


# ---------------------------------------------------------------------------
# Certificates and solve results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    q: Optional[MeasureValue]
    length_bound: Optional[int]
    kmax: int
    closure_degree: Optional[int]
    bounds_only: bool
    caps_exceeded: bool
    location_in_closure: Optional[bool]
    witness_in_closure: Optional[bool] = None
    candidate_values: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "q": str(self.q) if self.q is not None else None,
            "length_bound": self.length_bound,
            "kmax": self.kmax,
            "closure_degree": self.closure_degree,
            "bounds_only": self.bounds_only,
            "caps_exceeded": self.caps_exceeded,
            "location_in_closure": self.location_in_closure,
            "witness_in_closure": self.witness_in_closure,
            "candidate_values": list(self.candidate_values),
        }


@dataclass(frozen=True)
class SolveResult:
    value: MeasureValue
    witness: Representation
    certificate: Certificate

    def exact_rational(self) -> Optional[Fraction]:
        return self.value.as_rational()

    def to_record(self) -> dict:
        return {
            "value": {
                "exact": str(self.value.exact) if self.value.exact else None,
                "lo": str(self.value.lo),
                "hi": str(self.value.hi),
            },
            "witness": self.witness.render(),
            "certificate": self.certificate.to_record(),
        }

    def serialize(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True,
                          separators=(",", ":"))


def verify_location(result: SolveResult, alpha: AlgebraicNumber,
                    config: SolverConfig = DEFAULT_CONFIG) -> bool:
    """Whether the exact solve value lies in K_alpha; for rational targets
    this is integrality of the value."""
    e = result.value.exact
    if e is None:
        raise ValueError("verify_location requires an exact value")
    if alpha.is_rational():
        r = e.as_rational()
        return r is not None and r.denominator == 1
    if e.as_rational() is not None:
        return True  # rational values lie in every number field
    K, _ = galois_closure(alpha, config.closure_cap)
    val = from_surd(SurdExpr(base=e.base, exp=e.exp))
    return K.contains(val)


# ---------------------------------------------------------------------------
# The solvers
# ---------------------------------------------------------------------------


def _exact_cert(alpha: AlgebraicNumber, value_mv: MeasureValue,
                witness: Representation, config: SolverConfig) -> SolveResult:
    """Certificate for an exact solve.  q(alpha), the length bound, and the
    witness-in-closure report need Northcott enumeration, which supports
    closure degree <= 2; beyond that they are omitted and flagged."""
    q = None
    lb = None
    caps = False
    closure_degree = None
    witness_in = None
    if alpha.degree <= 2:
        K, _ = galois_closure(alpha, config.closure_cap)
        closure_degree = K.degree
        if K.degree <= 2:
            q = q_of(alpha, config)
            m_alpha = mahler_roots(alpha, config.precision)
            bound = m_alpha.as_rational()
            if bound is None:
                bound = m_alpha.hi
            lb = length_bound(alpha, bound, config)
            witness_in = all(K.contains(f) for f in witness.factors)
        else:  # pragma: no cover - quadratic closures are quadratic
            caps = True
    else:
        caps = True
    res = SolveResult(value_mv, witness,
                      Certificate(q=q, length_bound=lb, kmax=config.kmax,
                                  closure_degree=closure_degree,
                                  bounds_only=False, caps_exceeded=caps,
                                  location_in_closure=None,
                                  witness_in_closure=witness_in))
    loc = verify_location(res, alpha, config)
    cert = Certificate(q=q, length_bound=lb, kmax=config.kmax,
                       closure_degree=closure_degree, bounds_only=False,
                       caps_exceeded=caps, location_in_closure=loc,
                       witness_in_closure=witness_in)
    return SolveResult(value_mv, witness, cert)


def m_one(alpha: AlgebraicNumber,
          config: SolverConfig = DEFAULT_CONFIG) -> SolveResult:
    """Metric Mahler measure: inf of prod M(a_n) over representations.

    Exact for targets that are a root of unity times a rational (the
    inequality chain H(alpha) <= prod H(a_n) <= prod M(a_n) collapses in
    degree one); certified bounds otherwise.
    """
    if alpha.is_zero():
        raise ZeroPolynomialError("m_one of zero")
    if is_torsion(alpha):
        wit = Representation(alpha, (alpha,))
        return _exact_cert(alpha, MeasureValue.one(), wit, config)
    vec = ExponentVector.from_algebraic(alpha)
    if vec is not None and vec.integral():
        c = Fraction(1)
        for q, e in zip(vec.primes, vec.exps):
            c *= Fraction(q) ** int(e)
        value = Fraction(max(c.numerator, c.denominator))
        tm, tj = vec.torsion
        if tm <= 2:
            wit = Representation(alpha, (alpha,))
        else:
            wit = Representation(alpha, (torsion_number(tm, tj), from_rational(c)))
        mv = MeasureValue.from_exact(ExactPow.of(value))
        return _exact_cert(alpha, mv, wit, config)
    return _bounds_result(alpha, config, ultra=False)


def m_inf(alpha: AlgebraicNumber,
          config: SolverConfig = DEFAULT_CONFIG) -> SolveResult:
    """Ultrametric Mahler measure: inf of max M(a_n) over representations.

    Exact for rad(Q) targets: candidate ceilings m = 2, 3, ... are swept and
    the first feasible one (by the prime-support argument) is the value; a
    witness achieving it is returned.  Other targets get certified bounds,
    with the candidate value set narrowed by Northcott when the closure is
    quadratic.
    """
    if alpha.is_zero():
        raise ZeroPolynomialError("m_inf of zero")
    if is_torsion(alpha):
        wit = Representation(alpha, (alpha,))
        return _exact_cert(alpha, MeasureValue.one(), wit, config)
    vec = ExponentVector.from_algebraic(alpha)
    if vec is not None:
        m_alpha = measure_of_surd(detect_surd(alpha)).exact.as_rational()
        assert m_alpha is not None and m_alpha.denominator == 1, \
            "rad(Q) measures are integers"
        m_star = None
        for m in range(2, int(m_alpha) + 1):
            if _feasible_ceiling(vec, m):
                m_star = m
                break
        assert m_star is not None, "trivial representation is always feasible"
        factors = _witness_factors(vec, m_star)
        wit = Representation(alpha, tuple(factors))
        mv = MeasureValue.from_exact(ExactPow.of(m_star))
        return _exact_cert(alpha, mv, wit, config)
    return _bounds_result(alpha, config, ultra=True)


def _bounds_result(alpha: AlgebraicNumber, config: SolverConfig,
                   ultra: bool) -> SolveResult:
    """Certified [lower, upper] for non-rad(Q) targets.

    Lower: H(alpha) for M1; the minimal non-torsion measure of the closure
    for M-infinity (every non-torsion rad(K) factor measure is at least
    that, by Lemma-style value quantization).  Upper: the best reduction of
    the trivial representation.
    """
    h = weil_height(alpha, config.precision)
    m_alpha = mahler_roots(alpha, config.precision)
    caps = False
    closure_degree: Optional[int] = None
    K: Optional[NumberField] = None
    try:
        K, _ = galois_closure(alpha, config.closure_cap)
        closure_degree = K.degree
    except UnsupportedDegreeError:
        caps = True
    witness = Representation(alpha, (alpha,))
    upper = m_alpha
    if K is not None:
        try:
            _, red = reduce_representation(witness, config)
            cand = _max_measure(red, config) if ultra else _product_measure(red, config)
            if compare(cand, upper, config.compare_bits) < 0:
                witness, upper = red, cand
        except (BranchSearchError, UndecidedComparisonError,
                UnsupportedDegreeError):
            pass
    lower_frac = Fraction(1)
    candidates: tuple[str, ...] = ()
    q = None
    lb = None
    if K is not None and K.degree <= 2:
        q = q_of(alpha, config)
        if ultra:
            mu_min, cand_vals = _measure_floor(K, upper, config)
            lower_frac = mu_min
            candidates = cand_vals
        try:
            lb = length_bound(alpha, upper.hi, config)
        except UnsupportedDegreeError:
            pass
    if ultra:
        lo = max(lower_frac, Fraction(1))
    else:
        lo = h.lo
    exact = None
    if ultra and upper.exact is not None and upper.exact.cmp_rational(lo) == 0:
        exact = upper.exact  # bounds met: the value is pinched exactly
    mv = MeasureValue(lo, upper.hi, exact)
    cert = Certificate(q=q, length_bound=lb, kmax=config.kmax,
                       closure_degree=closure_degree, bounds_only=exact is None,
                       caps_exceeded=caps, location_in_closure=None,
                       candidate_values=candidates)
    return SolveResult(mv, witness, cert)


def _max_measure(rep: Representation, config: SolverConfig) -> MeasureValue:
    best: Optional[MeasureValue] = None
    for mv in rep.factor_measures(config.precision):
        if best is None or compare(mv, best, config.compare_bits) > 0:
            best = mv
    assert best is not None
    return best


def _product_measure(rep: Representation, config: SolverConfig) -> MeasureValue:
    out = MeasureValue.one()
    for mv in rep.factor_measures(config.precision):
        if out.exact is not None and mv.exact is not None:
            out = MeasureValue.from_exact(out.exact * mv.exact)
        else:
            iv = out.interval() * mv.interval()
            out = MeasureValue(iv.lo, iv.hi)
    return out


def _measure_floor(K: NumberField, upper: MeasureValue,
                   config: SolverConfig) -> tuple[Fraction, tuple[str, ...]]:
    """Smallest non-torsion Mahler measure among elements of the (at most
    quadratic) field K, plus the Northcott-narrowed candidate value list up
    to the current upper bound (Theorem: the ultrametric value is M(beta)
    for some beta in K_alpha)."""
    bound = upper.hi
    b_h = Fraction(math.ceil(bound))
    cands = [c for c in _northcott_q(b_h) + (
        _northcott_quadratic(K, b_h) if K.degree == 2 else [])
        if not is_torsion(c.elem)]
    vals: list[MVal] = [c.mval for c in cands]
    floor_val = Fraction(2)
    if vals:
        best = vals[0]
        for v in vals[1:]:
            if _mval_cmp(v, best) < 0:
                best = v
        if isinstance(best, Fraction):
            floor_val = best
        else:
            # irrational minimum: certified rational lower bound by bisection
            lo, hi = Fraction(1), bound
            for _ in range(128):
                mid = (lo + hi) / 2
                if best.cmp_rational(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            floor_val = lo
    shown = []
    seen = set()
    for v in sorted(vals, key=lambda v: (isinstance(v, _QuadVal), str(v.u) if isinstance(v, _QuadVal) else str(v))):
        s = (f"{v.u}+{v.v}*sqrt({v.D})" if isinstance(v, _QuadVal) else str(v))
        if s not in seen and (_mval_cmp(v, bound) <= 0):
            seen.add(s)
            shown.append(s)
    return floor_val, tuple(shown[:32])


# ---------------------------------------------------------------------------
# Theorem 4.1 power recombination: projecting factors into the field
# ---------------------------------------------------------------------------


def project_to_field(rep: Representation, K: Optional[NumberField] = None,
                     config: SolverConfig = DEFAULT_CONFIG) -> Representation:
    """Push a rad(K)-factor representation into K itself.

    Each factor gamma_n with relative degree L_n over K has conjugate
    product delta_n = zeta_n * gamma_n^{L_n} in K; with L = lcm(L_n) and
    J_n = L / L_n, the delta_n repeated J_n times represent zeta * target^L
    (slack recorded).  Factor measures do not increase: M(delta_n) =
    M(gamma_n)^{1/S_n}.
    """
    alpha = rep.target
    if K is None:
        K, _ = galois_closure(alpha, config.closure_cap)
    Ls = []
    deltas = []
    for g in rep.factors:
        h = K.minpoly_over(g)
        L_n = len(h) - 1
        delta_elt = _conj_product_from_minpoly(K, h)
        delta = K.elt_to_algebraic(delta_elt)
        ratio = mul(delta, inv(pow_int(g, L_n)))
        if not is_torsion(ratio):
            raise RadMembershipError(f"factor {g} is not in rad(K)")
        Ls.append(L_n)
        deltas.append(delta)
    L = math.lcm(*Ls)
    factors: list[AlgebraicNumber] = []
    for delta, L_n in zip(deltas, Ls):
        factors.extend([delta] * (L // L_n))
    target = pow_int(alpha, L)
    zeta = mul(product(factors), inv(target))
    if not is_torsion(zeta):
        raise RadMembershipError("projected product is off by a non-torsion unit")
    zm, zj = torsion_data(zeta)
    return Representation(target, tuple(factors),
                          torsion_slack=(zm != 1), slack=(zm, zj))
