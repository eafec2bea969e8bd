"""Bounded-precision p-adic numbers and the embedding of cyclotomic values."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy

from .cyclo import CycloNumber, cyclotomic_poly, euler_phi, vp
from .errors import NotAUnit, PrecisionTooLow, WildPartUnsupported, ZeroDenominator


@dataclass(frozen=True)
class PadicNumber:
    """p^val * unit + O(p^(val + precision)).

    A value known only to be divisible by p^val is stored with unit 0 and
    precision 0.  Valuations may be fractional when the number comes from a
    ramified layer; addition then requires the valuations to differ by an
    integer.
    """

    p: int
    val: Fraction
    unit: int
    precision: int

    def __post_init__(self):
        object.__setattr__(self, "val", Fraction(self.val))
        if self.precision < 0:
            raise ValueError("negative precision")
        if self.precision == 0:
            object.__setattr__(self, "unit", 0)
        else:
            u = self.unit % self.p ** self.precision
            if u % self.p == 0:
                raise ValueError("unit part must be prime to p")
            object.__setattr__(self, "unit", u)

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, p: int, absolute_precision) -> "PadicNumber":
        return cls(p, Fraction(absolute_precision), 0, 0)

    @classmethod
    def from_rational(cls, x, p: int, precision: int) -> "PadicNumber":
        return from_rational(x, p, precision)

    # queries -----------------------------------------------------------
    @property
    def absolute_precision(self) -> Fraction:
        return self.val + self.precision

    def is_zero(self) -> bool:
        return self.precision == 0

    def valuation(self):
        """Exact valuation, or None when the number is zero at this precision."""
        return None if self.is_zero() else self.val

    # arithmetic --------------------------------------------------------
    def _check(self, other: "PadicNumber"):
        if self.p != other.p:
            raise ValueError("p-adic numbers over different primes")

    def _coerce(self, other) -> "PadicNumber":
        if isinstance(other, PadicNumber):
            self._check(other)
            return other
        prec = max(int(math.ceil(self.absolute_precision)), 1)
        return from_rational(Fraction(other), self.p, prec + 8)

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            # p^a O(p^b) style bound: absolute precision adds the other's valuation
            va = self.val if not self.is_zero() else self.absolute_precision
            vb = other.val if not other.is_zero() else other.absolute_precision
            return PadicNumber.zero(self.p, va + vb)
        prec = min(self.precision, other.precision)
        return PadicNumber(self.p, self.val + other.val, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicNumber(self.p, self.val, -self.unit, self.precision)

    def __add__(self, other):
        other = self._coerce(other)
        absprec = min(self.absolute_precision, other.absolute_precision)
        terms = [x for x in (self, other) if not x.is_zero()]
        if not terms:
            return PadicNumber.zero(self.p, absprec)
        base = min(x.val for x in terms)
        if any((x.val - base).denominator != 1 for x in terms):
            raise ValueError("cannot add p-adic numbers whose valuations differ by a non-integer")
        digits = absprec - base
        if digits <= 0:
            return PadicNumber.zero(self.p, absprec)
        digits = int(digits)
        mod = self.p ** digits
        s = sum(x.unit * self.p ** int(x.val - base) for x in terms) % mod
        if s == 0:
            return PadicNumber.zero(self.p, absprec)
        k = 0
        while s % self.p == 0:
            s //= self.p
            k += 1
        return PadicNumber(self.p, base + k, s, digits - k)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def inverse(self) -> "PadicNumber":
        if self.is_zero():
            raise ZeroDivisionError("p-adic zero has no inverse")
        mod = self.p ** self.precision
        return PadicNumber(self.p, -self.val, pow(self.unit, -1, mod), self.precision)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        if self.is_zero():
            return PadicNumber.zero(self.p, self.absolute_precision * e) if e else from_rational(1, self.p, 1)
        mod = self.p ** self.precision
        return PadicNumber(self.p, self.val * e, pow(self.unit, e, mod), self.precision)

    def equals(self, other, precision=None) -> bool:
        """Agreement up to the joint absolute precision (or the given one)."""
        diff = self - self._coerce(other)
        if diff.is_zero():
            return precision is None or diff.absolute_precision >= precision
        return precision is not None and diff.val >= precision

    def __eq__(self, other):
        if not isinstance(other, (PadicNumber, int, Fraction)):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def residue(self, n: int) -> int:
        """The integer in [0, p^n) congruent to self (requires val >= 0 integral)."""
        if self.val.denominator != 1:
            raise ValueError("fractional valuation has no integer residue")
        if self.absolute_precision < n:
            raise PrecisionTooLow(f"known only to O(p^{self.absolute_precision})")
        if self.is_zero():
            return 0
        if self.val < 0:
            raise ValueError("negative valuation")
        return self.unit * self.p ** int(self.val) % self.p ** n

    # serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "p": self.p,
            "val_num": self.val.numerator,
            "val_den": self.val.denominator,
            "unit": self.unit,
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PadicNumber":
        return cls(int(d["p"]), Fraction(int(d["val_num"]), int(d["val_den"])),
                   int(d["unit"]), int(d["precision"]))

    def __str__(self):
        if self.is_zero():
            return f"O({self.p}^{self.absolute_precision})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.absolute_precision})"


def from_rational(x, p: int, precision: int) -> PadicNumber:
    if isinstance(x, tuple):
        a, b = x
        if b == 0:
            raise ZeroDenominator("zero denominator")
        x = Fraction(a, b)
    x = Fraction(x)
    if x == 0:
        return PadicNumber.zero(p, precision)
    v = vp(x, p)
    a, b = x.numerator, x.denominator
    a //= p ** max(v, 0)
    b //= p ** max(-v, 0)
    mod = p ** precision
    return PadicNumber(p, Fraction(v), a * pow(b, -1, mod) % mod, precision)


def teichmuller(a: int, p: int, precision: int) -> PadicNumber:
    if a % p == 0:
        raise NotAUnit(f"{a} is divisible by {p}")
    return PadicNumber(p, 0, _teichmuller_int(a % p, p, precision), precision)


@lru_cache(maxsize=None)
def _teichmuller_int(a: int, p: int, precision: int) -> int:
    mod = p ** precision
    x = a % mod
    while True:
        y = pow(x, p, mod)
        if y == x:
            return x
        x = y


@lru_cache(maxsize=None)
def _tame_root(m: int, p: int, precision: int) -> int:
    """iota_p(zeta_m) for m | p-1: the Teichmuller lift of g^((p-1)/m)."""
    if (p - 1) % m:
        raise WildPartUnsupported(f"zeta_{m} does not lie in Z_{p}")
    g = int(sympy.primitive_root(p))
    return _teichmuller_int(pow(g, (p - 1) // m, p), p, precision)


def split_order(m: int, p: int) -> tuple[int, int]:
    """m = m_tame * p^e."""
    e = 0
    while m % p == 0:
        m //= p
        e += 1
    return m, e


def embed_cyclo(x: CycloNumber, p: int, precision: int) -> PadicNumber:
    """iota_p(x) for x in Q(zeta_m) with m | p-1."""
    x = CycloNumber.coerce(x)
    tame, e = split_order(x.order, p)
    if e:
        raise WildPartUnsupported(
            f"order {x.order} has a wild part; only valuation_cyclo is available")
    nonzero = [c for c in x.coeffs if c]
    if not nonzero:
        return PadicNumber.zero(p, precision)
    # work with extra digits to absorb denominators
    shift = max(0, -min(vp(c, p) for c in nonzero))
    work = precision + 2 * shift + 2
    z = _tame_root(x.order, p, work)
    acc = PadicNumber.zero(p, work)
    mod = p ** work
    zj = 1
    for c in x.coeffs:
        if c:
            acc = acc + from_rational(c, p, work) * PadicNumber(p, 0, zj, work)
        zj = zj * z % mod
    if acc.is_zero():
        return acc
    return PadicNumber(p, acc.val, acc.unit, min(acc.precision, precision))


def valuation_cyclo(x: CycloNumber, p: int):
    """v_p(x) at the prime above p singled out by iota_p.

    Supports orders m = m_tame * p^e with m_tame | p - 1: the tame roots are
    embedded through Teichmuller lifts, leaving an element of Z_p[zeta_{p^e}]
    whose pi-adic valuation (pi = 1 - zeta_{p^e}) is found by repeated exact
    division.  Returns None for x = 0.
    """
    x = CycloNumber.coerce(x)
    if x.is_zero():
        return None
    tame, e = split_order(x.order, p)
    if e == 0:
        precision = 8 + _denominator_shift(x, p)
        while True:
            y = embed_cyclo(x, p, precision)
            if not y.is_zero():
                return y.val
            precision *= 2
    q = p ** e
    phi = euler_phi(q)
    # clear denominators
    den = math.lcm(*(c.denominator for c in x.coeffs))
    ints = [int(c * den) for c in x.coeffs]
    base = -vp(den, p)
    precision = 16
    while True:
        poly = _wild_poly(ints, x.order, tame, q, p, precision)
        content = min((_vp_int(c, p) for c in poly if c % p ** precision), default=None)
        if content is None or content >= precision - phi - 1:
            precision *= 2
            continue
        poly = [c // p ** content for c in poly]
        k = _pi_divisions(poly, q, p, p ** (precision - content))
        return base + content + Fraction(k, phi)


def _denominator_shift(x: CycloNumber, p: int) -> int:
    vals = [vp(c, p) for c in x.coeffs if c]
    return max(0, -min(vals)) + max(0, max(vals))


def _vp_int(c: int, p: int) -> int:
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def _wild_poly(ints, m, tame, q, p, precision):
    """Image of sum ints[j] zeta_m^j in (Z/p^precision)[X]/Phi_q(X)."""
    mod = p ** precision
    # zeta_m = zeta_tame^a * zeta_q^b with a*q + b*tame = 1
    a = pow(q, -1, tame) if tame > 1 else 0
    b = (1 - a * q) // tame
    w = _tame_root(tame, p, precision) if tame > 1 else 1
    coeffs = [0] * q
    for j, c in enumerate(ints):
        if c:
            coeffs[(j * b) % q] = (coeffs[(j * b) % q] + c * pow(w, (j * a) % tame, mod)) % mod
    phi_q = cyclotomic_poly(q)
    deg = len(phi_q) - 1
    for i in range(len(coeffs) - 1, deg - 1, -1):
        t = coeffs[i]
        if t:
            for j in range(deg + 1):
                coeffs[i - deg + j] = (coeffs[i - deg + j] - t * phi_q[j]) % mod
    return coeffs[:deg]


def _pi_divisions(poly: list[int], q: int, p: int, mod: int) -> int:
    """Largest k < phi(q) with poly in pi^k, pi = 1 - zeta_q, content of poly prime to p."""
    phi_q = cyclotomic_poly(q)
    deg = len(phi_q) - 1
    # h(X) with Phi_q(X) - Phi_q(1) = (X - 1) h(X); in the quotient p = -(X-1)h(X)
    h = _synthetic_div(list(phi_q), mod)[0]
    k = 0
    while k < deg:
        y1 = sum(poly) % mod
        if y1 % p:
            break
        quo, _ = _synthetic_div(poly, mod)
        s = y1 // p
        # y = (X-1) quo + s*p = (X-1)(quo - s*h); divide by (1-X) = -(X-1)
        z = [(-(quo[i] if i < len(quo) else 0) + s * (h[i] if i < len(h) else 0)) % mod
             for i in range(deg)]
        poly = z
        k += 1
    return k


def _synthetic_div(poly: list[int], mod: int):
    """Divide by (X - 1): returns (quotient, remainder)."""
    n = len(poly)
    quo = [0] * max(n - 1, 0)
    acc = 0
    for i in range(n - 1, 0, -1):
        acc = (acc + poly[i]) % mod
        quo[i - 1] = acc
    rem = (acc + poly[0]) % mod
    return quo, rem
