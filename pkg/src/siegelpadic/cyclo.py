"""Exact arithmetic in cyclotomic fields Q(zeta_m).

Elements are stored on the power basis 1, z, ..., z^(phi(m)-1) with rational
coefficients, reduced modulo the m-th cyclotomic polynomial.  Elements of
different orders are combined in the field of the lcm order.
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_m, lowest degree first."""
    if m < 1:
        raise ValueError("cyclotomic order must be positive")
    num = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in sympy.divisors(m)[:-1]:
        num = _exact_div(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], lead)
        assert r == 0
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    assert not any(num[: len(den) - 1])
    return out


def euler_phi(m: int) -> int:
    return int(sympy.totient(m))


def _reduce(coeffs: list[Fraction], m: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    c = list(coeffs)
    # Phi_m is monic, so plain long division works over Q.
    for i in range(len(c) - 1, deg - 1, -1):
        q = c[i]
        if q:
            for j in range(deg + 1):
                c[i - deg + j] -= q * phi[j]
    c = c[:deg] + [Fraction(0)] * max(0, deg - len(c))
    return tuple(Fraction(x) for x in c)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    raise TypeError(f"cannot read {x!r} as a rational")


class CycloNumber:
    """An element of Q(zeta_order), exact."""

    __slots__ = ("order", "coeffs")
    __hash__ = None  # equality crosses orders, so no stable hash

    def __init__(self, order: int, coeffs):
        if order == 2:
            # Q(zeta_2) = Q; keep the canonical order 1
            c = [Fraction(x) for x in coeffs]
            val = sum(cf * (-1) ** j for j, cf in enumerate(c))
            order, coeffs = 1, [val]
        self.order = order
        self.coeffs = _reduce([_as_fraction(x) for x in coeffs], order)

    # constructors ---------------------------------------------------------
    @classmethod
    def rational(cls, x) -> "CycloNumber":
        return cls(1, [_as_fraction(x)])

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> "CycloNumber":
        k %= m
        c = [0] * (k + 1)
        c[k] = 1
        return cls(m, c)

    @classmethod
    def from_exponents(cls, m: int, terms: dict[int, object]) -> "CycloNumber":
        """sum of coeff * zeta_m^exp."""
        c = [Fraction(0)] * m
        for e, v in terms.items():
            c[e % m] += _as_fraction(v)
        return cls(m, c)

    @classmethod
    def coerce(cls, x) -> "CycloNumber":
        if isinstance(x, CycloNumber):
            return x
        return cls.rational(x)

    # structure ------------------------------------------------------------
    def lift(self, order: int) -> "CycloNumber":
        """Same element written in Q(zeta_order); self.order must divide it."""
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"order {self.order} does not divide {order}")
        step = order // self.order
        c = [Fraction(0)] * (step * len(self.coeffs))
        for j, v in enumerate(self.coeffs):
            c[j * step] = v
        return CycloNumber(order, c)

    def _common(self, other) -> tuple["CycloNumber", "CycloNumber"]:
        other = CycloNumber.coerce(other)
        m = math.lcm(self.order, other.order)
        return self.lift(m), other.lift(m)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        return CycloNumber(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycloNumber(self.order, [-x for x in self.coeffs])

    def __sub__(self, other):
        try:
            return self + (-CycloNumber.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return CycloNumber.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloNumber(self.order, [x * other for x in self.coeffs])
        try:
            a, b = self._common(other)
        except TypeError:
            return NotImplemented
        prod = [Fraction(0)] * (2 * len(a.coeffs))
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        prod[i + j] += x * y
        return CycloNumber(a.order, prod)

    __rmul__ = __mul__

    def inverse(self) -> "CycloNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        if self.is_rational():
            return CycloNumber.rational(1 / self.coeffs[0])
        # Solve (multiplication-by-self matrix) * y = e_0.
        n = len(self.coeffs)
        basis = [CycloNumber(self.order, [0] * j + [1]) for j in range(n)]
        cols = [(self * e).coeffs for e in basis]
        mat = [[cols[j][i] for j in range(n)] + [Fraction(int(i == 0))] for i in range(n)]
        sol = _solve(mat, n)
        return CycloNumber(self.order, sol)

    def __truediv__(self, other):
        other = CycloNumber.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return CycloNumber.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        out = CycloNumber.rational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, (CycloNumber, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    def galois(self, a: int) -> "CycloNumber":
        """Image under zeta -> zeta^a (a coprime to the order)."""
        if math.gcd(a, self.order) != 1:
            raise ValueError("Galois exponent must be a unit")
        return CycloNumber.from_exponents(
            self.order, {j * a: v for j, v in enumerate(self.coeffs) if v}
        )

    def conjugate(self) -> "CycloNumber":
        return self.galois(-1)

    def norm(self) -> Fraction:
        out = CycloNumber.rational(1)
        for a in range(1, self.order + 1):
            if math.gcd(a, self.order) == 1:
                out = out * self.galois(a)
        return out.to_fraction()

    # numerics -------------------------------------------------------------
    def to_complex(self) -> complex:
        w = cmath.exp(2j * cmath.pi / self.order)
        return sum(float(c) * w**j for j, c in enumerate(self.coeffs) if c) + 0j

    def to_mpc(self):
        w = mpmath.expjpi(mpmath.mpf(2) / self.order)
        return mpmath.fsum(
            mpmath.mpf(c.numerator) / c.denominator * w**j
            for j, c in enumerate(self.coeffs)
            if c
        ) + mpmath.mpc(0)

    # p-integrality --------------------------------------------------------
    def min_valuation_coeffs(self, p: int):
        """Smallest p-adic valuation of a power-basis coefficient (None for 0).

        The power basis is an integral basis of Z[zeta_m], so this decides
        membership in p^r Z_(p)[zeta_m] exactly.
        """
        vals = [_vp_fraction(c, p) for c in self.coeffs if c]
        return min(vals) if vals else None

    def congruent(self, other, p: int, r: int) -> bool:
        """self == other modulo p^r Z_(p)[zeta]."""
        v = (self - other).min_valuation_coeffs(p)
        return v is None or v >= r

    # serialisation --------------------------------------------------------
    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, d: dict) -> "CycloNumber":
        return cls(int(d["order"]), [Fraction(c) for c in d["coeffs"]])

    def __repr__(self):
        return f"CycloNumber({self.order}, {self})"

    def __str__(self):
        if self.is_rational():
            return str(self.coeffs[0])
        parts = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "1" if j == 0 else (f"z{self.order}" if j == 1 else f"z{self.order}^{j}")
            parts.append(f"{c}*{mono}" if j else f"{c}")
        return " + ".join(parts)


def _solve(mat: list[list[Fraction]], n: int) -> list[Fraction]:
    for col in range(n):
        piv = next(r for r in range(col, n) if mat[r][col])
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for r in range(n):
            if r != col and mat[r][col]:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    return [mat[r][n] for r in range(n)]


def _vp_fraction(x: Fraction, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def vp(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    return _vp_fraction(Fraction(x), p)


@lru_cache(maxsize=None)
def sqrt_prime(q: int) -> CycloNumber:
    """The positive square root of a prime q inside a cyclotomic field."""
    if q == 2:
        return CycloNumber.zeta(8) + CycloNumber.zeta(8, 7)
    g = CycloNumber.from_exponents(q, {a: _legendre(a, q) for a in range(1, q)})
    if q % 4 == 1:
        return g
    return g * CycloNumber.zeta(4, 3)  # g = i*sqrt(q)


def _legendre(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    return 1 if pow(a, (q - 1) // 2, q) == 1 else -1


def sqrt_rational(r) -> CycloNumber:
    """sqrt(r) for rational r; the positive root, or i*sqrt(|r|) when r < 0."""
    r = Fraction(r)
    if r == 0:
        return CycloNumber.rational(0)
    out = CycloNumber.rational(1)
    if r < 0:
        out = CycloNumber.zeta(4)
        r = -r
    square = Fraction(1)
    for part, sign in ((r.numerator, 1), (r.denominator, -1)):
        for q, e in sympy.factorint(part).items():
            square *= Fraction(q) ** (sign * (e // 2))
            if e % 2:
                out = out * (sqrt_prime(q) if sign > 0 else sqrt_prime(q).inverse())
    return out * square


def rational_power(base, exponent) -> CycloNumber:
    """base**exponent for rational base and exponent with denominator <= 2."""
    base, exponent = Fraction(base), Fraction(exponent)
    if exponent.denominator == 1:
        return CycloNumber.rational(base ** exponent.numerator)
    if exponent.denominator != 2:
        raise ValueError("only integral and half-integral exponents are exact here")
    return sqrt_rational(base) ** exponent.numerator
