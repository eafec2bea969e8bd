"""Dirichlet characters with exact cyclotomic values and degree-n Gauss sums."""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import sympy
from sympy.ntheory.modular import crt

from .cyclo import CycloNumber
from .errors import BudgetExceeded, ConductorNotDividing, NonPositiveDefinite
from .symlat import HalfIntSymMatrix, det

GAUSS_BUDGET_ENV = "SIEGELPADIC_GAUSS_BUDGET"
DEFAULT_GAUSS_BUDGET = 5 ** 4  # all of GL_2(Z/5Z) is enumerated


# unit groups ------------------------------------------------------------

@dataclass(frozen=True)
class _Component:
    prime: int
    exponent: int
    generator: int  # global generator mod M
    order: int
    log: dict  # residue mod prime^exponent -> discrete log


def _primitive_root_prime_power(p: int, e: int) -> int:
    g = int(sympy.primitive_root(p))
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _crt_lift(residue: int, modulus: int, total: int) -> int:
    """x = residue mod `modulus`, x = 1 mod total/modulus."""
    other = total // modulus
    if other == 1:
        return residue % total
    return int(crt([modulus, other], [residue % modulus, 1])[0]) % total


@lru_cache(maxsize=None)
def unit_group(modulus: int) -> tuple[_Component, ...]:
    """Fixed generators of (Z/MZ)^x, one cyclic factor per entry."""
    comps = []
    for p, e in sorted(sympy.factorint(modulus).items()):
        q = p ** e
        if p == 2:
            if e == 1:
                continue
            # -1 generates a factor of order 2
            log = {}
            if e == 2:
                log = {1: 0, 3: 1}
                comps.append(_Component(2, e, _crt_lift(-1, q, modulus), 2, log))
                continue
            five_order = 2 ** (e - 2)
            log_minus, log_five = {}, {}
            x = 1
            for t in range(five_order):
                log_minus[x] = 0
                log_minus[(-x) % q] = 1
                log_five[x] = t
                log_five[(-x) % q] = t
                x = x * 5 % q
            comps.append(_Component(2, e, _crt_lift(-1, q, modulus), 2, log_minus))
            comps.append(_Component(2, e, _crt_lift(5, q, modulus), five_order, log_five))
        else:
            g = _primitive_root_prime_power(p, e)
            order = q - q // p
            log, x = {}, 1
            for t in range(order):
                log[x] = t
                x = x * g % q
            comps.append(_Component(p, e, _crt_lift(g, q, modulus), order, log))
    return tuple(comps)


# characters ---------------------------------------------------------------

@dataclass(frozen=True)
class DirichletChar:
    """A Dirichlet character mod `modulus`, given by exponents on the fixed generators.

    The value at the j-th generator is exp(2 pi i * exponents[j] / order_j).
    """

    modulus: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        comps = unit_group(self.modulus)
        if len(self.exponents) != len(comps):
            raise ValueError(f"need {len(comps)} generator exponents mod {self.modulus}")
        object.__setattr__(
            self, "exponents", tuple(int(e) % c.order for e, c in zip(self.exponents, comps))
        )

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletChar":
        return cls(modulus, (0,) * len(unit_group(modulus)))

    @classmethod
    def from_angles(cls, modulus: int, angle) -> "DirichletChar":
        """Build from a function a -> value angle in Q/Z on units mod `modulus`."""
        exps = []
        for c in unit_group(modulus):
            e = Fraction(angle(c.generator)) * c.order
            if e.denominator != 1:
                raise ValueError("angle function is not a character of this modulus")
            exps.append(int(e))
        return cls(modulus, tuple(exps))

    def angle(self, a: int):
        """chi(a) = exp(2 pi i * angle); None when gcd(a, M) > 1."""
        if math.gcd(a, self.modulus) != 1:
            return None
        total = Fraction(0)
        for e, c in zip(self.exponents, unit_group(self.modulus)):
            if e:
                total += Fraction(e * c.log[a % (c.prime ** c.exponent)], c.order)
        return total - math.floor(total)

    @cached_property
    def order(self) -> int:
        comps = unit_group(self.modulus)
        return math.lcm(1, *(c.order // math.gcd(c.order, e) for e, c in zip(self.exponents, comps)))

    def __call__(self, a: int) -> CycloNumber:
        ang = self.angle(a)
        if ang is None:
            return CycloNumber.rational(0)
        return CycloNumber.zeta(ang.denominator, ang.numerator)

    def value_exponent(self, a: int):
        """(e, order) with chi(a) = zeta_order^e, or None when chi(a) = 0."""
        ang = self.angle(a)
        if ang is None:
            return None
        return int(ang * self.order), self.order

    @cached_property
    def conductor(self) -> int:
        for d in sympy.divisors(self.modulus):
            if self._trivial_mod(d):
                return d
        return self.modulus

    def _trivial_mod(self, d: int) -> bool:
        # chi is trivial on units congruent to 1 mod d
        for a in range(1, self.modulus, d):
            if math.gcd(a, self.modulus) == 1 and self.angle(a) != 0:
                return False
        return True

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def primitive(self) -> "DirichletChar":
        f = self.conductor
        return DirichletChar.from_angles(f, lambda h: self.angle(_unit_lift(h, f, self.modulus)))

    def induce(self, new_modulus: int) -> "DirichletChar":
        return induce(self, new_modulus)

    def conj(self) -> "DirichletChar":
        return DirichletChar(self.modulus, tuple(-e for e in self.exponents))

    def __mul__(self, other: "DirichletChar") -> "DirichletChar":
        m = math.lcm(self.modulus, other.modulus)
        a, b = self.primitive(), other.primitive()

        def ang(x):
            return (a.angle(x) or 0) + (b.angle(x) or 0)

        return DirichletChar.from_angles(m, ang)

    def parity(self) -> int:
        """chi(-1) as +1 or -1."""
        return 1 if self.angle(-1 % self.modulus) == 0 else -1

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "generator_exponents": list(self.exponents)}

    @classmethod
    def from_json(cls, d: dict) -> "DirichletChar":
        return cls(int(d["modulus"]), tuple(int(e) for e in d["generator_exponents"]))

    def tag(self) -> str:
        return f"chi[{self.modulus}:{','.join(map(str, self.exponents))}]"


def _unit_lift(h: int, f: int, modulus: int) -> int:
    """Some a = h mod f with gcd(a, modulus) = 1."""
    a = h % f if f > 1 else 1
    while math.gcd(a, modulus) != 1:
        a += f
    return a


def induce(chi: DirichletChar, new_modulus: int) -> DirichletChar:
    f = chi.conductor
    if new_modulus % f:
        raise ConductorNotDividing(f"conductor {f} does not divide {new_modulus}")
    prim = chi.primitive()
    return DirichletChar.from_angles(new_modulus, lambda a: prim.angle(a % f if f > 1 else 1))


def character_family(p: int, l_max: int) -> list[DirichletChar]:
    """All characters mod p^l_max (conductor dividing p^l_max), deterministic order."""
    m = p ** l_max
    comps = unit_group(m)
    return [DirichletChar(m, exps)
            for exps in itertools.product(*(range(c.order) for c in comps))]


# quadratic characters -------------------------------------------------------

def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 1."""
    out = 1
    for q, e in sympy.factorint(n).items():
        if q == 2:
            if d % 2 == 0:
                return 0
            s = 1 if d % 8 in (1, 7) else -1
        else:
            s = int(sympy.legendre_symbol(d % q, q)) if d % q else 0
        out *= s ** e
    return out


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt d); 1 when d is a square."""
    if d == 0:
        raise ValueError("d must be nonzero")
    sign = -1 if d < 0 else 1
    core = sign
    for q, e in sympy.factorint(abs(d)).items():
        if e % 2:
            core *= q
    if core == 1:
        return 1
    return core if core % 4 == 1 else 4 * core


def kronecker_character(disc: int) -> DirichletChar:
    """The character (disc/.) modulo |disc| for a fundamental discriminant."""
    m = abs(disc)
    if m == 1:
        return DirichletChar.trivial(1)
    return DirichletChar.from_angles(m, lambda a: Fraction(0) if kronecker(disc, a % m) == 1 else Fraction(1, 2))


def rho_tau(tau: HalfIntSymMatrix) -> DirichletChar:
    """Quadratic character of Q(sqrt d), d = (-1)^floor(n/2) |2 tau|."""
    if not tau.is_pd():
        raise NonPositiveDefinite(f"{tau} is not positive definite")
    d = tau.det_twice
    if (tau.n // 2) % 2:
        d = -d
    return kronecker_character(fundamental_discriminant(d))


# Gauss sums -------------------------------------------------------------------

def gauss_budget() -> int:
    return int(os.environ.get(GAUSS_BUDGET_ENV, DEFAULT_GAUSS_BUDGET))


def gauss_sum_n(x, phi: DirichletChar, n: int) -> CycloNumber:
    """sum over a in GL_n(Z/F) of phi(|a|) e(tr(X^T a)/F), F the conductor of phi.

    The character enters as phi(|a|), which is the normalisation under which
    G_n(X, phi) = phi(|X|)^{-1} G_n(phi) holds for primitive phi.
    """
    prim = phi.primitive()
    f = prim.conductor
    if f ** (n * n) > gauss_budget():
        raise BudgetExceeded(f"GL_{n}(Z/{f}) exceeds the Gauss-sum budget {gauss_budget()}")
    flat_x = [int(v) % f if f > 1 else 0 for row in x for v in row]
    big = math.lcm(f, prim.order)
    counts: dict[int, int] = {}
    for entries in itertools.product(range(f), repeat=n * n):
        a = tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n))
        d = det(a) % f if f > 1 else 1
        ang = prim.angle(d) if f > 1 else Fraction(0)
        if ang is None:
            continue
        tr = sum(u * v for u, v in zip(flat_x, entries))
        k = int(ang * big) + (tr % f) * (big // f)
        counts[k % big] = counts.get(k % big, 0) + 1
    return CycloNumber.from_exponents(big, counts)


def gauss_sum(phi: DirichletChar, n: int = 1) -> CycloNumber:
    """G_n(phi) = G_n(I_n, phi)."""
    eye = [[int(i == j) for j in range(n)] for i in range(n)]
    return gauss_sum_n(eye, phi, n)
