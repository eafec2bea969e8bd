"""Satake-side Hecke algebra: Laurent polynomials, the Hecke polynomial and p-stabilisation."""
from __future__ import annotations

import itertools
import json
import random
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property

from .chars import kronecker
from .cyclo import CycloNumber
from .errors import (
    FactorisationFailed,
    InsufficientTruncation,
    LoadError,
    NonOrdinaryWarning,
    NotPLocal,
    PDividesLevel,
    UnsupportedDegree,
    VanishingTruncationWarning,
    ZeroSatakeParam,
)
from .padic import valuation_cyclo
from .qexp import ExtCoeff, FourierExpansion, expansion_n1, twist_n1, u_p, v_shift
from .symlat import HalfIntSymMatrix


# Laurent polynomials --------------------------------------------------------

class WeylLaurentPoly:
    """Rational Laurent polynomial in x_1..x_n, with p either symbolic or fixed.

    Terms are keyed by (e_p, e_1, ..., e_n).  With a numeric prime the p
    exponent is always folded into the coefficient, so e_p = 0.
    """

    __hash__ = None

    def __init__(self, n: int, terms=None, p: int | None = None):
        self.n = n
        self.p = p
        clean: dict = {}
        for key, c in (terms or {}).items():
            key = tuple(int(e) for e in key)
            if len(key) != n + 1:
                raise ValueError("exponent vector has the wrong length")
            c = Fraction(c)
            if p is not None and key[0]:
                c *= Fraction(p) ** key[0]
                key = (0,) + key[1:]
            clean[key] = clean.get(key, Fraction(0)) + c
        self.terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def constant(cls, n, c, p=None):
        return cls(n, {(0,) * (n + 1): c}, p)

    @classmethod
    def monomial(cls, n, p_exp=0, x_exps=None, coeff=1, p=None):
        x_exps = tuple(x_exps) if x_exps is not None else (0,) * n
        return cls(n, {(p_exp,) + x_exps: coeff}, p)

    @classmethod
    def p_power(cls, n, e, p=None):
        return cls.monomial(n, e, p=p)

    def _check(self, other):
        if not isinstance(other, WeylLaurentPoly):
            other = WeylLaurentPoly.constant(self.n, Fraction(other), self.p)
        if other.n != self.n or other.p != self.p:
            raise ValueError("incompatible Laurent polynomials")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return WeylLaurentPoly(self.n, out, self.p)

    __radd__ = __add__

    def __neg__(self):
        return WeylLaurentPoly(self.n, {k: -v for k, v in self.terms.items()}, self.p)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, Fraction(0)) + v1 * v2
        return WeylLaurentPoly(self.n, out, self.p)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = WeylLaurentPoly.constant(self.n, 1, self.p)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, (WeylLaurentPoly, int, Fraction)):
            return NotImplemented
        return not (self - other).terms

    def is_zero(self) -> bool:
        return not self.terms

    def flip(self, signs) -> "WeylLaurentPoly":
        """Apply x_i -> x_i^{signs[i]}."""
        return WeylLaurentPoly(
            self.n,
            {(k[0],) + tuple(s * e for s, e in zip(signs, k[1:])): v for k, v in self.terms.items()},
            self.p,
        )

    def is_weyl_invariant(self) -> bool:
        return all(self.flip(s) == self for s in itertools.product((1, -1), repeat=self.n))

    def specialise(self, p: int) -> "WeylLaurentPoly":
        if self.p is not None and self.p != p:
            raise ValueError("already specialised at another prime")
        return WeylLaurentPoly(self.n, self.terms, p)

    def evaluate(self, xs, p: int | None = None) -> ExtCoeff:
        """Value at x_i = xs[i] (rational, cyclotomic or ExtCoeff)."""
        p = p or self.p
        if p is None:
            raise ValueError("a prime is needed to evaluate")
        xs = [ExtCoeff.coerce(x, p) for x in xs]
        total = ExtCoeff.zero(p)
        for k, c in self.terms.items():
            term = ExtCoeff(CycloNumber.rational(c * Fraction(p) ** k[0]), 0, p)
            for x, e in zip(xs, k[1:]):
                if e:
                    term = term * (x ** e)
            total = total + term
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            mono = []
            if k[0]:
                mono.append(f"p^{k[0]}")
            mono += [f"x{i + 1}^{e}" for i, e in enumerate(k[1:]) if e]
            parts.append(f"{self.terms[k]}" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts)


def _frobenius_monomial(n, p=None) -> WeylLaurentPoly:
    """u = p^{n(n+1)/2} x_1 ... x_n."""
    return WeylLaurentPoly.monomial(n, n * (n + 1) // 2, (1,) * n, p=p)


def hecke_polynomial(n: int, p: int | None = None) -> list[WeylLaurentPoly]:
    """[T_0, ..., T_{2^n}] with prod over signs of (1 - p^{n(n+1)/2} x^delta z) = sum (-1)^m T_m z^m."""
    if not 1 <= n <= 3:
        raise UnsupportedDegree(f"the Hecke polynomial is built for n <= 3, not {n}")
    top = n * (n + 1) // 2
    poly = [WeylLaurentPoly.constant(n, 1, p)]  # coefficients of z^0, z^1, ...
    for delta in itertools.product((1, -1), repeat=n):
        root = WeylLaurentPoly.monomial(n, top, delta, p=p)
        nxt = [WeylLaurentPoly(n, {}, p) for _ in range(len(poly) + 1)]
        for j, c in enumerate(poly):
            nxt[j] = nxt[j] + c
            nxt[j + 1] = nxt[j + 1] - c * root
        poly = nxt
    return [c if m % 2 == 0 else -c for m, c in enumerate(poly)]


def check_symmetry(t_list, n: int, p: int | None = None) -> bool:
    """T_m = p^{n(n+1)(m - 2^{n-1})} T_{2^n - m} for every m."""
    top = 2 ** n
    if len(t_list) != top + 1:
        return False
    for m in range(top + 1):
        shift = WeylLaurentPoly.p_power(n, n * (n + 1) * (m - top // 2), p)
        if t_list[m] != shift * t_list[top - m]:
            return False
    return True


def v_polys(t_list, n: int, p: int | None = None) -> list[WeylLaurentPoly]:
    """V_m = sum_{l <= m} (-1)^l T_l u^{m-l}, m < 2^n, after checking the factorisation."""
    top = 2 ** n
    u = _frobenius_monomial(n, p)
    powers = [WeylLaurentPoly.constant(n, 1, p)]
    for _ in range(top):
        powers.append(powers[-1] * u)
    signed = [t if m % 2 == 0 else -t for m, t in enumerate(t_list)]
    lemma = sum((signed[m] * powers[top - m] for m in range(top + 1)), WeylLaurentPoly(n, {}, p))
    if not lemma.is_zero():
        raise FactorisationFailed(f"sum (-1)^m T_m u^(2^n - m) = {lemma}, expected 0")
    vs = []
    for m in range(top):
        vs.append(sum((signed[l] * powers[m - l] for l in range(m + 1)), WeylLaurentPoly(n, {}, p)))
    # (sum V_m z^m)(1 - u z) against sum (-1)^m T_m z^m
    product = [WeylLaurentPoly(n, {}, p) for _ in range(top + 1)]
    for m, v in enumerate(vs):
        product[m] = product[m] + v
        product[m + 1] = product[m + 1] - v * u
    for m in range(top + 1):
        if product[m] != signed[m]:
            raise FactorisationFailed(f"factorisation fails at z^{m}")
    return vs


# the monomial map on cosets -------------------------------------------------

def _vp(x: Fraction, p: int) -> int:
    from .cyclo import vp

    return vp(x, p)


def satake_omega0(d, p: int, symbolic: bool = False) -> WeylLaurentPoly:
    """prod (p^{-i} x_i)^{a_i} for the upper-triangular representative of GL_n(Z_p) d."""
    try:
        rows = [[Fraction(x) for x in r] for r in d]
    except (TypeError, ValueError) as exc:
        raise NotPLocal(f"entries must be rational: {exc}") from exc
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise NotPLocal("matrix must be square")
    exps = []
    for col in range(n):
        live = [r for r in range(col, n) if rows[r][col]]
        if not live:
            raise NotPLocal("matrix is singular")
        piv = min(live, key=lambda r: _vp(rows[r][col], p))
        rows[col], rows[piv] = rows[piv], rows[col]
        a = _vp(rows[col][col], p)
        unit = rows[col][col] / Fraction(p) ** a
        rows[col] = [x / unit for x in rows[col]]
        for r in range(col + 1, n):
            if rows[r][col]:
                f = rows[r][col] / rows[col][col]  # p-integral by choice of pivot
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
        exps.append(a)
    p_exp = -sum((i + 1) * a for i, a in enumerate(exps))
    return WeylLaurentPoly.monomial(n, p_exp, exps, p=None if symbolic else p)


# Satake parameters -------------------------------------------------------------

def _valuation(x: ExtCoeff, p: int) -> Fraction:
    v = valuation_cyclo(x.cyclo, p)
    if v is None:
        raise ZeroSatakeParam("zero has no valuation")
    return Fraction(v) + Fraction(x.sqrtp_exp, 2)


@dataclass(frozen=True)
class SatakeParams:
    p: int
    lambdas: tuple

    __hash__ = None

    def __post_init__(self):
        lams = tuple(ExtCoeff.coerce(x, self.p) for x in self.lambdas)
        if any(x.is_zero() for x in lams):
            raise ZeroSatakeParam("Satake parameters must be nonzero")
        object.__setattr__(self, "lambdas", lams)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    @cached_property
    def lambda0(self) -> ExtCoeff:
        out = ExtCoeff(CycloNumber.rational(1), self.n * (self.n + 1), self.p)
        for x in self.lambdas:
            out = out * x
        return out

    @property
    def is_ordinary(self) -> bool:
        return _valuation(self.lambda0, self.p) == 0

    def hecke_eigenvalues(self) -> dict[int, ExtCoeff]:
        """Lambda(T_m) obtained by evaluating T_m at the parameters."""
        return {m: t.evaluate(self.lambdas, self.p)
                for m, t in enumerate(hecke_polynomial(self.n, self.p))}

    def to_json(self) -> dict:
        return {"p": self.p, "lambdas": [x.to_json() for x in self.lambdas]}


# p-stabilisation ------------------------------------------------------------------

def _stabilisation_weights(lam_t: dict, lambda0: ExtCoeff, top: int) -> list[ExtCoeff]:
    inv = lambda0.inverse()
    weights = []
    for v in range(top):
        acc = ExtCoeff.zero(lambda0.p)
        for u in range(v, top):
            term = ExtCoeff.coerce(lam_t.get(u - v, 0), lambda0.p) * inv ** u
            acc = acc + (term if (u - v) % 2 == 0 else -term)
        weights.append(acc)
    return weights


def p_stabilise(f: FourierExpansion, lam_t: dict, sp: SatakeParams, trace_bound=None) -> FourierExpansion:
    """Coefficients of sum_m lambda_0^{-m} f|V_m, read off from the coefficients of f.

    c_{f0}(tau) = sum_v w_v p^{n(n+1-k) v} c_f(p^{2v} tau), with w_v built from
    the eigenvalues Lambda(T_m) and lambda_0.
    """
    n, p = f.n, sp.p
    if sp.n != n:
        raise ValueError("Satake parameters have the wrong length")
    if f.c % p == 0:
        raise PDividesLevel(f"{p} divides the level {f.c}")
    if ExtCoeff.coerce(lam_t.get(0, 1), p) != 1:
        raise ValueError("Lambda(T_0) must be 1")
    top = 2 ** n
    shift = p ** (2 * (top - 1))
    limit = f.trace_bound / shift
    trace_bound = limit if trace_bound is None else Fraction(trace_bound)
    if trace_bound > limit:
        raise InsufficientTruncation(f"need input bound {shift * trace_bound}, have {f.trace_bound}")
    if not sp.is_ordinary:
        warnings.warn(NonOrdinaryWarning(f"lambda_0 is not a {p}-adic unit"), stacklevel=2)
    weights = _stabilisation_weights(lam_t, sp.lambda0, top)
    step = 2 * n * (n + 1) - n * f.weight2  # sqrt(p) exponent of p^{n(n+1-k)}
    # tau receives terms from every p^{2v} tau in the support of f
    candidates = set()
    for tau in f.coeffs:
        for v in range(top):
            d = p ** (2 * v)
            if all(x % d == 0 for r in tau.twice for x in r):
                small = tau.scaled(Fraction(1, d))
                if small.trace() <= trace_bound:
                    candidates.add(small)
    unit = ExtCoeff(CycloNumber.rational(1), step, p)
    out = {}
    for tau in candidates:
        acc = ExtCoeff.zero(p)
        for v, w in enumerate(weights):
            c = f.coeffs.get(tau.scaled(p ** (2 * v)))
            if c is not None:
                acc = acc + w * c * unit ** v
        out[tau] = acc
    result = replace(f, coeffs=out, trace_bound=trace_bound, c=f.c * shift, p=p)
    if not result.coeffs:
        warnings.warn(VanishingTruncationWarning("all computed coefficients of f_0 vanish"), stacklevel=2)
    return result


def _floor_weight(weight2: int) -> int:
    return weight2 // 2


def pstab_n1_explicit(f: FourierExpansion, lam, p: int, trace_bound=None) -> FourierExpansion:
    """f - eps p^{-1/2} lam^{-1} (f twisted by (./p)) - p^{k-1} lam^{-1} f(p^2 z), eps = (-1/p)^[k]."""
    if f.n != 1:
        raise UnsupportedDegree("the three-term form is specific to n = 1")
    lam = ExtCoeff.coerce(lam, p)
    eps = kronecker(-1, p) ** _floor_weight(f.weight2) if p != 2 else 1
    bound = f.trace_bound if trace_bound is None else Fraction(trace_bound)
    base = f.truncate(bound)
    legendre = _legendre_character(p)
    twisted = twist_n1(base, legendre).scale(lam.inverse() * ExtCoeff(CycloNumber.rational(eps), -1, p))
    # p^{k-1} f(p^2 z) = p^{-1} f|V(p), since V(p) carries p^k
    shifted = v_shift(base, p, p).scale(lam.inverse() * ExtCoeff(CycloNumber.rational(1), -2, p))
    shifted = replace(shifted, trace_bound=bound,
                      coeffs={t: c for t, c in shifted.coeffs.items() if t.trace() <= bound})
    out = replace(base, p=p) - twisted - replace(shifted, c=base.c)
    return replace(out, c=f.c * p * p)


def _legendre_character(p: int):
    from .chars import DirichletChar

    return DirichletChar.from_angles(p, lambda a: Fraction(0) if kronecker(a, p) == 1 else Fraction(1, 2))


# synthetic degree-one eigen-data ------------------------------------------------------

def n1_eigen_data(p: int, lam, weight2: int, trace_bound: int, seed: int = 0, seeds: dict | None = None):
    """Coefficients obeying the degree-one Hecke recursion at p.

    c(p^2 m) = p^{k-2} [Lambda(T_1) c(m) - eps p^{1/2} (m/p) c(m) - p^k c(m/p^2)]
    with Lambda(T_1) = p(lam + 1/lam).  Coefficients at m with p^2 not dividing m
    are free; they come from `seeds` or a seeded RNG.  Returns (f, Lambda, params).
    """
    if weight2 % 2 == 0:
        raise ValueError("the recursion is for half-integral weight")
    lam = ExtCoeff.coerce(lam, p)
    sp = SatakeParams(p, (lam,))
    lam_t = sp.hecke_eigenvalues()
    eps = kronecker(-1, p) ** _floor_weight(weight2)
    rng = random.Random(seed)
    coeffs: dict[int, ExtCoeff] = {}
    for m in range(1, int(trace_bound) + 1):
        if m % (p * p):
            v = seeds.get(m, 0) if seeds is not None else rng.randint(-5, 5)
            coeffs[m] = ExtCoeff.coerce(v, p)
            continue
        prev = coeffs[m // (p * p)]
        acc = lam_t[1] * prev - ExtCoeff(CycloNumber.rational(eps * kronecker(m // (p * p), p)), 1, p) * prev
        if (m // (p * p)) % (p * p) == 0:
            acc = acc - ExtCoeff(CycloNumber.rational(1), weight2, p) * coeffs[m // p ** 4]
        coeffs[m] = acc * ExtCoeff(CycloNumber.rational(1), weight2 - 4, p)
    f = expansion_n1(coeffs, weight2, trace_bound, c=4, p=p)
    return f, lam_t, sp


# L-functions -------------------------------------------------------------------

def euler_factor(sp: SatakeParams, divides_level: bool) -> list[ExtCoeff]:
    """Coefficients of L_p(t), lowest degree first."""
    p = sp.p
    pn = ExtCoeff(CycloNumber.rational(1), 2 * sp.n, p)
    poly = [ExtCoeff.coerce(1, p)]
    roots = [pn * x for x in sp.lambdas]
    if not divides_level:
        roots += [pn * x.inverse() for x in sp.lambdas]
    for r in roots:
        nxt = [ExtCoeff.zero(p) for _ in range(len(poly) + 1)]
        for j, c in enumerate(poly):
            nxt[j] = nxt[j] + c
            nxt[j + 1] = nxt[j + 1] - c * r
        poly = nxt
    return poly


def standard_L_truncated(params: dict, char_value, s, prime_bound: int, level: int = 1) -> CycloNumber:
    """prod over primes q <= bound of L_q(chi(q) q^{-s})^{-1}, exactly.

    `params` maps q to SatakeParams; `char_value(q)` gives the twisting character at q.
    """
    import sympy

    from .cyclo import rational_power

    total = CycloNumber.rational(1)
    for q in sympy.primerange(2, prime_bound + 1):
        if q not in params:
            continue
        chi_q = CycloNumber.coerce(char_value(q))
        if chi_q.is_zero():
            continue
        t = chi_q * rational_power(q, -Fraction(s))
        poly = euler_factor(params[q], level % q == 0)
        value = sum((c.to_cyclo() * t ** j for j, c in enumerate(poly)), CycloNumber.rational(0))
        if value.is_zero():
            raise ZeroDivisionError(f"Euler factor vanishes at {q}")
        total = total * value.inverse()
    return total


# eigen-data files ------------------------------------------------------------------

def parse_value(v, p: int | None = None) -> ExtCoeff:
    """A rational (string or number), a cyclo dict, or {cyclo, sqrtp_exp}."""
    if isinstance(v, dict):
        if "cyclo" in v:
            return ExtCoeff(CycloNumber.from_json(v["cyclo"]), int(v.get("sqrtp_exp", 0)), p)
        return ExtCoeff(CycloNumber.from_json(v), 0, p)
    if isinstance(v, float):
        raise LoadError("floating-point values are not exact; use a fraction string")
    return ExtCoeff(CycloNumber.rational(Fraction(v)), 0, p)


def load_eigen_data(path) -> tuple[SatakeParams, dict]:
    try:
        with open(path) as fh:
            d = json.load(fh)
        p = int(d["p"])
        sp = SatakeParams(p, tuple(parse_value(v, p) for v in d["lambdas"]))
        lam_t = {int(m): parse_value(v, p) for m, v in d.get("T_values", {}).items()}
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read eigen-data {path}: {exc}") from exc
    if not lam_t:
        lam_t = sp.hecke_eigenvalues()
    lam_t.setdefault(0, ExtCoeff.coerce(1, p))
    return sp, lam_t


def eigen_data_json(sp: SatakeParams, lam_t: dict) -> dict:
    return {"p": sp.p, "lambdas": [x.to_json() for x in sp.lambdas],
            "T_values": {str(m): v.to_json() for m, v in sorted(lam_t.items())}}
