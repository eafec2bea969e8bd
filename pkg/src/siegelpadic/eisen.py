"""Holomorphic-projection coefficients of theta times Eisenstein products, and their congruences."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import sympy

from .chars import DirichletChar
from .cyclo import CycloNumber, rational_power, sqrt_prime
from .errors import (
    BudgetExceeded,
    ConstantTermPresent,
    ExcludedSpecialValue,
    LoadError,
    MissingPlugin,
    NotSpecialValue,
    ProjectionContractViolation,
    UnsupportedDegree,
)
from .symlat import HalfIntSymMatrix, det, enumerate_V

MAX_BETA = 4


# differential-operator polynomial ---------------------------------------------

S_PRIME = sympy.Symbol("s_prime")


@dataclass(frozen=True)
class SymPolyG:
    """Polynomial in the entries g_ij (i <= j) and s'."""

    n: int
    expr: sympy.Expr
    gens: tuple

    def evaluate(self, g, s_prime) -> Fraction:
        if self.n == 1:
            values = [Fraction(g[0][0] if isinstance(g, (tuple, list)) else g)]
        else:
            values = [Fraction(g[0][0]), Fraction(g[0][1]), Fraction(g[1][1])]
        subs = {sym: sympy.Rational(v.numerator, v.denominator) for sym, v in zip(self.gens, values)}
        s = Fraction(s_prime)
        subs[S_PRIME] = sympy.Rational(s.numerator, s.denominator)
        val = sympy.Rational(self.expr.subs(subs))
        return Fraction(int(val.p), int(val.q))

    def degree_in_g(self) -> int:
        return sympy.Poly(self.expr, *self.gens).total_degree()


def _g_symbols(n: int):
    if n == 1:
        return (sympy.Symbol("g"),)
    return sympy.symbols("g11 g12 g22")


def _derive(state, var, delta, on_diag: bool):
    """d/d(var) of exp(-tr g) delta^(-s'-e) N, returned as (N', e + 1)."""
    num, e = state
    new = (-(delta * num) if on_diag else 0) + (-S_PRIME - e) * sympy.diff(delta, var) * num \
        + delta * sympy.diff(num, var)
    return sympy.expand(new), e + 1


def r_poly(n: int, beta: int) -> SymPolyG:
    """(-1)^{beta n} e^{tr g} |g|^{beta+s'} det(d/dg)^beta (e^{-tr g} |g|^{-s'}).

    The symmetric derivative has entries (1 + delta_ij)/2 d/dg_ij.
    """
    if n not in (1, 2):
        raise UnsupportedDegree("the operator polynomial is built for n <= 2")
    if not 0 <= beta <= MAX_BETA:
        raise BudgetExceeded(f"beta = {beta} exceeds the differentiation budget {MAX_BETA}")
    gens = _g_symbols(n)
    if n == 1:
        (g,) = gens
        delta = g
        state = (sympy.Integer(1), 0)
        for _ in range(beta):
            state = _derive(state, g, delta, True)
    else:
        g11, g12, g22 = gens
        delta = g11 * g22 - g12 ** 2
        state = (sympy.Integer(1), 0)
        for _ in range(beta):
            a = _derive(_derive(state, g22, delta, True), g11, delta, True)
            b = _derive(_derive(state, g12, delta, False), g12, delta, False)
            state = (sympy.expand(a[0] - b[0] / 4), a[1])
    num, e = state
    assert e == n * beta
    quo, rem = sympy.div(sympy.Poly(num, *gens), sympy.Poly(delta ** ((n - 1) * beta), *gens))
    if not rem.is_zero:
        raise ArithmeticError("operator output is not divisible by the determinant power")
    expr = sympy.expand((-1) ** (beta * n) * quo.as_expr())
    return SymPolyG(n, expr, gens)


# projection polynomial ------------------------------------------------------------

def _rising(x: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for t in range(j):
        out *= x + t
    return out


def projection_coefficients_n1(beta: int, s_prime, weight) -> list[Fraction]:
    """a_j with P(sigma, sigma'; beta) = sum_j a_j sigma^j sigma'^(beta - j).

    a_j = C(beta, j) (s')_{beta-j} Gamma(K - 1 + j - beta) / Gamma(K - 1), K the weight
    of the projected form: the projection integral of |4 pi sigma2 y|^{-beta}
    R(4 pi sigma2 y; beta, s') against y^{K-2} e^{-4 pi sigma y}, rescaled by sigma2^beta.
    """
    s_prime, weight = Fraction(s_prime), Fraction(weight)
    coeffs = []
    for j in range(beta + 1):
        gamma_ratio = Fraction(1)
        for i in range(1, beta - j + 1):
            gamma_ratio /= weight - 1 - i
        coeffs.append(math.comb(beta, j) * _rising(s_prime, beta - j) * gamma_ratio)
    return coeffs


def _p_n1(sigma: Fraction, sigma_prime: Fraction, beta: int, s_prime, weight) -> Fraction:
    a = projection_coefficients_n1(beta, s_prime, weight)
    return sum((c * sigma ** j * sigma_prime ** (beta - j) for j, c in enumerate(a)), Fraction(0))


_PLUGINS: dict[int, Callable] = {}


def register_projection_plugin(n: int, fn: Callable) -> None:
    """fn(sigma, sigma_prime, beta, s_prime, weight) -> Fraction, for degree n."""
    _PLUGINS[n] = fn


def unregister_projection_plugin(n: int) -> None:
    _PLUGINS.pop(n, None)


def _as_sym(x, n) -> HalfIntSymMatrix:
    if isinstance(x, HalfIntSymMatrix):
        return x
    if n == 1:
        return HalfIntSymMatrix(((int(2 * Fraction(x)),),))
    raise TypeError("expected a half-integral symmetric matrix")


def projection_P(n: int, sigma, sigma_prime, beta: int, *, s_prime, weight) -> Fraction:
    """P(sigma, sigma'; beta); the value at sigma' = 0 must be |sigma|^beta."""
    sigma, sigma_prime = _as_sym(sigma, n), _as_sym(sigma_prime, n)
    if n == 1:
        fn = lambda s, sp, b, s_, w: _p_n1(s.tau[0][0], sp.tau[0][0], b, s_, w)  # noqa: E731
    elif n in _PLUGINS:
        fn = _PLUGINS[n]
    else:
        raise MissingPlugin(f"no projection polynomial registered for n = {n}")
    at_zero = Fraction(fn(sigma, HalfIntSymMatrix.zero(n), beta, s_prime, weight))
    if at_zero != sigma.det() ** beta:
        raise ProjectionContractViolation(f"P(sigma, 0; {beta}) = {at_zero}, expected {sigma.det() ** beta}")
    return Fraction(fn(sigma, sigma_prime, beta, s_prime, weight))


def projection_poly_n1(beta: int, s_prime, weight):
    """P as a sympy polynomial in (sigma, sigma')."""
    s, sp = sympy.symbols("sigma sigma_prime")
    a = projection_coefficients_n1(beta, s_prime, weight)
    expr = sum(sympy.Rational(c.numerator, c.denominator) * s ** j * sp ** (beta - j) for j, c in enumerate(a))
    return sympy.expand(expr), (s, sp)


# special values ----------------------------------------------------------------

@dataclass(frozen=True)
class EisenParams:
    """Weight k = weight2/2, degree n, mu in {0, 1} and the norm N(b^2 y_r)."""

    n: int
    weight2: int
    mu: int
    level_norm: Fraction = Fraction(1)

    @property
    def k(self) -> Fraction:
        return Fraction(self.weight2, 2)

    @property
    def delta(self) -> int:
        return self.n % 2


def omega_sets(n: int, weight2: int, mu: int) -> tuple[list[Fraction], list[Fraction]]:
    """(minus set, plus set) of special values m in (1/2)Z."""
    k = Fraction(weight2, 2)
    lo, hi = 2 * n + 1 - k + mu, k - mu
    plus, minus = [], []
    m = Fraction(math.floor(2 * min(lo, n)), 2)
    while m <= hi:
        if n < m <= hi and ((k - m - mu) / 2).denominator == 1:
            plus.append(m)
        if lo <= m <= n and ((m + k - mu - 1) / 2).denominator == 1:
            minus.append(m)
        m += Fraction(1, 2)
    return minus, plus


def branch_of(m, params: EisenParams) -> str:
    minus, plus = omega_sets(params.n, params.weight2, params.mu)
    m = Fraction(m)
    if m in plus:
        return "+"
    if m in minus:
        return "-"
    raise NotSpecialValue(f"m = {m} is not a special value for n = {params.n}, k = {params.k}, mu = {params.mu}")


def beta_for(m, sign: str, params: EisenParams) -> int:
    k, m, mu, n = params.k, Fraction(m), params.mu, params.n
    b = (k - m - mu) / 2 if sign == "+" else (k + m - mu - 1 - 2 * n) / 2
    assert b.denominator == 1
    return int(b)


def s_prime_for(m, sign: str, params: EisenParams) -> Fraction:
    k, m, mu, n = params.k, Fraction(m), params.mu, params.n
    return (2 * n + 1 - k + mu - m) / 2 if sign == "+" else (m - k + mu) / 2


# symbolic constants ------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolicConstant:
    """coeff * i^i_exp * 2^two_exp * p^p_exp * pi^pi_exp * prod Gamma_n(a)^e."""

    coeff: CycloNumber
    i_exp: int = 0
    two_exp: Fraction = Fraction(0)
    pi_exp: Fraction = Fraction(0)
    gamma: tuple = ()  # sorted ((n, argument), exponent) pairs
    p_exp: Fraction = Fraction(0)
    p: int | None = None

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "coeff", CycloNumber.coerce(self.coeff))
        object.__setattr__(self, "i_exp", self.i_exp % 4)
        object.__setattr__(self, "two_exp", Fraction(self.two_exp))
        object.__setattr__(self, "pi_exp", Fraction(self.pi_exp))
        object.__setattr__(self, "p_exp", Fraction(self.p_exp))
        object.__setattr__(self, "gamma", tuple(sorted((k, e) for k, e in dict(self.gamma).items() if e)))

    @classmethod
    def one(cls) -> "SymbolicConstant":
        return cls(CycloNumber.rational(1))

    def signature(self):
        return self.pi_exp, self.gamma

    def __mul__(self, other):
        if not isinstance(other, SymbolicConstant):
            return SymbolicConstant(self.coeff * CycloNumber.coerce(other), self.i_exp, self.two_exp,
                                    self.pi_exp, self.gamma, self.p_exp, self.p)
        if self.p and other.p and self.p != other.p:
            raise ValueError("constants over different primes")
        gam = dict(self.gamma)
        for k, e in other.gamma:
            gam[k] = gam.get(k, 0) + e
        return SymbolicConstant(self.coeff * other.coeff, self.i_exp + other.i_exp,
                                self.two_exp + other.two_exp, self.pi_exp + other.pi_exp,
                                tuple(gam.items()), self.p_exp + other.p_exp, self.p or other.p)

    __rmul__ = __mul__

    def inverse(self) -> "SymbolicConstant":
        return SymbolicConstant(self.coeff.inverse(), -self.i_exp, -self.two_exp, -self.pi_exp,
                                tuple((k, -e) for k, e in self.gamma), -self.p_exp, self.p)

    def algebraic_part(self) -> CycloNumber:
        """Everything except the pi and Gamma tokens, as one cyclotomic number."""
        out = self.coeff * CycloNumber.zeta(4, self.i_exp) * rational_power(2, self.two_exp)
        if self.p_exp:
            out = out * rational_power(self.p, self.p_exp)
        return out

    def __add__(self, other: "SymbolicConstant") -> "SymbolicConstant":
        if self.signature() != other.signature():
            raise ValueError("cannot add constants with different transcendental parts")
        return SymbolicConstant(self.algebraic_part() + other.algebraic_part(),
                                pi_exp=self.pi_exp, gamma=self.gamma, p=self.p or other.p)

    def is_zero(self) -> bool:
        return self.coeff.is_zero()

    def to_json(self) -> dict:
        return {
            "algebraic": self.algebraic_part().to_json(),
            "pi_exp": str(self.pi_exp),
            "gamma": [{"n": k[0], "arg": str(k[1]), "exp": e} for k, e in self.gamma],
        }


# local polynomials ---------------------------------------------------------------

def _poly_value(coeffs, x: CycloNumber) -> CycloNumber:
    out = CycloNumber.rational(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def local_product(local_polys: dict, char_bar: Callable, exponent: Fraction) -> CycloNumber:
    """prod over q of f_q(char_bar(q) q^exponent)."""
    out = CycloNumber.rational(1)
    for q in sorted(local_polys):
        arg = CycloNumber.coerce(char_bar(q)) * rational_power(q, exponent)
        out = out * _poly_value(local_polys[q], arg)
    return out


def validate_local_polys(polys: dict, kind: str) -> dict:
    """kind 'f': no constant term; kind 'g': constant term 1."""
    clean = {}
    for q, coeffs in polys.items():
        q = int(q)
        if not sympy.isprime(q):
            raise LoadError(f"{q} is not prime")
        coeffs = [int(c) for c in coeffs]
        if any(Fraction(c) != c for c in coeffs):
            raise LoadError("local polynomial coefficients must be integers")
        if kind == "f" and coeffs and coeffs[0] != 0:
            raise ConstantTermPresent(f"f_q for q = {q} has constant term {coeffs[0]}")
        if kind == "g" and (not coeffs or coeffs[0] != 1):
            raise LoadError(f"g_q for q = {q} must have constant term 1")
        clean[q] = coeffs
    return clean


def load_local_polys(path, kind: str = "f") -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise LoadError("local polynomial file must map primes to coefficient lists")
    return validate_local_polys(raw, kind)


def _resolve_polys(local_polys, sigma) -> dict:
    return local_polys(sigma) if callable(local_polys) else (local_polys or {})


# the constant C* ------------------------------------------------------------------

def local_exponent(m, n: int) -> Fraction:
    """(n + delta - 1)/2 - m, the power of q inside the local factors."""
    return Fraction(n + n % 2 - 1, 2) - Fraction(m)


def c_star(sigma: HalfIntSymMatrix, m, sign: str, params: EisenParams, local_polys=None,
           eta_bar: Callable | None = None) -> SymbolicConstant:
    """C*_+- (sigma, m), with pi and Gamma_n kept as tokens."""
    m = Fraction(m)
    if branch_of(m, params) != sign:
        raise NotSpecialValue(f"m = {m} is not in the {sign} set")
    n, k, mu = params.n, params.k, params.mu
    i_exp = -n * math.floor(k - Fraction(n, 2) - mu)
    coeff = rational_power(params.level_norm, n * ((3 * n - 2 * m) / 2 - k + mu))
    m_sign = m - n - Fraction(1, 2) if sign == "+" else Fraction(0)
    coeff = coeff * rational_power(sigma.det(), m_sign)
    eta_bar = eta_bar or (lambda q: 1)
    coeff = coeff * local_product(_resolve_polys(local_polys, sigma), eta_bar, local_exponent(m, n))
    gamma_arg = (m + k - n - mu) / 2
    return SymbolicConstant(coeff, i_exp, n * (k - mu + Fraction(3, 2)), n * gamma_arg,
                            (((n, gamma_arg), -1),))


def _check_excluded(m, params: EisenParams, psi_chi_square_trivial: bool):
    m = Fraction(m)
    if m == params.n + Fraction(1, 2):
        raise ExcludedSpecialValue("m = n + 1/2 is excluded")
    if params.n > 1 and psi_chi_square_trivial and m == params.n + Fraction(3, 2):
        raise ExcludedSpecialValue("m = n + 3/2 is excluded for quadratic psi* chi")


def _char_at_det(chi: DirichletChar, s1) -> CycloNumber:
    d = det(s1)
    if d == 0:
        return CycloNumber.rational(1 if chi.conductor == 1 else 0)
    return chi(d)


@dataclass(frozen=True)
class ThetaScaleData:
    """tau_hat and scale = N(sqrt(t) b c)^2 / 2 for the V-enumeration."""

    tau_hat: tuple
    scale: Fraction

    @property
    def a_det(self) -> Fraction:
        """|-scale * tau_hat|."""
        n = len(self.tau_hat)
        return det(tuple(tuple(-self.scale * Fraction(x) for x in r) for r in self.tau_hat))

    @classmethod
    def from_tau(cls, tau: HalfIntSymMatrix, b=1, c=1) -> "ThetaScaleData":
        from .symlat import theta_ideal

        t, tau_hat = theta_ideal(tau)
        b = Fraction(b)
        return cls(tau_hat, t * b * b * c * c / 2)


def v_pairs(sigma: HalfIntSymMatrix, p: int, r: int, data: ThetaScaleData, positive_only: bool = True):
    """V_{p^r sigma}, restricted to sigma2 > 0 by default (the Eisenstein terms live there)."""
    big = sigma.scaled(p ** r)
    form = tuple(tuple(data.scale * Fraction(x) for x in row) for row in data.tau_hat)
    from .symlat import completeness_bound

    pairs = enumerate_V(big, data.tau_hat, data.scale, completeness_bound(big.trace(), form))
    if positive_only:
        pairs = [(s1, s2) for s1, s2 in pairs if s2.is_pd()]
    return sorted(pairs, key=lambda pr: (pr[1].twice, pr[0]))


def eisen_proj_coeff(sigma: HalfIntSymMatrix, m, sign: str, chi: DirichletChar, r: int, p: int,
                     data: ThetaScaleData, params: EisenParams, local_polys=None,
                     eta_bar: Callable | None = None, psi_chi_square_trivial: bool = False,
                     algebraic_only: bool = False):
    """Coefficient at sigma of the projection of (theta * Eisenstein) | U_p^r."""
    if not sigma.is_pd():
        raise ValueError("coefficients are only nonzero at positive definite sigma")
    _check_excluded(m, params, psi_chi_square_trivial)
    beta = beta_for(m, sign, params)
    s_prime = s_prime_for(m, sign, params)
    total = None
    big = sigma.scaled(p ** r)
    for s1, s2 in v_pairs(sigma, p, r, data):
        weight = _char_at_det(chi, s1) * Fraction(det(s1)) ** params.mu
        if weight.is_zero():
            continue
        pval = projection_P(params.n, s2, big, beta, s_prime=s_prime, weight=params.k)
        term = c_star(s2, m, sign, params, local_polys, eta_bar) * (weight * pval)
        total = term if total is None else total + term
    if total is None:
        total = c_star(sigma, m, sign, params) * 0
    return total.algebraic_part() if algebraic_only else total


# normalised coefficients and the section-8 congruences -------------------------------

def normalised_constant(sigma2: HalfIntSymMatrix, m, sign: str, params: EisenParams, data: ThetaScaleData,
                        local_polys=None, eta_bar=None) -> CycloNumber:
    """The algebraic factor multiplying P in the normalised coefficients.

    |A|^{-e} |sigma2|^{m-n-1/2} prod f_q(...), A = -scale tau_hat, with
    e = (k+m-mu-1-2n)/2 on the + side and e + (m-n-1/2) on the - side.
    """
    n, k, mu, m = params.n, params.k, params.mu, Fraction(m)
    e = (k + m - mu - 1 - 2 * n) / 2
    if sign == "-":
        e += m - n - Fraction(1, 2)
    out = rational_power(data.a_det, -e) * rational_power(sigma2.det(), m - n - Fraction(1, 2))
    eta_bar = eta_bar or (lambda q: 1)
    return out * local_product(_resolve_polys(local_polys, sigma2), eta_bar, local_exponent(m, n))


def normalised_coeff(sigma, m, sign, chi, r, p, data, params, local_polys=None, eta_bar=None) -> CycloNumber:
    beta = beta_for(m, sign, params)
    s_prime = s_prime_for(m, sign, params)
    big = sigma.scaled(p ** r)
    total = CycloNumber.rational(0)
    for s1, s2 in v_pairs(sigma, p, r, data):
        weight = _char_at_det(chi, s1) * Fraction(det(s1)) ** params.mu
        if weight.is_zero():
            continue
        pval = projection_P(params.n, s2, big, beta, s_prime=s_prime, weight=params.k)
        total = total + weight * pval * normalised_constant(s2, m, sign, params, data, local_polys, eta_bar)
    return total


def sigma1_exponent(m, sign: str, params: EisenParams) -> int:
    """Power of |sigma1| left after applying the two determinant congruences."""
    n, k, m = params.n, params.k, Fraction(m)
    e = k + m - 1 - 2 * n if sign == "+" else k + 3 * m - 2 - 4 * n
    assert e.denominator == 1
    return int(e)


@dataclass
class CongruenceReport:
    p: int
    r: int
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"p": self.p, "r": self.r, "checked": self.checked, "ok": self.ok,
                "violations": self.violations}


def _vp_rational(x: Fraction, p: int):
    from .cyclo import vp

    return None if x == 0 else vp(x, p)


def congruence_check(pairs, sigma: HalfIntSymMatrix, p: int, r: int, data: ThetaScaleData, beta: int,
                     s_prime, weight) -> CongruenceReport:
    """The two determinant congruences mod p^r on each V-pair with p not dividing |sigma1|.

    |sigma2| = |A| |sigma1|^2 and P(sigma2, p^r sigma; beta) = |sigma2|^beta.
    """
    report = CongruenceReport(p, r)
    big = sigma.scaled(p ** r)
    n = sigma.n
    for s1, s2 in pairs:
        d1 = Fraction(det(s1))
        if d1 == 0 or _vp_rational(d1, p) > 0:
            continue
        report.checked += 1
        diff1 = s2.det() - data.a_det * d1 * d1
        v1 = _vp_rational(diff1, p)
        if v1 is not None and v1 < r:
            report.violations.append({"kind": "det", "sigma1": [list(x) for x in s1],
                                      "sigma2_twice": s2.to_json(), "valuation": v1})
        pval = projection_P(n, s2, big, beta, s_prime=s_prime, weight=weight)
        diff2 = pval - s2.det() ** beta
        v2 = _vp_rational(diff2, p)
        if v2 is not None and v2 < r:
            report.violations.append({"kind": "projection", "sigma1": [list(x) for x in s1],
                                      "sigma2_twice": s2.to_json(), "valuation": v2})
    return report


def projection_p_integral(beta: int, s_prime, weight, p: int, r: int) -> bool:
    """Whether every sigma'-carrying coefficient of P lies in p^r Z_(p) after sigma' -> p^r sigma."""
    a = projection_coefficients_n1(beta, s_prime, weight)
    for j, c in enumerate(a[:-1]):
        if c and _vp_rational(c, p) + r * (beta - j) < r:
            return False
    return True


def projection_defect(beta: int, s_prime, weight, p: int, r: int) -> int:
    """How far P(sigma2, p^r sigma) - sigma2^beta can fall short of p^r: the congruence holds mod p^(r - defect)."""
    a = projection_coefficients_n1(beta, s_prime, weight)
    worst = 0
    for j, c in enumerate(a[:-1]):
        if c:
            worst = max(worst, r - (_vp_rational(c, p) + r * (beta - j)))
    return worst
