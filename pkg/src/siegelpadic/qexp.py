"""Truncated Fourier expansions and the operators applied to them."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import mpmath

from .chars import DirichletChar, gauss_sum
from .cyclo import CycloNumber, rational_power, sqrt_prime
from .errors import (
    DegreeMismatch,
    InsufficientTruncation,
    IrrationalExponent,
    LoadError,
    ParityMismatch,
    UnsupportedDegree,
)
from .symlat import (
    HalfIntSymMatrix,
    completeness_bound,
    mat_mul,
    reduce_class,
    sym_from_rational_twice,
    theta_ideal,
    transpose,
)


# coefficients -------------------------------------------------------------

@dataclass(frozen=True)
class ExtCoeff:
    """cyclo * sqrt(p)^sqrtp_exp, an element of Q(chi)(sqrt p)."""

    cyclo: CycloNumber
    sqrtp_exp: int = 0
    p: int | None = None

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "cyclo", CycloNumber.coerce(self.cyclo))
        if self.cyclo.is_zero():
            object.__setattr__(self, "sqrtp_exp", 0)
        if self.sqrtp_exp and self.p is None:
            raise ValueError("a sqrt(p) exponent needs the working prime")

    @classmethod
    def coerce(cls, x, p=None) -> "ExtCoeff":
        if isinstance(x, ExtCoeff):
            return x
        return cls(CycloNumber.coerce(x), 0, p)

    @classmethod
    def zero(cls, p=None) -> "ExtCoeff":
        return cls(CycloNumber.rational(0), 0, p)

    def is_zero(self) -> bool:
        return self.cyclo.is_zero()

    def _prime(self, other: "ExtCoeff"):
        if self.p and other.p and self.p != other.p:
            raise ValueError("coefficients over different working primes")
        return self.p or other.p

    def to_cyclo(self) -> CycloNumber:
        """The same number inside a cyclotomic field (sqrt p realised by a Gauss sum)."""
        if not self.sqrtp_exp:
            return self.cyclo
        q, r = divmod(self.sqrtp_exp, 2)
        out = self.cyclo * Fraction(self.p) ** q
        return out * sqrt_prime(self.p) if r else out

    def __add__(self, other):
        other = ExtCoeff.coerce(other)
        p = self._prime(other)
        if self.is_zero():
            return replace(other, p=p)
        if other.is_zero():
            return replace(self, p=p)
        if (self.sqrtp_exp - other.sqrtp_exp) % 2 == 0:
            e = min(self.sqrtp_exp, other.sqrtp_exp)
            total = (self.cyclo * Fraction(p or 1) ** ((self.sqrtp_exp - e) // 2)
                     + other.cyclo * Fraction(p or 1) ** ((other.sqrtp_exp - e) // 2))
            return ExtCoeff(total, e, p)
        # mixed parity: fall back to the cyclotomic realisation
        return ExtCoeff(self.to_cyclo() + other.to_cyclo(), 0, p)

    __radd__ = __add__

    def __neg__(self):
        return ExtCoeff(-self.cyclo, self.sqrtp_exp, self.p)

    def __sub__(self, other):
        return self + (-ExtCoeff.coerce(other))

    def __rsub__(self, other):
        return ExtCoeff.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycloNumber)):
            return ExtCoeff(self.cyclo * other, self.sqrtp_exp, self.p)
        if not isinstance(other, ExtCoeff):
            return NotImplemented
        return ExtCoeff(self.cyclo * other.cyclo, self.sqrtp_exp + other.sqrtp_exp, self._prime(other))

    __rmul__ = __mul__

    def inverse(self) -> "ExtCoeff":
        return ExtCoeff(self.cyclo.inverse(), -self.sqrtp_exp, self.p)

    def __truediv__(self, other):
        return self * ExtCoeff.coerce(other, self.p).inverse()

    def __pow__(self, e: int):
        return ExtCoeff(self.cyclo ** e, self.sqrtp_exp * e, self.p)

    def conjugate(self) -> "ExtCoeff":
        return ExtCoeff(self.cyclo.conjugate(), self.sqrtp_exp, self.p)

    def __eq__(self, other):
        if not isinstance(other, (ExtCoeff, CycloNumber, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    def to_mpc(self):
        v = self.cyclo.to_mpc()
        if self.sqrtp_exp:
            v *= mpmath.sqrt(self.p) ** self.sqrtp_exp
        return v

    def to_complex(self) -> complex:
        return complex(self.to_mpc())

    def to_json(self) -> dict:
        return {"cyclo": self.cyclo.to_json(), "sqrtp_exp": self.sqrtp_exp}

    def __str__(self):
        base = str(self.cyclo)
        if not self.sqrtp_exp:
            return base
        return f"({base})*sqrt({self.p})^{self.sqrtp_exp}"


def p_half_power(p: int, e: int) -> ExtCoeff:
    """sqrt(p)^e."""
    return ExtCoeff(CycloNumber.rational(1), e, p)


# expansions ---------------------------------------------------------------

def _in_support(tau: HalfIntSymMatrix, b: Fraction) -> bool:
    # tau in N(b) S^▽
    try:
        tau.scaled(1 / b)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class FourierExpansion:
    """sum over tau of c(tau) e(tr(tau z)), complete up to trace_bound."""

    n: int
    weight2: int
    coeffs: dict = field(default_factory=dict)
    trace_bound: Fraction = Fraction(0)
    b: Fraction = Fraction(1)
    c: int = 1
    char_tag: str = "1"
    p: int | None = None

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "b", Fraction(self.b))
        object.__setattr__(self, "trace_bound", Fraction(self.trace_bound))
        clean = {}
        for tau, v in self.coeffs.items():
            if tau.n != self.n:
                raise DegreeMismatch("coefficient index of the wrong degree")
            v = ExtCoeff.coerce(v, self.p)
            if v.is_zero():
                continue
            if not _in_support(tau, self.b):
                raise ValueError(f"{tau} is outside N(b) S^▽ for b = {self.b}")
            if self.p is None and v.p is not None:
                object.__setattr__(self, "p", v.p)
            clean[tau] = v
        object.__setattr__(self, "coeffs", clean)

    @property
    def weight(self) -> Fraction:
        return Fraction(self.weight2, 2)

    def coeff(self, tau: HalfIntSymMatrix) -> ExtCoeff:
        if tau.trace() > self.trace_bound:
            raise InsufficientTruncation(f"trace {tau.trace()} beyond the bound {self.trace_bound}")
        return self.coeffs.get(tau, ExtCoeff.zero(self.p))

    def sorted_items(self):
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0].trace(), kv[0].twice))

    def truncate(self, bound) -> "FourierExpansion":
        bound = Fraction(bound)
        if bound > self.trace_bound:
            raise InsufficientTruncation(f"cannot extend the bound {self.trace_bound} to {bound}")
        kept = {t: v for t, v in self.coeffs.items() if t.trace() <= bound}
        return replace(self, coeffs=kept, trace_bound=bound)

    def _combine(self, other: "FourierExpansion", sign: int) -> "FourierExpansion":
        if self.n != other.n:
            raise DegreeMismatch("degrees differ")
        tb = min(self.trace_bound, other.trace_bound)
        out = {}
        for src, s in ((self, 1), (other, sign)):
            for t, v in src.coeffs.items():
                if t.trace() <= tb:
                    out[t] = out.get(t, ExtCoeff.zero(self.p)) + v * s
        return replace(self, coeffs=out, trace_bound=tb, p=self.p or other.p)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def scale(self, factor) -> "FourierExpansion":
        factor = ExtCoeff.coerce(factor, self.p)
        return replace(self, coeffs={t: v * factor for t, v in self.coeffs.items()},
                       p=self.p or factor.p)

    def agrees_with(self, other: "FourierExpansion", bound=None) -> bool:
        bound = min(self.trace_bound, other.trace_bound) if bound is None else Fraction(bound)
        keys = {t for t in self.coeffs if t.trace() <= bound} | {t for t in other.coeffs if t.trace() <= bound}
        return all(self.coeff(t) == other.coeff(t) for t in keys)

    # serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "degree": self.n,
            "weight2": self.weight2,
            "b": str(self.b),
            "c": self.c,
            "p": self.p,
            "character": self.char_tag,
            "trace_bound": str(self.trace_bound),
            "coeffs": [{"tau_twice": t.to_json(), **v.to_json()} for t, v in self.sorted_items()],
        }

    @classmethod
    def from_json(cls, d: dict) -> "FourierExpansion":
        try:
            p = d.get("p")
            coeffs = {}
            for entry in d["coeffs"]:
                tau = HalfIntSymMatrix(entry["tau_twice"])
                coeffs[tau] = ExtCoeff(CycloNumber.from_json(entry["cyclo"]),
                                       int(entry.get("sqrtp_exp", 0)), p)
            return cls(int(d["degree"]), int(d["weight2"]), coeffs, Fraction(d["trace_bound"]),
                       Fraction(d.get("b", 1)), int(d.get("c", 1)), d.get("character", "1"), p)
        except (KeyError, TypeError, ValueError) as exc:
            raise LoadError(f"malformed expansion: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def expansion_n1(values: dict, weight2: int, trace_bound, **kw) -> FourierExpansion:
    """Degree-one expansion from {m: c(m)} (m the exponent of q)."""
    coeffs = {HalfIntSymMatrix(((2 * m,),)): v for m, v in values.items()}
    return FourierExpansion(1, weight2, coeffs, Fraction(trace_bound), **kw)


def n1_coefficients(f: FourierExpansion) -> dict[int, ExtCoeff]:
    return {t.twice[0][0] // 2: v for t, v in f.coeffs.items()}


# theta series ---------------------------------------------------------------

def _char_inverse_at(chi: DirichletChar, a: int) -> CycloNumber:
    """(chi_infty chi*)^{-1}(a) for an integer a, with value 1 at 0 iff conductor 1."""
    if a == 0:
        return CycloNumber.rational(1 if chi.conductor == 1 else 0)
    return chi.conj()(a)


def integer_matrices(n: int, bound: int):
    rng = range(-bound, bound + 1)
    for entries in itertools.product(rng, repeat=n * n):
        yield tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n))


def theta_series(tau: HalfIntSymMatrix, chi: DirichletChar, mu: int, scale=1,
                 trace_bound=0, *, p=None) -> FourierExpansion:
    """sum over x in M_n(Z) of chi^{-1}(|x|) |x|^mu e(tr(scale x^T tau x z))."""
    from .symlat import det

    n = tau.n
    if chi.parity() ** n != (-1) ** (n * mu):
        raise ParityMismatch(f"chi(-1)^{n} != (-1)^({n}*{mu})")
    scale = Fraction(scale)
    form = tuple(tuple(scale * x for x in r) for r in tau.tau)
    bound = completeness_bound(Fraction(trace_bound), form)
    twice = tuple(tuple(scale * x for x in r) for r in tau.twice)
    coeffs: dict = {}
    for x in integer_matrices(n, bound):
        d = det(x)
        val = _char_inverse_at(chi, d) * (d ** mu)
        if val.is_zero():
            continue
        key = sym_from_rational_twice(mat_mul(mat_mul(transpose(x), twice), x))
        if key.trace() > Fraction(trace_bound):
            continue
        coeffs[key] = coeffs.get(key, CycloNumber.rational(0)) + val
    return FourierExpansion(n, n + 2 * mu, coeffs, Fraction(trace_bound),
                            char_tag=chi.tag(), p=p)


# operators ----------------------------------------------------------------

def _divisible(tau: HalfIntSymMatrix, d: int) -> bool:
    return all(x % d == 0 for r in tau.twice for x in r)


def u_p(f: FourierExpansion, p: int, trace_bound=None) -> FourierExpansion:
    """c(tau; f|U_p) = p^{n(n+1-k)} c_f(p^2 tau)."""
    limit = Fraction(math.floor(f.trace_bound / (p * p)))
    if trace_bound is None:
        trace_bound = limit
    elif Fraction(trace_bound) > limit:
        raise InsufficientTruncation(f"U_{p} output needs input bound {p * p * Fraction(trace_bound)}")
    factor = p_half_power(p, 2 * f.n * (f.n + 1) - f.n * f.weight2)
    out = {}
    for tau, v in f.coeffs.items():
        if _divisible(tau, p * p):
            small = tau.scaled(Fraction(1, p * p))
            if small.trace() <= Fraction(trace_bound):
                out[small] = v * factor
    return replace(f, coeffs=out, trace_bound=Fraction(trace_bound), p=p)


def _prime_power_exponent(m: int, p: int | None):
    if p is None or m < 1:
        return None
    e = 0
    while m % p == 0:
        m //= p
        e += 1
    return e if m == 1 else None


def v_shift(g: FourierExpansion, m: int, p: int | None = None) -> FourierExpansion:
    """c(M^2 tau; g|V(M)) = M^{n l} c_g(tau), l the weight of g."""
    p = p or g.p
    nl2 = g.n * g.weight2  # 2 n l
    if nl2 % 2 == 0:
        factor = ExtCoeff.coerce(Fraction(m) ** (nl2 // 2), p)
    else:
        j = _prime_power_exponent(m, p)
        if j is None:
            raise ValueError("odd n*weight2 needs M to be a power of the working prime")
        factor = p_half_power(p, j * nl2)
    out = {tau.scaled(m * m): v * factor for tau, v in g.coeffs.items()}
    return replace(g, coeffs=out, trace_bound=g.trace_bound * m * m, c=g.c * m * m, p=p)


def multiply(f: FourierExpansion, g: FourierExpansion) -> FourierExpansion:
    if f.n != g.n:
        raise DegreeMismatch("cannot multiply expansions of different degree")
    tb = min(f.trace_bound, g.trace_bound)
    out: dict = {}
    for t1, v1 in f.coeffs.items():
        if t1.trace() > tb:
            continue
        for t2, v2 in g.coeffs.items():
            t = t1 + t2
            if t.trace() <= tb:
                out[t] = out.get(t, ExtCoeff.zero(f.p or g.p)) + v1 * v2
    return FourierExpansion(f.n, f.weight2 + g.weight2, out, tb, f.b, f.c,
                            f"{f.char_tag}*{g.char_tag}", f.p or g.p)


def twist_n1(f: FourierExpansion, phi: DirichletChar) -> FourierExpansion:
    """c(m) -> phi(m) c(m)."""
    if f.n != 1:
        raise UnsupportedDegree("twisting is implemented for n = 1")
    out = {t: v * phi(t.twice[0][0] // 2) for t, v in f.coeffs.items()}
    return replace(f, coeffs=out)


def _rational_power_exact(x: Fraction, e: Fraction) -> Fraction:
    if e.denominator == 1:
        return x ** e.numerator
    root = []
    for part in (x.numerator, x.denominator):
        r = round(part ** (1 / e.denominator))
        cand = next((c for c in (r - 1, r, r + 1) if c >= 0 and c ** e.denominator == part), None)
        if cand is None:
            raise IrrationalExponent(f"{x}^{e} is irrational")
        root.append(cand)
    return Fraction(root[0], root[1]) ** e.numerator


def rankin_dirichlet(f: FourierExpansion, g: FourierExpansion, s, trace_bound) -> ExtCoeff:
    """sum over classes sigma > 0, tr <= bound, of c_f conj(c_g) |sigma|^{-s-(k-l)/2} / nu."""
    if f.n != g.n:
        raise DegreeMismatch("degrees differ")
    if f.n > 2:
        raise UnsupportedDegree("class reduction is implemented for n <= 2")
    trace_bound = Fraction(trace_bound)
    exponent = -Fraction(s) - Fraction(f.weight2 - g.weight2, 4)

    def by_class(h: FourierExpansion):
        table = {}
        for tau, v in sorted(h.coeffs.items(), key=lambda kv: kv[0].twice):
            if tau.is_pd():
                cls = reduce_class(tau)
                key = cls.representative
                # prefer the stored representative itself over other class members
                if key not in table or tau == key:
                    table[key] = (v, cls.aut_count)
        return table

    tf, tg = by_class(f), by_class(g)
    total = ExtCoeff.zero(f.p or g.p)
    for rep in sorted(set(tf) & set(tg), key=lambda t: (t.trace(), t.twice)):
        if rep.trace() > trace_bound:
            continue
        (cf, nu), (cg, _) = tf[rep], tg[rep]
        weight = _rational_power_exact(rep.det(), exponent) / nu
        total = total + cf * cg.conjugate() * weight
    return total


# theta transformation ---------------------------------------------------------

def _prime_power_split(m: int) -> tuple[int, int]:
    import sympy

    fac = sympy.factorint(m)
    if len(fac) != 1:
        raise ValueError(f"{m} is not a prime power")
    (p, e), = fac.items()
    return p, e


@dataclass(frozen=True)
class ThetaTransformData:
    t: int
    tau_hat: tuple
    scale: Fraction
    y: Fraction  # Y_chi = N(tbc) p^l
    constant: ExtCoeff
    p: int
    ell: int


def theta_transform_data(tau: HalfIntSymMatrix, chi: DirichletChar, mu: int,
                         b=1, c=1) -> ThetaTransformData:
    """Constants of the transformation of theta_chi under W(Y_chi).

    The prefactor carries N(tbc)^{n(mu + 1/2)}; the extra N(tbc)^{n/2} beyond
    N(tbc)^{n mu} was pinned down by the numerical check below.
    """
    if not chi.is_primitive:
        raise ValueError("the transformation formula needs a primitive character")
    n = tau.n
    p, ell = _prime_power_split(chi.conductor)
    t, tau_hat = theta_ideal(tau)
    b = Fraction(b)
    tbc = t * b * c
    scale = t * b * b * c * c / 2
    d = n * n // 2 if n % 2 == 0 else 0
    const = CycloNumber.zeta(4, d) * chi.parity() ** n
    const = const * rational_power(tbc, Fraction(n * (2 * mu + 1), 2))
    const = const / rational_power(tau.det_twice, Fraction(n, 2) + mu)
    const = const * gauss_sum(chi.conj(), n)
    constant = ExtCoeff(const, -ell * n * n, p)
    return ThetaTransformData(t, tau_hat, scale, tbc * p ** ell, constant, p, ell)


def theta_transform_rhs(tau: HalfIntSymMatrix, chi: DirichletChar, mu: int, b=1, c=1,
                        trace_bound=0) -> FourierExpansion:
    data = theta_transform_data(tau, chi, mu, b, c)
    tau_hat = HalfIntSymMatrix(tuple(tuple(2 * x for x in r) for r in data.tau_hat))
    series = theta_series(tau_hat, chi.conj(), mu, data.scale, trace_bound, p=data.p)
    return series.scale(data.constant)


def numeric_theta_check(chi: DirichletChar, mu: int, tau: int = 1, z_points=(1j, 1 + 2j),
                        terms: int = 200, b=1, c=1, dps: int = 40) -> list[dict]:
    """Compare both sides of the degree-one transformation at complex points.

    Left side: theta_chi(-1/(Y^2 z)) / (h(z) (Yz)^mu) with h(z) the principal
    root of -iYz.  Right side: the constant times theta_{chi-bar}(scale tau_hat x^2 z).
    """
    sym = HalfIntSymMatrix(((2 * tau,),))
    data = theta_transform_data(sym, chi, mu, b, c)
    hat = data.tau_hat[0][0]
    chibar = chi.conj()
    out = []
    with mpmath.workdps(dps):
        y = mpmath.mpf(data.y.numerator) / data.y.denominator
        scale = mpmath.mpf(data.scale.numerator) / data.scale.denominator
        const = data.constant.to_mpc()
        lhs_coef = [(x, _char_inverse_at(chi, x).to_mpc() * x ** mu) for x in range(-terms, terms + 1)]
        rhs_coef = [(x, _char_inverse_at(chibar, x).to_mpc() * x ** mu) for x in range(-terms, terms + 1)]
        for z in z_points:
            z = mpmath.mpc(z)
            w = -1 / (y * y * z)
            theta_l = mpmath.fsum(cf * mpmath.expjpi(2 * tau * x * x * w) for x, cf in lhs_coef if cf)
            lhs = theta_l / (mpmath.sqrt(-1j * y * z) * (y * z) ** mu)
            rhs = const * mpmath.fsum(cf * mpmath.expjpi(2 * scale * hat * x * x * z)
                                      for x, cf in rhs_coef if cf)
            resid = abs(lhs - rhs)
            scale_ref = max(abs(lhs), abs(rhs))
            out.append({
                "z": complex(z),
                "lhs": complex(lhs),
                "rhs": complex(rhs),
                "residual": float(resid),
                "relative": float(resid / scale_ref) if scale_ref else 0.0,
            })
    return out
