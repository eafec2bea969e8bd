"""Distributions and measures on Z_p^x, Kummer congruences and interpolation values."""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .chars import DirichletChar, gauss_sum
from .cyclo import CycloNumber, rational_power, vp
from .errors import (
    BadPrime,
    ConductorNotCoprime,
    ConstantTermPresent,
    ExcludedSpecialValue,
    IncompatibleSystem,
    InsufficientTruncation,
    NotBounded,
    NotOrdinary,
    NotSpecialValue,
    ParityMismatch,
    PrecisionTooLow,
    TruncationGap,
    WildPartUnsupported,
)
from .padic import PadicNumber, embed_cyclo, from_rational, teichmuller, valuation_cyclo
from .symlat import HalfIntSymMatrix, det


def _units(p: int, i: int):
    return [x for x in range(1, p ** i) if x % p]


def _value_valuation(v, p: int):
    if isinstance(v, PadicNumber):
        return v.valuation()
    v = CycloNumber.coerce(v)
    if v.is_zero():
        return None
    if v.is_rational():
        return Fraction(vp(v.to_fraction(), p))
    return valuation_cyclo(v, p)


# distribution systems ---------------------------------------------------------

@dataclass(frozen=True)
class DistributionSystem:
    """Compatible functions nu_i on (Z/p^i)^x for i = 1..I_max (levels[i-1] = nu_i)."""

    p: int
    levels: tuple

    __hash__ = None

    @classmethod
    def from_system(cls, p: int, levels) -> "DistributionSystem":
        if not levels:
            raise ValueError("at least one level is needed")
        clean = []
        for i, lvl in enumerate(levels, start=1):
            units = _units(p, i)
            if set(lvl) - set(units):
                raise ValueError(f"level {i} has keys outside (Z/{p}^{i})^x")
            clean.append({x: CycloNumber.coerce(lvl.get(x, 0)) for x in units})
        for i in range(2, len(clean) + 1):
            fine, coarse = clean[i - 1], clean[i - 2]
            for y in _units(p, i - 1):
                total = sum((fine[x] for x in range(y, p ** i, p ** (i - 1))), CycloNumber.rational(0))
                if total != coarse[y]:
                    raise IncompatibleSystem(
                        f"nu_{i - 1}({y}) differs from the sum over its fibre at level {i}",
                        witness=(i, i - 1, y))
        return cls(p, tuple(clean))

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def integrate(self, phi: Callable, j: int) -> CycloNumber:
        """Integral of a function factoring through (Z/p^j)^x, checked at every level >= j."""
        if j > self.max_level:
            raise PrecisionTooLow(f"level {j} beyond the stored {self.max_level}")
        results = []
        for i in range(j, self.max_level + 1):
            mod = self.p ** j
            results.append(sum((CycloNumber.coerce(phi(x % mod)) * v for x, v in self.levels[i - 1].items()),
                               CycloNumber.rational(0)))
        if any(r != results[0] for r in results[1:]):
            raise IncompatibleSystem("integral depends on the level", witness=(j,))
        return results[0]

    def integrate_character(self, chi: DirichletChar) -> CycloNumber:
        j = max(1, _conductor_exponent(chi.conductor, self.p))
        return self.integrate(lambda x: chi(x), j)

    def level_min_valuations(self) -> list:
        out = []
        for lvl in self.levels:
            vals = [_value_valuation(v, self.p) for v in lvl.values()]
            vals = [v for v in vals if v is not None]
            out.append(min(vals) if vals else None)
        return out

    @property
    def boundedness_valuation(self):
        vals = [v for v in self.level_min_valuations() if v is not None]
        return min(vals) if vals else None

    @property
    def is_bounded(self) -> bool:
        """Minimum valuations do not decrease from level to level."""
        vals = [v for v in self.level_min_valuations() if v is not None]
        return all(b >= a for a, b in zip(vals, vals[1:]))

    def to_json(self) -> dict:
        bv = self.boundedness_valuation
        return {
            "p": self.p,
            "I_max": self.max_level,
            "levels": [{"i": i, "values": {str(x): v.to_json() for x, v in sorted(lvl.items())}}
                       for i, lvl in enumerate(self.levels, start=1)],
            "boundedness_valuation": None if bv is None or not self.is_bounded else str(bv),
        }

    @classmethod
    def from_json(cls, d: dict) -> "DistributionSystem":
        levels = []
        for entry in sorted(d["levels"], key=lambda e: e["i"]):
            levels.append({int(x): CycloNumber.from_json(v) for x, v in entry["values"].items()})
        return cls.from_system(int(d["p"]), levels)


def _conductor_exponent(f: int, p: int) -> int:
    e = 0
    while f % p == 0:
        f //= p
        e += 1
    if f != 1:
        raise ValueError("character conductor is not a power of p")
    return e


def dirac_system(a: int, p: int, levels: int) -> DistributionSystem:
    return DistributionSystem.from_system(
        p, [{x: int(x == a % p ** i) for x in _units(p, i)} for i in range(1, levels + 1)])


def counting_system(p: int, levels: int) -> DistributionSystem:
    return DistributionSystem.from_system(
        p, [{x: Fraction(1, len(_units(p, i))) for x in _units(p, i)} for i in range(1, levels + 1)])


# Dirac combinations -----------------------------------------------------------------

def _char_at_rational(chi: DirichletChar, y: Fraction) -> CycloNumber:
    num, den = chi(y.numerator), chi(y.denominator)
    if den.is_zero():
        return CycloNumber.rational(0)
    return num * den.inverse()


def _residue(y: Fraction, p: int, i: int) -> int:
    mod = p ** i
    return y.numerator * pow(y.denominator, -1, mod) % mod


@dataclass(frozen=True)
class DiracMeasure:
    """sum of w_y delta_y over finitely many p-adic units y (rationals)."""

    p: int
    weights: tuple  # ((y, CycloNumber), ...) sorted by y

    __hash__ = None

    @classmethod
    def build(cls, p: int, weights: dict) -> "DiracMeasure":
        clean = {}
        for y, w in weights.items():
            y = Fraction(y)
            if y == 0 or vp(y, p) != 0:
                raise ValueError(f"{y} is not a {p}-adic unit")
            clean[y] = clean.get(y, CycloNumber.rational(0)) + CycloNumber.coerce(w)
        return cls(p, tuple(sorted((y, w) for y, w in clean.items() if not w.is_zero())))

    def evaluate(self, chi: DirichletChar, mint: int) -> CycloNumber:
        """Integral of chi(y) y^mint."""
        total = CycloNumber.rational(0)
        for y, w in self.weights:
            total = total + w * _char_at_rational(chi, y) * (y ** mint)
        return total

    def system(self, levels: int) -> DistributionSystem:
        out = []
        for i in range(1, levels + 1):
            lvl: dict = {}
            for y, w in self.weights:
                r = _residue(y, self.p, i)
                lvl[r] = lvl.get(r, CycloNumber.rational(0)) + w
            out.append(lvl)
        return DistributionSystem.from_system(self.p, out)

    def twist(self, omega: DirichletChar) -> "DiracMeasure":
        """[nu (x) omega](chi x^m) = a_m(chi omega)."""
        if math.gcd(omega.conductor, self.p) != 1:
            raise ConductorNotCoprime(f"conductor {omega.conductor} is not prime to {self.p}")
        return DiracMeasure.build(self.p, {y: w * _char_at_rational(omega, y) for y, w in self.weights})

    def min_weight_valuation(self):
        vals = [_value_valuation(w, self.p) for _, w in self.weights]
        vals = [v for v in vals if v is not None]
        return min(vals) if vals else None


def sigma_measure(local_polys: dict, p: int, n: int = 1) -> DiracMeasure:
    """The measure whose chi x^[m] integral is prod_q f_q(conj(chi)(q) q^{(n+delta-1)/2 - m}).

    f_q(X) = sum_j c_j X^j turns into c_j q^{c j} delta_{q^-j}, c = (n+delta-2)/2.
    """
    shift = Fraction(n + n % 2 - 2, 2)
    if shift.denominator != 1:
        raise ValueError("unexpected half-integral shift")
    measure = {Fraction(1): CycloNumber.rational(1)}
    for q in sorted(local_polys):
        coeffs = local_polys[q]
        if q == p:
            raise BadPrime(f"local factor at q = p = {p}")
        if coeffs and coeffs[0] != 0:
            raise ConstantTermPresent(f"f_q for q = {q} has a constant term")
        factor = {Fraction(1, q ** j): Fraction(c) * Fraction(q) ** (int(shift) * j)
                  for j, c in enumerate(coeffs) if c}
        nxt: dict = {}
        for y1, w1 in measure.items():
            for y2, w2 in factor.items():
                nxt[y1 * y2] = nxt.get(y1 * y2, CycloNumber.rational(0)) + w1 * w2
        measure = nxt
    return DiracMeasure.build(p, measure)


def sigma_value(local_polys: dict, chi: DirichletChar, m, n: int = 1, omega: DirichletChar | None = None) -> CycloNumber:
    """prod_q f_q(conj(chi omega)(q) q^{(n+delta-1)/2 - m}), computed from the definition."""
    from .eisen import local_exponent, local_product

    def char_bar(q):
        v = chi(q).conjugate()
        return v * omega(q).conjugate() if omega is not None else v

    return local_product(local_polys, char_bar, local_exponent(m, n))


# Kummer congruences ------------------------------------------------------------------

def _embed_residue(x, p: int, n: int) -> int:
    if isinstance(x, PadicNumber):
        pad = x
    else:
        x = CycloNumber.coerce(x)
        pad = from_rational(x.to_fraction(), p, n + 2) if x.is_rational() else embed_cyclo(x, p, n)
    if pad.is_zero():
        if pad.absolute_precision < n:
            raise PrecisionTooLow(f"value known only to O({p}^{pad.absolute_precision})")
        return 0
    if pad.val < 0:
        raise NotBounded(f"value has negative valuation {pad.val}")
    if pad.absolute_precision < n:
        raise PrecisionTooLow(f"value known only to O({p}^{pad.absolute_precision}), need {n}")
    return pad.residue(n)


def kernel_mod_prime_power(matrix: list[list[int]], p: int, n: int) -> list[list[int]]:
    """Generators of {b : matrix b = 0 mod p^n}, via a Smith-type elimination."""
    mod = p ** n
    rows = [[x % mod for x in r] for r in matrix]
    ncols = len(rows[0]) if rows else 0
    q = [[int(i == j) for j in range(ncols)] for i in range(ncols)]  # column operations
    diag = []

    def val(x):
        return n if x == 0 else vp(x, p) if vp(x, p) < n else n

    for t in range(min(len(rows), ncols)):
        best = None
        for i in range(t, len(rows)):
            for j in range(t, ncols):
                if rows[i][j]:
                    v = val(rows[i][j])
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        rows[t], rows[i] = rows[i], rows[t]
        for r in rows:
            r[t], r[j] = r[j], r[t]
        for r in q:
            r[t], r[j] = r[j], r[t]
        unit_inv = pow(rows[t][t] // p ** v, -1, mod)
        for i in range(t + 1, len(rows)):
            if rows[i][t]:
                f = (rows[i][t] // p ** v) * unit_inv % mod
                rows[i] = [(a - f * b) % mod for a, b in zip(rows[i], rows[t])]
        for j in range(t + 1, ncols):
            if rows[t][j]:
                f = (rows[t][j] // p ** v) * unit_inv % mod
                for r in rows:
                    r[j] = (r[j] - f * r[t]) % mod
                for r in q:
                    r[j] = (r[j] - f * r[t]) % mod
        diag.append(v)
    gens = []
    for t in range(ncols):
        if t < len(diag):
            if diag[t] == 0:
                continue
            scale = p ** (n - diag[t])
        else:
            scale = 1
        gens.append([q[i][t] * scale % mod for i in range(ncols)])
    return gens


@dataclass
class KummerVerdict:
    p: int
    N: int
    passed: bool
    kernel_rank: int
    failures: list = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {"p": self.p, "N": self.N, "passed": self.passed, "kernel_generators": self.kernel_rank,
                "failures": self.failures, "note": self.note}


def character_power_matrix(basis, p: int, n: int) -> list[list[int]]:
    """Rows y in (Z/p^n)^x, columns the test functions chi(y) y^mint, all mod p^n."""
    rows = []
    for y in _units(p, n):
        row = []
        for chi, mint in basis:
            cv = chi(y)
            row.append(_embed_residue(cv, p, n) * pow(y, mint, p ** n) % p ** n)
        rows.append(row)
    return rows


def kummer_check(basis, values, N: int, trials: int = 0, seed: int = 0) -> KummerVerdict:
    """Every b with sum b_i f_i = 0 mod p^N must give sum b_i a_i = 0 mod p^N.

    basis: list of (DirichletChar of conductor dividing p, integer power);
    values: the candidate integrals a_i (CycloNumber or PadicNumber).
    """
    if not basis:
        raise ValueError("empty test-function family")
    p = _prime_of(basis[0][0].modulus)
    for chi, _ in basis:
        if _conductor_exponent(chi.conductor, p) > 1:
            raise WildPartUnsupported("only characters of conductor dividing p embed into Z_p")
    targets = [_embed_residue(a, p, N) for a in values]
    mod = p ** N
    gens = kernel_mod_prime_power(character_power_matrix(basis, p, N), p, N)
    gens = [g for g in gens if any(g)]
    failures = []
    for g in gens:
        s = sum(b * a for b, a in zip(g, targets)) % mod
        if s:
            failures.append({"combination": g, "residue": s})
    rng = random.Random(seed)
    for _ in range(trials if gens else 0):
        coeffs = [rng.randrange(mod) for _ in gens]
        b = [sum(c * g[i] for c, g in zip(coeffs, gens)) % mod for i in range(len(basis))]
        s = sum(x * a for x, a in zip(b, targets)) % mod
        if s:
            failures.append({"combination": b, "residue": s})
    note = "" if gens else "no constraints at this precision"
    return KummerVerdict(p, N, not failures, len(gens), failures, note)


def _prime_of(modulus: int) -> int:
    import sympy

    fac = sympy.factorint(modulus)
    if len(fac) != 1:
        raise ValueError("test characters must have p-power modulus")
    return next(iter(fac))


def conductor_p_basis(p: int, powers) -> list:
    from .chars import character_family

    return [(chi, m) for chi in character_family(p, 1) for m in powers]


# Mellin transform ---------------------------------------------------------------------

def _one_unit_part(y: int, p: int, n: int) -> PadicNumber:
    """<y> = y / omega(y)."""
    return from_rational(y, p, n) / teichmuller(y, p, n)


def _binomial_power(u: PadicNumber, s: Fraction, p: int, n: int) -> PadicNumber:
    """u^s for u = 1 mod p and p-integral s, by the binomial series in (u - 1).

    The coefficients binom(s, j) are p-integral and (u - 1)^j = O(p^j), so n terms suffice.
    """
    x = u - 1
    total = from_rational(1, p, n)
    power = from_rational(1, p, n)
    coef = Fraction(1)
    for j in range(1, n + 1):
        coef = coef * (s - j + 1) / j
        power = power * x
        if coef:
            total = total + from_rational(coef, p, n) * power
    return total


def mellin(nu, chi: DirichletChar, *, mint: int | None = None, s=None, N: int = 4) -> PadicNumber:
    """Integral of chi(y) y^mint, or of chi(y) <y>^s for p-integral rational s.

    For a Dirac measure the value is exact up to O(p^N).  For a stored system
    the Riemann sums at the top two levels are compared and the precision is
    capped by their agreement, unless the integrand is locally constant.
    """
    if (mint is None) == (s is None):
        raise ValueError("give exactly one of mint and s")
    p = nu.p
    if s is not None:
        s = Fraction(s)
        if s and vp(s, p) < 0:
            raise ValueError("s must be p-adically integral")

    def integrand(y: int, prec: int = N) -> PadicNumber:
        cv = chi(y)
        if cv.is_zero():
            return PadicNumber.zero(p, prec)
        base = _embed_cyclo_value(cv, p, prec)
        if mint is not None:
            return base * from_rational(Fraction(y) ** mint, p, prec)
        return base * _binomial_power(_one_unit_part(y, p, prec), s, p, prec)

    if isinstance(nu, DiracMeasure):
        total = PadicNumber.zero(p, N)
        for y, w in nu.weights:
            yi = int(y) if y.denominator == 1 else _residue(y, p, N + 2)
            total = total + _embed_cyclo_value(w, p, N) * integrand(yi)
        return total

    locally_constant = mint == 0 or s == 0
    if not locally_constant and not nu.is_bounded:
        raise NotBounded("the system carries no boundedness certificate")

    low = nu.boundedness_valuation
    guard = max(0, -math.floor(low)) if low is not None else 0

    def riemann(i: int) -> PadicNumber:
        acc = PadicNumber.zero(p, N)
        for x, v in nu.levels[i - 1].items():
            if not v.is_zero():
                acc = acc + _embed_cyclo_value(v, p, N + guard) * integrand(x, N + guard)
        return acc

    top = nu.max_level
    last = riemann(top)
    if locally_constant:
        if _conductor_exponent(chi.conductor, p) > top:
            raise PrecisionTooLow("character conductor exceeds the stored levels")
        return last
    agree = 1 if top == 1 else None
    if agree is None:
        diff = last - riemann(top - 1)
        agree = N if diff.is_zero() else int(math.floor(diff.val))
    agree = min(agree, N)
    if last.is_zero():
        return PadicNumber.zero(p, min(agree, last.absolute_precision))
    cap = max(0, min(last.precision, agree - int(last.val)))
    return PadicNumber(p, last.val, last.unit, cap) if cap else PadicNumber.zero(p, min(agree, last.val))


def _embed_cyclo_value(v, p: int, n: int) -> PadicNumber:
    v = CycloNumber.coerce(v)
    if v.is_rational():
        return from_rational(v.to_fraction(), p, n)
    return embed_cyclo(v, p, n)


# the linear functional ---------------------------------------------------------------------

def ell_f(g, sigmas, betas) -> CycloNumber:
    """sum_i beta_i c_g(sigma_i)."""
    from .qexp import FourierExpansion

    if len(sigmas) != len(betas):
        raise ValueError("need one weight per index")
    total = CycloNumber.rational(0)
    for sigma, beta in zip(sigmas, betas):
        if isinstance(g, FourierExpansion):
            try:
                c = g.coeff(sigma).to_cyclo()
            except InsufficientTruncation as exc:
                raise TruncationGap(str(exc)) from exc
        else:
            if sigma not in g:
                raise TruncationGap(f"{sigma} is not covered by the supplied coefficients")
            c = CycloNumber.coerce(g[sigma])
        total = total + CycloNumber.coerce(beta) * c
    return total


# the section-8 congruence -----------------------------------------------------------------

def congruence_815(sigma: HalfIntSymMatrix, m, sign: str, chi: DirichletChar, omega: DirichletChar,
                   r: int, p: int, data, params, local_polys) -> dict:
    """Normalised coefficient against the twisted local measure, modulo p^r at iota_p.

    The local factors of the coefficient are evaluated at conj(chi omega)(q), which
    is the value the twisted measure sees.
    """
    from .eisen import _char_at_det, normalised_coeff, sigma1_exponent, v_pairs

    eta_bar = lambda q: (chi(q) * omega(q)).conjugate()  # noqa: E731
    lhs = normalised_coeff(sigma, m, sign, chi, r, p, data, params, local_polys, eta_bar)
    e = sigma1_exponent(m, sign, params)
    mint = int(Fraction(m) - Fraction(1, 2))
    rhs = CycloNumber.rational(0)
    for s1, s2 in v_pairs(sigma, p, r, data):
        w = _char_at_det(chi, s1)
        if w.is_zero():
            continue
        polys = local_polys(s2) if callable(local_polys) else local_polys
        twisted = sigma_measure(polys, p, params.n).twist(omega)
        rhs = rhs + w * Fraction(det(s1)) ** e * twisted.evaluate(chi, mint)
    diff = lhs - rhs
    v = valuation_cyclo(diff, p)
    return {"lhs": lhs, "rhs": rhs, "valuation": v, "ok": v is None or v >= r}


# interpolation ---------------------------------------------------------------------------------

def lambda_tau(m, n: int, weight2: int, mu: int, primes, phi: Callable) -> CycloNumber:
    """(Lambda_c / Lambda_tc)((2m - n)/4): Euler factors at q | t, q not dividing c."""
    k = Fraction(weight2, 2)
    kappa = k - Fraction(n, 2) - mu
    s = (2 * Fraction(m) - n) / 4
    out = CycloNumber.rational(1)
    for q in sorted(primes):
        ph = CycloNumber.coerce(phi(q))
        exps = []
        if kappa.denominator == 1:
            exps.append((ph, 2 * s))
            exps += [(ph * ph, 4 * s - 2 * i) for i in range(1, n // 2 + 1)]
        else:
            exps += [(ph * ph, 4 * s - 2 * i + 1) for i in range(1, (n + 1) // 2 + 1)]
        for val, x in exps:
            out = out * (1 - val * rational_power(q, -x)).inverse()
    return out


def g_tau(m, g_polys: dict, char: Callable) -> CycloNumber:
    """prod over q of g_q(char(q) q^-m)^-1."""
    from .eisen import _poly_value

    out = CycloNumber.rational(1)
    for q in sorted(g_polys):
        arg = CycloNumber.coerce(char(q)) * rational_power(q, -Fraction(m))
        out = out * _poly_value(g_polys[q], arg).inverse()
    return out


@dataclass
class InterpolationInput:
    n: int
    weight2: int
    p: int
    tau: HalfIntSymMatrix
    chi: DirichletChar
    m: Fraction
    sign: str
    L_ratio: object = 1
    lambda0: object = None  # ExtCoeff/CycloNumber/rational; taken from sp when None
    sp: object = None
    b: Fraction = Fraction(1)
    c: int = 1
    psi_parity: int = 1
    lambda_tau_value: object = 1
    g_tau_value: object = 1
    psi_chi_square_trivial: bool = False
    overrides: dict = field(default_factory=dict)


@dataclass
class InterpolationResult:
    value: CycloNumber
    tag: str
    factors: dict
    valuation: object = None

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "tag": self.tag,
                "valuation": None if self.valuation is None else str(self.valuation)}


def choose_mu(weight2: int, chi: DirichletChar, psi_parity: int = 1) -> int:
    """mu in {0, 1} with (psi chi)(-1) = (-1)^{[k] + mu}."""
    sign = psi_parity * chi.parity()
    floor_k = weight2 // 2
    return (floor_k + (0 if sign == 1 else 1)) % 2


def _a_det_and_exponent(inp: InterpolationInput):
    """|A| for A = -scale * tau_hat, and the branch exponent e with |A|^-e in the formula."""
    from .symlat import theta_ideal

    n, k, m = inp.n, Fraction(inp.weight2, 2), Fraction(inp.m)
    mu = choose_mu(inp.weight2, inp.chi, inp.psi_parity)
    t, tau_hat = theta_ideal(inp.tau)
    b = Fraction(inp.b)
    scale = t * b * b * inp.c * inp.c / 2
    a_det = det(tuple(tuple(-scale * Fraction(x) for x in r) for r in tau_hat))
    e = (k + m - mu - 1 - 2 * n) / 2 if inp.sign == "+" else (k + 3 * m - mu - 2 - 4 * n) / 2
    return a_det, e


def interpolation_factors(inp: InterpolationInput) -> dict:
    """The individual factors of the interpolation formula, before multiplication."""
    from .qexp import ExtCoeff
    from .symlat import theta_ideal

    n, k, m, p = inp.n, Fraction(inp.weight2, 2), Fraction(inp.m), inp.p
    mu = choose_mu(inp.weight2, inp.chi, inp.psi_parity)
    ell = _conductor_exponent(inp.chi.conductor, p)
    t, _ = theta_ideal(inp.tau)
    tbc = t * Fraction(inp.b) * inp.c
    a_det, e = _a_det_and_exponent(inp)
    d = n * n // 2 if n % 2 == 0 else 0
    floor_k = inp.weight2 // 2
    f = {}
    f["prefactor"] = (CycloNumber.rational((-1) ** (n * floor_k))
                      * rational_power(inp.tau.det_twice, Fraction(n, 2) + mu)
                      * CycloNumber.zeta(4, -d) * rational_power(tbc, -n * mu))
    f["a_power"] = rational_power(a_det, -e)
    f["p_power"] = rational_power(p, n * ell * (n + 1 - k - m))
    f["gauss"] = gauss_sum(inp.chi.conj(), n)
    f["lambda_tau"] = CycloNumber.coerce(inp.lambda_tau_value).inverse()
    f["g_tau"] = CycloNumber.coerce(inp.g_tau_value).inverse()
    if inp.lambda0 is not None:
        lam0 = ExtCoeff.coerce(inp.lambda0, p)
    else:
        if not inp.sp.is_ordinary:
            raise NotOrdinary("lambda_0 is not a p-adic unit")
        lam0 = inp.sp.lambda0
    f["lambda0_power"] = (lam0 ** (-ell)).to_cyclo()
    f["L_ratio"] = CycloNumber.coerce(inp.L_ratio)
    for key, v in inp.overrides.items():
        if key not in f:
            raise KeyError(f"unknown factor {key}")
        f[key] = CycloNumber.coerce(v)
    return f


def interpolation_value(inp: InterpolationInput, with_valuation: bool = True) -> InterpolationResult:
    n, k, m = inp.n, Fraction(inp.weight2, 2), Fraction(inp.m)
    if (m - Fraction(1, 2)).denominator != 1:
        raise NotSpecialValue("m - 1/2 must be an integer")
    if not inp.chi.is_primitive or inp.chi.conductor == 1:
        raise ValueError("the formula needs a primitive character of conductor p^l, l >= 1")
    mu = choose_mu(inp.weight2, inp.chi, inp.psi_parity)
    mm, kk = int(m - Fraction(1, 2)), inp.weight2 // 2
    if inp.sign == "+":
        if not n <= m <= k - mu:
            raise NotSpecialValue(f"m = {m} outside [{n}, {k - mu}]")
        parity_ok = (mm - kk - mu) % 2 == 0
        if parity_ok and m == n + Fraction(1, 2):
            raise ExcludedSpecialValue("m = n + 1/2 is excluded")
        if parity_ok and n > 1 and inp.psi_chi_square_trivial and m == n + Fraction(3, 2):
            raise ExcludedSpecialValue("m = n + 3/2 is excluded for quadratic psi* chi-bar")
    elif inp.sign == "-":
        if not 2 * n + 1 - k + mu <= m <= n:
            raise NotSpecialValue(f"m = {m} outside [{2 * n + 1 - k + mu}, {n}]")
        # membership in the minus set: (m + k - mu - 1)/2 integral, so beta is an integer
        parity_ok = (mm + kk - mu) % 2 == 0
    else:
        raise ValueError("sign must be '+' or '-'")
    if not parity_ok:
        return InterpolationResult(CycloNumber.rational(0), "excluded-parity", {}, None)
    factors = interpolation_factors(inp)
    value = CycloNumber.rational(1)
    for key in sorted(factors):
        value = value * factors[key]
    v = _factor_valuation_sum(factors, inp) if with_valuation and not value.is_zero() else None
    return InterpolationResult(value, "ok", factors, v)


def _factor_valuation_sum(factors: dict, inp: InterpolationInput):
    """v_p of the product, factor by factor; None when some factor leaves the tame layer.

    Factors that are rational powers (the prefactor, |A|^-e, the p power and
    lambda_0^-l) are valued in closed form, since their roots need not lie in Q_p.
    """
    from .qexp import ExtCoeff
    from .symlat import theta_ideal

    p, n = inp.p, inp.n
    mu = choose_mu(inp.weight2, inp.chi, inp.psi_parity)
    ell = _conductor_exponent(inp.chi.conductor, p)
    closed = {}
    t, _ = theta_ideal(inp.tau)
    tbc = t * Fraction(inp.b) * inp.c
    closed["prefactor"] = (Fraction(n, 2) + mu) * vp(inp.tau.det_twice, p) - n * mu * vp(tbc, p)
    a_det, e = _a_det_and_exponent(inp)
    closed["a_power"] = -e * vp(a_det, p)
    closed["p_power"] = n * ell * (n + 1 - Fraction(inp.weight2, 2) - Fraction(inp.m))
    lam0 = ExtCoeff.coerce(inp.lambda0, p) if inp.lambda0 is not None else inp.sp.lambda0
    lam_v = valuation_cyclo(lam0.cyclo, p)
    if lam_v is not None:
        closed["lambda0_power"] = -ell * (Fraction(lam_v) + Fraction(lam0.sqrtp_exp, 2))
    total = Fraction(0)
    for key, f in factors.items():
        if key in closed and key not in inp.overrides:
            total += closed[key]
            continue
        try:
            v = valuation_cyclo(f, inp.p)
        except WildPartUnsupported:
            return None
        if v is None:
            return None
        total += v
    return total
