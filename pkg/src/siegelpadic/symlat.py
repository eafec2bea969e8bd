"""Half-integral symmetric matrices, GL_n(Z) classes and lattice enumerations."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import BoundTooSmall, NonPositiveDefinite, UnsupportedDegree

Matrix = tuple[tuple, ...]


# small exact matrix helpers ----------------------------------------------

def as_matrix(rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def det(a: Matrix):
    """Exact determinant by cofactor expansion (fine for n <= 4)."""
    n = len(a)
    if n == 0:
        return 1
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = 0
    for j in range(n):
        if a[0][j]:
            minor = tuple(row[:j] + row[j + 1:] for row in a[1:])
            total += (-1) ** j * a[0][j] * det(minor)
    return total


def inverse(a: Matrix) -> Matrix:
    """Inverse over Q by Gauss-Jordan elimination."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(row[n:]) for row in m)


def principal_minors(a: Matrix):
    n = len(a)
    for k in range(1, n + 1):
        for idx in itertools.combinations(range(n), k):
            yield det(tuple(tuple(a[i][j] for j in idx) for i in idx))


def leading_minors(a: Matrix):
    for k in range(1, len(a) + 1):
        yield det(tuple(row[:k] for row in a[:k]))


# the matrix type ----------------------------------------------------------

@dataclass(frozen=True, order=True)
class HalfIntSymMatrix:
    """tau in S^▽, stored as the integer matrix 2*tau."""

    twice: Matrix

    def __post_init__(self):
        t = as_matrix(self.twice)
        n = len(t)
        if any(len(r) != n for r in t):
            raise ValueError("matrix must be square")
        for i in range(n):
            if t[i][i] % 2:
                raise ValueError("2*tau must have even diagonal")
            for j in range(n):
                if t[i][j] != t[j][i]:
                    raise ValueError("matrix must be symmetric")
                if not isinstance(t[i][j], int):
                    if Fraction(t[i][j]).denominator != 1:
                        raise ValueError("2*tau must be integral")
        object.__setattr__(self, "twice", tuple(tuple(int(x) for x in r) for r in t))

    @classmethod
    def from_tau(cls, rows) -> "HalfIntSymMatrix":
        return cls(tuple(tuple(Fraction(x) * 2 for x in r) for r in rows))

    @classmethod
    def zero(cls, n: int) -> "HalfIntSymMatrix":
        return cls(tuple((0,) * n for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.twice)

    @property
    def tau(self) -> Matrix:
        return tuple(tuple(Fraction(x, 2) for x in r) for r in self.twice)

    @cached_property
    def det_twice(self) -> int:
        return det(self.twice)

    def det(self) -> Fraction:
        """|tau| = det(2 tau) / 2^n."""
        return Fraction(self.det_twice, 2 ** self.n)

    def trace(self) -> Fraction:
        return Fraction(sum(self.twice[i][i] for i in range(self.n)), 2)

    def is_psd(self) -> bool:
        # all principal minors; leading ones alone do not decide semidefiniteness
        return all(m >= 0 for m in principal_minors(self.twice))

    def is_pd(self) -> bool:
        return all(m > 0 for m in leading_minors(self.twice))

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.twice)

    def congruent(self, a: Matrix) -> "HalfIntSymMatrix":
        """a^T tau a for an integer matrix a."""
        return HalfIntSymMatrix(mat_mul(mat_mul(transpose(as_matrix(a)), self.twice), as_matrix(a)))

    def __add__(self, other: "HalfIntSymMatrix") -> "HalfIntSymMatrix":
        return HalfIntSymMatrix(tuple(tuple(x + y for x, y in zip(r, s))
                                      for r, s in zip(self.twice, other.twice)))

    def __sub__(self, other: "HalfIntSymMatrix") -> "HalfIntSymMatrix":
        return HalfIntSymMatrix(tuple(tuple(x - y for x, y in zip(r, s))
                                      for r, s in zip(self.twice, other.twice)))

    def scaled(self, factor) -> "HalfIntSymMatrix":
        """factor * tau; raises ValueError if the result leaves S^▽."""
        factor = Fraction(factor)
        rows = tuple(tuple(factor * x for x in r) for r in self.twice)
        if any(x.denominator != 1 for r in rows for x in r):
            raise ValueError(f"{factor} * tau is not half-integral")
        return HalfIntSymMatrix(rows)

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.twice]

    def __repr__(self):
        return f"HalfIntSymMatrix({[list(r) for r in self.twice]})"


def sym_from_rational_twice(rows) -> HalfIntSymMatrix:
    """Build from a rational 2*tau matrix, insisting it is half-integral."""
    rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
    if any(x.denominator != 1 for r in rows for x in r):
        raise ValueError("matrix is not half-integral")
    return HalfIntSymMatrix(rows)


# GL_n(Z) classes -------------------------------------------------------------

@dataclass(frozen=True)
class ReducedClass:
    representative: HalfIntSymMatrix
    aut_count: int
    transform: Matrix  # U with U^T sigma U = representative


def _require_pd(sigma: HalfIntSymMatrix):
    if not sigma.is_pd():
        raise NonPositiveDefinite(f"{sigma} is not positive definite")


def reduce_class(sigma: HalfIntSymMatrix) -> ReducedClass:
    if sigma.n >= 3:
        raise UnsupportedDegree("class reduction is implemented for n <= 2 only")
    _require_pd(sigma)
    if sigma.n == 1:
        return ReducedClass(sigma, 2, identity(1))

    # Binary form a x^2 + b xy + c y^2 of 2*sigma.
    a, b, c = sigma.twice[0][0], 2 * sigma.twice[0][1], sigma.twice[1][1]
    u = ((1, 0), (0, 1))
    while True:
        if c < a:
            a, c = c, a
            u = mat_mul(u, ((0, 1), (1, 0)))
        elif abs(b) > a:
            k = (b + a) // (2 * a)  # nearest integer to b/2a, rounding half down
            b, c = b - 2 * k * a, a * k * k - b * k + c
            u = mat_mul(u, ((1, -k), (0, 1)))
        else:
            break
    if b < 0:
        b = -b
        u = mat_mul(u, ((1, 0), (0, -1)))
    rep = HalfIntSymMatrix(((a, b // 2), (b // 2, c)))
    assert sigma.congruent(u) == rep
    return ReducedClass(rep, _aut_count_2(rep), u)


def _short_vectors(sigma: HalfIntSymMatrix, target_twice: int):
    """Integer x with x^T (2 sigma) x == target_twice (n = 2)."""
    inv = inverse(sigma.twice)
    out = []
    bounds = [math.isqrt(math.floor(target_twice * inv[j][j])) for j in range(2)]
    m = sigma.twice
    for x in range(-bounds[0], bounds[0] + 1):
        for y in range(-bounds[1], bounds[1] + 1):
            if m[0][0] * x * x + 2 * m[0][1] * x * y + m[1][1] * y * y == target_twice:
                out.append((x, y))
    return out


def _aut_count_2(rep: HalfIntSymMatrix) -> int:
    # Columns of an automorphism are vectors of the right length
    # (Cauchy-Schwarz gives the entry bound).
    m = rep.twice
    firsts = _short_vectors(rep, m[0][0])
    seconds = _short_vectors(rep, m[1][1])
    count = 0
    for x in firsts:
        for y in seconds:
            if abs(x[0] * y[1] - x[1] * y[0]) != 1:
                continue
            cross = m[0][0] * x[0] * y[0] + m[0][1] * (x[0] * y[1] + x[1] * y[0]) + m[1][1] * x[1] * y[1]
            if cross == m[0][1]:
                count += 1
    return count


def aut_count_bruteforce(sigma: HalfIntSymMatrix, bound: int) -> int:
    """#{a in GL_n(Z), |entries| <= bound : a^T sigma a = sigma}; test oracle."""
    n = sigma.n
    count = 0
    for entries in itertools.product(range(-bound, bound + 1), repeat=n * n):
        a = tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n))
        if abs(det(a)) == 1 and sigma.congruent(a) == sigma:
            count += 1
    return count


# theta ideal and the V set ---------------------------------------------------

def _rational_gcd(values) -> Fraction:
    values = [Fraction(v) for v in values if v]
    if not values:
        return Fraction(0)
    den = math.lcm(*(v.denominator for v in values))
    num = math.gcd(*(int(v * den) for v in values))
    return Fraction(num, den)


def theta_ideal(tau: HalfIntSymMatrix) -> tuple[int, Matrix]:
    """Generator t of the theta ideal and tau_hat = t (2 tau)^{-1}.

    The values h^T (2tau)^{-1} h generate the fractional ideal g Z, where g is
    the gcd of the diagonal entries and twice the off-diagonal entries of
    (2tau)^{-1}.  Admissible t form the ideal (4/g) Z ∩ Z; we return its
    positive generator, i.e. the maximal admissible ideal.
    """
    _require_pd(tau)
    inv = inverse(tau.twice)
    n = tau.n
    gens = [inv[i][i] for i in range(n)]
    gens += [2 * inv[i][j] for i in range(n) for j in range(i + 1, n)]
    g = _rational_gcd(gens)
    t = (Fraction(4) / g).numerator
    tau_hat = tuple(tuple(t * x for x in row) for row in inv)
    assert all(x.denominator == 1 for r in tau_hat for x in r)
    return t, tuple(tuple(int(x) for x in r) for r in tau_hat)


def theta_ideal_admissible(tau: HalfIntSymMatrix, t) -> bool:
    """Membership test h^T (2tau)^{-1} h ∈ 4 t^{-1} Z on basis vectors and pair sums."""
    inv = inverse(tau.twice)
    n = tau.n
    t = Fraction(t)
    vecs = [tuple(int(i == k) for k in range(n)) for i in range(n)]
    vecs += [tuple(int(k in (i, j)) for k in range(n)) for i in range(n) for j in range(i + 1, n)]
    for h in vecs:
        q = sum(h[i] * inv[i][j] * h[j] for i in range(n) for j in range(n))
        if (q * t / 4).denominator != 1:
            return False
    return True


def _min_eigen_lower_bound(a: Matrix) -> Fraction:
    """det/tr^(n-1) bounds the least eigenvalue of a positive definite matrix from below."""
    n = len(a)
    tr = sum(Fraction(a[i][i]) for i in range(n))
    return Fraction(det(a)) / tr ** (n - 1)


def _ceil_sqrt(x: Fraction) -> int:
    if x <= 0:
        return 0
    r = math.isqrt(math.ceil(x))
    while r * r < x:
        r += 1
    return r


def completeness_bound(trace, scaled_form: Matrix) -> int:
    """Entry bound for x with tr(x^T A x) <= trace, A positive definite."""
    lam = _min_eigen_lower_bound(scaled_form)
    return _ceil_sqrt(Fraction(trace) / lam)


def enumerate_V(varsigma: HalfIntSymMatrix, tau_hat: Matrix, scale, entry_bound: int):
    """Pairs (sigma1, sigma2) with scale*sigma1^T tau_hat sigma1 + sigma2 = varsigma, sigma2 >= 0."""
    scale = Fraction(scale)
    n = varsigma.n
    form = tuple(tuple(scale * x for x in r) for r in tau_hat)
    twice_form = tuple(tuple(2 * x for x in r) for r in form)
    if any(x.denominator != 1 for r in twice_form for x in r) or any(
        twice_form[i][i] % 2 for i in range(n)
    ):
        raise ValueError("scale * tau_hat does not define half-integral values")
    needed = completeness_bound(varsigma.trace(), form)
    if entry_bound < needed:
        raise BoundTooSmall(f"entry bound {entry_bound} < completeness bound {needed}")
    pairs = []
    # only sigma1 within the analytic bound can contribute
    rng = range(-needed, needed + 1)
    for entries in itertools.product(rng, repeat=n * n):
        s1 = tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n))
        img = mat_mul(mat_mul(transpose(s1), twice_form), s1)
        rest = tuple(tuple(varsigma.twice[i][j] - img[i][j] for j in range(n)) for i in range(n))
        s2 = sym_from_rational_twice(rest)
        if s2.is_psd():
            pairs.append((s1, s2))
    return pairs


def enumerate_Splus(n: int, trace_bound) -> list[HalfIntSymMatrix]:
    """All tau in S_+^▽ (semidefinite) with tr(tau) <= trace_bound."""
    bound = math.floor(Fraction(trace_bound))
    if bound < 0:
        return []
    if n == 1:
        return [HalfIntSymMatrix(((2 * a,),)) for a in range(bound + 1)]
    if n != 2:
        raise UnsupportedDegree("enumeration is implemented for n <= 2 only")
    out = []
    for tr in range(bound + 1):
        for a in range(tr + 1):
            c = tr - a
            r = math.isqrt(4 * a * c)
            for b in range(-r, r + 1):
                out.append(HalfIntSymMatrix(((2 * a, b), (b, 2 * c))))
    return out
