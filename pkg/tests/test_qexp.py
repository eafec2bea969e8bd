import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from siegelpadic.chars import DirichletChar, gauss_sum, unit_group
from siegelpadic.cyclo import CycloNumber, rational_power, sqrt_prime
from siegelpadic.errors import (
    DegreeMismatch,
    InsufficientTruncation,
    IrrationalExponent,
    LoadError,
    ParityMismatch,
)
from siegelpadic.qexp import (
    ExtCoeff,
    FourierExpansion,
    expansion_n1,
    multiply,
    n1_coefficients,
    numeric_theta_check,
    rankin_dirichlet,
    theta_series,
    theta_transform_data,
    theta_transform_rhs,
    twist_n1,
    u_p,
    v_shift,
)
from siegelpadic.symlat import HalfIntSymMatrix


def prim(m):
    ranges = [range(c.order) for c in unit_group(m)]
    return [c for c in (DirichletChar(m, e) for e in itertools.product(*ranges)) if c.is_primitive]


def quad(p):
    return next(c for c in prim(p) if c.order == 2)


def coeffs_n1(f):
    return {m: v.to_cyclo() for m, v in sorted(n1_coefficients(f).items())}


TRIV = DirichletChar.trivial(1)
ONE = HalfIntSymMatrix(((2,),))


def test_theta_trivial():
    th = theta_series(ONE, TRIV, 0, trace_bound=10)
    assert coeffs_n1(th) == {0: 1, 1: 2, 4: 2, 9: 2}
    assert th.weight2 == 1


def test_theta_odd_character():
    # the quadratic character mod 5 is even, so mu = 1 is refused
    with pytest.raises(ParityMismatch):
        theta_series(ONE, quad(5), 1, trace_bound=10)
    th = theta_series(ONE, quad(3), 1, trace_bound=20)
    assert coeffs_n1(th) == {1: 2, 4: -4, 16: 8}
    with pytest.raises(ParityMismatch):
        theta_series(ONE, TRIV, 1, trace_bound=4)


def test_theta_degree_two_counts():
    th = theta_series(HalfIntSymMatrix(((2, 0), (0, 2))), TRIV, 0, trace_bound=2)
    # x^T x = I: signed permutation matrices
    assert th.coeff(HalfIntSymMatrix(((2, 0), (0, 2)))).to_cyclo() == 8
    # x^T x = diag(1, 0): first column a unit vector, second zero
    assert th.coeff(HalfIntSymMatrix(((2, 0), (0, 0)))).to_cyclo() == 4
    assert th.weight2 == 2


def r2(n):
    return sum(1 for a in range(-5, 6) for b in range(-5, 6) if a * a + b * b == n)


def test_theta_squared_counts_two_squares():
    th = theta_series(ONE, TRIV, 0, trace_bound=12)
    sq = multiply(th, th)
    assert coeffs_n1(sq) == {n: r2(n) for n in range(13) if r2(n)}
    assert [coeffs_n1(sq).get(n, 0) for n in range(5)] == [1, 4, 4, 0, 4]


def test_u_p_example():
    f = expansion_n1({9: 5}, 13, 9, p=3)
    out = u_p(f, 3)
    c = out.coeff(HalfIntSymMatrix(((2,),)))
    assert c.cyclo == 5 and c.sqrtp_exp == -9
    assert out.trace_bound == 1
    with pytest.raises(InsufficientTruncation):
        u_p(f, 3, trace_bound=2)
    assert not u_p(expansion_n1({}, 13, 9, p=3), 3).coeffs


def ext(v):
    return ExtCoeff.coerce(v, 3)


rand_n1 = st.dictionaries(st.integers(0, 40), st.integers(-9, 9), max_size=12)


@settings(max_examples=40, deadline=None)
@given(rand_n1, rand_n1)
def test_u_p_linear_and_composes(a, b):
    f = expansion_n1(a, 13, 40, p=3)
    g = expansion_n1(b, 13, 40, p=3)
    assert u_p(f + g, 3).agrees_with(u_p(f, 3) + u_p(g, 3))
    twice = u_p(u_p(expansion_n1(a, 13, 81 * 4, p=3), 3), 3)
    for m, v in n1_coefficients(twice).items():
        assert v == ext(a.get(81 * m, 0)) * ExtCoeff(CycloNumber.rational(1), 2 * (4 - 13), 3)


def test_v_shift_examples():
    g = expansion_n1({0: 1, 1: 2}, 1, 1, p=2)
    out = v_shift(g, 2)
    assert out.coeff(HalfIntSymMatrix(((8,),))) == ExtCoeff(CycloNumber.rational(2), 1, 2)
    assert out.coeff(HalfIntSymMatrix(((0,),))).to_cyclo() == sqrt_prime(2)
    assert v_shift(g, 1).agrees_with(g)
    with pytest.raises(ValueError):
        v_shift(expansion_n1({1: 1}, 1, 1, p=2), 3)


@settings(max_examples=30, deadline=None)
@given(rand_n1)
def test_u_p_undoes_v_shift(a):
    p = 3
    g = expansion_n1(a, 13, 40, p=p)
    back = u_p(v_shift(g, p), p)
    factor = ExtCoeff(CycloNumber.rational(1), 2 * 2 - 13 + 13, p)  # p^{n(n+1-k)} p^{n l}
    assert back.agrees_with(g.scale(factor))


@settings(max_examples=30, deadline=None)
@given(rand_n1, rand_n1, rand_n1)
def test_multiply_commutative_associative(a, b, c):
    f, g, h = (expansion_n1(x, 1, 40) for x in (a, b, c))
    assert multiply(f, g).agrees_with(multiply(g, f))
    assert multiply(multiply(f, g), h).agrees_with(multiply(f, multiply(g, h)))
    one = expansion_n1({0: 1}, 0, 40)
    assert multiply(f, one).agrees_with(f)


def test_multiply_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        multiply(expansion_n1({0: 1}, 1, 2), theta_series(HalfIntSymMatrix(((2, 0), (0, 2))), TRIV, 0, trace_bound=1))


def test_twist_examples():
    f = expansion_n1({0: 1, 1: 2, 4: 2}, 1, 4)
    assert coeffs_n1(twist_n1(f, quad(5))) == {1: 2, 4: 2}
    assert twist_n1(f, TRIV).agrees_with(f)
    g = expansion_n1({m: m + 1 for m in range(12)}, 1, 12)
    q = quad(5)
    twice = twist_n1(twist_n1(g, q), q)
    assert coeffs_n1(twice) == {m: m + 1 for m in range(12) if m % 5}


def test_rankin_examples():
    f = expansion_n1({0: 1, 1: 2}, 1, 1)
    assert rankin_dirichlet(f, f, 0, 1).to_cyclo() == 2
    with pytest.raises(IrrationalExponent):
        rankin_dirichlet(expansion_n1({2: 1}, 1, 2), expansion_n1({2: 1}, 1, 2), Fraction(1, 2), 2)


def test_rankin_reduction_independent():
    s1 = HalfIntSymMatrix(((2, 1), (1, 4)))
    s2 = HalfIntSymMatrix(((4, 0), (0, 4)))
    base = {s1: ExtCoeff.coerce(3), s2: ExtCoeff.coerce(-1)}
    a = ((2, 1), (1, 1))
    moved = {s.congruent(a): v for s, v in base.items()}
    f = FourierExpansion(2, 2, base, 6)
    g = FourierExpansion(2, 2, moved, 6)
    assert rankin_dirichlet(f, f, 2, 6) == rankin_dirichlet(g, g, 2, 6)


def test_expansion_json_roundtrip():
    f = theta_series(ONE, quad(3), 1, trace_bound=20, p=3)
    again = FourierExpansion.from_json(f.to_json())
    assert again.agrees_with(f) and again.dumps() == f.dumps()
    with pytest.raises(LoadError):
        FourierExpansion.from_json({"degree": 1})
    with pytest.raises(InsufficientTruncation):
        f.coeff(HalfIntSymMatrix(((50,),)))


@pytest.mark.parametrize("chi", prim(3) + prim(5), ids=lambda c: c.tag())
def test_theta_transformation_residuals(chi):
    mu = 0 if chi.parity() == 1 else 1
    rows = numeric_theta_check(chi, mu, tau=1, z_points=(1j, 1 + 2j), terms=200, dps=60)
    assert all(r["residual"] < 1e-9 for r in rows)


def test_theta_constant_degree_one():
    chi = prim(5)[0]
    data = theta_transform_data(ONE, chi, 1)
    tbc = 8
    expected = (CycloNumber.rational(chi.parity()) * rational_power(tbc, Fraction(3, 2))
                / rational_power(2, Fraction(3, 2)) * gauss_sum(chi.conj()))
    assert data.constant == ExtCoeff(expected, -1, 5)
    assert (data.t, data.tau_hat, data.scale, data.y) == (8, ((4,),), 4, 40)


@pytest.mark.parametrize("cond, z", [(3, 0.3 + 0.05j), (5, 0.03j), (5, 0.2 + 0.1j)])
def test_theta_transformation_against_expansion(cond, z):
    # oracle: left side summed directly here, right side from the exact expansion
    chi = prim(cond)[0]
    mu = 0 if chi.parity() == 1 else 1
    rhs_exp = theta_transform_rhs(ONE, chi, mu, trace_bound=3000)
    data = theta_transform_data(ONE, chi, mu)
    with mpmath.workdps(50):
        z = mpmath.mpc(z)
        y = mpmath.mpf(data.y.numerator) / data.y.denominator
        w = -1 / (y * y * z)
        lhs = mpmath.fsum(
            (chi.conj()(x).to_mpc() if x else 0) * x ** mu * mpmath.expjpi(2 * x * x * w)
            for x in range(-600, 601)
        ) / (mpmath.sqrt(-1j * y * z) * (y * z) ** mu)
        rhs = mpmath.fsum(v.to_mpc() * mpmath.expjpi(t.twice[0][0] * z) for t, v in rhs_exp.coeffs.items())
        assert abs(lhs - rhs) <= mpmath.mpf(10) ** -25 * abs(rhs)
