import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from siegelpadic.errors import BoundTooSmall, NonPositiveDefinite, UnsupportedDegree
from siegelpadic.symlat import (
    HalfIntSymMatrix,
    aut_count_bruteforce,
    completeness_bound,
    enumerate_Splus,
    enumerate_V,
    reduce_class,
    theta_ideal,
    theta_ideal_admissible,
)


def H(*rows):
    return HalfIntSymMatrix(tuple(tuple(r) for r in rows))


def brute_aut(twice, bound=4):
    # independent count: a^T S a = S over all 2x2 integer a with |entries| <= bound
    count = 0
    for a, b, c, d in itertools.product(range(-bound, bound + 1), repeat=4):
        if abs(a * d - b * c) != 1:
            continue
        s = twice
        # (a^T S a)_{ij}
        cols = ((a, c), (b, d))
        img = [[sum(cols[i][k] * s[k][l] * cols[j][l] for k in range(2) for l in range(2)) for j in range(2)]
               for i in range(2)]
        if img == [list(r) for r in s]:
            count += 1
    return count


def test_halfint_validation():
    with pytest.raises(ValueError):
        H([1])
    with pytest.raises(ValueError):
        H([2, 1], [0, 2])
    assert H([2, 1], [1, 2]).tau[0][1] == Fraction(1, 2)


def test_psd_uses_all_principal_minors():
    # leading minors are (0, 0) but the matrix is not semidefinite
    m = H([0, 0], [0, -2])
    assert not m.is_psd()
    assert H([0, 0], [0, 2]).is_psd()


@pytest.mark.parametrize("twice, aut", [
    ([[6]], 2),
    ([[2, 1], [1, 2]], 12),
    ([[2, 0], [0, 2]], 8),
    ([[2, 0], [0, 4]], 4),
    ([[4, 1], [1, 6]], 2),
])
def test_reduce_class_aut_counts(twice, aut):
    rc = reduce_class(H(*twice))
    assert rc.aut_count == aut
    if len(twice) == 2:
        assert brute_aut(twice) == aut


def test_reduce_class_form_and_errors():
    rc = reduce_class(H([10, 3], [3, 2]))
    r = rc.representative.twice
    assert 0 <= 2 * r[0][1] <= r[0][0] <= r[1][1]
    with pytest.raises(NonPositiveDefinite):
        reduce_class(H([2, 2], [2, 2]))
    with pytest.raises(UnsupportedDegree):
        reduce_class(H([2, 0, 0], [0, 2, 0], [0, 0, 2]))


def test_module_bruteforce_matches_independent_count():
    for twice in ([[2, 1], [1, 2]], [[4, 2], [2, 4]], [[2, 1], [1, 4]]):
        assert aut_count_bruteforce(H(*twice), 3) == brute_aut(twice, 3)


unimodular = st.tuples(*[st.integers(-3, 3)] * 4).filter(lambda e: abs(e[0] * e[3] - e[1] * e[2]) == 1)
binary_pd = st.tuples(st.integers(1, 6), st.integers(-6, 6), st.integers(1, 6)).map(
    lambda t: (2 * t[0], t[1], 2 * t[2])).filter(lambda t: t[0] * t[2] - t[1] ** 2 > 0)


@settings(max_examples=60, deadline=None)
@given(binary_pd, unimodular)
def test_reduction_gl_invariant(form, u):
    a, b, c = form
    sigma = H([a, b], [b, c])
    moved = sigma.congruent(((u[0], u[1]), (u[2], u[3])))
    r1, r2 = reduce_class(sigma), reduce_class(moved)
    assert r1.representative == r2.representative
    assert r1.aut_count == r2.aut_count


@settings(max_examples=40, deadline=None)
@given(binary_pd)
def test_reduction_idempotent(form):
    a, b, c = form
    rep = reduce_class(H([a, b], [b, c])).representative
    again = reduce_class(rep)
    assert again.representative == rep
    assert again.transform == ((1, 0), (0, 1))


@pytest.mark.parametrize("twice, t, hat", [
    ([[2]], 8, ((4,),)),
    ([[4]], 16, ((4,),)),
    ([[2, 0], [0, 2]], 8, ((4, 0), (0, 4))),
])
def test_theta_ideal_examples(twice, t, hat):
    assert theta_ideal(H(*twice)) == (t, hat)


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return sorted(set(out))


@settings(max_examples=60, deadline=None)
@given(binary_pd)
def test_theta_ideal_is_generator(form):
    a, b, c = form
    tau = H([a, b], [b, c])
    t, hat = theta_ideal(tau)
    assert theta_ideal_admissible(tau, t)
    # no proper divisor of t works, so t generates the admissible ideal
    for q in _prime_factors(t):
        assert not theta_ideal_admissible(tau, Fraction(t, q))
    det = a * c - b * b
    assert all(Fraction(x) == Fraction(t) * y for x, y in zip(
        (hat[0][0], hat[0][1], hat[1][1]), (Fraction(c, det), Fraction(-b, det), Fraction(a, det))))


def test_enumerate_v_examples():
    pairs = enumerate_V(H([16]), ((4,),), 2, 3)
    assert sorted((s1[0][0], s2.twice[0][0]) for s1, s2 in pairs) == [(-1, 0), (0, 16), (1, 0)]
    assert [(s1[0][0], s2.twice) for s1, s2 in enumerate_V(H([2]), ((4,),), 2, 3)] == [(0, ((2,),))]
    with pytest.raises(BoundTooSmall):
        enumerate_V(H([64]), ((4,),), 2, 1)


@settings(max_examples=30, deadline=None)
@given(binary_pd, st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2)]))
def test_enumerate_v_complete(form, scale):
    a, b, c = form
    sig = H([a, b], [b, c])
    hat = ((4, 0), (0, 4))
    need = completeness_bound(sig.trace(), tuple(tuple(scale * x for x in r) for r in hat))
    pairs = enumerate_V(sig, hat, scale, need)
    assert (((0, 0), (0, 0)), sig) in pairs
    # brute force over a strictly larger box
    expect = set()
    for e in itertools.product(range(-need - 1, need + 2), repeat=4):
        s1 = ((e[0], e[1]), (e[2], e[3]))
        img = [[2 * scale * sum(s1[k][i] * hat[k][l] * s1[l][j] for k in range(2) for l in range(2))
                for j in range(2)] for i in range(2)]
        rest = [[sig.twice[i][j] - img[i][j] for j in range(2)] for i in range(2)]
        if rest[0][0] >= 0 and rest[1][1] >= 0 and rest[0][0] * rest[1][1] - rest[0][1] ** 2 >= 0:
            if all(Fraction(x).denominator == 1 for r in rest for x in r) and rest[0][0] % 2 == 0 == rest[1][1] % 2:
                expect.add((s1, tuple(tuple(int(x) for x in r) for r in rest)))
    assert {(s1, s2.twice) for s1, s2 in pairs} == expect


def test_enumerate_splus():
    assert [m.twice for m in enumerate_Splus(1, 2)] == [((0,),), ((2,),), ((4,),)]
    two = {m.twice for m in enumerate_Splus(2, 1)}
    assert {((0, 0), (0, 0)), ((2, 0), (0, 0)), ((0, 0), (0, 2))} <= two
    assert all(HalfIntSymMatrix(t).is_psd() for t in two)
    assert ((2, 1), (1, 2)) in {m.twice for m in enumerate_Splus(2, 2)}
    assert enumerate_Splus(2, 3) == enumerate_Splus(2, 3)
    with pytest.raises(UnsupportedDegree):
        enumerate_Splus(3, 1)
