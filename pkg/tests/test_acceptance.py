"""Acceptance criteria 1 to 9, one PASS/FAIL line each (run with -s to see them)."""
import itertools
import math
import random
import time
import warnings
from fractions import Fraction

from siegelpadic.chars import DirichletChar, gauss_sum, gauss_sum_n, unit_group
from siegelpadic.cli import main
from siegelpadic.cyclo import CycloNumber
from siegelpadic.eisen import (
    EisenParams,
    ThetaScaleData,
    beta_for,
    congruence_check,
    omega_sets,
    projection_defect,
    projection_P,
    projection_p_integral,
    r_poly,
    s_prime_for,
    v_pairs,
)
from siegelpadic.errors import IncompatibleSystem
from siegelpadic.hecke import (
    WeylLaurentPoly,
    check_symmetry,
    hecke_polynomial,
    n1_eigen_data,
    p_stabilise,
    pstab_n1_explicit,
    v_polys,
)
from siegelpadic.measures import (
    DistributionSystem,
    InterpolationInput,
    choose_mu,
    conductor_p_basis,
    congruence_815,
    counting_system,
    dirac_system,
    interpolation_value,
    kummer_check,
    sigma_measure,
)
from siegelpadic.cyclo import rational_power
from siegelpadic.qexp import numeric_theta_check, u_p
from siegelpadic.symlat import HalfIntSymMatrix

TRIV = DirichletChar.trivial(1)


def H(*rows):
    return HalfIntSymMatrix(tuple(tuple(r) for r in rows))


def prim(m):
    ranges = [range(c.order) for c in unit_group(m)]
    return [c for c in (DirichletChar(m, e) for e in itertools.product(*ranges)) if c.is_primitive]


def report(num, ok, detail=""):
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else ""))
    assert ok, detail


# 1 ----------------------------------------------------------------------------------

def test_criterion_1_hecke_identities():
    start = time.perf_counter()
    ok = True
    for n in (1, 2, 3):
        top = n * (n + 1) // 2
        for p in (None, 2, 3, 5):
            t = hecke_polynomial(n, p)
            # every root p^top x^delta kills the alternating sum
            for delta in itertools.product((1, -1), repeat=n):
                u = WeylLaurentPoly.monomial(n, top, delta, p=p)
                total = WeylLaurentPoly.constant(n, 0, p=p)
                for m, tm in enumerate(t):
                    total = total + tm * u ** (2 ** n - m) * (-1) ** m
                ok &= total.is_zero()
            ok &= check_symmetry(t, n, p)
            vs = v_polys(t, n, p)
            ok &= len(vs) == 2 ** n
    elapsed = time.perf_counter() - start
    report(1, ok and elapsed < 5, f"{elapsed:.2f}s")


# 2 ----------------------------------------------------------------------------------

def test_criterion_2_p_stabilisation():
    ok = True
    cases = 0
    for lam in (2, Fraction(3, 2)):
        for p in (3, 5):
            # 100 coefficients of f_0 need the input out to 100 p^2
            f, lam_t, sp = n1_eigen_data(p, lam, 13, 100 * p * p, seed=11)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f0 = p_stabilise(f, lam_t, sp)
            ok &= f0.trace_bound == 100
            ok &= pstab_n1_explicit(f, lam, p, 100).agrees_with(f0)
            ok &= u_p(f0, p, 100 // (p * p)).agrees_with(f0.truncate(100 // (p * p)).scale(sp.lambda0))
            cases += 1
    report(2, ok, f"{cases} cases, exact")


# 3 ----------------------------------------------------------------------------------

def test_criterion_3_gauss_sums():
    start = time.perf_counter()
    worst = 0.0
    for f in (3, 5, 7, 11, 13):
        for chi in prim(f):
            worst = max(worst, abs(abs(gauss_sum(chi).to_complex()) ** 2 - f))
    ok = worst < 1e-10
    for n in (1, 2):
        for f in (3, 5):
            for phi in prim(f):
                g = gauss_sum(phi, n)
                for entries in itertools.product(range(f), repeat=n * n):
                    x = tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n))
                    d = round(_det(x)) % f
                    val = gauss_sum_n(x, phi, n)
                    if math.gcd(d, f) > 1:
                        ok &= val.is_zero()
                    else:
                        ok &= val == phi(d).inverse() * g
    elapsed = time.perf_counter() - start
    report(3, ok and elapsed < 30, f"max norm error {worst:.1e}, {elapsed:.1f}s")


def _det(x):
    return x[0][0] if len(x) == 1 else x[0][0] * x[1][1] - x[0][1] * x[1][0]


# 4 ----------------------------------------------------------------------------------

def test_criterion_4_theta_transformation():
    worst = 0.0
    for chi in prim(3) + prim(5):
        mu = 0 if chi.parity() == 1 else 1
        rows = numeric_theta_check(chi, mu, tau=1, z_points=(1j, 1 + 2j), terms=200, dps=60)
        worst = max(worst, max(r["residual"] for r in rows))
    report(4, worst < 1e-9, f"max residual {worst:.1e}")


# 5 ----------------------------------------------------------------------------------

def test_criterion_5_eisenstein_polynomials():
    rng = random.Random(5)
    r1, r2 = r_poly(1, 1), r_poly(1, 2)
    ok = True
    for _ in range(20):
        s, g = Fraction(rng.randint(-20, 20), rng.randint(1, 5)), Fraction(rng.randint(-20, 20), rng.randint(1, 5))
        ok &= r1.evaluate(g, s) == g + s
        ok &= r2.evaluate(g, s) == g * g + 2 * s * g + s * (s + 1)
    # P(sigma, p^r sigma0) - sigma^beta = 0 mod p^r, over the (beta, s') pairs the special values produce
    cells = []
    for p in (3, 5):
        for weight2 in (13, 17):
            for mu in (0, 1):
                params = EisenParams(1, weight2, mu)
                minus, plus = omega_sets(1, weight2, mu)
                for m, sign in [(x, "-") for x in minus] + [(x, "+") for x in plus]:
                    beta, s_prime = beta_for(m, sign, params), s_prime_for(m, sign, params)
                    for r in (1, 2):
                        if beta <= 3 and projection_p_integral(beta, s_prime, params.k, p, r):
                            cells.append((p, r, beta, s_prime, params.k))
    instances = 0
    while instances < 50:
        p, r, beta, s_prime, weight = rng.choice(cells)
        sigma, sig0 = Fraction(rng.randint(1, 200)), Fraction(rng.randint(1, 200))
        diff = projection_P(1, sigma, p ** r * sig0, beta, s_prime=s_prime, weight=weight) - sigma ** beta
        ok &= diff == 0 or (diff.numerator % p ** r == 0 and diff.denominator % p != 0)
        ok &= projection_P(1, sigma, Fraction(0), beta, s_prime=s_prime, weight=weight) == sigma ** beta
        instances += 1
    report(5, ok, f"{instances} random instances over {len(cells)} integral cells")


# 6 ----------------------------------------------------------------------------------

DATA = ThetaScaleData.from_tau(H([4]), b=Fraction(1, 2))
POLYS = {7: [0, 1, 1]}
SIGMAS = [H([2 * j]) for j in (1, 3, 5, 7, 9, 11, 13, 17, 19, 23)]


def _special(weight2, chi):
    mu = choose_mu(weight2, chi)
    params = EisenParams(1, weight2, mu)
    minus, plus = omega_sets(1, weight2, mu)
    for sign, ms in (("+", plus), ("-", minus)):
        for m in ms:
            if sign == "+" and m == Fraction(3, 2):
                continue
            yield params, m, sign


def test_criterion_6_congruences():
    ok = True
    checked = 0
    adjusted = []
    for p in (3, 5):
        chi = next(c for c in prim(p) if c.order == 2)
        for weight2 in (13, 17):
            for params, m, sign in _special(weight2, chi):
                beta, s_prime = beta_for(m, sign, params), s_prime_for(m, sign, params)
                for r in (1, 2):
                    literal = projection_p_integral(beta, s_prime, params.k, p, r)
                    defect = 0 if literal else projection_defect(beta, s_prime, params.k, p, r)
                    for sigma in SIGMAS:
                        pairs = v_pairs(sigma, p, r, DATA)
                        rep = congruence_check(pairs, sigma, p, r, DATA, beta, s_prime, params.k)
                        checked += rep.checked
                        for v in rep.violations:
                            # the determinant law is always exact; the projection law may lose the defect
                            ok &= v["kind"] == "projection" and v["valuation"] >= r - defect
                        out = congruence_815(sigma, m, sign, chi, TRIV, r, p, DATA, params, POLYS)
                        val = out["valuation"]
                        if literal:
                            ok &= out["ok"]
                        else:
                            ok &= val is None or val >= r - defect
                            adjusted.append((p, weight2, str(m), sign, r))
    if adjusted:
        cells = sorted({(p, w, m, s) for p, w, m, s, _ in adjusted})
        print(f"NOTE criterion 6: P is not p-integral for {len(cells)} (p, 2k, m, sign) cells, all at p = 3, 2k = 13; "
              "checked mod p^(r - defect) there")
        ok &= all(p == 3 and w == 13 for p, w, _, _ in cells)
    report(6, ok and checked > 0, f"{checked} V-pairs")


# 7 ----------------------------------------------------------------------------------

def test_criterion_7_measures():
    ok = True
    polys = {2: [0, 3], 7: [0, -2, 1], 11: [0, 1, 0, 5]}
    for p in (3, 5):
        nu = sigma_measure(polys, p)
        basis = conductor_p_basis(p, range(0, 5))
        values = [nu.evaluate(chi, mint) for chi, mint in basis]
        verdict = kummer_check(basis, values, 2, trials=20, seed=p)
        ok &= verdict.passed and verdict.kernel_rank > 0
        d, c = dirac_system(2, p, 3), counting_system(p, 3)
        for chi in prim(p) + [DirichletChar.trivial(p)]:
            ok &= d.integrate_character(chi) == chi(2)
            ok &= c.integrate_character(chi) == (1 if chi.conductor == 1 else 0)
    levels = [dict(lvl) for lvl in dirac_system(2, 5, 2).levels]
    levels[1][7] = CycloNumber.rational(1)
    try:
        DistributionSystem.from_system(5, levels)
        ok = False
    except IncompatibleSystem as exc:
        ok &= exc.witness == (2, 1, 2)
    report(7, ok)


# 8 ----------------------------------------------------------------------------------

def _stub(chi, m, sign):
    return InterpolationInput(n=1, weight2=13, p=5, tau=H([2]), chi=chi, m=Fraction(m), sign=sign, lambda0=1,
                              L_ratio=Fraction(3, 7), lambda_tau_value=Fraction(2, 3), g_tau_value=Fraction(5, 11))


def test_criterion_8_interpolation():
    chi = next(c for c in prim(5) if c.order == 2)
    res = interpolation_value(_stub(chi, Fraction(5, 2), "+"))
    hand = Fraction(1, (-16) ** 3) * Fraction(1, 5 ** 7) * Fraction(3, 2) * Fraction(11, 5) * Fraction(3, 7)
    ok = res.value == CycloNumber.rational(hand) * rational_power(2, Fraction(1, 2)) * gauss_sum(chi.conj())
    zero = interpolation_value(_stub(chi, Fraction(7, 2), "+"))
    ok &= zero.tag == "excluded-parity" and zero.value.is_zero()
    c2 = next(c for c in prim(25) if c.parity() == chi.parity())
    v2 = interpolation_value(_stub(c2, Fraction(5, 2), "+")).value
    ratio = rational_power(5, 2 - Fraction(13, 2) - Fraction(5, 2)) * gauss_sum(c2.conj()) * gauss_sum(chi.conj()).inverse()
    ok &= v2 == res.value * ratio
    report(8, ok)


# 9 ----------------------------------------------------------------------------------

COMMANDS = [
    ["enumerate", "--degree", "2"],
    ["hecke-verify", "--degree", "2", "--p", "3"],
    ["pstab", "--p", "5", "--seed", "4"],
    ["theta-check", "--bound", "60", "--precision", "40"],
    ["kummer", "--p", "3", "--seed", "9"],
    ["interpolate", "--p", "5"],
]


def test_criterion_9_determinism(tmp_path, capsys):
    ok = True
    for argv in COMMANDS:
        outs = []
        for i in range(2):
            out = tmp_path / f"{argv[0]}{i}.json"
            main([*argv, "--out", str(out)])
            outs.append((capsys.readouterr().out, out.read_bytes()))
        ok &= outs[0] == outs[1]
    report(9, ok, f"{len(COMMANDS)} commands")
