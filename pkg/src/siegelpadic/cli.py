"""Batch command-line front end.

Every command prints a plain-text table and writes the same data as JSON
(the JSON is the contract; the table is a view).  Exit codes:

    0  success
    2  unsupported degree
    3  p divides the level
    4  a verification failed
    5  input could not be loaded
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

from . import errors
from .chars import DirichletChar
from .cyclo import CycloNumber
from .padic import embed_cyclo

EXIT_OK, EXIT_DEGREE, EXIT_PLEVEL, EXIT_CHECK, EXIT_LOAD = 0, 2, 3, 4, 5


class Report:
    """Rows for the table plus a JSON payload."""

    def __init__(self, command: str, header: list[str]):
        self.command = command
        self.header = header
        self.rows: list[list[str]] = []
        self.data: dict = {"command": command}
        self.notes: list[str] = []
        self.failed = False

    def add(self, *cells):
        self.rows.append([str(c) for c in cells])

    def table(self) -> str:
        widths = [len(h) for h in self.header]
        for r in self.rows:
            widths = [max(w, len(c)) for w, c in zip(widths, r)]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*self.header), fmt.format(*["-" * w for w in widths])]
        lines += [fmt.format(*r) for r in self.rows]
        lines += self.notes
        return "\n".join(lines)


def _primitive_chars(conductor: int) -> list[DirichletChar]:
    import itertools

    from .chars import unit_group

    if conductor == 1:
        return []
    ranges = [range(comp.order) for comp in unit_group(conductor)]
    chars = (DirichletChar(conductor, exps) for exps in itertools.product(*ranges))
    return [chi for chi in chars if chi.is_primitive]


# commands ------------------------------------------------------------------------

def cmd_enumerate(args) -> Report:
    from .symlat import enumerate_Splus, reduce_class

    rep = Report("enumerate", ["2tau", "trace", "pd", "aut_count"])
    items = []
    for tau in enumerate_Splus(args.degree, Fraction(args.bound)):
        aut = reduce_class(tau).aut_count if tau.is_pd() else None
        rep.add(tau.to_json(), tau.trace(), tau.is_pd(), "-" if aut is None else aut)
        items.append({"tau_twice": tau.to_json(), "aut_count": aut})
    rep.data.update({"degree": args.degree, "bound": args.bound, "matrices": items})
    return rep


def cmd_hecke_verify(args) -> Report:
    from .hecke import check_symmetry, hecke_polynomial, v_polys

    n = args.degree
    rep = Report("hecke-verify", ["p", "identity", "result"])
    modes = [None] if args.p is None else [args.p]
    checks = []
    for p in modes:
        label = "symbolic" if p is None else str(p)
        t_list = hecke_polynomial(n, p)
        sym = check_symmetry(t_list, n, p)
        try:
            vs = v_polys(t_list, n, p)
            fact = True
        except errors.FactorisationFailed:
            vs, fact = [], False
        weyl = all(t.is_weyl_invariant() for t in t_list)
        for name, ok in (("weyl-invariance", weyl), ("symmetry", sym), ("vanishing sum and factorisation", fact)):
            rep.add(label, name, "PASS" if ok else "FAIL")
            checks.append({"p": label, "identity": name, "ok": ok})
        rep.notes.append(f"[{label}] T~ terms per degree: {[len(t.terms) for t in t_list]}")
        for i, v in enumerate(vs, start=1):
            rep.notes.append(f"[{label}] V~_{i} = {v!r}")
    rep.data.update({"degree": n, "checks": checks})
    rep.failed = not all(c["ok"] for c in checks)
    return rep


def _eigen_inputs(args):
    from .hecke import load_eigen_data, n1_eigen_data
    from .qexp import FourierExpansion

    if args.inputs:
        if len(args.inputs) != 2:
            raise errors.LoadError("pstab takes a form file and an eigen-data file")
        try:
            with open(args.inputs[0]) as fh:
                f = FourierExpansion.from_json(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise errors.LoadError(str(exc)) from exc
        sp, lam_t = load_eigen_data(args.inputs[1])
        if f.n != sp.n:
            raise errors.DegreeMismatch("form and eigen-data degrees differ")
        return f, lam_t, sp
    if args.p is None:
        raise errors.LoadError("--p is required without input files")
    lam = Fraction(args.lam)
    bound = args.bound * args.p ** 2
    return n1_eigen_data(args.p, lam, args.weight2, bound, seed=args.seed)


def cmd_pstab(args) -> Report:
    from .hecke import p_stabilise, pstab_n1_explicit
    from .qexp import u_p

    f, lam_t, sp = _eigen_inputs(args)
    if f.n != 1 and args.inputs is None:
        raise errors.UnsupportedDegree("synthetic data is degree one only")
    if f.n > 3:
        raise errors.UnsupportedDegree(f"degree {f.n}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        f0 = p_stabilise(f, lam_t, sp)
    rep = Report("pstab", ["2tau", "c_f0"])
    for tau, v in f0.sorted_items():
        rep.add(tau.to_json(), v)
    bound = Fraction(int(f0.trace_bound) // sp.p ** 2)
    lhs = u_p(f0, sp.p, bound)
    rhs = f0.truncate(bound).scale(sp.lambda0)
    eigen_ok = lhs.agrees_with(rhs, bound)
    explicit_ok = None
    if f.n == 1:
        explicit_ok = pstab_n1_explicit(f, sp.lambdas[0], sp.p, f0.trace_bound).agrees_with(f0)
    all_zero = not f0.coeffs
    rep.notes.append(f"U_p eigen check (lambda_0 = {sp.lambda0}): {'PASS' if eigen_ok else 'FAIL'}")
    if explicit_ok is not None:
        rep.notes.append(f"degree-one explicit form: {'PASS' if explicit_ok else 'FAIL'}")
    if all_zero:
        rep.notes.append("WARNING: every computed coefficient of f_0 vanishes")
    rep.notes += [f"warning: {w.message}" for w in caught]
    rep.data.update({
        "p": sp.p, "lambda0": sp.lambda0.to_json(), "ordinary": sp.is_ordinary,
        "f0": f0.to_json(), "eigen_check": eigen_ok, "explicit_check": explicit_ok,
        "all_zero": all_zero,
    })
    rep.failed = not eigen_ok or explicit_ok is False
    return rep


def _parse_complex(s: str) -> complex:
    return complex(s.replace(" ", "").replace("i", "j"))


def cmd_theta_check(args) -> Report:
    from .qexp import numeric_theta_check

    if args.degree != 1:
        raise errors.UnsupportedDegree("the numeric check is degree one only")
    rep = Report("theta-check", ["chi", "mu", "z", "residual", "relative"])
    rows = []
    worst = 0.0
    for cond in args.conductors:
        for chi in _primitive_chars(cond):
            mu = 0 if chi.parity() == 1 else 1
            res = numeric_theta_check(chi, mu, tau=args.tau, z_points=[_parse_complex(z) for z in args.z],
                                      terms=args.bound, dps=args.precision)
            for r in res:
                worst = max(worst, r["residual"])
                rep.add(chi.tag(), mu, f"{r['z']}", f"{r['residual']:.3e}", f"{r['relative']:.3e}")
                rows.append({"chi": chi.to_json(), "mu": mu, "z": [r["z"].real, r["z"].imag],
                             "residual": r["residual"], "relative": r["relative"]})
    ok = worst < 1e-9
    rep.notes.append(f"max residual {worst:.3e}: {'PASS' if ok else 'FAIL'}")
    rep.data.update({"tau": args.tau, "terms": args.bound, "rows": rows, "pass": ok})
    rep.failed = not ok
    return rep


DEFAULT_LOCAL_POLYS = {2: [0, 1], 7: [0, 1, 3]}


def cmd_kummer(args) -> Report:
    from .eisen import load_local_polys
    from .measures import conductor_p_basis, kummer_check, sigma_measure

    if args.degree != 1:
        raise errors.UnsupportedDegree("the built-in measures are degree one")
    if args.level > 1:
        raise errors.UnsupportedDegree("only the conductor-p family embeds into Z_p")
    polys = load_local_polys(args.inputs[0], "f") if args.inputs else dict(DEFAULT_LOCAL_POLYS)
    measure = sigma_measure(polys, args.p, args.degree)
    basis = conductor_p_basis(args.p, range(args.bound + 1))
    values = [measure.evaluate(chi, m) for chi, m in basis]
    verdict = kummer_check(basis, values, args.precision, trials=8, seed=args.seed)
    rep = Report("kummer", ["chi", "[m]", "value"])
    for (chi, m), v in zip(basis, values):
        rep.add(chi.tag(), m, v)
    rep.notes.append(f"kernel generators: {verdict.kernel_rank}")
    rep.notes.append(f"Kummer check mod {args.p}^{args.precision}: {'PASS' if verdict.passed else 'FAIL'}"
                     + (f" ({verdict.note})" if verdict.note else ""))
    rep.data.update({"p": args.p, "local_polys": {str(q): [str(c) for c in v] for q, v in sorted(polys.items())},
                     "verdict": verdict.to_json(),
                     "measure": measure.system(args.precision + 1).to_json()})
    rep.failed = not verdict.passed
    return rep


def _interp_config(args) -> dict:
    cfg = {"weight2": args.weight2, "tau_twice": [[4]], "b": "1", "c": 1, "lambda0": args.lam,
           "L_ratio": "1", "g_polys": {}}
    if args.inputs:
        try:
            with open(args.inputs[0]) as fh:
                cfg.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise errors.LoadError(str(exc)) from exc
    return cfg


def cmd_interpolate(args) -> Report:
    from .eisen import validate_local_polys
    from .hecke import parse_value
    from .measures import InterpolationInput, choose_mu, g_tau, interpolation_value, lambda_tau
    from .symlat import HalfIntSymMatrix, theta_ideal

    if args.degree != 1:
        raise errors.UnsupportedDegree("interpolation tables are built for degree one")
    p = args.p
    cfg = _interp_config(args)
    try:
        tau = HalfIntSymMatrix(cfg["tau_twice"])
        weight2 = int(cfg["weight2"])
        lam0 = parse_value(cfg["lambda0"], p)
        L_ratio = parse_value(cfg["L_ratio"], p).to_cyclo()
        b, c = Fraction(cfg["b"]), int(cfg["c"])
        g_polys = validate_local_polys({int(q): v for q, v in cfg["g_polys"].items()}, "g")
    except (KeyError, TypeError, ValueError) as exc:
        raise errors.LoadError(f"bad interpolation config: {exc}") from exc
    if c % p == 0:
        raise errors.PDividesLevel(f"{p} divides c = {c}")
    t, _ = theta_ideal(tau)
    t_primes = [q for q in range(2, t + 1) if t % q == 0 and all(q % d for d in range(2, q)) and c % q]
    rep = Report("interpolate", ["chi", "m", "sign", "value", "precision"])
    rows = []
    for ell in range(1, args.level + 1):
        for chi in _primitive_chars(p ** ell):
            mu = choose_mu(weight2, chi)
            for sign, m in _admissible_m(weight2, mu):
                phi = chi.conj()
                inp = InterpolationInput(
                    n=1, weight2=weight2, p=p, tau=tau, chi=chi, m=m, sign=sign, L_ratio=L_ratio,
                    lambda0=lam0, b=b, c=c,
                    lambda_tau_value=lambda_tau(m, 1, weight2, mu, t_primes, phi),
                    g_tau_value=g_tau(m, g_polys, phi))
                try:
                    res = interpolation_value(inp)
                except errors.ExcludedSpecialValue:
                    rep.add(chi.tag(), m, sign, "excluded (m = n + 1/2)", "-")
                    rows.append({"chi": chi.to_json(), "m": str(m), "sign": sign, "tag": "excluded"})
                    continue
                if res.tag != "ok":
                    rep.add(chi.tag(), m, sign, "0 (excluded)", "exact")
                    rows.append({"chi": chi.to_json(), "m": str(m), "sign": sign, "tag": res.tag})
                    continue
                prec = _precision_column(res.value, p, args.precision, res.valuation)
                rep.add(chi.tag(), m, sign, res.value, prec)
                rows.append({"chi": chi.to_json(), "m": str(m), "sign": sign, "tag": "ok",
                             "value": res.value.to_json(),
                             "valuation": None if res.valuation is None else str(res.valuation),
                             "embedded": prec})
    rep.data.update({"p": p, "config": {k: cfg[k] for k in sorted(cfg)}, "rows": rows})
    return rep


def _admissible_m(weight2: int, mu: int):
    """(sign, m) over the degree-one ranges 1 <= m <= k - mu and 3 - k + mu <= m <= 1."""
    k = Fraction(weight2, 2)
    half = Fraction(1, 2)
    plus = [("+", half + j) for j in range(1, int(k - mu - half) + 1)]
    minus = [("-", half + j) for j in range(int(3 - k + mu - half), 1)]
    return plus + minus


def _precision_column(value: CycloNumber, p: int, n: int, valuation=None) -> str:
    if value.is_rational():
        return _rat(value, p, n)
    try:
        return str(embed_cyclo(value, p, n))
    except errors.WildPartUnsupported:
        return "outside Z_p" if valuation is None else f"valuation {valuation}"


def _rat(value: CycloNumber, p: int, n: int) -> str:
    from .padic import from_rational

    return str(from_rational(value.to_fraction(), p, n))


# entry point -----------------------------------------------------------------------

COMMANDS = {
    "enumerate": cmd_enumerate,
    "hecke-verify": cmd_hecke_verify,
    "pstab": cmd_pstab,
    "theta-check": cmd_theta_check,
    "kummer": cmd_kummer,
    "interpolate": cmd_interpolate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="siegelpadic", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--p", type=int, default=None, help="the prime p")
    ap.add_argument("--degree", type=int, default=1, help="degree n")
    ap.add_argument("--bound", type=int, default=None, help="trace bound, term count or power bound")
    ap.add_argument("--precision", type=int, default=None, help="p-adic precision N (digits for theta-check)")
    ap.add_argument("--level", type=int, default=1, help="largest conductor exponent l_max")
    ap.add_argument("--in", dest="inputs", nargs="+", default=None, help="input files")
    ap.add_argument("--out", default=None, help="JSON output path (default <command>.json)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--lam", default=None, help="Satake parameter (pstab, default 2) or lambda_0 (interpolate, default 1)")
    ap.add_argument("--weight2", type=int, default=13, help="twice the weight")
    ap.add_argument("--tau", type=int, default=1, help="tau for theta-check")
    ap.add_argument("--conductors", type=int, nargs="+", default=[3, 5])
    ap.add_argument("--z", nargs="+", default=["1i", "1+2i"])
    return ap


_DEFAULT_BOUND = {"enumerate": 2, "pstab": 12, "theta-check": 200, "kummer": 3, "interpolate": 0}
_DEFAULT_PRECISION = {"theta-check": 120, "kummer": 2, "interpolate": 4}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.bound is None:
        args.bound = _DEFAULT_BOUND.get(args.command, 2)
    if args.precision is None:
        args.precision = _DEFAULT_PRECISION.get(args.command, 4)
    if args.command in ("kummer", "interpolate") and args.p is None:
        args.p = 5
    if args.bound < 0 or args.precision <= 0 or args.level <= 0:
        print("error: bounds must be positive", file=sys.stderr)
        return EXIT_LOAD
    if args.lam is None:
        args.lam = "1" if args.command == "interpolate" else "2"
    try:
        rep = COMMANDS[args.command](args)
    except errors.UnsupportedDegree as exc:
        print(f"error: unsupported degree: {exc}", file=sys.stderr)
        return EXIT_DEGREE
    except errors.PDividesLevel as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLEVEL
    except (errors.LoadError, errors.ConstantTermPresent, errors.DegreeMismatch, errors.BadPrime) as exc:
        print(f"error: cannot load input: {exc}", file=sys.stderr)
        return EXIT_LOAD
    print(rep.table())
    out = args.out or f"{args.command}.json"
    with open(out, "w") as fh:
        json.dump(rep.data, fh, sort_keys=True, indent=1, default=str)
        fh.write("\n")
    return EXIT_CHECK if rep.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
