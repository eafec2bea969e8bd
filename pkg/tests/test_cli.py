import json
from fractions import Fraction

import pytest

from siegelpadic.cli import main
from siegelpadic.hecke import SatakeParams, eigen_data_json, n1_eigen_data
from siegelpadic.measures import DistributionSystem
from siegelpadic.qexp import FourierExpansion, expansion_n1


def run(tmp_path, capsys, *argv, name="out.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    text = capsys.readouterr().out
    data = json.loads(out.read_text()) if out.exists() else None
    return code, text, data


def test_enumerate(tmp_path, capsys):
    code, text, data = run(tmp_path, capsys, "enumerate", "--degree", "2", "--bound", "2")
    assert code == 0
    assert data["degree"] == 2 and any(m["aut_count"] == 12 for m in data["matrices"])
    assert "aut_count" in text


@pytest.mark.parametrize("argv", [["--degree", "1"], ["--degree", "2", "--p", "3"], ["--degree", "3", "--p", "2"]])
def test_hecke_verify_passes(tmp_path, capsys, argv):
    code, text, data = run(tmp_path, capsys, "hecke-verify", *argv)
    assert code == 0 and "FAIL" not in text
    assert all(c["ok"] for c in data["checks"])


def test_hecke_verify_degree_four(tmp_path, capsys):
    code, _, data = run(tmp_path, capsys, "hecke-verify", "--degree", "4")
    assert code == 2 and data is None


def test_pstab_synthetic(tmp_path, capsys):
    code, text, data = run(tmp_path, capsys, "pstab", "--p", "3")
    assert code == 0
    assert data["eigen_check"] and data["explicit_check"] and not data["all_zero"]
    assert "not a 3-adic unit" in text  # lambda = 2 is not ordinary
    f0 = FourierExpansion.from_json(data["f0"])
    assert f0.coeffs


def _write_inputs(tmp_path, f, sp, lam_t):
    form, eig = tmp_path / "form.json", tmp_path / "eigen.json"
    form.write_text(json.dumps(f.to_json()))
    eig.write_text(json.dumps(eigen_data_json(sp, lam_t)))
    return str(form), str(eig)


def test_pstab_files_and_exit_codes(tmp_path, capsys):
    p = 5
    f, lam_t, sp = n1_eigen_data(p, Fraction(1, 5), 13, 2 * p ** 4, seed=2)
    code, _, data = run(tmp_path, capsys, "pstab", "--in", *_write_inputs(tmp_path, f, sp, lam_t))
    assert code == 0 and data["ordinary"] and data["eigen_check"]

    # Lambda(T_1) that does not match the Satake parameters: the eigen check must fail
    wrong = dict(lam_t)
    wrong[1] = lam_t[1] + lam_t[0]
    code, text, _ = run(tmp_path, capsys, "pstab", "--in", *_write_inputs(tmp_path, f, sp, wrong))
    assert code == 4 and "FAIL" in text

    bad_level = expansion_n1({1: 1}, 13, 50, c=20, p=p)
    code, _, _ = run(tmp_path, capsys, "pstab", "--in", *_write_inputs(tmp_path, bad_level, sp, lam_t))
    assert code == 3

    zero = expansion_n1({}, 13, 50, c=4, p=p)
    code, text, data = run(tmp_path, capsys, "pstab", "--in", *_write_inputs(tmp_path, zero, sp, lam_t))
    assert data["all_zero"] and "WARNING" in text

    code, _, _ = run(tmp_path, capsys, "pstab", "--in", str(tmp_path / "missing.json"), str(tmp_path / "x.json"))
    assert code == 5


def test_theta_check(tmp_path, capsys):
    code, text, data = run(tmp_path, capsys, "theta-check")
    assert code == 0 and data["pass"]
    assert len(data["rows"]) == 2 * (1 + 3)  # two points, conductor 3 and 5 characters
    code, _, _ = run(tmp_path, capsys, "theta-check", "--degree", "2")
    assert code == 2


def test_kummer(tmp_path, capsys):
    code, text, data = run(tmp_path, capsys, "kummer", "--p", "5")
    assert code == 0 and data["verdict"]["passed"] and "PASS" in text
    system = DistributionSystem.from_json(data["measure"])
    assert system.p == 5
    code, _, data = run(tmp_path, capsys, "kummer", "--p", "3")
    assert code == 0 and data["verdict"]["passed"]


def test_kummer_load_errors(tmp_path, capsys):
    polys = tmp_path / "polys.json"
    polys.write_text(json.dumps({"7": [1, 2]}))
    code, _, _ = run(tmp_path, capsys, "kummer", "--p", "5", "--in", str(polys))
    assert code == 5
    polys.write_text(json.dumps({"5": [0, 1]}))
    code, _, _ = run(tmp_path, capsys, "kummer", "--p", "5", "--in", str(polys))
    assert code == 5
    polys.write_text("not json")
    code, _, _ = run(tmp_path, capsys, "kummer", "--p", "5", "--in", str(polys))
    assert code == 5
    code, _, _ = run(tmp_path, capsys, "kummer", "--p", "5", "--level", "2")
    assert code == 2


def test_interpolate(tmp_path, capsys):
    code, text, data = run(tmp_path, capsys, "interpolate", "--p", "5")
    assert code == 0
    assert "0 (excluded)" in text
    tags = {r["tag"] for r in data["rows"]}
    assert tags == {"ok", "excluded-parity", "excluded"}
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"c": 5}))
    code, _, _ = run(tmp_path, capsys, "interpolate", "--p", "5", "--in", str(cfg))
    assert code == 3
    cfg.write_text(json.dumps({"g_polys": {"7": [2, 1]}}))
    code, _, _ = run(tmp_path, capsys, "interpolate", "--p", "5", "--in", str(cfg))
    assert code == 5


def test_bad_bounds(tmp_path, capsys):
    code, _, _ = run(tmp_path, capsys, "enumerate", "--bound", "-1")
    assert code == 5


@pytest.mark.parametrize("argv", [
    ["enumerate", "--degree", "2"],
    ["hecke-verify", "--degree", "2"],
    ["pstab", "--p", "5", "--seed", "4"],
    ["theta-check", "--bound", "60", "--precision", "40"],
    ["kummer", "--p", "3", "--seed", "9"],
    ["interpolate", "--p", "3", "--level", "2"],
])
def test_byte_identical_reruns(tmp_path, capsys, argv):
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        main([*argv, "--out", str(out)])
        outs.append((capsys.readouterr().out, out.read_bytes()))
    assert outs[0] == outs[1]
