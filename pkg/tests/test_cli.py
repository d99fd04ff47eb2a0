import json
import os

import pytest

from conftest import DATA, circle_system
from pbe.cli import main

THALES = os.path.join(DATA, "thales.geo")


@pytest.fixture
def circle_file(tmp_path):
    def make(g="x1"):
        path = tmp_path / f"circle_{abs(hash(g))}.json"
        path.write_text(json.dumps(circle_system(g=g).to_json()))
        return str(path)
    return make


def test_geom_certify_and_verify(tmp_path, capsys):
    out = tmp_path / "cert.json"
    assert main(["geom", THALES, "--radius", "2", "--auto-witness", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "verdict: PROVED" in text
    assert "1234567890123/10000000000000" in text
    assert main(["verify", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "VALID"


def test_geom_output_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["geom", THALES, "-R", "2", "-o", str(a)]) == 0
    assert main(["geom", THALES, "-R", "2", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().endswith(b"\n")


def test_geom_seven_adic(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["geom", THALES, "--place", "7", "-o", str(out)]) == 0
    assert "verdict: PROVED" in capsys.readouterr().out
    assert main(["verify", str(out)]) == 0


def test_geom_compile_only(capsys):
    assert main(["geom", THALES, "--compile-only"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["system"]["vars"] == ["C.x", "C.y"]


def test_verify_detects_tampering(tmp_path, capsys):
    out = tmp_path / "cert.json"
    main(["geom", THALES, "-o", str(out)])
    data = json.loads(out.read_text())
    data["verdict"] = "INCONCLUSIVE"
    out.write_text(json.dumps(data))
    capsys.readouterr()
    assert main(["verify", str(out)]) == 2
    assert capsys.readouterr().out.startswith("INVALID: mismatch at /verdict")


def test_inconclusive_exit_code(circle_file, capsys):
    assert main(["certify", circle_file("x1")]) == 2
    assert "verdict: INCONCLUSIVE" in capsys.readouterr().out


def test_dichotomy_and_dimension(circle_file, capsys):
    assert main(["dichotomy", circle_file("x1"), "--parametric"]) == 0
    assert "verdict: CASE2" in capsys.readouterr().out
    assert main(["dichotomy", circle_file("x1^2 + x2^2 - 1")]) == 0
    assert "verdict: CASE1" in capsys.readouterr().out
    assert main(["dimension", circle_file(), "--all-permutations", "--json"]) == 0
    cert = json.loads(capsys.readouterr().out)
    assert cert["verdict"] == "DIM_CONFIRMED"


def test_user_witness_file(circle_file, tmp_path, capsys):
    w = tmp_path / "w.json"
    w.write_text(json.dumps({"point": ["3/5", "4/5"]}))
    # low-height point: genericity fails honestly
    assert main(["dichotomy", circle_file("x1"), "--witness", str(w)]) == 2
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_kronecker(tmp_path, capsys):
    out = tmp_path / "k.json"
    assert main(["kronecker", "14*x^2 + 4*x + 4", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "g_kr(100) = 140404" in text and "verdict: DISPROVED" in text
    assert main(["verify", str(out)]) == 0
    assert main(["kronecker", "(x+y)^2 - x^2 - 2*x*y - y^2", "--vars", "x,y"]) == 0
    assert "verdict: PROVED" in capsys.readouterr().out


def test_bounds_and_nss(circle_file, capsys):
    assert main(["bounds", circle_file("x1")]) == 0
    assert "log" in capsys.readouterr().out
    assert main(["nss-bounds", circle_file("x1"), "--variant", "bezout"]) == 0
    assert "variant: BEZOUT" in capsys.readouterr().out


def test_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.geo"
    bad.write_text("free P : point\nfree P : point\n")
    assert main(["geom", str(bad)]) == 1
    assert "pbe: error:" in capsys.readouterr().err
    assert main(["certify", str(tmp_path / "missing.json")]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["kronecker", "x +* y"]) == 1
    assert main(["certify", THALES, "--radius", "1/2"]) == 1
