import io
import json
import random
import subprocess
import sys

import pytest

from quadmap.cli import JobSpec, format_map, main, parse_map, run
from quadmap.errors import CtxMismatch, ParseError
from quadmap.field import make_field
from quadmap.generators import random_quadratic_map
from quadmap.maps import PolyMap

CORE = "over Q vars 5 map [x1 + x2*x5, x2 + x1*x4 - x3*x5, x3 + x2*x4, x4, x5]"


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    from quadmap.cli import build_parser
    ns = build_parser().parse_args(argv)
    job = JobSpec(**{k: v for k, v in vars(ns).items()})
    code = run(job, out, err)
    return code, out.getvalue(), err.getvalue()


def test_parse_map_header():
    F = parse_map("over GF(5) vars 3 map [x1*x2, x1^2, 0]")
    assert str(F.ctx) == "GF(5)" and F.n == 3 and F.m == 3
    G = parse_map("[x1*x2, x3^2]", "Q")
    assert G.n == 3 and G.m == 2
    assert parse_map("over Q map [x1]").n == 1


def test_parse_map_errors():
    with pytest.raises(ParseError) as exc:
        parse_map("over Q vars 2 map [x1**2, x2]")
    assert exc.value.line == 1 and exc.value.column > 20
    with pytest.raises(ParseError):
        parse_map("over Q vars 2 map [x1, x2")
    with pytest.raises(ParseError):
        parse_map("[x1]")
    with pytest.raises(CtxMismatch):
        parse_map("over GF(2) vars 1 map [x1]", "GF(3)")


def test_parse_error_line_numbers():
    with pytest.raises(ParseError) as exc:
        parse_map("over Q vars 2 map [\n  x1*x2,\n  x1 +* x2]")
    assert exc.value.line == 3


@pytest.mark.parametrize("spec", ["Q", "GF(2)", "GF(7)", "GF(2,3)"])
def test_format_parse_roundtrip(spec):
    ctx = make_field(spec)
    rng = random.Random(1)
    for _ in range(20):
        F = random_quadratic_map(ctx, rng.randint(1, 5), rng.randint(1, 5), rng)
        assert parse_map(format_map(F)) == F


def test_decompose_example():
    code, out, _ = call(["decompose", "--inline", CORE])
    assert code == 0
    data = json.loads(out)
    assert data["verified"] and data["rank"] == 3
    factors = data["certificate"]["factors"]
    assert [f["i"] for f in factors] == [2, 3, 1]
    assert [f["a"] for f in factors] == ["x1*x4 - x3*x5", "x2*x4", "x2*x5"]


def test_classify_case4():
    text = "over GF(5) vars 4 map [x1*x3 + 2*x2*x4, x2*x3 - x1*x4, 3*x3^2 + x4^2, 3*x1^2 + x2^2]"
    code, out, _ = call(["classify", "--inline", text])
    assert code == 0
    data = json.loads(out)
    assert data["case"] == 4 and data["rank"] == 3 and data["verified"]


def test_verify_roundtrip_and_tamper(tmp_path):
    cert = tmp_path / "cert.json"
    assert call(["decompose", "--inline", CORE, "--output", str(cert)])[0] == 0
    code, out, _ = call(["verify", "--inline", CORE, "--certificate", str(cert)])
    assert code == 0 and json.loads(out)["verified"]
    data = json.loads(cert.read_text())
    data["certificate"]["factors"][0]["a"] = "x1*x4 + x3*x5"
    cert.write_text(json.dumps(data))
    code, out, _ = call(["verify", "--inline", CORE, "--certificate", str(cert)])
    res = json.loads(out)
    assert code == 1 and not res["verified"] and res["discrepancy"]


def test_exit_codes(tmp_path):
    out = tmp_path / "o.json"
    code, _, err = call(["classify", "--inline", "over Q vars 2 map [x1**2, x2]",
                         "--output", str(out)])
    assert code == 2 and "parse error" in err
    assert not out.exists()
    assert call(["decompose", "--inline", "over Q vars 2 map [x1 + x1*x2, x2]"])[0] == 4
    assert call(["classify", "--input", str(tmp_path / "missing.txt")])[0] == 4
    assert call(["classify", "--field", "GF(3)", "--inline", "over GF(2) map [x1]"])[0] == 2


def test_report_text():
    code, out, _ = call(["report", "--inline", CORE])
    assert code == 0
    assert "rank of JH: 3" in out and "certificate with 3 factors" in out
    code, out, _ = call(["report", "--inline", "over Q vars 2 map [x1*x2, x1^2]"])
    assert code == 0 and "not a Keller map" in out


def test_fuzz_deterministic(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("QUADMAP_THREADS", "1")
    code, table, _ = call(["fuzz", "--field", "GF(5)", "--count", "20", "--seed", "3",
                           "--output", str(a)])
    assert code == 0 and table.startswith("fuzz over GF(5)")
    monkeypatch.setenv("QUADMAP_THREADS", "3")
    call(["fuzz", "--field", "GF(5)", "--count", "20", "--seed", "3", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert sum(r["count"] for r in rep["summary"]) == 20
    assert all(r["status"] == "ok" for r in rep["records"])


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quadmap.cli", "classify", "--inline",
                           "over Q vars 2 map [x1*x2, 0]"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rank"] == 1


def test_main_returns_code():
    assert main(["classify", "--inline", "over Q vars 1 map [x1^2]"]) == 0
