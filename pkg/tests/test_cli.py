import csv
import io
import json
import subprocess
import sys

import mpmath
import pytest

from pivlab.cli import RunManifest, emit_report, run


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_stieltjes_hermite(capsys):
    code, out, _ = invoke(capsys, "verify", "stieltjes", "--hermite", "6", "--bits", "256")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "pass" and data["precision_bits"] == 256
    assert mpmath.mpf(data["max_residual"]) < mpmath.mpf(10) ** -64


def test_chains_cycles(capsys):
    code, out, _ = invoke(capsys, "chains", "cycles", "--N", "3")
    assert code == 0
    assert [c["values"] for c in json.loads(out)["cycles"]] == [[0, 0, 0], [0, 1, -1]]


def test_verify_piv_failure_and_pass(capsys):
    code, out, _ = invoke(capsys, "verify", "piv", "--w", "-1/z", "--a", "2", "--b", "2")
    data = json.loads(out)
    assert code == 1 and data["verdict"] == "fail" and data["defect_text"] != "0"
    code, out, _ = invoke(capsys, "verify", "piv", "--w", "-1/z", "--a", "-2", "--b", "-2")
    assert code == 0 and json.loads(out)["pole_expansion"]["verdict"] == "pass"


def test_usage_errors(capsys):
    assert invoke(capsys, "bogus")[0] == 2
    assert invoke(capsys, "verify", "piv", "--w", "-1/z")[0] == 2
    code, _, err = invoke(capsys, "verify", "theorem1", "--w", "1/(")
    assert code == 2 and "--w" in err


def test_malformed_input_file(tmp_path, capsys):
    bad = tmp_path / "chain.json"
    bad.write_text(json.dumps({"fs": [{"num": ["1/1"]}]}))
    code, _, err = invoke(capsys, "verify", "chain", "--input", str(bad))
    assert code == 2 and "fs" in err
    bad.write_text("{not json")
    assert invoke(capsys, "verify", "chain", "--input", str(bad))[0] == 2


def test_chain_roundtrip_through_file(tmp_path, capsys):
    out = tmp_path / "chain.json"
    code, _, _ = invoke(capsys, "chains", "build", "--flag", "[]<[1]<[1,2]", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert data["N"] == 5
    code, text, _ = invoke(capsys, "verify", "chain", "--input", str(out))
    assert code == 0 and json.loads(text)["alphas"] == data["alphas"]


def test_chains_build_reports_piv(capsys):
    code, out, _ = invoke(capsys, "chains", "build", "--flag", "[]<[1]", "--mu", "1")
    data = json.loads(out)
    assert code == 0 and data["piv"]["a"] == "-2/1" and data["piv"]["b"] == "-2/1"
    assert data["theorem1"]["verdict"] == "pass"


def test_verify_chain_failure(capsys):
    code, out, _ = invoke(capsys, "verify", "chain", "--fs", "z^2;0;0")
    assert code == 1 and json.loads(out)["failed_index"] == 1


def test_verify_monodromy(capsys, tmp_path):
    assert invoke(capsys, "verify", "monodromy", "--ks", "1,2", "--exact")[0] == 0
    assert invoke(capsys, "verify", "monodromy", "--adler-moser", "3", "--taus", "1,2")[0] == 0
    assert invoke(capsys, "verify", "monodromy", "--u", "2/z^2 + z")[0] == 1
    path = tmp_path / "u.json"
    path.write_text(json.dumps({"num": ["6/1"], "den": ["0/1", "0/1", "1/1"]}))
    code, out, _ = invoke(capsys, "verify", "monodromy", "--potential", str(path))
    assert code == 0 and json.loads(out)["poles"][0]["m"] == 2


def test_verify_calogero_and_generalized(capsys):
    assert invoke(capsys, "verify", "calogero", "--ks", "1,2")[0] == 0
    assert invoke(capsys, "verify", "stieltjes", "--ks", "1,2")[0] == 1
    assert invoke(capsys, "verify", "stieltjes", "--f", "1/z - z")[0] == 0
    assert invoke(capsys, "verify", "stieltjes", "--f", "1/z - z + 1")[0] == 1
    assert invoke(capsys, "verify", "theorem1", "--w", "-1/z")[0] == 0


def test_families_and_solutions(capsys):
    code, out, _ = invoke(capsys, "families", "gen", "--kind", "hermite-wronskian", "--ks", "1,2")
    assert code == 0 and json.loads(out)["poly"] == ["4/1", "0/1", "8/1"]
    code, out, _ = invoke(capsys, "solutions", "build", "--mode", "exp", "--n", "1", "--nu", "1")
    data = json.loads(out)
    assert code == 0 and data["partial_fractions"]["nu"] == "1/1"


def test_solve_csv(capsys):
    code, out, _ = invoke(capsys, "solve", "--system", "stieltjes", "--n", "2", "--starts", "2",
                          "--seed", "7", "--format", "csv", "--bits", "128")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO("".join(l for l in out.splitlines(True) if not l.startswith("#")))))
    assert len(rows) == 2 and set(rows[0]) == {"index", "re", "im", "residual"}


def test_solve_calogero_with_match(capsys):
    code, out, _ = invoke(capsys, "solve", "--system", "calogero", "--n", "2", "--starts", "4", "--seed", "1",
                          "--bits", "128", "--match-ks", "1,2")
    data = json.loads(out)
    assert data["converged"] >= 1


def test_csv_needs_point_set(capsys):
    assert invoke(capsys, "chains", "cycles", "--N", "3", "--format", "csv")[0] == 2


def test_determinism(tmp_path, capsys):
    args = ["solve", "--n", "3", "--starts", "3", "--seed", "11", "--bits", "128"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(args + ["--out", str(a)])
    run(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["manifest"]["seed"] == 11


def test_timestamp_is_opt_in(capsys):
    _, out, _ = invoke(capsys, "chains", "cycles", "--N", "3", "--timestamp")
    assert "timestamp" in json.loads(out)["manifest"]
    _, out, _ = invoke(capsys, "chains", "cycles", "--N", "3")
    assert "timestamp" not in json.loads(out)["manifest"]


def test_manifest_hash_depends_on_config():
    assert RunManifest(["a"], 256, 1).config_hash != RunManifest(["a"], 256, 2).config_hash
    assert RunManifest(["a"], 256, 1).config_hash == RunManifest(["a"], 256, 1).config_hash


def test_emit_report_json_sorted():
    text = emit_report({"b": 1, "a": 2})
    assert text.index('"a"') < text.index('"b"')


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pivlab", "chains", "cycles", "--N", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert [0, 1, -1, 1, -1] in [c["values"] for c in json.loads(proc.stdout)["cycles"]]
