import json
import subprocess
import sys
from pathlib import Path

import pytest

from isocurve.algebra import QQ, PolyRing, PrimeField, parse_in_ring
from isocurve.cli import dumps, main
from isocurve.jobs import KINDS, run_job, scan, scan_report

ROOT = Path(__file__).resolve().parents[1]
JOBS = ROOT / "scripts" / "jobs"
EXPECTED = {
    "katz_rank1_half": "vanishes at all good primes; bad: [2]",
    "ov_zero": "pass",
    "ov_example": "pass",
    "change_of_lift": "pass",
    "nonabelian_katz": "pass",
    "chen": "matched with constant -1",
    "orbit_golden": "finite orbit of size 6",
    "orbit_markov": "height bound exceeded at (39, 3, 102)",
    "foliation_pclosed": "p-closed",
}


def load(name):
    return json.loads((JOBS / f"{name}.json").read_text())


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


@pytest.mark.parametrize("name", sorted(p.stem for p in JOBS.glob("*.json")))
def test_every_shipped_job_runs(name, capsys):
    code, out = run_cli(["run", str(JOBS / f"{name}.json")], capsys)
    rep = json.loads(out)
    assert code == 0 == rep["exit_code"], rep.get("error")
    if name in EXPECTED:
        assert rep["verdict"] == EXPECTED[name]


def test_every_kind_has_a_shipped_job():
    kinds = {load(p.stem)["kind"] for p in JOBS.glob("*.json")}
    assert kinds == set(KINDS)


def test_schema_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "orbit", "point": [1, 2]}))
    code, out = run_cli(["run", str(bad)], capsys)
    assert code == 2 and json.loads(out)["error"]["type"] == "schema"
    assert run_job({"kind": "no-such-kind"})["exit_code"] == 2
    assert run_job({"kind": "ov-check", "p": 5, "theta": [["0"]], "surplus": 1})["exit_code"] == 2
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2


def test_input_errors_exit_2():
    job = {"kind": "ov-check", "p": 3, "theta": [["0", "1", "0"], ["0", "0", "1"], ["0", "0", "0"]]}
    rep = run_job(job)
    assert rep["exit_code"] == 2 and rep["error"]["class"] == "NilpotenceBoundError"


def test_resource_cap_exit_3_from_flag_and_env(monkeypatch, capsys):
    path = str(JOBS / "katz_legendre.json")
    code, out = run_cli(["run", path, "--degree-cap", "5"], capsys)
    assert code == 3 and json.loads(out)["error"]["resource"] == "degree"
    monkeypatch.setenv("ISOCURVE_DEGREE_CAP", "5")
    code, _ = run_cli(["run", path], capsys)
    assert code == 3
    # a per-job limit beats both
    job = load("katz_legendre")
    job["limits"] = {"degree_cap": 100000}
    assert run_job(job, degree_cap=5)["exit_code"] == 0


def test_node_cap_and_time_budget():
    job = {"kind": "orbit", "point": ["3", "3", "3"], "height_bound": 10**9}
    rep = run_job(job, node_cap=4)
    assert rep["exit_code"] == 0 and rep["result"]["status"] == "capped"
    rep = run_job(load("schlesinger_f5"), time_budget=1e-6)
    assert rep["exit_code"] == 3


def test_scan_empty_and_order():
    assert scan([]) == []
    assert scan_report([])["summary"] == {"total": 0, "ok": 0, "failed": 0, "exit_code": 0}
    jobs = [load("katz_rank1_half"), load("ov_zero"), load("orbit_markov")]
    one = scan(jobs, 1)
    assert [r["job"] for r in one] == jobs
    assert dumps(one) == dumps(scan(jobs, 2))


def test_scan_isolation(capsys):
    code, out = run_cli(["scan", str(ROOT / "scripts" / "isolation_manifest.json"), "--parallel", "2"], capsys)
    rep = json.loads(out)
    assert [r["exit_code"] for r in rep["reports"]] == [0, 3, 2]
    assert rep["summary"]["exit_code"] == code == 3
    assert rep["summary"]["ok"] == 1


def test_bad_manifest(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"tasks": []}))
    assert main(["scan", str(m)]) == 2


def test_out_file_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    manifest = str(ROOT / "scripts" / "isolation_manifest.json")
    main(["scan", manifest, "--out", str(a)])
    main(["scan", manifest, "--out", str(b), "--parallel", "2"])
    assert a.read_bytes() == b.read_bytes()
    main(["scan", manifest, "--out", str(b), "--timing"])
    assert "timing" in json.loads(b.read_text())["reports"][0]


def test_emitted_expressions_parse_back():
    rep = run_job(load("hitchin"))
    R = PolyRing(QQ, ["x", "a", "b"])
    h2, h3 = (parse_in_ring(s, R) for s in rep["result"]["h"])
    assert h2 == parse_in_ring("0 - a^2 - a*b - b^2", R)
    assert h3 == parse_in_ring("a*b*(a+b)", R)
    rep = run_job(load("ov_example"))
    F7 = PolyRing(PrimeField(7), ["x"])
    psi = [[parse_in_ring(s, F7) for s in row] for row in rep["result"]["psi"]]
    twist = [[parse_in_ring(s, F7) for s in row] for row in rep["result"]["frobenius_twist"]]
    assert psi == twist
    assert psi[0][1] == parse_in_ring("x^21 + 1", F7)


def test_console_script_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run(
        [sys.executable, "-m", "isocurve.cli", "run", str(JOBS / "ov_zero.json"), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(out.read_text())["verdict"] == "pass"
