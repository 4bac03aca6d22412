import csv
import json
from fractions import Fraction

import starsum.cli as cli
from starsum.sequence import (
    AuditReport,
    CERTIFIED_VIOLATION,
    StepEntry,
)


SPIDER_DOC = {
    "dim": 2,
    "kind": "spider",
    "apex": [0, 0],
    "tips": [[1, 0], [0, 1], [1, 1]],
}


def _write_spec(tmp_path, doc, name="set.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_audit_exit_ok_and_report_schema(tmp_path, capsys):
    spec = _write_spec(tmp_path, SPIDER_DOC)
    out = tmp_path / "report.json"
    rc = cli.main(["audit", "--set", spec, "--kmax", "3", "--refine", "1",
                   "--out", str(out)])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"command", "config", "entries", "flags", "version"}
    assert report["command"] == "audit"
    assert len(report["entries"]) == 3
    for e in report["entries"]:
        assert Fraction(e["lower"]) <= Fraction(e["upper"])
    assert json.loads(out.read_text()) == report
    # CSV sibling lands next to the JSON with the fixed column set
    with open(tmp_path / "report.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "lower", "upper", "verdict", "hausdorff", "seconds"]
    assert len(rows) == 4


def test_audit_is_deterministic(tmp_path, capsys):
    spec = _write_spec(tmp_path, SPIDER_DOC)
    args = ["audit", "--set", spec, "--kmax", "3", "--refine", "1"]
    assert cli.main(args) == 0
    first = json.loads(capsys.readouterr().out)
    assert cli.main(args) == 0
    second = json.loads(capsys.readouterr().out)
    for a, b in zip(first["entries"], second["entries"]):
        assert (a["k"], a["lower"], a["upper"], a["verdict"]) == (
            b["k"], b["lower"], b["upper"], b["verdict"])


def test_usage_errors_exit_1(tmp_path, capsys):
    assert cli.main(["no-such-command"]) == 1
    capsys.readouterr()
    assert cli.main(["audit"]) == 1  # missing --set
    capsys.readouterr()
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["audit", "--set", str(bad)]) == 1
    capsys.readouterr()
    malformed = _write_spec(tmp_path, {"dim": 2, "kind": "mystery"}, "m.json")
    assert cli.main(["audit", "--set", malformed]) == 1


def test_missing_spec_file_exit_4(tmp_path):
    assert cli.main(["audit", "--set", str(tmp_path / "nope.json")]) == 4


def test_unwritable_output_exit_4(tmp_path):
    spec = _write_spec(tmp_path, SPIDER_DOC)
    rc = cli.main(["audit", "--set", spec, "--kmax", "2", "--refine", "1",
                   "--out", str(tmp_path / "no" / "dir" / "r.json")])
    assert rc == 4


def test_cell_cap_exit_3(tmp_path):
    doc = {
        "dim": 3,
        "kind": "spider",
        "apex": [0, 0, 0],
        "tips": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]],
    }
    spec = _write_spec(tmp_path, doc, "s3.json")
    rc = cli.main(["hausdorff", "--set", spec, "--kmax", "4",
                   "--res", "1/64", "--cap", "1000"])
    assert rc == 3


def test_expect_monotone_violation_exit_2(tmp_path, capsys, monkeypatch):
    entries = [
        StepEntry(1, Fraction(1), Fraction(1), ""),
        StepEntry(2, Fraction(1, 2), Fraction(3, 4), CERTIFIED_VIOLATION),
    ]
    fake = AuditReport(entries, False, False, [Fraction(1, 64)])
    monkeypatch.setattr(cli, "audit_monotonicity", lambda *a, **kw: fake)
    spec = _write_spec(tmp_path, SPIDER_DOC)
    rc = cli.main(["audit", "--set", spec, "--kmax", "2", "--expect-monotone"])
    assert rc == 2
    # the report is still emitted despite the failing expectation
    report = json.loads(capsys.readouterr().out)
    assert report["entries"][1]["verdict"] == CERTIFIED_VIOLATION
    assert report["flags"]["expect_monotone"] is True


def test_simplex_exact_command(capsys):
    assert cli.main(["simplex-exact", "--d", "3", "--kmax", "6"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [e["k"] for e in report["entries"]] == [1, 2, 3, 4, 5, 6]
    # sums of fewer than d segments are flat, so the first d-1 values vanish
    assert [e["lower"] for e in report["entries"]] == [
        "0", "0", "1/27", "1/16", "2/25", "5/54"]
    assert all(e["lower"] == e["upper"] for e in report["entries"])


def test_lemma2_command(capsys):
    assert cli.main(["lemma2", "--d", "2", "--k", "4", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entries"][0]["verdict"] == "holds"


def test_boundary_command(capsys):
    assert cli.main(["boundary", "--shape", "disc", "--size", "16"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entries"][0]["verdict"] == "passed"
    assert report["flags"]["components"] == 1


def test_counterexample_gap_command(capsys):
    assert cli.main(["counterexample", "gap"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["flags"]["certified_negative"] is True


def test_counterexample_measure_cube_command(capsys):
    assert cli.main(["counterexample", "measure-cube", "--d", "2", "--k", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entries"][0]["verdict"] == "strict-drop"
    assert report["flags"]["cube_volume"] == "1"


def test_version_flag(capsys):
    assert cli.main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == cli.__version__
