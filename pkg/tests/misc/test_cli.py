import json
from pathlib import Path

import pytest

from ncycle_entropic.cli import run
from ncycle_entropic.core.box import decode_box, encode_box
from ncycle_entropic.core.boxes import pr_box
from ncycle_entropic.core.gamma import GammaVector


@pytest.fixture
def pr_file(tmp_path: Path) -> Path:
    path = tmp_path / "pr4.json"
    path.write_bytes(encode_box(pr_box(GammaVector.canonical(4))))
    return path


def test_report_on_box_file(pr_file: Path, capsys: pytest.CaptureFixture[str]):
    assert run(["report", str(pr_file), "--format", "json"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert set(document) == {"inequalities", "membership"}
    assert set(document["inequalities"][0]) == {"family", "label", "value", "bound", "violated"}
    assert sum(r["violated"] for r in document["inequalities"]) == 1
    verdicts = document["membership"]
    assert [r["method"] for r in verdicts] == ["facet-check", "lp-decomposition"]
    assert not any(r["is_local"] for r in verdicts)


def test_report_csv_keeps_inequality_columns(pr_file: Path, capsys: pytest.CaptureFixture[str]):
    assert run(["report", str(pr_file), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "family,label,value,bound,violated"
    rows = lines[1 : lines.index("")]
    assert all(row.split(",")[-1] in {"true", "false"} for row in rows)
    assert lines[lines.index("") + 1].startswith("method,is_local,verdict")


def test_report_with_config_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    config = tmp_path / "run.toml"
    config.write_text("n = 5\nepsilon = 0.5\n")
    assert run(["report", "--preset", "iso", "--config", str(config), "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["inequalities"]
    assert sum(r["family"] == "BC" for r in rows) == 5
    assert sum(r["family"] == "C" for r in rows) == 16


def test_activate_nonlocal_preset_writes_certificate(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    certificate = tmp_path / "cert.json"
    code = run(["activate", "--preset", "pr4", "--certificate", str(certificate), "--format", "json"])
    assert code == 0
    (record,) = json.loads(capsys.readouterr().out)
    assert record["found"] is True
    assert record["k_star"] == 4
    assert record["companion"] == "(+,+,+,+)"
    assert record["certificate_representable"] is True
    assert record["mixture"].endswith("classical(+,+,+,+)")
    box = decode_box(certificate.read_bytes())
    assert box.n == 4


def test_activate_skips_unrepresentable_certificate(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    """
    Scenario: A square barely past the facet needs v far below double precision.
    Verify: The run reports the activation but writes no certificate file.
    """
    certificate = tmp_path / "cert.json"
    code = run(["activate", "--preset", "iso", "--epsilon", "0.51", "--certificate", str(certificate), "--format", "json"])
    assert code == 0
    (record,) = json.loads(capsys.readouterr().out)
    assert record["found"] is True
    assert record["certificate_representable"] is False
    assert "not representable" in record["diagnostic"]
    assert not certificate.exists()


def test_activate_local_box_exits_two(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    weights = tmp_path / "weights.csv"
    code = run(["activate", "--preset", "iso", "--epsilon", "0.3", "--decomposition", str(weights), "--format", "json"])
    assert code == 2
    (record,) = json.loads(capsys.readouterr().out)
    assert record["diagnostic"] == "local"
    lines = weights.read_text().splitlines()
    assert lines[0] == "label,weight"
    assert len(lines) > 1


def test_emit_curve_is_byte_identical(tmp_path: Path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["emit-curve", "--n", "5", "--epsilon", "0.7", "--points", "6"]
    assert run([*argv, "--out", str(first)]) == 0
    assert run([*argv, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[0] == "v,k,bc_value_exact,bc_value_eq9"
    assert len(lines) == 7


def test_agree_command(capsys: pytest.CaptureFixture[str]):
    assert run(["agree", "--n", "3", "--trials", "5", "--format", "json"]) == 0
    (summary,) = json.loads(capsys.readouterr().out)
    assert summary["disagreements"] == 0
    assert summary["nonlocal_count"] >= 100


@pytest.mark.parametrize(
    "argv",
    [
        ["report"],
        ["activate", "box.json", "--preset", "pr4"],
        ["emit-curve", "--v-min", "0.5", "--v-max", "0.1"],
        ["no-such-command"],
        ["report", "--preset", "not-a-preset"],
        ["appendix", "--n", "8", "--trials", "1"],
        ["report", "--preset", "iso", "--epsilon", "2.0"],
        ["report", "--preset", "iso", "--n", "2"],
        ["report", "--preset", "pr4", "--d", "3"],
        ["agree", "--min-nonlocal", "-1"],
    ],
)
def test_usage_errors_exit_64(argv: list[str]):
    assert run(argv) == 64


def test_malformed_box_file_exits_65(tmp_path: Path):
    path = tmp_path / "broken.json"
    path.write_text('{"n": 3, "d": 2, "edges": [[[1.0]]]}')
    assert run(["report", str(path)]) == 65


def test_missing_box_file_exits_65():
    assert run(["report", "missing-file.json"]) == 65


@pytest.mark.slow
def test_verify_paper_quick(capsys: pytest.CaptureFixture[str]):
    assert run(["verify-paper", "--quick", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert all(r["passed"] for r in rows)
