import json
import shutil
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from holoproof.cli import main
from holoproof.prover import CORPUS_DIR

SCHEMA = json.loads(resources.files("holoproof").joinpath("schema/report-v1.schema.json").read_text())


def test_single_identity_ok(capsys):
    assert main(["--identity", "10.1.39"]) == 0
    out = capsys.readouterr().out
    assert "10.1.39  PROVED" in out and "1/1 proved" in out


def test_json_to_stdout_validates(capsys):
    assert main(["--identity", "10.1.49", "--identity", "10.1.52", "--json", "-"]) == 0
    captured = capsys.readouterr()
    doc = json.loads(captured.out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["schema_version"] == 1 and doc["order"] == 30
    assert [r["verdict"] for r in doc["reports"]] == ["PROVED", "ASSUMPTION_GATED"]
    assert "2/2 proved (1 assumption-gated)" in captured.err


def test_json_to_file(tmp_path):
    path = tmp_path / "out.json"
    assert main(["--identity", "lemma-1", "--json", str(path)]) == 0
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)


def test_failed_report_validates(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    shutil.copytree(CORPUS_DIR, corpus)
    f = corpus / "10_1_39.hid"
    f.write_text(f.read_text().replace("rhs: gf(n, t, (-1)^n", "rhs: gf(n, t, 2*(-1)^n"))
    assert main(["--corpus", str(corpus), "--identity", "10.1.39", "--json", "-"]) == 1
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["reports"][0]["verdict"] == "FAILED" and doc["reports"][0]["witness"]


def test_check_certificates_prints_stored(capsys):
    assert main(["--identity", "10.1.49", "--check-certificates"]) == 0
    out = capsys.readouterr().out
    assert "certificate  stored: [" in out and "] verified" in out


@pytest.mark.parametrize("argv", [
    ["--identity", "10.9.99"],
    ["--order", "0"],
    ["--max-ct-order", "0"],
    ["--bogus"],
    ["--all", "--identity", "10.1.39"],
])
def test_configuration_errors(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_missing_corpus(tmp_path):
    assert main(["--corpus", str(tmp_path / "nowhere")]) == 2


def test_parse_error_in_corpus(tmp_path, capsys):
    (tmp_path / "bad.hid").write_text('identity "x" {\n  lhs: sum(k 0, n, k);\n}\n')
    assert main(["--corpus", str(tmp_path)]) == 2
    assert "2:14" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "Expansion catalog" in capsys.readouterr().out


def test_console_script_runs_all():
    proc = subprocess.run([sys.executable, "-m", "holoproof", "--all"], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert "15/15 proved (2 assumption-gated)" in proc.stdout
