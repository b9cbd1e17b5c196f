import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from driftlab import schemas
from driftlab.cli import main

from conftest import mini_config, run_cli_pipeline, write_mini_datasets

REPORTS = {
    "shift.json": "shift",
    "neighbors.json": "neighbors",
    "eval_sim.json": "eval-sim",
    "eval_syn.json": "eval-syn",
    "senti_matrix.json": "senti-matrix",
    "senti_share.json": "senti-share",
}


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = write_mini_datasets(root / "data")
    codes = run_cli_pipeline(root / "ws", data)
    return root / "ws", data, codes


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_pipeline_succeeds(pipeline):
    assert set(pipeline[2]) == {0}


@pytest.mark.parametrize("name,kind", sorted(REPORTS.items()))
def test_reports_validate(pipeline, name, kind):
    report = json.loads((pipeline[0] / "reports" / name).read_text())
    assert report["schema_version"] == 1
    jsonschema.validate(report, schemas.BY_KIND[kind])


def test_shift_report_ranks_drifted_first(pipeline):
    scores = json.loads((pipeline[0] / "reports" / "shift.json").read_text())["scores"]
    assert {s["word"] for s in scores[:2]} == {"drift0#NOUN", "drift1#NOUN"}


def test_manifest_hashes(pipeline):
    from driftlab.workspace import Workspace, sha256

    ws = Workspace.open(pipeline[0])
    for rel, entry in ws.latest().items():
        assert sha256(pipeline[0] / rel) == entry["sha256"]


def test_alpha_zero_is_config_error(pipeline, capsys):
    code = main(["train", "--workspace", str(pipeline[0]), "--alpha", "0"])
    assert code == 3
    assert error_of(capsys)["error"] == "config"


def test_unknown_flag(tmp_path, capsys):
    assert main(["shift", "--workspace", str(tmp_path), "--bogus"]) == 2
    err = error_of(capsys)
    assert err["exit_code"] == 2


def test_no_subcommand(capsys):
    assert main([]) == 2


def test_missing_artifact(tmp_path, capsys):
    assert main(["report", "--workspace", str(tmp_path / "empty")]) == 4
    assert main(["align", "--workspace", str(tmp_path / "empty")]) == 4
    assert error_of(capsys)["error"] == "missing-artifact"


def test_hash_mismatch(tmp_path, capsys):
    ws = tmp_path / "ws"
    assert main(["synth", "--workspace", str(ws)]) == 0
    assert main(["ingest", "--workspace", str(ws)]) == 0
    corpus = ws / "corpus" / "period_0.npz"
    corpus.write_bytes(corpus.read_bytes() + b"tampered")
    assert main(["train", "--workspace", str(ws), "--config", mini_config(), "--epochs", "1"]) == 5
    assert error_of(capsys)["error"] == "hash-mismatch"


def write_corpus(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


PERIODS = "[periods]\nstart_year = 2000\nyears = 5\ncount = 2\n"


def test_malformed_ingest_exit_code(tmp_path, capsys):
    good = [json.dumps({"date": f"200{y}-01-01", "sentences": [[["a", "a", "NOUN"], ["b", "b", "NOUN"]]]}) for y in (1, 6)]
    corpus = write_corpus(tmp_path / "c.jsonl", [*good, "{not json", json.dumps({"date": "2006-02-02"})])
    (tmp_path / "p.ini").write_text(PERIODS)
    args = ["ingest", "--workspace", str(tmp_path / "ws"), "--corpus", str(corpus), "--periods", str(tmp_path / "p.ini")]
    assert main(args) == 6
    assert error_of(capsys)["error"] == "input"


def test_skip_malformed(tmp_path, capsys):
    good = [json.dumps({"date": f"200{y}-01-01", "sentences": [[["a", "a", "NOUN"], ["b", "b", "NOUN"]]]}) for y in (1, 6)]
    corpus = write_corpus(tmp_path / "c.jsonl", [*good, "{not json"])
    (tmp_path / "p.ini").write_text(PERIODS)
    args = ["ingest", "--workspace", str(tmp_path / "ws"), "--corpus", str(corpus), "--periods", str(tmp_path / "p.ini")]
    assert main([*args, "--skip-malformed"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["malformed"] == 1


def test_env_workspace(tmp_path, monkeypatch):
    monkeypatch.setenv("DRIFTLAB_WORKSPACE", str(tmp_path / "envws"))
    assert main(["synth"]) == 0
    assert (tmp_path / "envws" / "manifest.json").exists()


def test_console_script_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "driftlab.cli", "report", "--workspace", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 4
    assert json.loads(proc.stderr)["error"] == "missing-artifact"


def test_malformed_reported_before_empty_period(tmp_path, capsys):
    good = json.dumps({"date": "2001-01-01", "sentences": [[["a", "a", "NOUN"]]]})
    corpus = write_corpus(tmp_path / "c.jsonl", [good, "{not json"])
    (tmp_path / "p.ini").write_text(PERIODS)
    args = ["ingest", "--workspace", str(tmp_path / "ws"), "--corpus", str(corpus), "--periods", str(tmp_path / "p.ini")]
    assert main(args) == 6
    capsys.readouterr()
    assert main([*args, "--skip-malformed"]) == 7
    assert "period 1" in error_of(capsys)["message"]
