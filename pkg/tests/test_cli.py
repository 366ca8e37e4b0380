import json
import re

import pytest
from click.testing import CliRunner

from chainwatch.cli import main

from .conftest import data_path


@pytest.fixture()
def runner():
    return CliRunner()


def run_args(store, auto=True):
    args = [
        "run",
        "--graph", data_path("mini_mb.json"),
        "--article", data_path("case_study_article.txt"),
        "--focal", "Mercedes-Benz Group AG",
        "--backend", "rule",
        "--store", str(store),
    ]
    if auto:
        args.append("--auto-approve")
    return args


def extract_run_id(output):
    return re.search(r"run_id: (\S+)", output).group(1)


class TestIngestGraph:
    def test_valid_graph(self, runner):
        result = runner.invoke(main, ["ingest-graph", data_path("mini_mb.json")])
        assert result.exit_code == 0
        assert "8 companies, 6 edges" in result.output

    def test_invalid_graph(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"companies": [], "edges": [{"supplier": "x", "customer": "y"}]}')
        result = runner.invoke(main, ["ingest-graph", str(bad)])
        assert result.exit_code != 0
        assert "'x'" in result.output


class TestRun:
    def test_auto_approved_run(self, runner, tmp_path):
        result = runner.invoke(main, run_args(tmp_path))
        assert result.exit_code == 0, result.output
        assert "stage7: Succeeded" in result.output
        assert "Replace" in result.output
        run_id = extract_run_id(result.output)
        assert (tmp_path / f"{run_id}.json").exists()

    def test_gated_run_then_review_resumes_sourcing(self, runner, tmp_path):
        result = runner.invoke(main, run_args(tmp_path, auto=False))
        assert result.exit_code == 0, result.output
        assert "stage7: Skipped (awaiting review)" in result.output
        run_id = extract_run_id(result.output)

        review = runner.invoke(
            main,
            ["review", run_id, "--verdict", "approve", "--reviewer", "cli-test",
             "--store", str(tmp_path)],
        )
        assert review.exit_code == 0, review.output
        assert "review_state: Approved" in review.output
        assert "stage7: Succeeded" in review.output

        record = json.loads((tmp_path / f"{run_id}.json").read_text())
        assert record["stages"]["o7_sourcing"][0]["candidates"][0]["name"] == "Umicore"

    def test_review_rejects_second_verdict(self, runner, tmp_path):
        result = runner.invoke(main, run_args(tmp_path, auto=False))
        run_id = extract_run_id(result.output)
        args = ["review", run_id, "--verdict", "approve", "--store", str(tmp_path)]
        assert runner.invoke(main, args).exit_code == 0
        second = runner.invoke(main, args)
        assert second.exit_code != 0
        assert "not allowed" in second.output

    def test_revise_then_override_via_edit_files(self, runner, tmp_path):
        result = runner.invoke(main, run_args(tmp_path, auto=False))
        run_id = extract_run_id(result.output)

        edits = tmp_path / "edits.json"
        edits.write_text(json.dumps(
            [{"supplier": "johnson-matthey-plc", "justification": "needs legal sign-off"}]
        ))
        revised = runner.invoke(
            main,
            ["review", run_id, "--verdict", "revise", "--edits", str(edits),
             "--store", str(tmp_path)],
        )
        assert revised.exit_code == 0, revised.output
        assert "review_state: PendingReview" in revised.output

        items = tmp_path / "items.json"
        items.write_text(json.dumps(
            [{"supplier": "johnson-matthey-plc", "action": "IncreaseMonitoring",
              "justification": "risk partially accepted"}]
        ))
        overridden = runner.invoke(
            main,
            ["review", run_id, "--verdict", "override", "--edits", str(items),
             "--store", str(tmp_path)],
        )
        assert overridden.exit_code == 0, overridden.output
        assert "review_state: Overridden" in overridden.output
        assert "stage7: Skipped (no replace items)" in overridden.output

        record = json.loads((tmp_path / f"{run_id}.json").read_text())
        verdicts = [e["verdict"] for e in record["stages"]["o6_plan"]["audit"]]
        assert verdicts == ["revise", "override"]


class TestExportViz:
    def test_writes_document(self, runner, tmp_path):
        result = runner.invoke(main, run_args(tmp_path))
        run_id = extract_run_id(result.output)
        out = tmp_path / "viz.json"
        viz = runner.invoke(
            main, ["export-viz", run_id, "--out", str(out), "--store", str(tmp_path)]
        )
        assert viz.exit_code == 0, viz.output
        doc = json.loads(out.read_text())
        assert {n["tier"] for n in doc["nodes"]} == {0, 1, 2}


class TestEval:
    def test_scenario_suite_scores_perfectly(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            [
                "eval",
                "--scenarios", data_path("scenarios"),
                "--graph", data_path("orion_ev.json"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "N = 10 scenarios" in result.output
        # every stage row reports a 1.000 +/- 0.000 triple
        for line in result.output.splitlines():
            if "+/-" in line:
                assert line.count("1.000 +/- 0.000") == 3, line
        detail = json.loads(out.read_text())
        assert len(detail["runs"]) == 10
