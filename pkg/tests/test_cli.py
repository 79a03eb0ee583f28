from __future__ import annotations

import json
from pathlib import Path

import pytest

from hintqa.cli import main
from hintqa.corpus import load_corpus, load_runs

from conftest import question_with_hints
from test_labeler import build_verification_fixture
from hintqa.corpus import save_corpus


def write_questions(path: Path, questions) -> None:
    from hintqa.cli import _save_questions_file

    _save_questions_file(questions, str(path))


def write_endpoints(path: Path, threshold: int = 3, closed_book=()) -> None:
    config = {
        "models": [
            {"provider": "mock", "name": "mock-a", "threshold": threshold, "closed_book": list(closed_book)}
        ],
        "judge": None,
    }
    path.write_text(json.dumps(config))


@pytest.fixture
def workdir(tmp_path):
    questions = [question_with_hints("q1", 5, "Saturn"), question_with_hints("q2", 2, "Amazon")]
    write_questions(tmp_path / "questions.jsonl", questions)
    write_endpoints(tmp_path / "endpoints.json")
    return tmp_path


def run_cli(*argv: str) -> int:
    return main(list(argv))


class TestForgeAndLabel:
    def test_forge_builds_corpus(self, workdir):
        code = run_cli(
            "forge",
            "--questions", str(workdir / "questions.jsonl"),
            "--out", str(workdir / "corpus"),
            "--report", str(workdir / "forge.json"),
        )
        assert code == 0
        corpus = load_corpus(workdir / "corpus")
        assert len(corpus.passages) == 329
        report = json.loads((workdir / "forge.json").read_text())
        assert report["passages"] == 329

    def test_label_writes_judgments_and_qrels(self, workdir):
        run_cli("forge", "--questions", str(workdir / "questions.jsonl"), "--out", str(workdir / "corpus"))
        code = run_cli(
            "label",
            "--corpus", str(workdir / "corpus"),
            "--endpoints", str(workdir / "endpoints.json"),
            "--out", str(workdir / "labeled"),
            "--qrels", str(workdir / "qrels.tsv"),
        )
        assert code == 0
        labeled = load_corpus(workdir / "labeled")
        assert len(labeled.judgments) == 329
        assert len((workdir / "qrels.tsv").read_text().splitlines()) == 329

    def test_filter_assigns_splits(self, workdir):
        write_endpoints(workdir / "endpoints.json", closed_book=["q1"])
        code = run_cli(
            "filter",
            "--questions", str(workdir / "questions.jsonl"),
            "--endpoints", str(workdir / "endpoints.json"),
            "--out", str(workdir / "filtered.jsonl"),
            "--n-train", "1", "--n-test", "1", "--seed", "3",
        )
        assert code == 0
        lines = [json.loads(l) for l in (workdir / "filtered.jsonl").read_text().splitlines()]
        by_id = {r["id"]: r for r in lines}
        assert by_id["q1"]["parametric"] is True
        assert by_id["q1"]["split"] == "train"
        assert by_id["q2"]["parametric"] is False
        assert by_id["q2"]["split"] == "test"


class TestRetrievalCommands:
    @pytest.fixture
    def labeled_dir(self, workdir):
        run_cli("forge", "--questions", str(workdir / "questions.jsonl"), "--out", str(workdir / "corpus"))
        run_cli(
            "label",
            "--corpus", str(workdir / "corpus"),
            "--endpoints", str(workdir / "endpoints.json"),
            "--out", str(workdir / "labeled"),
            "--qrels", str(workdir / "qrels.tsv"),
        )
        return workdir / "labeled"

    def test_retrieve_rerank_fuse_read_eval(self, workdir, labeled_dir):
        assert run_cli(
            "retrieve", "--corpus", str(labeled_dir), "--method", "bm25",
            "--k", "50", "--out", str(workdir / "bm25.run"),
        ) == 0
        runs = load_runs(workdir / "bm25.run")
        assert runs and all(len(r.entries) <= 50 for r in runs)

        assert run_cli(
            "rerank", "--corpus", str(labeled_dir), "--in", str(workdir / "bm25.run"),
            "--out", str(workdir / "rr.run"), "--scorer", "hint-count", "--depth", "10",
        ) == 0
        assert load_runs(workdir / "rr.run")

        assert run_cli(
            "fuse", "--corpus", str(labeled_dir), "--run", str(workdir / "rr.run"),
            "--method", "freq", "--k", "3", "--out", str(workdir / "contexts.jsonl"),
        ) == 0

        assert run_cli(
            "read", "--corpus", str(labeled_dir), "--contexts", str(workdir / "contexts.jsonl"),
            "--endpoints", str(workdir / "endpoints.json"), "--out", str(workdir / "answers.jsonl"),
        ) == 0

        assert run_cli(
            "eval", "--qrels", str(workdir / "qrels.tsv"), "--run", str(workdir / "bm25.run"),
            "--run", str(workdir / "rr.run"), "--answers", str(workdir / "answers.jsonl"),
            "--corpus", str(labeled_dir), "--out-prefix", str(workdir / "report"),
        ) == 0
        rows = [json.loads(l) for l in (workdir / "report.jsonl").read_text().splitlines()]
        assert len(rows) == 3  # two runs + one reader
        assert (workdir / "report.md").is_file()

    def test_dense_retrieve(self, workdir, labeled_dir):
        assert run_cli(
            "retrieve", "--corpus", str(labeled_dir), "--method", "dense",
            "--k", "10", "--out", str(workdir / "dense.run"),
        ) == 0
        assert load_runs(workdir / "dense.run")


class TestVerifyCommands:
    def test_export_then_apply(self, tmp_path):
        corpus = build_verification_fixture()
        save_corpus(corpus, tmp_path / "corpus")
        assert run_cli(
            "verify", "export", "--corpus", str(tmp_path / "corpus"),
            "--out", str(tmp_path / "tasks.jsonl"),
        ) == 0
        tasks = [json.loads(l) for l in (tmp_path / "tasks.jsonl").read_text().splitlines()]
        assert {t["question_id"] for t in tasks} == {"q1", "q2"}

        from hintqa.labeling import append_decisions

        log = tmp_path / "decisions.jsonl"
        append_decisions(log, "q1", {"Saturn": False, "Titan": False}, "ann")
        append_decisions(log, "q2", {"Amazon": True}, "ann")
        assert run_cli(
            "verify", "apply", "--corpus", str(tmp_path / "corpus"),
            "--decisions", str(log), "--out", str(tmp_path / "verified"),
            "--changes", str(tmp_path / "changes.jsonl"),
        ) == 0
        updated = load_corpus(tmp_path / "verified")
        q1_labels = {j.label for (qid, _), j in updated.judgments.items() if qid == "q1"}
        assert q1_labels == {1}
        assert (tmp_path / "changes.jsonl").is_file()


class TestRunCommand:
    def test_manifest_execution(self, workdir, capsys):
        run_cli("forge", "--questions", str(workdir / "questions.jsonl"), "--out", str(workdir / "corpus"))
        run_cli(
            "label", "--corpus", str(workdir / "corpus"),
            "--endpoints", str(workdir / "endpoints.json"), "--out", str(workdir / "labeled"),
        )
        manifest = {
            "corpus": str(workdir / "labeled"),
            "mode": "standard",
            "k": 1,
            "retriever": {"method": "bm25", "k": 20},
            "fusion": {"method": "union_freq"},
            "readers": [{"provider": "mock", "name": "reader-a", "threshold": 3}],
        }
        (workdir / "manifest.json").write_text(json.dumps(manifest))
        assert run_cli("run", "--manifest", str(workdir / "manifest.json"), "--out", str(workdir / "exp")) == 0
        out = capsys.readouterr().out
        assert "em:reader-a" in out
        assert (workdir / "exp" / "report.md").is_file()

    def test_error_reported_with_command(self, workdir, capsys):
        code = run_cli("forge", "--questions", str(workdir / "missing.jsonl"), "--out", str(workdir / "x"))
        assert code == 1
        assert "hintqa forge:" in capsys.readouterr().err
