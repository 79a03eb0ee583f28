from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from hintqa.corpus import save_corpus
from hintqa.serve import create_app

from test_labeler import build_verification_fixture


@pytest.fixture
def served(tmp_path):
    corpus = build_verification_fixture()
    corpus_dir = tmp_path / "corpus"
    save_corpus(corpus, corpus_dir)
    decisions = tmp_path / "decisions.jsonl"
    app = create_app(corpus_dir, decisions, token="secret-token")
    client = TestClient(app)
    client.headers["X-Annotation-Token"] = "secret-token"
    return client, decisions


def fetch_task(client, qid: str) -> dict:
    response = client.get(f"/api/tasks/{qid}")
    assert response.status_code == 200
    return response.json()


class TestTaskEndpoints:
    def test_list_tasks(self, served):
        client, _ = served
        tasks = client.get("/api/tasks").json()
        assert [t["question_id"] for t in tasks] == ["q1", "q2"]
        q1 = tasks[0]
        assert q1["candidates"] == 2
        assert q1["decided"] == 0
        assert q1["complete"] is False

    def test_fetch_task_shape(self, served):
        client, _ = served
        task = fetch_task(client, "q1")
        flags = {c["answer"]: c["matched_gold"] for c in task["candidates"]}
        assert flags == {"Saturn": True, "Titan": False}
        assert task["gold_answers"] == ["Saturn"]
        assert task["version"]

    def test_fetch_unknown_task_404(self, served):
        client, _ = served
        assert client.get("/api/tasks/ghost").status_code == 404

    def test_bad_token_401(self, served):
        client, _ = served
        response = client.get("/api/tasks", headers={"X-Annotation-Token": "wrong"})
        assert response.status_code == 401

    def test_bearer_token_accepted(self, served):
        client, _ = served
        client.headers.pop("X-Annotation-Token")
        response = client.get(
            "/api/tasks", headers={"Authorization": "Bearer secret-token"}
        )
        assert response.status_code == 200


class TestSubmitDecisions:
    def submit(self, client, qid: str, decisions: dict[str, bool], version: str | None = None):
        task = fetch_task(client, qid)
        return client.post(
            f"/api/tasks/{qid}/decisions",
            json={
                "version": version or task["version"],
                "annotator": "ann-1",
                "decisions": [{"answer": a, "accepted": ok} for a, ok in decisions.items()],
            },
        )

    def test_submit_persists_and_reloads(self, served):
        client, decisions_path = served
        response = self.submit(client, "q1", {"Saturn": True, "Titan": False})
        assert response.status_code == 200
        assert response.json()["decisions"] == {"Saturn": True, "Titan": False}
        # read-your-writes through a fresh fetch
        again = fetch_task(client, "q1")
        assert again["decisions"] == {"Saturn": True, "Titan": False}
        assert decisions_path.is_file()

    def test_resubmission_overwrites_with_audit_trail(self, served):
        client, decisions_path = served
        self.submit(client, "q1", {"Saturn": True, "Titan": False})
        self.submit(client, "q1", {"Saturn": True, "Titan": True})
        assert fetch_task(client, "q1")["decisions"] == {"Saturn": True, "Titan": True}
        # append-only log keeps both submissions
        lines = decisions_path.read_text().strip().splitlines()
        assert len(lines) == 4

    def test_incomplete_submission_400(self, served):
        client, _ = served
        response = self.submit(client, "q1", {"Saturn": True})
        assert response.status_code == 400
        assert "undecided" in response.json()["detail"]

    def test_unknown_answer_400(self, served):
        client, _ = served
        response = self.submit(client, "q1", {"Saturn": True, "Titan": False, "Ghost": True})
        assert response.status_code == 400
        assert "unlisted" in response.json()["detail"]

    def test_stale_version_409(self, served):
        client, _ = served
        response = self.submit(client, "q1", {"Saturn": True, "Titan": False}, version="stale")
        assert response.status_code == 409

    def test_list_shows_progress_after_submit(self, served):
        client, _ = served
        self.submit(client, "q1", {"Saturn": True, "Titan": False})
        tasks = {t["question_id"]: t for t in client.get("/api/tasks").json()}
        assert tasks["q1"]["complete"] is True
        assert tasks["q2"]["complete"] is False
