"""HTTP JSON API for the human verification workflow.

Serves the exported verification tasks, accepts accept/reject decisions, and
persists them through the append-only decision log that `verify apply`
consumes.  A single shared token guards writes; annotator identity is a
free-text field stored with each submission.  Static UI assets, when present,
are served from the same origin.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .corpus import load_corpus
from .labeling import (
    VerificationTask,
    append_decisions,
    export_verification,
    load_decisions,
)

DEFAULT_TOKEN_ENV = "HINTQA_ANNOTATION_TOKEN"


class DecisionItem(BaseModel):
    answer: str
    accepted: bool


class DecisionSubmission(BaseModel):
    version: str
    annotator: str = ""
    decisions: list[DecisionItem] = Field(default_factory=list)


def create_app(
    corpus_dir: str | Path,
    decisions_path: str | Path,
    token: str = "",
    ui_dir: str | Path | None = None,
    splits: tuple[str, ...] = ("dev", "test"),
) -> FastAPI:
    corpus = load_corpus(corpus_dir)
    tasks = {t.question_id: t for t in export_verification(corpus, splits)}
    decisions_path = Path(decisions_path)
    write_lock = threading.Lock()

    app = FastAPI(title="hintqa verification")

    def check_token(request: Request) -> None:
        if not token:
            return
        supplied = request.headers.get("x-annotation-token", "")
        if not supplied:
            auth = request.headers.get("authorization", "")
            if auth.lower().startswith("bearer "):
                supplied = auth[7:]
        if supplied != token:
            raise HTTPException(status_code=401, detail="bad or missing annotation token")

    def task_with_decisions(task: VerificationTask) -> dict:
        logged = load_decisions(decisions_path).get(task.question_id, {})
        record = task.to_dict()
        record["decisions"] = {
            c.answer: logged[c.answer] for c in task.candidates if c.answer in logged
        }
        return record

    @app.get("/api/tasks")
    def list_tasks(_: None = Depends(check_token)) -> list[dict]:
        logged = load_decisions(decisions_path)
        summaries = []
        for qid in sorted(tasks):
            task = tasks[qid]
            decided = sum(1 for c in task.candidates if c.answer in logged.get(qid, {}))
            summaries.append(
                {
                    "question_id": qid,
                    "question_text": task.question_text,
                    "candidates": len(task.candidates),
                    "decided": decided,
                    "complete": decided == len(task.candidates),
                }
            )
        return summaries

    @app.get("/api/tasks/{question_id}")
    def fetch_task(question_id: str, _: None = Depends(check_token)) -> dict:
        task = tasks.get(question_id)
        if task is None:
            raise HTTPException(status_code=404, detail=f"no task for question {question_id}")
        return task_with_decisions(task)

    @app.post("/api/tasks/{question_id}/decisions")
    def submit_decisions(
        question_id: str, submission: DecisionSubmission, _: None = Depends(check_token)
    ) -> dict:
        task = tasks.get(question_id)
        if task is None:
            raise HTTPException(status_code=404, detail=f"no task for question {question_id}")
        if submission.version != task.version():
            raise HTTPException(
                status_code=409,
                detail="task version is stale (corpus changed); reload the task",
            )
        listed = {c.answer for c in task.candidates}
        supplied = {d.answer: d.accepted for d in submission.decisions}
        unknown = sorted(set(supplied) - listed)
        if unknown:
            raise HTTPException(status_code=400, detail=f"decisions for unlisted answers: {unknown}")
        missing = sorted(listed - set(supplied))
        if missing:
            raise HTTPException(status_code=400, detail=f"undecided candidates: {missing}")
        with write_lock:
            append_decisions(decisions_path, question_id, supplied, submission.annotator)
        return task_with_decisions(task)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


__all__ = ["create_app", "DEFAULT_TOKEN_ENV", "DecisionSubmission", "DecisionItem"]
