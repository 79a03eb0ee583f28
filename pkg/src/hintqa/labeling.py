"""Graded relevance labeling, answer harvesting, and human verification.

Labeling asks each configured model to answer the question from the passage
alone; a passage that lets at least one model produce a correct answer is
fully relevant (2), any other same-question passage is partially relevant (1).
Cross-question pairs are irrelevant (0) and stay implicit.  Human verification
reviews the collected model answers for dev/test questions and its decisions
feed back into labels, answer pools, and the leakage gate.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import (
    Corpus,
    CorpusError,
    ModelAnswer,
    Passage,
    Question,
    RelevanceJudgment,
)
from .forge import LeakageOracle, LexicalLeakageOracle, detect_leakage
from .judge import NO_ANSWER, ChatProvider, answer_open_book, judge_against_pool
from .normalize import normalize_answer

log = logging.getLogger(__name__)

JOB_PENDING = "pending"
JOB_DONE = "done"
JOB_FAILED = "failed"


@dataclass
class LabelingJob:
    """One (question, passage) unit of labeling work."""

    question_id: str
    passage_id: str
    status: str = JOB_PENDING
    result: RelevanceJudgment | None = None
    error: str | None = None


class LabelingError(RuntimeError):
    """Some labeling jobs could not be resolved; their judgments were withheld."""


def label_passage(
    question: Question,
    passage: Passage,
    providers: Sequence[ChatProvider],
    judge_provider: ChatProvider | None = None,
) -> tuple[RelevanceJudgment, list[str]]:
    """Label one same-question passage and collect newly harvested answers.

    Each provider answers open-book; each answer is judged against the
    question's answer pool.  Any correct verdict makes the passage label 2 and
    adds the verdict's answer to the harvest; otherwise the label is 1.
    Provider failures propagate so the judgment is withheld, never defaulted.
    """
    if passage.source_question != question.id:
        raise ValueError(
            f"passage {passage.id} belongs to {passage.source_question}, not {question.id}"
        )
    pool = question.answer_pool()
    model_answers: list[ModelAnswer] = []
    harvested: list[str] = []
    for provider in providers:
        answer = answer_open_book(provider, question.text, passage.text)
        if answer is None:
            model_answers.append(ModelAnswer(provider.name, NO_ANSWER, False))
            continue
        verdict = judge_against_pool(judge_provider, question.text, pool, answer)
        model_answers.append(ModelAnswer(provider.name, answer, verdict.correct))
        if verdict.correct and answer not in pool and answer not in harvested:
            harvested.append(answer)
    label = 2 if any(a.correct for a in model_answers) else 1
    judgment = RelevanceJudgment(
        question_id=question.id,
        passage_id=passage.id,
        label=label,
        model_answers=model_answers,
    )
    return judgment, harvested


@dataclass
class LabelReport:
    questions: int = 0
    passages: int = 0
    label_2: int = 0
    label_1: int = 0
    harvested: int = 0
    failed: int = 0
    judge_mode: str = "lexical"

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def run_labeling(
    corpus: Corpus,
    providers: Sequence[ChatProvider],
    judge_provider: ChatProvider | None = None,
) -> tuple[Corpus, LabelReport]:
    """Label every same-question passage, producing a new corpus version.

    Questions are processed in id order and their passages likewise, so
    harvesting (which grows the answer pool mid-question) is deterministic.
    If any job fails the successful judgments are still returned on the
    raised ``LabelingError`` for inspection, but no corpus is produced.
    """
    report = LabelReport(judge_mode=judge_provider.name if judge_provider else "lexical")
    questions: dict[str, Question] = {}
    judgments: dict[tuple[str, str], RelevanceJudgment] = dict(corpus.judgments)
    failures: list[LabelingJob] = []
    for qid in sorted(corpus.questions):
        question = corpus.questions[qid]
        harvested = list(question.harvested)
        report.questions += 1
        for passage in corpus.passages_of(qid):
            working = Question(
                id=question.id,
                text=question.text,
                answers=list(question.answers),
                hints=question.hints,
                split=question.split,
                harvested=harvested,
            )
            try:
                judgment, new_answers = label_passage(working, passage, providers, judge_provider)
            except Exception as exc:  # noqa: BLE001 - recorded per job, re-raised below
                failures.append(
                    LabelingJob(qid, passage.id, status=JOB_FAILED, error=str(exc))
                )
                report.failed += 1
                continue
            harvested = harvested + [a for a in new_answers if a not in harvested]
            judgments[(qid, passage.id)] = judgment
            report.passages += 1
            if judgment.label == 2:
                report.label_2 += 1
            else:
                report.label_1 += 1
        report.harvested += len(harvested) - len(question.harvested)
        questions[qid] = Question(
            id=question.id,
            text=question.text,
            answers=list(question.answers),
            hints=question.hints,
            split=question.split,
            qtype=question.qtype,
            difficulty=question.difficulty,
            parametric=question.parametric,
            harvested=harvested,
        )
    if failures:
        detail = "; ".join(f"({j.question_id}, {j.passage_id}): {j.error}" for j in failures[:5])
        raise LabelingError(f"{len(failures)} labeling job(s) failed: {detail}")
    labeled = Corpus(questions, dict(corpus.passages), judgments)
    labeled.validate()
    return labeled, report


# ---------------------------------------------------------------------------
# Human verification


@dataclass
class AnswerCandidate:
    answer: str
    model: str
    matched_gold: bool


@dataclass
class VerificationTask:
    """One question's model answers awaiting human accept/reject decisions."""

    question_id: str
    question_text: str
    gold_answers: list[str]
    candidates: list[AnswerCandidate]
    decisions: dict[str, bool] = field(default_factory=dict)

    def version(self) -> str:
        key = json.dumps(
            [self.question_id, self.gold_answers, [c.answer for c in self.candidates]],
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]

    def undecided(self) -> list[str]:
        return [c.answer for c in self.candidates if c.answer not in self.decisions]

    def validate_decisions(self) -> None:
        listed = {c.answer for c in self.candidates}
        unknown = set(self.decisions) - listed
        if unknown:
            raise ValueError(f"task {self.question_id}: decisions for unlisted answers {sorted(unknown)}")
        missing = self.undecided()
        if missing:
            raise ValueError(f"task {self.question_id}: undecided candidates {missing}")

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "question_text": self.question_text,
            "gold_answers": self.gold_answers,
            "candidates": [
                {"answer": c.answer, "model": c.model, "matched_gold": c.matched_gold}
                for c in self.candidates
            ],
            "decisions": self.decisions,
            "version": self.version(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "VerificationTask":
        return cls(
            question_id=record["question_id"],
            question_text=record["question_text"],
            gold_answers=list(record["gold_answers"]),
            candidates=[
                AnswerCandidate(c["answer"], c["model"], bool(c["matched_gold"]))
                for c in record["candidates"]
            ],
            decisions={k: bool(v) for k, v in record.get("decisions", {}).items()},
        )


def export_verification(
    corpus: Corpus, splits: Iterable[str] = ("dev", "test")
) -> list[VerificationTask]:
    """One task per dev/test question listing all collected model answers.

    Candidates that exactly match a gold answer (after normalization) carry
    ``matched_gold`` so the review interface can pre-highlight them.  Requires
    labeling to be complete for the filtered questions.
    """
    wanted = set(splits)
    tasks = []
    for qid in sorted(corpus.questions):
        question = corpus.questions[qid]
        if question.split not in wanted:
            continue
        passages = corpus.passages_of(qid)
        missing = [p.id for p in passages if (qid, p.id) not in corpus.judgments]
        if missing:
            raise CorpusError(
                f"question {qid}: labeling incomplete ({len(missing)} unlabeled passages)"
            )
        gold_norm = {normalize_answer(a) for a in question.answers}
        seen: dict[str, str] = {}
        for passage in passages:
            judgment = corpus.judgments[(qid, passage.id)]
            for ma in judgment.model_answers:
                if ma.answer == NO_ANSWER or not ma.answer.strip():
                    continue
                seen.setdefault(ma.answer, ma.model)
        candidates = [
            AnswerCandidate(answer, model, normalize_answer(answer) in gold_norm)
            for answer, model in sorted(seen.items())
        ]
        tasks.append(
            VerificationTask(
                question_id=qid,
                question_text=question.text,
                gold_answers=list(question.answers),
                candidates=candidates,
            )
        )
    return tasks


def apply_verification(
    corpus: Corpus,
    tasks: Sequence[VerificationTask],
    oracle: LeakageOracle | None = None,
) -> tuple[Corpus, list[dict]]:
    """Fold human decisions back into the corpus, producing a new version.

    Per decided task: rejected answers leave the question's harvested pool,
    accepted ones enter it, and every same-question judgment is relabeled (2
    iff it produced an accepted answer, else 1) and marked verified.  The
    leakage gate then re-runs against the updated pools and questions that now
    leak are removed.  The operation is idempotent.
    """
    oracle = oracle or LexicalLeakageOracle()
    changes: list[dict] = []
    questions = dict(corpus.questions)
    judgments = dict(corpus.judgments)

    for task in tasks:
        task.validate_decisions()
        question = questions.get(task.question_id)
        if question is None:
            raise CorpusError(f"verification task for unknown question {task.question_id}")
        accepted = sorted(a for a, ok in task.decisions.items() if ok)
        old_pool = question.answer_pool()
        new_harvested = [a for a in accepted if a not in question.answers]
        updated = Question(
            id=question.id,
            text=question.text,
            answers=list(question.answers),
            hints=question.hints,
            split=question.split,
            qtype=question.qtype,
            difficulty=question.difficulty,
            parametric=question.parametric,
            harvested=new_harvested,
        )
        questions[question.id] = updated
        new_pool = updated.answer_pool()
        if set(new_pool) != set(old_pool):
            changes.append(
                {
                    "question_id": question.id,
                    "change": "answer_pool",
                    "added": sorted(set(new_pool) - set(old_pool)),
                    "removed": sorted(set(old_pool) - set(new_pool)),
                }
            )
        accepted_set = set(accepted)
        for passage in corpus.passages_of(question.id):
            key = (question.id, passage.id)
            judgment = judgments.get(key)
            if judgment is None or judgment.label == 0:
                continue
            has_accepted = any(ma.answer in accepted_set for ma in judgment.model_answers)
            new_label = 2 if has_accepted else 1
            if new_label != judgment.label:
                changes.append(
                    {
                        "question_id": question.id,
                        "passage_id": passage.id,
                        "change": "label",
                        "old": judgment.label,
                        "new": new_label,
                    }
                )
            judgments[key] = RelevanceJudgment(
                question_id=judgment.question_id,
                passage_id=judgment.passage_id,
                label=new_label,
                model_answers=judgment.model_answers,
                verified=True,
            )

    # Accepted answers may introduce new leakage; re-check every question.
    removed = [
        qid
        for qid, q in sorted(questions.items())
        if detect_leakage(q.hints, q.answer_pool(), oracle)
    ]
    for qid in removed:
        changes.append({"question_id": qid, "change": "removed", "reason": "leakage"})
        del questions[qid]
    if removed:
        gone = set(removed)
        passages = {pid: p for pid, p in corpus.passages.items() if p.source_question not in gone}
        judgments = {
            (qid, pid): j
            for (qid, pid), j in judgments.items()
            if qid not in gone and pid in passages
        }
    else:
        passages = dict(corpus.passages)

    updated_corpus = Corpus(questions, passages, judgments)
    updated_corpus.validate()
    return updated_corpus, changes


# ---------------------------------------------------------------------------
# Decision log (append-only; CLI and the review UI both write it)


def append_decisions(
    path: str | Path,
    question_id: str,
    decisions: dict[str, bool],
    annotator: str = "",
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        for answer in sorted(decisions):
            record = {
                "question_id": question_id,
                "answer": answer,
                "accepted": decisions[answer],
                "annotator": annotator,
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def load_decisions(path: str | Path) -> dict[str, dict[str, bool]]:
    """Latest decision per (question, answer): {question_id: {answer: accepted}}."""
    decisions: dict[str, dict[str, bool]] = {}
    path = Path(path)
    if not path.is_file():
        return decisions
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed decision record") from exc
            decisions.setdefault(record["question_id"], {})[record["answer"]] = bool(
                record["accepted"]
            )
    return decisions


def decided_tasks(
    tasks: Sequence[VerificationTask], decisions: dict[str, dict[str, bool]]
) -> list[VerificationTask]:
    """Attach logged decisions to exported tasks (latest decision wins)."""
    out = []
    for task in tasks:
        task_decisions = decisions.get(task.question_id, {})
        out.append(
            VerificationTask(
                question_id=task.question_id,
                question_text=task.question_text,
                gold_answers=task.gold_answers,
                candidates=task.candidates,
                decisions={
                    c.answer: task_decisions[c.answer]
                    for c in task.candidates
                    if c.answer in task_decisions
                },
            )
        )
    return out


__all__ = [
    "LabelingJob",
    "LabelingError",
    "LabelReport",
    "label_passage",
    "run_labeling",
    "AnswerCandidate",
    "VerificationTask",
    "export_verification",
    "apply_verification",
    "append_decisions",
    "load_decisions",
    "decided_tasks",
    "JOB_PENDING",
    "JOB_DONE",
    "JOB_FAILED",
]
