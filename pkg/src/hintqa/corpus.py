"""Core data types for questions, hints, passages, judgments, and ranked runs.

Disk layout of a corpus directory:

* ``questions.jsonl``  -- one question per line
* ``passages.jsonl``   -- one passage per line (optional while building)
* ``judgments.jsonl``  -- one relevance judgment per line (optional)

All files are UTF-8 line-delimited JSON, written with sorted keys and records
sorted by id, so saving the same corpus twice is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

SPLITS = ("train", "dev", "test", "unassigned")
LABELS = (0, 1, 2)
HINT_SOURCES = ("human", "machine")
MAX_HINTS = 5

TERMINAL_PUNCTUATION = (".", "!", "?")

QUESTIONS_FILE = "questions.jsonl"
PASSAGES_FILE = "passages.jsonl"
JUDGMENTS_FILE = "judgments.jsonl"


class CorpusError(ValueError):
    """Malformed record, duplicate id, dangling reference, or broken invariant."""


@dataclass
class Hint:
    """One clue sentence with an optional convergence score."""

    text: str
    convergence: float | None = None
    source: str = "machine"

    def validate(self) -> None:
        if not self.text.strip():
            raise CorpusError("hint text is empty")
        if self.source not in HINT_SOURCES:
            raise CorpusError(f"unknown hint source {self.source!r}")
        if self.convergence is not None and not math.isfinite(self.convergence):
            raise CorpusError("hint convergence must be finite (omit it if unknown)")


@dataclass
class Question:
    """A query with its gold answers, selected hints, and split assignment.

    ``answers`` holds the gold answers from the source collection; answers
    harvested from model output during labeling go to ``harvested`` so that
    human verification can tell the two apart.  ``answer_pool()`` is the
    combined set used for answer matching.
    """

    id: str
    text: str
    answers: list[str]
    hints: list[Hint] = field(default_factory=list)
    split: str = "unassigned"
    qtype: str | None = None
    difficulty: float | None = None
    parametric: bool | None = None
    harvested: list[str] = field(default_factory=list)

    def answer_pool(self) -> list[str]:
        pool = list(self.answers)
        pool.extend(a for a in self.harvested if a not in pool)
        return pool

    def validate(self) -> None:
        if not self.id:
            raise CorpusError("question id is empty")
        if not self.text.strip():
            raise CorpusError(f"question {self.id}: text is empty")
        if not self.answers:
            raise CorpusError(f"question {self.id}: answers must be non-empty")
        if self.split not in SPLITS:
            raise CorpusError(f"question {self.id}: unknown split {self.split!r}")
        if self.difficulty is not None and not 0.0 <= self.difficulty <= 1.0:
            raise CorpusError(f"question {self.id}: difficulty outside [0,1]")
        for hint in self.hints:
            hint.validate()


def render_hint_sentence(text: str) -> str:
    """Canonical sentence form of a hint: stripped, terminally punctuated."""
    sentence = text.strip()
    if not sentence.endswith(TERMINAL_PUNCTUATION):
        sentence += "."
    return sentence


def render_passage_text(
    hint_texts: Iterable[str], hint_seq: Iterable[int]
) -> tuple[str, list[tuple[int, int]]]:
    """Join the referenced hints into passage text with exact span boundaries.

    Sentences are joined by a single space; the separator belongs to the span
    of the preceding sentence so the boundaries partition the text exactly.
    """
    texts = list(hint_texts)
    seq = list(hint_seq)
    parts = [render_hint_sentence(texts[i]) for i in seq]
    boundaries: list[tuple[int, int]] = []
    pos = 0
    chunks = []
    for i, part in enumerate(parts):
        chunk = part if i == len(parts) - 1 else part + " "
        boundaries.append((pos, pos + len(chunk)))
        pos += len(chunk)
        chunks.append(chunk)
    return "".join(chunks), boundaries


def passage_id(source_question: str, hint_seq: Iterable[int]) -> str:
    """Deterministic passage identifier: hash of question id + hint order.

    Stable across runs and platforms; permutations of the same subset get
    distinct ids, as do identical sequences under different questions.
    """
    seq = tuple(hint_seq)
    if len(set(seq)) != len(seq):
        raise CorpusError(f"duplicate hint index in sequence {seq}")
    key = f"{source_question}|{','.join(str(i) for i in seq)}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass
class Passage:
    """An ordered sequence of one question's hints rendered as text."""

    id: str
    source_question: str
    hint_seq: tuple[int, ...]
    text: str
    boundaries: list[tuple[int, int]]

    def sentences(self) -> list[str]:
        """The hint sentences, in passage order (separators stripped)."""
        return [self.text[s:e].rstrip() for s, e in self.boundaries]

    def validate(self, question: Question | None = None) -> None:
        seq = self.hint_seq
        if not 1 <= len(seq) <= MAX_HINTS:
            raise CorpusError(f"passage {self.id}: hint_seq length {len(seq)} outside 1..{MAX_HINTS}")
        if len(set(seq)) != len(seq):
            raise CorpusError(f"passage {self.id}: duplicate hint index")
        if passage_id(self.source_question, seq) != self.id:
            raise CorpusError(f"passage {self.id}: id does not match (question, hint_seq)")
        if self.boundaries and (
            self.boundaries[0][0] != 0
            or self.boundaries[-1][1] != len(self.text)
            or any(self.boundaries[i][1] != self.boundaries[i + 1][0] for i in range(len(self.boundaries) - 1))
        ):
            raise CorpusError(f"passage {self.id}: boundaries do not partition the text")
        if question is not None:
            if any(i >= len(question.hints) for i in seq):
                raise CorpusError(f"passage {self.id}: hint index out of range for question {question.id}")
            text, boundaries = render_passage_text([h.text for h in question.hints], seq)
            if text != self.text or boundaries != list(self.boundaries):
                raise CorpusError(f"passage {self.id}: text does not match canonical rendering")


def make_passage(question: Question, hint_seq: Iterable[int]) -> Passage:
    """Render a passage from a question's selected hints."""
    seq = tuple(hint_seq)
    text, boundaries = render_passage_text([h.text for h in question.hints], seq)
    return Passage(
        id=passage_id(question.id, seq),
        source_question=question.id,
        hint_seq=seq,
        text=text,
        boundaries=boundaries,
    )


@dataclass
class ModelAnswer:
    """One model's answer for a (question, passage) pair and its judged verdict."""

    model: str
    answer: str
    correct: bool


@dataclass
class RelevanceJudgment:
    """Graded relevance of a passage to a question, with harvested model answers."""

    question_id: str
    passage_id: str
    label: int
    model_answers: list[ModelAnswer] = field(default_factory=list)
    verified: bool = False

    def validate(self) -> None:
        if self.label not in LABELS:
            raise CorpusError(
                f"judgment ({self.question_id}, {self.passage_id}): label out of range: {self.label}"
            )
        if self.label == 2 and not self.verified and not any(a.correct for a in self.model_answers):
            raise CorpusError(
                f"judgment ({self.question_id}, {self.passage_id}): label 2 without a correct answer"
            )


@dataclass
class RunEntry:
    passage_id: str
    score: float
    rank: int


@dataclass
class RunList:
    """Per-question ranked candidates produced by a retriever or reranker."""

    question_id: str
    entries: list[RunEntry]
    tag: str = "run"

    def passage_ids(self) -> list[str]:
        return [e.passage_id for e in self.entries]

    def validate(self) -> None:
        seen = set()
        for i, entry in enumerate(self.entries):
            if entry.rank != i + 1:
                raise CorpusError(f"run {self.question_id}: ranks not contiguous at position {i + 1}")
            if entry.passage_id in seen:
                raise CorpusError(f"run {self.question_id}: duplicate passage {entry.passage_id}")
            seen.add(entry.passage_id)
            if i and self.entries[i - 1].score < entry.score:
                raise CorpusError(f"run {self.question_id}: scores increase at rank {entry.rank}")


def ranked_run(question_id: str, scored: Iterable[tuple[str, float]], tag: str) -> RunList:
    """Build a RunList from (passage_id, score) pairs already in final order."""
    entries = [RunEntry(pid, float(score), rank) for rank, (pid, score) in enumerate(scored, 1)]
    run = RunList(question_id, entries, tag)
    run.validate()
    return run


@dataclass
class Corpus:
    """An in-memory corpus. Treated as immutable: stages build new versions."""

    questions: dict[str, Question] = field(default_factory=dict)
    passages: dict[str, Passage] = field(default_factory=dict)
    judgments: dict[tuple[str, str], RelevanceJudgment] = field(default_factory=dict)

    def label_of(self, question_id: str, passage_id: str) -> int:
        """Graded label for a pair; unlabeled pairs default to 0."""
        judgment = self.judgments.get((question_id, passage_id))
        return judgment.label if judgment else 0

    def labels_for(self, question_id: str) -> dict[str, int]:
        return {
            pid: j.label for (qid, pid), j in self.judgments.items() if qid == question_id
        }

    def passages_of(self, question_id: str) -> list[Passage]:
        return sorted(
            (p for p in self.passages.values() if p.source_question == question_id),
            key=lambda p: p.id,
        )

    def validate(self) -> None:
        for question in self.questions.values():
            question.validate()
        for passage in self.passages.values():
            question = self.questions.get(passage.source_question)
            if question is None:
                raise CorpusError(f"passage {passage.id}: unknown question {passage.source_question}")
            if len(question.hints) > MAX_HINTS:
                raise CorpusError(
                    f"question {question.id}: {len(question.hints)} hints but passages exist; "
                    f"select at most {MAX_HINTS} before forging"
                )
            passage.validate(question)
        for (qid, pid), judgment in self.judgments.items():
            if (qid, pid) != (judgment.question_id, judgment.passage_id):
                raise CorpusError(f"judgment key mismatch for ({qid}, {pid})")
            judgment.validate()
            if qid not in self.questions:
                raise CorpusError(f"judgment references unknown question {qid}")
            passage = self.passages.get(pid)
            if passage is None:
                raise CorpusError(f"judgment references unknown passage {pid}")
            if passage.source_question != qid and judgment.label != 0:
                raise CorpusError(
                    f"judgment ({qid}, {pid}): cross-question passage must have label 0"
                )

    def with_question(self, question: Question) -> "Corpus":
        questions = dict(self.questions)
        questions[question.id] = question
        return Corpus(questions, self.passages, self.judgments)


# ---------------------------------------------------------------------------
# JSONL codecs


def _question_record(q: Question) -> dict:
    record = {
        "id": q.id,
        "text": q.text,
        "answers": q.answers,
        "hints": [
            {"text": h.text, "convergence": h.convergence, "source": h.source} for h in q.hints
        ],
        "split": q.split,
    }
    if q.qtype is not None:
        record["qtype"] = q.qtype
    if q.difficulty is not None:
        record["difficulty"] = q.difficulty
    if q.parametric is not None:
        record["parametric"] = q.parametric
    if q.harvested:
        record["harvested"] = q.harvested
    return record


def _question_from_record(record: dict) -> Question:
    hints = [
        Hint(h["text"], h.get("convergence"), h.get("source", "machine"))
        for h in record.get("hints", [])
    ]
    return Question(
        id=record["id"],
        text=record["text"],
        answers=list(record["answers"]),
        hints=hints,
        split=record.get("split", "unassigned"),
        qtype=record.get("qtype"),
        difficulty=record.get("difficulty"),
        parametric=record.get("parametric"),
        harvested=list(record.get("harvested", [])),
    )


def _passage_record(p: Passage) -> dict:
    return {
        "id": p.id,
        "source_question": p.source_question,
        "hint_seq": list(p.hint_seq),
        "text": p.text,
        "boundaries": [list(b) for b in p.boundaries],
    }


def _passage_from_record(record: dict) -> Passage:
    return Passage(
        id=record["id"],
        source_question=record["source_question"],
        hint_seq=tuple(record["hint_seq"]),
        text=record["text"],
        boundaries=[(int(s), int(e)) for s, e in record["boundaries"]],
    )


def _judgment_record(j: RelevanceJudgment) -> dict:
    return {
        "question_id": j.question_id,
        "passage_id": j.passage_id,
        "label": j.label,
        "model_answers": [[a.model, a.answer, a.correct] for a in j.model_answers],
        "verified": j.verified,
    }


def _judgment_from_record(record: dict) -> RelevanceJudgment:
    return RelevanceJudgment(
        question_id=record["question_id"],
        passage_id=record["passage_id"],
        label=int(record["label"]),
        model_answers=[ModelAnswer(m, a, bool(c)) for m, a, c in record.get("model_answers", [])],
        verified=bool(record.get("verified", False)),
    )


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: record is not an object")
            yield lineno, record


def _write_jsonl(path: Path, records: Iterable[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus directory.

    ``questions.jsonl`` is required; passages and judgments files are optional
    so partially built corpora (e.g. before labeling) load too.  Validation
    failures report the offending file and line.
    """
    root = Path(path)
    questions_path = root / QUESTIONS_FILE
    if not questions_path.is_file():
        raise CorpusError(f"missing questions file: {questions_path}")

    corpus = Corpus()
    for lineno, record in _read_jsonl(questions_path):
        try:
            question = _question_from_record(record)
            question.validate()
        except (KeyError, TypeError, CorpusError) as exc:
            raise CorpusError(f"{questions_path}:{lineno}: {exc}") from exc
        if question.id in corpus.questions:
            raise CorpusError(f"{questions_path}:{lineno}: duplicate question id {question.id}")
        corpus.questions[question.id] = question

    passages_path = root / PASSAGES_FILE
    if passages_path.is_file():
        for lineno, record in _read_jsonl(passages_path):
            try:
                passage = _passage_from_record(record)
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{passages_path}:{lineno}: {exc}") from exc
            if passage.id in corpus.passages:
                raise CorpusError(f"{passages_path}:{lineno}: duplicate passage id {passage.id}")
            corpus.passages[passage.id] = passage

    judgments_path = root / JUDGMENTS_FILE
    if judgments_path.is_file():
        for lineno, record in _read_jsonl(judgments_path):
            try:
                judgment = _judgment_from_record(record)
                judgment.validate()
            except (KeyError, TypeError, ValueError, CorpusError) as exc:
                raise CorpusError(f"{judgments_path}:{lineno}: {exc}") from exc
            key = (judgment.question_id, judgment.passage_id)
            if key in corpus.judgments:
                raise CorpusError(f"{judgments_path}:{lineno}: duplicate judgment for {key}")
            corpus.judgments[key] = judgment

    try:
        corpus.validate()
    except CorpusError as exc:
        raise CorpusError(f"{root}: {exc}") from exc
    return corpus


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus directory. Refuses to write an invalid corpus."""
    corpus.validate()
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    _write_jsonl(
        root / QUESTIONS_FILE,
        (_question_record(q) for _, q in sorted(corpus.questions.items())),
    )
    _write_jsonl(
        root / PASSAGES_FILE,
        (_passage_record(p) for _, p in sorted(corpus.passages.items())),
    )
    _write_jsonl(
        root / JUDGMENTS_FILE,
        (_judgment_record(j) for _, j in sorted(corpus.judgments.items())),
    )


# ---------------------------------------------------------------------------
# qrels and run files (standard whitespace formats)


def export_qrels(corpus: Corpus, path: str | Path, threshold: int = 1) -> None:
    """Write `qid 0 docid grade` lines for every explicitly labeled pair.

    Graded labels are preserved as-is; pairs absent from the file are
    implicitly 0.  ``threshold`` selects how downstream metrics binarize and
    must be 1 or 2; it does not change what is written.
    """
    if threshold not in (1, 2):
        raise ValueError(f"threshold must be 1 or 2, got {threshold}")
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for (qid, pid), judgment in sorted(corpus.judgments.items()):
            fh.write(f"{qid} 0 {pid} {judgment.label}\n")


def load_qrels(path: str | Path) -> dict[str, dict[str, int]]:
    """Parse a 4-column qrels file into {qid: {docid: grade}}."""
    qrels: dict[str, dict[str, int]] = {}
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise CorpusError(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
            qid, _, docid, grade = parts
            try:
                qrels.setdefault(qid, {})[docid] = int(grade)
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: grade is not an integer") from exc
    return qrels


def save_runs(runs: Iterable[RunList], path: str | Path) -> None:
    """Write runs in the 6-column `qid Q0 docid rank score tag` format."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for run in sorted(runs, key=lambda r: r.question_id):
            run.validate()
            for entry in run.entries:
                fh.write(
                    f"{run.question_id} Q0 {entry.passage_id} {entry.rank} {entry.score!r} {run.tag}\n"
                )


def load_runs(path: str | Path) -> list[RunList]:
    """Parse a 6-column run file; entries are validated per question."""
    path = Path(path)
    grouped: dict[str, list[tuple[int, str, float, str]]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise CorpusError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            qid, _, docid, rank, score, tag = parts
            try:
                grouped.setdefault(qid, []).append((int(rank), docid, float(score), tag))
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: bad rank or score") from exc
    runs = []
    for qid, rows in sorted(grouped.items()):
        rows.sort(key=lambda r: r[0])
        run = RunList(
            qid,
            [RunEntry(docid, score, rank) for rank, docid, score, _ in rows],
            tag=rows[0][3],
        )
        run.validate()
        runs.append(run)
    return runs


__all__ = [
    "CorpusError",
    "Corpus",
    "Hint",
    "Question",
    "Passage",
    "ModelAnswer",
    "RelevanceJudgment",
    "RunEntry",
    "RunList",
    "ranked_run",
    "render_hint_sentence",
    "render_passage_text",
    "passage_id",
    "make_passage",
    "load_corpus",
    "save_corpus",
    "export_qrels",
    "load_qrels",
    "save_runs",
    "load_runs",
    "MAX_HINTS",
    "SPLITS",
]
