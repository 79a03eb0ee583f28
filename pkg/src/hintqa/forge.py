"""Turn question-hint pairs into ordered-subset passages.

The forge applies two gates before synthesis: questions whose hints leak an
answer are dropped entirely, and the surviving hints are cut to the top 5 by
convergence.  Every non-empty subset of the kept hints is then rendered in
every order, so 5 hints yield 325 passages per question.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Collection, Iterable, Protocol

from .corpus import (
    MAX_HINTS,
    Corpus,
    Hint,
    Passage,
    Question,
    make_passage,
)
from .normalize import normalize_answer, word_tokens

log = logging.getLogger(__name__)

DROP_LEAKAGE = "leakage"
DROP_LOW_CONVERGENCE = "low_convergence"


class LeakageOracle(Protocol):
    """Decides whether a hint gives an answer away."""

    def leaks(self, hint_text: str, answers: Collection[str]) -> bool: ...


class LexicalLeakageOracle:
    """Conservative offline fallback: token-boundary substring matching.

    A hint leaks when the normalized answer phrase occurs in the normalized
    hint, or when any answer token of at least ``min_token_len`` characters
    does.  Matching is case-insensitive with punctuation stripped.
    """

    def __init__(self, min_token_len: int = 4):
        self.min_token_len = min_token_len

    def leaks(self, hint_text: str, answers: Collection[str]) -> bool:
        hint_norm = f" {normalize_answer(hint_text)} "
        hint_tokens = set(word_tokens(hint_text))
        for answer in answers:
            phrase = normalize_answer(answer)
            if phrase and f" {phrase} " in hint_norm:
                return True
            if any(
                len(tok) >= self.min_token_len and tok in hint_tokens
                for tok in word_tokens(answer)
            ):
                return True
        return False


class JudgeLeakageOracle:
    """Tests hint spans against each answer through an equivalence judge.

    ``judge`` is called as ``judge(candidate_span, answer) -> bool``.  By
    default only single tokens are tested; pass longer ``span_lengths`` to
    also test multi-word spans.  Judge failures propagate (retryable), never
    silently count as "no leak".
    """

    def __init__(
        self,
        judge: Callable[[str, str], bool],
        span_lengths: tuple[int, ...] = (1,),
    ):
        self.judge = judge
        self.span_lengths = span_lengths

    def leaks(self, hint_text: str, answers: Collection[str]) -> bool:
        tokens = word_tokens(hint_text)
        spans: list[str] = []
        for n in self.span_lengths:
            spans.extend(
                " ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
            )
        for answer in answers:
            for span in spans:
                if self.judge(span, answer):
                    return True
        return False


def detect_leakage(
    hints: Iterable[Hint], answers: Collection[str], oracle: LeakageOracle
) -> bool:
    """True iff any hint leaks any answer; such questions are excluded."""
    return any(oracle.leaks(hint.text, answers) for hint in hints)


@dataclass
class DroppedHint:
    hint: Hint
    reason: str


@dataclass
class HintSelection:
    """The hints kept for passage synthesis and the ones dropped, with reasons."""

    question_id: str
    kept: list[Hint] = field(default_factory=list)
    dropped: list[DroppedHint] = field(default_factory=list)
    # set when no hint carried a convergence score and source order was used
    order_fallback: bool = False


def select_top_hints(
    hints: list[Hint], max_hints: int = MAX_HINTS, question_id: str = ""
) -> HintSelection:
    """Keep the top hints by convergence, descending.

    Ties break by source order, then hint text.  Hints without a convergence
    score rank below scored ones; if no hint is scored at all the original
    source order is kept and flagged via ``order_fallback``.
    """
    if not hints:
        raise ValueError("cannot select from an empty hint list")
    fallback = all(h.convergence is None for h in hints)
    if fallback:
        ordered = list(hints)
    else:
        ordered = sorted(
            enumerate(hints),
            key=lambda item: (
                -(item[1].convergence if item[1].convergence is not None else float("-inf")),
                item[0],
                item[1].text,
            ),
        )
        ordered = [h for _, h in ordered]
    return HintSelection(
        question_id=question_id,
        kept=ordered[:max_hints],
        dropped=[DroppedHint(h, DROP_LOW_CONVERGENCE) for h in ordered[max_hints:]],
        order_fallback=fallback,
    )


def build_selection(
    question: Question,
    oracle: LeakageOracle | None = None,
    max_hints: int = MAX_HINTS,
) -> tuple[HintSelection, bool]:
    """Selection plus the question-level leakage verdict.

    Leaking hints appear in ``dropped`` with reason ``leakage``; one leaking
    hint excludes the whole question from forging (second return value).
    """
    oracle = oracle or LexicalLeakageOracle()
    answers = question.answer_pool()
    leaking = [h for h in question.hints if oracle.leaks(h.text, answers)]
    if leaking:
        selection = HintSelection(
            question_id=question.id,
            kept=[],
            dropped=[DroppedHint(h, DROP_LEAKAGE) for h in leaking],
        )
        return selection, True
    return select_top_hints(question.hints, max_hints, question_id=question.id), False


def enumerate_sequences(n: int) -> list[tuple[int, ...]]:
    """Every permutation of every non-empty subset of {0..n-1}.

    Output is ordered by sequence length, then lexicographically, which keeps
    forged corpora and their golden files stable.
    """
    if not 1 <= n <= MAX_HINTS:
        raise ValueError(f"n must be in 1..{MAX_HINTS}, got {n}")
    return [seq for k in range(1, n + 1) for seq in permutations(range(n), k)]


def forge_passages(question: Question) -> list[Passage]:
    """One passage per hint sequence of the question's selected hints.

    Pure in (question id, hints): repeated calls reproduce identical passages
    and ids.
    """
    if not question.hints:
        raise ValueError(f"question {question.id} has no hints to forge from")
    if len(question.hints) > MAX_HINTS:
        raise ValueError(
            f"question {question.id} has {len(question.hints)} hints; select at most {MAX_HINTS} first"
        )
    return [make_passage(question, seq) for seq in enumerate_sequences(len(question.hints))]


@dataclass
class ForgeReport:
    questions_in: int = 0
    questions_forged: int = 0
    passages: int = 0
    dropped_leakage: int = 0
    dropped_no_hints: int = 0
    oracle: str = "lexical"

    def to_dict(self) -> dict:
        return {
            "questions_in": self.questions_in,
            "questions_forged": self.questions_forged,
            "passages": self.passages,
            "dropped": {"leakage": self.dropped_leakage, "no_hints": self.dropped_no_hints},
            "oracle": self.oracle,
        }


def forge_corpus(
    questions: Iterable[Question],
    oracle: LeakageOracle | None = None,
    max_hints: int = MAX_HINTS,
) -> tuple[Corpus, ForgeReport]:
    """Filter, select, and forge a whole corpus.

    Questions with a leaking hint are dropped; kept questions are stored with
    their selected hints only, alongside all forged passages.
    """
    oracle = oracle or LexicalLeakageOracle()
    report = ForgeReport(oracle=type(oracle).__name__)
    corpus = Corpus()
    for question in questions:
        report.questions_in += 1
        if not question.hints:
            report.dropped_no_hints += 1
            continue
        if detect_leakage(question.hints, question.answer_pool(), oracle):
            report.dropped_leakage += 1
            log.info("dropping %s: hint leaks an answer", question.id)
            continue
        selection = select_top_hints(question.hints, max_hints, question_id=question.id)
        kept_question = Question(
            id=question.id,
            text=question.text,
            answers=list(question.answers),
            hints=selection.kept,
            split=question.split,
            qtype=question.qtype,
            difficulty=question.difficulty,
            parametric=question.parametric,
            harvested=list(question.harvested),
        )
        corpus.questions[kept_question.id] = kept_question
        for passage in forge_passages(kept_question):
            corpus.passages[passage.id] = passage
        report.questions_forged += 1
    report.passages = len(corpus.passages)
    corpus.validate()
    return corpus, report


__all__ = [
    "LeakageOracle",
    "LexicalLeakageOracle",
    "JudgeLeakageOracle",
    "detect_leakage",
    "DroppedHint",
    "HintSelection",
    "select_top_hints",
    "enumerate_sequences",
    "forge_passages",
    "ForgeReport",
    "forge_corpus",
    "DROP_LEAKAGE",
    "DROP_LOW_CONVERGENCE",
]
