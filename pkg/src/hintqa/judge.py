"""Model interaction: closed/open-book answering, equivalence judging, and the
parametric-answerability filter, plus the providers that back them.

Providers implement a single ``complete(messages) -> str`` call.  The HTTP
provider speaks the common chat-completion JSON protocol; the mock provider is
fully deterministic and understands this package's own prompt templates, which
keeps offline runs and CI reproducible end to end.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import httpx

from .corpus import Question
from .normalize import answers_match
from .prompts import (
    READER_SYSTEM,
    Message,
    closed_book_prompt,
    equivalence_prompt,
    reader_prompt,
)

log = logging.getLogger(__name__)

NO_ANSWER = "NO ANSWER"

DEFAULT_API_KEY_ENV = "HINTQA_API_KEY"


class ProviderError(RuntimeError):
    """A call failed after retries; never silently converted into a verdict."""


@dataclass
class ModelEndpoint:
    """Configuration for one named model endpoint."""

    name: str
    base_url: str = ""
    model_id: str = ""
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 30.0
    api_key_env: str = DEFAULT_API_KEY_ENV
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"endpoint {self.name}: temperature must be >= 0")


class ChatProvider(Protocol):
    name: str

    def complete(self, messages: list[Message]) -> str: ...


class HttpChatProvider:
    """Chat-completion client with bounded concurrency and retry/backoff."""

    def __init__(self, endpoint: ModelEndpoint, *, sleep=time.sleep, transport=None):
        self.endpoint = endpoint
        self.name = endpoint.name
        self._sleep = sleep
        self._semaphore = threading.Semaphore(max(1, endpoint.max_in_flight))
        headers = {}
        api_key = os.environ.get(endpoint.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            base_url=endpoint.base_url, timeout=endpoint.timeout, headers=headers,
            transport=transport,
        )

    def complete(self, messages: list[Message]) -> str:
        payload = {
            "model": self.endpoint.model_id,
            "messages": messages,
            "temperature": self.endpoint.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.endpoint.max_retries + 1):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            try:
                with self._semaphore:
                    response = self._client.post("/chat/completions", json=payload)
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                log.warning("%s: attempt %d failed: %s", self.name, attempt + 1, exc)
        raise ProviderError(f"{self.name}: exhausted retries") from last_error


@dataclass
class MockKnowledge:
    """What the mock provider knows about one question."""

    gold: str
    hints: list[str] = field(default_factory=list)
    closed_book: bool = False
    question_id: str = ""


class MockChatProvider:
    """Deterministic stand-in for a model, driven by the prompt templates.

    Closed book: answers ``gold`` for questions marked ``closed_book``, else
    ``NO ANSWER``.  Open book: answers ``gold`` when the context contains at
    least ``threshold`` of the question's hint sentences.  Judging: normalized
    exact match, plus any configured equivalent pairs.  ``scripted`` overrides
    closed-book answers per question, one entry per successive call (the last
    entry repeats), which makes flaky-model trials reproducible.
    """

    def __init__(
        self,
        name: str = "mock",
        knowledge: dict[str, MockKnowledge] | None = None,
        threshold: int = 3,
        equivalences: Iterable[tuple[str, str]] = (),
        scripted: dict[str, list[str]] | None = None,
    ):
        self.name = name
        self.knowledge = knowledge or {}
        self.threshold = threshold
        self.equivalences = {
            frozenset((a.strip().lower(), b.strip().lower())) for a, b in equivalences
        }
        self.scripted = {k: list(v) for k, v in (scripted or {}).items()}
        self._script_cursor: dict[str, int] = {}

    def complete(self, messages: list[Message]) -> str:
        if messages and messages[0]["role"] == "system" and messages[0]["content"] == READER_SYSTEM:
            return self._open_book(messages[-1]["content"])
        content = messages[-1]["content"]
        judged = self._parse_equivalence(content)
        if judged is not None:
            return judged
        return self._closed_book(content)

    def _closed_book(self, question: str) -> str:
        if question in self.scripted:
            script = self.scripted[question]
            cursor = self._script_cursor.get(question, 0)
            answer = script[min(cursor, len(script) - 1)]
            self._script_cursor[question] = cursor + 1
            return answer
        entry = self.knowledge.get(question)
        if entry and entry.closed_book:
            return entry.gold
        return NO_ANSWER

    def _open_book(self, final_block: str) -> str:
        match = re.search(r"Context:\n(.*)\n\nQuestion: (.*)\Z", final_block, re.DOTALL)
        if not match:
            return NO_ANSWER
        context, question = match.group(1), match.group(2)
        entry = self.knowledge.get(question)
        if entry is None:
            return NO_ANSWER
        found = sum(1 for hint in entry.hints if hint in context)
        return entry.gold if found >= self.threshold else NO_ANSWER

    def _parse_equivalence(self, content: str) -> str | None:
        match = re.fullmatch(
            r"Question: (?P<question>.*)\n"
            r"Answer: (?P<answer>.*)\n"
            r"Candidate: (?P<candidate>.*)\n"
            r'Is candidate correct\? Choose between "Yes" or "No"',
            content,
            re.DOTALL,
        )
        if not match:
            return None
        gold, candidate = match.group("answer"), match.group("candidate")
        pair = frozenset((gold.strip().lower(), candidate.strip().lower()))
        if answers_match(candidate, gold) or pair in self.equivalences:
            return "Yes"
        return "No"


class ReplayChatProvider:
    """Replays recorded responses keyed by a hash of the request.

    With a ``recorder`` provider, unseen requests are forwarded and the
    response is stored; without one they raise, so tests fail loud instead of
    fabricating output.
    """

    def __init__(self, path: str | Path, name: str = "replay", recorder: ChatProvider | None = None):
        self.name = name
        self.path = Path(path)
        self.recorder = recorder
        self._responses: dict[str, str] = {}
        if self.path.is_file():
            self._responses = json.loads(self.path.read_text(encoding="utf-8"))

    @staticmethod
    def request_hash(messages: list[Message]) -> str:
        canonical = json.dumps(messages, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def complete(self, messages: list[Message]) -> str:
        key = self.request_hash(messages)
        if key in self._responses:
            return self._responses[key]
        if self.recorder is None:
            raise ProviderError(f"{self.name}: no recorded response for request {key[:12]}")
        response = self.recorder.complete(messages)
        self._responses[key] = response
        self.path.write_text(
            json.dumps(self._responses, sort_keys=True, ensure_ascii=False, indent=1),
            encoding="utf-8",
        )
        return response


@dataclass
class Verdict:
    """Outcome of equivalence judging for one candidate answer."""

    candidate: str
    correct: bool
    judge_raw: str
    trials: int = 1


def answer_closed_book(provider: ChatProvider, question: str) -> str:
    """Ask the question with no context; returns the stripped answer string."""
    return provider.complete(closed_book_prompt(question)).strip()


def answer_open_book(provider: ChatProvider, question: str, context: str) -> str | None:
    """Ask the question against a context with the few-shot prompt.

    Returns ``None`` when the model declines with "NO ANSWER".
    """
    if not context.strip():
        raise ValueError("open-book answering requires a non-empty context")
    raw = provider.complete(reader_prompt(context, question)).strip()
    if raw.upper() == NO_ANSWER:
        return None
    return raw


def _parse_yes_no(raw: str) -> bool | None:
    lowered = raw.strip().lower()
    if lowered.startswith("yes"):
        return True
    if lowered.startswith("no"):
        return False
    return None


def judge_equivalence(
    provider: ChatProvider | None,
    question: str,
    gold: str,
    candidate: str,
    trials: int = 1,
) -> Verdict:
    """Judge whether ``candidate`` means the same answer as ``gold``.

    With a provider, the fixed Yes/No prompt is sent ``trials`` times and the
    verdicts aggregate as any-correct; an unparseable response counts as No
    and is logged.  Without a provider a normalized exact match is used (the
    offline fallback; weaker, so report where it was used).
    """
    if not gold.strip() or not candidate.strip():
        raise ValueError("gold and candidate must be non-empty")
    if provider is None:
        correct = answers_match(candidate, gold)
        return Verdict(candidate, correct, judge_raw="lexical", trials=1)
    correct = False
    raw = ""
    for _ in range(max(1, trials)):
        raw = provider.complete(equivalence_prompt(question, gold, candidate))
        parsed = _parse_yes_no(raw)
        if parsed is None:
            log.warning("unparseable judge response %r; counting as No", raw)
            parsed = False
        correct = correct or parsed
        if correct:
            break
    return Verdict(candidate, correct, judge_raw=raw, trials=max(1, trials))


def judge_against_pool(
    judge_provider: ChatProvider | None,
    question: str,
    pool: Sequence[str],
    candidate: str,
) -> Verdict:
    """Judge a candidate against each pooled answer until one matches."""
    last = Verdict(candidate, False, judge_raw="")
    for gold in pool:
        verdict = judge_equivalence(judge_provider, question, gold, candidate)
        if verdict.correct:
            return verdict
        last = verdict
    return last


def parametric_filter(
    question: Question,
    providers: Sequence[ChatProvider],
    trials: int = 3,
    judge_provider: ChatProvider | None = None,
) -> bool:
    """True iff any provider answers the question correctly with no context.

    The whole generate-then-judge loop repeats ``trials`` times per provider;
    a single correct verdict marks the question parametrically answerable.
    Provider failures propagate rather than defaulting the classification.
    """
    if not providers:
        raise ValueError("parametric_filter needs at least one provider")
    pool = question.answer_pool()
    for _ in range(max(1, trials)):
        for provider in providers:
            candidate = answer_closed_book(provider, question.text)
            if not candidate or candidate.upper() == NO_ANSWER:
                continue
            verdict = judge_against_pool(judge_provider, question.text, pool, candidate)
            if verdict.correct:
                return True
    return False


def sample_splits(
    questions: Sequence[Question],
    n_train: int = 5000,
    n_test: int = 2000,
    seed: int = 0,
) -> dict[str, str]:
    """Assign splits from the parametric flags.

    Train is sampled from the parametrically answerable pool, test from the
    non-parametric pool, and the remaining non-parametric questions become
    dev.  Leftover parametric questions stay unassigned.  Requests larger
    than a pool take the whole pool with a warning.
    """
    rng = random.Random(seed)
    parametric = sorted(q.id for q in questions if q.parametric)
    non_parametric = sorted(q.id for q in questions if q.parametric is False)

    if n_train > len(parametric):
        log.warning(
            "requested %d train questions but only %d are parametric; taking all",
            n_train,
            len(parametric),
        )
        n_train = len(parametric)
    if n_test > len(non_parametric):
        log.warning(
            "requested %d test questions but only %d are non-parametric; taking all",
            n_test,
            len(non_parametric),
        )
        n_test = len(non_parametric)

    train = set(rng.sample(parametric, n_train))
    test = set(rng.sample(non_parametric, n_test))

    assignment: dict[str, str] = {}
    for q in questions:
        if q.id in train:
            assignment[q.id] = "train"
        elif q.id in test:
            assignment[q.id] = "test"
        elif q.parametric is False:
            assignment[q.id] = "dev"
        else:
            assignment[q.id] = "unassigned"
    return assignment


# ---------------------------------------------------------------------------
# Endpoint configuration files


def build_provider(
    config: dict,
    mock_knowledge: dict[str, MockKnowledge] | None = None,
    *,
    fixtures_dir: str | Path | None = None,
) -> ChatProvider:
    """Instantiate a provider from one endpoint config entry.

    ``provider`` selects the kind: "http" (default), "mock", or "replay".
    Mock entries may carry ``threshold``, ``equivalences``, ``scripted`` and
    ``closed_book`` (question ids the mock can answer without context);
    knowledge tables are supplied by the caller from the corpus.
    """
    kind = config.get("provider", "http")
    name = config.get("name", kind)
    if kind == "mock":
        knowledge = dict(mock_knowledge or {})
        closed = set(config.get("closed_book", []))
        if closed:
            knowledge = {
                text: MockKnowledge(
                    k.gold,
                    k.hints,
                    closed_book=k.closed_book or k.question_id in closed or text in closed,
                    question_id=k.question_id,
                )
                for text, k in knowledge.items()
            }
        return MockChatProvider(
            name=name,
            knowledge=knowledge,
            threshold=int(config.get("threshold", 3)),
            equivalences=[tuple(pair) for pair in config.get("equivalences", [])],
            scripted=config.get("scripted"),
        )
    if kind == "replay":
        path = Path(config["fixture"])
        if fixtures_dir is not None and not path.is_absolute():
            path = Path(fixtures_dir) / path
        return ReplayChatProvider(path, name=name)
    endpoint = ModelEndpoint(
        name=name,
        base_url=config["base_url"],
        model_id=config.get("model_id", ""),
        temperature=float(config.get("temperature", 0.0)),
        max_retries=int(config.get("max_retries", 3)),
        timeout=float(config.get("timeout", 30.0)),
        api_key_env=config.get("api_key_env", DEFAULT_API_KEY_ENV),
        max_in_flight=int(config.get("max_in_flight", 4)),
    )
    return HttpChatProvider(endpoint)


def mock_knowledge_from_questions(
    questions: Iterable[Question], closed_book_ids: Iterable[str] = ()
) -> dict[str, MockKnowledge]:
    """Knowledge table keyed by question text, with rendered hint sentences."""
    from .corpus import render_hint_sentence

    closed = set(closed_book_ids)
    table = {}
    for q in questions:
        table[q.text] = MockKnowledge(
            gold=q.answers[0],
            hints=[render_hint_sentence(h.text) for h in q.hints],
            closed_book=q.id in closed,
            question_id=q.id,
        )
    return table


__all__ = [
    "NO_ANSWER",
    "ProviderError",
    "ModelEndpoint",
    "ChatProvider",
    "HttpChatProvider",
    "MockKnowledge",
    "MockChatProvider",
    "ReplayChatProvider",
    "Verdict",
    "answer_closed_book",
    "answer_open_book",
    "judge_equivalence",
    "judge_against_pool",
    "parametric_filter",
    "sample_splits",
    "build_provider",
    "mock_knowledge_from_questions",
]
