"""Candidate reordering with pluggable pointwise scorers, plus oracle pools.

Any reranker is reduced to a pointwise protocol: score(question, passage
text) -> real.  The top ``depth`` candidates are rescored and reordered;
everything deeper keeps its relative order behind the rescored block.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Protocol

import httpx

from .corpus import Corpus, RunEntry, RunList

log = logging.getLogger(__name__)


class PointwiseScorer(Protocol):
    name: str

    def score(self, question: str, passage_text: str) -> float: ...


class RerankError(RuntimeError):
    """Scoring failed after retries; the run is marked failed, not truncated."""


@dataclass
class RerankRequest:
    question: str
    candidates: RunList
    scorer: PointwiseScorer
    depth: int = 100


def rerank(request: RerankRequest, passage_texts: Mapping[str, str]) -> RunList:
    """Rescore the head of a candidate list and reassemble a valid run.

    Rescored entries are ordered by new score descending with ties broken by
    original rank, and keep their scorer scores.  Entries beyond the depth
    follow in their original order with scores remapped below the block
    minimum so scores stay non-increasing.  depth=0 returns the input
    unchanged.  The output is always a permutation of the input ids.
    """
    candidates = request.candidates
    depth = min(max(request.depth, 0), len(candidates.entries))
    if depth == 0:
        return candidates
    head = candidates.entries[:depth]
    tail = candidates.entries[depth:]
    scored: list[tuple[float, int, str]] = []
    for entry in head:
        try:
            text = passage_texts[entry.passage_id]
        except KeyError as exc:
            raise RerankError(f"no text for candidate passage {entry.passage_id}") from exc
        try:
            value = float(request.scorer.score(request.question, text))
        except Exception as exc:
            raise RerankError(
                f"scorer {request.scorer.name} failed on passage {entry.passage_id}: {exc}"
            ) from exc
        scored.append((value, entry.rank, entry.passage_id))
    scored.sort(key=lambda item: (-item[0], item[1]))
    entries = [
        RunEntry(pid, value, rank)
        for rank, (value, _, pid) in enumerate(scored, 1)
    ]
    if tail:
        floor = min(item[0] for item in scored) if scored else 0.0
        for offset, entry in enumerate(tail, 1):
            entries.append(RunEntry(entry.passage_id, floor - offset, depth + offset))
    out = RunList(candidates.question_id, entries, tag=f"{candidates.tag}+{request.scorer.name}")
    out.validate()
    return out


def oracle_candidates(
    question_id: str, corpus: Corpus, threshold: int = 1, tag: str = "oracle"
) -> RunList:
    """The perfect-retriever pool: every passage labeled at or above threshold.

    Candidates come back in passage-id order with uniform scores, ready to be
    handed to a reranker.  A question with no relevant passages yields an
    empty run (flagged), an unknown question is an error.
    """
    if question_id not in corpus.questions:
        raise KeyError(f"unknown question {question_id}")
    pids = sorted(
        pid
        for (qid, pid), judgment in corpus.judgments.items()
        if qid == question_id and judgment.label >= threshold
    )
    if not pids:
        log.warning("question %s has no passages with label >= %d", question_id, threshold)
    return RunList(
        question_id,
        [RunEntry(pid, 1.0, rank) for rank, pid in enumerate(pids, 1)],
        tag=tag,
    )


# ---------------------------------------------------------------------------
# Scorers


class IdentityScorer:
    """Scores by negated original rank, so the input order is preserved."""

    name = "identity"

    def __init__(self, candidates: RunList):
        self._ranks = {e.passage_id: e.rank for e in candidates.entries}
        self._texts_to_rank: dict[str, int] = {}

    def attach_texts(self, passage_texts: Mapping[str, str]) -> None:
        self._texts_to_rank = {
            passage_texts[pid]: rank for pid, rank in self._ranks.items() if pid in passage_texts
        }

    def score(self, question: str, passage_text: str) -> float:
        return -float(self._texts_to_rank.get(passage_text, len(self._ranks) + 1))


class ConstantScorer:
    name = "constant"

    def __init__(self, value: float = 0.0):
        self.value = value

    def score(self, question: str, passage_text: str) -> float:
        return self.value


class HintCountScorer:
    """Prefers passages built from more hints (text-keyed, corpus-derived)."""

    name = "hint-count"

    def __init__(self, corpus: Corpus):
        self._counts = {p.text: len(p.hint_seq) for p in corpus.passages.values()}

    def score(self, question: str, passage_text: str) -> float:
        return float(self._counts.get(passage_text, 0))


class HttpScorer:
    """Client for an HTTP JSON scoring endpoint (question, passage -> score)."""

    def __init__(self, base_url: str, name: str = "http-scorer", timeout: float = 30.0, max_retries: int = 3):
        self.name = name
        self.max_retries = max_retries
        self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def score(self, question: str, passage_text: str) -> float:
        last_error: Exception | None = None
        for _ in range(self.max_retries + 1):
            try:
                response = self._client.post(
                    "/score", json={"question": question, "passage": passage_text}
                )
                response.raise_for_status()
                return float(response.json()["score"])
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                log.warning("%s: score call failed: %s", self.name, exc)
        raise RerankError(f"{self.name}: scoring failed after retries") from last_error


def build_scorer(config: dict, corpus: Corpus, candidates: RunList) -> PointwiseScorer:
    """Instantiate a scorer by name; mock scorers cover offline runs."""
    kind = config.get("scorer", "identity")
    if kind == "identity":
        scorer = IdentityScorer(candidates)
        scorer.attach_texts({pid: p.text for pid, p in corpus.passages.items()})
        return scorer
    if kind == "constant":
        return ConstantScorer(float(config.get("value", 0.0)))
    if kind == "hint-count":
        return HintCountScorer(corpus)
    if kind == "http":
        return HttpScorer(
            config["base_url"],
            name=config.get("name", "http-scorer"),
            timeout=float(config.get("timeout", 30.0)),
            max_retries=int(config.get("max_retries", 3)),
        )
    raise ValueError(f"unknown scorer {kind!r}")


__all__ = [
    "PointwiseScorer",
    "RerankError",
    "RerankRequest",
    "rerank",
    "oracle_candidates",
    "IdentityScorer",
    "ConstantScorer",
    "HintCountScorer",
    "HttpScorer",
    "build_scorer",
]
