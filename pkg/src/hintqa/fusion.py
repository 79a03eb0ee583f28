"""Context fusion: build one reader context from the top-k passages.

Passages forged from the same hints overlap heavily, so plain concatenation
is redundant.  Two strategies dedupe at the sentence level, where sentences
are the stored hint spans (exact, no text splitter):

* order-preserving union: first occurrence wins, scanning by passage rank;
* frequency-weighted union: each distinct sentence s is scored

      score(s) = alpha * sum(1 / rank(P_i)) + beta * sum(1 / pos_i(s))

  over the passages containing it, then sentences are concatenated in
  descending score order (optionally capped).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import Passage

UNION_NORM = "union_norm"
UNION_FREQ = "union_freq"

DEFAULT_ALPHA = 0.6
DEFAULT_BETA = 0.4


@dataclass
class FusionConfig:
    method: str = UNION_FREQ
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    sentence_cap: int | None = None

    def __post_init__(self) -> None:
        if self.method not in (UNION_NORM, UNION_FREQ):
            raise ValueError(f"unknown fusion method {self.method!r}")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("alpha and beta must be >= 0 with alpha + beta > 0")
        if self.sentence_cap is not None and self.sentence_cap < 1:
            raise ValueError("sentence_cap must be >= 1 when set")


@dataclass
class ScoredSentence:
    sentence: str
    # (passage rank, position within passage), both 1-based
    occurrences: list[tuple[int, int]]
    score: float


def union_norm(passages: Sequence[Passage]) -> str:
    """Deduplicated sentences in first-occurrence order, joined by a space."""
    if not passages:
        raise ValueError("fusion needs at least one passage")
    seen = set()
    ordered = []
    for passage in passages:
        for sentence in passage.sentences():
            if sentence not in seen:
                seen.add(sentence)
                ordered.append(sentence)
    return " ".join(ordered)


def score_sentences(
    passages: Sequence[Passage], alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA
) -> list[ScoredSentence]:
    """Score each distinct sentence; output sorted by score descending.

    Ties break by earliest passage rank, then earliest position, then text,
    so equal-scored inputs still fuse deterministically.
    """
    occurrences: dict[str, list[tuple[int, int]]] = {}
    for rank, passage in enumerate(passages, 1):
        for pos, sentence in enumerate(passage.sentences(), 1):
            occurrences.setdefault(sentence, []).append((rank, pos))
    scored = [
        ScoredSentence(
            sentence,
            occs,
            alpha * sum(1.0 / rank for rank, _ in occs)
            + beta * sum(1.0 / pos for _, pos in occs),
        )
        for sentence, occs in occurrences.items()
    ]
    scored.sort(
        key=lambda s: (
            -s.score,
            min(rank for rank, _ in s.occurrences),
            min(pos for _, pos in s.occurrences),
            s.sentence,
        )
    )
    return scored


def union_freq(passages: Sequence[Passage], config: FusionConfig | None = None) -> str:
    """Frequency-weighted union: highest-scoring sentences first."""
    if not passages:
        raise ValueError("fusion needs at least one passage")
    config = config or FusionConfig()
    scored = score_sentences(passages, config.alpha, config.beta)
    if config.sentence_cap is not None:
        scored = scored[: config.sentence_cap]
    return " ".join(s.sentence for s in scored)


def fuse(passages: Sequence[Passage], config: FusionConfig) -> str:
    if config.method == UNION_NORM:
        return union_norm(passages)
    return union_freq(passages, config)


__all__ = [
    "UNION_NORM",
    "UNION_FREQ",
    "DEFAULT_ALPHA",
    "DEFAULT_BETA",
    "FusionConfig",
    "ScoredSentence",
    "union_norm",
    "score_sentences",
    "union_freq",
    "fuse",
]
