"""Text normalization shared by answer matching, judging, and metrics."""

from __future__ import annotations

import re

ARTICLES = frozenset({"a", "an", "the"})

_NON_WORD = re.compile(r"[^\w\s]+", re.UNICODE)
_WS = re.compile(r"\s+")


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation and article tokens, collapse whitespace."""
    stripped = _NON_WORD.sub(" ", text.lower())
    tokens = [t for t in _WS.split(stripped) if t and t not in ARTICLES]
    return " ".join(tokens)


def answers_match(candidate: str, gold: str) -> bool:
    """Exact match after normalization. Empty normalized forms never match."""
    a, b = normalize_answer(candidate), normalize_answer(gold)
    return bool(a) and a == b


def word_tokens(text: str) -> list[str]:
    """Lowercased Unicode word tokens (punctuation discarded)."""
    return re.findall(r"\w+", text.lower(), re.UNICODE)
