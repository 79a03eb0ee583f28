"""Ranked retrieval over the passage collection.

Two retrievers: an in-process Okapi BM25 over an inverted index, and an exact
brute-force dense retriever backed by a pluggable embedding provider.  Both
are deterministic; score ties break by passage id.
"""

from __future__ import annotations

import hashlib
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import httpx
import numpy as np

from .corpus import Passage, RunList, ranked_run

log = logging.getLogger(__name__)

BM25_K1 = 0.9
BM25_B = 0.4


def analyze(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase Unicode word tokens; stopword removal is off unless given.

    Queries and passages go through this same analyzer.
    """
    tokens = re.findall(r"\w+", text.lower(), re.UNICODE)
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    return tokens


@dataclass
class LexicalIndex:
    """Inverted index with the statistics BM25 needs."""

    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avg_doc_length: float
    doc_count: int
    stopwords: frozenset[str] | None = None


def build_lexical_index(
    passages: Iterable[Passage], stopwords: frozenset[str] | None = None
) -> LexicalIndex:
    """Index passages; rebuilding on the same input yields an identical index."""
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for passage in sorted(passages, key=lambda p: p.id):
        if passage.id in doc_lengths:
            raise ValueError(f"duplicate passage id {passage.id}")
        tokens = analyze(passage.text, stopwords)
        if not tokens:
            log.warning("passage %s tokenizes to nothing; indexed with length 0", passage.id)
        doc_lengths[passage.id] = len(tokens)
        for term, tf in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((passage.id, tf))
    if not doc_lengths:
        raise ValueError("cannot build an index over zero passages")
    doc_count = len(doc_lengths)
    avg = sum(doc_lengths.values()) / doc_count
    return LexicalIndex(postings, doc_lengths, avg, doc_count, stopwords)


def bm25_idf(doc_count: int, doc_freq: int) -> float:
    """Non-negative BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5))."""
    return math.log(1.0 + (doc_count - doc_freq + 0.5) / (doc_freq + 0.5))


def search_bm25(
    index: LexicalIndex,
    query: str,
    k: int = 100,
    *,
    question_id: str = "",
    tag: str = "bm25",
    k1: float = BM25_K1,
    b: float = BM25_B,
) -> RunList:
    """Okapi BM25 top-k.

    score(q, d) = sum over query tokens of
    idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl)); repeated
    query tokens contribute once per occurrence.  Only documents matching at
    least one query term are returned, sorted by score then passage id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    for term in analyze(query, index.stopwords):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = bm25_idf(index.doc_count, len(plist))
        for pid, tf in plist:
            norm = k1 * (1.0 - b + b * index.doc_lengths[pid] / index.avg_doc_length)
            scores[pid] = scores.get(pid, 0.0) + idf * tf * (k1 + 1.0) / (tf + norm)
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return ranked_run(question_id, ordered, tag)


# ---------------------------------------------------------------------------
# Dense retrieval


class EmbeddingProvider(Protocol):
    name: str

    def embed(self, texts: list[str]) -> list[list[float]]: ...


class HashEmbeddingProvider:
    """Deterministic content-hash embeddings for offline runs and fixtures.

    Vectors are derived purely from the text bytes, so they are stable across
    processes and platforms.  Not semantically meaningful.
    """

    def __init__(self, dim: int = 32, name: str = "hash-embed"):
        self.dim = dim
        self.name = name

    def _vector(self, text: str) -> list[float]:
        values: list[float] = []
        counter = 0
        seed = text.encode("utf-8")
        while len(values) < self.dim:
            digest = hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
            for i in range(0, len(digest) - 3, 4):
                raw = int.from_bytes(digest[i : i + 4], "big")
                values.append(raw / 2**31 - 1.0)
                if len(values) == self.dim:
                    break
            counter += 1
        norm = math.sqrt(sum(v * v for v in values)) or 1.0
        return [v / norm for v in values]

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [self._vector(t) for t in texts]


class HttpEmbeddingProvider:
    """Client for an HTTP JSON embed endpoint (list of texts -> list of vectors)."""

    def __init__(self, base_url: str, name: str = "http-embed", timeout: float = 30.0, max_retries: int = 3):
        self.name = name
        self.max_retries = max_retries
        self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def embed(self, texts: list[str]) -> list[list[float]]:
        last_error: Exception | None = None
        for _ in range(self.max_retries + 1):
            try:
                response = self._client.post("/embed", json={"input": texts})
                response.raise_for_status()
                data = response.json()["data"]
                return [row["embedding"] for row in data]
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                log.warning("%s: embed call failed: %s", self.name, exc)
        raise RuntimeError(f"{self.name}: embedding failed after retries") from last_error


@dataclass
class VectorIndex:
    """Dense vectors for every passage, all from one provider."""

    dim: int
    provider_tag: str
    ids: list[str] = field(default_factory=list)
    matrix: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def embed_corpus(passages: Iterable[Passage], provider: EmbeddingProvider) -> VectorIndex:
    ordered = sorted(passages, key=lambda p: p.id)
    if not ordered:
        raise ValueError("cannot embed zero passages")
    vectors = provider.embed([p.text for p in ordered])
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(ordered):
        raise ValueError(f"{provider.name}: provider returned a malformed vector batch")
    return VectorIndex(
        dim=matrix.shape[1],
        provider_tag=provider.name,
        ids=[p.id for p in ordered],
        matrix=matrix,
    )


def search_dense(
    index: VectorIndex,
    query_vector: Sequence[float],
    k: int = 100,
    *,
    metric: str = "cosine",
    question_id: str = "",
    tag: str = "dense",
) -> RunList:
    """Exact brute-force top-k by cosine or inner product, ties by passage id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if metric not in ("cosine", "dot"):
        raise ValueError(f"unknown metric {metric!r}")
    query = np.asarray(query_vector, dtype=np.float64)
    if query.shape != (index.dim,):
        raise ValueError(f"query dimension {query.shape} does not match index dim {index.dim}")
    scores = index.matrix @ query
    if metric == "cosine":
        doc_norms = np.linalg.norm(index.matrix, axis=1)
        qnorm = np.linalg.norm(query)
        denom = doc_norms * qnorm
        scores = np.where(denom > 0, scores / np.where(denom > 0, denom, 1.0), 0.0)
    order = sorted(range(len(index.ids)), key=lambda i: (-scores[i], index.ids[i]))[:k]
    return ranked_run(question_id, [(index.ids[i], float(scores[i])) for i in order], tag)


__all__ = [
    "analyze",
    "LexicalIndex",
    "build_lexical_index",
    "bm25_idf",
    "search_bm25",
    "EmbeddingProvider",
    "HashEmbeddingProvider",
    "HttpEmbeddingProvider",
    "VectorIndex",
    "embed_corpus",
    "search_dense",
    "BM25_K1",
    "BM25_B",
]
