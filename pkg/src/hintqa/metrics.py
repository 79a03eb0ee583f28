"""Graded-relevance ranking metrics and reader exact match.

All metrics take a per-question run plus a {passage_id: label} mapping;
pairs absent from the mapping count as label 0.  Binary metrics (hit,
recall, reciprocal rank) binarize at a configurable threshold; nDCG uses the
graded labels directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import RunList
from .judge import NO_ANSWER
from .normalize import normalize_answer

GAIN_LINEAR = "linear"
GAIN_EXPONENTIAL = "exponential"


@dataclass
class MetricConfig:
    relevance_threshold: int = 1
    ndcg_gain: str = GAIN_EXPONENTIAL
    mrr_cutoff: int = 100
    hit_ks: list[int] = field(default_factory=lambda: [1, 5, 10, 50, 100])
    recall_ks: list[int] = field(default_factory=lambda: [5, 10, 50])
    ndcg_ks: list[int] = field(default_factory=lambda: [10, 100])

    def __post_init__(self) -> None:
        if self.relevance_threshold not in (1, 2):
            raise ValueError("relevance_threshold must be 1 or 2")
        if self.ndcg_gain not in (GAIN_LINEAR, GAIN_EXPONENTIAL):
            raise ValueError(f"unknown gain {self.ndcg_gain!r}")
        for ks in (self.hit_ks, self.recall_ks, self.ndcg_ks):
            if any(k < 1 for k in ks) or sorted(ks) != ks:
                raise ValueError("k values must be positive and sorted")

    @classmethod
    def from_dict(cls, record: dict) -> "MetricConfig":
        return cls(
            relevance_threshold=int(record.get("relevance_threshold", 1)),
            ndcg_gain=record.get("ndcg_gain", GAIN_EXPONENTIAL),
            mrr_cutoff=int(record.get("mrr_cutoff", 100)),
            hit_ks=list(record.get("hit_ks", [1, 5, 10, 50, 100])),
            recall_ks=list(record.get("recall_ks", [5, 10, 50])),
            ndcg_ks=list(record.get("ndcg_ks", [10, 100])),
        )


def gain(label: int, kind: str) -> float:
    if kind == GAIN_LINEAR:
        return float(label)
    return float(2**label - 1)


def hit_at_k(run: RunList, labels: Mapping[str, int], k: int, threshold: int = 1) -> int:
    """1 iff any top-k entry is relevant at the threshold."""
    return int(
        any(labels.get(e.passage_id, 0) >= threshold for e in run.entries[:k])
    )


def recall_at_k(
    run: RunList, labels: Mapping[str, int], k: int, threshold: int = 1
) -> float | None:
    """Fraction of all relevant passages found in the top-k.

    Returns None for questions with no relevant passage at all; callers
    exclude those from the mean (and report how many were skipped).
    """
    relevant = {pid for pid, label in labels.items() if label >= threshold}
    if not relevant:
        return None
    found = sum(1 for e in run.entries[:k] if e.passage_id in relevant)
    return found / len(relevant)


def reciprocal_rank(
    run: RunList, labels: Mapping[str, int], cutoff: int = 100, threshold: int = 1
) -> float:
    """1/rank of the first relevant entry within the cutoff, else 0."""
    for entry in run.entries[:cutoff]:
        if labels.get(entry.passage_id, 0) >= threshold:
            return 1.0 / entry.rank
    return 0.0


def ndcg_at_k(
    run: RunList, labels: Mapping[str, int], k: int, gain_kind: str = GAIN_EXPONENTIAL
) -> float:
    """nDCG with the ideal ranking drawn from all labeled passages.

    DCG = sum over the top-k of gain(label) / log2(rank + 1); nDCG is 0 when
    the question has no positive labels (IDCG = 0).
    """
    dcg = sum(
        gain(labels.get(e.passage_id, 0), gain_kind) / math.log2(i + 2)
        for i, e in enumerate(run.entries[:k])
    )
    ideal = sorted(labels.values(), reverse=True)[:k]
    idcg = sum(gain(label, gain_kind) / math.log2(i + 2) for i, label in enumerate(ideal))
    if idcg == 0:
        return 0.0
    return dcg / idcg


def exact_match(predicted: str | None, golds: Iterable[str]) -> int:
    """1 iff the normalized prediction equals any normalized gold.

    The no-answer value (None or "NO ANSWER") never matches.
    """
    if predicted is None or predicted.strip().upper() == NO_ANSWER:
        return 0
    norm = normalize_answer(predicted)
    if not norm:
        return 0
    return int(any(norm == normalize_answer(g) for g in golds))


def mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


@dataclass
class RunMetrics:
    """Aggregated retrieval metrics for one run set."""

    tag: str
    questions: int
    hit: dict[int, float]
    recall: dict[int, float]
    recall_skipped: int
    mrr: float
    ndcg: dict[int, float]

    def to_row(self) -> dict:
        row: dict = {"system": self.tag, "questions": self.questions}
        for k, v in self.hit.items():
            row[f"hit@{k}"] = round(v, 6)
        for k, v in self.recall.items():
            row[f"recall@{k}"] = round(v, 6)
        row["mrr"] = round(self.mrr, 6)
        for k, v in self.ndcg.items():
            row[f"ndcg@{k}"] = round(v, 6)
        if self.recall_skipped:
            row["recall_skipped"] = self.recall_skipped
        return row


def evaluate_runs(
    runs: Sequence[RunList],
    qrels: Mapping[str, Mapping[str, int]],
    config: MetricConfig | None = None,
) -> RunMetrics:
    """Compute the metric battery over a set of per-question runs."""
    config = config or MetricConfig()
    threshold = config.relevance_threshold
    hits: dict[int, list[float]] = {k: [] for k in config.hit_ks}
    recalls: dict[int, list[float]] = {k: [] for k in config.recall_ks}
    ndcgs: dict[int, list[float]] = {k: [] for k in config.ndcg_ks}
    rrs: list[float] = []
    skipped = 0
    for run in sorted(runs, key=lambda r: r.question_id):
        labels = qrels.get(run.question_id, {})
        for k in config.hit_ks:
            hits[k].append(hit_at_k(run, labels, k, threshold))
        recall_defined = True
        for k in config.recall_ks:
            value = recall_at_k(run, labels, k, threshold)
            if value is None:
                recall_defined = False
            else:
                recalls[k].append(value)
        if not recall_defined:
            skipped += 1
        rrs.append(reciprocal_rank(run, labels, config.mrr_cutoff, threshold))
        for k in config.ndcg_ks:
            ndcgs[k].append(ndcg_at_k(run, labels, k, config.ndcg_gain))
    tag = runs[0].tag if runs else "empty"
    return RunMetrics(
        tag=tag,
        questions=len(runs),
        hit={k: mean(v) for k, v in hits.items()},
        recall={k: mean(v) for k, v in recalls.items()},
        recall_skipped=skipped,
        mrr=mean(rrs),
        ndcg={k: mean(v) for k, v in ndcgs.items()},
    )


def evaluate_answers(
    answers: Mapping[str, str | None], golds: Mapping[str, Sequence[str]]
) -> float:
    """Mean exact match over the questions present in ``answers``."""
    if not answers:
        return 0.0
    scores = [
        exact_match(predicted, golds.get(qid, [])) for qid, predicted in sorted(answers.items())
    ]
    return mean(scores)


# ---------------------------------------------------------------------------
# Report rendering


def render_report_rows(rows: Sequence[dict]) -> str:
    """Markdown table over the union of row keys (system column first)."""
    if not rows:
        return "| system |\n| --- |\n"
    keys: list[str] = ["system"]
    for row in rows:
        for key in row:
            if key not in keys:
                keys.append(key)
    lines = ["| " + " | ".join(keys) + " |", "| " + " | ".join("---" for _ in keys) + " |"]
    for row in rows:
        cells = []
        for key in keys:
            value = row.get(key, "")
            if isinstance(value, float):
                cells.append(f"{value:.4f}")
            else:
                cells.append(str(value))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_report(rows: Sequence[dict], jsonl_path, markdown_path) -> None:
    """Persist the machine-readable and human-readable report forms."""
    with open(jsonl_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
    with open(markdown_path, "w", encoding="utf-8") as fh:
        fh.write(render_report_rows(rows))


__all__ = [
    "GAIN_LINEAR",
    "GAIN_EXPONENTIAL",
    "MetricConfig",
    "gain",
    "hit_at_k",
    "recall_at_k",
    "reciprocal_rank",
    "ndcg_at_k",
    "exact_match",
    "mean",
    "RunMetrics",
    "evaluate_runs",
    "evaluate_answers",
    "render_report_rows",
    "write_report",
]
