"""End-to-end experiment orchestration from a single manifest.

A manifest names the corpus, the retrieval/rerank/fusion configuration, the
reader endpoints, and one of three modes:

* ``standard``          retrieve -> (rerank) -> fuse top-k -> read -> EM
* ``oracle_retriever``  perfect candidate pool -> rerank -> fuse -> read -> EM
* ``optimal``           a question counts as answered if any single relevant
                        passage lets the reader answer it (the EM upper bound)

Every stage persists its artifacts under the output directory and records a
content hash, so re-running a manifest reuses stages whose inputs did not
change.  With mock providers and a fixed seed the whole run is byte-stable.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import (
    Corpus,
    RunList,
    export_qrels,
    load_corpus,
    load_runs,
    save_runs,
)
from .fusion import FusionConfig, fuse
from .judge import (
    ChatProvider,
    answer_open_book,
    build_provider,
    judge_against_pool,
    mock_knowledge_from_questions,
)
from .metrics import MetricConfig, evaluate_answers, evaluate_runs, write_report
from .rerank import RerankRequest, build_scorer, oracle_candidates, rerank
from .retrieval import (
    HashEmbeddingProvider,
    HttpEmbeddingProvider,
    build_lexical_index,
    embed_corpus,
    search_bm25,
    search_dense,
)

log = logging.getLogger(__name__)

MODES = ("standard", "oracle_retriever", "optimal")
CONTEXT_SIZES = (1, 3, 5)


class PipelineError(RuntimeError):
    """A stage failed; the message carries the stage name."""


@dataclass
class ExperimentManifest:
    corpus: str
    mode: str = "standard"
    k: int = 5
    threshold: int = 1
    seed: int = 0
    split: str | None = None
    retriever: dict | None = field(default_factory=lambda: {"method": "bm25", "k": 100})
    reranker: dict | None = None
    fusion: dict = field(default_factory=dict)
    readers: list[dict] = field(default_factory=list)
    judge: dict | None = None
    metrics: dict = field(default_factory=dict)
    optimal_exhaustive: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.k not in CONTEXT_SIZES:
            raise ValueError(f"k must be one of {CONTEXT_SIZES}, got {self.k}")
        if self.mode == "optimal" and (self.retriever or self.reranker):
            raise ValueError("optimal mode takes no retriever or reranker configuration")
        if self.threshold not in (1, 2):
            raise ValueError("threshold must be 1 or 2")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentManifest":
        record = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**record)

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "mode": self.mode,
            "k": self.k,
            "threshold": self.threshold,
            "seed": self.seed,
            "split": self.split,
            "retriever": self.retriever,
            "reranker": self.reranker,
            "fusion": self.fusion,
            "readers": self.readers,
            "judge": self.judge,
            "metrics": self.metrics,
            "optimal_exhaustive": self.optimal_exhaustive,
        }


# ---------------------------------------------------------------------------
# Stage cache


class StageCache:
    """Content-hash keyed reuse of persisted stage artifacts."""

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.state_path = outdir / "state.json"
        self.state: dict[str, str] = {}
        if self.state_path.is_file():
            self.state = json.loads(self.state_path.read_text(encoding="utf-8"))

    def fresh(self, stage: str, input_hash: str, artifacts: Sequence[Path]) -> bool:
        return self.state.get(stage) == input_hash and all(p.is_file() for p in artifacts)

    def record(self, stage: str, input_hash: str) -> None:
        self.state[stage] = input_hash
        self.state_path.write_text(
            json.dumps(self.state, indent=1, sort_keys=True), encoding="utf-8"
        )


def _hash_parts(*parts: str) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(part.encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()


def corpus_hash(path: str | Path) -> str:
    root = Path(path)
    digest = hashlib.sha256()
    for name in ("questions.jsonl", "passages.jsonl", "judgments.jsonl"):
        file = root / name
        if file.is_file():
            digest.update(file.read_bytes())
        digest.update(b"\x00")
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# Stages


def _eval_questions(corpus: Corpus, manifest: ExperimentManifest) -> list[str]:
    qids = sorted(corpus.questions)
    if manifest.split:
        qids = [qid for qid in qids if corpus.questions[qid].split == manifest.split]
    return qids


def stage_retrieve(corpus: Corpus, manifest: ExperimentManifest) -> list[RunList]:
    config = manifest.retriever or {"method": "bm25"}
    method = config.get("method", "bm25")
    k = int(config.get("k", 100))
    qids = _eval_questions(corpus, manifest)
    if method == "bm25":
        index = build_lexical_index(corpus.passages.values())
        return [
            search_bm25(
                index,
                corpus.questions[qid].text,
                k,
                question_id=qid,
                k1=float(config.get("k1", 0.9)),
                b=float(config.get("b", 0.4)),
            )
            for qid in qids
        ]
    if method == "dense":
        if config.get("provider", "hash") == "hash":
            provider = HashEmbeddingProvider(dim=int(config.get("dim", 32)))
        else:
            provider = HttpEmbeddingProvider(config["base_url"])
        index = embed_corpus(corpus.passages.values(), provider)
        runs = []
        for qid in qids:
            query_vec = provider.embed([corpus.questions[qid].text])[0]
            runs.append(
                search_dense(
                    index,
                    query_vec,
                    k,
                    metric=config.get("metric", "cosine"),
                    question_id=qid,
                    tag="dense",
                )
            )
        return runs
    raise PipelineError(f"retrieve: unknown method {method!r}")


def stage_candidates(corpus: Corpus, manifest: ExperimentManifest) -> list[RunList]:
    """Candidate pools for the perfect-retriever mode."""
    return [
        oracle_candidates(qid, corpus, manifest.threshold)
        for qid in _eval_questions(corpus, manifest)
    ]


def stage_rerank(
    corpus: Corpus, manifest: ExperimentManifest, runs: Sequence[RunList]
) -> list[RunList]:
    config = manifest.reranker
    if not config:
        return list(runs)
    depth = int(config.get("depth", 100))
    texts = {pid: p.text for pid, p in corpus.passages.items()}
    out = []
    for run in runs:
        scorer = build_scorer(config, corpus, run)
        request = RerankRequest(
            question=corpus.questions[run.question_id].text,
            candidates=run,
            scorer=scorer,
            depth=depth,
        )
        out.append(rerank(request, texts))
    return out


def stage_fuse(
    corpus: Corpus, manifest: ExperimentManifest, runs: Sequence[RunList]
) -> dict[str, str]:
    """Contexts for every evaluated question; no candidates means an empty
    context, which the read stage scores as no answer."""
    config = FusionConfig(
        method=manifest.fusion.get("method", "union_freq"),
        alpha=float(manifest.fusion.get("alpha", 0.6)),
        beta=float(manifest.fusion.get("beta", 0.4)),
        sentence_cap=manifest.fusion.get("sentence_cap"),
    )
    by_qid = {run.question_id: run for run in runs}
    contexts: dict[str, str] = {}
    for qid in _eval_questions(corpus, manifest):
        run = by_qid.get(qid)
        top = [corpus.passages[e.passage_id] for e in run.entries[: manifest.k]] if run else []
        contexts[qid] = fuse(top, config) if top else ""
    return contexts


def build_readers(corpus: Corpus, manifest: ExperimentManifest) -> list[ChatProvider]:
    knowledge = mock_knowledge_from_questions(corpus.questions.values())
    readers = [build_provider(cfg, knowledge) for cfg in manifest.readers]
    if not readers:
        raise PipelineError("read: manifest configures no readers")
    return readers


def build_judge(corpus: Corpus, manifest: ExperimentManifest) -> ChatProvider | None:
    if manifest.judge is None:
        return None
    knowledge = mock_knowledge_from_questions(corpus.questions.values())
    return build_provider(manifest.judge, knowledge)


def stage_read(
    corpus: Corpus,
    manifest: ExperimentManifest,
    contexts: Mapping[str, str],
    readers: Sequence[ChatProvider],
) -> dict[str, dict[str, str | None]]:
    """Answers per reader: {reader: {question_id: answer or None}}."""
    answers: dict[str, dict[str, str | None]] = {}
    for reader in readers:
        per_question: dict[str, str | None] = {}
        for qid in sorted(contexts):
            context = contexts[qid]
            if not context.strip():
                log.warning("question %s has an empty context; scored as no answer", qid)
                per_question[qid] = None
                continue
            per_question[qid] = answer_open_book(reader, corpus.questions[qid].text, context)
        answers[reader.name] = per_question
    return answers


def em_for_readers(
    corpus: Corpus, answers: Mapping[str, Mapping[str, str | None]]
) -> dict[str, float]:
    golds = {qid: q.answer_pool() for qid, q in corpus.questions.items()}
    return {
        reader: evaluate_answers(per_question, golds)
        for reader, per_question in sorted(answers.items())
    }


# ---------------------------------------------------------------------------
# Artifact IO


def _write_contexts(path: Path, contexts: Mapping[str, str]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for qid in sorted(contexts):
            fh.write(
                json.dumps({"question_id": qid, "context": contexts[qid]}, ensure_ascii=False, sort_keys=True)
                + "\n"
            )


def load_contexts(path: str | Path) -> dict[str, str]:
    contexts = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                contexts[record["question_id"]] = record["context"]
    return contexts


def _write_answers(path: Path, answers: Mapping[str, Mapping[str, str | None]]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for reader in sorted(answers):
            for qid in sorted(answers[reader]):
                record = {"question_id": qid, "reader": reader, "answer": answers[reader][qid]}
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def load_answers(path: str | Path) -> dict[str, dict[str, str | None]]:
    answers: dict[str, dict[str, str | None]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = json.loads(line)
                answers.setdefault(record["reader"], {})[record["question_id"]] = record["answer"]
    return answers


# ---------------------------------------------------------------------------
# Mode runners


def run_manifest(manifest: ExperimentManifest, outdir: str | Path) -> list[dict]:
    """Execute a manifest end to end; returns the report rows."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=1, sort_keys=True), encoding="utf-8"
    )
    corpus = load_corpus(manifest.corpus)
    if manifest.mode == "optimal":
        rows = _run_optimal(corpus, manifest, out)
    else:
        rows = _run_ranked_mode(corpus, manifest, out)
    write_report(rows, out / "report.jsonl", out / "report.md")
    return rows


def _stage(name: str):
    """Tag stage failures with the stage name."""

    class _StageContext:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(f"{name}: {exc}") from exc
            return False

    return _StageContext()


def _run_ranked_mode(corpus: Corpus, manifest: ExperimentManifest, out: Path) -> list[dict]:
    cache = StageCache(out)
    chash = corpus_hash(manifest.corpus)

    if manifest.mode == "standard":
        run_path = out / "retrieved.run"
        retrieve_hash = _hash_parts("retrieve", chash, json.dumps(manifest.retriever, sort_keys=True), str(manifest.split))
        if cache.fresh("retrieve", retrieve_hash, [run_path]):
            runs = load_runs(run_path)
        else:
            with _stage("retrieve"):
                runs = stage_retrieve(corpus, manifest)
            save_runs(runs, run_path)
            cache.record("retrieve", retrieve_hash)
        system = (manifest.retriever or {}).get("method", "bm25")
    else:
        run_path = out / "candidates.run"
        cand_hash = _hash_parts("candidates", chash, str(manifest.threshold), str(manifest.split))
        if cache.fresh("candidates", cand_hash, [run_path]):
            runs = load_runs(run_path)
        else:
            with _stage("candidates"):
                runs = stage_candidates(corpus, manifest)
            # questions with an empty pool carry no run-file lines; they are
            # re-added as empty runs for evaluation below
            runs = [r for r in runs if r.entries]
            save_runs(runs, run_path)
            cache.record("candidates", cand_hash)
        system = "oracle"

    if manifest.reranker:
        rerank_path = out / "reranked.run"
        rerank_hash = _hash_parts(
            "rerank", chash, run_path.read_text(encoding="utf-8"), json.dumps(manifest.reranker, sort_keys=True)
        )
        if cache.fresh("rerank", rerank_hash, [rerank_path]):
            runs = load_runs(rerank_path)
        else:
            with _stage("rerank"):
                runs = stage_rerank(corpus, manifest, runs)
            save_runs(runs, rerank_path)
            cache.record("rerank", rerank_hash)
        system += "+" + manifest.reranker.get("scorer", "identity")
        final_run_path = rerank_path
    else:
        final_run_path = run_path

    contexts_path = out / "contexts.jsonl"
    fuse_hash = _hash_parts(
        "fuse",
        chash,
        final_run_path.read_text(encoding="utf-8"),
        json.dumps(manifest.fusion, sort_keys=True),
        str(manifest.k),
    )
    if cache.fresh("fuse", fuse_hash, [contexts_path]):
        contexts = load_contexts(contexts_path)
    else:
        with _stage("fuse"):
            contexts = stage_fuse(corpus, manifest, runs)
        _write_contexts(contexts_path, contexts)
        cache.record("fuse", fuse_hash)

    answers_path = out / "answers.jsonl"
    read_hash = _hash_parts(
        "read",
        chash,
        contexts_path.read_text(encoding="utf-8"),
        json.dumps(manifest.readers, sort_keys=True),
        str(manifest.seed),
    )
    if cache.fresh("read", read_hash, [answers_path]):
        answers = load_answers(answers_path)
    else:
        with _stage("read"):
            readers = build_readers(corpus, manifest)
            answers = stage_read(corpus, manifest, contexts, readers)
        _write_answers(answers_path, answers)
        cache.record("read", read_hash)

    qrels = {qid: corpus.labels_for(qid) for qid in corpus.questions}
    config = MetricConfig.from_dict({"relevance_threshold": manifest.threshold, **manifest.metrics})
    with _stage("eval"):
        by_qid = {run.question_id: run for run in runs}
        tag = runs[0].tag if runs else system
        eval_runs = [
            by_qid.get(qid, RunList(qid, [], tag)) for qid in _eval_questions(corpus, manifest)
        ]
        run_metrics = evaluate_runs(eval_runs, qrels, config)
        row = run_metrics.to_row()
        row["system"] = f"{system}/k={manifest.k}/{manifest.fusion.get('method', 'union_freq')}"
        for reader, em in em_for_readers(corpus, answers).items():
            row[f"em:{reader}"] = round(em, 6)
    return [row]


def _run_optimal(corpus: Corpus, manifest: ExperimentManifest, out: Path) -> list[dict]:
    """Upper bound: a question is answerable if any single relevant passage
    lets the reader produce a correct answer."""
    readers = build_readers(corpus, manifest)
    judge_provider = build_judge(corpus, manifest)
    qids = _eval_questions(corpus, manifest)
    per_reader: dict[str, dict[str, str | None]] = {r.name: {} for r in readers}
    for reader in readers:
        for qid in qids:
            question = corpus.questions[qid]
            pool = question.answer_pool()
            best: str | None = None
            for passage in corpus.passages_of(qid):
                if corpus.label_of(qid, passage.id) < manifest.threshold:
                    continue
                with _stage("read"):
                    answer = answer_open_book(reader, question.text, passage.text)
                if answer is None:
                    continue
                with _stage("judge"):
                    verdict = judge_against_pool(judge_provider, question.text, pool, answer)
                if verdict.correct:
                    best = answer
                    if not manifest.optimal_exhaustive:
                        break
            per_reader[reader.name][qid] = best
    _write_answers(out / "answers.jsonl", per_reader)
    row: dict = {"system": "optimal", "questions": len(qids)}
    for reader, em in em_for_readers(corpus, per_reader).items():
        row[f"em:{reader}"] = round(em, 6)
    return [row]


def export_pipeline_qrels(corpus: Corpus, outdir: str | Path, threshold: int = 1) -> Path:
    path = Path(outdir) / "qrels.tsv"
    export_qrels(corpus, path, threshold)
    return path


__all__ = [
    "MODES",
    "CONTEXT_SIZES",
    "PipelineError",
    "ExperimentManifest",
    "StageCache",
    "corpus_hash",
    "stage_retrieve",
    "stage_candidates",
    "stage_rerank",
    "stage_fuse",
    "stage_read",
    "build_readers",
    "build_judge",
    "run_manifest",
    "load_contexts",
    "load_answers",
    "export_pipeline_qrels",
]
