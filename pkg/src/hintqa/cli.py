"""Command-line entry point tying the pipeline stages together.

Subcommands: forge, filter, label, verify, retrieve, rerank, fuse, read,
eval, run, serve.  Model endpoints come from a JSON config file; secrets only
ever come from environment variables.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .corpus import (
    export_qrels,
    load_corpus,
    load_qrels,
    load_runs,
    save_corpus,
    save_runs,
)
from .forge import forge_corpus
from .fusion import FusionConfig, fuse
from .judge import build_provider, mock_knowledge_from_questions, parametric_filter, sample_splits
from .labeling import (
    apply_verification,
    decided_tasks,
    export_verification,
    load_decisions,
    run_labeling,
)
from .metrics import MetricConfig, evaluate_answers, evaluate_runs, write_report
from .rerank import RerankRequest, build_scorer, rerank
from .serve import DEFAULT_TOKEN_ENV, create_app

log = logging.getLogger("hintqa")


def _load_questions_file(path: str) -> list:
    from .corpus import _question_from_record, _read_jsonl, CorpusError

    questions = []
    seen = set()
    for lineno, record in _read_jsonl(Path(path)):
        try:
            question = _question_from_record(record)
            question.validate()
        except (KeyError, TypeError, CorpusError) as exc:
            raise CorpusError(f"{path}:{lineno}: {exc}") from exc
        if question.id in seen:
            raise CorpusError(f"{path}:{lineno}: duplicate question id {question.id}")
        seen.add(question.id)
        questions.append(question)
    return questions


def _save_questions_file(questions, path: str) -> None:
    from .corpus import _question_record

    with open(path, "w", encoding="utf-8") as fh:
        for question in sorted(questions, key=lambda q: q.id):
            fh.write(json.dumps(_question_record(question), ensure_ascii=False, sort_keys=True) + "\n")


def _endpoints_config(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _providers(config: dict, key: str, questions) -> list:
    knowledge = mock_knowledge_from_questions(questions)
    return [build_provider(entry, knowledge) for entry in config.get(key, [])]


def _judge_provider(config: dict, questions):
    entry = config.get("judge")
    if entry is None:
        return None
    return build_provider(entry, mock_knowledge_from_questions(questions))


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=1, sort_keys=True, ensure_ascii=False), encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_forge(args: argparse.Namespace) -> int:
    questions = _load_questions_file(args.questions)
    corpus, report = forge_corpus(questions, max_hints=args.max_hints)
    save_corpus(corpus, args.out)
    if args.report:
        _write_json(args.report, report.to_dict())
    print(
        f"forged {report.passages} passages from {report.questions_forged} questions "
        f"(dropped: leakage={report.dropped_leakage}, no_hints={report.dropped_no_hints})"
    )
    return 0


def cmd_filter(args: argparse.Namespace) -> int:
    questions = _load_questions_file(args.questions)
    config = _endpoints_config(args.endpoints)
    providers = _providers(config, "models", questions)
    judge_provider = _judge_provider(config, questions)
    if not providers:
        print("filter: endpoints config lists no models", file=sys.stderr)
        return 2
    flagged = []
    for question in questions:
        question.parametric = parametric_filter(
            question, providers, trials=args.trials, judge_provider=judge_provider
        )
        flagged.append(question)
    assignment = sample_splits(flagged, args.n_train, args.n_test, args.seed)
    for question in flagged:
        question.split = assignment[question.id]
    _save_questions_file(flagged, args.out)
    counts = {split: sum(1 for q in flagged if q.split == split) for split in ("train", "dev", "test", "unassigned")}
    report = {
        "questions": len(flagged),
        "parametric": sum(1 for q in flagged if q.parametric),
        "splits": counts,
        "judge_mode": judge_provider.name if judge_provider else "lexical",
    }
    if args.report:
        _write_json(args.report, report)
    print(f"filtered {len(flagged)} questions; splits: {counts}")
    return 0


def cmd_label(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    config = _endpoints_config(args.endpoints)
    providers = _providers(config, "models", corpus.questions.values())
    judge_provider = _judge_provider(config, corpus.questions.values())
    if not providers:
        print("label: endpoints config lists no models", file=sys.stderr)
        return 2
    labeled, report = run_labeling(corpus, providers, judge_provider)
    save_corpus(labeled, args.out)
    if args.qrels:
        export_qrels(labeled, args.qrels, threshold=args.threshold)
    if args.report:
        _write_json(args.report, report.to_dict())
    print(
        f"labeled {report.passages} passages "
        f"(label 2: {report.label_2}, label 1: {report.label_1}, harvested: {report.harvested})"
    )
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    if args.action == "export":
        tasks = export_verification(corpus, splits=tuple(args.splits.split(",")))
        with open(args.out, "w", encoding="utf-8") as fh:
            for task in tasks:
                fh.write(json.dumps(task.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        print(f"exported {len(tasks)} verification tasks to {args.out}")
        return 0
    # apply
    tasks = export_verification(corpus, splits=tuple(args.splits.split(",")))
    decisions = load_decisions(args.decisions)
    updated, changes = apply_verification(corpus, decided_tasks(tasks, decisions))
    save_corpus(updated, args.out)
    if args.changes:
        Path(args.changes).write_text(
            "\n".join(json.dumps(c, ensure_ascii=False, sort_keys=True) for c in changes) + "\n",
            encoding="utf-8",
        )
    print(f"applied verification: {len(changes)} change(s); corpus written to {args.out}")
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    manifest = pipeline.ExperimentManifest(
        corpus=args.corpus,
        retriever={"method": args.method, "k": args.k},
        readers=[{"provider": "mock"}],
        split=args.split,
    )
    runs = pipeline.stage_retrieve(corpus, manifest)
    save_runs(runs, args.out)
    print(f"wrote {sum(len(r.entries) for r in runs)} entries for {len(runs)} questions to {args.out}")
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    runs = load_runs(getattr(args, "in"))
    texts = {pid: p.text for pid, p in corpus.passages.items()}
    out_runs = []
    for run in runs:
        scorer = build_scorer({"scorer": args.scorer}, corpus, run)
        request = RerankRequest(
            question=corpus.questions[run.question_id].text,
            candidates=run,
            scorer=scorer,
            depth=args.depth,
        )
        out_runs.append(rerank(request, texts))
    save_runs(out_runs, args.out)
    print(f"reranked {len(out_runs)} runs with scorer {args.scorer} (depth {args.depth})")
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    runs = load_runs(args.run)
    method = {"norm": "union_norm", "freq": "union_freq"}[args.method]
    config = FusionConfig(method=method, alpha=args.alpha, beta=args.beta, sentence_cap=args.cap)
    with open(args.out, "w", encoding="utf-8") as fh:
        for run in sorted(runs, key=lambda r: r.question_id):
            top = [corpus.passages[e.passage_id] for e in run.entries[: args.k]]
            context = fuse(top, config) if top else ""
            fh.write(
                json.dumps(
                    {"question_id": run.question_id, "context": context},
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    print(f"fused contexts for {len(runs)} questions to {args.out}")
    return 0


def cmd_read(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    config = _endpoints_config(args.endpoints)
    readers = _providers(config, "models", corpus.questions.values())
    if not readers:
        print("read: endpoints config lists no models", file=sys.stderr)
        return 2
    contexts = pipeline.load_contexts(args.contexts)
    manifest = pipeline.ExperimentManifest(corpus=args.corpus, readers=config.get("models", []))
    answers = pipeline.stage_read(corpus, manifest, contexts, readers)
    pipeline._write_answers(Path(args.out), answers)
    print(f"answered {len(contexts)} questions with {len(readers)} reader(s)")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    qrels = load_qrels(args.qrels)
    config = (
        MetricConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
        if args.config
        else MetricConfig()
    )
    rows = []
    for run_path in args.run:
        runs = load_runs(run_path)
        rows.append(evaluate_runs(runs, qrels, config).to_row())
    if args.answers:
        if not args.corpus:
            print("eval: --answers needs --corpus for the gold answer pools", file=sys.stderr)
            return 2
        corpus = load_corpus(args.corpus)
        golds = {qid: q.answer_pool() for qid, q in corpus.questions.items()}
        answers = pipeline.load_answers(args.answers)
        for reader in sorted(answers):
            rows.append(
                {"system": f"reader:{reader}", "em": round(evaluate_answers(answers[reader], golds), 6)}
            )
    write_report(rows, args.out_prefix + ".jsonl", args.out_prefix + ".md")
    print(f"wrote {args.out_prefix}.jsonl and {args.out_prefix}.md")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    manifest = pipeline.ExperimentManifest.from_file(args.manifest)
    rows = pipeline.run_manifest(manifest, args.out)
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    token = os.environ.get(args.token_env, "")
    app = create_app(
        args.corpus,
        args.decisions,
        token=token,
        ui_dir=args.ui,
        splits=tuple(args.splits.split(",")),
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hintqa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forge", help="filter hints and synthesize passages")
    p.add_argument("--questions", required=True, help="question-hint JSONL file")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--max-hints", type=int, default=5)
    p.add_argument("--report", help="write the forge report JSON here")
    p.set_defaults(func=cmd_forge)

    p = sub.add_parser("filter", help="parametric-answerability filter and split sampling")
    p.add_argument("--questions", required=True)
    p.add_argument("--endpoints", required=True, help="model endpoints JSON config")
    p.add_argument("--out", required=True, help="output questions JSONL")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--n-train", type=int, default=5000)
    p.add_argument("--n-test", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("label", help="assign graded relevance labels via model answerability")
    p.add_argument("--corpus", required=True)
    p.add_argument("--endpoints", required=True)
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--qrels", help="also export qrels to this path")
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--report")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("verify", help="export or apply human verification")
    p.add_argument("action", choices=["export", "apply"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="tasks JSONL (export) or corpus dir (apply)")
    p.add_argument("--splits", default="dev,test")
    p.add_argument("--decisions", help="decision log JSONL (apply)")
    p.add_argument("--changes", help="write the change log here (apply)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("retrieve", help="rank passages for every question")
    p.add_argument("--corpus", required=True)
    p.add_argument("--method", choices=["bm25", "dense"], default="bm25")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--split", help="restrict to one split")
    p.add_argument("--out", required=True, help="run file")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("rerank", help="reorder a run with a pointwise scorer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--in", dest="in", required=True, help="input run file")
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", default="identity")
    p.add_argument("--depth", type=int, default=100)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("fuse", help="build reader contexts from the top-k passages")
    p.add_argument("--corpus", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--method", choices=["norm", "freq"], default="freq")
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--beta", type=float, default=0.4)
    p.add_argument("--k", type=int, choices=[1, 3, 5], default=5)
    p.add_argument("--cap", type=int, help="optional sentence cap")
    p.add_argument("--out", required=True, help="contexts JSONL")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("read", help="answer questions from fused contexts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--contexts", required=True)
    p.add_argument("--endpoints", required=True)
    p.add_argument("--out", required=True, help="answers JSONL")
    p.set_defaults(func=cmd_read)

    p = sub.add_parser("eval", help="score runs and reader answers")
    p.add_argument("--qrels", required=True)
    p.add_argument("--run", action="append", default=[], help="run file (repeatable)")
    p.add_argument("--answers", help="answers JSONL for EM")
    p.add_argument("--corpus", help="corpus dir (gold answer pools for EM)")
    p.add_argument("--config", help="metric config JSON")
    p.add_argument("--out-prefix", required=True, help="writes PREFIX.jsonl and PREFIX.md")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="execute a whole experiment manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="serve the verification API and UI")
    p.add_argument("--corpus", required=True)
    p.add_argument("--decisions", required=True, help="append-only decision log")
    p.add_argument("--ui", help="static UI asset directory")
    p.add_argument("--splits", default="dev,test")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--token-env", default=DEFAULT_TOKEN_ENV, help="env var holding the shared token")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(f"hintqa {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
