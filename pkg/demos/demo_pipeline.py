"""The full pipeline on the bundled toy corpus, in all three modes.

Builds the corpus, labels it with mock models, then compares standard
retrieval, the perfect-retriever setting, and the per-passage upper bound.

Run:  python3 demos/demo_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from hintqa import MockChatProvider, save_corpus
from hintqa.judge import mock_knowledge_from_questions
from hintqa.labeling import run_labeling
from hintqa.pipeline import ExperimentManifest, export_pipeline_qrels, run_manifest
from hintqa.toy import build_toy_corpus

workdir = Path(tempfile.mkdtemp(prefix="hintqa-demo-"))
print("artifacts under", workdir)

corpus = build_toy_corpus()
knowledge = mock_knowledge_from_questions(corpus.questions.values())
labeled, _ = run_labeling(
    corpus, [MockChatProvider(name="labeler-a", knowledge=knowledge, threshold=3)]
)
corpus_dir = workdir / "corpus"
save_corpus(labeled, corpus_dir)
export_pipeline_qrels(labeled, workdir)

readers = [{"provider": "mock", "name": "reader-a", "threshold": 3}]

manifests = {
    "bm25-only": ExperimentManifest(
        corpus=str(corpus_dir),
        mode="standard",
        k=1,
        retriever={"method": "bm25", "k": 100},
        fusion={"method": "union_freq"},
        readers=readers,
    ),
    "oracle+identity": ExperimentManifest(
        corpus=str(corpus_dir),
        mode="oracle_retriever",
        k=1,
        retriever=None,
        reranker={"scorer": "identity", "depth": 100},
        fusion={"method": "union_freq"},
        readers=readers,
    ),
    "optimal": ExperimentManifest(
        corpus=str(corpus_dir), mode="optimal", k=1, retriever=None, reranker=None, readers=readers
    ),
}

print("\nexact match by mode (higher modes bound the lower ones):")
for name, manifest in manifests.items():
    rows = run_manifest(manifest, workdir / name)
    print(f"  {name:16s}", json.dumps(rows[0], sort_keys=True))
