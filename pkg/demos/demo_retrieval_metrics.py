"""Rank passages with BM25 and the dense retriever, then score the runs.

Run:  python3 demos/demo_retrieval_metrics.py
"""

from hintqa import MetricConfig, MockChatProvider, evaluate_runs
from hintqa.judge import mock_knowledge_from_questions
from hintqa.labeling import run_labeling
from hintqa.retrieval import (
    HashEmbeddingProvider,
    build_lexical_index,
    embed_corpus,
    search_bm25,
    search_dense,
)
from hintqa.toy import build_toy_corpus

corpus = build_toy_corpus()
knowledge = mock_knowledge_from_questions(corpus.questions.values())
labeled, _ = run_labeling(
    corpus, [MockChatProvider(name="labeler-a", knowledge=knowledge, threshold=3)]
)
qrels = {qid: labeled.labels_for(qid) for qid in labeled.questions}

index = build_lexical_index(labeled.passages.values())
bm25_runs = [
    search_bm25(index, q.text, k=100, question_id=qid)
    for qid, q in sorted(labeled.questions.items())
]

provider = HashEmbeddingProvider(dim=32)
dense_index = embed_corpus(labeled.passages.values(), provider)
dense_runs = [
    search_dense(dense_index, provider.embed([q.text])[0], k=100, question_id=qid)
    for qid, q in sorted(labeled.questions.items())
]

config = MetricConfig(relevance_threshold=1)
for runs in (bm25_runs, dense_runs):
    row = evaluate_runs(runs, qrels, config).to_row()
    print(row["system"], {k: v for k, v in row.items() if k != "system"})

# Recall@5 is tiny by construction: every question has 325 relevant passages,
# so even a perfect top-5 can cover at most 5/325 of them.
print("\nrecall ceiling at k=5:", round(5 / 325, 4))
