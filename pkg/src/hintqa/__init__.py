"""hintqa: build inferential-QA corpora from question-hint collections and
evaluate retrieve/rerank/read pipelines over them."""

from .corpus import (
    Corpus,
    CorpusError,
    Hint,
    ModelAnswer,
    Passage,
    Question,
    RelevanceJudgment,
    RunEntry,
    RunList,
    export_qrels,
    load_corpus,
    load_qrels,
    load_runs,
    make_passage,
    passage_id,
    save_corpus,
    save_runs,
)
from .forge import (
    HintSelection,
    JudgeLeakageOracle,
    LexicalLeakageOracle,
    detect_leakage,
    enumerate_sequences,
    forge_corpus,
    forge_passages,
    select_top_hints,
)
from .fusion import FusionConfig, fuse, score_sentences, union_freq, union_norm
from .judge import (
    NO_ANSWER,
    HttpChatProvider,
    MockChatProvider,
    MockKnowledge,
    ModelEndpoint,
    ProviderError,
    ReplayChatProvider,
    Verdict,
    answer_closed_book,
    answer_open_book,
    judge_equivalence,
    parametric_filter,
    sample_splits,
)
from .labeling import (
    VerificationTask,
    apply_verification,
    export_verification,
    label_passage,
    run_labeling,
)
from .metrics import (
    MetricConfig,
    evaluate_answers,
    evaluate_runs,
    exact_match,
    hit_at_k,
    ndcg_at_k,
    recall_at_k,
    reciprocal_rank,
)
from .pipeline import ExperimentManifest, run_manifest
from .rerank import RerankRequest, oracle_candidates, rerank
from .retrieval import (
    HashEmbeddingProvider,
    build_lexical_index,
    embed_corpus,
    search_bm25,
    search_dense,
)
from .toy import build_toy_corpus, toy_questions

__version__ = "0.1.0"
