from __future__ import annotations

import math
import random

import pytest

from hintqa.corpus import RunEntry, RunList
from hintqa.metrics import (
    MetricConfig,
    evaluate_answers,
    evaluate_runs,
    exact_match,
    gain,
    hit_at_k,
    ndcg_at_k,
    recall_at_k,
    reciprocal_rank,
    render_report_rows,
    write_report,
)

# ---------------------------------------------------------------------------
# Brute-force oracle: direct evaluation of the definitions, no shared code.


def oracle_hit(pids: list[str], labels: dict[str, int], k: int, threshold: int) -> int:
    for pid in pids[:k]:
        if labels.get(pid, 0) >= threshold:
            return 1
    return 0


def oracle_recall(pids: list[str], labels: dict[str, int], k: int, threshold: int):
    relevant = [pid for pid, label in labels.items() if label >= threshold]
    if not relevant:
        return None
    hits = [pid for pid in pids[:k] if pid in relevant]
    return len(hits) / len(relevant)


def oracle_rr(pids: list[str], labels: dict[str, int], cutoff: int, threshold: int) -> float:
    for position, pid in enumerate(pids[:cutoff], start=1):
        if labels.get(pid, 0) >= threshold:
            return 1.0 / position
    return 0.0


def oracle_ndcg(pids: list[str], labels: dict[str, int], k: int, exponential: bool) -> float:
    def g(label: int) -> float:
        return float(2**label - 1) if exponential else float(label)

    dcg = 0.0
    for position, pid in enumerate(pids[:k], start=1):
        dcg += g(labels.get(pid, 0)) / math.log2(position + 1)
    ideal_labels = sorted(labels.values(), reverse=True)
    idcg = 0.0
    for position, label in enumerate(ideal_labels[:k], start=1):
        idcg += g(label) / math.log2(position + 1)
    return dcg / idcg if idcg > 0 else 0.0


def random_instance(rng: random.Random):
    n_docs = rng.randint(1, 20)
    doc_ids = [f"d{i:02d}" for i in range(n_docs)]
    labeled = {pid: rng.choice([0, 1, 2]) for pid in rng.sample(doc_ids, rng.randint(0, n_docs))}
    # extra labeled docs that were never retrieved
    for extra in range(rng.randint(0, 3)):
        labeled[f"x{extra}"] = rng.choice([0, 1, 2])
    retrieved = rng.sample(doc_ids, rng.randint(1, n_docs))
    scores = sorted((rng.uniform(0, 10) for _ in retrieved), reverse=True)
    run = RunList(
        "q",
        [RunEntry(pid, score, i + 1) for i, (pid, score) in enumerate(zip(retrieved, scores))],
        "rand",
    )
    return run, labeled


def as_ids(run: RunList) -> list[str]:
    return [e.passage_id for e in run.entries]


class TestOracleEquivalence:
    def test_randomized_agreement(self):
        rng = random.Random(20240817)
        for _ in range(250):
            run, labels = random_instance(rng)
            pids = as_ids(run)
            for threshold in (1, 2):
                for k in (1, 3, 5, 10, 20):
                    assert hit_at_k(run, labels, k, threshold) == oracle_hit(pids, labels, k, threshold)
                    mine = recall_at_k(run, labels, k, threshold)
                    theirs = oracle_recall(pids, labels, k, threshold)
                    if theirs is None:
                        assert mine is None
                    else:
                        assert mine == pytest.approx(theirs, abs=1e-12)
                for cutoff in (1, 5, 100):
                    assert reciprocal_rank(run, labels, cutoff, threshold) == pytest.approx(
                        oracle_rr(pids, labels, cutoff, threshold), abs=1e-12
                    )
            for k in (1, 5, 10, 20):
                for exponential in (True, False):
                    kind = "exponential" if exponential else "linear"
                    assert ndcg_at_k(run, labels, k, kind) == pytest.approx(
                        oracle_ndcg(pids, labels, k, exponential), abs=1e-12
                    )

    def test_monotonic_in_k(self):
        rng = random.Random(99)
        for _ in range(100):
            run, labels = random_instance(rng)
            hits = [hit_at_k(run, labels, k) for k in range(1, 25)]
            assert hits == sorted(hits)
            recalls = [recall_at_k(run, labels, k) for k in range(1, 25)]
            observed = [r for r in recalls if r is not None]
            assert observed == sorted(observed)

    def test_mrr_bounds(self):
        rng = random.Random(7)
        for _ in range(100):
            run, labels = random_instance(rng)
            cutoff = 10
            rr = reciprocal_rank(run, labels, cutoff)
            hit_c = hit_at_k(run, labels, cutoff)
            hit_1 = hit_at_k(run, labels, 1)
            assert rr >= hit_c * (1.0 / cutoff) - 1e-12
            assert rr <= hit_1 + (1 - hit_1) + 1e-12


class TestMetricExamples:
    def test_hit_trivial_cases(self):
        run = RunList("q", [RunEntry("a", 2.0, 1), RunEntry("b", 1.0, 2)], "t")
        assert hit_at_k(run, {"a": 2}, 1) == 1
        assert hit_at_k(run, {"b": 1}, 1) == 0
        assert hit_at_k(run, {"b": 1}, 2, threshold=2) == 0  # label 1 below threshold 2

    def test_relevant_at_rank_11_misses_top_10(self):
        entries = [RunEntry(f"d{i:02d}", 20.0 - i, i) for i in range(1, 12)]
        run = RunList("q", entries, "t")
        assert hit_at_k(run, {"d11": 2}, 10) == 0
        assert hit_at_k(run, {"d11": 2}, 11) == 1

    def test_recall_fraction(self):
        entries = [RunEntry(f"d{i}", 10.0 - i, i) for i in range(1, 6)]
        run = RunList("q", entries, "t")
        labels = {"d1": 1, "d3": 2, "x1": 1, "x2": 2}
        assert recall_at_k(run, labels, 5) == pytest.approx(0.5)

    def test_recall_at_forge_scale(self):
        # 325 relevant in total, one retrieved in the top-5
        labels = {f"p{i:03d}": 1 for i in range(325)}
        run = RunList(
            "q",
            [RunEntry("p000", 5.0, 1)] + [RunEntry(f"z{i}", 4.0 - i, i + 2) for i in range(4)],
            "t",
        )
        assert recall_at_k(run, labels, 5) == pytest.approx(1 / 325)

    def test_all_relevant_found(self):
        run = RunList("q", [RunEntry("a", 2.0, 1), RunEntry("b", 1.0, 2)], "t")
        assert recall_at_k(run, {"a": 2, "b": 1}, 2) == pytest.approx(1.0)

    def test_mrr_examples(self):
        entries = [RunEntry(f"d{i}", 10.0 - i, i) for i in range(1, 6)]
        run = RunList("q", entries, "t")
        assert reciprocal_rank(run, {"d3": 2}, 100) == pytest.approx(1 / 3)
        assert reciprocal_rank(run, {}, 100) == 0.0
        assert reciprocal_rank(run, {"d1": 1}, 100) == 1.0
        assert reciprocal_rank(run, {"d3": 2}, 2) == 0.0  # outside cutoff

    def test_ndcg_single_relevant_at_rank_1(self):
        run = RunList("q", [RunEntry("a", 1.0, 1)], "t")
        assert ndcg_at_k(run, {"a": 2}, 1) == pytest.approx(1.0)

    def test_ndcg_hand_computed(self):
        run = RunList("q", [RunEntry("a", 2.0, 1), RunEntry("b", 1.0, 2)], "t")
        labels = {"a": 1, "b": 2}
        dcg = 1 / 1 + 3 / math.log2(3)
        idcg = 3 / 1 + 1 / math.log2(3)
        assert dcg == pytest.approx(2.8928, abs=1e-4)
        assert idcg == pytest.approx(3.6309, abs=1e-4)
        assert ndcg_at_k(run, labels, 2) == pytest.approx(dcg / idcg, abs=1e-12)
        assert ndcg_at_k(run, labels, 2) == pytest.approx(0.7967, abs=1e-4)

    def test_ndcg_no_labels_is_zero(self):
        run = RunList("q", [RunEntry("a", 1.0, 1)], "t")
        assert ndcg_at_k(run, {}, 10) == 0.0

    def test_ndcg_in_unit_interval_and_ideal_is_one(self):
        rng = random.Random(3)
        for _ in range(50):
            run, labels = random_instance(rng)
            value = ndcg_at_k(run, labels, 10)
            assert 0.0 <= value <= 1.0 + 1e-12
            if any(v > 0 for v in labels.values()):
                ordered = sorted(labels.items(), key=lambda kv: -kv[1])
                ideal = RunList(
                    "q",
                    [RunEntry(pid, float(len(ordered) - i), i + 1) for i, (pid, _) in enumerate(ordered)],
                    "ideal",
                )
                assert ndcg_at_k(ideal, labels, len(ordered)) == pytest.approx(1.0)

    def test_gain_functions(self):
        assert gain(2, "exponential") == 3.0
        assert gain(2, "linear") == 2.0
        assert gain(0, "exponential") == 0.0


class TestExactMatch:
    def test_article_and_case_normalization(self):
        assert exact_match("The USA", ["usa"]) == 1

    def test_distinct_strings_do_not_match(self):
        assert exact_match("United States", ["USA"]) == 0

    def test_no_answer_never_matches(self):
        assert exact_match(None, ["anything"]) == 0
        assert exact_match("NO ANSWER", ["no answer"]) == 0

    def test_punctuation_stripped(self):
        assert exact_match("Mount Everest!", ["mount everest"]) == 1

    def test_mean_over_questions(self):
        answers = {"q1": "Paris", "q2": None, "q3": "wrong"}
        golds = {"q1": ["paris"], "q2": ["x"], "q3": ["right"]}
        assert evaluate_answers(answers, golds) == pytest.approx(1 / 3)


class TestConfigAndReport:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            MetricConfig(relevance_threshold=0)
        with pytest.raises(ValueError):
            MetricConfig(ndcg_gain="cubic")
        with pytest.raises(ValueError):
            MetricConfig(hit_ks=[5, 1])

    def test_evaluate_runs_rows(self):
        run = RunList("q", [RunEntry("a", 1.0, 1)], "sys")
        metrics = evaluate_runs([run], {"q": {"a": 2}}, MetricConfig())
        row = metrics.to_row()
        assert row["system"] == "sys"
        assert row["hit@1"] == 1.0
        assert row["mrr"] == 1.0

    def test_identical_runs_identical_rows(self):
        run = RunList("q", [RunEntry("a", 1.0, 1)], "sys")
        qrels = {"q": {"a": 2}}
        assert evaluate_runs([run], qrels).to_row() == evaluate_runs([run], qrels).to_row()

    def test_empty_run_set_renders_header_only(self):
        table = render_report_rows([])
        assert table.splitlines()[0] == "| system |"

    def test_write_report_roundtrip(self, tmp_path):
        rows = [{"system": "a", "hit@1": 0.5}, {"system": "b", "em:reader": 0.25}]
        write_report(rows, tmp_path / "r.jsonl", tmp_path / "r.md")
        import json

        loaded = [json.loads(line) for line in (tmp_path / "r.jsonl").read_text().splitlines()]
        assert loaded == rows
        table = (tmp_path / "r.md").read_text()
        assert "| system |" in table and "0.5000" in table
