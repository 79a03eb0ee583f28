"""Label the bundled toy corpus with the mock models, then play one round of
human verification and watch the labels move.

Run:  python3 demos/demo_label_and_verify.py
"""

from hintqa import MockChatProvider
from hintqa.judge import mock_knowledge_from_questions
from hintqa.labeling import apply_verification, export_verification, run_labeling
from hintqa.labeling import VerificationTask
from hintqa.toy import build_toy_corpus

corpus = build_toy_corpus()
knowledge = mock_knowledge_from_questions(corpus.questions.values())

# The mock reader answers correctly whenever a passage carries at least three
# of the question's hints, which makes labels fully deterministic.
labelers = [MockChatProvider(name="labeler-a", knowledge=knowledge, threshold=3)]
labeled, report = run_labeling(corpus, labelers)
print("labeling report:", report.to_dict())

by_len: dict[int, set[int]] = {}
for (qid, pid), judgment in labeled.judgments.items():
    n = len(labeled.passages[pid].hint_seq)
    by_len.setdefault(n, set()).add(judgment.label)
print("labels by hint count:", {n: sorted(v) for n, v in sorted(by_len.items())})

# Human verification: export tasks for the test split, reject one question's
# only correct answer, and apply.
tasks = export_verification(labeled, splits=("test",))
target = tasks[0]
print(f"\nverifying {target.question_id}: candidates =",
      [(c.answer, c.matched_gold) for c in target.candidates])

decided = []
for task in tasks:
    decisions = {c.answer: True for c in task.candidates}
    if task.question_id == target.question_id:
        decisions = {c.answer: False for c in task.candidates}
    decided.append(
        VerificationTask(
            task.question_id, task.question_text, task.gold_answers, task.candidates, decisions
        )
    )

updated, changes = apply_verification(labeled, decided)
flipped = [c for c in changes if c.get("change") == "label"]
print(f"{len(flipped)} judgments changed label; sample:", flipped[0])
remaining = {j.label for (qid, _), j in updated.judgments.items() if qid == target.question_id}
print(f"labels left on {target.question_id}:", sorted(remaining))
