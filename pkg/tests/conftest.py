from __future__ import annotations

import pytest

from hintqa.corpus import Corpus, Hint, Question
from hintqa.forge import enumerate_sequences, forge_corpus
from hintqa.judge import MockChatProvider, mock_knowledge_from_questions
from hintqa.toy import toy_questions


def question_with_hints(qid: str, n_hints: int, answer: str = "Saturn") -> Question:
    """A tiny question whose hints never mention the answer."""
    hints = [
        Hint(f"Clue number {i + 1} points at the entity.", convergence=0.9 - 0.1 * i)
        for i in range(n_hints)
    ]
    return Question(
        id=qid,
        text=f"Which entity does {qid} describe?",
        answers=[answer],
        hints=hints,
        split="test",
    )


def forged_two_question_corpus() -> Corpus:
    """2 questions (5 and 2 hints) -> 325 + 4 = 329 passages."""
    corpus, _ = forge_corpus(
        [question_with_hints("q1", 5, "Saturn"), question_with_hints("q2", 2, "Amazon")]
    )
    return corpus


@pytest.fixture
def tiny_corpus() -> Corpus:
    return forged_two_question_corpus()


@pytest.fixture
def toy_corpus() -> Corpus:
    corpus, _ = forge_corpus(toy_questions())
    return corpus


@pytest.fixture
def mock_provider(toy_corpus) -> MockChatProvider:
    knowledge = mock_knowledge_from_questions(toy_corpus.questions.values())
    return MockChatProvider(name="mock-a", knowledge=knowledge, threshold=3)


def brute_force_sequences(n: int) -> list[tuple[int, ...]]:
    """Independent oracle: distinct-element tuples by filtered product."""
    from itertools import product

    out = []
    for k in range(1, n + 1):
        for tup in product(range(n), repeat=k):
            if len(set(tup)) == k:
                out.append(tup)
    return sorted(out, key=lambda t: (len(t), t))


def assert_same_sequences(n: int) -> None:
    assert enumerate_sequences(n) == brute_force_sequences(n)
