"""Chat prompt templates for answer judging and context-grounded answering.

The templates are frozen: golden tests compare their rendering byte-for-byte,
so any edit here is a corpus-affecting change.
"""

from __future__ import annotations

Message = dict[str, str]

EQUIVALENCE_TEMPLATE = (
    "Question: {question}\n"
    "Answer: {answer}\n"
    "Candidate: {candidate}\n"
    'Is candidate correct? Choose between "Yes" or "No"'
)

READER_SYSTEM = (
    "You are an assistant that answers questions based on the provided context. "
    "You just answer questions with exact answers. "
    "You do not use sentences as the response."
)

READER_CONDITIONS = (
    "Use the context to answer the question under conditions:\n"
    "1. Answer should not be sentences. It should be some words.\n"
    '2. Do not generate "sorry" or "I cannot ..." sentences; instead, use "NO ANSWER".\n'
    "3. Do not generate explanations, reasoning, or full sentences—only provide the exact answer.\n"
    '4. If the answer cannot be guessed from the context, respond only with "NO ANSWER".'
)

# (context, question, answer) exemplars shown to the reader before the real query.
READER_EXAMPLES: tuple[tuple[str, str, str], ...] = (
    (
        "He was the 44th President of the United States.\n"
        "He served as President from 2009 to 2017.\n"
        "He was the first African-American President of the United States.\n"
        "He was a member of the Democratic Party.\n"
        "He was born on August 4, 1961 in Honolulu, Hawaii.",
        "Who won the Nobel Peace Prize in 2009?",
        "Barack Obama",
    ),
    (
        "The capital city of this country is Paris.\n"
        "This country is located in northwestern Europe.\n"
        "This country has a long history and has played a significant role in international affairs.\n"
        "The official language of this country is French.\n"
        "The currency used in this country is the Euro.",
        "Édouard Daladier became Prime Minister of which country in 1933?",
        "France",
    ),
    (
        "It's the coldest season of the year.\n"
        "It's the season when snow falls in many regions.\n"
        "It's the season when many people celebrate Christmas and New Year's Eve.\n"
        "It's the season when days are shorter and nights are longer.\n"
        "It's the season when many animals hibernate.",
        "If you have a 'Mahonia Japonica', in which season will it be in flower?",
        "Winter",
    ),
    (
        "It is a team sport that originated in the United States.\n"
        "It is played with an oval-shaped ball.\n"
        "The objective of the game is to score points by advancing the ball into the opposing team's end zone.\n"
        "Points can be scored by carrying the ball across the opponent's goal line, throwing it to a teammate "
        "in the end zone, or kicking it through the opponent's goalposts.\n"
        "The game is divided into four quarters, each lasting 15 minutes.",
        "Which sport is played under the 'Harvard Rules'?",
        "AMERICAN FOOTBALL",
    ),
    (
        "He was born on April 20, 1889, in Braunau am Inn, Austria.\n"
        "He was the leader of the Nazi Party.\n"
        "He became the chancellor of Germany in 1933.\n"
        "He took the title of Führer und Reichskanzler in 1934.\n"
        "He initiated World War II in Europe by invading Poland on September 1, 1939.",
        "Who was made an honorary citizen of Haslach, Austria, in 1938, an honour withdrawn in 2004?",
        "Adolf Hitler",
    ),
)


def _context_block(context: str, question: str) -> str:
    return f"Context:\n{context}\n\nQuestion: {question}"


def equivalence_prompt(question: str, answer: str, candidate: str) -> list[Message]:
    """The Yes/No answer-equivalence prompt, sent as a single user message."""
    return [
        {
            "role": "user",
            "content": EQUIVALENCE_TEMPLATE.format(
                question=question, answer=answer, candidate=candidate
            ),
        }
    ]


def reader_prompt(context: str, question: str) -> list[Message]:
    """Few-shot open-book prompt; the real context/question fill the final block."""
    messages: list[Message] = [{"role": "system", "content": READER_SYSTEM}]
    for i, (ex_context, ex_question, ex_answer) in enumerate(READER_EXAMPLES):
        block = _context_block(ex_context, ex_question)
        if i == 0:
            block = f"{READER_CONDITIONS}\n\n{block}"
        messages.append({"role": "user", "content": block})
        messages.append({"role": "assistant", "content": ex_answer})
    messages.append({"role": "user", "content": _context_block(context, question)})
    return messages


def closed_book_prompt(question: str) -> list[Message]:
    """The question alone, with no supporting context."""
    return [{"role": "user", "content": question}]


__all__ = [
    "Message",
    "EQUIVALENCE_TEMPLATE",
    "READER_SYSTEM",
    "READER_CONDITIONS",
    "READER_EXAMPLES",
    "equivalence_prompt",
    "reader_prompt",
    "closed_book_prompt",
]
