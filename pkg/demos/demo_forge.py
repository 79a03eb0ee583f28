"""Walk through passage forging: leakage gate, hint selection, enumeration.

Run:  python3 demos/demo_forge.py
"""

from hintqa import Hint, Question, detect_leakage, enumerate_sequences, forge_corpus
from hintqa.forge import LexicalLeakageOracle

# Every non-empty ordered subset of n hints; this is why one question with
# five hints expands into 325 passages.
for n in range(1, 6):
    print(f"{n} hints -> {len(enumerate_sequences(n))} passages")

# A hint that names the answer disqualifies its whole question.
oracle = LexicalLeakageOracle()
leaky = Hint("Messi won seven Ballon d'Or awards")
clean = Hint("He was born in Honolulu")
print("leaky hint detected:", detect_leakage([leaky], {"Lionel Messi"}, oracle))
print("clean hint passes:  ", not detect_leakage([clean], {"Barack Obama"}, oracle))

questions = [
    Question(
        id="demo-1",
        text="Which planet is famous for its bright ring system?",
        answers=["Saturn"],
        hints=[
            Hint("It is the sixth planet from the Sun.", convergence=0.9),
            Hint("Its largest moon is called Titan.", convergence=0.8),
            Hint("A day there lasts about ten and a half hours.", convergence=0.7),
        ],
    ),
    Question(
        id="demo-2",
        text="Which metal is liquid at room temperature?",
        answers=["Mercury"],
        hints=[
            # this one leaks and takes the question down with it
            Hint("Mercury was once used in thermometers.", convergence=0.9),
            Hint("Alchemists called it quicksilver.", convergence=0.8),
        ],
    ),
]

corpus, report = forge_corpus(questions)
print("\nforge report:", report.to_dict())
example = corpus.passages_of("demo-1")[5]
print("a forged passage:", example.text)
print("its hint order:   ", example.hint_seq)
print("sentence spans:   ", example.sentences())
