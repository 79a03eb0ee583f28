"""A small bundled corpus: 20 questions, 5 hints each, 6,500 forged passages.

Handcrafted so that no hint names its answer (the leakage gate keeps all 20)
and hint wording overlaps only loosely with the question, which is what makes
the collection hard for lexical retrieval.  Everything here is static, so
corpora built from it are identical across runs and machines.
"""

from __future__ import annotations

from .corpus import Corpus, Hint, Question
from .forge import forge_corpus

# (id, question, answer, hints) -- hints listed in descending convergence.
_RECORDS: tuple[tuple[str, str, str, tuple[str, ...]], ...] = (
    (
        "q001",
        "Which planet is famous for its bright ring system?",
        "Saturn",
        (
            "It is the sixth planet from the Sun.",
            "Its rings are made mostly of ice and rock particles.",
            "It is the second largest planet in the solar system.",
            "Its largest moon is called Titan.",
            "A day there lasts about ten and a half hours.",
        ),
    ),
    (
        "q002",
        "Which river is the longest in South America?",
        "Amazon",
        (
            "It carries more water than any other river on Earth.",
            "Its basin covers a large part of Brazil.",
            "It empties into the Atlantic Ocean near the equator.",
            "Its source lies high in the Peruvian Andes.",
            "A vast rainforest shares its name with this river.",
        ),
    ),
    (
        "q003",
        "Which scientist proposed the theory of general relativity?",
        "Albert Einstein",
        (
            "He was born in Ulm in 1879.",
            "He worked as a clerk in a Swiss patent office.",
            "He received the Nobel Prize in Physics in 1921.",
            "His famous formula relates energy and mass.",
            "He emigrated to the United States in 1933.",
        ),
    ),
    (
        "q004",
        "Which metal is liquid at room temperature?",
        "Mercury",
        (
            "It was once used in thermometers.",
            "Alchemists called it quicksilver.",
            "Its chemical symbol is Hg.",
            "It is extracted mainly from cinnabar ore.",
            "Its vapor is highly toxic to humans.",
        ),
    ),
    (
        "q005",
        "Which city hosted the first modern Olympic Games?",
        "Athens",
        (
            "It is the capital of a southern European country.",
            "The Parthenon overlooks it from a rocky hill.",
            "It is named after a goddess of wisdom.",
            "Its port has been called Piraeus since antiquity.",
            "Democracy was first practiced there around 500 BC.",
        ),
    ),
    (
        "q006",
        "Which composer wrote his Ninth Symphony while completely deaf?",
        "Ludwig van Beethoven",
        (
            "He was born in Bonn in 1770.",
            "He studied briefly with Haydn in Vienna.",
            "His only opera is called Fidelio.",
            "A famous piano piece of his is nicknamed after moonlight.",
            "He died in Vienna in 1827.",
        ),
    ),
    (
        "q007",
        "Which ocean is the deepest on Earth?",
        "Pacific",
        (
            "It covers about a third of the planet's surface.",
            "The Mariana Trench lies within it.",
            "Ferdinand Magellan gave it a calm-sounding name.",
            "It is ringed by a belt of active volcanoes.",
            "It separates Asia from the Americas.",
        ),
    ),
    (
        "q008",
        "Which artist painted the ceiling of the Sistine Chapel?",
        "Michelangelo",
        (
            "He was born in the Republic of Florence in 1475.",
            "He sculpted a famous marble statue of David.",
            "He considered himself a sculptor rather than a painter.",
            "He designed the dome of St. Peter's Basilica.",
            "He worked for several popes during his long life.",
        ),
    ),
    (
        "q009",
        "Which country gifted the Statue of Liberty to the United States?",
        "France",
        (
            "Its capital city stands on the Seine.",
            "It is famous for wine regions such as Bordeaux.",
            "Its revolution began in 1789.",
            "Its flag has three vertical stripes.",
            "It shares the Alps with Italy and Switzerland.",
        ),
    ),
    (
        "q010",
        "Which element has the atomic number one?",
        "Hydrogen",
        (
            "It is the lightest of all elements.",
            "It makes up most of the Sun's mass.",
            "It combines with oxygen to form water.",
            "Its name means water-former in Greek.",
            "It was used to fill early airships.",
        ),
    ),
    (
        "q011",
        "Which author created the detective Sherlock Holmes?",
        "Arthur Conan Doyle",
        (
            "He was born in Edinburgh in 1859.",
            "He trained and practiced as a physician.",
            "He was knighted in 1902.",
            "He wrote historical novels he valued above his crime stories.",
            "He grew fascinated with spiritualism late in life.",
        ),
    ),
    (
        "q012",
        "Which desert is the largest hot desert in the world?",
        "Sahara",
        (
            "It stretches across much of northern Africa.",
            "Its name comes from an Arabic word for arid land.",
            "The Nile cuts through its eastern edge.",
            "Tuareg nomads have crossed it for centuries.",
            "It is slowly expanding southward.",
        ),
    ),
    (
        "q013",
        "Which inventor held over a thousand patents including the phonograph?",
        "Thomas Edison",
        (
            "He was born in Ohio in 1847.",
            "He built a research laboratory at Menlo Park.",
            "He championed direct current against a rival system.",
            "He founded a company that became General Electric.",
            "He was nearly deaf for most of his adult life.",
        ),
    ),
    (
        "q014",
        "Which mountain is the highest peak above sea level?",
        "Mount Everest",
        (
            "It stands on the border between Nepal and Tibet.",
            "Sherpas call it Chomolungma.",
            "It was first summited in 1953.",
            "Its height grows a few millimeters every year.",
            "Climbers face a dangerous zone above eight thousand meters.",
        ),
    ),
    (
        "q015",
        "Which chemical compound is known as table salt?",
        "Sodium chloride",
        (
            "Its crystals are shaped like tiny cubes.",
            "It dissolves readily in water.",
            "Roman workers were once paid with it.",
            "Oceans owe their taste to it.",
            "It is harvested from evaporation ponds.",
        ),
    ),
    (
        "q016",
        "Which empire built Machu Picchu?",
        "Inca",
        (
            "Its capital was the city of Cusco.",
            "It thrived in the Andes before the Spanish conquest.",
            "Its people built thousands of miles of stone roads.",
            "Knotted cords called quipu recorded its numbers.",
            "Terrace farming fed its mountain cities.",
        ),
    ),
    (
        "q017",
        "Which physicist formulated the laws of motion and universal gravitation?",
        "Isaac Newton",
        (
            "He was born in Lincolnshire in 1642.",
            "He developed calculus independently of Leibniz.",
            "An apple tree features in a famous story about him.",
            "He led the Royal Mint for three decades.",
            "His great book is often called the Principia.",
        ),
    ),
    (
        "q018",
        "Which bird is the largest living species by height?",
        "Ostrich",
        (
            "It cannot fly despite having wings.",
            "It lays the largest eggs of any living land animal.",
            "It can sprint faster than most racehorses.",
            "It lives on African savannas.",
            "Its powerful kick can deter lions.",
        ),
    ),
    (
        "q019",
        "Which waterway connects the Mediterranean Sea with the Red Sea?",
        "Suez Canal",
        (
            "It opened to shipping in 1869.",
            "It has no locks because the seas it joins sit at the same level.",
            "A container ship famously blocked it in 2021.",
            "It shortened the sea route between Europe and Asia.",
            "Ferdinand de Lesseps led its construction.",
        ),
    ),
    (
        "q020",
        "Which beverage is made from fermented grape juice?",
        "Wine",
        (
            "Ancient Romans stored it in amphorae.",
            "Its quality depends on the year of harvest.",
            "It ages in oak barrels for complex flavor.",
            "Red and white are its two broad styles.",
            "Sommeliers specialize in serving it.",
        ),
    ),
)

# Questions the bundled mock endpoints can answer with no context at all,
# used to exercise the parametric filter and split sampling.
PARAMETRIC_IDS = ("q003", "q009", "q010", "q017")


def toy_questions(split: str = "test") -> list[Question]:
    """The 20 bundled questions with convergence-scored hints."""
    questions = []
    for qid, text, answer, hints in _RECORDS:
        questions.append(
            Question(
                id=qid,
                text=text,
                answers=[answer],
                hints=[
                    Hint(h, convergence=round(0.9 - 0.05 * i, 2)) for i, h in enumerate(hints)
                ],
                split=split,
            )
        )
    return questions


def build_toy_corpus(split: str = "test") -> Corpus:
    """The forged (but unlabeled) 20 x 325 passage corpus."""
    corpus, report = forge_corpus(toy_questions(split))
    assert report.questions_forged == len(_RECORDS), "toy fixture failed its own leakage gate"
    return corpus


__all__ = ["toy_questions", "build_toy_corpus", "PARAMETRIC_IDS"]
