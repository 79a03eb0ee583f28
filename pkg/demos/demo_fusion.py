"""Context fusion on overlapping passages: order-preserving union vs the
rank/position-weighted union.

Run:  python3 demos/demo_fusion.py
"""

from hintqa import FusionConfig, union_freq, union_norm
from hintqa.corpus import Passage, render_passage_text
from hintqa.fusion import score_sentences


def passage(pid: str, sentences: list[str]) -> Passage:
    text, bounds = render_passage_text(sentences, range(len(sentences)))
    return Passage(pid, "q", tuple(range(len(sentences))), text, bounds)


sa = "It is the sixth planet from the Sun."
sb = "Its rings are made mostly of ice."
sc = "Its largest moon is called Titan."

# Two ranked passages sharing a sentence.
p1 = passage("p1", [sa, sb])
p2 = passage("p2", [sb, sc])

print("order-preserving union:")
print(" ", union_norm([p1, p2]))

print("\nweighted union (alpha=0.6 on passage rank, beta=0.4 on position):")
for s in score_sentences([p1, p2], alpha=0.6, beta=0.4):
    print(f"  {s.score:.3f}  occurrences={s.occurrences}  {s.sentence}")
print(" ", union_freq([p1, p2], FusionConfig(alpha=0.6, beta=0.4)))

# The shared sentence appears high in one passage and in the top-ranked one,
# so it overtakes the leading sentence of passage 1.
print("\nwith a sentence cap of 2:")
print(" ", union_freq([p1, p2], FusionConfig(alpha=0.6, beta=0.4, sentence_cap=2)))
