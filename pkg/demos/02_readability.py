"""Score texts for grade level and vocabulary, with and without exemptions.

Run from the repository root: python3 demos/02_readability.py
"""

from storyforge.readability import (
    Lexicon,
    analyze,
    assess_section,
    cefr_flags,
    count_syllables,
)

lexicon = Lexicon.bundled()
print(f"lexicon: {len(lexicon)} entries ({lexicon.source_tag})")

SAMPLES = [
    "Max smiles. Alex is glad!",
    "Alex and Max play with the fire truck toy at the playground.",
    "The children demonstrated extraordinarily meticulous perseverance yesterday.",
]

for text in SAMPLES:
    report = analyze(text, lexicon)
    flagged = ", ".join(f"{f.word} ({f.level.name})" for f in report.flagged_words)
    print(f"\n{text!r}")
    print(f"  words={report.word_count} sentences={report.sentence_count} "
          f"syllables={report.syllable_count} fkgl={report.fkgl:.2f}")
    print(f"  flagged: {flagged or 'none'}")
    verdict = assess_section(text, lexicon)
    print(f"  verdict: {'pass' if verdict.passed else 'needs simplification'} "
          f"{list(verdict.reasons)}")

# Personalization names never get flagged, even when the lexicon knows them.
custom = Lexicon(entries={"rexy": lexicon.level("meticulous")}, source_tag="demo")
flags = cefr_flags("Rexy stomps around.", custom, exemptions={"Rexy"})
print(f"\nexempt name 'Rexy': {'not flagged' if not flags else 'flagged'}")

for word in ("cat", "firefighter", "helicopter", "merry-go-round"):
    print(f"syllables({word!r}) = {count_syllables(word)}")
