"""Regenerates the frozen toy corpora in this directory.

    python3 make_toy_corpora.py
"""
import random

SUBJECTS = ["The teacher", "My neighbor", "A young student", "The old farmer", "Our manager",
            "The little girl", "His brother", "The quiet doctor", "A tired driver", "The new chef"]
VERBS = ["bought", "painted", "carried", "repaired", "borrowed", "cleaned", "found", "sold",
         "visited", "watched"]
OBJECTS = ["a red bicycle", "the wooden table", "some fresh bread", "an old radio",
           "the broken window", "a small boat", "the garden fence", "three green apples",
           "a heavy suitcase", "the village church"]
TAILS = ["yesterday", "last week", "in the morning", "after lunch", "near the river",
         "before the storm", "with great care", "on Sunday", "for his mother", "at the market"]

DE_SUBJECTS = ["Der Lehrer", "Meine Nachbarin", "Ein junger Student", "Der alte Bauer",
               "Unsere Ärztin", "Das kleine Mädchen", "Sein Bruder", "Die müde Fahrerin"]
DE_VERBS = ["kaufte", "malte", "trug", "reparierte", "fand", "verkaufte", "besuchte", "sah"]
DE_OBJECTS = ["ein rotes Fahrrad", "den hölzernen Tisch", "frisches Brot", "ein altes Radio",
              "das kaputte Fenster", "ein kleines Boot", "den Gartenzaun", "die Dorfkirche"]
DE_TAILS = ["gestern", "letzte Woche", "am Morgen", "nach dem Mittagessen", "am Fluss",
            "vor dem Sturm", "mit großer Sorgfalt", "am Sonntag"]


def build(rng, subjects, verbs, objects, tails, n):
    seen = set()
    out = []
    while len(out) < n:
        s = f"{rng.choice(subjects)} {rng.choice(verbs)} {rng.choice(objects)} {rng.choice(tails)} ."
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def main():
    rng = random.Random(20210107)
    with open("toy_en.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(build(rng, SUBJECTS, VERBS, OBJECTS, TAILS, 100)) + "\n")
    with open("toy_de.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(build(rng, DE_SUBJECTS, DE_VERBS, DE_OBJECTS, DE_TAILS, 60)) + "\n")


if __name__ == "__main__":
    main()
