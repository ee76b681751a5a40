"""Writes the 50-pair caption fixture used by the metric equivalence tests.

Captions are already lowercased and space-tokenized without punctuation, so
the toolkit's PTB tokenizer is an identity on them.
"""
import json
import random
import sys

PEOPLE = ["barack obama", "angela merkel", "lucy bronze", "serena williams", "bill de blasio",
          "hillary clinton", "pope francis", "andrew cuomo", "theresa may", "lebron james"]
PLACES = ["new york", "washington", "london", "paris", "brooklyn", "manhattan", "berlin",
          "chicago", "the white house", "times square"]
VERBS = ["speaks at", "arrives in", "visits", "walks through", "waves to supporters in",
         "meets officials in", "attends a rally in", "leaves a meeting in"]
EXTRAS = ["on tuesday", "last week", "in march", "during the summit", "after the vote",
          "with his family", "with her team", "before the game", "", ""]


def caption(rng):
    parts = [rng.choice(PEOPLE), rng.choice(VERBS), rng.choice(PLACES), rng.choice(EXTRAS)]
    return " ".join(p for p in parts if p)


def perturb(rng, ref):
    words = ref.split()
    mode = rng.randrange(6)
    if mode == 0:
        return ref
    if mode == 1:
        return " ".join(words[: max(1, len(words) - rng.randint(1, 3))])
    if mode == 2:
        return caption(rng)
    if mode == 3:
        i = rng.randrange(len(words))
        words[i] = rng.choice(["a", "the", "man", "woman", "crowd", "photo"])
        return " ".join(words)
    if mode == 4:
        return " ".join(words + rng.sample(["in", "the", "city", "on", "monday", "photo"], 3))
    return "a photo of " + " ".join(words[: rng.randint(2, len(words))])


def main():
    rng = random.Random(20240501)
    out = sys.argv[1]
    with open(out, "w") as f:
        for i in range(50):
            ref = caption(rng)
            cand = perturb(rng, ref)
            f.write(json.dumps({"id": f"p{i:02d}", "candidate": cand, "reference": ref}) + "\n")


if __name__ == "__main__":
    main()
