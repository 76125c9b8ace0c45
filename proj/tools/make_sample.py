"""Writes the small tagged sample corpus and evaluation files in data/sample."""

import argparse
import pathlib
import random

NOUNS = ["dog", "cat", "bird", "horse", "child", "teacher", "farmer", "doctor", "river", "city"]
PLURAL = {"child": "children", "city": "cities"}
VERBS = ["run", "walk", "sing", "jump", "swim", "eat", "sleep", "read", "write", "climb"]
PAST = {"run": "ran", "sing": "sang", "swim": "swam", "eat": "ate", "sleep": "slept",
        "read": "read", "write": "wrote"}
ADJS = ["big", "small", "old", "young", "fast", "slow", "tall", "short", "warm", "cold"]
ADVS = ["quickly", "slowly", "often", "rarely", "loudly", "quietly"]
PREPS = ["in", "near", "under", "behind"]


def plural(n):
    return PLURAL.get(n, n + "s")


def third(v):
    return v + "es" if v.endswith("h") else v + "s"


def past(v):
    return PAST.get(v, v + "ed")


def comparative(a):
    if a in ("big",):
        return a + "ger"
    return a + "r" if a.endswith("e") else a + "er"


def sentence(rng):
    n1, n2 = rng.choice(NOUNS), rng.choice(NOUNS)
    v, a, r, p = rng.choice(VERBS), rng.choice(ADJS), rng.choice(ADVS), rng.choice(PREPS)
    forms = [
        [("the", "DT"), (a, "JJ"), (n1, "NN"), (third(v), "VBZ"), (r, "RB"), (".", ".")],
        [("the", "DT"), (plural(n1), "NNS"), (past(v), "VBD"), (p, "IN"), ("the", "DT"),
         (n2, "NN"), (".", ".")],
        [("a", "DT"), (n1, "NN"), ("is", "VBZ"), (comparative(a), "JJR"), ("than", "IN"),
         ("the", "DT"), (n2, "NN"), (".", ".")],
        [(plural(n1), "NNS"), (v, "VBP"), (r, "RB"), (p, "IN"), ("the", "DT"), (a, "JJ"),
         (n2, "NN"), (".", ".")],
        [("the", "DT"), (n1, "NN"), ("can", "MD"), (v, "VB"), (",", ","), ("but", "CC"),
         ("it", "PRP"), (past(rng.choice(VERBS)), "VBD"), (r, "RB"), (".", ".")],
    ]
    return rng.choice(forms)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/sample")
    ap.add_argument("--tokens", type=int, default=60000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    emitted = 0
    with open(out / "corpus.txt", "w") as f:
        while emitted < args.tokens:
            s = sentence(rng)
            emitted += len(s)
            f.write(" ".join(f"{w}_{t}" for w, t in s) + "\n")

    with open(out / "syntactic.txt", "w") as f:
        f.write(": gram-plural\n")
        for i, a in enumerate(NOUNS):
            b = NOUNS[(i + 1) % len(NOUNS)]
            f.write(f"{a} {plural(a)} {b} {plural(b)}\n")
        f.write(": gram-past\n")
        for i, a in enumerate(VERBS):
            b = VERBS[(i + 3) % len(VERBS)]
            f.write(f"{a} {past(a)} {b} {past(b)}\n")
        f.write(": gram-comparative\n")
        for i, a in enumerate(ADJS):
            b = ADJS[(i + 1) % len(ADJS)]
            f.write(f"{a} {comparative(a)} {b} {comparative(b)}\n")

    pairs = [("dog", "cat", 8.1), ("dog", "horse", 6.9), ("cat", "bird", 5.7),
             ("teacher", "doctor", 6.4), ("farmer", "teacher", 5.2), ("river", "city", 3.9),
             ("big", "tall", 6.6), ("big", "small", 3.1), ("fast", "quickly", 7.4),
             ("run", "walk", 7.0), ("sing", "read", 3.5), ("dog", "river", 1.2),
             ("cold", "warm", 3.0), ("swim", "river", 5.5), ("eat", "sleep", 2.6)]
    with open(out / "similarity.txt", "w") as f:
        f.write("word1\tword2\tscore\n")
        for a, b, s in pairs:
            f.write(f"{a}\t{b}\t{s}\n")


if __name__ == "__main__":
    main()
