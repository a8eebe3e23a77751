"""Classify random weighted languages and tabulate verdicts.

For every hard verdict the script also searches for a small unbalanced
instance, and for every tractable verdict it compares the structured count
against brute force on a few random instances.

    python3 scripts/dichotomy_survey.py --d 2 --languages 200 --seed 1
"""

import argparse
import collections
import random
import time

from wcsp.counter import structured_count
from wcsp.dichotomy import NoAutomorphism, NoMaltsev, classify
from wcsp.fixtures import random_instance, random_language, random_tractable_language
from wcsp.oracle import partition_function


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--languages", type=int, default=100)
    p.add_argument("--zero-prob", type=float, default=0.4)
    p.add_argument("--tractable-share", type=float, default=0.3,
                   help="fraction of languages drawn from the block-product family")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = random.Random(args.seed)
    tally = collections.Counter()
    checked = 0
    t0 = time.perf_counter()
    for _ in range(args.languages):
        if rng.random() < args.tractable_share:
            lang = random_tractable_language(rng, args.d)
        else:
            lang = random_language(rng, args.d, arities=(2,), zero_prob=args.zero_prob)
        v = classify(lang)
        if v.tractable:
            tally["tractable"] += 1
            for _ in range(3):
                I = random_instance(rng, lang, rng.randint(2, 5), rng.randint(1, 4))
                assert structured_count(I, certified=True) == partition_function(I)
                checked += 1
        elif isinstance(v.reason, NoMaltsev):
            tally["hard: no Mal'tsev"] += 1
        elif isinstance(v.reason, NoAutomorphism):
            key = "hard: no automorphism, witness found" if v.unbalanced else "hard: no automorphism, no small witness"
            tally[key] += 1

    print(f"d={args.d} languages={args.languages} seed={args.seed} [{time.perf_counter() - t0:.1f}s]")
    for key, count in sorted(tally.items()):
        print(f"  {key:<42} {count:>5}")
    print(f"  structured counts cross-checked:           {checked:>5}")


if __name__ == "__main__":
    main()
