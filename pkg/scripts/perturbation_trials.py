"""Perturb one block of R1 in certified dilations and count how often the checks notice.

    python3 scripts/perturbation_trials.py --trials 100 --magnitude 1e-3
"""

import argparse
from collections import Counter

import numpy as np

from tetrablock.dilation import dilation_from
from tetrablock.generators import FAMILIES, build_instance, corpus
from tetrablock.verify import perturb_R1, perturbation_detected


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--magnitude", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=77)
    args = ap.parse_args()

    dilations = []
    for fam in FAMILIES:
        for spec in corpus(fam, 10, seed=args.seed):
            try:
                dilations.append(dilation_from(build_instance(spec)))
            except ValueError:
                pass
    rng = np.random.default_rng(args.seed)
    detected = 0
    by_block, by_check = Counter(), Counter()
    for k in range(args.trials):
        bad, block = perturb_R1(dilations[k % len(dilations)], rng, magnitude=args.magnitude)
        hit, failures = perturbation_detected(bad, seed=k)
        detected += hit
        by_block[block] += hit
        by_check.update(failures)
    print(f"detected {detected}/{args.trials} perturbations of size {args.magnitude:g}")
    print("detections by perturbed block:", dict(sorted(by_block.items())))
    print("most frequent failing checks:")
    for name, n in by_check.most_common(8):
        print(f"  {name:<45}{n}")


if __name__ == "__main__":
    main()
