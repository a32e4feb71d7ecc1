"""Run the full verification suite over a generated corpus and print a summary per family.

    python3 scripts/run_corpus.py --count 50 --seed 2024 [--out reports/]
"""

import argparse
import json
import time
from pathlib import Path

from tetrablock.config import RunConfig
from tetrablock.generators import FAMILIES, corpus
from tetrablock.suite import run_suite


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--families", nargs="*", default=list(FAMILIES))
    ap.add_argument("--config", help="RunConfig JSON file")
    ap.add_argument("--out", help="directory for one JSON report per instance")
    args = ap.parse_args()
    cfg = RunConfig.load(args.config)

    print(f"{'family':<22}{'passed':>8}{'certified':>11}{'worst residual':>17}{'seconds':>9}")
    for fam in args.families:
        start = time.perf_counter()
        passed = certified = 0
        worst = 0.0
        for i, spec in enumerate(corpus(fam, args.count, args.seed)):
            rep = run_suite(spec, cfg)
            passed += rep.passed
            certified += bool(rep.meta.get("certified"))
            worst = max(worst, rep.max_residual())
            if args.out:
                path = Path(args.out) / fam / f"{i:03d}.json"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(rep.to_json() + "\n")
        elapsed = time.perf_counter() - start
        print(f"{fam:<22}{passed:>5}/{args.count:<2}{certified:>11}{worst:>17.2e}{elapsed:>9.2f}")


if __name__ == "__main__":
    main()
