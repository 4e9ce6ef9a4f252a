#!/usr/bin/env python3
"""Run every registered experiment at its default parameters.

Writes one report per experiment and prints a target summary table.
Exit code 0 if everything passed, 2 otherwise.  Full-scale defaults
take ~10 minutes on one core; --quick shrinks sample counts for a
smoke run (~30 s, the statistical targets may then miss).
"""

import argparse
import sys

from prsbench.harness import EXPERIMENTS, ExperimentConfig, run_experiment

QUICK = {
    "haar-tail": {"samples": 20_000},
    "clifford-uniformity": {"draws": 20_000, "fp_samples": 600},
    "design-frame-potential": {"count": 1000},
    "shadows-bench": {"runs": 5},
    "distinguish": {"n": 6, "key_count": 16, "copies": 20, "trials": 30},
    "binary-phase-attack": {"n": 6, "key_count": 256, "trials": 20, "exact_samples": 2000},
    "pru-advantage": {"trials": 50_000},
    "norms-check": {"pairs": 60},
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--quick", action="store_true", help="small sample counts")
    ap.add_argument("--only", nargs="*", help="subset of experiment names")
    args = ap.parse_args()

    names = args.only or sorted(EXPERIMENTS)
    all_ok = True
    for name in names:
        params = QUICK.get(name, {}) if args.quick else {}
        rep = run_experiment(ExperimentConfig(name, seed=args.seed, params=params))
        all_ok &= rep.passed
        flag = "ok " if rep.passed else "MISS"
        print(f"{flag} {name:<26} {rep.wall_clock_s:8.1f}s -> {rep.path}")
        for tname, t in rep.targets.items():
            mark = " " if t["pass"] else "!"
            print(f"   {mark} {tname}: {t['value']:.6g} {t['op']} {t['bound']:.6g}")
    return 0 if all_ok else 2


if __name__ == "__main__":
    sys.exit(main())
