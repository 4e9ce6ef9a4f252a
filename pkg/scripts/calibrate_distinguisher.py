#!/usr/bin/env python3
"""Success rate of both decision rules as the copy budget grows.

Sweeps T for a binary-phase family and prints bayes/shadow success per
branch, to pick the smallest T where the Bayes rule saturates.  The
exact-permanent path covers T <= 20; larger T builds a design bank
once and reuses it across the sweep.
"""

import argparse

from prsbench.attacks import PERMANENT_CAP, distinguishing_experiment, make_haar_bank
from prsbench.ensembles import make_prs_family
from prsbench.qcore import RandomStream


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--keys", type=int, default=16)
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--copies", type=int, nargs="*", default=[4, 8, 12, 16, 20, 30, 60])
    ap.add_argument("--bank-samples", type=int, default=50_000)
    args = ap.parse_args()

    rng = RandomStream(args.seed)
    family = make_prs_family("binary-phase", args.n, args.keys, rng.child("family"))
    bank = None
    if any(t > PERMANENT_CAP for t in args.copies):
        print(f"building design bank ({args.bank_samples} states) ...")
        bank = make_haar_bank(args.n, rng.child("bank"), args.bank_samples)

    print(f"{'T':>4} {'bayes':>7} {'shadow':>7} {'gap':>7}")
    for t in args.copies:
        rep = distinguishing_experiment(
            family, t, args.trials, rng.child("sweep", t), haar_bank=bank
        )
        print(
            f"{t:>4} {rep['bayes_success']:>7.3f} {rep['shadow_success']:>7.3f}"
            f" {rep['bayes_minus_shadow']:>7.3f}"
        )


if __name__ == "__main__":
    main()
