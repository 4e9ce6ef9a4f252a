#!/usr/bin/env python3
"""How conservative is the shadow sample-complexity constant?

For each candidate constant c, uses T = ceil(c ln(2M/delta)/eps^2)
snapshots and measures the all-estimates-within-eps rate over repeated
runs.  The shipped default (34) is a worst-case bound; this prints
where the empirical rate actually crosses the 1-delta target.
"""

import argparse

import numpy as np

from prsbench.haar import haar_state_batch, sample_haar_state
from prsbench.qcore import PureState, RandomStream
from prsbench.shadows import collect_shadows, estimate_many, t_min_snapshots


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--m", type=int, default=32)
    ap.add_argument("--eps", type=float, default=0.33)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--runs", type=int, default=40)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--constants", type=float, nargs="*", default=[1, 2, 4, 8, 16, 34])
    args = ap.parse_args()

    rng = RandomStream(args.seed)
    print(f"{'c':>5} {'T':>6} {'all-correct rate':>17}")
    for c in args.constants:
        t = t_min_snapshots(args.m, args.eps, args.delta, c_shadow=c)
        hits = 0
        for r in range(args.runs):
            st = rng.child("run", int(c * 1000), r)
            psi = sample_haar_state(args.n, st.child("state"))
            obs = haar_state_batch(args.n, args.m, st.child("obs"))
            shadows = collect_shadows(psi, t, st.child("meas"))
            rep = estimate_many(
                shadows, [PureState(args.n, o) for o in obs], args.eps, args.delta, c_shadow=c
            )
            truth = np.abs(obs.conj() @ psi.amps) ** 2
            hits += bool(np.max(np.abs(np.array(rep.estimates) - truth)) <= args.eps)
        print(f"{c:>5.1f} {t:>6} {hits / args.runs:>17.3f}")


if __name__ == "__main__":
    main()
