"""Acceptance gate: nine numbered end-to-end checks with runtime budgets.

Each test prints one `[criterion N] PASS/FAIL (elapsed / budget)` line;
run `pytest -v -s tests/test_acceptance.py` to see them live.  The
statistical checks run at a fixed master seed and use the declared
tolerances (binomial 3-sigma for sampled rates, stated absolute or
relative windows otherwise).  Heavy checks reuse the experiment harness
so the gate also exercises the registry, reports, and target logic at
full scale.
"""

import itertools
import time

import numpy as np
import pytest

from prsbench.attacks import collect_records, haar_likelihood
from prsbench.clifford import measurement_direction
from prsbench.ensembles import KWiseFamily, design_state_batch, kwise_eval
from prsbench.haar import sample_haar_state
from prsbench.harness import ExperimentConfig, run_experiment
from prsbench.qcore import RandomStream

ACC_SEED = 2026


def _finish(num: int, checks, t0: float, budget_s: float) -> None:
    elapsed = time.perf_counter() - t0
    ok = all(bool(v) for _, v in checks) and elapsed < budget_s
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s / {budget_s:.0f}s budget)")
    for label, v in checks:
        assert v, f"criterion {num}: {label}"
    assert elapsed < budget_s, f"criterion {num}: {elapsed:.1f}s over budget"


def _run(name: str, tmp_path, **params):
    cfg = ExperimentConfig(
        name, seed=ACC_SEED, out=str(tmp_path / f"{name}.json"), params=params
    )
    return run_experiment(cfg)


def _target_checks(rep):
    return [
        (f"{k}: {t['value']:.6g} {t['op']} {t['bound']:.6g}", t["pass"])
        for k, t in rep.targets.items()
    ]


def test_criterion_1_haar_overlap_tail(tmp_path):
    t0 = time.perf_counter()
    rep = _run("haar-tail", tmp_path)
    checks = _target_checks(rep)
    checks.append(("bound checked at both thresholds", len(rep.targets) == 4))
    _finish(1, checks, t0, 60)


def test_criterion_2_clifford_sampler(tmp_path):
    t0 = time.perf_counter()
    rep = _run("clifford-uniformity", tmp_path)
    checks = _target_checks(rep)
    checks.append(("n=2 enumeration size", rep.results["n2_classes"] == 11520))
    _finish(2, checks, t0, 120)


def test_criterion_3_shadow_estimation(tmp_path):
    t0 = time.perf_counter()
    rep = _run("shadows-bench", tmp_path)
    checks = _target_checks(rep)
    checks.append(("snapshot budget is 2451", rep.results["t_min"] == 2451))
    _finish(3, checks, t0, 600)


def test_criterion_4_distinguisher(tmp_path):
    t0 = time.perf_counter()
    rep = _run("distinguish", tmp_path)
    checks = _target_checks(rep)
    checks.append(("200 trials ran", rep.results["trials"] == 200))
    checks.append(("60 copies per trial", rep.results["copies"] == 60))
    _finish(4, checks, t0, 1800)


def test_criterion_5_collision_attack(tmp_path):
    t0 = time.perf_counter()
    rep = _run("binary-phase-attack", tmp_path)
    checks = _target_checks(rep)
    checks.append(("balanced backend", rep.results["backend"] == "balanced"))
    checks.append(("exactness sample size", rep.results["exact_samples"] == 10_000))
    _finish(5, checks, t0, 900)


def test_criterion_6_norm_inequalities(tmp_path):
    t0 = time.perf_counter()
    rep = _run("norms-check", tmp_path)
    checks = _target_checks(rep)
    checks.append(("200 random pairs", rep.results["pairs"] == 200))
    _finish(6, checks, t0, 60)


def test_criterion_7_likelihood_cross_check():
    t0 = time.perf_counter()
    rng = RandomStream(ACC_SEED).child("likelihood-xcheck")
    bank = design_state_batch(4, 4, 0.25, 100_000, rng.child("bank"))
    checks = []
    for i in range(3):
        st = rng.child("set", i)
        psi = sample_haar_state(4, st.child("state"))
        recs = collect_records(psi, 6, st.child("meas"))
        exact = haar_likelihood(recs)
        dirs = np.stack([measurement_direction(r) for r in recs])
        mc = float((np.abs(bank @ dirs.conj().T) ** 2).prod(axis=1).mean())
        ratio = mc / exact
        checks.append((f"set {i}: mc/exact = {ratio:.4f} in [0.9, 1.1]", 0.9 <= ratio <= 1.1))
    _finish(7, checks, t0, 300)


def test_criterion_8_kwise_exactness():
    t0 = time.perf_counter()
    fam = KWiseFamily(t=2, n=2, m=2)
    want = fam.key_count * 2 ** (-fam.m * fam.t)
    checks = [("pair probability is an exact count", want == int(want))]
    ok = True
    for x1, x2 in itertools.permutations(range(4), 2):
        counts = np.zeros((4, 4), dtype=np.int64)
        for key in range(fam.key_count):
            counts[kwise_eval(fam, key, x1), kwise_eval(fam, key, x2)] += 1
        ok = ok and bool((counts == int(want)).all())
    checks.append(("every (x, x', y, y') cell hit exactly 2^(k t - m t) times", ok))
    _finish(8, checks, t0, 60)


def test_criterion_9_pru_advantage(tmp_path):
    t0 = time.perf_counter()
    rep = _run("pru-advantage", tmp_path)
    checks = _target_checks(rep)
    checks.append(
        ("family sizes 8 and 16", rep.results["base"]["N"] == 8 and rep.results["doubled"]["N"] == 16)
    )
    _finish(9, checks, t0, 300)
