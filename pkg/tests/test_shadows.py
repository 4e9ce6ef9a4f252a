import math

import numpy as np
import pytest

from prsbench.clifford import (
    MeasurementRecord,
    enumerate_cliffords,
    identity_tableau,
    tableau_to_unitary,
)
from prsbench.qcore import PureState, RandomStream, basis_state, fidelity
from prsbench.shadows import (
    EstimateReport,
    ShadowSet,
    collect_shadows,
    estimate_fidelity,
    estimate_many,
    mom_batches,
    snapshot_estimate,
    t_min_snapshots,
)

from tests.conftest import random_state_amps


def exhaustive_snapshot_mean(n, psi, phi, use_public=False):
    """Average estimator over the whole group and all outcomes of psi."""
    dim = 1 << n
    total = 0.0
    count = 0
    for c in enumerate_cliffords(n):
        u = tableau_to_unitary(c)
        probs = np.abs(u.mat @ psi.amps) ** 2
        over = np.abs(u.mat @ phi.amps) ** 2
        if use_public:
            vals = [snapshot_estimate(MeasurementRecord(c, x), phi) for x in range(dim)]
            total += float(np.dot(probs, vals))
        else:
            total += float(np.dot(probs, (dim + 1) * over - 1.0))
        count += 1
    return total / count


class TestSnapshot:
    def test_plugin_arithmetic(self):
        rec = MeasurementRecord(identity_tableau(1), 0)
        assert snapshot_estimate(rec, basis_state(1, 0)) == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        rec = MeasurementRecord(identity_tableau(1), 0)
        with pytest.raises(ValueError):
            snapshot_estimate(rec, basis_state(2, 0))

    def test_unbiased_n1_exhaustive(self, rng):
        psi = basis_state(1, 0)
        assert exhaustive_snapshot_mean(1, psi, basis_state(1, 0), use_public=True) == pytest.approx(
            1.0, abs=1e-9
        )
        assert exhaustive_snapshot_mean(1, psi, basis_state(1, 1), use_public=True) == pytest.approx(
            0.0, abs=1e-9
        )
        phi = PureState(1, random_state_amps(rng.child("p").gen, 2))
        assert exhaustive_snapshot_mean(1, psi, phi) == pytest.approx(
            fidelity(psi, phi), abs=1e-9
        )

    def test_unbiased_n2_exhaustive(self, rng):
        gen = rng.child("n2").gen
        psi = PureState(2, random_state_amps(gen, 4))
        phi = PureState(2, random_state_amps(gen, 4))
        assert exhaustive_snapshot_mean(2, psi, phi) == pytest.approx(
            fidelity(psi, phi), abs=1e-9
        )

    def test_public_matches_direct(self, rng):
        stream = rng.child("pub")
        psi = PureState(2, random_state_amps(stream.gen, 4))
        shadows = collect_shadows(psi, 40, stream)
        phi = PureState(2, random_state_amps(stream.gen, 4))
        d = shadows.directions()
        direct = 5.0 * np.abs(d.conj() @ phi.amps) ** 2 - 1.0
        public = [snapshot_estimate(r, phi) for r in shadows.records]
        np.testing.assert_allclose(public, direct, atol=1e-12)


class TestEstimateFidelity:
    def test_matched_and_orthogonal_windows(self, rng):
        n, reps, T = 4, 25, 500
        target = basis_state(n, 0)
        ortho = basis_state(n, 1)
        hit_match = hit_orth = 0
        for r in range(reps):
            shadows = collect_shadows(target, T, rng.child("mc", r))
            e1 = estimate_fidelity(shadows, target, batches=10)
            e0 = estimate_fidelity(shadows, ortho, batches=10)
            hit_match += 0.9 <= e1 <= 1.1
            hit_orth += -0.1 <= e0 <= 0.1
        assert hit_match >= 22
        assert hit_orth >= 22

    def test_batches_one_is_plain_mean(self, rng):
        psi = basis_state(2, 2)
        shadows = collect_shadows(psi, 30, rng.child("pm"))
        phi = PureState(2, random_state_amps(rng.child("pm2").gen, 4))
        want = np.mean([snapshot_estimate(r, phi) for r in shadows.records])
        assert estimate_fidelity(shadows, phi, batches=1) == pytest.approx(want)

    def test_permutation_within_batches(self, rng):
        stream = rng.child("perm")
        psi = PureState(2, random_state_amps(stream.gen, 4))
        shadows = collect_shadows(psi, 100, stream)
        phi = PureState(2, random_state_amps(stream.gen, 4))
        batches, size = 5, 20
        base = estimate_fidelity(shadows, phi, batches=batches)
        order = np.arange(100)
        for b in range(batches):
            block = order[b * size : (b + 1) * size]
            stream.gen.shuffle(block)
        shuffled = ShadowSet(2, [shadows.records[i] for i in order])
        got = estimate_fidelity(shuffled, phi, batches=batches)
        # same multiset per batch; only summation order may differ
        assert got == pytest.approx(base, rel=1e-12, abs=1e-12)

    def test_trailing_records_dropped(self, rng):
        stream = rng.child("trail")
        psi = basis_state(1, 0)
        shadows = collect_shadows(psi, 103, stream)
        head = ShadowSet(1, shadows.records[:100])
        assert estimate_fidelity(shadows, psi, batches=10) == estimate_fidelity(
            head, psi, batches=10
        )

    def test_mixture_linearity(self, rng):
        stream = rng.child("mix")
        zero, one = basis_state(1, 0), basis_state(1, 1)
        recs = []
        for i in range(10_000):
            src = zero if stream.gen.random() < 0.5 else one
            recs.extend(collect_shadows(src, 1, stream.child(i)).records)
        shadows = ShadowSet(1, recs)
        est = estimate_fidelity(shadows, zero, batches=10)
        assert abs(est - 0.5) < 0.05

    def test_errors(self, rng):
        shadows = collect_shadows(basis_state(1, 0), 5, rng.child("err"))
        with pytest.raises(ValueError):
            estimate_fidelity(ShadowSet(1, []), basis_state(1, 0))
        with pytest.raises(ValueError):
            estimate_fidelity(shadows, basis_state(2, 0))
        with pytest.raises(ValueError):
            estimate_fidelity(shadows, basis_state(1, 0), batches=6)
        with pytest.raises(ValueError):
            estimate_fidelity(shadows, basis_state(1, 0), batches=0)
        with pytest.raises(ValueError):
            ShadowSet(2, shadows.records)


class TestBudgets:
    def test_frozen_budget_values(self):
        assert t_min_snapshots(64, 0.33, 0.05) == 2451
        assert mom_batches(64, 0.05) == 16

    def test_tmin_matches_formula(self):
        for m, eps, delta in [(1, 0.5, 0.1), (8, 0.33, 0.05), (64, 0.2, 0.01)]:
            want = math.ceil(34 * math.log(2 * m / delta) / eps**2)
            assert t_min_snapshots(m, eps, delta) == want

    def test_doubling_increment(self):
        eps, delta = 0.25, 0.05
        exact_step = 34 * math.log(2) / eps**2
        for m in (1, 4, 32):
            step = t_min_snapshots(2 * m, eps, delta) - t_min_snapshots(m, eps, delta)
            assert abs(step - exact_step) <= 1.0

    def test_constant_is_configurable(self):
        assert t_min_snapshots(1, 0.5, 0.1, c_shadow=1.0) == math.ceil(
            math.log(20) / 0.25
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            t_min_snapshots(0, 0.5, 0.1)
        with pytest.raises(ValueError):
            t_min_snapshots(1, 0.0, 0.1)
        with pytest.raises(ValueError):
            t_min_snapshots(1, 0.5, 1.0)


class TestEstimateMany:
    def test_single_observable_reduces(self, rng):
        stream = rng.child("m1")
        psi = basis_state(2, 0)
        eps, delta = 0.4, 0.1
        T = t_min_snapshots(1, eps, delta)
        shadows = collect_shadows(psi, T, stream)
        rep = estimate_many(shadows, [psi], eps, delta)
        want = estimate_fidelity(shadows, psi, batches=mom_batches(1, delta))
        assert rep.estimates == (want,)
        assert rep.T == T and rep.batches == mom_batches(1, delta)

    def test_insufficient_snapshots_reports_tmin(self, rng):
        shadows = collect_shadows(basis_state(2, 0), 10, rng.child("ins"))
        obs = [basis_state(2, i) for i in range(4)]
        with pytest.raises(ValueError, match=str(t_min_snapshots(4, 0.4, 0.1))):
            estimate_many(shadows, obs, 0.4, 0.1)

    def test_joint_estimates_within_eps(self, rng):
        stream = rng.child("joint")
        n, m, eps, delta = 3, 4, 0.45, 0.1
        psi = PureState(n, random_state_amps(stream.gen, 8))
        obs = [PureState(n, random_state_amps(stream.gen, 8)) for _ in range(m)]
        shadows = collect_shadows(psi, t_min_snapshots(m, eps, delta), stream)
        rep = estimate_many(shadows, obs, eps, delta)
        for est, phi in zip(rep.estimates, obs):
            assert abs(est - fidelity(psi, phi)) < eps

    def test_report_invariants(self):
        with pytest.raises(ValueError):
            EstimateReport((float("nan"),), 1, 5, 0.3, 0.1)
        with pytest.raises(ValueError):
            EstimateReport((0.5,), 6, 5, 0.3, 0.1)
        rep = EstimateReport((0.5, 0.1), 2, 10, 0.3, 0.1)
        d = rep.to_dict()
        assert d["estimates"] == [0.5, 0.1] and d["T"] == 10


class TestDeterminism:
    def test_collection_reproducible(self):
        a = collect_shadows(basis_state(2, 1), 20, RandomStream(31).child("s"))
        b = collect_shadows(basis_state(2, 1), 20, RandomStream(31).child("s"))
        assert [r.outcome for r in a.records] == [r.outcome for r in b.records]
        assert all(
            x.tableau.key() == y.tableau.key() for x, y in zip(a.records, b.records)
        )
        np.testing.assert_array_equal(a.directions(), b.directions())
