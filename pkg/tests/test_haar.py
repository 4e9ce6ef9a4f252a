import numpy as np
import pytest
from scipy import stats

from prsbench.haar import (
    TailReport,
    exp_bound_holds,
    frame_potential,
    haar_moment,
    haar_state_batch,
    haar_unitary_batch,
    overlap_tail_experiment,
    sample_haar_state,
    sample_haar_unitary,
)
from prsbench.qcore import CapacityError, basis_state, fidelity


class TestHaarUnitary:
    def test_unitarity(self, rng):
        for n in (1, 2, 3):
            u = sample_haar_unitary(n, rng)
            dim = 1 << n
            assert np.linalg.norm(u.mat.conj().T @ u.mat - np.eye(dim)) < 1e-8

    def test_corner_entry_mean(self, rng):
        # E|U[0,0]|^2 = 1/N by invariance
        dim = 4
        us = haar_unitary_batch(2, 100_000, rng)
        vals = np.abs(us[:, 0, 0]) ** 2
        sigma = vals.std() / np.sqrt(len(vals))
        assert abs(vals.mean() - 1 / dim) < 3 * sigma

    def test_left_invariance_ks(self, rng):
        # |<0|VU|0>|^2 and |<0|U|0>|^2 agree in distribution for fixed V
        v = sample_haar_unitary(2, rng).mat
        us = haar_unitary_batch(2, 10_000, rng)
        plain = np.abs(us[:, 0, 0]) ** 2
        us2 = haar_unitary_batch(2, 10_000, rng)
        rotated = np.abs(np.einsum("j,kji->ki", v[0, :], us2)[:, 0]) ** 2
        _, p = stats.ks_2samp(plain, rotated)
        assert p > 0.001

    def test_capacity(self, rng):
        with pytest.raises(CapacityError):
            sample_haar_unitary(25, rng)


class TestHaarState:
    def test_norm(self, rng):
        for n in (1, 4, 8):
            s = sample_haar_state(n, rng)
            assert abs(np.linalg.norm(s.amps) - 1) < 1e-9

    def test_mean_fidelity(self, rng):
        # first moment of fidelity against a fixed state is 1/N
        n, shots = 3, 100_000
        fids = np.abs(haar_state_batch(n, shots, rng)[:, 0]) ** 2
        sigma = fids.std() / np.sqrt(shots)
        assert abs(fids.mean() - 1 / 8) < 3 * sigma

    def test_second_moment(self, rng):
        # E fid^2 = 2/(N(N+1)) from the symmetric-subspace moment
        n, shots = 3, 100_000
        dim = 1 << n
        fids2 = np.abs(haar_state_batch(n, shots, rng)[:, 0]) ** 4
        sigma = fids2.std() / np.sqrt(shots)
        assert abs(fids2.mean() - 2 / (dim * (dim + 1))) < 3 * sigma

    def test_single_sample_matches_fidelity_api(self, rng):
        s = sample_haar_state(2, rng)
        assert fidelity(s, basis_state(2, 0)) == pytest.approx(abs(s.amps[0]) ** 2)


class TestHaarMoment:
    def test_closed_forms(self):
        assert haar_moment(1, 16) == pytest.approx(1 / 16)
        assert haar_moment(2, 16) == pytest.approx(2 / (16 * 17))
        assert haar_moment(3, 4) == pytest.approx(6 / (4 * 5 * 6))


class TestOverlapTail:
    def test_exact_tail_three_sigma(self, rng):
        # empirical tail against the Beta(1, N-1) tail at eps = 0.02
        n, samples = 8, 100_000
        rep = overlap_tail_experiment(n, [0.02], samples, rng)
        exact = rep.exact_tail[0]
        sigma = np.sqrt(exact * (1 - exact) / samples)
        assert abs(rep.empirical_tail[0] - exact) < 3 * sigma

    def test_exp_bound_where_valid(self, rng):
        n, samples = 8, 100_000
        eps = [0.02, 0.05]
        assert all(exp_bound_holds(n, e) for e in eps)
        rep = overlap_tail_experiment(n, eps, samples, rng)
        for emp, bound, exact in zip(rep.empirical_tail, rep.exp_bound, rep.exact_tail):
            sigma = np.sqrt(max(exact * (1 - exact), 1e-12) / samples)
            assert emp <= bound + 3 * sigma

    def test_bound_invalid_regime_detected(self):
        # at N = 2, eps = 0.5 the exact tail 0.5 exceeds e^{-1}
        assert not exp_bound_holds(1, 0.5)

    def test_eps_to_zero_limit(self, rng):
        rep = overlap_tail_experiment(3, [1e-12], 2_000, rng)
        assert rep.empirical_tail[0] == 1.0
        assert rep.exp_bound[0] == pytest.approx(1.0, abs=1e-9)
        assert rep.exact_tail[0] == pytest.approx(1.0, abs=1e-9)

    def test_zero_samples_rejected(self, rng):
        with pytest.raises(ValueError, match="samples"):
            overlap_tail_experiment(3, [0.1], 0, rng)

    def test_bad_threshold_rejected(self, rng):
        with pytest.raises(ValueError, match="threshold"):
            overlap_tail_experiment(3, [0.0], 10, rng)
        with pytest.raises(ValueError, match="threshold"):
            overlap_tail_experiment(3, [1.5], 10, rng)

    def test_report_invariants(self):
        with pytest.raises(ValueError):
            TailReport(1, (0.1,), (2.0,), (1.0,), (1.0,), 10)
        with pytest.raises(ValueError):
            TailReport(1, (0.1,), (0.5,), (1.0,), (1.0,), 0)

    def test_report_round_trip(self, rng):
        rep = overlap_tail_experiment(2, [0.1, 0.4], 500, rng)
        d = rep.to_dict()
        assert d["samples"] == 500 and len(d["empirical_tail"]) == 2


class TestFramePotential:
    def test_t1_haar(self, rng):
        n, k = 3, 2_000
        dim = 1 << n
        fp = frame_potential(haar_state_batch(n, k, rng), 1)
        assert abs(fp - 1 / dim) < 3e-4

    def test_t2_haar(self, rng):
        n, k = 3, 2_000
        dim = 1 << n
        fp = frame_potential(haar_state_batch(n, k, rng), 2)
        assert abs(fp - haar_moment(2, dim)) < 1.5e-4

    def test_identical_states(self):
        states = [basis_state(2, 1) for _ in range(5)]
        assert frame_potential(states, 3) == pytest.approx(1.0)

    def test_accepts_state_lists(self, rng):
        states = [sample_haar_state(2, rng) for _ in range(4)]
        mat = np.array([s.amps for s in states])
        assert frame_potential(states, 2) == pytest.approx(frame_potential(mat, 2))

    def test_too_few_states(self):
        with pytest.raises(ValueError, match="at least 2"):
            frame_potential([basis_state(1, 0)], 1)

    def test_mixed_dims_rejected(self):
        with pytest.raises(ValueError, match="share"):
            frame_potential([basis_state(1, 0), basis_state(2, 0)], 1)

    def test_chunked_matches_direct(self, rng):
        # force the block loop down a small path and compare against brute force
        mat = haar_state_batch(1, 7, rng)
        g = np.abs(mat.conj() @ mat.T) ** 4
        expected = (g.sum() - np.trace(g)) / (7 * 6)
        assert frame_potential(mat, 2) == pytest.approx(expected)
