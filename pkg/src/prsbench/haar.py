"""Haar-measure sampling over unitaries and states, and the overlap-tail study.

The tail experiment records, per threshold eps, the empirical probability
that a Haar state's fidelity with a fixed state reaches eps, next to the
exponential bound e^(-eps*N) and the exact tail (1-eps)^(N-1) (the overlap
is Beta(1, N-1) distributed).  The exponential bound is loose for small
eps*N, so exp_bound_holds() reports where it is actually an upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import QUBIT_CAP, CapacityError, PureState, RandomStream, UnitaryOp


def haar_unitary_batch(n: int, count: int, rng: RandomStream) -> np.ndarray:
    """Stack of `count` Haar unitaries, shape (count, 2^n, 2^n).

    Complex Ginibre matrices, QR-decomposed, with each column of Q
    rescaled by the phase of the matching diagonal entry of R; without
    that correction numpy's QR sign convention skews the distribution.
    """
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    dim = 1 << n
    g = rng.gen.standard_normal((count, dim, dim)) + 1j * rng.gen.standard_normal(
        (count, dim, dim)
    )
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def sample_haar_unitary(n: int, rng: RandomStream) -> UnitaryOp:
    """One Haar-distributed unitary on n qubits."""
    return UnitaryOp(n, haar_unitary_batch(n, 1, rng)[0], validate=False)


def haar_state_batch(n: int, count: int, rng: RandomStream) -> np.ndarray:
    """Rows are `count` Haar state vectors, shape (count, 2^n)."""
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    dim = 1 << n
    v = rng.gen.standard_normal((count, dim)) + 1j * rng.gen.standard_normal(
        (count, dim)
    )
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_haar_state(n: int, rng: RandomStream) -> PureState:
    """One Haar-distributed pure state (normalized complex Gaussian)."""
    return PureState(n, haar_state_batch(n, 1, rng)[0])


def haar_moment(t: int, dim: int) -> float:
    """E over Haar psi of |<phi|psi>|^(2t) = t! / (dim (dim+1) ... (dim+t-1))."""
    val = 1.0
    for j in range(t):
        val *= (j + 1) / (dim + j)
    return val


def exp_bound_holds(n: int, eps: float) -> bool:
    """Whether e^(-eps*N) actually upper-bounds the exact tail (1-eps)^(N-1)."""
    dim = 1 << n
    return (dim - 1) * math.log1p(-eps) <= -eps * dim


@dataclass(frozen=True)
class TailReport:
    n: int
    epsilons: tuple[float, ...]
    empirical_tail: tuple[float, ...]
    exp_bound: tuple[float, ...]
    exact_tail: tuple[float, ...]
    samples: int

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if not all(0.0 <= p <= 1.0 for p in self.empirical_tail):
            raise ValueError("empirical tail entries must lie in [0,1]")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "epsilons": list(self.epsilons),
            "empirical_tail": list(self.empirical_tail),
            "exp_bound": list(self.exp_bound),
            "exact_tail": list(self.exact_tail),
            "samples": self.samples,
        }


def overlap_tail_experiment(
    n: int, epsilons: list[float], samples: int, rng: RandomStream
) -> TailReport:
    """Empirical tail of fidelity(Haar psi, |0...0>) at each threshold.

    By unitary invariance the reference state is immaterial; against
    |0...0> the fidelity is just |psi[0]|^2.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    eps = [float(e) for e in epsilons]
    if any(not 0.0 < e <= 1.0 for e in eps):
        raise ValueError("every threshold must lie in (0, 1]")
    dim = 1 << n
    counts = np.zeros(len(eps), dtype=np.int64)
    done = 0
    chunk = max(1, min(samples, (1 << 22) // dim))
    while done < samples:
        m = min(chunk, samples - done)
        fid = np.abs(haar_state_batch(n, m, rng)[:, 0]) ** 2
        counts += (fid[:, None] >= np.asarray(eps)[None, :]).sum(axis=0)
        done += m
    return TailReport(
        n=n,
        epsilons=tuple(eps),
        empirical_tail=tuple(counts / samples),
        exp_bound=tuple(math.exp(-e * dim) for e in eps),
        exact_tail=tuple((1.0 - e) ** (dim - 1) for e in eps),
        samples=samples,
    )


def frame_potential(states, t: int) -> float:
    """Average of |<psi_i|psi_j>|^(2t) over ordered pairs i != j.

    Accepts a list of PureState or a (count, dim) complex array.  For the
    Haar ensemble the expected value is haar_moment(t, dim).
    """
    if isinstance(states, np.ndarray):
        mat = states
    else:
        if len({s.n for s in states}) > 1:
            raise ValueError("states must share a dimension")
        mat = np.array([s.amps for s in states])
    k = mat.shape[0]
    if k < 2:
        raise ValueError("need at least 2 states")
    total = 0.0
    block = max(1, (1 << 22) // max(1, mat.shape[1]))
    for lo in range(0, k, block):
        g = mat[lo : lo + block].conj() @ mat.T
        p = np.abs(g) ** (2 * t)
        total += p.sum() - np.trace(p, offset=lo)
    return total / (k * (k - 1))
