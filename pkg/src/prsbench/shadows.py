"""Fidelity estimation from single-copy measurements in random Clifford bases.

A snapshot is one (Clifford, outcome) record.  For a pure observable
|phi><phi| the single-snapshot estimator is (2^n + 1)|<x|C|phi>|^2 - 1,
which is unbiased over the Clifford average; estimates aggregate by
median of means.  Snapshot counts follow T >= c_shadow * ln(2M/delta) /
eps^2 with the constant treated as calibrated configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .clifford import (
    MeasurementRecord,
    measurement_direction,
    sample_uniform_clifford,
    tableau_to_unitary,
)
from .qcore import PureState, RandomStream

DEFAULT_SHADOW_CONSTANT = 34.0


def t_min_snapshots(
    m: int, eps: float, delta: float, c_shadow: float = DEFAULT_SHADOW_CONSTANT
) -> int:
    """Snapshots needed for M observables at accuracy eps, confidence 1-delta."""
    if m < 1:
        raise ValueError("need at least one observable")
    if not 0 < eps <= 1 or not 0 < delta < 1:
        raise ValueError("need eps in (0, 1] and delta in (0, 1)")
    return math.ceil(c_shadow * math.log(2 * m / delta) / eps**2)


def mom_batches(m: int, delta: float) -> int:
    """Median-of-means batch count ceil(2 ln(2M/delta))."""
    return max(1, math.ceil(2 * math.log(2 * m / delta)))


@dataclass
class ShadowSet:
    """A bag of snapshots of one unknown state, plus source metadata."""

    n: int
    records: List[MeasurementRecord]
    meta: dict = field(default_factory=dict)
    _directions: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for r in self.records:
            if r.tableau.n != self.n:
                raise ValueError("record qubit count differs from shadow set")

    def __len__(self) -> int:
        return len(self.records)

    def directions(self) -> np.ndarray:
        """(T, 2^n) rows C_t^dag |x_t>; computed once and cached."""
        if self._directions is None:
            d = np.empty((len(self.records), 1 << self.n), dtype=np.complex128)
            for i, rec in enumerate(self.records):
                d[i] = measurement_direction(rec)
            d.setflags(write=False)
            self._directions = d
        return self._directions


def collect_shadows(
    state: PureState, count: int, rng: RandomStream, meta: Optional[dict] = None
) -> ShadowSet:
    """Measure `count` fresh copies of `state` in random Clifford bases."""
    if count < 1:
        raise ValueError("count must be positive")
    recs = []
    dirs = np.empty((count, state.dim), dtype=np.complex128)
    for i in range(count):
        c = sample_uniform_clifford(state.n, rng)
        u = tableau_to_unitary(c)
        p = np.abs(u.mat @ state.amps) ** 2
        x = int(rng.gen.choice(p.size, p=p / p.sum()))
        recs.append(MeasurementRecord(c, x))
        dirs[i] = u.mat[x].conj()
    dirs.setflags(write=False)
    return ShadowSet(state.n, recs, dict(meta or {}), _directions=dirs)


def snapshot_estimate(record: MeasurementRecord, phi: PureState) -> float:
    """(2^n + 1)|<x|C|phi>|^2 - 1; unbiased for fidelity, not clipped."""
    if record.tableau.n != phi.n:
        raise ValueError("snapshot and observable qubit counts differ")
    v = measurement_direction(record)
    return float((phi.dim + 1) * np.abs(np.vdot(v, phi.amps)) ** 2 - 1.0)


def _snapshot_values(shadows: ShadowSet, phi_mat: np.ndarray) -> np.ndarray:
    """(T, M) snapshot estimates for observable columns phi_mat (dim, M)."""
    dim = 1 << shadows.n
    overlaps = shadows.directions().conj() @ phi_mat
    return (dim + 1) * np.abs(overlaps) ** 2 - 1.0


def _median_of_means(vals: np.ndarray, batches: int) -> float:
    size = vals.shape[0] // batches
    trimmed = vals[: size * batches].reshape(batches, size)
    return float(np.median(trimmed.mean(axis=1)))


def estimate_fidelity(shadows: ShadowSet, phi: PureState, batches: int = 1) -> float:
    """Median over `batches` of batch means of the snapshot estimator.

    Batch size floor(T/batches), trailing snapshots dropped.  batches=1
    is the plain mean.
    """
    if len(shadows) == 0:
        raise ValueError("empty shadow set")
    if phi.n != shadows.n:
        raise ValueError("observable qubit count differs from shadow set")
    if not 1 <= batches <= len(shadows):
        raise ValueError("need 1 <= batches <= snapshot count")
    vals = _snapshot_values(shadows, phi.amps[:, None])[:, 0]
    return _median_of_means(vals, batches)


@dataclass(frozen=True)
class EstimateReport:
    """Joint fidelity estimates for a batch of pure observables."""

    estimates: tuple
    batches: int
    T: int
    eps: float
    delta: float

    def __post_init__(self):
        if not all(math.isfinite(e) for e in self.estimates):
            raise ValueError("estimates must be finite")
        if not 1 <= self.batches <= self.T:
            raise ValueError("need T >= batches >= 1")

    def to_dict(self) -> dict:
        return {
            "estimates": list(self.estimates),
            "batches": self.batches,
            "T": self.T,
            "eps": self.eps,
            "delta": self.delta,
        }


def estimate_many(
    shadows: ShadowSet,
    observables: Sequence[PureState],
    eps: float,
    delta: float,
    c_shadow: float = DEFAULT_SHADOW_CONSTANT,
) -> EstimateReport:
    """Estimate fidelity against every observable from one shadow set.

    Requires T >= t_min_snapshots(M, eps, delta); with that budget all
    M estimates land within eps of truth with probability >= 1 - delta.
    """
    m = len(observables)
    needed = t_min_snapshots(m, eps, delta, c_shadow)
    if len(shadows) < needed:
        raise ValueError(
            f"insufficient snapshots: have {len(shadows)}, need at least {needed}"
        )
    for phi in observables:
        if phi.n != shadows.n:
            raise ValueError("observable qubit count differs from shadow set")
    batches = mom_batches(m, delta)
    phi_mat = np.stack([phi.amps for phi in observables], axis=1)
    vals = _snapshot_values(shadows, phi_mat)
    ests = tuple(_median_of_means(vals[:, j], batches) for j in range(m))
    return EstimateReport(ests, batches, len(shadows), eps, delta)
