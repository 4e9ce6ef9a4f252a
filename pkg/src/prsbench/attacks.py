"""Distinguishing attacks on keyed state families.

Three attack surfaces:
  * a copy-budget distinguisher that measures T copies in random
    Clifford bases and decides family-vs-Haar by an exact Bayes rule
    (permanent-based Haar likelihood) or by a shadow fidelity sweep,
  * a collision attack on binary-phase states that samples colliding
    input pairs from a 2n+1 qubit circuit and feeds them to a
    brute-force key search standing in for an NP oracle,
  * an advantage-scaling experiment for a swap-test adversary against
    a family of N Haar unitaries queried T times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from .clifford import (
    MeasurementRecord,
    measure_in_clifford_basis,
    measurement_direction,
    sample_uniform_clifford,
)
from .ensembles import (
    PrfFamily,
    PrsFamily,
    _MIX_A,
    _MIX_B,
    _avalanche64,
    binary_phase_state,
    design_state_batch,
)
from .haar import haar_state_batch, sample_haar_state
from .qcore import QUBIT_CAP, CapacityError, PureState, RandomStream
from .shadows import ShadowSet, collect_shadows

PERMANENT_CAP = 20
RECORD_QUBIT_CAP = 12  # dense Clifford synthesis beyond this is impractical
KEY_SEARCH_CAP = 1 << 20
DESIGN_BANK_T = 4
DESIGN_BANK_EPS = 0.25
DESIGN_BANK_SAMPLES = 100_000
_FALLBACK_BANK_SEED = 0xBA7E5BA


# ---------------------------------------------------------------------------
# record collection

def collect_records(
    source: PureState, count: int, rng: RandomStream
) -> List[MeasurementRecord]:
    """Measure `count` copies of one hidden state, fresh Clifford basis each."""
    if count < 1:
        raise ValueError("count must be positive")
    if source.n > RECORD_QUBIT_CAP:
        raise CapacityError(f"record collection capped at n <= {RECORD_QUBIT_CAP}")
    out = []
    for _ in range(count):
        c = sample_uniform_clifford(source.n, rng)
        out.append(measure_in_clifford_basis(source, c, rng))
    return out


def _record_directions(records: Sequence[MeasurementRecord]) -> np.ndarray:
    if not records:
        raise ValueError("no records")
    n = records[0].tableau.n
    d = np.empty((len(records), 1 << n), dtype=np.complex128)
    for i, rec in enumerate(records):
        if rec.tableau.n != n:
            raise ValueError("records mix qubit counts")
        d[i] = measurement_direction(rec)
    return d


# ---------------------------------------------------------------------------
# likelihoods

def _permanent(a: np.ndarray) -> complex:
    """Ryser's formula over subsets, vectorized in chunks."""
    t = a.shape[0]
    if t == 0:
        return 1.0 + 0j
    full = 1 << t
    shifts = np.arange(t, dtype=np.uint32)
    total = 0.0 + 0j
    chunk = 1 << 16
    for lo in range(1, full, chunk):
        ks = np.arange(lo, min(lo + chunk, full), dtype=np.uint32)
        bits = ((ks[:, None] >> shifts) & 1).astype(np.float64)
        rowsums = bits @ a.T  # (chunk, t): row sums over the subset's columns
        prods = rowsums.prod(axis=1)
        signs = 1 - 2 * ((t - bits.sum(axis=1).astype(np.int64)) & 1)
        total += (signs * prods).sum()
    return complex(total)


def haar_likelihood(records: Sequence[MeasurementRecord]) -> float:
    """E over Haar states of prod_i |<c_i|C_i|psi>|^2, exactly.

    Equals perm(G) / (N (N+1) ... (N+T-1)) with G the Gram matrix of
    the measured directions; perm(G) >= 1, so this never vanishes.
    """
    t = len(records)
    if t == 0:
        return 1.0
    if t > PERMANENT_CAP:
        raise ValueError(f"permanent path capped at T <= {PERMANENT_CAP}")
    d = _record_directions(records)
    gram = d.conj() @ d.T
    dim = d.shape[1]
    log_denom = sum(math.log(dim + i) for i in range(t))
    return float(_permanent(gram).real * math.exp(-log_denom))


def _log_key_sums(dirs: np.ndarray, family: PrsFamily) -> np.ndarray:
    """(K,) per-key log products of record probabilities."""
    probs = np.abs(dirs.conj() @ family.state_matrix().T) ** 2
    with np.errstate(divide="ignore"):
        return np.log(probs).sum(axis=0)


def _log_mean_exp(v: np.ndarray) -> float:
    return float(logsumexp(v) - math.log(v.size))


def ensemble_likelihood(records: Sequence[MeasurementRecord], family: PrsFamily) -> float:
    """(1/K) sum_k prod_i |<c_i|C_i|phi_k>|^2."""
    if len(records) == 0:
        return 1.0
    return float(math.exp(_log_mean_exp(_log_key_sums(_record_directions(records), family))))


def _log_haar_likelihood_exact(dirs: np.ndarray) -> float:
    t, dim = dirs.shape
    if t == 0:
        return 0.0
    gram = dirs.conj() @ dirs.T
    log_denom = sum(math.log(dim + i) for i in range(t))
    return math.log(_permanent(gram).real) - log_denom


def _log_haar_likelihood_bank(dirs: np.ndarray, bank: np.ndarray) -> float:
    """Monte Carlo over a precomputed bank of approximate-design states."""
    probs = np.abs(dirs.conj() @ bank.T) ** 2
    with np.errstate(divide="ignore"):
        sums = np.log(probs).sum(axis=0)
    return _log_mean_exp(sums)


def make_haar_bank(
    n: int, rng: RandomStream, samples: int = DESIGN_BANK_SAMPLES
) -> np.ndarray:
    """Design-state bank backing the over-cap Haar branch of the Bayes rule."""
    return design_state_batch(n, DESIGN_BANK_T, DESIGN_BANK_EPS, samples, rng)


def _bayes_from_dirs(
    dirs: np.ndarray,
    family: PrsFamily,
    haar_bank: Optional[np.ndarray],
    rng: Optional[RandomStream],
) -> Tuple[int, Tuple[float, float]]:
    t = dirs.shape[0]
    log_prs = _log_mean_exp(_log_key_sums(dirs, family)) if t else 0.0
    if t <= PERMANENT_CAP:
        log_haar = _log_haar_likelihood_exact(dirs)
    else:
        if haar_bank is None:
            bank_rng = rng if rng is not None else RandomStream(_FALLBACK_BANK_SEED)
            haar_bank = make_haar_bank(family.n, bank_rng)
        log_haar = _log_haar_likelihood_bank(dirs, haar_bank)
    if log_prs == -math.inf and log_haar == -math.inf:
        raise ValueError("degenerate decision: both likelihoods vanished")
    p0 = float(expit(log_prs - log_haar))
    decision = 0 if p0 > 0.5 else 1  # ties go to Haar
    return decision, (p0, 1.0 - p0)


def bayes_decision(
    records: Sequence[MeasurementRecord],
    family: PrsFamily,
    rng: Optional[RandomStream] = None,
    haar_bank: Optional[np.ndarray] = None,
) -> Tuple[int, Tuple[float, float]]:
    """Posterior argmax for family-vs-Haar under a uniform prior.

    Returns (bit, (p0, p1)) with p0 the family posterior.  Beyond the
    permanent cap the Haar branch averages over a design-state bank
    (pass haar_bank to share one across calls; rng seeds a fresh one).
    """
    dirs = _record_directions(records) if records else np.zeros((0, 1 << family.n))
    return _bayes_from_dirs(dirs, family, haar_bank, rng)


def _shadow_from_dirs(dirs: np.ndarray, family: PrsFamily, threshold: float, batches: int) -> int:
    t, dim = dirs.shape
    if t == 0:
        return 1
    vals = (dim + 1) * np.abs(dirs.conj() @ family.state_matrix().T) ** 2 - 1.0
    if batches <= 1:
        ests = vals.mean(axis=0)
    else:
        size = t // batches
        ests = np.median(
            vals[: size * batches].reshape(batches, size, -1).mean(axis=1), axis=0
        )
    return 0 if np.max(ests) >= threshold else 1


def shadow_decision(
    records: Sequence[MeasurementRecord],
    family: PrsFamily,
    threshold: float = 2.0 / 3.0,
    batches: int = 1,
) -> int:
    """0 (family) iff some key's shadow fidelity estimate reaches threshold."""
    dirs = _record_directions(records) if records else np.zeros((0, 1 << family.n))
    return _shadow_from_dirs(dirs, family, threshold, batches)


# ---------------------------------------------------------------------------
# the distinguishing game

@dataclass
class DistinguishTrial:
    """One round: hidden bit, its records, and each rule's guess."""

    x: int
    records: List[MeasurementRecord]
    family: PrsFamily
    decisions: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.records) < 1:
            raise ValueError("a trial needs at least one record")
        if any(r.tableau.n != self.family.n for r in self.records):
            raise ValueError("records mix qubit counts")


def distinguishing_experiment(
    family: PrsFamily,
    copies: int,
    trials: int,
    rng: RandomStream,
    threshold: float = 2.0 / 3.0,
    force_x: Optional[int] = None,
    haar_bank: Optional[np.ndarray] = None,
    bank_samples: int = DESIGN_BANK_SAMPLES,
) -> dict:
    """Run the two-rule game: X uniform, T copies, both rules per trial."""
    if trials < 1:
        raise ValueError("trials must be positive")
    n = family.n
    if copies > PERMANENT_CAP and haar_bank is None:
        haar_bank = make_haar_bank(n, rng.child("bank"), bank_samples)
    rows = []
    for t in range(trials):
        st = rng.child("trial", t)
        x = int(st.gen.integers(2)) if force_x is None else int(force_x)
        if x == 0:
            key = int(st.gen.integers(family.key_count))
            state = family.state(key)
        else:
            key = None
            state = sample_haar_state(n, st.child("haar"))
        if copies > 0:
            shadows = collect_shadows(state, copies, st.child("meas"))
            dirs = shadows.directions()
        else:
            dirs = np.zeros((0, 1 << n))
        b_bit, (p0, _) = _bayes_from_dirs(dirs, family, haar_bank, st.child("bayes"))
        s_bit = _shadow_from_dirs(dirs, family, threshold, batches=1)
        rows.append(
            {"x": x, "key": key, "bayes": b_bit, "shadow": s_bit, "p0": p0}
        )
    xs = np.array([r["x"] for r in rows])
    bayes = np.array([r["bayes"] for r in rows])
    shadow = np.array([r["shadow"] for r in rows])
    return {
        "n": n,
        "key_count": family.key_count,
        "family_kind": family.kind,
        "copies": copies,
        "trials": trials,
        "threshold": threshold,
        "bayes_success": float((bayes == xs).mean()),
        "shadow_success": float((shadow == xs).mean()),
        "bayes_minus_shadow": float((bayes == xs).mean() - (shadow == xs).mean()),
        "haar_fraction": float(xs.mean()),
        "per_trial": rows,
    }


# ---------------------------------------------------------------------------
# collision attack on binary-phase states

@dataclass(frozen=True)
class CollisionPair:
    """An ordered input pair; production guarantees f(x) = f(y)."""

    x: int
    y: int
    n: int

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "n": self.n}


def _collision_state(psi: np.ndarray) -> np.ndarray:
    """Statevector after the collision circuit on |0>|psi>|0^n>.

    Layout (2, N, N) = (control, register A, register B).  Circuit:
    H on control, H^n on B, control-SWAP(A,B), H^n on A, X on control
    open-controlled on A = |0^n| (fires when A reads all zero), H^n on A.
    """
    dim = psi.shape[0]
    s = np.zeros((2, dim, dim), dtype=np.complex128)
    s[0, :, 0] = psi
    s[1] = s[0]  # H on control from |0>
    s /= math.sqrt(2)
    _fwht_axis(s, 2)
    s /= math.sqrt(dim)
    s[1] = s[1].T.copy()  # controlled swap of A and B
    _fwht_axis(s, 1)
    s /= math.sqrt(dim)
    top = s[0, 0, :].copy()  # open-controlled X at A = 0
    s[0, 0, :] = s[1, 0, :]
    s[1, 0, :] = top
    _fwht_axis(s, 1)
    s /= math.sqrt(dim)
    return s


def _fwht_axis(s: np.ndarray, axis: int) -> None:
    """In-place unnormalized Walsh-Hadamard transform along one axis."""
    dim = s.shape[axis]
    lead = int(np.prod(s.shape[:axis]))
    trail = int(np.prod(s.shape[axis + 1 :]))
    v = s.reshape(lead, dim, trail)
    h = 1
    while h < dim:
        b = v.reshape(lead, dim // (2 * h), 2, h, trail)
        x = b[:, :, 0].copy()
        b[:, :, 0] += b[:, :, 1]
        b[:, :, 1] *= -1.0
        b[:, :, 1] += x
        h *= 2


def _collision_probs(psi: np.ndarray) -> np.ndarray:
    """Flat measurement distribution with float dust removed.

    True amplitudes here are either exactly zero or of magnitude
    >= |alpha|/(sqrt(2) N), so a relative floor removes only rounding
    residue (keeping the zero-amplitude guarantee exact).
    """
    p = np.abs(_collision_state(psi).reshape(-1)) ** 2
    p[p < p.max() * 1e-20] = 0.0
    return p / p.sum()


def collision_pairs_from_state(
    state: PureState, count: int, rng: RandomStream
) -> Tuple[List[CollisionPair], float]:
    """Draw pairs from the circuit, resampling on control 1.

    Returns (pairs, control-0 rate over all attempts).  Control 0
    happens with probability 1 - |<+^n|psi>|^2 / 2 >= 1/2.
    """
    n = state.n
    if 2 * n + 1 > QUBIT_CAP:
        raise CapacityError(f"collision circuit needs 2n+1 <= {QUBIT_CAP} qubits")
    if count < 1:
        raise ValueError("count must be positive")
    p = _collision_probs(state.amps)
    dim = state.dim
    pairs: List[CollisionPair] = []
    attempts = 0
    while len(pairs) < count:
        batch = max(32, 2 * (count - len(pairs)))
        draws = rng.gen.choice(p.size, size=batch, p=p)
        for idx in draws:
            attempts += 1
            if idx >> (2 * n) == 0:
                pairs.append(CollisionPair(int(idx >> n) & (dim - 1), int(idx) & (dim - 1), n))
                if len(pairs) == count:
                    break
    return pairs, len(pairs) / attempts


def sample_collision_pair(
    family: PrfFamily, key: int, rng: RandomStream
) -> Tuple[CollisionPair, int]:
    """One pair from |phi_key>'s circuit; the accepted control bit is 0."""
    pairs, _ = collision_pairs_from_state(binary_phase_state(family, key), 1, rng)
    return pairs[0], 0


def _prf_bits_at(family: PrfFamily, inputs: np.ndarray) -> np.ndarray:
    """(key_count, len(inputs)) function values, vectorized over keys."""
    if family.kind == "balanced":
        return family.table[:, inputs]
    keys = np.arange(family.key_count, dtype=np.uint64)
    base = np.uint64(family.seed) + keys * np.uint64(_MIX_A)  # wraps mod 2^64
    z = base[:, None] ^ (inputs.astype(np.uint64)[None, :] * _MIX_B)
    return (_avalanche64(z) & np.uint64(1)).astype(np.uint8)


def np_oracle_key_search(
    pairs: Sequence[CollisionPair], family: PrfFamily
) -> Optional[int]:
    """Lowest key consistent with every pair, or None.

    Brute force over keys stands in for the NP oracle; an empty pair
    list is vacuously consistent with key 0.
    """
    if family.key_count > KEY_SEARCH_CAP:
        raise CapacityError(f"key search capped at {KEY_SEARCH_CAP} keys")
    if not pairs:
        return 0
    xs = np.array([p.x for p in pairs])
    ys = np.array([p.y for p in pairs])
    mask = (_prf_bits_at(family, xs) == _prf_bits_at(family, ys)).all(axis=1)
    hits = np.nonzero(mask)[0]
    return int(hits[0]) if hits.size else None


def binary_phase_attack_experiment(
    family: PrfFamily, pairs_per_trial: int, trials: int, rng: RandomStream
) -> dict:
    """Collision pairs + key search, on family states and on Haar states."""
    if trials < 1 or pairs_per_trial < 1:
        raise ValueError("trials and pairs_per_trial must be positive")
    n = family.n
    prs_hits = haar_hits = 0
    prs_c0 = []
    haar_c0 = []
    for t in range(trials):
        st = rng.child("prs", t)
        key = int(st.gen.integers(family.key_count))
        pairs, c0 = collision_pairs_from_state(
            binary_phase_state(family, key), pairs_per_trial, st
        )
        prs_hits += np_oracle_key_search(pairs, family) is not None
        prs_c0.append(c0)
        st = rng.child("haar", t)
        psi = sample_haar_state(n, st)
        pairs, c0 = collision_pairs_from_state(psi, pairs_per_trial, st.child("pairs"))
        haar_hits += np_oracle_key_search(pairs, family) is not None
        haar_c0.append(c0)
    return {
        "n": n,
        "key_count": family.key_count,
        "backend": family.kind,
        "pairs_per_trial": pairs_per_trial,
        "trials": trials,
        "prs_accept_rate": prs_hits / trials,
        "haar_accept_rate": haar_hits / trials,
        "prs_control0_rate": float(np.mean(prs_c0)),
        "haar_control0_rate": float(np.mean(haar_c0)),
    }


# ---------------------------------------------------------------------------
# advantage scaling for unitary families

@dataclass(frozen=True)
class AdvantageReport:
    """Empirical advantage of one adversary against an N-unitary family."""

    N: int
    T: int
    trials: int
    adversary: str
    adv_hat: float
    std_err: float

    def __post_init__(self):
        if not -1.0 <= self.adv_hat <= 1.0:
            raise ValueError("advantage must lie in [-1, 1]")

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "T": self.T,
            "trials": self.trials,
            "adversary": self.adversary,
            "adv_hat": self.adv_hat,
            "std_err": self.std_err,
        }


def pru_advantage_experiment(
    family_size: int,
    queries: int,
    adversary: str,
    trials: int,
    rng: RandomStream,
) -> AdvantageReport:
    """Distinguish a random family member from a fresh Haar unitary.

    The family is N Haar unitaries represented by their |0> columns
    (all implemented strategies only query the oracle on |0>).  The
    swap-test strategy runs `queries` independent swap tests of O|0>
    against a uniformly chosen family state and guesses "family" on a
    strict majority of accepts; at queries=1 its advantage is
    (1 - 1/N) / (2N) exactly.  The ignore strategy flips a coin.
    """
    if family_size < 2 or family_size & (family_size - 1):
        raise ValueError("family size must be a power of two >= 2")
    if adversary not in ("swap-test", "ignore"):
        raise ValueError(f"unknown adversary {adversary!r}")
    if trials < 2 or queries < 1:
        raise ValueError("need trials >= 2 and queries >= 1")
    n = family_size.bit_length() - 1
    fam = haar_state_batch(n, family_size, rng.child("family"))
    gen = rng.child("game").gen
    xs = gen.integers(0, 2, size=trials)
    n_haar = int(xs.sum())
    oracle = np.empty((trials, family_size), dtype=np.complex128)
    js = gen.integers(0, family_size, size=trials)
    oracle[xs == 0] = fam[js[xs == 0]]
    oracle[xs == 1] = haar_state_batch(n, n_haar, rng.child("fresh")) if n_haar else 0
    if adversary == "ignore":
        guesses = gen.integers(0, 2, size=trials)
    else:
        overlap = np.abs(oracle @ fam.conj().T) ** 2  # (trials, N)
        ks = gen.integers(0, family_size, size=(trials, queries))
        fid = overlap[np.arange(trials)[:, None], ks]
        accepts = (gen.random(size=(trials, queries)) < (1 + fid) / 2).sum(axis=1)
        guesses = np.where(2 * accepts > queries, 0, 1)
    rate0 = float((guesses[xs == 0] == 0).mean()) if (xs == 0).any() else 0.0
    rate1 = float((guesses[xs == 1] == 0).mean()) if (xs == 1).any() else 0.0
    n0 = max(int((xs == 0).sum()), 1)
    n1 = max(n_haar, 1)
    se = math.sqrt(rate0 * (1 - rate0) / n0 + rate1 * (1 - rate1) / n1)
    return AdvantageReport(
        family_size, queries, trials, adversary, rate0 - rate1, se
    )
