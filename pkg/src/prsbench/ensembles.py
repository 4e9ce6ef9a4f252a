"""Keyed state families and their classical ingredients.

Contents: toy PRFs (a keyed 64-bit avalanche mixer and stored
exactly-balanced truth tables), binary-phase states built from them,
keyed state families (binary-phase / stored-Haar / custom), approximate
t-design sampling from random {CNOT, H, T, Tdg} circuits, and k-wise
independent function families from polynomials over GF(2^k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._kernels import run_circuit_batch
from .haar import haar_state_batch
from .qcore import QUBIT_CAP, CapacityError, PureState, RandomStream, UnitaryOp

# ---------------------------------------------------------------------------
# toy PRFs

_MIX_A = 0x9E3779B97F4A7C15
_MIX_B = np.uint64(0xC2B2AE3D27D4EB4F)
_TABLE_BACKEND_MAX_N = 16
_TABLE_ENTRY_CAP = 1 << 26


def _avalanche64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class PrfFamily:
    """Keyed boolean functions on n input bits.

    kind "mixer": bit 0 of an avalanche hash of (key, x); near-balanced.
    kind "balanced": stored truth tables with exactly 2^(n-1) ones each.
    """

    kind: str
    n: int
    key_count: int
    seed: int
    table: Optional[np.ndarray] = None

    @property
    def exact_balanced(self) -> bool:
        return self.kind == "balanced"

    def _check(self, key: int, x: int) -> None:
        if not 0 <= key < self.key_count:
            raise ValueError(f"key {key} out of range [0, {self.key_count})")
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"input {x} out of range for n={self.n}")


def make_prf_family(
    kind: str, n: int, key_count: int, rng: RandomStream
) -> PrfFamily:
    if kind == "mixer":
        return PrfFamily("mixer", n, key_count, seed=rng.child("prf").seed)
    if kind == "balanced":
        if n > _TABLE_BACKEND_MAX_N:
            raise CapacityError(f"balanced tables supported only for n <= {_TABLE_BACKEND_MAX_N}")
        dim = 1 << n
        if key_count * dim > _TABLE_ENTRY_CAP:
            raise CapacityError("truth-table storage over cap")
        gen = rng.child("prf").gen
        # per-key random permutation; low half of each becomes the ones
        table = (gen.random((key_count, dim)).argsort(axis=1) < dim // 2).astype(np.uint8)
        return PrfFamily("balanced", n, key_count, seed=0, table=table)
    raise ValueError(f"unknown PRF kind {kind!r}")


def _mixer_base(family: PrfFamily, key: int) -> np.uint64:
    # exact in python ints, then masked to 64 bits
    return np.uint64((family.seed + key * _MIX_A) & (2**64 - 1))


def prf_truth_table(family: PrfFamily, key: int) -> np.ndarray:
    """All 2^n output bits of one key, as uint8."""
    family._check(key, 0)
    if family.kind == "balanced":
        return family.table[key]
    x = np.arange(1 << family.n, dtype=np.uint64)
    z = _mixer_base(family, key) ^ (x * _MIX_B)
    return (_avalanche64(z) & np.uint64(1)).astype(np.uint8)


def prf_eval(family: PrfFamily, key: int, x: int) -> int:
    family._check(key, x)
    if family.kind == "balanced":
        return int(family.table[key, x])
    z = _mixer_base(family, key) ^ (np.array([x], dtype=np.uint64) * _MIX_B)
    return int(_avalanche64(z)[0] & np.uint64(1))


# ---------------------------------------------------------------------------
# binary-phase states


def binary_phase_state(family: PrfFamily, key: int) -> PureState:
    """2^(-n/2) sum_x (-1)^(f_key(x)) |x>."""
    if family.n > QUBIT_CAP:
        raise CapacityError(f"{family.n} qubits exceeds cap {QUBIT_CAP}")
    bits = prf_truth_table(family, key).astype(np.float64)
    amps = (1.0 - 2.0 * bits) * (1 << family.n) ** -0.5
    return PureState(family.n, amps.astype(np.complex128))


# ---------------------------------------------------------------------------
# keyed state families

_FAMILY_ENTRY_CAP = 1 << 24


@dataclass
class PrsFamily:
    """Keyed family of pure states with a deterministic generator."""

    n: int
    key_count: int
    kind: str
    generator: Callable[[int], PureState]
    prf: Optional[PrfFamily] = None
    _matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def state(self, key: int) -> PureState:
        if not 0 <= key < self.key_count:
            raise ValueError(f"key {key} out of range [0, {self.key_count})")
        return self.generator(key)

    def state_matrix(self) -> np.ndarray:
        """(key_count, 2^n) array of all family states; cached."""
        if self._matrix is None:
            if self.key_count * (1 << self.n) > _FAMILY_ENTRY_CAP:
                raise CapacityError("family state matrix over cap")
            mat = np.empty((self.key_count, 1 << self.n), dtype=np.complex128)
            for k in range(self.key_count):
                mat[k] = self.generator(k).amps
            mat.setflags(write=False)
            self._matrix = mat
        return self._matrix


def make_prs_family(
    kind: str,
    n: int,
    key_count: int,
    rng: RandomStream,
    prf_backend: str = "balanced",
    generator: Optional[Callable[[int], PureState]] = None,
) -> PrsFamily:
    if key_count < 1:
        raise ValueError("key_count must be positive")
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    if kind == "binary-phase":
        prf = make_prf_family(prf_backend, n, key_count, rng)
        return PrsFamily(
            n, key_count, kind, lambda k: binary_phase_state(prf, k), prf=prf
        )
    if kind == "haar-table":
        if key_count * (1 << n) > _FAMILY_ENTRY_CAP:
            raise CapacityError("haar-table family over cap")
        states = haar_state_batch(n, key_count, rng.child("haar-table"))
        fam = PrsFamily(n, key_count, kind, lambda k: PureState(n, states[k]))
        fam._matrix = states
        states.setflags(write=False)
        return fam
    if kind == "custom":
        if generator is None:
            raise ValueError("custom family needs a generator")
        return PrsFamily(n, key_count, kind, generator)
    raise ValueError(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# approximate t-designs from random circuits


def design_gate_count(n: int, t: int, eps: float, c: float = 1.0) -> int:
    """Gate schedule c * n * t^2 * (n*t + ln(1/eps))."""
    if n < 1 or t < 1:
        raise ValueError("n and t must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return math.ceil(c * n * t * t * (n * t + math.log(1.0 / eps)))


def _draw_circuits(n: int, length: int, count: int, rng: RandomStream):
    """Random gate lists: uniform gate, uniform target / ordered pair."""
    gen = rng.gen
    n_codes = 4 if n > 1 else 3  # no CNOT on a single qubit
    codes = gen.integers(0, n_codes, size=(count, length), dtype=np.uint8)
    qa = gen.integers(0, n, size=(count, length), dtype=np.int64)
    if n > 1:
        qb = gen.integers(0, n - 1, size=(count, length), dtype=np.int64)
        qb = qb + (qb >= qa)
    else:
        qb = np.zeros_like(qa)
    bita = (n - 1 - qa).astype(np.uint8)
    bitb = (n - 1 - qb).astype(np.uint8)
    return codes, bita, bitb


def design_state_batch(
    n: int, t: int, eps: float, count: int, rng: RandomStream, c: float = 1.0
) -> np.ndarray:
    """(count, 2^n) states, each |0..0> pushed through a fresh random circuit."""
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    length = design_gate_count(n, t, eps, c)
    dim = 1 << n
    out = np.zeros((count, dim), dtype=np.complex128)
    out[:, 0] = 1.0
    chunk = max(1, (1 << 24) // max(1, length))
    for lo in range(0, count, chunk):
        hi = min(count, lo + chunk)
        codes, bita, bitb = _draw_circuits(n, length, hi - lo, rng)
        run_circuit_batch(out[lo:hi], codes, bita, bitb)
    return out


def sample_design_unitary(
    n: int, t: int, eps: float, rng: RandomStream, c: float = 1.0
) -> UnitaryOp:
    """One random-circuit unitary from the design schedule."""
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    length = design_gate_count(n, t, eps, c)
    dim = 1 << n
    codes, bita, bitb = _draw_circuits(n, length, 1, rng)
    cols = np.eye(dim, dtype=np.complex128)  # row i evolves e_i
    run_circuit_batch(
        cols,
        np.repeat(codes, dim, axis=0),
        np.repeat(bita, dim, axis=0),
        np.repeat(bitb, dim, axis=0),
    )
    return UnitaryOp(n, cols.T.copy(), validate=False)


# ---------------------------------------------------------------------------
# k-wise independent functions over GF(2^k)

# smallest irreducible polynomial of each degree with nonzero constant
# term (verified by an independent irreducibility test in the suite)
IRREDUCIBLE_POLY = {
    1: 3,
    2: 7,
    3: 11,
    4: 19,
    5: 37,
    6: 67,
    7: 131,
    8: 283,
    9: 515,
    10: 1033,
    11: 2053,
    12: 4105,
    13: 8219,
    14: 16417,
    15: 32771,
    16: 65579,
    17: 131081,
    18: 262153,
    19: 524327,
    20: 1048585,
    21: 2097157,
    22: 4194307,
    23: 8388641,
    24: 16777243,
}


def gf_mul(a: int, b: int, k: int) -> int:
    """Product in GF(2^k) modulo the fixed irreducible polynomial."""
    poly = IRREDUCIBLE_POLY[k]
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        if a >> k:
            a ^= poly
        b >>= 1
    return r


@dataclass(frozen=True)
class KWiseFamily:
    """Degree-(t-1) polynomials over GF(2^k), k = max(n, m), output truncated to m bits.

    Keys pack the t coefficients as consecutive k-bit chunks, so there
    are 2^(k*t) keys and any t distinct inputs map to exactly uniform
    outputs over keys.
    """

    t: int
    n: int
    m: int

    def __post_init__(self):
        if self.t < 1 or self.n < 1 or self.m < 1:
            raise ValueError("t, n, m must be positive")
        if self.field_bits not in IRREDUCIBLE_POLY:
            raise ValueError(f"no field polynomial on file for k={self.field_bits}")

    @property
    def field_bits(self) -> int:
        return max(self.n, self.m)

    @property
    def key_count(self) -> int:
        return 1 << (self.field_bits * self.t)


def kwise_eval(family: KWiseFamily, key: int, x: int) -> int:
    """f_key(x): Horner evaluation, low m bits of the field element."""
    if not 0 <= key < family.key_count:
        raise ValueError(f"key {key} out of range [0, {family.key_count})")
    if not 0 <= x < (1 << family.n):
        raise ValueError(f"input {x} out of range for n={family.n}")
    k = family.field_bits
    mask = (1 << k) - 1
    acc = 0
    for i in range(family.t - 1, -1, -1):
        coeff = (key >> (i * k)) & mask
        acc = gf_mul(acc, x, k) ^ coeff
    return acc & ((1 << family.m) - 1)
