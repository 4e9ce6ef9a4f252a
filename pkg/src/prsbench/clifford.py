"""Exactly uniform Clifford sampling and Clifford-basis measurement.

Sampling follows the Koenig-Smolin canonical-index construction: a
uniform integer below the symplectic group order is mapped bijectively
to a symplectic matrix by recursive transvections, then 2n uniform
phase bits pick the Pauli part.  No rejection anywhere, so uniformity
over the group (mod global phase) is exact.

Tableau convention: row i < n is the conjugation image of X_i, row n+i
the image of Z_i; columns 0..n-1 are X-parts, n..2n-1 Z-parts; the
phases vector holds one sign bit per row.  A row (x, z, s) denotes the
Hermitian Pauli (-1)^s * i^(x.z) * X^x Z^z.  Qubit j maps to basis-index
bit (n-1-j), matching the kron order in qcore.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    QUBIT_CAP,
    CapacityError,
    PureState,
    RandomStream,
    UnitaryOp,
)

# ---------------------------------------------------------------------------
# group orders


def symplectic_group_order(n: int) -> int:
    """|Sp(2n, F_2)| = 2^(n^2) * prod_{j=1..n} (4^j - 1)."""
    order = 1
    for j in range(1, n + 1):
        order *= (1 << (2 * j)) - 1
    return order << (n * n)


def clifford_group_order(n: int) -> int:
    """Clifford group order modulo global phase: 2^(n^2 + 2n) * prod (4^j - 1)."""
    return symplectic_group_order(n) << (2 * n)


# ---------------------------------------------------------------------------
# Koenig-Smolin symplectic construction, bit-packed
#
# Vectors in F_2^(2n) are Python ints; bit 2j is the X part and bit
# 2j+1 the Z part of pair j (the construction's interleaved layout;
# rows are converted to the [X-block | Z-block] layout at the end).


def _pair_swap(v: int, even_mask: int) -> int:
    return ((v & even_mask) << 1) | ((v >> 1) & even_mask)


def _inner(v: int, w: int, even_mask: int) -> int:
    return (v & _pair_swap(w, even_mask)).bit_count() & 1


def _transvect(h: int, v: int, even_mask: int) -> int:
    return v ^ (h if _inner(h, v, even_mask) else 0)


def _find_transvection(x: int, y: int, n: int, even_mask: int) -> tuple[int, int]:
    """h1, h2 with Z_h1 Z_h2 x = y (h = 0 acts as identity)."""
    if x == y:
        return 0, 0
    if _inner(x, y, even_mask):
        return x ^ y, 0
    # try a pair where both vectors are nonzero
    for j in range(n):
        xp = (x >> (2 * j)) & 3
        yp = (y >> (2 * j)) & 3
        if xp and yp:
            zp = xp ^ yp
            if zp == 0:
                zp = 2 | ((xp & 1) ^ ((xp >> 1) & 1))
            z = zp << (2 * j)
            return x ^ z, y ^ z
    # otherwise combine a pair where only x is nonzero with one where only y is;
    # bit-swapping a lone pair value makes the local product odd
    z = 0
    for j in range(n):
        xp = (x >> (2 * j)) & 3
        yp = (y >> (2 * j)) & 3
        if xp and not yp:
            z |= (2 if xp == 3 else ((xp & 1) << 1) | (xp >> 1)) << (2 * j)
            break
    for j in range(n):
        xp = (x >> (2 * j)) & 3
        yp = (y >> (2 * j)) & 3
        if yp and not xp:
            z |= (2 if yp == 3 else ((yp & 1) << 1) | (yp >> 1)) << (2 * j)
            break
    return x ^ z, y ^ z


def _symplectic_rows(index: int, n: int) -> list[int]:
    """Rows of the symplectic matrix with the given canonical index."""
    nn = 2 * n
    even_mask = ((1 << nn) - 1) // 3
    s = (1 << nn) - 1
    f1 = (index % s) + 1
    index //= s
    t0, t1 = _find_transvection(1, f1, n, even_mask)
    bits = index % (1 << (nn - 1))
    eprime = 1 | ((bits & ~1) << 1)
    h0 = _transvect(t0, eprime, even_mask)
    h0 = _transvect(t1, h0, even_mask)
    if bits & 1:
        f1 = 0
    if n > 1:
        rows = [1, 2] + [r << 2 for r in _symplectic_rows(index >> (nn - 1), n - 1)]
    else:
        rows = [1, 2]
    out = []
    for r in rows:
        r = _transvect(t0, r, even_mask)
        r = _transvect(t1, r, even_mask)
        r = _transvect(h0, r, even_mask)
        r = _transvect(f1, r, even_mask)
        out.append(r)
    return out


def _rows_to_matrix(rows: list[int], n: int) -> np.ndarray:
    """Interleaved packed rows -> (2n x 2n) uint8 in [X | Z] block layout."""
    symp = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for q in range(n):
        for kind in (0, 1):  # 0: X_q image, 1: Z_q image
            r = rows[2 * q + kind]
            dest = symp[q + kind * n]
            for c in range(n):
                dest[c] = (r >> (2 * c)) & 1
                dest[n + c] = (r >> (2 * c + 1)) & 1
    return symp


def symplectic_from_index(index: int, n: int) -> np.ndarray:
    """Bijection from range(symplectic_group_order(n)) onto Sp(2n, F_2)."""
    if not 0 <= index < symplectic_group_order(n):
        raise ValueError("symplectic index out of range")
    return _rows_to_matrix(_symplectic_rows(index, n), n)


# ---------------------------------------------------------------------------
# tableaus


@dataclass(frozen=True)
class CliffordTableau:
    """Symplectic matrix plus per-row sign bits; a Clifford mod phase."""

    n: int
    symplectic: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        symp = np.ascontiguousarray(self.symplectic, dtype=np.uint8) & 1
        ph = np.ascontiguousarray(self.phases, dtype=np.uint8) & 1
        nn = 2 * self.n
        if symp.shape != (nn, nn):
            raise ValueError(f"symplectic shape {symp.shape}, expected ({nn}, {nn})")
        if ph.shape != (nn,):
            raise ValueError(f"phases shape {ph.shape}, expected ({nn},)")
        lam = np.zeros((nn, nn), dtype=np.uint8)
        lam[: self.n, self.n :] = np.eye(self.n, dtype=np.uint8)
        lam[self.n :, : self.n] = np.eye(self.n, dtype=np.uint8)
        if not np.array_equal((symp @ lam @ symp.T) & 1, lam):
            raise ValueError("matrix violates the symplectic form condition")
        symp.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "symplectic", symp)
        object.__setattr__(self, "phases", ph)

    def key(self) -> bytes:
        """Canonical byte key (used to bin samples into group elements)."""
        return np.packbits(
            np.concatenate([self.symplectic.ravel(), self.phases])
        ).tobytes()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "symplectic": np.packbits(self.symplectic.ravel()).tobytes().hex(),
            "phases": np.packbits(self.phases).tobytes().hex(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CliffordTableau":
        n = d["n"]
        nn = 2 * n
        symp = np.unpackbits(
            np.frombuffer(bytes.fromhex(d["symplectic"]), dtype=np.uint8),
            count=nn * nn,
        ).reshape(nn, nn)
        ph = np.unpackbits(
            np.frombuffer(bytes.fromhex(d["phases"]), dtype=np.uint8), count=nn
        )
        return cls(n, symp, ph)


def identity_tableau(n: int) -> CliffordTableau:
    return CliffordTableau(n, np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, np.uint8))


def sample_uniform_clifford(n: int, rng: RandomStream) -> CliffordTableau:
    """Exactly uniform over the Clifford group modulo global phase."""
    if n < 1:
        raise ValueError("need n >= 1")
    idx = rng.randint_below(symplectic_group_order(n))
    symp = symplectic_from_index(idx, n)
    phases = rng.gen.integers(0, 2, size=2 * n, dtype=np.uint8)
    return CliffordTableau(n, symp, phases)


_ENUM_CAP = 2


def enumerate_cliffords(n: int):
    """Yield every tableau (mod phase) once; feasible only for n <= 2."""
    if n > _ENUM_CAP:
        raise ValueError(f"enumeration supported only for n <= {_ENUM_CAP}")
    nn = 2 * n
    for idx in range(symplectic_group_order(n)):
        symp = symplectic_from_index(idx, n)
        for ph in range(1 << nn):
            phases = np.array([(ph >> b) & 1 for b in range(nn)], dtype=np.uint8)
            yield CliffordTableau(n, symp, phases)


# ---------------------------------------------------------------------------
# dense synthesis


def _row_action(c: CliffordTableau, row: int, arange: np.ndarray):
    """Permutation and per-index phase of the Hermitian Pauli in a tableau row."""
    n = c.n
    x_bits = c.symplectic[row, :n]
    z_bits = c.symplectic[row, n:]
    x_int = 0
    z_int = 0
    for q in range(n):
        x_int |= int(x_bits[q]) << (n - 1 - q)
        z_int |= int(z_bits[q]) << (n - 1 - q)
    const = (-1.0) ** int(c.phases[row]) * (1j) ** int((x_bits @ z_bits) % 4)
    par = np.bitwise_count(arange & np.uint64(z_int)).astype(np.int64) & 1
    return arange ^ x_int, const * (1.0 - 2.0 * par)


def tableau_to_unitary(c: CliffordTableau) -> UnitaryOp:
    """A dense unitary realizing the tableau's conjugation action.

    Unique up to global phase; the phase is pinned by making the
    largest-magnitude amplitude of column 0 real positive (first index
    wins ties).  Columns are built by applying X-row images in a
    doubling pattern, which keeps the work at O(4^n) numpy ops.
    """
    n = c.n
    if n > QUBIT_CAP:
        raise CapacityError(f"{n} qubits exceeds cap {QUBIT_CAP}")
    dim = 1 << n
    arange = np.arange(dim, dtype=np.uint64)

    # column 0: project a basis seed onto the +1 stabilizer eigenspace
    actions = [_row_action(c, r, arange) for r in range(2 * n)]
    v0 = None
    for seed in range(dim):
        w = np.zeros(dim, dtype=np.complex128)
        w[seed] = 1.0
        for r in range(n, 2 * n):
            perm, ph = actions[r]
            w = 0.5 * (w + (ph * w)[perm])
        if np.vdot(w, w).real >= 0.9 / dim:
            v0 = w
            break
    if v0 is None:  # unreachable for a valid tableau
        raise RuntimeError("stabilizer projection found no support")
    top = np.argmax(np.abs(v0))
    v0 = v0 * (abs(v0[top]) / v0[top])
    v0 /= np.linalg.norm(v0)

    u = np.zeros((dim, dim), dtype=np.complex128)
    u[:, 0] = v0
    for b in range(n):
        perm, ph = actions[n - 1 - b]  # X image of the qubit at index bit b
        block = u[:, : 1 << b]
        u[perm, (1 << b) : (1 << (b + 1))] = ph[:, None] * block
    return UnitaryOp(n, u, validate=False)


# ---------------------------------------------------------------------------
# measurement


@dataclass(frozen=True)
class MeasurementRecord:
    """One Clifford-basis measurement: the basis tableau and the outcome index."""

    tableau: CliffordTableau
    outcome: int

    @property
    def n(self) -> int:
        return self.tableau.n

    def outcome_bits(self) -> str:
        return format(self.outcome, f"0{self.n}b")

    def to_dict(self) -> dict:
        d = self.tableau.to_dict()
        d["outcome"] = self.outcome
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementRecord":
        return cls(CliffordTableau.from_dict(d), int(d["outcome"]))


def measure_in_clifford_basis(
    s: PureState, c: CliffordTableau, rng: RandomStream
) -> MeasurementRecord:
    """Apply C, measure computationally, record (c, x).

    The implied post-measurement direction is C^dag |x>, available via
    measurement_direction().
    """
    if s.n != c.n:
        raise ValueError(f"dimension mismatch: state n={s.n}, tableau n={c.n}")
    u = tableau_to_unitary(c)
    probs = np.abs(u.mat @ s.amps) ** 2
    probs /= probs.sum()
    outcome = int(rng.gen.choice(s.dim, p=probs))
    return MeasurementRecord(c, outcome)


def measurement_direction(rec: MeasurementRecord) -> np.ndarray:
    """The unit vector C^dag |x| of a record, as amplitudes."""
    u = tableau_to_unitary(rec.tableau)
    return u.mat[rec.outcome, :].conj()
