"""Dense statevector core: states, unitaries, Born sampling, norm utilities.

Everything downstream (Haar sampling, Clifford measurements, the attack
experiments) is built on the two value types here plus RandomStream, the
only source of randomness in the package.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

# Dense vectors above this qubit count are refused outright.
QUBIT_CAP = 24

NORM_ATOL = 1e-9
UNITARY_ATOL = 1e-8
EIG_MAG_ATOL = 1e-7

_MASK64 = (1 << 64) - 1


class CapacityError(ValueError):
    """Requested object exceeds the dense-simulation qubit cap."""


# ---------------------------------------------------------------------------
# seeded randomness


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finalizer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


class RandomStream:
    """Seeded PCG64 stream with deterministic child derivation.

    A child stream's seed is splitmix64(parent_seed XOR fnv1a64(label)),
    folded left to right over the labels, so that e.g.
    master.child("distinguish", trial) names the same stream on every
    run and on every worker.  Integer labels hash as 8 little-endian
    bytes, everything else as the UTF-8 bytes of str(label).
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed:#018x})"

    def child(self, *labels) -> "RandomStream":
        h = self.seed
        for lab in labels:
            if isinstance(lab, (int, np.integer)):
                raw = (int(lab) & _MASK64).to_bytes(8, "little")
            else:
                raw = str(lab).encode("utf-8")
            h = splitmix64(h ^ fnv1a64(raw))
        return RandomStream(h)

    def bits(self, k: int) -> int:
        """k uniform random bits as a non-negative int."""
        out = 0
        got = 0
        while got < k:
            take = min(32, k - got)
            out |= int(self.gen.integers(0, 1 << take)) << got
            got += take
        return out

    def randint_below(self, bound: int) -> int:
        """Unbiased draw from range(bound); bound may exceed 64 bits."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        k = bound.bit_length()
        while True:
            r = self.bits(k)
            if r < bound:
                return r


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class PureState:
    """Unit vector in (C^2)^{tensor n}, stored as 2^n dense amplitudes.

    Basis index convention: qubit 0 is the most significant bit of the
    index, matching np.kron order, so tensor(a, b) concatenates
    bitstrings a-first.
    """

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        if self.n > QUBIT_CAP:
            raise CapacityError(f"{self.n} qubits exceeds cap {QUBIT_CAP}")
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({1 << self.n},)"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {nrm!r} is not 1 within {NORM_ATOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amps) ** 2
        return p / p.sum()


def basis_state(n: int, index: int) -> PureState:
    """Computational basis state |index> on n qubits."""
    if not 0 <= index < (1 << n):
        raise ValueError(f"basis index {index} out of range for n={n}")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(n, amps)


def plus_state(n: int) -> PureState:
    """Uniform-superposition state on n qubits."""
    dim = 1 << n
    return PureState(n, np.full(dim, dim ** -0.5, dtype=np.complex128))


@dataclass(frozen=True)
class UnitaryOp:
    """Dense 2^n x 2^n unitary matrix.

    Pass validate=False only when the construction guarantees unitarity
    (e.g. tableau_to_unitary); the default re-checks U^dag U = I.
    """

    n: int
    mat: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        if self.n > QUBIT_CAP:
            raise CapacityError(f"{self.n} qubits exceeds cap {QUBIT_CAP}")
        mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        dim = 1 << self.n
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape}, expected ({dim}, {dim})")
        if validate:
            err = np.linalg.norm(mat.conj().T @ mat - np.eye(dim))
            if err > UNITARY_ATOL:
                raise ValueError(f"matrix unitarity defect {err:.3e} > {UNITARY_ATOL}")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return 1 << self.n


# ---------------------------------------------------------------------------
# operations


def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker product a (x) b; a's qubits become the high bits."""
    if a.n + b.n > QUBIT_CAP:
        raise CapacityError(f"{a.n}+{b.n} qubits exceeds cap {QUBIT_CAP}")
    return PureState(a.n + b.n, np.kron(a.amps, b.amps))


def apply(u: UnitaryOp, s: PureState) -> PureState:
    """Matrix-vector product u |s>."""
    if u.n != s.n:
        raise ValueError(f"dimension mismatch: unitary n={u.n}, state n={s.n}")
    return PureState(s.n, u.mat @ s.amps)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2."""
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")
    return min(abs(np.vdot(a.amps, b.amps)) ** 2, 1.0)


def sample_outcomes(s: PureState, rng: RandomStream, shots: int) -> np.ndarray:
    """Vector of `shots` Born-rule outcome indices."""
    p = s.probabilities()
    cdf = np.cumsum(p)
    u = rng.gen.random(shots)
    return np.searchsorted(cdf, u, side="right").clip(0, s.dim - 1)


def measure_computational(s: PureState, rng: RandomStream) -> str:
    """One Born-rule sample, returned as an n-bit string (qubit 0 first)."""
    idx = int(sample_outcomes(s, rng, 1)[0])
    return format(idx, f"0{s.n}b")


def frobenius_distance(u: UnitaryOp, v: UnitaryOp) -> float:
    """||U - V||_F."""
    if u.n != v.n:
        raise ValueError(f"dimension mismatch: n={u.n} vs n={v.n}")
    return float(np.linalg.norm(u.mat - v.mat))


def _segment_distance(a: complex, b: complex) -> float:
    """Distance from the origin to the segment [a, b]."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return abs(a)
    t = -(a.real * ab.real + a.imag * ab.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(a + t * ab)


def _hull_distance(points: np.ndarray) -> float:
    """Distance from the origin to the convex hull of complex points.

    Monotone-chain hull; returns 0 when the origin lies inside.
    """
    # collapse eigensolver noise so duplicates dedupe cleanly
    pts = sorted({(round(z.real, 12), round(z.imag, 12)) for z in points})
    if len(pts) == 1:
        return float(np.hypot(*pts[0]))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                (ax, ay), (bx, by) = out[-2], out[-1]
                if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(list(reversed(pts)))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2:
        a, b = hull
        return _segment_distance(complex(*a), complex(*b))

    edge_cross = [
        (bx - ax) * (0.0 - ay) - (by - ay) * (0.0 - ax)
        for (ax, ay), (bx, by) in zip(hull, hull[1:] + hull[:1])
    ]
    if all(c >= -1e-12 for c in edge_cross):
        return 0.0
    return min(
        _segment_distance(complex(*a), complex(*b))
        for a, b in zip(hull, hull[1:] + hull[:1])
    )


def diamond_distance_unitary(u: UnitaryOp, v: UnitaryOp) -> float:
    """Diamond distance between the channels U.U^dag and V.V^dag.

    Equals 2*sqrt(1 - d^2) where d is the distance from the origin to
    the polygon spanned by the eigenvalues of U V^dag; in particular it
    is insensitive to global phases.  Raises np.linalg.LinAlgError if
    the eigensolver fails to converge.
    """
    if u.n != v.n:
        raise ValueError(f"dimension mismatch: n={u.n} vs n={v.n}")
    lam = np.linalg.eigvals(u.mat @ v.mat.conj().T)
    mags = np.abs(lam)
    if np.any(np.abs(mags - 1.0) > EIG_MAG_ATOL):
        raise ValueError("eigenvalues of U V^dag stray from the unit circle")
    d = min(_hull_distance(lam), 1.0)
    return 2.0 * np.sqrt(max(0.0, 1.0 - d * d))
