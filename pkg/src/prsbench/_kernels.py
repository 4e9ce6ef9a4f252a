"""Statevector kernels for the {H, T, Tdg, CNOT} gate set.

Gates are encoded as parallel arrays (code, bit_a, bit_b): bit positions
index into the 2^n amplitudes (qubit j lives at bit n-1-j).  For CNOT,
bit_a is the control and bit_b the target; 1-qubit gates ignore bit_b.
The numba path and the numpy fallback perform identical arithmetic.
"""

from __future__ import annotations

import numpy as np

H_CODE, T_CODE, TDG_CODE, CNOT_CODE = 0, 1, 2, 3

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_T_PHASE = np.exp(0.25j * np.pi)

try:
    from numba import njit

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, kept for safety
    _HAS_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco


@njit(cache=True)
def _run_vector(amps, codes, bita, bitb):  # pragma: no cover - numba path
    dim = amps.shape[0]
    for g in range(codes.shape[0]):
        code = codes[g]
        a = 1 << bita[g]
        if code == 0:  # H
            for i in range(dim):
                if i & a == 0:
                    j = i | a
                    u = amps[i]
                    v = amps[j]
                    amps[i] = (u + v) * _INV_SQRT2
                    amps[j] = (u - v) * _INV_SQRT2
        elif code == 1:  # T
            for i in range(dim):
                if i & a:
                    amps[i] = amps[i] * _T_PHASE
        elif code == 2:  # Tdg
            for i in range(dim):
                if i & a:
                    amps[i] = amps[i] * np.conj(_T_PHASE)
        else:  # CNOT, a = control, b = target
            b = 1 << bitb[g]
            for i in range(dim):
                if (i & a) and (i & b == 0):
                    j = i | b
                    u = amps[i]
                    amps[i] = amps[j]
                    amps[j] = u


@njit(cache=True)
def _run_batch(states, codes, bita, bitb):  # pragma: no cover - numba path
    for s in range(states.shape[0]):
        _run_vector(states[s], codes[s], bita[s], bitb[s])


def _run_vector_py(amps, codes, bita, bitb):
    dim = amps.shape[0]
    idx = np.arange(dim)
    for g in range(codes.shape[0]):
        code = codes[g]
        a = 1 << int(bita[g])
        if code == H_CODE:
            lo = idx[(idx & a) == 0]
            hi = lo | a
            u = amps[lo].copy()
            v = amps[hi]
            amps[lo] = (u + v) * _INV_SQRT2
            amps[hi] = (u - v) * _INV_SQRT2
        elif code == T_CODE:
            sel = (idx & a) != 0
            amps[sel] *= _T_PHASE
        elif code == TDG_CODE:
            sel = (idx & a) != 0
            amps[sel] *= np.conj(_T_PHASE)
        else:
            b = 1 << int(bitb[g])
            lo = idx[((idx & a) != 0) & ((idx & b) == 0)]
            hi = lo | b
            u = amps[lo].copy()
            amps[lo] = amps[hi]
            amps[hi] = u


def run_circuit(amps: np.ndarray, codes, bita, bitb) -> None:
    """Apply one gate list to one amplitude vector, in place."""
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    bita = np.ascontiguousarray(bita, dtype=np.uint8)
    bitb = np.ascontiguousarray(bitb, dtype=np.uint8)
    if _HAS_NUMBA:
        _run_vector(amps, codes, bita, bitb)
    else:
        _run_vector_py(amps, codes, bita, bitb)


def run_circuit_batch(states: np.ndarray, codes, bita, bitb) -> None:
    """Apply per-row gate lists to a (count, dim) amplitude array, in place."""
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    bita = np.ascontiguousarray(bita, dtype=np.uint8)
    bitb = np.ascontiguousarray(bitb, dtype=np.uint8)
    if _HAS_NUMBA:
        _run_batch(states, codes, bita, bitb)
    else:
        for s in range(states.shape[0]):
            _run_vector_py(states[s], codes[s], bita[s], bitb[s])
