"""Pure-numpy amplitude kernels.

Fallback backend with the same contract as the compiled module: every
function takes a C-contiguous complex128 array of length 2**q whose basis
labels carry qubit 0 as the least significant bit.  In-place kernels mutate
``amps``; ``permute`` returns a new array.

Vectorized with whole-array temporaries, so peak memory is a few copies of
the state.  The compiled backend streams in place and should be preferred
for large q.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_SQRT_HALF = 1.0 / np.sqrt(2.0)


@lru_cache(maxsize=1)
def _labels(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def _axis_index(num_qubits: int, mask: int, value: int) -> tuple:
    # axis 0 of the reshaped state is the most significant qubit
    idx = []
    for pos in reversed(range(num_qubits)):
        if (mask >> pos) & 1:
            idx.append((value >> pos) & 1)
        else:
            idx.append(slice(None))
    return tuple(idx)


def _num_qubits(amps: np.ndarray) -> int:
    return int(amps.shape[0]).bit_length() - 1


def hadamard(amps: np.ndarray, qubit: int) -> None:
    """Apply a Hadamard butterfly to one qubit, in place."""
    half = 1 << qubit
    view = amps.reshape(-1, 2, half)
    low = view[:, 0, :].copy()
    high = view[:, 1, :]
    view[:, 0, :] = (low + high) * _SQRT_HALF
    view[:, 1, :] = (low - high) * _SQRT_HALF


def controlled_bit_flip(amps: np.ndarray, control_mask: int, target_bit: int) -> None:
    """Flip ``target_bit`` on every basis state whose control bits are all 1.

    Covers X (empty mask), CNOT, and Toffoli.  The mask must not contain the
    target bit.
    """
    q = _num_qubits(amps)
    view = amps.reshape((2,) * q)
    sel0 = [slice(None)] * q
    for pos in range(q):
        if (control_mask >> pos) & 1:
            sel0[q - 1 - pos] = 1
    sel1 = list(sel0)
    sel0[q - 1 - target_bit] = 0
    sel1[q - 1 - target_bit] = 1
    sel0 = tuple(sel0)
    sel1 = tuple(sel1)
    low = view[sel0].copy()
    view[sel0] = view[sel1]
    view[sel1] = low


def phase_flip(amps: np.ndarray, mask: int) -> None:
    """Negate the amplitude of every basis state with all ``mask`` bits set."""
    q = _num_qubits(amps)
    view = amps.reshape((2,) * q)
    view[_axis_index(q, mask, mask)] *= -1.0


def xor_indexed(
    amps: np.ndarray,
    src_offset: int,
    src_width: int,
    table: np.ndarray,
    tgt_offset: int,
) -> None:
    """XOR ``table[src_bits]`` into the bits at ``tgt_offset``, in place.

    ``table`` has 2**src_width non-negative entries; shifted entries must not
    overlap the source bits, which makes the map an involution.
    """
    table = np.asarray(table, dtype=np.int64)
    labels = _labels(amps.shape[0])
    src = (labels >> src_offset) & ((1 << src_width) - 1)
    dest = labels ^ (table[src] << tgt_offset)
    moved = np.empty_like(amps)
    moved[dest] = amps
    amps[:] = moved


def comparator_flip(
    amps: np.ndarray, a_offset: int, b_offset: int, width: int, flag_bit: int
) -> None:
    """Flip the flag bit on every basis state where register a > register b."""
    labels = _labels(amps.shape[0])
    flag = 1 << flag_bit
    low = labels[(labels & flag) == 0]
    mask = (1 << width) - 1
    greater = low[((low >> a_offset) & mask) > ((low >> b_offset) & mask)]
    partner = greater | flag
    tmp = amps[greater].copy()
    amps[greater] = amps[partner]
    amps[partner] = tmp


def pattern_probability(amps: np.ndarray, mask: int, value: int) -> float:
    """Total probability of basis states matching ``value`` on ``mask`` bits."""
    q = _num_qubits(amps)
    view = amps.reshape((2,) * q)[_axis_index(q, mask, value)]
    return float(np.sum(view.real**2 + view.imag**2))


def collapse(amps: np.ndarray, mask: int, value: int, scale: float) -> None:
    """Zero non-matching amplitudes and rescale the matching ones, in place."""
    q = _num_qubits(amps)
    idx = _axis_index(q, mask, value)
    view = amps.reshape((2,) * q)
    kept = view[idx] * scale
    amps[:] = 0.0
    view[idx] = kept


def permute(amps: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Return the state with amplitude of label b moved to label perm[b]."""
    out = np.empty_like(amps)
    out[perm] = amps
    return out
