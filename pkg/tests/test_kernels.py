"""Backend-parity and semantics checks for the state-vector kernels.

Every test runs against each available backend; the parity test pins the
compiled extension against the numpy fallback on identical inputs.
"""

import numpy as np
import pytest

from qgad import kernels

BACKENDS = sorted(kernels.available_backends())


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.available_backends()[request.param]


def random_state(qubits, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << qubits) + 1j * rng.normal(size=1 << qubits)
    return np.ascontiguousarray(amps / np.linalg.norm(amps))


def labels(qubits):
    return np.arange(1 << qubits, dtype=np.int64)


def test_hadamard_matches_dense_matrix(backend):
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    eye = np.eye(2)
    for qubit in range(3):
        state = random_state(3, 11 + qubit)
        # qubit k toggles bit k of the label, so the kron slot counts from the right
        mats = [h if k == qubit else eye for k in reversed(range(3))]
        dense = mats[0]
        for m in mats[1:]:
            dense = np.kron(dense, m)
        got = state.copy()
        backend.hadamard(got, qubit)
        np.testing.assert_allclose(got, dense @ state, atol=1e-14)


def test_hadamard_is_an_involution(backend):
    state = random_state(5, 3)
    got = state.copy()
    backend.hadamard(got, 2)
    backend.hadamard(got, 2)
    np.testing.assert_allclose(got, state, atol=1e-14)


def test_controlled_bit_flip_permutes_labels(backend):
    state = random_state(4, 19)
    cases = [
        (0, 2),          # plain X
        (1 << 3, 0),     # CNOT
        (0b1010, 0),     # Toffoli on bits 1 and 3
    ]
    for control_mask, target in cases:
        got = state.copy()
        backend.controlled_bit_flip(got, control_mask, target)
        lab = labels(4)
        dest = np.where((lab & control_mask) == control_mask, lab ^ (1 << target), lab)
        expected = np.empty_like(state)
        expected[dest] = state
        np.testing.assert_array_equal(got, expected)
        backend.controlled_bit_flip(got, control_mask, target)
        np.testing.assert_array_equal(got, state)


def test_phase_flip(backend):
    state = random_state(4, 23)
    mask = 0b0101
    got = state.copy()
    backend.phase_flip(got, mask)
    signs = np.where((labels(4) & mask) == mask, -1.0, 1.0)
    np.testing.assert_array_equal(got, state * signs)


def test_xor_indexed_semantics_and_involution(backend):
    state = random_state(6, 31)
    table = np.array([3, 0, 1, 2], dtype=np.int64)
    src_offset, src_width, tgt_offset = 4, 2, 1
    got = state.copy()
    backend.xor_indexed(got, src_offset, src_width, table, tgt_offset)
    lab = labels(6)
    src = (lab >> src_offset) & 3
    dest = lab ^ (table[src] << tgt_offset)
    expected = np.empty_like(state)
    expected[dest] = state
    np.testing.assert_array_equal(got, expected)
    backend.xor_indexed(got, src_offset, src_width, table, tgt_offset)
    np.testing.assert_array_equal(got, state)


def test_comparator_flip_truth_table(backend):
    width = 2
    qubits = 2 * width + 1
    state = random_state(qubits, 37)
    got = state.copy()
    backend.comparator_flip(got, 1, 1 + width, width, 0)
    lab = labels(qubits)
    a = (lab >> 1) & 3
    b = (lab >> (1 + width)) & 3
    dest = np.where(a > b, lab ^ 1, lab)
    expected = np.empty_like(state)
    expected[dest] = state
    np.testing.assert_array_equal(got, expected)


def test_pattern_probability(backend):
    state = random_state(5, 41)
    mask, value = 0b01100, 0b00100
    got = backend.pattern_probability(state, mask, value)
    keep = (labels(5) & mask) == value
    expected = float(np.sum(np.abs(state[keep]) ** 2))
    assert got == pytest.approx(expected, abs=1e-15)
    assert backend.pattern_probability(state, 0, 0) == pytest.approx(1.0, abs=1e-12)


def test_collapse(backend):
    state = random_state(5, 43)
    mask, value = 0b00011, 0b00001
    p = backend.pattern_probability(state, mask, value)
    got = state.copy()
    backend.collapse(got, mask, value, 1.0 / np.sqrt(p))
    keep = (labels(5) & mask) == value
    assert np.all(got[~keep] == 0)
    np.testing.assert_allclose(got[keep], state[keep] / np.sqrt(p), atol=1e-15)
    assert backend.pattern_probability(got, 0, 0) == pytest.approx(1.0, abs=1e-12)


def test_permute(backend):
    state = random_state(4, 47)
    rng = np.random.default_rng(48)
    perm = rng.permutation(1 << 4).astype(np.int64)
    got = backend.permute(state.copy(), perm)
    expected = np.empty_like(state)
    expected[perm] = state
    np.testing.assert_array_equal(got, expected)
    inverse = np.argsort(perm).astype(np.int64)
    np.testing.assert_array_equal(backend.permute(got, inverse), state)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="only one backend available")
def test_backends_agree_on_a_mixed_program():
    table = np.array([1, 2, 3, 0, 5, 7, 6, 4], dtype=np.int64)
    results = {}
    for name, mod in kernels.available_backends().items():
        amps = random_state(7, 53)
        mod.hadamard(amps, 0)
        mod.hadamard(amps, 4)
        mod.controlled_bit_flip(amps, 1 << 4, 2)
        mod.xor_indexed(amps, 4, 3, table, 1)
        mod.comparator_flip(amps, 1, 4, 3, 0)
        mod.phase_flip(amps, 0b1000001)
        mod.collapse(amps, 1, 0, 1.0)
        results[name] = (amps, mod.pattern_probability(amps, 0b11, 0b10))
    states = list(results.values())
    for (amps, prob) in states[1:]:
        np.testing.assert_allclose(amps, states[0][0], atol=1e-15)
        assert prob == pytest.approx(states[0][1], abs=1e-15)


def test_module_exports_all_kernels():
    assert kernels.backend_name in BACKENDS
    for kernel in (
        "hadamard",
        "controlled_bit_flip",
        "phase_flip",
        "xor_indexed",
        "comparator_flip",
        "pattern_probability",
        "collapse",
        "permute",
    ):
        assert callable(getattr(kernels, kernel))
