"""Circuit blocks: data oracles, the comparator, and the loading pipelines.

The oracles XOR a stored column value into a target register, keyed on the
index register, so each one is its own inverse.  The comparator flips the
flag qubit exactly when data > reference; amplitude transduction sandwiches
it between Hadamard layers on the reference register to turn an n-bit
magnitude into the flag-1 amplitude magnitude / 2^n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DataAccessError,
    DomainError,
    LayoutError,
    LogicError,
    UnsupportedWidthError,
)
from .fixedpoint import QuantizedDataset
from .statevector import StateVector

MAX_GATE_LEVEL_WIDTH = 3

Gate = tuple
Wire = tuple


@dataclass(frozen=True)
class OracleSpec:
    """One data oracle: a dataset column and whether it serves signs or
    magnitudes."""

    dataset: QuantizedDataset
    feature: int
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ("sign", "magnitude"):
            raise DomainError(f"oracle kind must be 'sign' or 'magnitude', got {self.kind!r}")
        if not 0 <= self.feature < self.dataset.num_features:
            raise DomainError(
                f"feature {self.feature} out of range for "
                f"{self.dataset.num_features} features"
            )

    def table(self) -> np.ndarray:
        """XOR table over the full index space, zero-padded past the data."""
        size = 1 << self.dataset.index_qubits
        out = np.zeros(size, dtype=np.int64)
        if self.kind == "magnitude":
            out[: self.dataset.num_rows] = self.dataset.column_magnitudes(self.feature)
        else:
            out[: self.dataset.num_rows] = self.dataset.column_signs(self.feature)
        return out


@dataclass(frozen=True)
class ComparatorBackend:
    """How the comparator is realized: 'functional' permutes labels directly,
    'gate-level' runs the reversible ripple-carry circuit (width <= 3)."""

    mode: str = "functional"

    def __post_init__(self) -> None:
        if self.mode not in ("functional", "gate-level"):
            raise DomainError(
                f"comparator mode must be 'functional' or 'gate-level', got {self.mode!r}"
            )


FUNCTIONAL = ComparatorBackend("functional")
GATE_LEVEL = ComparatorBackend("gate-level")


def _check_dataset_layout(state: StateVector, dataset: QuantizedDataset) -> None:
    layout = state.layout
    if layout.data_width != dataset.bits:
        raise LayoutError(
            f"layout data width {layout.data_width} != dataset bits {dataset.bits}"
        )
    if layout.index_width != dataset.index_qubits:
        raise LayoutError(
            f"layout index width {layout.index_width} != required "
            f"{dataset.index_qubits}"
        )


def _check_index_support(state: StateVector, dataset: QuantizedDataset) -> None:
    rows = dataset.num_rows
    size = 1 << state.layout.index_width
    if rows == size:
        return
    tail = float(state.marginal(["index"])[rows:].sum())
    if tail > 1e-12:
        raise DataAccessError(
            f"population {tail:.3e} on indices >= {rows} would query the "
            "oracle outside the dataset"
        )


def oracle_apply(state: StateVector, spec: OracleSpec) -> None:
    """XOR the column value for each index into the data or sign register."""
    _check_dataset_layout(state, spec.dataset)
    _check_index_support(state, spec.dataset)
    target = "data" if spec.kind == "magnitude" else "sign"
    kernels.xor_indexed(
        state.amps,
        state.layout.offset("index"),
        state.layout.index_width,
        spec.table(),
        state.layout.offset(target),
    )


def comparator_gates(width: int) -> list[Gate]:
    """Reversible ripple-carry comparator as a flat gate list.

    Wires are symbolic: ("a", i) and ("b", i) for the operand bits (LSB
    first), ("anc", 0) for one work qubit that starts and ends in |0>, and
    ("flag", 0) for the target.  The b operand is ones-complemented, a MAJ
    ladder computes the carry of a + ~b, the carry (which reads a > b) is
    copied onto the flag, and everything else is uncomputed.
    """
    if not 1 <= width <= MAX_GATE_LEVEL_WIDTH:
        raise UnsupportedWidthError(
            f"gate-level comparator supports widths 1..{MAX_GATE_LEVEL_WIDTH}, "
            f"got {width}"
        )
    complement = [("x", ("b", i)) for i in range(width)]
    carry_in = [("anc", 0)] + [("a", i) for i in range(width - 1)]
    ladder: list[Gate] = []
    for i in range(width):
        a, b, c = ("a", i), ("b", i), carry_in[i]
        ladder += [("cx", a, b), ("cx", a, c), ("ccx", c, b, a)]
    gates = list(complement)
    gates += ladder
    gates.append(("cx", ("a", width - 1), ("flag", 0)))
    gates += reversed(ladder)  # x, cx, ccx are involutions
    gates += complement
    return gates


def apply_gate_list(amps: np.ndarray, gates: list[Gate], positions: dict) -> None:
    """Run x/cx/ccx gates on a raw amplitude array.

    ``positions`` maps symbolic wires to qubit numbers.
    """
    for gate in gates:
        name, wires = gate[0], gate[1:]
        bits = [positions[w] for w in wires]
        if name == "x":
            kernels.controlled_bit_flip(amps, 0, bits[0])
        elif name == "cx":
            kernels.controlled_bit_flip(amps, 1 << bits[0], bits[1])
        elif name == "ccx":
            kernels.controlled_bit_flip(amps, (1 << bits[0]) | (1 << bits[1]), bits[2])
        else:
            raise LogicError(f"unknown gate {name!r}")


def comparator_apply(
    state: StateVector,
    backend: ComparatorBackend = FUNCTIONAL,
    a_register: str = "data",
    b_register: str = "reference",
) -> None:
    """Flip the flag qubit wherever a_register > b_register (unsigned).

    Both operand registers keep their values.  The gate-level backend borrows
    the sign qubit as its work wire, so the sign register must be
    unpopulated when it runs.
    """
    layout = state.layout
    width = layout.width(a_register)
    if layout.width(b_register) != width:
        raise LayoutError(
            f"comparator operands must share a width, got "
            f"{width} and {layout.width(b_register)}"
        )
    if backend.mode == "functional":
        kernels.comparator_flip(
            state.amps,
            layout.offset(a_register),
            layout.offset(b_register),
            width,
            layout.offset("flag"),
        )
        return
    if state.probability_of({"sign": 0}) < 1.0 - 1e-12:
        raise LogicError("gate-level comparator needs the sign qubit free")
    positions = {("anc", 0): layout.offset("sign"), ("flag", 0): layout.offset("flag")}
    for i in range(width):
        positions[("a", i)] = layout.offset(a_register) + i
        positions[("b", i)] = layout.offset(b_register) + i
    apply_gate_list(state.amps, comparator_gates(width), positions)


def amplitude_transduction(
    state: StateVector,
    spec: OracleSpec,
    backend: ComparatorBackend = FUNCTIONAL,
) -> None:
    """Write each index's magnitude into the flag-1 amplitude.

    Starting from population only on the index register, the flag-1,
    reference-0 slice ends up carrying amplitude magnitude_i / 2^n per index
    i, with the leftover weight parked on reference != 0 ("garbage") states.
    """
    if spec.kind != "magnitude":
        raise DomainError("amplitude transduction takes a magnitude oracle")
    clean = state.probability_of({"data": 0, "reference": 0, "flag": 0})
    if clean < 1.0 - 1e-12:
        raise LogicError(
            "data, reference, and flag registers must be unpopulated "
            f"(found weight {1.0 - clean:.3e})"
        )
    oracle_apply(state, spec)
    state.apply_hadamard_layer("reference")
    comparator_apply(state, backend)
    state.apply_hadamard_layer("reference")
    oracle_apply(state, spec)


def signed_load(state: StateVector, dataset: QuantizedDataset, *features: int) -> None:
    """Fold the sign of one or two features into the flag-1 amplitudes.

    Sign oracles XOR the sign bits into the sign register (two features
    accumulate the parity, which is the sign of the product), a CZ between
    sign and flag applies the phase, and the oracles uncompute themselves.
    """
    if not 1 <= len(features) <= 2:
        raise DomainError(f"signed load takes one or two features, got {len(features)}")
    specs = [OracleSpec(dataset, j, "sign") for j in features]
    for spec in specs:
        oracle_apply(state, spec)
    state.apply_cz(state.layout.offset("sign"), state.layout.offset("flag"))
    for spec in reversed(specs):
        oracle_apply(state, spec)
