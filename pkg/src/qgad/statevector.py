"""Dense statevector engine over a five-register qubit layout.

Basis labels pack the registers |index>|sign>|data>|reference>|flag> with
the flag qubit at bit 0 and the index register in the top bits, so the ket
reads left to right from most to least significant.  Amplitudes live in one
contiguous complex128 array of length 2**q; gate work is delegated to the
kernels backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import (
    DomainError,
    LayoutError,
    LogicError,
    PostselectionImpossibleError,
    ResourceError,
)
from .fixedpoint import MAX_BITS

DEFAULT_QUBIT_CAP = 26
_POSTSELECT_EPS = 1e-14

# ket order, most significant register first
REGISTERS = ("index", "sign", "data", "reference", "flag")


@dataclass(frozen=True)
class RegisterLayout:
    """Widths and bit positions of the five circuit registers.

    The data and reference registers share one width so they can feed the
    comparator; sign and flag are single qubits.  An index width of zero is
    allowed and addresses a single data point.
    """

    index_width: int
    data_width: int

    def __post_init__(self) -> None:
        if self.index_width < 0:
            raise LayoutError(f"index width must be >= 0, got {self.index_width}")
        if not 1 <= self.data_width <= MAX_BITS:
            raise LayoutError(
                f"data width must be in [1, {MAX_BITS}], got {self.data_width}"
            )

    @property
    def sign_width(self) -> int:
        return 1

    @property
    def reference_width(self) -> int:
        return self.data_width

    @property
    def flag_width(self) -> int:
        return 1

    @property
    def num_qubits(self) -> int:
        return self.index_width + 2 * self.data_width + 2

    def width(self, register: str) -> int:
        try:
            return {
                "index": self.index_width,
                "sign": 1,
                "data": self.data_width,
                "reference": self.data_width,
                "flag": 1,
            }[register]
        except KeyError:
            raise LayoutError(f"unknown register {register!r}") from None

    def offset(self, register: str) -> int:
        n = self.data_width
        try:
            return {
                "flag": 0,
                "reference": 1,
                "data": 1 + n,
                "sign": 1 + 2 * n,
                "index": 2 + 2 * n,
            }[register]
        except KeyError:
            raise LayoutError(f"unknown register {register!r}") from None

    def mask(self, register: str) -> int:
        return ((1 << self.width(register)) - 1) << self.offset(register)

    def label(
        self,
        index: int = 0,
        sign: int = 0,
        data: int = 0,
        reference: int = 0,
        flag: int = 0,
    ) -> int:
        """Pack register values into a basis label."""
        out = 0
        for register, value in (
            ("index", index),
            ("sign", sign),
            ("data", data),
            ("reference", reference),
            ("flag", flag),
        ):
            width = self.width(register)
            if value < 0 or value >= (1 << width):
                raise DomainError(f"{register} value {value} exceeds width {width}")
            out |= value << self.offset(register)
        return out


def layout_for(index_width: int, data_width: int) -> RegisterLayout:
    return RegisterLayout(index_width, data_width)


@dataclass
class MeasurementOutcome:
    """Result of a measurement: exact runs fill probability (and the
    post-measurement state for postselection), sampling runs fill counts."""

    probability: float | None = None
    collapsed: "StateVector | None" = None
    counts: dict[int, int] | None = None


class StateVector:
    """Mutable dense state over a RegisterLayout."""

    def __init__(self, layout: RegisterLayout, amps: np.ndarray):
        if amps.shape != (1 << layout.num_qubits,):
            raise LayoutError(
                f"amplitude array of length {amps.shape} does not match "
                f"{layout.num_qubits} qubits"
            )
        self.layout = layout
        self._amps = np.ascontiguousarray(amps, dtype=np.complex128)

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self._amps.copy())

    def norm(self) -> float:
        return float(np.sqrt(kernels.pattern_probability(self._amps, 0, 0)))

    def amplitude(self, label: int) -> complex:
        return complex(self._amps[label])

    def _assert_unit(self) -> None:
        if __debug__:
            total = kernels.pattern_probability(self._amps, 0, 0)
            assert abs(total - 1.0) < 1e-12, f"norm drifted to {total}"

    # -- unitaries ---------------------------------------------------------

    def apply_uniform_index(self, num_points: int) -> None:
        """Load the uniform superposition over the first num_points indices.

        Requires a fresh index register (all population at index 0).  For a
        power of two this is a Hadamard on every index qubit; otherwise a
        self-inverse Householder reflection that exchanges |0> with the
        uniform vector.  Either way only the |0> row of the operator matters
        downstream, so observables do not depend on the completion.
        """
        self._check_uniform_args(num_points)
        mask = self.layout.mask("index")
        if kernels.pattern_probability(self._amps, mask, 0) < 1.0 - 1e-12:
            raise LogicError("index register is not fresh")
        self._uniform_index(num_points)

    def apply_uniform_index_inverse(self, num_points: int) -> None:
        """Undo apply_uniform_index (the loader is an involution)."""
        self._check_uniform_args(num_points)
        self._uniform_index(num_points)

    def _check_uniform_args(self, num_points: int) -> None:
        m = self.layout.index_width
        if not 1 <= num_points <= (1 << m):
            raise LayoutError(
                f"cannot spread {num_points} points over {m} index qubits"
            )

    def _uniform_index(self, num_points: int) -> None:
        m = self.layout.index_width
        if num_points == (1 << m):
            off = self.layout.offset("index")
            for k in range(m):
                kernels.hadamard(self._amps, off + k)
        else:
            # rank-1 Householder update on the index axis
            dim = 1 << m
            u = np.zeros(dim)
            u[:num_points] = 1.0 / np.sqrt(num_points)
            v = -u
            v[0] += 1.0
            w = v / np.linalg.norm(v)
            view = self._amps.reshape(dim, -1)
            view -= 2.0 * np.outer(w, w @ view)
        self._assert_unit()

    def apply_hadamard_layer(self, register: str) -> None:
        """Hadamard every qubit of the reference or flag register."""
        if register not in ("reference", "flag"):
            raise LayoutError(
                f"hadamard layer expects 'reference' or 'flag', got {register!r}"
            )
        off = self.layout.offset(register)
        for k in range(self.layout.width(register)):
            kernels.hadamard(self._amps, off + k)
        self._assert_unit()

    def apply_permutation(self, f: Callable[[int], int] | np.ndarray) -> None:
        """Apply a classical bijection f over basis labels.

        Accepts a callable (tabulated per label, intended for small states)
        or a precomputed int64 permutation array.  Bijectivity is verified in
        debug mode for up to 16 qubits.
        """
        n = self._amps.shape[0]
        if callable(f):
            perm = np.fromiter((f(b) for b in range(n)), dtype=np.int64, count=n)
        else:
            perm = np.ascontiguousarray(f, dtype=np.int64)
            if perm.shape != (n,):
                raise LayoutError(f"permutation length {perm.shape} != {n}")
        if __debug__ and self.num_qubits <= 16:
            if perm.min() < 0 or perm.max() >= n:
                raise LogicError("permutation maps outside the label range")
            if np.bincount(perm, minlength=n).max() != 1:
                raise LogicError("permutation is not a bijection")
        self._amps = kernels.permute(self._amps, perm)
        self._assert_unit()

    def apply_cz(self, control: int, target: int) -> None:
        """Controlled-Z between two qubits (symmetric in its arguments)."""
        q = self.num_qubits
        if not (0 <= control < q and 0 <= target < q) or control == target:
            raise LayoutError(f"bad CZ qubits ({control}, {target}) for q={q}")
        kernels.phase_flip(self._amps, (1 << control) | (1 << target))
        self._assert_unit()

    def apply_x(self, qubit: int) -> None:
        """Pauli X on one qubit."""
        if not 0 <= qubit < self.num_qubits:
            raise LayoutError(f"qubit {qubit} out of range")
        kernels.controlled_bit_flip(self._amps, 0, qubit)
        self._assert_unit()

    # -- measurement -------------------------------------------------------

    def _pattern(self, pattern: Mapping[str, int]) -> tuple[int, int]:
        if not pattern:
            raise LayoutError("empty measurement pattern")
        mask = 0
        value = 0
        for register, want in pattern.items():
            width = self.layout.width(register)
            if want < 0 or want >= (1 << width):
                raise DomainError(
                    f"value {want} does not fit register {register!r} ({width} bits)"
                )
            mask |= self.layout.mask(register)
            value |= want << self.layout.offset(register)
        return mask, value

    def probability_of(self, pattern: Mapping[str, int]) -> float:
        """Probability that the listed registers read the given values."""
        mask, value = self._pattern(pattern)
        return kernels.pattern_probability(self._amps, mask, value)

    def postselect(self, pattern: Mapping[str, int]) -> MeasurementOutcome:
        """Project onto a measurement pattern and renormalize.

        Returns the pattern probability and the collapsed state; the original
        state is left untouched.
        """
        mask, value = self._pattern(pattern)
        prob = kernels.pattern_probability(self._amps, mask, value)
        if prob < _POSTSELECT_EPS:
            raise PostselectionImpossibleError(
                f"pattern {dict(pattern)!r} has probability {prob:.3e}"
            )
        kept = self._amps.copy()
        kernels.collapse(kept, mask, value, 1.0 / np.sqrt(prob))
        collapsed = StateVector(self.layout, kept)
        collapsed._assert_unit()
        return MeasurementOutcome(probability=float(prob), collapsed=collapsed)

    def marginal(self, registers: Sequence[str]) -> np.ndarray:
        """Joint probability vector of the listed registers.

        Keys pack register values in the order given, first register in the
        most significant bits.
        """
        if not registers:
            raise LayoutError("no registers selected")
        if len(set(registers)) != len(registers):
            raise LayoutError(f"duplicate registers in {registers!r}")
        q = self.num_qubits
        probs = (self._amps.real**2 + self._amps.imag**2).reshape((2,) * q)
        sel_axes: list[int] = []
        for register in registers:
            off = self.layout.offset(register)
            width = self.layout.width(register)
            # axis q-1-p holds qubit p; register bits run MSB to LSB
            sel_axes.extend(q - 1 - p for p in range(off + width - 1, off - 1, -1))
        chosen = set(sel_axes)
        rest = [a for a in range(q) if a not in chosen]
        joint = probs.transpose(sel_axes + rest).reshape(1 << len(sel_axes), -1)
        return joint.sum(axis=1)

    def sample(
        self,
        registers: Sequence[str],
        shots: int,
        seed: int | np.random.Generator | None = None,
    ) -> MeasurementOutcome:
        """Draw repeated measurements of the listed registers.

        Counts are keyed by the packed register values (see marginal).  The
        same seed yields the same counts.
        """
        if shots < 1:
            raise DomainError(f"shots must be positive, got {shots}")
        dist = self.marginal(registers)
        dist = dist / dist.sum()
        rng = (
            seed
            if isinstance(seed, np.random.Generator)
            else np.random.default_rng(seed)
        )
        draw = rng.multinomial(shots, dist)
        counts = {int(k): int(c) for k, c in enumerate(draw) if c}
        return MeasurementOutcome(counts=counts)


def init_zero(
    layout: RegisterLayout, qubit_cap: int = DEFAULT_QUBIT_CAP
) -> StateVector:
    """All-zeros computational basis state, refusing layouts over the cap."""
    q = layout.num_qubits
    if q > qubit_cap:
        raise ResourceError(f"layout needs {q} qubits, cap is {qubit_cap}")
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(layout, amps)
