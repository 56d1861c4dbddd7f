"""Signed fixed-point quantization of real data into (sign, magnitude) pairs.

A value v in (-1, 1) is stored as a sign bit and an n-bit magnitude so that
the decoded number is (-1)^sign * magnitude / 2^n.  Decoding is exact in
binary floating point for n <= 16, so quantize(decode(v)) round-trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FormatError

MAX_BITS = 16


@dataclass(frozen=True)
class FixedPointValue:
    """One quantized number: sign bit, n-bit magnitude, and the width n."""

    sign: int
    magnitude: int
    bits: int

    def __post_init__(self) -> None:
        if not 1 <= self.bits <= MAX_BITS:
            raise DomainError(f"bits must be in [1, {MAX_BITS}], got {self.bits}")
        if self.sign not in (0, 1):
            raise DomainError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.magnitude < (1 << self.bits):
            raise DomainError(
                f"magnitude {self.magnitude} out of range for {self.bits} bits"
            )
        if self.magnitude == 0 and self.sign == 1:
            # normalize negative zero so equal values compare equal
            object.__setattr__(self, "sign", 0)

    def decode(self) -> float:
        return (-1.0 if self.sign else 1.0) * self.magnitude / (1 << self.bits)


def _quantize_parts(value: float, bits: int) -> tuple[int, int, bool]:
    if not 1 <= bits <= MAX_BITS:
        raise DomainError(f"bits must be in [1, {MAX_BITS}], got {bits}")
    if not math.isfinite(value) or abs(value) >= 1.0:
        raise DomainError(f"value must lie in (-1, 1), got {float(value)!r}")
    scaled = abs(value) * (1 << bits)
    # round to nearest, ties away from zero
    magnitude = int(math.floor(scaled + 0.5))
    clamped = magnitude >= (1 << bits)
    if clamped:
        magnitude = (1 << bits) - 1
    sign = 1 if (value < 0.0 and magnitude > 0) else 0
    return sign, magnitude, clamped


def quantize(value: float, bits: int) -> FixedPointValue:
    """Round a real value in (-1, 1) to the nearest n-bit fixed-point number.

    Ties round away from zero; magnitudes that would round up to exactly 1.0
    are clamped to the largest representable value (2^n - 1) / 2^n.
    """
    sign, magnitude, _ = _quantize_parts(value, bits)
    return FixedPointValue(sign, magnitude, bits)


def decode(value: FixedPointValue) -> float:
    return value.decode()


@dataclass(frozen=True)
class QuantizedDataset:
    """An M x D grid of fixed-point values stored as sign and magnitude arrays.

    ``clamped`` lists (row, column) cells whose magnitude saturated during
    quantization, for reporting at ingestion time.
    """

    signs: np.ndarray
    magnitudes: np.ndarray
    bits: int
    clamped: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        signs = np.ascontiguousarray(self.signs, dtype=np.uint8)
        mags = np.ascontiguousarray(self.magnitudes, dtype=np.int64)
        if signs.ndim != 2 or mags.shape != signs.shape:
            raise FormatError("signs and magnitudes must be equal-shape 2-D arrays")
        rows, cols = signs.shape
        if rows < 1 or cols < 1:
            raise FormatError(f"dataset must be non-empty, got shape {signs.shape}")
        if not 1 <= self.bits <= MAX_BITS:
            raise DomainError(f"bits must be in [1, {MAX_BITS}], got {self.bits}")
        if signs.max(initial=0) > 1:
            raise DomainError("sign entries must be 0 or 1")
        if mags.min(initial=0) < 0 or mags.max(initial=0) >= (1 << self.bits):
            raise DomainError(f"magnitudes out of range for {self.bits} bits")
        signs = np.where(mags == 0, 0, signs).astype(np.uint8)
        signs.setflags(write=False)
        mags.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "magnitudes", mags)

    @property
    def num_rows(self) -> int:
        return self.signs.shape[0]

    @property
    def num_features(self) -> int:
        return self.signs.shape[1]

    @property
    def index_qubits(self) -> int:
        """Qubits needed to address every row: ceil(log2 M), zero for M = 1."""
        return (self.num_rows - 1).bit_length()

    def value(self, row: int, col: int) -> FixedPointValue:
        return FixedPointValue(
            int(self.signs[row, col]), int(self.magnitudes[row, col]), self.bits
        )

    def decoded(self) -> np.ndarray:
        """The dataset as plain floats, exact for every representable value."""
        scale = 1.0 / (1 << self.bits)
        out = self.magnitudes.astype(np.float64) * scale
        np.negative(out, where=self.signs.astype(bool), out=out)
        return out

    def column_magnitudes(self, col: int) -> np.ndarray:
        return self.magnitudes[:, col]

    def column_signs(self, col: int) -> np.ndarray:
        return self.signs[:, col]


def quantize_dataset(raw, bits: int) -> QuantizedDataset:
    """Quantize a rectangular grid of reals in (-1, 1) to a QuantizedDataset.

    Out-of-range or non-finite entries raise DomainError naming the cell.
    """
    grid = np.asarray(raw, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise FormatError(f"expected a non-empty 2-D grid, got shape {grid.shape}")
    rows, cols = grid.shape
    signs = np.zeros((rows, cols), dtype=np.uint8)
    mags = np.zeros((rows, cols), dtype=np.int64)
    clamped: list[tuple[int, int]] = []
    for i in range(rows):
        for j in range(cols):
            try:
                sign, magnitude, was_clamped = _quantize_parts(grid[i, j], bits)
            except DomainError as exc:
                raise DomainError(f"row {i}, column {j}: {exc}") from None
            signs[i, j] = sign
            mags[i, j] = magnitude
            if was_clamped:
                clamped.append((i, j))
    return QuantizedDataset(signs, mags, bits, tuple(clamped))
