"""Quantum statevector estimation pipeline for Gaussian anomaly detection.

Data is quantized to signed fixed point, loaded into amplitudes by
reversible circuits, and read back as means and covariances through
measurement probabilities and a Hadamard sign test; a classical Gaussian
scorer turns the fitted moments into anomaly verdicts.
"""

__version__ = "0.1.0"

from .errors import QgadError
from .estimators import EstimationBudget, EstimateReport, fit
from .fixedpoint import (
    FixedPointValue,
    QuantizedDataset,
    decode,
    quantize,
    quantize_dataset,
)
from .gad import GaussianModel, classical_fit, detect

__all__ = [
    "QgadError",
    "EstimationBudget",
    "EstimateReport",
    "fit",
    "FixedPointValue",
    "QuantizedDataset",
    "decode",
    "quantize",
    "quantize_dataset",
    "GaussianModel",
    "classical_fit",
    "detect",
    "__version__",
]
