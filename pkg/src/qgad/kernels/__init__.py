"""Amplitude kernels with a compiled core and a numpy fallback.

The backend is chosen once at import time.  Set QGAD_KERNELS to "compiled",
"numpy", or "auto" (default) to override; "auto" prefers the compiled
extension and silently falls back to numpy when it is not built.
"""

from __future__ import annotations

import importlib
import os

from . import _numpy

_choice = os.environ.get("QGAD_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "compiled", "numpy"):
    raise ImportError(
        f"QGAD_KERNELS must be 'auto', 'compiled', or 'numpy', got {_choice!r}"
    )

_core = None
if _choice != "numpy":
    try:
        _core = importlib.import_module("._core", __name__)
    except ImportError:
        if _choice == "compiled":
            raise

if _core is not None:
    backend_name = "compiled"
    _impl = _core
else:
    backend_name = "numpy"
    _impl = _numpy

hadamard = _impl.hadamard
controlled_bit_flip = _impl.controlled_bit_flip
phase_flip = _impl.phase_flip
xor_indexed = _impl.xor_indexed
comparator_flip = _impl.comparator_flip
pattern_probability = _impl.pattern_probability
collapse = _impl.collapse
permute = _impl.permute


def available_backends() -> dict:
    """Importable backend modules keyed by name."""
    out = {"numpy": _numpy}
    if _core is not None:
        out["compiled"] = _core
    return out
