"""Time the compiled kernel extension against the numpy fallback.

Per-kernel timings run in process on every importable backend; the
end-to-end fit timing re-launches the interpreter with QGAD_KERNELS forced,
because the backend is chosen at import time.

    python benchmarks/bench_kernels.py --qubits 20 --repeats 5
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qgad import kernels

_FIT_SNIPPET = """
import time
import numpy as np
from qgad import kernels
from qgad.estimators import EstimationBudget, fit
from qgad.fixedpoint import quantize_dataset

rng = np.random.default_rng(0)
dataset = quantize_dataset(rng.uniform(-0.9, 0.9, size=({rows}, {features})), {bits})
budget = EstimationBudget(mode="exact", epsilon_mu=1e-9)
started = time.perf_counter()
fit(dataset, budget)
print(f"{{kernels.backend_name}} {{time.perf_counter() - started:.3f}}")
"""


def random_state(qubits: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << qubits) + 1j * rng.normal(size=1 << qubits)
    return np.ascontiguousarray(amps / np.linalg.norm(amps))


def kernel_cases(qubits: int):
    half = qubits // 2
    table = np.arange(1 << half, dtype=np.int64)[::-1].copy()
    perm = np.roll(np.arange(1 << qubits, dtype=np.int64), 1)
    return [
        ("hadamard", lambda mod, amps: mod.hadamard(amps, half)),
        (
            "controlled_bit_flip",
            lambda mod, amps: mod.controlled_bit_flip(amps, 0b110, 0),
        ),
        ("phase_flip", lambda mod, amps: mod.phase_flip(amps, 0b101)),
        (
            "xor_indexed",
            lambda mod, amps: mod.xor_indexed(amps, half, half, table, 0),
        ),
        (
            "comparator_flip",
            lambda mod, amps: mod.comparator_flip(amps, 1, 1 + half - 1, half - 1, 0),
        ),
        (
            "pattern_probability",
            lambda mod, amps: mod.pattern_probability(amps, 0b11, 0b01),
        ),
        ("collapse", lambda mod, amps: mod.collapse(amps, 0, 0, 1.0)),
        ("permute", lambda mod, amps: mod.permute(amps, perm)),
    ]


def bench_kernels(qubits: int, repeats: int) -> None:
    backends = dict(sorted(kernels.available_backends().items()))
    print(f"per-kernel best of {repeats} on {qubits} qubits "
          f"({(1 << qubits) * 16 / 2**20:.0f} MiB state), times in ms")
    header = "kernel".ljust(22) + "".join(name.rjust(12) for name in backends)
    if len(backends) > 1:
        header += "speedup".rjust(10)
    print(header)
    for name, op in kernel_cases(qubits):
        times = {}
        for backend, mod in backends.items():
            amps = random_state(qubits, 42)
            best = float("inf")
            for _ in range(repeats):
                started = time.perf_counter()
                op(mod, amps)
                best = min(best, time.perf_counter() - started)
            times[backend] = best
        row = name.ljust(22) + "".join(
            f"{times[backend] * 1e3:12.2f}" for backend in backends
        )
        if len(times) > 1:
            ordered = [times[backend] for backend in backends]
            row += f"{max(ordered) / min(ordered):9.1f}x"
        print(row)


def bench_fit(rows: int, features: int, bits: int) -> None:
    print(f"\nexact fit of a {rows} x {features} dataset at {bits} bits, seconds")
    snippet = _FIT_SNIPPET.format(rows=rows, features=features, bits=bits)
    for backend in sorted(kernels.available_backends()):
        env = dict(os.environ, QGAD_KERNELS=backend)
        result = subprocess.run(
            [sys.executable, "-c", snippet], env=env, capture_output=True, text=True
        )
        if result.returncode != 0:
            print(f"{backend}: failed\n{result.stderr}", file=sys.stderr)
            continue
        print(result.stdout.strip())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--rows", type=int, default=64)
    parser.add_argument("--features", type=int, default=2)
    parser.add_argument("--bits", type=int, default=6)
    parser.add_argument("--skip-fit", action="store_true")
    args = parser.parse_args()
    bench_kernels(args.qubits, args.repeats)
    if not args.skip_fit:
        bench_fit(args.rows, args.features, args.bits)


if __name__ == "__main__":
    main()
