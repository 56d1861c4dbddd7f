"""Self-verification suites behind the verify command and the acceptance run.

Each suite exercises one pillar end to end (comparator semantics, amplitude
transduction, sign-test confidence, agreement with the classical fit) and
returns a compact result instead of asserting, so callers can render or
gate on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuits import (
    FUNCTIONAL,
    GATE_LEVEL,
    OracleSpec,
    amplitude_transduction,
    apply_gate_list,
    comparator_gates,
)
from .errors import DegenerateDataError
from .estimators import EstimationBudget, fit, mean_terminal_state
from .fixedpoint import QuantizedDataset, quantize_dataset
from .rng import stream
from .signtest import exact_p_s, required_shots, run_sign_test, FlagState
from .statevector import RegisterLayout, init_zero

FULL_PATTERN = {"index": 0, "sign": 0, "data": 0, "reference": 0, "flag": 1}


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    worst: float


def _basis_state(num_qubits: int, label: int) -> np.ndarray:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[label] = 1.0
    return amps


def comparator_suite(
    max_functional_width: int = 4,
    max_gate_width: int = 3,
    tol: float = 1e-12,
    seed: int = 7,
) -> SuiteResult:
    """Exhaustive functional truth table plus gate-level equivalence.

    The functional backend is checked on every operand pair per width; the
    ripple-carry circuit is checked on every pair and on random states
    restricted to an unpopulated work qubit.
    """
    worst = 0.0
    cases = 0
    # functional: flag at bit 0, b at bits 1..w, a above it
    for width in range(1, max_functional_width + 1):
        q = 2 * width + 1
        for a in range(1 << width):
            for b in range(1 << width):
                label = (a << (1 + width)) | (b << 1)
                amps = _basis_state(q, label)
                kernels.comparator_flip(amps, 1 + width, 1, width, 0)
                expect = label | (1 if a > b else 0)
                dev = float(np.max(np.abs(amps - _basis_state(q, expect))))
                worst = max(worst, dev)
                cases += 1
    gate_cases = 0
    rng = np.random.default_rng(seed)
    for width in range(1, max_gate_width + 1):
        q = 2 * width + 2
        positions = {("anc", 0): 2 * width + 1, ("flag", 0): 0}
        for i in range(width):
            positions[("b", i)] = 1 + i
            positions[("a", i)] = 1 + width + i
        gates = comparator_gates(width)
        for a in range(1 << width):
            for b in range(1 << width):
                label = (a << (1 + width)) | (b << 1)
                amps = _basis_state(q, label)
                apply_gate_list(amps, gates, positions)
                expect = label | (1 if a > b else 0)
                dev = float(np.max(np.abs(amps - _basis_state(q, expect))))
                worst = max(worst, dev)
                gate_cases += 1
        # random states on the work-qubit-free half of the space
        half = 1 << (q - 1)
        for _ in range(5):
            amps = np.zeros(1 << q, dtype=np.complex128)
            raw = rng.normal(size=half) + 1j * rng.normal(size=half)
            amps[:half] = raw / np.linalg.norm(raw)
            reference = amps.copy()
            kernels.comparator_flip(reference, 1 + width, 1, width, 0)
            apply_gate_list(amps, gates, positions)
            worst = max(worst, float(np.max(np.abs(amps - reference))))
            gate_cases += 1
    return SuiteResult(
        name="comparator",
        passed=worst <= tol,
        detail=(
            f"{cases} functional cases, {gate_cases} gate-level checks, "
            f"max deviation {worst:.2e}"
        ),
        worst=worst,
    )


def random_dataset(
    rng: np.random.Generator,
    max_rows: int,
    max_features: int,
    max_bits: int,
    min_rows: int = 2,
) -> QuantizedDataset:
    rows = int(rng.integers(min_rows, max_rows + 1))
    features = int(rng.integers(1, max_features + 1))
    bits = int(rng.integers(1, max_bits + 1))
    raw = rng.uniform(-0.999, 0.999, size=(rows, features))
    return quantize_dataset(raw, bits)


def transduction_suite(
    num_datasets: int = 20,
    max_rows: int = 32,
    max_bits: int = 4,
    tol: float = 1e-12,
    seed: int = 11,
) -> SuiteResult:
    """Per-index amplitude identity of the transduction block.

    After a uniform load, the reference-0 flag-1 amplitude of index i must
    equal the prior amplitude times magnitude_i / 2^n, and the flag-0
    partner must carry the complement.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    checks = 0
    for _ in range(num_datasets):
        dataset = random_dataset(rng, max_rows, 1, max_bits)
        rows, bits = dataset.num_rows, dataset.bits
        layout = RegisterLayout(dataset.index_qubits, bits)
        sv = init_zero(layout)
        sv.apply_uniform_index(rows)
        prior = np.array([sv.amps[layout.label(index=i)] for i in range(rows)])
        amplitude_transduction(sv, OracleSpec(dataset, 0, "magnitude"))
        scale = 1.0 / (1 << bits)
        for i in range(rows):
            frac = int(dataset.magnitudes[i, 0]) * scale
            got_hit = sv.amps[layout.label(index=i, flag=1)]
            got_miss = sv.amps[layout.label(index=i, flag=0)]
            worst = max(
                worst,
                abs(got_hit - prior[i] * frac),
                abs(got_miss - prior[i] * (1.0 - frac)),
            )
            checks += 2
    return SuiteResult(
        name="transduction",
        passed=worst <= tol,
        detail=f"{checks} amplitude identities over {num_datasets} datasets, "
        f"max deviation {worst:.2e}",
        worst=worst,
    )


def signtest_suite(
    delta: float = 0.1,
    trials: int = 500,
    tol: float = 1e-12,
    seed: int = 13,
) -> SuiteResult:
    """Exact flag probability and empirical wrong-sign rate at the planned
    shot count.

    The empirical rate over the trials must stay within two binomial
    standard deviations above delta."""
    alphas = [0.9, 0.6, 0.3, 0.1, -0.1, -0.3, -0.6, -0.9]
    band = delta + 2.0 * np.sqrt(delta * (1.0 - delta) / trials)
    worst_exact = 0.0
    worst_rate = 0.0
    ok = True
    for idx, alpha in enumerate(alphas):
        beta = float(np.sqrt(1.0 - alpha * alpha))
        state = FlagState(alpha=alpha, beta=beta)
        prepare = lambda: state  # noqa: E731
        verdict = run_sign_test(prepare, exact=True)
        worst_exact = max(worst_exact, abs(verdict.p_hat - exact_p_s(alpha, beta)))
        shots = required_shots(abs(alpha), beta, delta)
        wrong = 0
        true_sign = 1 if alpha >= 0 else -1
        for trial in range(trials):
            outcome = run_sign_test(prepare, shots, stream(seed, "signtest", idx, trial))
            if outcome.sign != true_sign:
                wrong += 1
        rate = wrong / trials
        worst_rate = max(worst_rate, rate)
        if rate > band or worst_exact > tol:
            ok = False
    return SuiteResult(
        name="signtest",
        passed=ok,
        detail=(
            f"exact deviation {worst_exact:.2e}, worst wrong-sign rate "
            f"{worst_rate:.3f} (allowed {band:.3f}) over {trials} trials"
        ),
        worst=worst_rate,
    )


def equivalence_suite(
    num_datasets: int = 20,
    max_rows: int = 32,
    max_features: int = 3,
    max_bits: int = 4,
    tol: float = 1e-10,
    seed: int = 17,
) -> SuiteResult:
    """Exact-mode estimates must match the classical fit of the decoded data,
    including the squared-mean and raw-second-moment identities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_datasets):
        dataset = random_dataset(rng, max_rows, max_features, max_bits)
        budget = EstimationBudget(mode="exact", epsilon_mu=1e-12)
        report = fit(dataset, budget)
        decoded = dataset.decoded()
        rows = dataset.num_rows
        mu = decoded.mean(axis=0)
        centered = decoded - mu
        cov = centered.T @ centered / (rows - 1)
        raw_second = decoded.T @ decoded / (rows - 1)
        worst = max(worst, float(np.max(np.abs(report.mu_hat - mu))))
        worst = max(worst, float(np.max(np.abs(report.cov_hat - cov))))
        worst = max(worst, float(np.max(np.abs(report.cov_prime_hat - raw_second))))
        for record in report.means:
            worst = max(
                worst, abs(record.p_mu - mu[record.feature] ** 2)
            )
    return SuiteResult(
        name="equivalence",
        passed=worst <= tol,
        detail=f"{num_datasets} random datasets, max |estimate - classical| "
        f"= {worst:.2e}",
        worst=worst,
    )


def all_suites(seed: int = 0) -> list[SuiteResult]:
    return [
        comparator_suite(seed=seed + 7),
        transduction_suite(seed=seed + 11),
        signtest_suite(seed=seed + 13),
        equivalence_suite(seed=seed + 17),
    ]


@dataclass(frozen=True)
class ScalingRow:
    shots: int
    feature: int
    rmse: float


def scaling_experiment(
    dataset: QuantizedDataset,
    shots_grid: list[int],
    repeats: int,
    seed: int = 0,
    qubit_cap: int = 26,
) -> tuple[list[ScalingRow], dict[int, float]]:
    """Magnitude-estimate RMSE against shot count, per feature.

    Shot outcomes for the flag pattern are binomial in the exact pattern
    probability, so draws are taken directly from that marginal.  Returns
    the RMSE rows and the fitted log-log slope per feature (about -1/2 when
    the error is sampling-limited).
    """
    slopes: dict[int, float] = {}
    rows: list[ScalingRow] = []
    for feature in range(dataset.num_features):
        sv = mean_terminal_state(dataset, feature, qubit_cap)
        p_hit = sv.probability_of(FULL_PATTERN)
        if p_hit < 1e-12:
            raise DegenerateDataError(
                f"feature {feature} has (near-)zero mean; scaling slope undefined"
            )
        truth = float(np.sqrt(p_hit))
        rmses = []
        for shots in shots_grid:
            rng = stream(seed, "scaling", feature, shots)
            draws = rng.binomial(shots, p_hit, size=repeats)
            errors = np.sqrt(draws / shots) - truth
            rmse = float(np.sqrt(np.mean(errors**2)))
            rmses.append(rmse)
            rows.append(ScalingRow(shots=shots, feature=feature, rmse=rmse))
        coeffs = np.polyfit(np.log10(shots_grid), np.log10(rmses), 1)
        slopes[feature] = float(coeffs[0])
    return rows, slopes
