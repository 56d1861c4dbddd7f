"""Mean and covariance estimation through the loading circuits.

Each statistic is read in two steps.  A magnitude step runs the pipeline and
measures: the probability of the all-zero pattern with flag 1 equals the
squared statistic.  A sign step postselects the other registers on zero and
hands the flag qubit to the Hadamard sign test.  Magnitudes below the
epsilon_mu resolution are reported as zero and skip the sign test.

In exact mode probabilities are read from the amplitudes; in shot mode they
are estimated from sampled measurement campaigns, and the conditioning
between covariance stages uses the exact conditional state, which has the
same distribution as re-running and keeping successes.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .circuits import OracleSpec, amplitude_transduction, signed_load
from .errors import DegenerateDataError, DomainError
from .fixedpoint import QuantizedDataset
from .rng import stream
from .signtest import FlagState, SignVerdict, plan_sign_test, run_sign_test
from .statevector import (
    DEFAULT_QUBIT_CAP,
    REGISTERS,
    RegisterLayout,
    StateVector,
    init_zero,
)

_ZEROS = {"index": 0, "sign": 0, "data": 0, "reference": 0}
_DEGENERATE_EPS = 1e-14


@dataclass(frozen=True)
class EstimationBudget:
    """Measurement resources and resolution for one fit."""

    mode: str = "exact"
    shots_magnitude: int = 10_000
    delta: float = 0.05
    epsilon_mu: float = 1e-3
    seed: int = 0
    qubit_cap: int = DEFAULT_QUBIT_CAP

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "shots"):
            raise DomainError(f"mode must be 'exact' or 'shots', got {self.mode!r}")
        if self.mode == "shots" and self.shots_magnitude < 1:
            raise DomainError(f"shots_magnitude must be positive, got {self.shots_magnitude}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must be in (0, 1), got {self.delta}")
        if not 0.0 < self.epsilon_mu < 1.0:
            raise DomainError(f"epsilon_mu must be in (0, 1), got {self.epsilon_mu}")


@dataclass
class MeanEstimate:
    """One feature's mean readout, with the probabilities behind it."""

    feature: int
    p_mu: float
    p_post: float
    magnitude: float
    sign: int
    value: float
    magnitude_shots: int
    sign_shots: int = 0
    sign_skipped: bool = False
    p_s_hat: float | None = None
    alpha_floor: float | None = None
    beta_floor: float | None = None


@dataclass
class CovarianceEstimate:
    """One upper-triangle raw second-moment readout (the value is the
    signed unnormalized covariance entry before the mean correction)."""

    row: int
    col: int
    p_first: float
    p_second: float
    p_post: float
    magnitude: float
    sign: int
    value: float
    magnitude_shots: int
    sign_shots: int = 0
    sign_skipped: bool = False
    degenerate: bool = False
    p_s_hat: float | None = None
    alpha_floor: float | None = None
    beta_floor: float | None = None


@dataclass
class EstimateReport:
    """Full fit output: estimates plus every per-element record."""

    mode: str
    num_rows: int
    num_features: int
    bits: int
    seed: int
    epsilon_mu: float
    delta: float
    mu_hat: np.ndarray
    cov_prime_hat: np.ndarray
    cov_hat: np.ndarray
    means: list[MeanEstimate] = field(default_factory=list)
    covariances: list[CovarianceEstimate] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mu_hat"] = self.mu_hat.tolist()
        out["cov_prime_hat"] = self.cov_prime_hat.tolist()
        out["cov_hat"] = self.cov_hat.tolist()
        return out


def _layout(dataset: QuantizedDataset) -> RegisterLayout:
    return RegisterLayout(dataset.index_qubits, dataset.bits)


def mean_terminal_state(
    dataset: QuantizedDataset, feature: int, qubit_cap: int = DEFAULT_QUBIT_CAP
) -> StateVector:
    """State at the end of the mean pipeline for one feature."""
    sv = init_zero(_layout(dataset), qubit_cap)
    sv.apply_uniform_index(dataset.num_rows)
    amplitude_transduction(sv, OracleSpec(dataset, feature, "magnitude"))
    signed_load(sv, dataset, feature)
    sv.apply_uniform_index_inverse(dataset.num_rows)
    return sv


def covariance_first_state(
    dataset: QuantizedDataset, feature: int, qubit_cap: int = DEFAULT_QUBIT_CAP
) -> StateVector:
    """State before the first covariance measurement (magnitudes loaded)."""
    sv = init_zero(_layout(dataset), qubit_cap)
    sv.apply_uniform_index(dataset.num_rows)
    amplitude_transduction(sv, OracleSpec(dataset, feature, "magnitude"))
    return sv


def covariance_second_state(
    conditioned: StateVector, dataset: QuantizedDataset, row: int, col: int
) -> StateVector:
    """Continue from the reference-0, flag-1 conditioned state to the end of
    the covariance pipeline."""
    conditioned.apply_x(conditioned.layout.offset("flag"))
    amplitude_transduction(conditioned, OracleSpec(dataset, col, "magnitude"))
    signed_load(conditioned, dataset, row, col)
    conditioned.apply_uniform_index_inverse(dataset.num_rows)
    return conditioned


def _clamped_floors(alpha_floor: float, beta_floor: float) -> tuple[float, float]:
    alpha_floor = min(alpha_floor, 1.0)
    beta_floor = min(beta_floor, 1.0)
    total = alpha_floor**2 + beta_floor**2
    if total > 1.0:
        shrink = np.sqrt((1.0 - 1e-12) / total)
        alpha_floor *= shrink
        beta_floor *= shrink
    return alpha_floor, beta_floor


def _flag_state(collapsed: StateVector) -> FlagState:
    beta = collapsed.amps[collapsed.layout.label(flag=0)].real
    alpha = collapsed.amps[collapsed.layout.label(flag=1)].real
    return FlagState(alpha=float(alpha), beta=float(beta))


def estimate_mean(
    dataset: QuantizedDataset, feature: int, budget: EstimationBudget
) -> MeanEstimate:
    """Estimate one feature mean: magnitude from the flag-pattern
    probability, sign from the Hadamard test on the postselected flag."""
    sv = mean_terminal_state(dataset, feature, budget.qubit_cap)
    hit = dict(_ZEROS, flag=1)
    if budget.mode == "exact":
        p_mu = sv.probability_of(hit)
        p_post = sv.probability_of(_ZEROS)
        magnitude_shots = 0
    else:
        rng = stream(budget.seed, "mean-magnitude", feature)
        counts = sv.sample(REGISTERS, budget.shots_magnitude, rng).counts
        magnitude_shots = budget.shots_magnitude
        p_mu = counts.get(1, 0) / magnitude_shots
        p_post = (counts.get(0, 0) + counts.get(1, 0)) / magnitude_shots
    magnitude = float(np.sqrt(p_mu))
    record = MeanEstimate(
        feature=feature,
        p_mu=float(p_mu),
        p_post=float(p_post),
        magnitude=magnitude,
        sign=1,
        value=0.0,
        magnitude_shots=magnitude_shots,
    )
    if magnitude < budget.epsilon_mu:
        record.sign_skipped = True
        return record
    collapsed = sv.postselect(_ZEROS).collapsed
    prepare = lambda: _flag_state(collapsed)  # noqa: E731
    if budget.mode == "exact":
        verdict = run_sign_test(prepare, exact=True)
    else:
        alpha_floor = budget.epsilon_mu / np.sqrt(p_post)
        beta_floor = 2.0**-dataset.bits / np.sqrt(p_post)
        alpha_floor, beta_floor = _clamped_floors(alpha_floor, beta_floor)
        plan = plan_sign_test(alpha_floor, beta_floor, budget.delta)
        verdict = run_sign_test(
            prepare, plan.shots, stream(budget.seed, "mean-sign", feature)
        )
        record.alpha_floor = alpha_floor
        record.beta_floor = beta_floor
    _apply_verdict(record, verdict, magnitude)
    return record


def _apply_verdict(record, verdict: SignVerdict, magnitude: float) -> None:
    record.sign = verdict.sign
    record.value = verdict.sign * magnitude
    record.sign_shots = verdict.shots_used
    record.p_s_hat = verdict.p_hat


def estimate_covariance_prime(
    dataset: QuantizedDataset,
    row: int,
    col: int,
    budget: EstimationBudget,
    mean_hint: float | None = None,
) -> CovarianceEstimate:
    """Estimate the signed raw second moment sum(x_j x_k) / (M - 1).

    The pipeline measures in two stages: the reference-0, flag-1 probability
    of the magnitude-loaded state, then, conditioned on that outcome, the
    flag pattern of the doubly loaded state.  ``mean_hint`` (an estimate of
    feature ``row``'s mean) sharpens the sign-test shot bound in shot mode.
    """
    rows = dataset.num_rows
    first = covariance_first_state(dataset, row, budget.qubit_cap)
    p_first_exact = first.probability_of({"reference": 0, "flag": 1})
    record = CovarianceEstimate(
        row=row,
        col=col,
        p_first=float(p_first_exact),
        p_second=0.0,
        p_post=0.0,
        magnitude=0.0,
        sign=1,
        value=0.0,
        magnitude_shots=0,
    )
    if p_first_exact < _DEGENERATE_EPS:
        # the feature column is identically zero, so every product is too
        record.degenerate = True
        record.sign_skipped = True
        return record
    if budget.mode == "shots":
        rng = stream(budget.seed, "covariance-first", row, col)
        counts = first.sample(("reference", "flag"), budget.shots_magnitude, rng).counts
        record.p_first = counts.get(1, 0) / budget.shots_magnitude
        record.magnitude_shots = budget.shots_magnitude
    conditioned = first.postselect({"reference": 0, "flag": 1}).collapsed
    second = covariance_second_state(conditioned, dataset, row, col)
    hit = dict(_ZEROS, flag=1)
    if budget.mode == "exact":
        record.p_second = second.probability_of(hit)
        record.p_post = second.probability_of(_ZEROS)
    else:
        rng = stream(budget.seed, "covariance-second", row, col)
        counts = second.sample(REGISTERS, budget.shots_magnitude, rng).counts
        record.p_second = counts.get(1, 0) / budget.shots_magnitude
        record.p_post = (counts.get(0, 0) + counts.get(1, 0)) / budget.shots_magnitude
        record.magnitude_shots += budget.shots_magnitude
    scale = rows / (rows - 1)
    record.magnitude = float(scale * np.sqrt(record.p_first * record.p_second))
    if record.magnitude < budget.epsilon_mu:
        record.sign_skipped = True
        return record
    collapsed = second.postselect(_ZEROS).collapsed
    prepare = lambda: _flag_state(collapsed)  # noqa: E731
    if budget.mode == "exact":
        verdict = run_sign_test(prepare, exact=True)
    else:
        denom = np.sqrt(record.p_first * record.p_post)
        alpha_floor = budget.epsilon_mu / (scale * denom)
        column_mass = record.p_first
        if mean_hint is not None:
            column_mass = max(column_mass, abs(mean_hint))
        beta_floor = 2.0**-dataset.bits * column_mass / denom
        alpha_floor, beta_floor = _clamped_floors(alpha_floor, beta_floor)
        plan = plan_sign_test(alpha_floor, beta_floor, budget.delta)
        verdict = run_sign_test(
            prepare, plan.shots, stream(budget.seed, "covariance-sign", row, col)
        )
        record.alpha_floor = alpha_floor
        record.beta_floor = beta_floor
    _apply_verdict(record, verdict, record.magnitude)
    return record


def assemble_covariance(
    mu_hat: np.ndarray, cov_prime_hat: np.ndarray, num_rows: int
) -> np.ndarray:
    """Turn raw second moments into the unbiased covariance estimate.

    Computes the upper triangle and mirrors it, so the result is symmetric
    to the bit.
    """
    if num_rows < 2:
        raise DegenerateDataError(f"covariance needs at least two rows, got {num_rows}")
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    dim = mu_hat.shape[0]
    ratio = num_rows / (num_rows - 1)
    out = np.empty((dim, dim), dtype=np.float64)
    for j in range(dim):
        for k in range(j, dim):
            entry = cov_prime_hat[j, k] - ratio * mu_hat[j] * mu_hat[k]
            out[j, k] = entry
            out[k, j] = entry
    return out


def fit(dataset: QuantizedDataset, budget: EstimationBudget | None = None) -> EstimateReport:
    """Estimate the mean vector and covariance matrix of a dataset.

    Runs the mean pipeline per feature and the covariance pipeline per
    unordered feature pair (the matrix is mirrored, never re-estimated).
    """
    if budget is None:
        budget = EstimationBudget()
    rows = dataset.num_rows
    dim = dataset.num_features
    if rows < 2:
        raise DegenerateDataError(f"fit needs at least two rows, got {rows}")
    means = [estimate_mean(dataset, j, budget) for j in range(dim)]
    mu_hat = np.array([m.value for m in means])
    covariances = []
    cov_prime_hat = np.zeros((dim, dim))
    for j in range(dim):
        for k in range(j, dim):
            element = estimate_covariance_prime(
                dataset, j, k, budget, mean_hint=float(mu_hat[j])
            )
            covariances.append(element)
            cov_prime_hat[j, k] = element.value
            cov_prime_hat[k, j] = element.value
    cov_hat = assemble_covariance(mu_hat, cov_prime_hat, rows)
    return EstimateReport(
        mode=budget.mode,
        num_rows=rows,
        num_features=dim,
        bits=dataset.bits,
        seed=budget.seed,
        epsilon_mu=budget.epsilon_mu,
        delta=budget.delta,
        mu_hat=mu_hat,
        cov_prime_hat=cov_prime_hat,
        cov_hat=cov_hat,
        means=means,
        covariances=covariances,
    )
