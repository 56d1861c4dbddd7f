"""Hadamard test that reads the sign of a loaded magnitude.

The pipelines leave the postselected flag qubit in alpha|1> + beta|0> with
beta > 0 and the target quantity's sign carried by alpha.  After a Hadamard
the flag reads 1 with probability P_s = 1/2 - alpha*beta, so alpha >= 0
exactly when P_s <= 1/2.  With magnitude floors |alpha| >= a, beta >= b > 0,
a one-sided (Cantelli) tail bound keeps the wrong-sign probability of the
majority readout below delta once

    shots >= (1 - delta) * (1 - 4 a^2 b^2) / (4 delta a^2 b^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import DomainError, UnboundedShotsError


@dataclass(frozen=True)
class FlagState:
    """Real flag-qubit amplitudes: alpha on |1>, beta on |0>."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        total = self.alpha**2 + self.beta**2
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"flag state is not normalized: |amps|^2 = {total}")


@dataclass(frozen=True)
class SignVerdict:
    """Outcome of one sign test: +1 for non-negative, -1 for negative."""

    sign: int
    p_hat: float
    shots_used: int


@dataclass(frozen=True)
class SignTestPlan:
    """Shot budget for a requested confidence at given magnitude floors."""

    alpha_floor: float
    beta_floor: float
    delta: float
    shots: int


def exact_p_s(alpha: float, beta: float) -> float:
    """Closed-form flag-1 probability after the Hadamard."""
    total = alpha**2 + beta**2
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"amplitudes must be normalized, got |amps|^2 = {total}")
    return 0.5 - alpha * beta


def required_shots(alpha_floor: float, beta_floor: float, delta: float) -> int:
    """Shots needed so the majority vote errs with probability at most delta."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1), got {delta}")
    for name, floor in (("alpha", alpha_floor), ("beta", beta_floor)):
        if floor < 0.0 or floor > 1.0:
            raise DomainError(f"{name} floor must be in [0, 1], got {floor}")
        if floor == 0.0:
            raise UnboundedShotsError(
                f"{name} floor of zero makes the shot bound diverge"
            )
    product = 4.0 * alpha_floor**2 * beta_floor**2
    bound = (1.0 - delta) * (1.0 - product) / (delta * product)
    return max(1, math.ceil(bound))


def plan_sign_test(alpha_floor: float, beta_floor: float, delta: float) -> SignTestPlan:
    return SignTestPlan(
        alpha_floor, beta_floor, delta, required_shots(alpha_floor, beta_floor, delta)
    )


def run_sign_test(
    prepare: Callable[[], FlagState],
    shots: int | None = None,
    seed: int | np.random.Generator | None = None,
    exact: bool = False,
) -> SignVerdict:
    """Prepare the flag state, apply the Hadamard, and read the sign.

    In exact mode the flag-1 probability is taken straight from the
    amplitudes and no shots are consumed; otherwise ``shots`` Bernoulli
    samples decide by majority.
    """
    state = prepare()
    pair = np.array([state.beta, state.alpha], dtype=np.complex128)
    kernels.hadamard(pair, 0)
    p_one = float(pair[1].real ** 2 + pair[1].imag ** 2)
    if exact:
        return SignVerdict(sign=1 if p_one <= 0.5 else -1, p_hat=p_one, shots_used=0)
    if shots is None or shots < 1:
        raise DomainError(f"shots must be a positive integer, got {shots}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    ones = int(rng.binomial(shots, p_one))
    p_hat = ones / shots
    return SignVerdict(sign=1 if p_hat <= 0.5 else -1, p_hat=p_hat, shots_used=shots)
