import numpy as np
import pytest

from qgad.errors import DegenerateDataError, DomainError
from qgad.estimators import (
    EstimationBudget,
    assemble_covariance,
    estimate_covariance_prime,
    estimate_mean,
    fit,
)
from qgad.fixedpoint import quantize_dataset

EXACT = EstimationBudget(mode="exact", epsilon_mu=1e-12)


def classical_moments(values):
    x = np.asarray(values, dtype=np.float64)
    mu = x.mean(axis=0)
    centered = x - mu
    cov = centered.T @ centered / (x.shape[0] - 1)
    return mu, cov


def test_mean_pipeline_frozen_values():
    # two points +1/2 and -1/4 at two bits: mean 1/8
    ds = quantize_dataset([[0.5], [-0.25]], 2)
    rec = estimate_mean(ds, 0, EXACT)
    assert rec.p_mu == pytest.approx(0.015625, abs=1e-14)
    assert rec.p_post == pytest.approx(0.40625, abs=1e-14)
    assert rec.magnitude == pytest.approx(0.125, abs=1e-13)
    assert (rec.sign, rec.value) == (1, pytest.approx(0.125, abs=1e-13))
    assert rec.p_s_hat == pytest.approx(0.5 - 0.125 * 0.625 / 0.40625, abs=1e-12)
    assert rec.magnitude_shots == 0 and rec.sign_shots == 0


def test_mean_pipeline_negative_value():
    ds = quantize_dataset([[-0.5], [0.25]], 2)
    rec = estimate_mean(ds, 0, EXACT)
    assert rec.sign == -1
    assert rec.value == pytest.approx(-0.125, abs=1e-13)
    assert rec.p_s_hat > 0.5


def test_mean_pipeline_single_point():
    # a lone row needs no index register and reads back exactly
    ds = quantize_dataset([[0.5]], 2)
    rec = estimate_mean(ds, 0, EXACT)
    assert rec.p_mu == pytest.approx(0.25, abs=1e-14)
    assert rec.value == pytest.approx(0.5, abs=1e-13)


def test_mean_below_resolution_reads_zero():
    ds = quantize_dataset([[0.25], [-0.25]], 2)
    rec = estimate_mean(ds, 0, EXACT)
    assert rec.sign_skipped
    assert rec.value == 0.0
    # a barely-nonzero mean survives a fine resolution and dies at a coarse one
    ds = quantize_dataset([[33 / 64], [-0.5]], 6)
    fine = estimate_mean(ds, 0, EstimationBudget(mode="exact", epsilon_mu=1e-3))
    assert fine.value == pytest.approx(1 / 128, abs=1e-12)
    coarse = estimate_mean(ds, 0, EstimationBudget(mode="exact", epsilon_mu=0.01))
    assert coarse.sign_skipped and coarse.value == 0.0


def test_covariance_pipeline_frozen_values():
    ds = quantize_dataset([[0.5, 0.5], [0.25, -0.25]], 2)
    off_diag = estimate_covariance_prime(ds, 0, 1, EXACT)
    assert off_diag.p_first == pytest.approx(0.15625, abs=1e-14)
    assert off_diag.p_second == pytest.approx(0.05625, abs=1e-13)
    assert off_diag.value == pytest.approx(0.1875, abs=1e-12)
    diag = estimate_covariance_prime(ds, 0, 0, EXACT)
    assert diag.value == pytest.approx(0.3125, abs=1e-12)


def test_covariance_pipeline_negative_product():
    ds = quantize_dataset([[0.5, -0.5], [0.25, 0.25]], 2)
    rec = estimate_covariance_prime(ds, 0, 1, EXACT)
    # sum of products = -0.25 + 0.0625
    assert rec.sign == -1
    assert rec.value == pytest.approx(-0.1875, abs=1e-12)


def test_covariance_degenerate_zero_column():
    ds = quantize_dataset([[0.0, 0.5], [0.0, 0.25]], 2)
    rec = estimate_covariance_prime(ds, 0, 0, EXACT)
    assert rec.degenerate and rec.sign_skipped
    assert rec.value == 0.0 and rec.p_first == 0.0


def test_fit_frozen_example():
    ds = quantize_dataset([[0.5, 0.5], [0.25, -0.25]], 2)
    report = fit(ds, EXACT)
    np.testing.assert_allclose(report.mu_hat, [0.375, 0.125], atol=1e-12)
    np.testing.assert_allclose(
        report.cov_prime_hat, [[0.3125, 0.1875], [0.1875, 0.3125]], atol=1e-12
    )
    np.testing.assert_allclose(
        report.cov_hat, [[0.03125, 0.09375], [0.09375, 0.28125]], atol=1e-12
    )
    assert np.array_equal(report.cov_hat, report.cov_hat.T)
    assert len(report.means) == 2 and len(report.covariances) == 3


def test_fit_matches_classical_on_random_data():
    rng = np.random.default_rng(17)
    ds = quantize_dataset(rng.uniform(-0.9, 0.9, size=(8, 3)), 4)
    report = fit(ds, EXACT)
    mu, cov = classical_moments(ds.decoded())
    np.testing.assert_allclose(report.mu_hat, mu, atol=1e-10)
    np.testing.assert_allclose(report.cov_hat, cov, atol=1e-10)


def test_fit_requires_two_rows():
    with pytest.raises(DegenerateDataError):
        fit(quantize_dataset([[0.5]], 2), EXACT)


def test_shot_mode_is_deterministic_per_seed():
    ds = quantize_dataset([[0.5, 0.25], [0.25, -0.5], [-0.75, 0.5]], 2)
    budget = EstimationBudget(mode="shots", shots_magnitude=2000, seed=42, epsilon_mu=0.05)
    first = fit(ds, budget)
    second = fit(ds, budget)
    assert first.to_dict() == second.to_dict()
    other = fit(ds, EstimationBudget(mode="shots", shots_magnitude=2000, seed=43, epsilon_mu=0.05))
    assert first.to_dict() != other.to_dict()


def test_shot_mode_converges_to_exact():
    rng = np.random.default_rng(23)
    ds = quantize_dataset(rng.uniform(-0.9, 0.9, size=(16, 2)), 4)
    exact = fit(ds, EXACT)
    sampled = fit(
        ds,
        EstimationBudget(mode="shots", shots_magnitude=1_000_000, seed=5, epsilon_mu=1e-3),
    )
    assert np.max(np.abs(sampled.mu_hat - exact.mu_hat)) <= 5e-3
    assert np.max(np.abs(sampled.cov_hat - exact.cov_hat)) <= 2e-2


def test_shot_mode_records_budgets():
    ds = quantize_dataset([[0.5, 0.25], [0.25, -0.5]], 2)
    budget = EstimationBudget(mode="shots", shots_magnitude=500, seed=9, epsilon_mu=0.05)
    report = fit(ds, budget)
    for rec in report.means:
        assert rec.magnitude_shots == 500
        if not rec.sign_skipped:
            assert rec.sign_shots > 0
            assert rec.alpha_floor is not None and rec.beta_floor is not None
    for rec in report.covariances:
        if not rec.degenerate:
            assert rec.magnitude_shots == 1000  # both stages sampled


def test_mean_hint_raises_the_beta_floor():
    ds = quantize_dataset([[0.5, 0.5], [0.25, -0.25], [0.75, 0.5], [0.5, 0.25]], 2)
    budget = EstimationBudget(mode="shots", shots_magnitude=4000, seed=3, epsilon_mu=0.05)
    bare = estimate_covariance_prime(ds, 0, 1, budget, mean_hint=None)
    hinted = estimate_covariance_prime(ds, 0, 1, budget, mean_hint=0.9)
    assert hinted.beta_floor > bare.beta_floor
    assert hinted.sign == bare.sign


def test_assemble_covariance_symmetry_and_guard():
    rng = np.random.default_rng(31)
    mu = rng.normal(size=4)
    prime = rng.normal(size=(4, 4))
    prime = (prime + prime.T) / 2
    cov = assemble_covariance(mu, prime, 10)
    assert np.array_equal(cov, cov.T)
    np.testing.assert_allclose(cov[1, 2], prime[1, 2] - 10 / 9 * mu[1] * mu[2], atol=1e-15)
    with pytest.raises(DegenerateDataError):
        assemble_covariance(mu, prime, 1)


def test_budget_validation():
    with pytest.raises(DomainError):
        EstimationBudget(mode="analytic")
    with pytest.raises(DomainError):
        EstimationBudget(mode="shots", shots_magnitude=0)
    with pytest.raises(DomainError):
        EstimationBudget(delta=1.0)
    with pytest.raises(DomainError):
        EstimationBudget(epsilon_mu=0.0)
    with pytest.raises(DomainError):
        EstimationBudget(epsilon_mu=1.0)
