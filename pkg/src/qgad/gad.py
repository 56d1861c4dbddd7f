"""Gaussian density scoring, anomaly verdicts, and density error budgets.

The model keeps a Cholesky factor and evaluates densities in log space, so
no explicit matrix inverse or determinant product ever appears.  The error
budget maps entrywise estimation error epsilon_mu on the fitted moments to a
worst-case density perturbation; the bound holds while the covariance
perturbation is small against the inverse, which is the stated proviso.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import BoundInvalidError, DegenerateDataError, DomainError
from .fixedpoint import QuantizedDataset

_LOG_TWO_PI = float(np.log(2.0 * np.pi))


class GaussianModel:
    """Multivariate normal with a cached Cholesky factorization.

    A covariance that fails to factor marks the model degenerate; scoring it
    raises DegenerateDataError naming the near-null direction.  Pass
    ``ridge`` to opt into a diagonal repair lambda*I instead.
    """

    def __init__(self, mu, cov, ridge: float | None = None):
        mu = np.asarray(mu, dtype=np.float64)
        cov = np.asarray(cov, dtype=np.float64)
        if mu.ndim != 1 or cov.shape != (mu.size, mu.size):
            raise DomainError(
                f"shape mismatch: mu {mu.shape} against covariance {cov.shape}"
            )
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise DomainError("covariance must be symmetric within 1e-12")
        if ridge is not None:
            if ridge < 0.0:
                raise DomainError(f"ridge must be non-negative, got {ridge}")
            cov = cov + ridge * np.eye(mu.size)
        self.mu = mu
        self.cov = cov
        self._chol = None
        self._log_det = None
        try:
            self._chol = sla.cholesky(cov, lower=True)
        except sla.LinAlgError:
            pass
        else:
            self._log_det = 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def is_degenerate(self) -> bool:
        return self._chol is None

    @property
    def log_det(self) -> float:
        self._require_factor()
        return self._log_det

    def _require_factor(self) -> None:
        if self._chol is None:
            values, vectors = np.linalg.eigh(self.cov)
            direction = np.array2string(vectors[:, 0], precision=4)
            raise DegenerateDataError(
                "covariance is not positive definite; eigenvalue "
                f"{values[0]:.3e} along {direction} (a ridge can repair this)"
            )

    def mahalanobis_sq(self, x) -> np.ndarray | float:
        """Squared Mahalanobis distance for one point or a stack of rows."""
        self._require_factor()
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        delta = np.atleast_2d(x) - self.mu
        if delta.shape[1] != self.dim:
            raise DomainError(f"point dimension {delta.shape[1]} != model {self.dim}")
        z = sla.solve_triangular(self._chol, delta.T, lower=True)
        m2 = np.sum(z * z, axis=0)
        return float(m2[0]) if single else m2

    def log_density(self, x) -> np.ndarray | float:
        m2 = self.mahalanobis_sq(x)
        return -0.5 * (self.dim * _LOG_TWO_PI + self._log_det + m2)

    def density(self, x) -> np.ndarray | float:
        return np.exp(self.log_density(x))


def classical_fit(data, ridge: float | None = None) -> GaussianModel:
    """Sample mean and unbiased covariance of decoded rows.

    Accepts a QuantizedDataset or a plain (M, D) array.  The covariance is
    symmetrized exactly, so the model constructor's symmetry check is safe.
    """
    if isinstance(data, QuantizedDataset):
        data = data.decoded()
    rows = np.asarray(data, dtype=np.float64)
    if rows.ndim != 2:
        raise DomainError(f"expected an (M, D) array, got shape {rows.shape}")
    m = rows.shape[0]
    if m < 2:
        raise DegenerateDataError(f"covariance needs at least two rows, got {m}")
    mu = rows.mean(axis=0)
    centered = rows - mu
    cov = centered.T @ centered / (m - 1)
    cov = 0.5 * (cov + cov.T)
    return GaussianModel(mu, cov, ridge=ridge)


def detect(model: GaussianModel, x, sigma: float) -> bool:
    """Anomaly verdict: density strictly below the threshold sigma."""
    if sigma < 0.0:
        raise DomainError(f"threshold must be non-negative, got {sigma}")
    return bool(model.density(x) < sigma)


def effective_kappa(model: GaussianModel) -> float:
    """Conditioning parameter kappa = D / lambda_min of the covariance."""
    values = np.linalg.eigvalsh(model.cov)
    if values[0] <= 0.0:
        raise DegenerateDataError(
            f"covariance eigenvalue {values[0]:.3e} is not positive"
        )
    return model.dim / float(values[0])


@dataclass(frozen=True)
class ErrorBudget:
    """Entrywise moment error and the operator-norm data behind the density
    bound.  epsilon_c defaults to its worst case, three times epsilon_mu."""

    epsilon_mu: float
    inv_norm: float
    epsilon_c: float | None = None
    epsilon: float | None = None
    kappa: float | None = None

    def __post_init__(self) -> None:
        if self.epsilon_mu <= 0.0:
            raise DomainError(f"epsilon_mu must be positive, got {self.epsilon_mu}")
        if self.inv_norm <= 0.0:
            raise DomainError(f"inv_norm must be positive, got {self.inv_norm}")
        if self.epsilon_c is None:
            object.__setattr__(self, "epsilon_c", 3.0 * self.epsilon_mu)
        elif not 0.0 < self.epsilon_c <= 3.0 * self.epsilon_mu + 1e-15:
            raise DomainError(
                "epsilon_c must be positive and at most 3 * epsilon_mu "
                f"(mean errors compound), got {self.epsilon_c}"
            )


def density_error_bound(budget: ErrorBudget, dim: int) -> float:
    """Worst-case pointwise density error for a dim-dimensional model.

    Valid while dim * inv_norm * (dim * epsilon_c) <= 1/2; outside that the
    perturbation series is not controlled and the call refuses.
    """
    if dim < 1:
        raise DomainError(f"dimension must be positive, got {dim}")
    proviso = dim * budget.inv_norm * dim * budget.epsilon_c
    if proviso > 0.5:
        raise BoundInvalidError(
            f"perturbation too large for the bound: D^2 * inv_norm * epsilon_c "
            f"= {proviso:.3f} > 1/2"
        )
    d2 = float(dim * dim)
    return (
        7.0 * d2 * budget.inv_norm * budget.epsilon_mu
        + 12.0 * d2 * budget.inv_norm**2 * budget.epsilon_mu
    )


def allocate_epsilon_mu(epsilon: float, dim: int, kappa: float) -> float:
    """Per-moment accuracy that keeps the density error below epsilon.

    Inverts the bound using the conditioning guarantee inv_norm <= kappa / D:
    epsilon_mu = epsilon / (7 D kappa + 12 kappa^2).
    """
    if epsilon <= 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if dim < 1:
        raise DomainError(f"dimension must be positive, got {dim}")
    if kappa <= 0.0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return epsilon / (7.0 * dim * kappa + 12.0 * kappa**2)


@dataclass(frozen=True)
class BoundCheck:
    """Empirical comparison of an observed density shift to the bound."""

    holds: bool
    delta: float
    bound: float
    margin: float


def check_bound_empirically(
    reference: GaussianModel,
    perturbed: GaussianModel,
    x,
    budget: ErrorBudget,
    slack: float = 1.5,
) -> BoundCheck:
    """Check |p_ref(x) - p_pert(x)| against slack * bound at one point."""
    if reference.dim != perturbed.dim:
        raise DomainError("models must share one dimension")
    bound = density_error_bound(budget, reference.dim)
    delta = float(abs(reference.density(x) - perturbed.density(x)))
    allowed = slack * bound
    return BoundCheck(
        holds=delta <= allowed, delta=delta, bound=bound, margin=allowed - delta
    )
