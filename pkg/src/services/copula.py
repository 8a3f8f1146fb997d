"""Gaussian-copula distribution of the maximum over correlated ports.

Φ_R is integrated with the separation-of-variables transform: the Cholesky
factor of a priority-reordered R turns the orthant probability into an
integral over the unit cube, which is evaluated with independently scrambled
Sobol' point sets. The spread of the replicate means gives the error bound.
"""

import logging
import math
import warnings
from collections.abc import Callable
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg, special
from scipy.stats import qmc

from src.config import settings
from src.core.errors import DimensionCapError, DomainError, IntegrationError
from src.core.rng import stream
from src.schemas.estimates import MvnEstimate
from src.schemas.geometry import CorrelationMatrix

logger = logging.getLogger(__name__)

MarginalCdf = Callable[[float], float]
MarginalPdf = Callable[[float], float]

_TINY = np.finfo(float).tiny
_ONE_MINUS = 1.0 - np.finfo(float).epsneg


def _truncated_mean(c: float) -> float:
    """E[Z | Z ≤ c] for a standard normal Z."""
    if c < -30.0:
        return c
    return -math.exp(-0.5 * c * c - 0.5 * math.log(2.0 * math.pi) - float(special.log_ndtr(c)))


def _reorder_cholesky(sigma: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Greedy variable ordering by increasing conditional probability.

    Returns the permuted limits and the Cholesky factor of the permuted sigma.
    """
    n = b.size
    sigma = sigma.copy()
    b = b.copy()
    L = np.zeros((n, n))
    y = np.zeros(n)

    for i in range(n):
        # conditional scale and limit of every remaining variable
        resid = np.diag(sigma)[i:] - np.einsum("ij,ij->i", L[i:, :i], L[i:, :i])
        scale = np.sqrt(np.maximum(resid, _TINY))
        cond = (b[i:] - L[i:, :i] @ y[:i]) / scale
        j = i + int(np.argmin(special.ndtr(cond)))

        if j != i:
            sigma[[i, j], :] = sigma[[j, i], :]
            sigma[:, [i, j]] = sigma[:, [j, i]]
            b[[i, j]] = b[[j, i]]
            L[[i, j], :i] = L[[j, i], :i]

        pivot = sigma[i, i] - L[i, :i] @ L[i, :i]
        if pivot <= 1e-15:
            raise IntegrationError(f"Correlation matrix is numerically singular at pivot {i}")
        L[i, i] = math.sqrt(pivot)
        L[i + 1 :, i] = (sigma[i + 1 :, i] - L[i + 1 :, :i] @ L[i, :i]) / L[i, i]
        y[i] = _truncated_mean((b[i] - L[i, :i] @ y[:i]) / L[i, i])

    return b, L


def _sov_integrand(w: np.ndarray, b: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Separation-of-variables integrand at the points ``w`` (m × (n-1))."""
    m = w.shape[0]
    n = b.size
    y = np.empty((m, n - 1))
    e = np.full(m, special.ndtr(b[0] / L[0, 0]))
    f = e.copy()
    for i in range(1, n):
        y[:, i - 1] = special.ndtri(np.clip(w[:, i - 1] * e, _TINY, _ONE_MINUS))
        e = special.ndtr((b[i] - y[:, :i] @ L[i, :i]) / L[i, i])
        f *= e
    return f


def mvn_cdf(
    upper: ArrayLike,
    R: CorrelationMatrix,
    tol: Optional[float] = None,
    seed: int = 0,
) -> MvnEstimate:
    """P(Z ≤ upper) for Z ~ N(0, R); deterministic for a fixed seed."""
    tol = settings.copula_tol if tol is None else tol
    if not tol > 0.0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    upper = np.asarray(upper, dtype=float).reshape(-1)
    if upper.size != R.dim:
        raise DomainError(f"Limit vector has {upper.size} entries, matrix is {R.dim}x{R.dim}")
    if R.dim > settings.mvn_dim_cap:
        raise DimensionCapError(f"MVN dimension {R.dim} exceeds cap {settings.mvn_dim_cap}")
    if np.any(np.isnan(upper)):
        raise DomainError("NaN integration limit")

    if np.any(upper == -np.inf):
        return MvnEstimate(value=0.0, seed=seed)
    keep = np.isfinite(upper)
    if not keep.any():
        return MvnEstimate(value=1.0, seed=seed)
    b = upper[keep]
    if b.size == 1:
        return MvnEstimate(value=float(special.ndtr(b[0])), seed=seed)

    sigma = R.regularized[np.ix_(keep, keep)]
    b, L = _reorder_cholesky(sigma, b)
    return _integrate(b, L, tol, seed)


def _integrate(b: np.ndarray, L: np.ndarray, tol: float, seed: int) -> MvnEstimate:
    reps = settings.mvn_randomizations
    engines = [
        qmc.Sobol(d=b.size - 1, scramble=True, seed=stream(seed, r)) for r in range(reps)
    ]
    sums = np.zeros(reps)
    total = 0
    batch = settings.mvn_min_points

    while True:
        # totals stay powers of two; only the sub-batches are not
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message=".*balance properties of Sobol.*")
            for r, engine in enumerate(engines):
                left = batch
                while left > 0:
                    size = min(left, settings.mvn_block)
                    sums[r] += _sov_integrand(engine.random(size), b, L).sum()
                    left -= size
        total += batch

        means = sums / total
        value = float(means.mean())
        abs_error = 3.0 * float(means.std(ddof=1)) / math.sqrt(reps)
        if abs_error <= tol:
            break
        if total >= settings.mvn_max_points:
            logger.warning(
                f"MVN sample cap reached: error {abs_error:.3g} > tol {tol:.3g} (dim {b.size})"
            )
            break
        batch = total

    return MvnEstimate(
        value=min(max(value, 0.0), 1.0),
        abs_error=abs_error,
        samples_used=total * reps,
        seed=seed,
    )


def _check_r(r: float) -> None:
    if math.isnan(r) or r < 0.0:
        raise DomainError(f"Threshold must be nonnegative, got {r}")


def max_cdf(
    r: float,
    marginal_cdf: MarginalCdf,
    R: CorrelationMatrix,
    tol: Optional[float] = None,
    seed: int = 0,
) -> MvnEstimate:
    """P(max_k X_k ≤ r) when every port has CDF ``marginal_cdf`` and Gaussian copula R."""
    _check_r(r)
    u = float(marginal_cdf(r))
    if u <= 0.0:
        return MvnEstimate(value=0.0, seed=seed)
    if u >= 1.0:
        return MvnEstimate(value=1.0, seed=seed)
    if R.dim == 1:
        return MvnEstimate(value=u, seed=seed)
    q = float(special.ndtri(u))
    return mvn_cdf(np.full(R.dim, q), R, tol=tol, seed=seed)


def max_cdf_adaptive(
    r: float,
    marginal_cdf: MarginalCdf,
    R: CorrelationMatrix,
    seed: int = 0,
    tol: Optional[float] = None,
) -> MvnEstimate:
    """max_cdf with the tolerance tightened to a fraction of small estimates."""
    tol = settings.copula_tol if tol is None else tol
    estimate = max_cdf(r, marginal_cdf, R, tol=tol, seed=seed)
    while estimate.samples_used and tol > settings.copula_tol_floor:
        target = max(settings.copula_tol_floor, settings.copula_rel_tol * estimate.value)
        if estimate.abs_error <= target or target >= tol:
            break
        tol = target
        estimate = max_cdf(r, marginal_cdf, R, tol=tol, seed=seed)
    return estimate


def max_ccdf(
    r: float,
    marginal_cdf: MarginalCdf,
    R: CorrelationMatrix,
    tol: Optional[float] = None,
    seed: int = 0,
) -> MvnEstimate:
    """P(max_k X_k > r)."""
    return max_cdf(r, marginal_cdf, R, tol=tol, seed=seed).complement()


def max_density_diagonal(
    r: float,
    marginal_pdf: MarginalPdf,
    marginal_cdf: MarginalCdf,
    R: CorrelationMatrix,
) -> float:
    """Joint density of the N ports evaluated at (r, ..., r).

    Product of the marginal densities times the Gaussian copula density
    exp(-½ φᵀ(R⁻¹ - I)φ)/√det R with φ = Φ⁻¹(F(r)). This is not the density
    of the maximum for N ≥ 2; that is the derivative of ``max_cdf``.
    """
    _check_r(r)
    n = R.dim
    density = float(marginal_pdf(r)) ** n
    if n == 1 or density == 0.0:
        return density
    u = float(marginal_cdf(r))
    if not 0.0 < u < 1.0:
        return 0.0
    phi = np.full(n, float(special.ndtri(u)))
    L = R.chol
    if np.any(np.diag(L) <= 0.0):
        raise IntegrationError("Singular correlation matrix")
    z = linalg.solve_triangular(L, phi, lower=True)
    quad = float(z @ z - phi @ phi)
    log_det = 2.0 * float(np.log(np.diag(L)).sum())
    return density * math.exp(-0.5 * quad - 0.5 * log_det)
