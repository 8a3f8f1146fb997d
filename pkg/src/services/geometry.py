"""Port-grid layout, 1D/2D index mapping and the spatial correlation matrix."""

import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np

from src.config import settings
from src.core.errors import DegenerateGeometryError, DomainError
from src.core.special import TWO_PI, correlation_kernel
from src.schemas.geometry import CorrelationMatrix, PortGrid

logger = logging.getLogger(__name__)


def index_to_pair(grid: PortGrid, k: int) -> tuple[int, int]:
    """1-based row-major mapping k = (k1 - 1)·n2 + k2."""
    if not 1 <= k <= grid.n_ports:
        raise DomainError(f"Port index {k} out of range 1..{grid.n_ports}")
    k1, k2 = divmod(k - 1, grid.n2)
    return k1 + 1, k2 + 1


def pair_to_index(grid: PortGrid, k1: int, k2: int) -> int:
    if not (1 <= k1 <= grid.n1 and 1 <= k2 <= grid.n2):
        raise DomainError(f"Port ({k1}, {k2}) out of range for {grid.n1}x{grid.n2} grid")
    return (k1 - 1) * grid.n2 + k2


def _axis_step(n: int, w: float) -> float:
    # a single-port axis has no extent
    return 0.0 if n == 1 else w / (n - 1)


def port_positions(grid: PortGrid) -> np.ndarray:
    """(N, 2) port coordinates in wavelengths, rows in port-index order."""
    k1, k2 = np.divmod(np.arange(grid.n_ports), grid.n2)
    return np.column_stack(
        (k1 * _axis_step(grid.n1, grid.w1), k2 * _axis_step(grid.n2, grid.w2))
    )


def spatial_correlation(
    grid: PortGrid, n: int, m: int, kernel: Optional[str] = None
) -> float:
    """Correlation between ports n and m (1-based)."""
    n1, n2 = index_to_pair(grid, n)
    m1, m2 = index_to_pair(grid, m)
    d1 = abs(n1 - m1) * _axis_step(grid.n1, grid.w1)
    d2 = abs(n2 - m2) * _axis_step(grid.n2, grid.w2)
    return float(correlation_kernel(TWO_PI * math.hypot(d1, d2), kernel or settings.correlation_kernel))


def _cholesky_with_jitter(entries: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factor, retrying with jitter 1e-12 → ×10 → cap."""
    jitter = 0.0
    eye = np.eye(entries.shape[0])
    while True:
        try:
            return np.linalg.cholesky(entries + jitter * eye), jitter
        except np.linalg.LinAlgError:
            if jitter >= settings.jitter_cap:
                raise DegenerateGeometryError(
                    f"Correlation matrix not positive definite with jitter {jitter:g}"
                ) from None
            jitter = settings.jitter_start if jitter == 0.0 else jitter * settings.jitter_factor
            jitter = min(jitter, settings.jitter_cap)
            logger.info(f"Cholesky failed, retrying with jitter {jitter:g}")


@lru_cache(maxsize=256)
def _build(grid: PortGrid, kernel: str) -> CorrelationMatrix:
    positions = port_positions(grid)
    diff = positions[:, None, :] - positions[None, :, :]
    distance = np.sqrt((diff**2).sum(axis=-1))
    entries = np.asarray(correlation_kernel(TWO_PI * distance, kernel), dtype=float).reshape(
        distance.shape
    )
    entries = 0.5 * (entries + entries.T)
    np.fill_diagonal(entries, 1.0)

    chol, jitter = _cholesky_with_jitter(entries)
    if jitter > 0.0:
        logger.warning(f"Grid {grid.label}: factorised with jitter {jitter:g}")
    entries.flags.writeable = False
    chol.flags.writeable = False
    return CorrelationMatrix(entries=entries, chol=chol, jitter=jitter, kernel=kernel)


def correlation_matrix(grid: PortGrid, kernel: Optional[str] = None) -> CorrelationMatrix:
    """Port correlation matrix of ``grid``; memoised per (grid, kernel)."""
    return _build(grid, kernel or settings.correlation_kernel)


def matrix_from_entries(entries: np.ndarray) -> CorrelationMatrix:
    """Wrap an explicit correlation matrix (tests, oracle checks)."""
    entries = np.array(entries, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DomainError("Correlation matrix must be square")
    if not np.allclose(entries, entries.T, atol=1e-14) or not np.allclose(np.diag(entries), 1.0):
        raise DomainError("Correlation matrix must be symmetric with unit diagonal")
    chol, jitter = _cholesky_with_jitter(entries)
    entries.flags.writeable = False
    chol.flags.writeable = False
    return CorrelationMatrix(entries=entries, chol=chol, jitter=jitter, kernel="explicit")


def average_dependence(R: CorrelationMatrix) -> float:
    """Mean off-diagonal correlation ϖ, clamped below at 0."""
    n = R.dim
    if n == 1:
        return 0.0
    mean = float((R.entries.sum() - np.trace(R.entries)) / (n * (n - 1)))
    if mean < 0.0:
        logger.info(f"Average dependence {mean:.4g} clamped to 0")
        return 0.0
    return mean
