"""Monte Carlo oracle for the closed-form metrics.

Port gains are drawn either through the Gaussian copula the analysis assumes
(``copula``) or from a correlated complex Gaussian field (``physical``). Trials
are split into chunks with one counter-based stream per chunk, so estimates
depend only on (seed, trials, chunk) and never on the worker count.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy import special

from src.config import settings
from src.core.errors import DomainError
from src.core.rng import stream
from src.schemas.estimates import McConfig, McEstimate
from src.schemas.geometry import CorrelationMatrix, PortGrid
from src.schemas.link import DorConfig, RateThresholds, Scenario
from src.services.geometry import correlation_matrix
from src.services.metrics import LN2, dor_thresholds, rate_threshold_transform

logger = logging.getLogger(__name__)

Z95 = 1.96

ChunkFn = Callable[[np.random.Generator, int], np.ndarray]


def sample_gains(
    grid: PortGrid,
    R: CorrelationMatrix,
    mean: float,
    rng: np.random.Generator,
    trials: Optional[int] = None,
    sampler: Optional[str] = None,
) -> np.ndarray:
    """Exponential(mean) port gains with port dependence R.

    Returns shape (N,) for a single draw or (trials, N).
    """
    if not mean > 0.0:
        raise DomainError(f"Mean must be positive, got {mean}")
    if R.dim != grid.n_ports:
        raise DomainError(f"Grid {grid.label} has {grid.n_ports} ports, matrix is {R.dim}x{R.dim}")
    sampler = sampler or settings.mc_sampler
    m = 1 if trials is None else trials
    n = grid.n_ports

    if sampler == "copula":
        z = rng.standard_normal((m, n)) @ R.chol.T
        # -ln(1 - Φ(z)) without cancellation
        gains = -mean * special.log_ndtr(-z)
    elif sampler == "physical":
        h = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) @ R.chol.T
        gains = 0.5 * mean * (h.real**2 + h.imag**2)
    else:
        raise DomainError(f"Unknown sampler: {sampler!r}")
    return gains[0] if trials is None else gains


def _run(mc: McConfig, fn: ChunkFn) -> np.ndarray:
    """Apply ``fn`` to every chunk and sum the results in chunk order."""

    def job(chunk: tuple[int, int]) -> np.ndarray:
        index, size = chunk
        return fn(stream(mc.seed, index), size)

    if mc.workers > 1:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            parts = list(pool.map(job, mc.chunks))
    else:
        parts = [job(c) for c in mc.chunks]

    total = np.zeros_like(parts[0])
    for part in parts:
        total = total + part
    return total


def _mean_estimate(s1: float, s2: float, n: int, **details: float) -> McEstimate:
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
    stderr = math.sqrt(var / n)
    return McEstimate(
        value=mean,
        stderr=stderr,
        trials=n,
        ci95=(mean - Z95 * stderr, mean + Z95 * stderr),
        details=details,
    )


def wilson(count: int, n: int) -> tuple[float, float, tuple[float, float]]:
    """Proportion, stderr (Wilson half-width / 1.96) and the Wilson 95% interval."""
    p = count / n
    z2 = Z95 * Z95
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = Z95 * math.sqrt(p * (1.0 - p) / n + z2 / (4 * n * n)) / denom
    return p, half / Z95, (max(center - half, 0.0), min(center + half, 1.0))


def _proportion(count: int, n: int, label: str, **details: float) -> McEstimate:
    p, stderr, ci = wilson(count, n)
    if p < settings.mc_rare_event:
        logger.warning(
            f"{label}: rare-event regime (p={p:.3g} from {n} trials); plain MC is unreliable here"
        )
    return McEstimate(value=p, stderr=stderr, trials=n, ci95=ci, details=details)


def estimate_expected_max(
    grid: PortGrid,
    mean: float,
    mc: Optional[McConfig] = None,
    inr_mean: Optional[float] = None,
    R: Optional[CorrelationMatrix] = None,
) -> McEstimate:
    """MC mean of the port maximum; with ``inr_mean`` each port carries γ + ζ."""
    mc = mc or McConfig()
    R = R if R is not None else correlation_matrix(grid)

    def chunk(rng: np.random.Generator, size: int) -> np.ndarray:
        gains = sample_gains(grid, R, mean, rng, size, mc.sampler)
        if inr_mean is not None:
            gains = gains + sample_gains(grid, R, inr_mean, rng, size, mc.sampler)
        peak = gains.max(axis=1)
        return np.array([peak.sum(), (peak * peak).sum()])

    s1, s2 = _run(mc, chunk)
    return _mean_estimate(float(s1), float(s2), mc.trials)


def _receiver_maxima(
    s: Scenario, mc: McConfig, rng: np.random.Generator, size: int
) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    """γ and κ maxima of both receivers plus a per-trial violation flag.

    The interfering gains are an independent draw with the same copula; the
    flag marks trials where ζ ≤ γ at the port carrying the strongest γ.
    """
    gamma_max, kappa_max = [], []
    violated = np.zeros(size, dtype=bool)
    for grid, budget in zip(s.grids, s.budgets):
        R = correlation_matrix(grid)
        gamma = sample_gains(grid, R, budget.avg_snr, rng, size, mc.sampler)
        zeta = sample_gains(grid, R, budget.avg_inr, rng, size, mc.sampler)
        best = gamma.argmax(axis=1)
        rows = np.arange(size)
        violated |= zeta[rows, best] <= gamma[rows, best]
        gamma_max.append(gamma[rows, best])
        kappa_max.append((gamma + zeta).max(axis=1))
    return gamma_max, kappa_max, violated


def _union_count(
    s: Scenario, mc: McConfig, t1: float, t2: float, tsum: float, label: str
) -> McEstimate:
    def chunk(rng: np.random.Generator, size: int) -> np.ndarray:
        gamma_max, kappa_max, violated = _receiver_maxima(s, mc, rng, size)
        event = (
            (gamma_max[0] < t1)
            | (gamma_max[1] < t2)
            | (kappa_max[0] < tsum)
            | (kappa_max[1] < tsum)
        )
        n_violated = int(violated.sum())
        if n_violated:
            logger.debug(f"{label}: {n_violated}/{size} trials violate strong interference")
        return np.array([int(event.sum()), n_violated], dtype=np.int64)

    count, violations = _run(mc, chunk)
    return _proportion(int(count), mc.trials, label, strong_interference_violations=int(violations))


def estimate_op(s: Scenario, th: RateThresholds, mc: Optional[McConfig] = None) -> McEstimate:
    """Empirical outage probability: either user's rate or the sum rate unsupported."""
    t1 = rate_threshold_transform(th.r1_th)
    t2 = rate_threshold_transform(th.r2_th)
    tsum = rate_threshold_transform(th.rsum_th)
    return _union_count(s, mc or McConfig(), t1, t2, tsum, "OP")


def estimate_dor(s: Scenario, d: DorConfig, mc: Optional[McConfig] = None) -> McEstimate:
    """Empirical delay outage rate.

    Delivery time R/(B·C) exceeds its deadline exactly when the SNR maximum
    falls below the ``derived`` thresholds, so those are the ones sampled.
    """
    t1, t2, tsum = dor_thresholds(d, "derived")
    return _union_count(s, mc or McConfig(), t1, t2, tsum, "DOR")


def estimate_ec(
    s: Scenario, mc: Optional[McConfig] = None
) -> tuple[McEstimate, McEstimate, McEstimate]:
    """MC means of log2(1 + γ1max), log2(1 + γ2max) and the sum-rate term."""
    mc = mc or McConfig()

    def chunk(rng: np.random.Generator, size: int) -> np.ndarray:
        gamma_max, kappa_max, _ = _receiver_maxima(s, mc, rng, size)
        c1 = np.log1p(gamma_max[0]) / LN2
        c2 = np.log1p(gamma_max[1]) / LN2
        csum = np.minimum(np.log1p(kappa_max[0]), np.log1p(kappa_max[1])) / LN2
        return np.array([[c.sum(), (c * c).sum()] for c in (c1, c2, csum)])

    sums = _run(mc, chunk)
    c1, c2, csum = (_mean_estimate(float(a), float(b), mc.trials) for a, b in sums)
    return c1, c2, csum
