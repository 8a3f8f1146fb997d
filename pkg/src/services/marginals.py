"""Per-port SNR/INR marginals (Rayleigh fading) and their high-SNR forms.

Everything is linear scale. Functions are vectorised over ``x``.
"""

import numpy as np
from numpy.typing import ArrayLike

from src.config import settings
from src.core.errors import DomainError


def _out(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def _check(x: ArrayLike, *means: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0.0):
        raise DomainError(f"Marginal argument must be nonnegative, got {x}")
    for mean in means:
        if not mean > 0.0:
            raise DomainError(f"Mean must be positive, got {mean}")
    return x


def _nearly_equal(a: float, b: float) -> bool:
    return abs(a - b) < settings.hypoexp_equal_rtol * max(a, b)


def exp_pdf(x: ArrayLike, mean: float) -> float | np.ndarray:
    x = _check(x, mean)
    return _out(np.exp(-x / mean) / mean)


def exp_cdf(x: ArrayLike, mean: float) -> float | np.ndarray:
    x = _check(x, mean)
    return _out(-np.expm1(-x / mean))


def hypoexp_pdf(x: ArrayLike, avg_snr: float, avg_inr: float) -> float | np.ndarray:
    """Density of γ + ζ for independent exponentials with means γ̄ and ζ̄."""
    x = _check(x, avg_snr, avg_inr)
    if _nearly_equal(avg_snr, avg_inr):
        # Erlang-2 limit
        return _out(x * np.exp(-x / avg_snr) / avg_snr**2)
    delta = avg_snr - avg_inr
    return _out(np.maximum((np.exp(-x / avg_snr) - np.exp(-x / avg_inr)) / delta, 0.0))


def hypoexp_cdf(x: ArrayLike, avg_snr: float, avg_inr: float) -> float | np.ndarray:
    """CDF of γ + ζ; symmetric in its two means."""
    x = _check(x, avg_snr, avg_inr)
    if _nearly_equal(avg_snr, avg_inr):
        t = x / avg_snr
        return _out(np.clip(-np.expm1(-t) - t * np.exp(-t), 0.0, 1.0))
    # 1 - (γ̄e^{-x/γ̄} - ζ̄e^{-x/ζ̄})/Δ, rearranged around expm1 to keep small x accurate
    delta = avg_snr - avg_inr
    value = (avg_snr * -np.expm1(-x / avg_snr) - avg_inr * -np.expm1(-x / avg_inr)) / delta
    return _out(np.clip(value, 0.0, 1.0))


def asym_exp_cdf(x: ArrayLike, mean: float) -> float | np.ndarray:
    """First-order Taylor form x/mean, clipped to 1."""
    x = _check(x, mean)
    return _out(np.minimum(x / mean, 1.0))


def asym_hypoexp_cdf(x: ArrayLike, avg_snr: float, avg_inr: float) -> float | np.ndarray:
    """(x + ζ̄e^{-x/ζ̄})/Δ clipped into [0, 1]; meaningful only for γ̄ ≫ x.

    Δ = γ̄ - ζ̄. At Δ = 0 the value is 1, the limit of the clipped form as Δ -> 0+;
    for Δ < 0 it is 0.
    """
    x = _check(x, avg_snr, avg_inr)
    delta = avg_snr - avg_inr
    if delta == 0.0:
        return _out(np.ones_like(x))
    return _out(np.clip((x + avg_inr * np.exp(-x / avg_inr)) / delta, 0.0, 1.0))
