"""Scalar special functions used by the correlation model and the copula transforms.

All functions accept Python floats or numpy arrays and return the same shape
(a plain ``float`` for scalar input).
"""

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, special

from src.core.errors import DomainError

TWO_PI = 2.0 * math.pi


def _out(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def spherical_bessel_j0(x: ArrayLike) -> float | np.ndarray:
    """sin(x)/x with the removable singularity at 0 (j0(0) = 1)."""
    return _out(special.spherical_jn(0, np.asarray(x, dtype=float)))


def cylindrical_bessel_j0(x: ArrayLike) -> float | np.ndarray:
    """Cylindrical J0(x), the 2-D isotropic scattering alternative."""
    return _out(special.j0(np.asarray(x, dtype=float)))


def correlation_kernel(x: ArrayLike, kind: str = "spherical") -> float | np.ndarray:
    """Spatial correlation as a function of the phase distance 2π·d/λ."""
    if kind == "spherical":
        return spherical_bessel_j0(x)
    if kind == "cylindrical":
        return cylindrical_bessel_j0(x)
    raise DomainError(f"Unknown correlation kernel: {kind!r}")


def std_normal_cdf(x: ArrayLike) -> float | np.ndarray:
    """Φ(x); saturates to 0/1 at ∓∞."""
    return _out(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_quantile(p: ArrayLike) -> float | np.ndarray:
    """Φ⁻¹(p) with the sentinels Φ⁻¹(0) = −∞ and Φ⁻¹(1) = +∞."""
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise DomainError(f"Probability outside [0, 1]: {p}")
    return _out(special.ndtri(p))


def bivariate_normal_cdf(a: float, b: float, rho: float) -> float:
    """P(X ≤ a, Y ≤ b) for standard normals with correlation rho.

    Evaluated as Φ(a)Φ(b) plus the one-dimensional integral over θ ∈ [0, asin ρ]
    of exp(−(a² − 2ab·sinθ + b²)/(2cos²θ))/(2π), using adaptive quadrature.
    """
    if math.isnan(a) or math.isnan(b) or math.isnan(rho):
        raise DomainError("NaN argument to bivariate_normal_cdf")
    if not -1.0 < rho < 1.0:
        raise DomainError(f"Correlation must lie in (-1, 1), got {rho}")

    if a == -math.inf or b == -math.inf:
        return 0.0
    if a == math.inf:
        return float(special.ndtr(b))
    if b == math.inf:
        return float(special.ndtr(a))

    base = float(special.ndtr(a) * special.ndtr(b))
    if rho == 0.0:
        return base

    def integrand(theta: float) -> float:
        c = math.cos(theta)
        return math.exp(-(a * a - 2.0 * a * b * math.sin(theta) + b * b) / (2.0 * c * c))

    value, _ = integrate.quad(integrand, 0.0, math.asin(rho), epsabs=1e-14, epsrel=1e-12, limit=200)
    return min(max(base + value / TWO_PI, 0.0), 1.0)


def db_to_linear(db: ArrayLike) -> float | np.ndarray:
    return _out(np.power(10.0, np.asarray(db, dtype=float) / 10.0))


def linear_to_db(x: ArrayLike) -> float | np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("dB conversion needs a positive linear value")
    return _out(10.0 * np.log10(x))
