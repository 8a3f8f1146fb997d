"""Closed-form system metrics of the two-user FAMA interference channel.

Outage probability (OP) and delay outage rate (DOR) are unions of three
events: user 1's SNR maximum below its threshold, user 2's likewise, and
either receiver's SNR+INR maximum below the sum threshold. Receivers are
independent, so the union is one minus a product of four CCDFs of port
maxima, each evaluated through the Gaussian copula.
"""

import logging
import math
from collections.abc import Sequence
from functools import partial
from typing import Literal, Optional

from src.config import settings
from src.core.errors import DomainError, HeuristicRangeError, StrongInterferenceError
from src.core.rng import derive_seed
from src.core.special import linear_to_db
from src.schemas.estimates import CapacityTriple, MetricEstimate, MvnEstimate
from src.schemas.geometry import CorrelationMatrix, PortGrid
from src.schemas.link import CapacityRegion, DorConfig, RateThresholds, Scenario
from src.services.copula import max_cdf_adaptive
from src.services.geometry import average_dependence, correlation_matrix
from src.services.marginals import asym_exp_cdf, asym_hypoexp_cdf, exp_cdf, hypoexp_cdf

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

DorVariant = Literal["derived", "theorem", "proof"]


def _snr_threshold(exponent: float, fn=math.expm1) -> float:
    try:
        return fn(exponent)
    except OverflowError:
        raise DomainError(
            f"SNR threshold e^{exponent:g} overflows; rate or payload too large for the link"
        ) from None


def rate_threshold_transform(r_bits: float) -> float:
    """2^r - 1: the SNR at which log2(1 + SNR) reaches r."""
    if math.isnan(r_bits) or r_bits < 0.0:
        raise DomainError(f"Rate must be nonnegative, got {r_bits}")
    return _snr_threshold(r_bits * LN2)


def harmonic(n: int) -> float:
    if n < 1:
        raise DomainError(f"Harmonic number needs n >= 1, got {n}")
    return math.fsum(1.0 / k for k in range(1, n + 1))


def check_scenario(s: Scenario) -> None:
    """Apply the strong-interference policy (ζ̄ > γ̄ at both receivers)."""
    for i, budget in enumerate(s.budgets, start=1):
        if budget.strong_interference:
            continue
        message = (
            f"Receiver {i}: strong interference violated "
            f"(avg INR {linear_to_db(budget.avg_inr):.2f} dB <= avg SNR {linear_to_db(budget.avg_snr):.2f} dB)"
        )
        if s.interference_policy == "error":
            raise StrongInterferenceError(message)
        logger.warning(message)


def _union(estimates: Sequence[MvnEstimate | MetricEstimate]) -> tuple[float, float]:
    """P(at least one event) for independent events, with a first-order error bound."""
    log_survival = 0.0
    for est in estimates:
        log_survival += math.log1p(-est.value) if est.value < 1.0 else -math.inf
    value = -math.expm1(log_survival)

    abs_error = 0.0
    for k, est in enumerate(estimates):
        others = math.prod(1.0 - e.value for j, e in enumerate(estimates) if j != k)
        abs_error += est.abs_error * others
    return min(max(value, 0.0), 1.0), abs_error


def _port_cdfs(
    s: Scenario, t1: float, t2: float, tsum: float, asymptotic: bool
) -> dict[str, MvnEstimate]:
    """CDFs of the four port maxima at their thresholds."""
    gamma_cdf = asym_exp_cdf if asymptotic else exp_cdf
    kappa_cdf = asym_hypoexp_cdf if asymptotic else hypoexp_cdf
    R = [correlation_matrix(grid) for grid in s.grids]
    result: dict[str, MvnEstimate] = {}
    for i, (budget, thr) in enumerate(zip(s.budgets, (t1, t2)), start=1):
        result[f"gamma{i}"] = max_cdf_adaptive(
            thr,
            partial(gamma_cdf, mean=budget.avg_snr),
            R[i - 1],
            seed=derive_seed(s.seed, i),
            tol=s.copula_tol,
        )
    for i, budget in enumerate(s.budgets, start=1):
        result[f"kappa{i}"] = max_cdf_adaptive(
            tsum,
            partial(kappa_cdf, avg_snr=budget.avg_snr, avg_inr=budget.avg_inr),
            R[i - 1],
            seed=derive_seed(s.seed, 2 + i),
            tol=s.copula_tol,
        )
    return result


def _events(
    s: Scenario, t1: float, t2: float, tsum: float, asymptotic: bool
) -> tuple[MetricEstimate, MetricEstimate, MetricEstimate]:
    cdfs = _port_cdfs(s, t1, t2, tsum, asymptotic)
    variant = "asymptotic" if asymptotic else "analytic"
    e1 = MetricEstimate(value=cdfs["gamma1"].value, abs_error=cdfs["gamma1"].abs_error, variant=variant)
    e2 = MetricEstimate(value=cdfs["gamma2"].value, abs_error=cdfs["gamma2"].abs_error, variant=variant)
    value, abs_error = _union([cdfs["kappa1"], cdfs["kappa2"]])
    e3 = MetricEstimate(
        value=value,
        abs_error=abs_error,
        variant=variant,
        components={"kappa1": cdfs["kappa1"].value, "kappa2": cdfs["kappa2"].value},
    )
    return e1, e2, e3


def union_of_events(
    events: tuple[MetricEstimate, MetricEstimate, MetricEstimate],
) -> MetricEstimate:
    """Probability that at least one of the (independent) three events occurs."""
    e1, e2, e3 = events
    value, abs_error = _union(list(events))
    return MetricEstimate(
        value=value,
        abs_error=abs_error,
        variant=e1.variant,
        components={"gamma1": e1.value, "gamma2": e2.value, **e3.components},
    )


def _union_metric(
    s: Scenario, t1: float, t2: float, tsum: float, asymptotic: bool
) -> MetricEstimate:
    check_scenario(s)
    return union_of_events(_events(s, t1, t2, tsum, asymptotic))


def _rate_points(th: RateThresholds) -> tuple[float, float, float]:
    return (
        rate_threshold_transform(th.r1_th),
        rate_threshold_transform(th.r2_th),
        rate_threshold_transform(th.rsum_th),
    )


def outage_events(
    s: Scenario, th: RateThresholds, asymptotic: bool = False
) -> tuple[MetricEstimate, MetricEstimate, MetricEstimate]:
    """Marginal probabilities of the three outage events."""
    check_scenario(s)
    return _events(s, *_rate_points(th), asymptotic)


def outage_probability(s: Scenario, th: RateThresholds) -> MetricEstimate:
    return _union_metric(s, *_rate_points(th), asymptotic=False)


def outage_probability_asymptotic(s: Scenario, th: RateThresholds) -> MetricEstimate:
    return _union_metric(s, *_rate_points(th), asymptotic=True)


def dor_thresholds(d: DorConfig, variant: Optional[DorVariant] = None) -> tuple[float, float, float]:
    """SNR thresholds (T̂1, T̂2, T̂sum) equivalent to the delivery deadlines.

    ``derived`` uses e^x - 1 for the sum channel like the per-user terms;
    ``theorem`` drops the -1 and ``proof`` additionally doubles the exponent.
    """
    variant = variant or settings.dor_variant
    t1 = _snr_threshold(d.data1 * LN2 / (d.band1 * d.t1_th))
    t2 = _snr_threshold(d.data2 * LN2 / (d.band2 * d.t2_th))
    exponent = (d.data1 + d.data2) * LN2 / (d.band_sum * d.tsum_th)
    if variant == "derived":
        tsum = _snr_threshold(exponent)
    elif variant == "theorem":
        tsum = _snr_threshold(exponent, math.exp)
    elif variant == "proof":
        tsum = _snr_threshold(2.0 * exponent, math.exp)
    else:
        raise DomainError(f"Unknown DOR variant: {variant!r}")
    return t1, t2, tsum


def delivery_time(data_bits: float, band_hz: float, capacity: float) -> float:
    """R/(B·C) in seconds; infinite when the capacity is zero."""
    if data_bits < 0.0 or band_hz <= 0.0 or capacity < 0.0:
        raise DomainError("Delivery time needs data >= 0, bandwidth > 0, capacity >= 0")
    if capacity == 0.0:
        return math.inf
    return data_bits / (band_hz * capacity)


def dor_events(
    s: Scenario, d: DorConfig, variant: Optional[DorVariant] = None, asymptotic: bool = False
) -> tuple[MetricEstimate, MetricEstimate, MetricEstimate]:
    check_scenario(s)
    return _events(s, *dor_thresholds(d, variant), asymptotic)


def dor(s: Scenario, d: DorConfig, variant: Optional[DorVariant] = None) -> MetricEstimate:
    return _union_metric(s, *dor_thresholds(d, variant), asymptotic=False)


def dor_asymptotic(
    s: Scenario, d: DorConfig, variant: Optional[DorVariant] = None
) -> MetricEstimate:
    return _union_metric(s, *dor_thresholds(d, variant), asymptotic=True)


def correction_factor(n_ports: int, varpi: float) -> float:
    """1 - ϖH_N/(2N): correlation-induced shrinkage of the expected maximum."""
    return 1.0 - varpi * harmonic(n_ports) / (2.0 * n_ports)


def expected_max_heuristic(
    grid: PortGrid, mean: float, R: Optional[CorrelationMatrix] = None
) -> float:
    """mean·H_N·(1 - ϖH_N/(2N)), the approximate mean of the port maximum."""
    if not mean > 0.0:
        raise DomainError(f"Mean must be positive, got {mean}")
    n = grid.n_ports
    varpi = average_dependence(R if R is not None else correlation_matrix(grid))
    factor = correction_factor(n, varpi)
    if factor <= 0.0:
        raise HeuristicRangeError(
            f"Grid {grid.label}: correction factor {factor:.4g} <= 0 (too correlated)"
        )
    return mean * harmonic(n) * factor


def _expected_maxima(s: Scenario) -> tuple[list[float], list[float]]:
    gammas = [expected_max_heuristic(g, b.avg_snr) for g, b in zip(s.grids, s.budgets)]
    kappas = [expected_max_heuristic(g, b.avg_sum) for g, b in zip(s.grids, s.budgets)]
    return gammas, kappas


def ergodic_capacity(s: Scenario) -> CapacityTriple:
    check_scenario(s)
    gammas, kappas = _expected_maxima(s)
    return CapacityTriple(
        c1=math.log1p(gammas[0]) / LN2,
        c2=math.log1p(gammas[1]) / LN2,
        csum=min(math.log1p(k) for k in kappas) / LN2,
    )


def ergodic_capacity_asymptotic(s: Scenario) -> CapacityTriple:
    """High-SNR form log2(η) of the ergodic capacities."""
    check_scenario(s)
    gammas, kappas = _expected_maxima(s)
    if min(gammas + kappas) <= 0.0:
        raise DomainError("Asymptotic capacity needs a positive expected maximum")
    return CapacityTriple(
        c1=math.log2(gammas[0]),
        c2=math.log2(gammas[1]),
        csum=min(math.log2(k) for k in kappas),
    )


def _dedupe(points: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    corners: list[tuple[float, float]] = []
    for p in points:
        if not corners or (abs(p[0] - corners[-1][0]) > 1e-12 or abs(p[1] - corners[-1][1]) > 1e-12):
            corners.append(p)
    if len(corners) > 1 and corners[-1] == corners[0]:
        corners.pop()
    return tuple(corners)


def instantaneous_capacity_region(
    gamma1: float, gamma2: float, kappa1: float, kappa2: float
) -> CapacityRegion:
    """Capacity region under simultaneous non-unique decoding, corners counter-clockwise."""
    if min(gamma1, gamma2, kappa1, kappa2) < 0.0:
        raise DomainError("SNR/INR values must be nonnegative")
    c1 = math.log1p(gamma1) / LN2
    c2 = math.log1p(gamma2) / LN2
    csum = min(math.log1p(kappa1), math.log1p(kappa2)) / LN2

    x_max = min(c1, csum)
    y_max = min(c2, csum)
    corners = _dedupe(
        [
            (0.0, 0.0),
            (x_max, 0.0),
            (x_max, max(0.0, min(c2, csum - x_max))),
            (max(0.0, min(c1, csum - y_max)), y_max),
            (0.0, y_max),
        ]
    )
    return CapacityRegion(c1_max=c1, c2_max=c2, csum_max=csum, corners=corners)
