"""Built-in known-answer checks run by ``fama-ic selftest``."""

import logging
import math
from collections.abc import Callable

import numpy as np

from src.core import special
from src.schemas.estimates import McConfig
from src.schemas.geometry import PortGrid
from src.schemas.link import DorConfig, LinkBudget, RateThresholds, Scenario
from src.schemas.run import SelftestResult
from src.services import copula, geometry, marginals, metrics, montecarlo

logger = logging.getLogger(__name__)

# (name, tag, check) where check returns (value, expected, tol)
Check = tuple[str, str, Callable[[], tuple[float, float, float]]]

TAS = PortGrid()
FAMA_4X4 = PortGrid(n1=4, n2=4, w1=1.0, w2=1.0)


def _tas_scenario() -> Scenario:
    budget = LinkBudget(avg_snr=10.0, avg_inr=1000.0)
    return Scenario(grid1=TAS, grid2=TAS, budget1=budget, budget2=budget)


def _j0_at_zero():
    return special.spherical_bessel_j0(0.0), 1.0, 0.0


def _quantile():
    return special.std_normal_quantile(0.975), 1.959963984540054, 1e-12


def _bivariate_orthant():
    # P(X ≤ 0, Y ≤ 0) = 1/4 + asin(ρ)/(2π)
    return special.bivariate_normal_cdf(0.0, 0.0, 0.5), 1.0 / 3.0, 1e-10


def _index_mapping():
    return float(geometry.pair_to_index(FAMA_4X4, *geometry.index_to_pair(FAMA_4X4, 7))), 7.0, 0.0


def _hypoexp_cdf():
    expected = 1.0 - (1000.0 * math.exp(-0.001) - 10.0 * math.exp(-0.1)) / 990.0
    return marginals.hypoexp_cdf(1.0, 10.0, 1000.0), expected, 1e-12


def _independent_max():
    R = geometry.matrix_from_entries(np.eye(4))
    u = marginals.exp_cdf(2.0, 1.0)
    return copula.max_cdf(2.0, lambda x: marginals.exp_cdf(x, 1.0), R).value, u**4, 1e-9


def _bivariate_max():
    rho = 0.7
    R = geometry.matrix_from_entries(np.array([[1.0, rho], [rho, 1.0]]))
    q = special.std_normal_quantile(marginals.exp_cdf(1.0, 1.0))
    value = copula.max_cdf(1.0, lambda x: marginals.exp_cdf(x, 1.0), R).value
    return value, special.bivariate_normal_cdf(q, q, rho), 1e-4


def _tas_op():
    est = metrics.outage_probability(_tas_scenario(), RateThresholds(r1_th=0.5, r2_th=0.5))
    return est.value, 0.079593, 1e-4


def _zero_rate_op():
    est = metrics.outage_probability(_tas_scenario(), RateThresholds(r1_th=0.0, r2_th=0.0))
    return est.value, 0.0, 0.0


def _zero_data_dor():
    d = DorConfig(data1=0.0, data2=0.0, band1=1e6, band2=1e6, t1_th=1e-3, t2_th=1e-3)
    return metrics.dor(_tas_scenario(), d, "derived").value, 0.0, 0.0


def _harmonic():
    return metrics.harmonic(4), 25.0 / 12.0, 1e-15


def _heuristic_single_port():
    return metrics.expected_max_heuristic(TAS, 3.0), 3.0, 1e-15


def _delivery_time():
    return metrics.delivery_time(1000.0, 1e6, 1.0), 1e-3, 1e-15


def _mc_single_port_mean():
    trials = 20_000
    est = montecarlo.estimate_expected_max(TAS, 2.0, McConfig(trials=trials, seed=1, chunk=trials))
    return est.value, 2.0, 4.0 * 2.0 / math.sqrt(trials)


def _mc_tas_op():
    trials = 200_000
    s = _tas_scenario()
    mc = McConfig(trials=trials, seed=7, chunk=50_000)
    est = montecarlo.estimate_op(s, RateThresholds(r1_th=0.5, r2_th=0.5), mc)
    return est.value, 0.079593, 3.0 * est.stderr


CHECKS: list[Check] = [
    ("spherical j0(0) = 1", "TRIVIAL", _j0_at_zero),
    ("normal quantile at 0.975", "DERIVED", _quantile),
    ("bivariate orthant probability", "DERIVED", _bivariate_orthant),
    ("port index round trip", "TRIVIAL", _index_mapping),
    ("hypoexponential CDF (1; 10, 1000)", "DERIVED", _hypoexp_cdf),
    ("independent ports: max CDF = F^N", "DERIVED", _independent_max),
    ("two correlated ports vs bivariate CDF", "DERIVED", _bivariate_max),
    ("TAS outage probability", "DERIVED", _tas_op),
    ("zero rate threshold gives no outage", "TRIVIAL", _zero_rate_op),
    ("zero payload gives no delay outage", "TRIVIAL", _zero_data_dor),
    ("harmonic number H_4", "TRIVIAL", _harmonic),
    ("single-port expected maximum", "TRIVIAL", _heuristic_single_port),
    ("delivery time R/(B C)", "TRIVIAL", _delivery_time),
    ("MC single-port mean", "TRIVIAL", _mc_single_port_mean),
    ("MC TAS outage probability", "DERIVED", _mc_tas_op),
]


def run_selftest(checks: list[Check] = CHECKS) -> list[SelftestResult]:
    results = []
    for name, tag, check in checks:
        value, expected, tol = check()
        passed = abs(float(value) - expected) <= tol
        if not passed:
            logger.warning(f"Selftest failed: {name}: {value!r} vs {expected!r} (tol {tol:g})")
        results.append(
            SelftestResult(
                name=name, tag=tag, value=float(value), expected=expected, tol=tol, passed=passed
            )
        )
    return results


def format_table(results: list[SelftestResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'tag':<7}  {'value':>14}  {'expected':>14}  result"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {r.tag:<7}  {r.value:>14.8g}  {r.expected:>14.8g}  {status}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} passed")
    return "\n".join(lines)
