import math

import numpy as np
import pytest

from src.config import settings
from src.core.errors import DomainError, HeuristicRangeError, StrongInterferenceError
from src.core.special import bivariate_normal_cdf, std_normal_quantile
from src.schemas.geometry import PortGrid
from src.schemas.link import DorConfig, LinkBudget, RateThresholds, Scenario
from src.services import metrics
from src.services.marginals import exp_cdf, hypoexp_cdf
from tests.conftest import TAS_OP, scenario

HALF_BIT = RateThresholds(r1_th=0.5, r2_th=0.5)
FIG4_DOR = DorConfig(data1=1000.0, data2=1000.0, band1=1e6, band2=1e6, t1_th=1e-3, t2_th=1e-3)


def test_rate_threshold_transform():
    assert metrics.rate_threshold_transform(0.5) == pytest.approx(math.sqrt(2.0) - 1.0)
    assert metrics.rate_threshold_transform(1.0) == pytest.approx(1.0)
    assert metrics.rate_threshold_transform(0.0) == 0.0
    with pytest.raises(DomainError):
        metrics.rate_threshold_transform(-0.1)
    with pytest.raises(DomainError, match="overflows"):
        metrics.rate_threshold_transform(5000.0)


def test_dor_thresholds_overflow_is_a_domain_error():
    d = DorConfig(data1=2e6, data2=2e6, band1=1e6, band2=1e6, t1_th=1e-3, t2_th=1e-3)
    with pytest.raises(DomainError):
        metrics.dor_thresholds(d, "derived")


def test_harmonic():
    assert metrics.harmonic(1) == 1.0
    assert metrics.harmonic(4) == pytest.approx(25.0 / 12.0)
    with pytest.raises(DomainError):
        metrics.harmonic(0)


def test_tas_outage_probability(tas_scenario, tas_op_closed_form):
    est = metrics.outage_probability(tas_scenario, HALF_BIT)
    assert est.value == pytest.approx(tas_op_closed_form, abs=1e-12)
    assert est.value == pytest.approx(TAS_OP, abs=1e-5)
    assert est.abs_error == 0.0
    assert set(est.components) == {"gamma1", "gamma2", "kappa1", "kappa2"}


def test_zero_thresholds_give_no_outage(tas_scenario, small_grid):
    zero = RateThresholds(r1_th=0.0, r2_th=0.0)
    assert metrics.outage_probability(tas_scenario, zero).value == 0.0
    assert metrics.outage_probability(scenario(small_grid), zero).value == 0.0


def test_outage_events_assemble_union(tas_scenario):
    e1, e2, e3 = metrics.outage_events(tas_scenario, HALF_BIT)
    total = metrics.outage_probability(tas_scenario, HALF_BIT).value
    assert e1.value == pytest.approx(exp_cdf(math.sqrt(2.0) - 1.0, 10.0))
    assert e3.value == pytest.approx(1.0 - (1.0 - hypoexp_cdf(1.0, 10.0, 1000.0)) ** 2)
    assert total == pytest.approx(1.0 - (1.0 - e1.value) * (1.0 - e2.value) * (1.0 - e3.value))
    assert metrics.union_of_events((e1, e2, e3)).value == total


def test_two_port_outage_matches_bivariate_oracle(small_grid):
    s = scenario(small_grid, snr_db=5.0)
    est = metrics.outage_probability(s, HALF_BIT)
    rho = math.sin(0.6 * math.pi) / (0.6 * math.pi)
    t = math.sqrt(2.0) - 1.0
    q = std_normal_quantile(exp_cdf(t, s.budget1.avg_snr))
    gamma = bivariate_normal_cdf(q, q, rho)
    qk = std_normal_quantile(hypoexp_cdf(1.0, s.budget1.avg_snr, s.budget1.avg_inr))
    kappa = bivariate_normal_cdf(qk, qk, rho)
    expected = 1.0 - (1.0 - gamma) ** 2 * (1.0 - kappa) ** 2
    assert est.value == pytest.approx(expected, abs=1e-4 + est.abs_error)


def test_strong_interference_policy(tas_grid, caplog):
    weak = scenario(tas_grid, inr_offset_db=-3.0)
    with pytest.raises(StrongInterferenceError):
        metrics.outage_probability(weak, HALF_BIT)
    lenient = scenario(tas_grid, inr_offset_db=-3.0, policy="warn")
    with caplog.at_level("WARNING"):
        value = metrics.outage_probability(lenient, HALF_BIT).value
    assert 0.0 <= value <= 1.0
    assert "strong interference violated" in caplog.text


def test_one_sided_strong_interference_is_rejected(tas_grid):
    s = Scenario(
        grid1=tas_grid,
        grid2=tas_grid,
        budget1=LinkBudget(avg_snr=10.0, avg_inr=1000.0),
        budget2=LinkBudget(avg_snr=10.0, avg_inr=5.0),
    )
    with pytest.raises(StrongInterferenceError, match="Receiver 2"):
        metrics.check_scenario(s)


def test_dor_thresholds_variants():
    t1, t2, tsum = metrics.dor_thresholds(FIG4_DOR, "derived")
    assert (t1, t2) == (pytest.approx(1.0), pytest.approx(1.0))
    assert tsum == pytest.approx(3.0)
    assert metrics.dor_thresholds(FIG4_DOR, "theorem")[2] == pytest.approx(4.0)
    assert metrics.dor_thresholds(FIG4_DOR, "proof")[2] == pytest.approx(16.0)
    with pytest.raises(DomainError):
        metrics.dor_thresholds(FIG4_DOR, "other")


def test_dor_config_defaults_sum_channel():
    d = DorConfig(data1=1.0, data2=2.0, band1=3.0, band2=4.0, t1_th=5.0, t2_th=6.0)
    assert d.band_sum == 3.0
    assert d.tsum_th == 5.0


def test_delivery_time():
    assert metrics.delivery_time(1000.0, 1e6, 1.0) == pytest.approx(1e-3)
    assert metrics.delivery_time(1000.0, 1e6, 0.0) == math.inf
    with pytest.raises(DomainError):
        metrics.delivery_time(1000.0, 0.0, 1.0)


def test_tas_dor_closed_form(tas_scenario):
    est = metrics.dor(tas_scenario, FIG4_DOR, "derived")
    f_kappa = hypoexp_cdf(3.0, 10.0, 1000.0)
    expected = 1.0 - math.exp(-2.0 / 10.0) * (1.0 - f_kappa) ** 2
    assert est.value == pytest.approx(expected, abs=1e-12)


def test_zero_payload_gives_no_delay_outage(tas_scenario):
    d = FIG4_DOR.model_copy(update={"data1": 0.0, "data2": 0.0})
    assert metrics.dor(tas_scenario, d, "derived").value == 0.0


def test_dor_variants_order(tas_scenario):
    values = [metrics.dor(tas_scenario, FIG4_DOR, v).value for v in ("derived", "theorem", "proof")]
    assert values[0] < values[1] < values[2]


def test_dor_events(tas_scenario):
    e1, e2, e3 = metrics.dor_events(tas_scenario, FIG4_DOR, "derived")
    assert e1.value == pytest.approx(exp_cdf(1.0, 10.0))
    assert e1.value == e2.value


@pytest.mark.parametrize("snr_db", [20.0, 35.0])
def test_tas_asymptotic_ratio(tas_grid, snr_db):
    s = scenario(tas_grid, snr_db=snr_db)
    ratio = metrics.outage_probability_asymptotic(s, HALF_BIT).value / metrics.outage_probability(s, HALF_BIT).value
    assert 0.8 <= ratio <= 1.25


def test_asymptotic_ratio_improves_with_snr(tas_grid):
    ratios = []
    for snr_db in (20.0, 35.0):
        s = scenario(tas_grid, snr_db=snr_db)
        ratios.append(
            metrics.dor_asymptotic(s, FIG4_DOR, "derived").value / metrics.dor(s, FIG4_DOR, "derived").value
        )
    assert abs(ratios[1] - 1.0) < abs(ratios[0] - 1.0)


def test_expected_max_heuristic_identity_cases():
    assert metrics.expected_max_heuristic(PortGrid(), 3.0) == pytest.approx(3.0)
    # λ/2 spacing: uncorrelated ports, the heuristic reduces to mean·H_N
    grid = PortGrid(n1=1, n2=3, w2=1.0)
    assert metrics.expected_max_heuristic(grid, 2.0) == pytest.approx(2.0 * metrics.harmonic(3), rel=1e-12)


def test_expected_max_heuristic_shrinks_with_correlation():
    loose = metrics.expected_max_heuristic(PortGrid(n1=2, n2=2, w1=1.0, w2=1.0), 1.0)
    tight = metrics.expected_max_heuristic(PortGrid(n1=2, n2=2, w1=0.2, w2=0.2), 1.0)
    assert 1.0 < tight < loose <= metrics.harmonic(4) + 1e-12


def test_expected_max_heuristic_range(monkeypatch):
    monkeypatch.setattr(metrics, "average_dependence", lambda R: 5.0)
    with pytest.raises(HeuristicRangeError):
        metrics.expected_max_heuristic(PortGrid(n1=2, n2=2, w1=0.5, w2=0.5), 1.0)
    with pytest.raises(DomainError):
        metrics.expected_max_heuristic(PortGrid(), 0.0)


def test_tas_ergodic_capacity(tas_scenario):
    c = metrics.ergodic_capacity(tas_scenario)
    assert c.c1 == pytest.approx(math.log2(11.0))
    assert c.c2 == c.c1
    assert c.csum == pytest.approx(math.log2(1011.0))


def test_asymptotic_capacity_approaches_exact(tas_grid):
    gaps = []
    for snr_db in (10.0, 30.0):
        s = scenario(tas_grid, snr_db=snr_db)
        exact = metrics.ergodic_capacity(s)
        asym = metrics.ergodic_capacity_asymptotic(s)
        assert asym.c1 < exact.c1
        gaps.append(exact.c1 - asym.c1)
    assert gaps[1] < gaps[0]


def test_region_with_active_sum_constraint():
    region = metrics.instantaneous_capacity_region(3.0, 3.0, 7.0, 7.0)
    assert (region.c1_max, region.c2_max, region.csum_max) == (
        pytest.approx(2.0),
        pytest.approx(2.0),
        pytest.approx(3.0),
    )
    assert region.sum_constraint_active
    expected = [(0, 0), (2, 0), (2, 1), (1, 2), (0, 2)]
    np.testing.assert_allclose(region.corners, expected, atol=1e-12)
    assert region.contains(1.5, 1.5)
    assert not region.contains(2.0, 1.5)


def test_region_is_rectangle_without_sum_constraint():
    region = metrics.instantaneous_capacity_region(3.0, 3.0, 15.0, 15.0)
    assert not region.sum_constraint_active
    np.testing.assert_allclose(region.corners, [(0, 0), (2, 0), (2, 2), (0, 2)], atol=1e-12)


def test_region_is_triangle_when_sum_rate_binds():
    region = metrics.instantaneous_capacity_region(15.0, 15.0, 3.0, 5.0)
    np.testing.assert_allclose(region.corners, [(0, 0), (2, 0), (0, 2)], atol=1e-12)


def test_region_rejects_negative_inputs():
    with pytest.raises(DomainError):
        metrics.instantaneous_capacity_region(-1.0, 1.0, 1.0, 1.0)


def assert_nonincreasing(estimates):
    for a, b in zip(estimates, estimates[1:]):
        assert b.value <= a.value + a.abs_error + b.abs_error


@pytest.mark.parametrize("grid", [PortGrid(), PortGrid(n1=2, n2=1, w1=0.3)], ids=["tas", "pair"])
def test_op_and_dor_fall_with_snr(grid):
    snrs = (0.0, 5.0, 10.0, 15.0, 20.0)
    assert_nonincreasing([metrics.outage_probability(scenario(grid, snr_db=g), HALF_BIT) for g in snrs])
    assert_nonincreasing([metrics.dor(scenario(grid, snr_db=g), FIG4_DOR, "derived") for g in snrs])


@pytest.mark.parametrize("grid", [PortGrid(), PortGrid(n1=2, n2=1, w1=0.3)], ids=["tas", "pair"])
def test_op_and_dor_grow_with_thresholds(grid):
    s = scenario(grid)
    rates = (2.0, 1.0, 0.5, 0.25)
    assert_nonincreasing([metrics.outage_probability(s, RateThresholds(r1_th=r, r2_th=r)) for r in rates])
    payloads = (4000.0, 2000.0, 1000.0, 500.0)
    assert_nonincreasing(
        [
            metrics.dor(s, FIG4_DOR.model_copy(update={"data1": b, "data2": b}), "derived")
            for b in payloads
        ]
    )


def test_op_does_not_grow_with_aperture():
    apertures = (0.2, 0.4, 0.6, 0.8, 1.0)
    assert_nonincreasing(
        [metrics.outage_probability(scenario(PortGrid(n1=1, n2=3, w2=w)), HALF_BIT) for w in apertures]
    )


def test_scenario_defaults_follow_settings(monkeypatch, tas_grid):
    monkeypatch.setattr(settings, "copula_tol", 3e-5)
    monkeypatch.setattr(settings, "interference_policy", "warn")
    budget = LinkBudget(avg_snr=10.0, avg_inr=1000.0)
    s = Scenario(grid1=tas_grid, grid2=tas_grid, budget1=budget, budget2=budget)
    assert s.copula_tol == 3e-5
    assert s.interference_policy == "warn"
