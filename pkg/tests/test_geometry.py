import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.config import settings
from src.core.errors import DegenerateGeometryError, DomainError
from src.schemas.geometry import PortGrid
from src.services.geometry import (
    average_dependence,
    correlation_matrix,
    index_to_pair,
    matrix_from_entries,
    pair_to_index,
    port_positions,
    spatial_correlation,
)


@pytest.mark.parametrize(
    "k, pair",
    [(1, (1, 1)), (4, (1, 4)), (5, (2, 1)), (12, (3, 4))],
)
def test_index_to_pair_row_major(k, pair):
    grid = PortGrid(n1=3, n2=4)
    assert index_to_pair(grid, k) == pair
    assert pair_to_index(grid, *pair) == k


def test_index_round_trip_covers_grid():
    grid = PortGrid(n1=5, n2=3)
    pairs = [index_to_pair(grid, k) for k in range(1, grid.n_ports + 1)]
    assert len(set(pairs)) == grid.n_ports
    assert [pair_to_index(grid, *p) for p in pairs] == list(range(1, grid.n_ports + 1))


@pytest.mark.parametrize("k", [0, 13, -1])
def test_index_out_of_range(k):
    with pytest.raises(DomainError):
        index_to_pair(PortGrid(n1=3, n2=4), k)


def test_pair_out_of_range():
    with pytest.raises(DomainError):
        pair_to_index(PortGrid(n1=3, n2=4), 4, 1)


def test_port_positions():
    grid = PortGrid(n1=2, n2=3, w1=1.0, w2=2.0)
    expected = np.array([[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]], dtype=float)
    np.testing.assert_allclose(port_positions(grid), expected)


def test_single_port_axis_has_no_extent():
    np.testing.assert_array_equal(port_positions(PortGrid(w1=3.0, w2=3.0)), [[0.0, 0.0]])


def test_half_wavelength_ports_are_uncorrelated():
    # spacing λ/2 puts every pair on a zero of sin(x)/x
    R = correlation_matrix(PortGrid(n1=1, n2=4, w1=0.0, w2=1.5))
    off = R.entries[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, 0.0, atol=1e-15)


def test_spatial_correlation_matches_matrix():
    grid = PortGrid(n1=3, n2=3, w1=1.0, w2=0.5)
    R = correlation_matrix(grid)
    for n, m in [(1, 2), (1, 9), (4, 8), (5, 5)]:
        assert spatial_correlation(grid, n, m) == pytest.approx(R.entries[n - 1, m - 1], abs=1e-14)


def test_spatial_correlation_value():
    grid = PortGrid(n1=1, n2=2, w2=0.25)
    expected = math.sin(math.pi / 2) / (math.pi / 2)
    assert spatial_correlation(grid, 1, 2) == pytest.approx(expected, rel=1e-14)
    assert spatial_correlation(grid, 1, 2, kernel="cylindrical") != pytest.approx(expected)


def test_correlation_matrix_structure():
    R = correlation_matrix(PortGrid(n1=3, n2=2, w1=1.0, w2=0.7))
    assert R.dim == 6
    assert np.max(np.abs(R.entries - R.entries.T)) < 1e-14
    np.testing.assert_array_equal(np.diag(R.entries), 1.0)
    np.testing.assert_allclose(R.chol @ R.chol.T, R.regularized, atol=1e-12)
    assert not R.entries.flags.writeable
    assert not R.chol.flags.writeable


def test_correlation_matrix_is_memoised():
    grid = PortGrid(n1=2, n2=2, w1=1.0, w2=1.0)
    assert correlation_matrix(grid) is correlation_matrix(PortGrid(n1=2, n2=2, w1=1.0, w2=1.0))
    assert correlation_matrix(grid, "cylindrical") is not correlation_matrix(grid, "spherical")


def test_rank_deficient_matrix_gets_jitter():
    R = matrix_from_entries(np.ones((3, 3)))
    assert 0.0 < R.jitter <= settings.jitter_cap


def test_indefinite_matrix_is_degenerate():
    entries = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    with pytest.raises(DegenerateGeometryError):
        matrix_from_entries(entries)


def test_matrix_from_entries_validates_shape():
    with pytest.raises(DomainError):
        matrix_from_entries(np.array([[1.0, 0.2], [0.3, 1.0]]))
    with pytest.raises(DomainError):
        matrix_from_entries(np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_average_dependence():
    assert average_dependence(matrix_from_entries(np.eye(3))) == 0.0
    assert average_dependence(correlation_matrix(PortGrid())) == 0.0
    assert average_dependence(matrix_from_entries([[1.0, 0.5], [0.5, 1.0]])) == pytest.approx(0.5)


def test_average_dependence_clamps_negative(caplog):
    R = matrix_from_entries([[1.0, -0.5], [-0.5, 1.0]])
    with caplog.at_level("INFO"):
        assert average_dependence(R) == 0.0
    assert "clamped" in caplog.text


@given(st.integers(1, 16), st.integers(1, 16), st.data())
def test_index_round_trip_random_grids(n1, n2, data):
    grid = PortGrid(n1=n1, n2=n2)
    k = data.draw(st.integers(1, grid.n_ports))
    k1, k2 = index_to_pair(grid, k)
    assert 1 <= k1 <= n1 and 1 <= k2 <= n2
    assert pair_to_index(grid, k1, k2) == k


@pytest.mark.parametrize("n", [2, 3, 5])
def test_adjacent_correlation_falls_up_to_half_wavelength(n):
    apertures = np.linspace(0.0, 0.5 * (n - 1), 26)
    adjacent = [spatial_correlation(PortGrid(n1=1, n2=n, w2=w), 1, 2) for w in apertures]
    assert adjacent[0] == 1.0
    assert np.all(np.diff(adjacent) <= 1e-15)
