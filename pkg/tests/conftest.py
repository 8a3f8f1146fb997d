import math
from pathlib import Path

import pytest

from src.schemas.geometry import PortGrid
from src.schemas.link import LinkBudget, Scenario

TAS_OP = 0.079593


def scenario(
    grid: PortGrid,
    snr_db: float = 10.0,
    inr_offset_db: float = 20.0,
    policy: str = "error",
    seed: int = 0,
) -> Scenario:
    budget = LinkBudget(avg_snr=10 ** (snr_db / 10), avg_inr=10 ** ((snr_db + inr_offset_db) / 10))
    return Scenario(
        grid1=grid, grid2=grid, budget1=budget, budget2=budget, interference_policy=policy, seed=seed
    )


@pytest.fixture
def tas_grid() -> PortGrid:
    return PortGrid()


@pytest.fixture
def small_grid() -> PortGrid:
    return PortGrid(n1=2, n2=1, w1=0.3, w2=0.0)


@pytest.fixture
def fama_grid() -> PortGrid:
    return PortGrid(n1=4, n2=4, w1=1.0, w2=1.0)


@pytest.fixture
def tas_scenario(tas_grid) -> Scenario:
    return scenario(tas_grid)


@pytest.fixture
def tas_op_closed_form() -> float:
    """1 - exp(-2T/γ̄)·(1 - F_κ(1))² for γ̄ = 10, ζ̄ = 1000, 0.5 bit per user."""
    t = math.sqrt(2.0) - 1.0
    f_kappa = 1.0 - (1000.0 * math.exp(-0.001) - 10.0 * math.exp(-0.1)) / 990.0
    return 1.0 - math.exp(-2.0 * t / 10.0) * (1.0 - f_kappa) ** 2


BASE_CONFIG = """
name = "test"

[scenario]
seed = 3

[scenario.grid1]
n1 = 1
n2 = 1

[scenario.grid2]
n1 = 1
n2 = 1

[scenario.budget1]
snr_db = 10.0
inr_offset_db = 20.0

[scenario.budget2]
snr_db = 10.0
inr_offset_db = 20.0

[thresholds]
r1 = 0.5
r2 = 0.5

[mc]
enabled = false
trials = 2000
chunk = 500

[sweep]
variable = "avg_snr_db"
start = 0.0
stop = 20.0
points = 3
inr_offset_db = 20.0
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text: str = BASE_CONFIG, name: str = "run.toml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
