from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import settings
from src.schemas.geometry import PortGrid


class LinkBudget(BaseModel):
    """Average SNR γ̄ and INR ζ̄ of one receiver, linear scale."""

    model_config = ConfigDict(frozen=True)

    avg_snr: float = Field(..., gt=0.0)
    avg_inr: float = Field(..., gt=0.0)

    @property
    def delta(self) -> float:
        return self.avg_snr - self.avg_inr

    @property
    def avg_sum(self) -> float:
        return self.avg_snr + self.avg_inr

    @property
    def strong_interference(self) -> bool:
        return self.avg_inr > self.avg_snr


class Scenario(BaseModel):
    """Two-user interference channel: both receivers' grids and link budgets."""

    model_config = ConfigDict(frozen=True)

    grid1: PortGrid
    grid2: PortGrid
    budget1: LinkBudget
    budget2: LinkBudget
    copula_tol: float = Field(default_factory=lambda: settings.copula_tol, gt=0.0)
    seed: int = Field(0, ge=0)
    interference_policy: Literal["error", "warn"] = Field(
        default_factory=lambda: settings.interference_policy
    )

    @property
    def grids(self) -> tuple[PortGrid, PortGrid]:
        return self.grid1, self.grid2

    @property
    def budgets(self) -> tuple[LinkBudget, LinkBudget]:
        return self.budget1, self.budget2


class RateThresholds(BaseModel):
    """Per-user rate thresholds in bits/s/Hz; the sum threshold is derived."""

    model_config = ConfigDict(frozen=True)

    r1_th: float = Field(..., ge=0.0)
    r2_th: float = Field(..., ge=0.0)

    @property
    def rsum_th(self) -> float:
        return self.r1_th + self.r2_th


class DorConfig(BaseModel):
    """Payloads (bits), bandwidths (Hz) and delivery deadlines (s).

    Omitted sum-channel values default to the per-link values of user 1.
    """

    model_config = ConfigDict(frozen=True)

    data1: float = Field(..., ge=0.0)
    data2: float = Field(..., ge=0.0)
    band1: float = Field(..., gt=0.0)
    band2: float = Field(..., gt=0.0)
    band_sum: Optional[float] = Field(None, gt=0.0)
    t1_th: float = Field(..., gt=0.0)
    t2_th: float = Field(..., gt=0.0)
    tsum_th: Optional[float] = Field(None, gt=0.0)

    @model_validator(mode="before")
    @classmethod
    def fill_sum_channel(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            if data.get("band_sum") is None:
                data["band_sum"] = data.get("band1")
            if data.get("tsum_th") is None:
                data["tsum_th"] = data.get("t1_th")
        return data


class CapacityRegion(BaseModel):
    """Pentagon {R1 ≤ c1, R2 ≤ c2, R1 + R2 ≤ csum} with its corner points."""

    model_config = ConfigDict(frozen=True)

    c1_max: float = Field(..., ge=0.0)
    c2_max: float = Field(..., ge=0.0)
    csum_max: float = Field(..., ge=0.0)
    corners: tuple[tuple[float, float], ...]

    @property
    def sum_constraint_active(self) -> bool:
        return self.csum_max < self.c1_max + self.c2_max

    def contains(self, r1: float, r2: float, tol: float = 1e-12) -> bool:
        return (
            -tol <= r1 <= self.c1_max + tol
            and -tol <= r2 <= self.c2_max + tol
            and r1 + r2 <= self.csum_max + tol
        )

