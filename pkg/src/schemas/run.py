"""Run configuration (TOML document), diagnostics and output records."""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import settings
from src.core.special import db_to_linear
from src.schemas.geometry import PortGrid
from src.schemas.link import DorConfig, LinkBudget, RateThresholds

Receiver = Literal["1", "2", "sum", "system"]
Variant = Literal["analytic", "asymptotic", "mc"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BudgetSpec(_Strict):
    """Average SNR in dB plus either an absolute INR or an offset above the SNR."""

    snr_db: float
    inr_db: Optional[float] = None
    inr_offset_db: Optional[float] = None

    @model_validator(mode="after")
    def one_inr_rule(self) -> "BudgetSpec":
        if (self.inr_db is None) == (self.inr_offset_db is None):
            raise ValueError("exactly one of inr_db, inr_offset_db is required")
        return self

    @property
    def resolved_inr_db(self) -> float:
        if self.inr_db is not None:
            return self.inr_db
        return self.snr_db + self.inr_offset_db

    def to_budget(self) -> LinkBudget:
        return LinkBudget(avg_snr=db_to_linear(self.snr_db), avg_inr=db_to_linear(self.resolved_inr_db))


class ScenarioSpec(_Strict):
    grid1: PortGrid = PortGrid()
    grid2: PortGrid = PortGrid()
    budget1: BudgetSpec
    budget2: BudgetSpec
    seed: Optional[int] = Field(None, ge=0)
    copula_tol: Optional[float] = Field(None, gt=0.0)
    interference_policy: Optional[Literal["error", "warn"]] = None


class ThresholdSpec(_Strict):
    """Per-user rate thresholds in bits/s/Hz."""

    r1: float = Field(0.5, ge=0.0)
    r2: float = Field(0.5, ge=0.0)

    def to_thresholds(self) -> RateThresholds:
        return RateThresholds(r1_th=self.r1, r2_th=self.r2)


class DorSpec(_Strict):
    """Payload, bandwidth and deadline; user-2 and sum-channel values default to user 1's."""

    data_bits: float = Field(1000.0, ge=0.0)
    band_hz: float = Field(1e6, gt=0.0)
    t_ms: float = Field(1.0, gt=0.0)
    data2_bits: Optional[float] = Field(None, ge=0.0)
    band2_hz: Optional[float] = Field(None, gt=0.0)
    t2_ms: Optional[float] = Field(None, gt=0.0)
    band_sum_hz: Optional[float] = Field(None, gt=0.0)
    tsum_ms: Optional[float] = Field(None, gt=0.0)

    def to_config(self) -> DorConfig:
        def pick(value: Optional[float], default: float) -> float:
            return default if value is None else value

        return DorConfig(
            data1=self.data_bits,
            data2=pick(self.data2_bits, self.data_bits),
            band1=self.band_hz,
            band2=pick(self.band2_hz, self.band_hz),
            band_sum=pick(self.band_sum_hz, self.band_hz),
            t1_th=self.t_ms * 1e-3,
            t2_th=pick(self.t2_ms, self.t_ms) * 1e-3,
            tsum_th=pick(self.tsum_ms, self.t_ms) * 1e-3,
        )


class McSpec(_Strict):
    enabled: bool = True
    trials: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = Field(None, ge=0)
    chunk: Optional[int] = Field(None, ge=1)
    sampler: Optional[Literal["copula", "physical"]] = None
    workers: Optional[int] = Field(None, ge=1)


class SweepSpec(_Strict):
    """Swept variable with a linear grid of ``points`` values from start to stop."""

    variable: Literal["avg_snr_db", "rate_bits", "bandwidth_hz"] = "avg_snr_db"
    start: float
    stop: float
    points: int = Field(..., ge=2)
    inr_db: Optional[float] = None
    inr_offset_db: Optional[float] = None

    @model_validator(mode="after")
    def check_range(self) -> "SweepSpec":
        if not self.start < self.stop:
            raise ValueError(f"sweep start {self.start} must be below stop {self.stop}")
        if self.inr_db is not None and self.inr_offset_db is not None:
            raise ValueError("give at most one of inr_db, inr_offset_db")
        return self

    def values(self) -> list[float]:
        step = (self.stop - self.start) / (self.points - 1)
        return [self.start + i * step for i in range(self.points - 1)] + [self.stop]


class CaseSpec(_Strict):
    """One curve of a figure: a grid used by both receivers unless grid2 is given."""

    name: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$")
    grid: PortGrid
    grid2: Optional[PortGrid] = None

    @property
    def grids(self) -> tuple[PortGrid, PortGrid]:
        return self.grid, self.grid2 or self.grid


class RunConfig(_Strict):
    name: str = "run"
    scenario: ScenarioSpec
    thresholds: ThresholdSpec = ThresholdSpec()
    dor: DorSpec = DorSpec()
    mc: McSpec = McSpec()
    sweep: Optional[SweepSpec] = None
    cases: list[CaseSpec] = Field(default_factory=list)
    asymptotic: bool = True

    def case_list(self) -> list[CaseSpec]:
        """Configured cases, or one ``base`` case built from the scenario grids."""
        if self.cases:
            return list(self.cases)
        return [CaseSpec(name="base", grid=self.scenario.grid1, grid2=self.scenario.grid2)]

    @property
    def seed(self) -> int:
        return self.scenario.seed if self.scenario.seed is not None else settings.mc_seed

    @property
    def copula_tol(self) -> float:
        return self.scenario.copula_tol or settings.copula_tol

    @property
    def interference_policy(self) -> str:
        return self.scenario.interference_policy or settings.interference_policy


class Diagnostic(BaseModel):
    level: Literal["info", "warning", "error"]
    code: str
    message: str
    case: Optional[str] = None

    def __str__(self) -> str:
        where = f" case={self.case}" if self.case else ""
        return f"{self.level}: {self.code}{where}: {self.message}"


CSV_COLUMNS = ("sweep_value", "metric", "variant", "value", "err", "trials", "receiver")


class ResultRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    sweep_value: float
    metric: str
    variant: Variant
    value: float
    err: float = 0.0
    trials: int = 0
    receiver: Receiver = "system"

    def csv_fields(self) -> list[str]:
        # repr keeps floats exact and platform independent
        return [
            repr(float(self.sweep_value)),
            self.metric,
            self.variant,
            repr(float(self.value)),
            repr(float(self.err)),
            str(self.trials),
            self.receiver,
        ]


class RunManifest(BaseModel):
    command: str
    config: Optional[str] = None
    name: str
    version: str
    created_at: str
    seed: int
    copula_tol: float
    mc_trials: Optional[int] = None
    mc_sampler: Optional[str] = None
    dor_variant: str
    correlation_kernel: str
    interference_policy: str
    jitter: dict[str, float] = Field(default_factory=dict)
    files: list[str] = Field(default_factory=list)


class SelftestResult(BaseModel):
    name: str
    tag: Literal["TRIVIAL", "DERIVED"]
    value: float
    expected: float
    tol: float
    passed: bool
