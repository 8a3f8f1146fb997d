from typing import Literal, NamedTuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config import settings


class MvnEstimate(BaseModel):
    """Multivariate normal probability with a 3-standard-error bound."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0, le=1.0)
    abs_error: float = Field(0.0, ge=0.0)
    samples_used: int = Field(0, ge=0)
    seed: int = 0

    @property
    def exact(self) -> bool:
        return self.samples_used == 0

    def complement(self) -> "MvnEstimate":
        return self.model_copy(update={"value": 1.0 - self.value})


class MetricEstimate(BaseModel):
    """Closed-form metric value with its propagated integration error bound."""

    model_config = ConfigDict(frozen=True)

    value: float
    abs_error: float = Field(0.0, ge=0.0)
    variant: Literal["analytic", "asymptotic"] = "analytic"
    components: dict[str, float] = Field(default_factory=dict)


class McEstimate(BaseModel):
    """Monte Carlo estimate of a mean or a proportion."""

    model_config = ConfigDict(frozen=True)

    value: float
    stderr: float = Field(..., ge=0.0)
    trials: int = Field(..., ge=1)
    ci95: tuple[float, float]
    details: dict[str, float] = Field(default_factory=dict)

    def covers(self, reference: float, extra: float = 0.0, k: float = 3.0) -> bool:
        """True when ``reference`` lies within k standard errors (+ extra)."""
        return abs(reference - self.value) <= k * self.stderr + extra


class CapacityTriple(NamedTuple):
    """Ergodic capacities (bits/s/Hz) of user 1, user 2 and the sum channel."""

    c1: float
    c2: float
    csum: float


class McConfig(BaseModel):
    """Monte Carlo budget. ``chunk`` trials share one random stream."""

    model_config = ConfigDict(frozen=True)

    trials: int = Field(default_factory=lambda: settings.mc_trials, ge=1)
    seed: int = Field(default_factory=lambda: settings.mc_seed, ge=0)
    chunk: int = Field(default_factory=lambda: settings.mc_chunk, ge=1)
    sampler: Literal["copula", "physical"] = Field(default_factory=lambda: settings.mc_sampler)
    workers: int = Field(default_factory=lambda: settings.mc_workers, ge=1)

    @field_validator("trials")
    @classmethod
    def trials_within_cap(cls, v: int) -> int:
        if v > settings.mc_max_trials:
            raise ValueError(f"trials {v} exceeds cap {settings.mc_max_trials}")
        return v

    @property
    def chunks(self) -> list[tuple[int, int]]:
        """(index, size) of every chunk; the last one may be short."""
        full, rest = divmod(self.trials, self.chunk)
        sizes = [self.chunk] * full + ([rest] if rest else [])
        return list(enumerate(sizes))
