"""Run-config loading and non-mutating scenario diagnostics."""

import logging
import tomllib
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from src.config import settings
from src.core.errors import ConfigError, DegenerateGeometryError
from src.schemas.geometry import PortGrid
from src.schemas.run import BudgetSpec, Diagnostic, RunConfig
from src.services.geometry import average_dependence, correlation_matrix
from src.services.metrics import correction_factor

logger = logging.getLogger(__name__)


def _describe(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(part) for part in first["loc"]) or "<root>"
    more = f" (+{exc.error_count() - 1} more)" if exc.error_count() > 1 else ""
    return f"{where}: {first['msg']}{more}"


def parse_run_config(data: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_describe(e)) from e


def load_run_config(path: Path) -> RunConfig:
    """Read and validate a TOML run configuration."""
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read {path}: {e.strerror}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    logger.info(f"Loaded run config {path}")
    return parse_run_config(data)


def _budget_points(cfg: RunConfig, budget: BudgetSpec) -> list[tuple[float, float]]:
    """(snr_db, inr_db) pairs the run will evaluate for one receiver."""
    sweep = cfg.sweep
    if sweep is None or sweep.variable != "avg_snr_db":
        return [(budget.snr_db, budget.resolved_inr_db)]
    points = []
    for snr_db in sweep.values():
        if sweep.inr_db is not None:
            inr_db = sweep.inr_db
        elif sweep.inr_offset_db is not None:
            inr_db = snr_db + sweep.inr_offset_db
        elif budget.inr_offset_db is not None:
            inr_db = snr_db + budget.inr_offset_db
        else:
            inr_db = budget.resolved_inr_db
        points.append((snr_db, inr_db))
    return points


def _check_interference(cfg: RunConfig, policy: str) -> list[Diagnostic]:
    diagnostics = []
    level = "error" if policy == "error" else "warning"
    for i, budget in enumerate((cfg.scenario.budget1, cfg.scenario.budget2), start=1):
        bad = [(snr, inr) for snr, inr in _budget_points(cfg, budget) if inr <= snr]
        if bad:
            snr, inr = bad[0]
            diagnostics.append(
                Diagnostic(
                    level=level,
                    code="strong-interference",
                    message=(
                        f"strong-interference violated at receiver {i}: INR {inr:g} dB <= "
                        f"SNR {snr:g} dB at {len(bad)} point(s)"
                    ),
                )
            )
    return diagnostics


def _check_grid(grid: PortGrid, receiver: int, case: str) -> list[Diagnostic]:
    diagnostics = []
    for axis, n, w in ((1, grid.n1, grid.w1), (2, grid.n2, grid.w2)):
        if n == 1 and w > 0.0:
            diagnostics.append(
                Diagnostic(
                    level="warning",
                    code="aperture-ignored",
                    message=f"aperture ignored for single port (receiver {receiver}, axis {axis}, W={w:g})",
                    case=case,
                )
            )

    if grid.n_ports > settings.mvn_dim_cap:
        diagnostics.append(
            Diagnostic(
                level="error",
                code="dimension-cap",
                message=(
                    f"MVN dimension {grid.n_ports} > cap {settings.mvn_dim_cap} "
                    f"(receiver {receiver}, grid {grid.label})"
                ),
                case=case,
            )
        )
        return diagnostics

    try:
        R = correlation_matrix(grid)
    except DegenerateGeometryError as e:
        diagnostics.append(
            Diagnostic(level="error", code="degenerate-geometry", message=str(e), case=case)
        )
        return diagnostics
    if R.jitter > 0.0:
        diagnostics.append(
            Diagnostic(
                level="info",
                code="jitter",
                message=f"grid {grid.label} factorised with jitter {R.jitter:g}",
                case=case,
            )
        )
    factor = correction_factor(grid.n_ports, average_dependence(R))
    if factor <= 0.0:
        diagnostics.append(
            Diagnostic(
                level="error",
                code="heuristic-range",
                message=f"EC correction factor {factor:.4g} <= 0 for grid {grid.label}",
                case=case,
            )
        )
    return diagnostics


def _check_sweep(cfg: RunConfig) -> list[Diagnostic]:
    sweep = cfg.sweep
    if sweep is None:
        return []
    if sweep.variable == "rate_bits" and sweep.start < 0.0:
        return [Diagnostic(level="error", code="sweep-domain", message="rates must be >= 0")]
    if sweep.variable == "bandwidth_hz" and sweep.start <= 0.0:
        return [Diagnostic(level="error", code="sweep-domain", message="bandwidth must be > 0")]
    return []


def validate(cfg: RunConfig, policy: Optional[str] = None) -> list[Diagnostic]:
    """Every problem the run would hit, as data; nothing is raised or modified."""
    policy = policy or cfg.interference_policy
    diagnostics = _check_interference(cfg, policy) + _check_sweep(cfg)
    for case in cfg.case_list():
        for receiver, grid in enumerate(case.grids, start=1):
            diagnostics.extend(_check_grid(grid, receiver, case.name))
    return diagnostics


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.level == "error" for d in diagnostics)
