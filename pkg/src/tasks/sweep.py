"""Concurrent parameter sweeps behind the CLI subcommands."""

import asyncio
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ValidationError

import src
from src.config import settings
from src.core.errors import ConfigError
from src.schemas.estimates import McConfig, McEstimate, MetricEstimate
from src.schemas.link import DorConfig, RateThresholds, Scenario
from src.schemas.run import CaseSpec, ResultRow, RunConfig, RunManifest
from src.services import metrics, montecarlo
from src.services.geometry import correlation_matrix
from src.services.output import ResultWriter

logger = logging.getLogger(__name__)

Command = Literal["op", "dor", "ec", "region", "emax", "mc", "sweep"]

COMMAND_METRICS: dict[str, tuple[str, ...]] = {
    "op": ("op",),
    "dor": ("dor",),
    "ec": ("ec",),
    "region": ("region",),
    "emax": ("emax",),
    "mc": ("op", "dor", "ec"),
    "sweep": ("op", "dor", "ec"),
}


class RunOptions(BaseModel):
    """CLI overrides; ``None`` keeps the config (then settings) value."""

    seed: Optional[int] = None
    tol: Optional[float] = None
    trials: Optional[int] = None
    sampler: Optional[Literal["copula", "physical"]] = None
    dor_variant: Optional[Literal["derived", "theorem", "proof"]] = None
    policy: Optional[Literal["error", "warn"]] = None
    out_dir: Optional[Path] = None
    config_path: Optional[Path] = None


class PointInputs(BaseModel):
    sweep_value: float
    scenario: Scenario
    thresholds: RateThresholds
    dor: DorConfig


def _mc_config(cfg: RunConfig, options: RunOptions, seed: int) -> McConfig:
    given = cfg.mc.model_dump(exclude={"enabled"}, exclude_none=True)
    given.setdefault("seed", seed)
    if options.seed is not None:
        given["seed"] = options.seed
    if options.trials is not None:
        given["trials"] = options.trials
    if options.sampler is not None:
        given["sampler"] = options.sampler
    try:
        return McConfig(**given)
    except ValidationError as e:
        raise ConfigError(f"mc: {e.errors()[0]['msg']}") from e


class SweepRunner:
    """Evaluates one subcommand over every (case, sweep point) of a run config."""

    def __init__(self, cfg: RunConfig, command: Command, options: Optional[RunOptions] = None):
        self.cfg = cfg
        self.command = command
        self.options = options or RunOptions()
        self.seed = self.options.seed if self.options.seed is not None else cfg.seed
        self.tol = self.options.tol or cfg.copula_tol
        self.policy = self.options.policy or cfg.interference_policy
        self.dor_variant = self.options.dor_variant or settings.dor_variant
        self.mc = _mc_config(cfg, self.options, self.seed)

        self.with_analytic = command != "mc"
        self.with_asymptotic = command != "mc" and cfg.asymptotic
        self.with_mc = command == "mc" or cfg.mc.enabled

    def point_values(self) -> list[Optional[float]]:
        return self.cfg.sweep.values() if self.cfg.sweep else [None]

    def inputs(self, case: CaseSpec, x: Optional[float]) -> PointInputs:
        """Scenario, thresholds and DOR settings at sweep value ``x``."""
        spec = self.cfg.scenario
        budgets = [spec.budget1, spec.budget2]
        thresholds = self.cfg.thresholds
        dor = self.cfg.dor
        sweep = self.cfg.sweep

        if sweep is not None and x is not None:
            if sweep.variable == "avg_snr_db":
                rule: dict[str, Optional[float]] = {}
                if sweep.inr_db is not None:
                    rule = {"inr_db": sweep.inr_db, "inr_offset_db": None}
                elif sweep.inr_offset_db is not None:
                    rule = {"inr_db": None, "inr_offset_db": sweep.inr_offset_db}
                budgets = [
                    b.model_copy(update={"snr_db": x, **rule}) for b in budgets
                ]
            elif sweep.variable == "rate_bits":
                dor = dor.model_copy(update={"data_bits": x, "data2_bits": x})
            else:
                dor = dor.model_copy(update={"band_hz": x, "band2_hz": x, "band_sum_hz": x})

        grid1, grid2 = case.grids
        scenario = Scenario(
            grid1=grid1,
            grid2=grid2,
            budget1=budgets[0].to_budget(),
            budget2=budgets[1].to_budget(),
            copula_tol=self.tol,
            seed=self.seed,
            interference_policy=self.policy,
        )
        return PointInputs(
            sweep_value=spec.budget1.snr_db if x is None else x,
            scenario=scenario,
            thresholds=thresholds.to_thresholds(),
            dor=dor.to_config(),
        )

    def evaluate(self, case: CaseSpec, x: Optional[float]) -> list[ResultRow]:
        p = self.inputs(case, x)
        rows: list[ResultRow] = []
        for metric in COMMAND_METRICS[self.command]:
            rows.extend(getattr(self, f"_{metric}")(p))
        return rows

    @staticmethod
    def _event_rows(
        x: float, metric: str, events: tuple[MetricEstimate, MetricEstimate, MetricEstimate]
    ) -> list[ResultRow]:
        """System union row, then the per-user and sum-channel event rows."""
        union = metrics.union_of_events(events)
        rows = [
            ResultRow(sweep_value=x, metric=metric, variant=union.variant, value=union.value, err=union.abs_error)
        ]
        for receiver, e in zip(("1", "2", "sum"), events):
            rows.append(
                ResultRow(
                    sweep_value=x,
                    metric=metric,
                    variant=e.variant,
                    value=e.value,
                    err=e.abs_error,
                    receiver=receiver,
                )
            )
        return rows

    @staticmethod
    def _mc_row(x: float, metric: str, est: McEstimate, receiver: str = "system") -> ResultRow:
        return ResultRow(
            sweep_value=x,
            metric=metric,
            variant="mc",
            value=est.value,
            err=est.stderr,
            trials=est.trials,
            receiver=receiver,
        )

    def _op(self, p: PointInputs) -> list[ResultRow]:
        rows = []
        if self.with_analytic:
            rows += self._event_rows(p.sweep_value, "op", metrics.outage_events(p.scenario, p.thresholds))
        if self.with_asymptotic:
            rows += self._event_rows(
                p.sweep_value, "op", metrics.outage_events(p.scenario, p.thresholds, asymptotic=True)
            )
        if self.with_mc:
            metrics.check_scenario(p.scenario)
            rows.append(self._mc_row(p.sweep_value, "op", montecarlo.estimate_op(p.scenario, p.thresholds, self.mc)))
        return rows

    def _dor(self, p: PointInputs) -> list[ResultRow]:
        rows = []
        if self.with_analytic:
            events = metrics.dor_events(p.scenario, p.dor, self.dor_variant)
            rows += self._event_rows(p.sweep_value, "dor", events)
        if self.with_asymptotic:
            events = metrics.dor_events(p.scenario, p.dor, self.dor_variant, asymptotic=True)
            rows += self._event_rows(p.sweep_value, "dor", events)
        if self.with_mc:
            metrics.check_scenario(p.scenario)
            rows.append(self._mc_row(p.sweep_value, "dor", montecarlo.estimate_dor(p.scenario, p.dor, self.mc)))
        return rows

    def _ec(self, p: PointInputs) -> list[ResultRow]:
        x = p.sweep_value
        rows = []
        variants = []
        if self.with_analytic:
            variants.append(("analytic", metrics.ergodic_capacity(p.scenario)))
        if self.with_asymptotic:
            variants.append(("asymptotic", metrics.ergodic_capacity_asymptotic(p.scenario)))
        for variant, triple in variants:
            for receiver, value in zip(("1", "2", "sum"), triple):
                rows.append(ResultRow(sweep_value=x, metric="ec", variant=variant, value=value, receiver=receiver))
        if self.with_mc:
            metrics.check_scenario(p.scenario)
            for receiver, est in zip(("1", "2", "sum"), montecarlo.estimate_ec(p.scenario, self.mc)):
                rows.append(self._mc_row(x, "ec", est, receiver))
        return rows

    def _region(self, p: PointInputs) -> list[ResultRow]:
        """Region at the expected port maxima: per-user caps, then the corners."""
        s = p.scenario
        metrics.check_scenario(s)
        gammas = [metrics.expected_max_heuristic(g, b.avg_snr) for g, b in zip(s.grids, s.budgets)]
        kappas = [metrics.expected_max_heuristic(g, b.avg_sum) for g, b in zip(s.grids, s.budgets)]
        region = metrics.instantaneous_capacity_region(*gammas, *kappas)
        x = p.sweep_value
        rows = [
            ResultRow(sweep_value=x, metric="region_cap", variant="analytic", value=region.c1_max, receiver="1"),
            ResultRow(sweep_value=x, metric="region_cap", variant="analytic", value=region.c2_max, receiver="2"),
            ResultRow(sweep_value=x, metric="region_cap", variant="analytic", value=region.csum_max, receiver="sum"),
        ]
        for k, (r1, r2) in enumerate(region.corners):
            rows.append(ResultRow(sweep_value=x, metric=f"corner{k}", variant="analytic", value=r1, receiver="1"))
            rows.append(ResultRow(sweep_value=x, metric=f"corner{k}", variant="analytic", value=r2, receiver="2"))
        return rows

    def _emax(self, p: PointInputs) -> list[ResultRow]:
        s = p.scenario
        x = p.sweep_value
        rows = []
        for i, (grid, budget) in enumerate(zip(s.grids, s.budgets), start=1):
            receiver = str(i)
            if self.with_analytic:
                rows.append(
                    ResultRow(
                        sweep_value=x,
                        metric="emax_gamma",
                        variant="analytic",
                        value=metrics.expected_max_heuristic(grid, budget.avg_snr),
                        receiver=receiver,
                    )
                )
                rows.append(
                    ResultRow(
                        sweep_value=x,
                        metric="emax_kappa",
                        variant="analytic",
                        value=metrics.expected_max_heuristic(grid, budget.avg_sum),
                        receiver=receiver,
                    )
                )
            if self.with_mc:
                gamma = montecarlo.estimate_expected_max(grid, budget.avg_snr, self.mc)
                kappa = montecarlo.estimate_expected_max(grid, budget.avg_snr, self.mc, inr_mean=budget.avg_inr)
                rows.append(self._mc_row(x, "emax_gamma", gamma, receiver))
                rows.append(self._mc_row(x, "emax_kappa", kappa, receiver))
        return rows

    async def _evaluate_async(
        self, semaphore: asyncio.Semaphore, case: CaseSpec, index: int, x: Optional[float]
    ) -> list[ResultRow]:
        async with semaphore:
            total = len(self.point_values())
            label = "-" if x is None else f"{x:g}"
            logger.info(f"[{self.command}/{case.name}] point {index + 1}/{total} value={label}")
            return await asyncio.to_thread(self.evaluate, case, x)

    def manifest(self, files: list[Path]) -> RunManifest:
        jitter = {}
        for case in self.cfg.case_list():
            for receiver, grid in enumerate(case.grids, start=1):
                jitter[f"{case.name}/{receiver}"] = correlation_matrix(grid).jitter
        return RunManifest(
            command=self.command,
            config=str(self.options.config_path) if self.options.config_path else None,
            name=self.cfg.name,
            version=src.__version__,
            created_at=datetime.now(timezone.utc).isoformat(),
            seed=self.seed,
            copula_tol=self.tol,
            mc_trials=self.mc.trials if self.with_mc else None,
            mc_sampler=self.mc.sampler if self.with_mc else None,
            dor_variant=self.dor_variant,
            correlation_kernel=settings.correlation_kernel,
            interference_policy=self.policy,
            jitter=jitter,
            files=[f.name for f in files],
        )

    async def run(self, writer: Optional[ResultWriter] = None) -> list[Path]:
        """Evaluate all points concurrently, then write one CSV per case and the manifest."""
        writer = writer or ResultWriter(self.options.out_dir)
        semaphore = asyncio.Semaphore(settings.sweep_workers)
        cases = self.cfg.case_list()
        values = self.point_values()

        per_case = await asyncio.gather(
            *(
                asyncio.gather(
                    *(self._evaluate_async(semaphore, case, i, x) for i, x in enumerate(values))
                )
                for case in cases
            )
        )

        files = []
        for case, parts in zip(cases, per_case):
            rows = [row for part in parts for row in part]
            files.append(await writer.write_csv(f"{self.command}_{case.name}.csv", rows))
        files.append(
            await writer.write_manifest(f"{self.command}_manifest.json", self.manifest(files))
        )
        return files
