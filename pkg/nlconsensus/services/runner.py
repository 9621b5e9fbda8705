"""
Experiment Runner
=================
Glue between config files and the engines:
load graph + protocol -> certify the protocol on the state range ->
simulate -> analyze -> write CSV / JSON / key-value / SVG / run log.

Comparisons run their two simulations concurrently in worker threads;
each thread captures its own run log.
"""

import asyncio
import math
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from nlconsensus.core.exceptions import ConfigError
from nlconsensus.core.logger import capture_run_log, logger
from nlconsensus.models.graph_models import ConnectivityReport, Laplacian, LeftEigenvector, WeightedDigraph
from nlconsensus.models.protocol_models import MonotonicityReport, Protocol
from nlconsensus.models.reports import AnalysisReport, RateComparison, RunSummary
from nlconsensus.models.state import ExperimentConfig, Trajectory
from nlconsensus.modules.analysis import analysis_module
from nlconsensus.modules.dynamics import dynamics_module
from nlconsensus.modules.graph import graph_module
from nlconsensus.modules.protocol import protocol_module
from nlconsensus.services.export import export_service
from nlconsensus.services.graph_io import graph_reader
from nlconsensus.services.plotting import plotting_service


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: ExperimentConfig
    graph: WeightedDigraph
    laplacian: Laplacian
    protocol: Protocol
    connectivity: ConnectivityReport
    xi: Optional[LeftEigenvector] = None
    monotonicity: MonotonicityReport
    trajectory: Trajectory
    analysis: Optional[AnalysisReport] = None
    summary: RunSummary
    log: list = []


class ExperimentRunner:

    def load_inputs(self, cfg: ExperimentConfig) -> Tuple[WeightedDigraph, Protocol]:
        g = graph_reader.read(cfg.graph_source, cfg.graph_format)
        if len(cfg.x0) != g.n:
            raise ConfigError(f"x0 has {len(cfg.x0)} entries but the graph has {g.n} agents")
        p = protocol_module.parse_spec(cfg.protocol_spec)
        return g, p

    def run(self, cfg: ExperimentConfig) -> RunResult:
        with capture_run_log() as entries:
            g, p = self.load_inputs(cfg)
            L = graph_module.build_laplacian(g)
            connectivity = graph_module.connectivity(g)
            monotonicity = protocol_module.check_monotone(p, protocol_module.state_range(cfg.x0))

            traj = dynamics_module.simulate(g, p, cfg.x0, cfg.sim, certified=cfg.mode == "certified")

            xi = None
            report = None
            if connectivity.strongly_connected:
                xi = graph_module.left_eigenvector(L)
                alpha = monotonicity.estimated_sector_bound if monotonicity.monotone_on_range else None
                report = analysis_module.analyze(traj, xi, L, p, sector_alpha=alpha)

            summary = self._summarize(cfg, p, traj, monotonicity, report)
        return RunResult(
            config=cfg,
            graph=g,
            laplacian=L,
            protocol=p,
            connectivity=connectivity,
            xi=xi,
            monotonicity=monotonicity,
            trajectory=traj,
            analysis=report,
            summary=summary,
            log=list(entries),
        )

    def _summarize(
        self,
        cfg: ExperimentConfig,
        p: Protocol,
        traj: Trajectory,
        monotonicity: MonotonicityReport,
        report: Optional[AnalysisReport],
    ) -> RunSummary:
        return RunSummary(
            name=cfg.name,
            protocol=p.label,
            mode=cfg.mode,
            n=traj.n,
            steps=traj.steps,
            terminated_by=traj.terminated_by,
            decision_value=traj.decision_value,
            expected_decision=report.expected_decision if report else None,
            consensus_time=report.consensus_time if report else analysis_module.consensus_time(
                traj, traj.config.consensus_tol
            ),
            final_disagreement=float(traj.disagreement[-1]),
            tail_oscillation=analysis_module.tail_oscillation(traj),
            max_conservation_drift=report.max_conservation_drift if report else math.nan,
            v_monotone=report.v_monotone if report else None,
            fitted_decay_rate=report.fitted_decay_rate if report else analysis_module.fit_decay_rate(traj),
            sos_residual=report.sos_residual if report else math.nan,
            monotone_on_range=monotonicity.monotone_on_range,
            estimated_sector_bound=monotonicity.estimated_sector_bound,
        )

    def write_outputs(self, result: RunResult, out_dir: Path, prefix: str = "") -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        export_service.write_trajectory_csv(result.trajectory, out_dir / f"{prefix}trajectory.csv")
        export_service.write_json(result.summary, out_dir / f"{prefix}summary.json")
        if result.analysis is not None:
            export_service.write_key_values(result.analysis, out_dir / f"{prefix}analysis.txt")
        export_service.write_run_log(result.log, out_dir / f"{prefix}run.log")
        if result.config.plot:
            plotting_service.plot_trajectory(
                result.trajectory, out_dir / f"{prefix}trajectory.svg", title=result.config.name
            )
        return out_dir

    async def run_pair(self, cfg_a: ExperimentConfig, cfg_b: ExperimentConfig) -> Tuple[RunResult, RunResult]:
        logger.info(f"Running {cfg_a.name!r} and {cfg_b.name!r} in parallel")
        return tuple(await asyncio.gather(asyncio.to_thread(self.run, cfg_a), asyncio.to_thread(self.run, cfg_b)))

    def compare(self, result_a: RunResult, result_b: RunResult, eps: float) -> RateComparison:
        if not (result_a.graph.weights.shape == result_b.graph.weights.shape
                and (result_a.graph.weights == result_b.graph.weights).all()):
            raise ConfigError("compared runs must use the same graph")
        if result_a.config.x0 != result_b.config.x0:
            raise ConfigError("compared runs must start from the same x0")
        return analysis_module.compare_rates(result_a.trajectory, result_b.trajectory, eps)


experiment_runner = ExperimentRunner()
