"""
Dynamics Module
===============
Fixed-step integration of dx/dt = -L H(x), where H applies h to every agent.

Runs stop on the first of: disagreement (max x - min x) <= consensus_tol,
the step budget t_max / dt, or blow-up (non-finite state or
|x|_inf > DIVERGENCE_FACTOR * (1 + |x0|_inf)).
"""

from typing import Optional

import numpy as np

from nlconsensus.core.config import settings
from nlconsensus.core.exceptions import NonFiniteState, NotStronglyConnected
from nlconsensus.core.logger import logger
from nlconsensus.models.graph_models import Laplacian, LeftEigenvector, WeightedDigraph
from nlconsensus.models.protocol_models import Protocol
from nlconsensus.models.state import SimulationConfig, State, Trajectory
from nlconsensus.modules.analysis import analysis_module
from nlconsensus.modules.graph import graph_module


def disagreement(x: np.ndarray) -> float:
    return float(np.max(x) - np.min(x))


class DynamicsModule:

    def derivative(self, L: Laplacian, p: Protocol, x) -> np.ndarray:
        return -(L.entries @ p.evaluate(np.asarray(x, dtype=float)))

    def _advance(self, L: Laplacian, p: Protocol, x: np.ndarray, dt: float, integrator: str) -> np.ndarray:
        if integrator == "euler":
            return x + dt * self.derivative(L, p, x)
        k1 = self.derivative(L, p, x)
        k2 = self.derivative(L, p, x + 0.5 * dt * k1)
        k3 = self.derivative(L, p, x + 0.5 * dt * k2)
        k4 = self.derivative(L, p, x + dt * k3)
        return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step(self, L: Laplacian, p: Protocol, s: State, dt: float, integrator: str = "rk4") -> State:
        if dt <= 0:
            raise ValueError("dt must be positive")
        if s.n != L.n:
            raise ValueError(f"state has {s.n} agents but L is {L.n}x{L.n}")
        with np.errstate(over="ignore", invalid="ignore"):
            x = self._advance(L, p, s.x, dt, integrator)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"state became non-finite at t={s.t + dt:g}", t=s.t + dt)
        return State(t=s.t + dt, x=x)

    def weighted_average(self, xi: LeftEigenvector, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (xi.n,):
            raise ValueError(f"x has shape {x.shape}, expected ({xi.n},)")
        return float(xi.xi @ x)

    def simulate(
        self,
        g: WeightedDigraph,
        p: Protocol,
        x0,
        cfg: Optional[SimulationConfig] = None,
        certified: bool = True,
    ) -> Trajectory:
        cfg = cfg or SimulationConfig()
        x = np.array(x0, dtype=float).reshape(-1)
        if x.size != g.n:
            raise ValueError(f"x0 has {x.size} entries but the graph has {g.n} agents")

        L = graph_module.build_laplacian(g)
        report = graph_module.connectivity(g)
        if certified and not report.strongly_connected:
            raise NotStronglyConnected(
                f"certified run needs a strongly connected graph ({report.scc_count} components)"
            )
        xi = graph_module.left_eigenvector(L) if report.strongly_connected else None
        if xi is None:
            logger.warning("Unchecked run on a graph without positive xi; V and x_xi are recorded as NaN")

        guard = settings.DIVERGENCE_FACTOR * (1.0 + float(np.max(np.abs(x))))
        times, states, values, averages, spreads = [], [], [], [], []

        def record(t: float, state: np.ndarray, spread: float):
            times.append(t)
            states.append(state.copy())
            if xi is None:
                values.append(np.nan)
                averages.append(np.nan)
            else:
                values.append(analysis_module.lyapunov(xi, p, state))
                averages.append(self.weighted_average(xi, state))
            spreads.append(spread)

        logger.info(
            f"Simulating n={g.n} protocol={p.label} integrator={cfg.integrator} "
            f"dt={cfg.dt:g} t_max={cfg.t_max:g} tol={cfg.consensus_tol:g}"
        )

        spread = disagreement(x)
        record(0.0, x, spread)
        total = cfg.total_steps
        terminated_by = "ConsensusReached" if spread <= cfg.consensus_tol else "TimeLimit"
        k = 0

        if terminated_by != "ConsensusReached":
            with np.errstate(over="ignore", invalid="ignore"):
                for k in range(1, total + 1):
                    x = self._advance(L, p, x, cfg.dt, cfg.integrator)
                    t = k * cfg.dt
                    if not np.all(np.isfinite(x)):
                        logger.warning(f"Non-finite state at t={t:g}; stopping as Divergence")
                        terminated_by = "Divergence"
                        break
                    spread = disagreement(x)
                    if np.max(np.abs(x)) > guard:
                        logger.warning(f"|x|_inf exceeded {guard:.3g} at t={t:g}; stopping as Divergence")
                        record(t, x, spread)
                        terminated_by = "Divergence"
                        break
                    if spread <= cfg.consensus_tol:
                        record(t, x, spread)
                        terminated_by = "ConsensusReached"
                        break
                    if k == total or k % cfg.record_every == 0:
                        record(t, x, spread)

        decision = float(np.mean(states[-1])) if terminated_by == "ConsensusReached" else None
        logger.info(
            f"Run finished: {terminated_by} after {k} steps (t={times[-1]:g}, "
            f"disagreement={spreads[-1]:.3e}, decision={decision})"
        )
        return Trajectory(
            times=times,
            states=states,
            lyapunov=values,
            x_xi=averages,
            disagreement=spreads,
            terminated_by=terminated_by,
            decision_value=decision,
            config=cfg,
            protocol_label=p.label,
            steps=k,
        )


# Singleton instance
dynamics_module = DynamicsModule()
