"""
Analysis Module
===============
Certificates evaluated along trajectories:
- Lyapunov function V(x) = sum_i xi_i * integral_0^{x_i} h(s) ds
- B = (Xi L + L^T Xi) / 2 and the two expressions of dV/dt (quadratic form, SOS)
- sector-bound inequality between nonlinear and linear SOS terms
- conservation of x_xi, consensus time, fitted decay rate, rate comparison
"""

from typing import Optional, Tuple

import numpy as np

from nlconsensus.core.config import settings
from nlconsensus.core.exceptions import Incomparable, InvariantViolation
from nlconsensus.core.logger import logger
from nlconsensus.models.graph_models import BMatrix, Laplacian, LeftEigenvector
from nlconsensus.models.protocol_models import Protocol
from nlconsensus.models.reports import AnalysisReport, RateComparison
from nlconsensus.models.state import Trajectory


def _pair_terms(B: BMatrix, values: np.ndarray) -> np.ndarray:
    """sum_{i>j} b_ij (v_i - v_j)^2 for each row of values (or a single vector)."""
    rows, cols = np.tril_indices(B.n, k=-1)
    v = np.atleast_2d(values)
    diffs = v[:, rows] - v[:, cols]
    return (diffs * diffs) @ B.entries[rows, cols]


class AnalysisModule:

    def __init__(self, rel_tol: Optional[float] = None, b_tol: Optional[float] = None):
        self.rel_tol = settings.LYAPUNOV_REL_TOL if rel_tol is None else rel_tol
        self.b_tol = settings.B_MATRIX_TOL if b_tol is None else b_tol

    # ==================== CERTIFICATES ====================

    def lyapunov(self, xi: LeftEigenvector, p: Protocol, x) -> float:
        return float(xi.xi @ p.antiderivative(np.asarray(x, dtype=float)))

    def b_matrix(self, xi: LeftEigenvector, L: Laplacian) -> BMatrix:
        if xi.n != L.n:
            raise ValueError(f"xi has {xi.n} entries but L is {L.n}x{L.n}")
        weighted = xi.xi[:, None] * L.entries
        entries = 0.5 * (weighted + weighted.T)

        tol = self.b_tol * max(1.0, L.inf_norm())
        asym = float(np.max(np.abs(entries - entries.T)))
        row = float(np.max(np.abs(entries.sum(axis=1))))
        off = entries - np.diag(np.diag(entries))
        if asym > tol or row > tol or np.max(off) > tol:
            raise InvariantViolation(
                f"B invariants fail (asymmetry {asym:.2e}, row sum {row:.2e}, "
                f"max off-diagonal {np.max(off):.2e}); xi and L are inconsistent"
            )
        return BMatrix(entries=entries)

    def vdot_sos(self, B: BMatrix, p: Protocol, x) -> Tuple[float, float]:
        """
        dV/dt two ways: -H^T B H and sum_{i>j} b_ij (h(x_i) - h(x_j))^2.
        Returns (SOS value, |difference|).
        """
        hx = p.evaluate(np.asarray(x, dtype=float))
        quadratic = -float(hx @ B.entries @ hx)
        sos = float(_pair_terms(B, hx)[0])
        return sos, abs(quadratic - sos)

    def sector_inequality(self, B: BMatrix, p: Protocol, x, alpha: float) -> Tuple[float, float, float]:
        """
        Both sides of sum b_ij (dh)^2 <= alpha^2 sum b_ij (dx)^2.
        Returns (lhs, rhs, rhs - lhs); a nonnegative slack means it holds.
        """
        x = np.asarray(x, dtype=float)
        lhs = float(_pair_terms(B, p.evaluate(x))[0])
        rhs = alpha * alpha * float(_pair_terms(B, x)[0])
        return lhs, rhs, rhs - lhs

    # ==================== TRAJECTORY ANALYSIS ====================

    def consensus_time(self, traj: Trajectory, eps: float) -> Optional[float]:
        hits = np.flatnonzero(traj.disagreement <= eps)
        return float(traj.times[hits[0]]) if hits.size else None

    def fit_decay_rate(self, traj: Trajectory) -> Optional[float]:
        """
        Least-squares slope of log(disagreement) over the window
        10 * consensus_tol <= d <= 0.5 * d(0); None with fewer than 3 points.
        """
        d = traj.disagreement
        if d[0] <= 0:
            return None
        mask = (d >= 10.0 * traj.config.consensus_tol) & (d <= 0.5 * d[0]) & (d > 0)
        if np.count_nonzero(mask) < 3:
            return None
        slope, _ = np.polyfit(traj.times[mask], np.log(d[mask]), 1)
        return float(-slope)

    def tail_oscillation(self, traj: Trajectory) -> float:
        """Largest per-agent range over the last TAIL_FRACTION of the run."""
        t_end = traj.times[-1]
        tail = traj.states[traj.times >= (1.0 - settings.TAIL_FRACTION) * t_end]
        if tail.shape[0] == 0:
            return 0.0
        return float(np.max(tail.max(axis=0) - tail.min(axis=0)))

    def analyze(
        self,
        traj: Trajectory,
        xi: LeftEigenvector,
        L: Laplacian,
        p: Protocol,
        eps: Optional[float] = None,
        sector_alpha: Optional[float] = None,
    ) -> AnalysisReport:
        eps = traj.config.consensus_tol if eps is None else eps
        states = traj.states

        values = p.antiderivative(states) @ xi.xi
        allowance = self.rel_tol * (1.0 + abs(values[0]))
        increases = np.flatnonzero(np.diff(values) > allowance)
        first_violation = float(traj.times[increases[0] + 1]) if increases.size else None
        if first_violation is not None:
            logger.warning(f"V increased between samples (first at t={first_violation:g}) for {p.label}")

        weighted = states @ xi.xi
        drift = float(np.max(np.abs(weighted - weighted[0])))

        B = self.b_matrix(xi, L)
        hx = p.evaluate(states)
        quadratic = -np.einsum("ki,ij,kj->k", hx, B.entries, hx)
        sos = _pair_terms(B, hx)
        sos_residual = float(np.max(np.abs(quadratic - sos)))

        min_slack = None
        if sector_alpha is not None:
            rhs = sector_alpha * sector_alpha * _pair_terms(B, states)
            min_slack = float(np.min(rhs - sos))

        report = AnalysisReport(
            v_monotone=first_violation is None,
            first_v_violation_t=first_violation,
            max_conservation_drift=drift,
            consensus_time=self.consensus_time(traj, eps),
            fitted_decay_rate=self.fit_decay_rate(traj),
            sos_residual=sos_residual,
            max_vdot=float(np.max(sos)),
            min_sector_slack=min_slack,
            final_disagreement=float(traj.disagreement[-1]),
            tail_oscillation=self.tail_oscillation(traj),
            expected_decision=float(weighted[0]),
            horizon=float(traj.times[-1]),
        )
        logger.info(
            f"Analysis {p.label}: v_monotone={report.v_monotone} drift={drift:.2e} "
            f"consensus_time={report.consensus_time} rate={report.fitted_decay_rate}"
        )
        return report

    def compare_rates(self, traj_a: Trajectory, traj_b: Trajectory, eps: float) -> RateComparison:
        """Which run first reaches disagreement <= eps; ties within one recording interval."""
        if traj_a.n != traj_b.n or not np.allclose(traj_a.states[0], traj_b.states[0]):
            raise ValueError("trajectories must start from the same initial state")

        time_a = self.consensus_time(traj_a, eps)
        time_b = self.consensus_time(traj_b, eps)
        if time_a is None and time_b is None:
            raise Incomparable(f"neither run reaches disagreement <= {eps:g} within its horizon")

        resolution = max(traj_a.config.record_interval, traj_b.config.record_interval)
        if time_b is None:
            faster = "a"
        elif time_a is None:
            faster = "b"
        elif abs(time_a - time_b) < resolution:
            faster = "tie"
        else:
            faster = "a" if time_a < time_b else "b"

        rate_a = self.fit_decay_rate(traj_a)
        rate_b = self.fit_decay_rate(traj_b)
        ratio = rate_a / rate_b if rate_a is not None and rate_b else None

        logger.info(
            f"Rate comparison at eps={eps:g}: {traj_a.protocol_label}={time_a} "
            f"{traj_b.protocol_label}={time_b} -> {faster}"
        )
        return RateComparison(
            faster=faster,
            eps=eps,
            time_a=time_a,
            time_b=time_b,
            rate_a=rate_a,
            rate_b=rate_b,
            rate_ratio=ratio,
            label_a=traj_a.protocol_label,
            label_b=traj_b.protocol_label,
        )


# Singleton instance
analysis_module = AnalysisModule()
