"""
Oracle Module
=============
Brute-force references for cross-checking the main engines. Each one uses a
different algorithm from the engine it checks: Boolean transitive closure
instead of SCC decomposition, Gauss-Jordan elimination with full pivoting
instead of the bordered solve, forward Euler instead of RK4.
Speed is not a concern here.
"""

from typing import List

import numpy as np

from nlconsensus.core.exceptions import NonFiniteState
from nlconsensus.core.logger import logger
from nlconsensus.models.graph_models import Laplacian, ReachabilityMatrix, WeightedDigraph
from nlconsensus.models.protocol_models import Protocol


class OracleModule:

    def reachability(self, g: WeightedDigraph) -> ReachabilityMatrix:
        """Closure by repeated Boolean squaring of I + support(A)."""
        reach = np.eye(g.n, dtype=bool) | (g.weights > 0)
        while True:
            squared = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
            if np.array_equal(squared, reach):
                break
            reach = squared
        return ReachabilityMatrix(reach=reach)

    def nullspace_bruteforce(self, M, tol: float = 1e-9) -> List[np.ndarray]:
        """
        Basis of the numerical null space of M.
        Pivots below tol * max|M| are treated as zero.
        """
        a = np.array(M, dtype=float, copy=True)
        rows, cols = a.shape
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        threshold = tol * scale
        perm = list(range(cols))
        rank = 0

        for r in range(min(rows, cols)):
            sub = np.abs(a[r:, r:])
            if sub.size == 0:
                break
            pi, pj = np.unravel_index(int(np.argmax(sub)), sub.shape)
            if sub[pi, pj] <= threshold or scale == 0.0:
                break
            pi += r
            pj += r
            a[[r, pi], :] = a[[pi, r], :]
            a[:, [r, pj]] = a[:, [pj, r]]
            perm[r], perm[pj] = perm[pj], perm[r]

            a[r, :] /= a[r, r]
            for i in range(rows):
                if i != r and a[i, r] != 0.0:
                    a[i, :] -= a[i, r] * a[r, :]
            rank += 1

        basis = []
        for k in range(rank, cols):
            v = np.zeros(cols)
            v[perm[k]] = 1.0
            for i in range(rank):
                v[perm[i]] = -a[i, k]
            basis.append(v)
        logger.debug(f"Brute-force null space: rank={rank}, dimension={len(basis)}")
        return basis

    def euler_reference(self, L: Laplacian, p: Protocol, x0, dt_fine: float, t_end: float) -> np.ndarray:
        """Forward-Euler state at t_end; the step is shrunk so steps * dt == t_end."""
        steps = max(1, int(round(t_end / dt_fine)))
        dt = t_end / steps
        x = np.array(x0, dtype=float).reshape(-1)
        entries = L.entries
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(steps):
                x = x - dt * (entries @ p.evaluate(x))
                if not np.all(np.isfinite(x)):
                    raise NonFiniteState(f"Euler reference blew up at t={(k + 1) * dt:g}", t=(k + 1) * dt)
        return x


# Singleton instance
oracle_module = OracleModule()
