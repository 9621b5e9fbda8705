"""
Graph Module
============
Laplacians, connectivity certification and the normalized left null vector
of a weighted digraph.

Orientation convention: a_ij > 0 means node i receives from node j, so
information flows j -> i. Reachability, spanning-tree roots and SCCs are all
computed along that flow.
"""

from typing import List, Optional, Tuple

import numpy as np

from nlconsensus.core.config import settings
from nlconsensus.core.exceptions import (
    DegenerateNullspace,
    NonPositiveEntry,
    NotStronglyConnected,
)
from nlconsensus.core.logger import logger
from nlconsensus.models.graph_models import (
    ConnectivityReport,
    Laplacian,
    LeftEigenvector,
    WeightedDigraph,
)


def _tarjan(succ: List[List[int]]) -> Tuple[List[int], int]:
    """Iterative Tarjan SCC. Returns (component id per node, component count)."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    stack: List[int] = []
    counter = 0
    ncomp = 0

    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp, ncomp


class GraphModule:
    """Laplacian construction and structural certificates."""

    def __init__(self, tol: Optional[float] = None):
        self.tol = tol if tol is not None else settings.NULLSPACE_TOL

    def build_laplacian(self, g: WeightedDigraph) -> Laplacian:
        """l_ij = -a_ij off the diagonal; l_ii = sum_k a_ik."""
        entries = -np.array(g.weights, dtype=float)
        np.fill_diagonal(entries, 0.0)
        np.fill_diagonal(entries, -entries.sum(axis=1))
        return Laplacian(entries=entries)

    def connectivity(self, g: WeightedDigraph) -> ConnectivityReport:
        return self._connectivity_from_support(g.weights > 0)

    def _connectivity_from_support(self, support: np.ndarray) -> ConnectivityReport:
        n = support.shape[0]
        # succ[j] lists the nodes that listen to j
        succ = [[int(i) for i in np.flatnonzero(support[:, j])] for j in range(n)]
        comp, ncomp = _tarjan(succ)

        has_incoming = [False] * ncomp
        for i, j in zip(*np.nonzero(support)):
            if comp[i] != comp[j]:
                has_incoming[comp[i]] = True
        sources = [c for c in range(ncomp) if not has_incoming[c]]

        roots = frozenset()
        if len(sources) == 1:
            roots = frozenset(v for v in range(n) if comp[v] == sources[0])

        report = ConnectivityReport(
            strongly_connected=ncomp == 1,
            has_spanning_tree=len(sources) == 1,
            scc_count=ncomp,
            root_candidates=roots,
        )
        logger.debug(
            f"Connectivity: n={n} scc_count={ncomp} sources={len(sources)} roots={sorted(roots)}"
        )
        return report

    def connectivity_of_laplacian(self, L: Laplacian) -> ConnectivityReport:
        return self._connectivity_from_support(L.support())

    def rank_defect(self, L: Laplacian, tol: Optional[float] = None) -> int:
        """n minus the numerical rank of L, thresholded at tol * ||L||_inf."""
        tol = self.tol if tol is None else tol
        threshold = tol * L.inf_norm()
        rank = int(np.linalg.matrix_rank(L.entries, tol=threshold))
        return L.n - rank

    def left_eigenvector(self, L: Laplacian, tol: Optional[float] = None) -> LeftEigenvector:
        """
        Solve L^T xi = 0 with one equation replaced by sum(xi) = 1.

        For an SC graph the rows of L^T are dependent (they sum to (L 1)^T = 0)
        and the null space is one-dimensional, so the bordered system is
        nonsingular.
        """
        tol = self.tol if tol is None else tol
        report = self.connectivity_of_laplacian(L)
        if not report.strongly_connected:
            raise NotStronglyConnected(
                f"graph has {report.scc_count} strongly connected components; xi is not unique and positive"
            )

        defect = self.rank_defect(L, tol)
        if defect != 1:
            raise DegenerateNullspace(f"null space of L^T has numerical dimension {defect}, expected 1")

        n = L.n
        system = np.array(L.entries.T, dtype=float)
        system[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        try:
            xi = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as e:
            raise DegenerateNullspace(f"bordered null-space system is singular: {e}") from e

        if np.any(xi <= tol):
            i = int(np.argmin(xi))
            raise NonPositiveEntry(f"xi[{i}] = {xi[i]:.3e} is not positive")

        xi = xi / xi.sum()
        residual = float(np.max(np.abs(L.entries.T @ xi)))
        abs_tol = tol * max(1.0, L.inf_norm())
        if residual > abs_tol:
            raise DegenerateNullspace(f"||L^T xi||_inf = {residual:.3e} exceeds {abs_tol:.3e}")

        logger.info(f"Left eigenvector computed (n={n}, residual={residual:.2e})")
        return LeftEigenvector(xi=xi, tol=abs_tol, residual=residual)

    def is_balanced(self, L: Laplacian, tol: Optional[float] = None) -> bool:
        """Zero column sums, i.e. 1^T L = 0 and xi is uniform."""
        tol = self.tol if tol is None else tol
        return bool(np.max(np.abs(L.entries.sum(axis=0))) <= tol * max(1.0, L.inf_norm()))

    def laplacian_spectrum(self, L: Laplacian) -> np.ndarray:
        """Eigenvalues sorted by real part, then imaginary part."""
        eig = np.linalg.eigvals(L.entries)
        return eig[np.lexsort((eig.imag, eig.real))]

    def three_agent_graph(self) -> WeightedDigraph:
        """Three agents: 1 hears 2 and 3, 2 hears 3, 3 hears 1."""
        return WeightedDigraph(weights=[[0, 1, 1], [0, 0, 1], [1, 0, 0]])


# Singleton instance
graph_module = GraphModule()
