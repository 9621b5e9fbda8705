from typing import FrozenSet, Iterable, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

# Edge orientation: weights[i, j] = a_ij > 0 means node i receives from node j,
# so information flows j -> i.


def _frozen_square(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} must have at least one row")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


class WeightedDigraph(BaseModel):
    """Nonnegative adjacency matrix with zero diagonal."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray

    @field_validator("weights", mode="before")
    @classmethod
    def check_weights(cls, v):
        arr = _frozen_square(v, "weights")
        if np.any(arr < 0):
            i, j = np.argwhere(arr < 0)[0]
            raise ValueError(f"negative weight a[{i},{j}] = {arr[i, j]}")
        if np.any(np.diag(arr) != 0):
            i = int(np.flatnonzero(np.diag(arr))[0])
            raise ValueError(f"self-loop at node {i}: a[{i},{i}] = {arr[i, i]}")
        return arr

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int, float]]) -> "WeightedDigraph":
        """Build from (i, j, a_ij) triples; repeated pairs accumulate."""
        if n < 1:
            raise ValueError("n must be positive")
        a = np.zeros((n, n))
        for i, j, w in edges:
            a[i, j] += w
        return cls(weights=a)

    def neighbors(self, i: int) -> List[int]:
        """Nodes that node i receives information from."""
        return [int(j) for j in np.flatnonzero(self.weights[i] > 0)]

    def edge_count(self) -> int:
        return int(np.count_nonzero(self.weights))


class Laplacian(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def check_entries(cls, v):
        arr = _frozen_square(v, "entries")
        off = arr - np.diag(np.diag(arr))
        if np.any(off > 0):
            raise ValueError("Laplacian off-diagonal entries must be nonpositive")
        if np.any(np.diag(arr) < 0):
            raise ValueError("Laplacian diagonal entries must be nonnegative")
        scale = max(1.0, float(np.max(np.abs(arr))))
        if np.max(np.abs(arr.sum(axis=1))) > 1e-12 * scale * arr.shape[0]:
            raise ValueError("Laplacian rows must sum to zero")
        return arr

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def support(self) -> np.ndarray:
        """Boolean edge pattern a_ij > 0 recovered from the off-diagonals."""
        mask = self.entries < 0
        np.fill_diagonal(mask, False)
        return mask

    def inf_norm(self) -> float:
        return float(np.max(np.abs(self.entries).sum(axis=1)))


class LeftEigenvector(BaseModel):
    """Positive, sum-normalized left null vector of a Laplacian."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    xi: np.ndarray
    tol: float
    residual: float  # ||L^T xi||_inf at construction

    @field_validator("xi", mode="before")
    @classmethod
    def check_xi(cls, v):
        arr = np.array(v, dtype=float, copy=True).reshape(-1)
        if arr.size < 1:
            raise ValueError("xi must be nonempty")
        if np.any(arr <= 0):
            raise ValueError("xi entries must be positive")
        if abs(arr.sum() - 1.0) > 1e-12 * arr.size:
            raise ValueError(f"xi must sum to 1, sums to {arr.sum()!r}")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_residual(self) -> "LeftEigenvector":
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.residual > self.tol:
            raise ValueError(f"residual {self.residual:.3e} exceeds tol {self.tol:.3e}")
        return self

    @property
    def n(self) -> int:
        return self.xi.shape[0]


class ConnectivityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    strongly_connected: bool
    has_spanning_tree: bool
    scc_count: int
    root_candidates: FrozenSet[int]  # 0-based node indices

    @model_validator(mode="after")
    def check_consistency(self) -> "ConnectivityReport":
        if self.strongly_connected and not self.has_spanning_tree:
            raise ValueError("strongly connected graph must have a spanning tree")
        if self.strongly_connected != (self.scc_count == 1):
            raise ValueError("strongly_connected must agree with scc_count == 1")
        return self


class ReachabilityMatrix(BaseModel):
    """reach[i, j] is True when information from j reaches i."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    reach: np.ndarray

    @field_validator("reach", mode="before")
    @classmethod
    def check_reach(cls, v):
        arr = np.array(v, dtype=bool, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("reach must be square")
        if not np.all(np.diag(arr)):
            raise ValueError("reach must be reflexive")
        arr.setflags(write=False)
        return arr

    @property
    def n(self) -> int:
        return self.reach.shape[0]

    @property
    def strongly_connected(self) -> bool:
        return bool(np.all(self.reach))

    def roots(self) -> FrozenSet[int]:
        return frozenset(int(j) for j in np.flatnonzero(np.all(self.reach, axis=0)))


class BMatrix(BaseModel):
    """Symmetrized (Xi L + L^T Xi) / 2; behaves as an undirected Laplacian."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def check_entries(cls, v):
        return _frozen_square(v, "entries")

    @property
    def n(self) -> int:
        return self.entries.shape[0]
