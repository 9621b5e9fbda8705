from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from nlconsensus.core.config import settings

IntegratorType = Literal["rk4", "euler"]
TerminationReason = Literal["ConsensusReached", "TimeLimit", "Divergence"]
RunMode = Literal["certified", "unchecked"]


class SimulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    dt: float = Field(default_factory=lambda: settings.DEFAULT_DT, gt=0)
    t_max: float = Field(default_factory=lambda: settings.DEFAULT_T_MAX, gt=0)
    consensus_tol: float = Field(default_factory=lambda: settings.DEFAULT_CONSENSUS_TOL, gt=0)
    record_every: int = Field(default_factory=lambda: settings.DEFAULT_RECORD_EVERY, ge=1)
    integrator: IntegratorType = Field(default_factory=lambda: settings.DEFAULT_INTEGRATOR)

    @field_validator("integrator", mode="before")
    @classmethod
    def lower_integrator(cls, v):
        return v.lower() if isinstance(v, str) else v

    @model_validator(mode="after")
    def check_horizon(self) -> "SimulationConfig":
        if self.dt >= self.t_max:
            raise ValueError(f"dt ({self.dt}) must be smaller than t_max ({self.t_max})")
        return self

    @property
    def total_steps(self) -> int:
        return int(np.ceil(self.t_max / self.dt - 1e-9))

    @property
    def record_interval(self) -> float:
        return self.dt * self.record_every


class State(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: float = Field(ge=0)
    x: np.ndarray

    @field_validator("x", mode="before")
    @classmethod
    def as_vector(cls, v):
        arr = np.array(v, dtype=float, copy=True).reshape(-1)
        arr.setflags(write=False)
        return arr

    @property
    def n(self) -> int:
        return self.x.shape[0]


class TrajectorySample(BaseModel):
    t: float
    x: List[float]
    V: float
    x_xi: float
    disagreement: float


class Trajectory(BaseModel):
    """Recorded samples of one run, stored column-wise."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray
    states: np.ndarray  # (samples, n)
    lyapunov: np.ndarray
    x_xi: np.ndarray
    disagreement: np.ndarray
    terminated_by: TerminationReason
    decision_value: Optional[float] = None
    config: SimulationConfig
    protocol_label: str = ""
    steps: int = 0

    @field_validator("times", "states", "lyapunov", "x_xi", "disagreement", mode="before")
    @classmethod
    def as_array(cls, v):
        arr = np.array(v, dtype=float, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_samples(self) -> "Trajectory":
        m = self.times.shape[0]
        if m < 1:
            raise ValueError("trajectory needs at least one sample")
        if self.states.ndim != 2 or self.states.shape[0] != m:
            raise ValueError("states must have one row per sample")
        for name in ("lyapunov", "x_xi", "disagreement"):
            if getattr(self, name).shape != (m,):
                raise ValueError(f"{name} must have one entry per sample")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if self.terminated_by == "ConsensusReached":
            if self.disagreement[-1] > self.config.consensus_tol:
                raise ValueError("ConsensusReached requires final disagreement <= consensus_tol")
        return self

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def final_state(self) -> State:
        return State(t=float(self.times[-1]), x=self.states[-1])

    @property
    def samples(self) -> List[TrajectorySample]:
        return [
            TrajectorySample(
                t=float(self.times[k]),
                x=self.states[k].tolist(),
                V=float(self.lyapunov[k]),
                x_xi=float(self.x_xi[k]),
                disagreement=float(self.disagreement[k]),
            )
            for k in range(len(self))
        ]

    def to_frame(self) -> pd.DataFrame:
        """Columns t, x_1..x_n, V, x_xi, disagreement."""
        frame = pd.DataFrame({"t": self.times})
        for i in range(self.n):
            frame[f"x_{i + 1}"] = self.states[:, i]
        frame["V"] = self.lyapunov
        frame["x_xi"] = self.x_xi
        frame["disagreement"] = self.disagreement
        return frame


class ExperimentConfig(BaseModel):
    """One simulation request as read from a flat config file plus CLI flags."""

    model_config = ConfigDict(frozen=True)

    name: str = "experiment"
    graph_source: str
    graph_format: Literal["auto", "matrix", "edges"] = "auto"
    protocol_spec: str
    x0: List[float]
    sim: SimulationConfig = Field(default_factory=SimulationConfig)
    outputs: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    mode: RunMode = "certified"
    plot: bool = False

    @field_validator("x0")
    @classmethod
    def check_x0(cls, v):
        if not v:
            raise ValueError("x0 must be nonempty")
        if not all(np.isfinite(v)):
            raise ValueError("x0 must be finite")
        return v
