from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, model_validator


class AnalysisReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    v_monotone: bool
    first_v_violation_t: Optional[float] = None
    max_conservation_drift: float
    consensus_time: Optional[float] = None
    fitted_decay_rate: Optional[float] = None
    sos_residual: float
    max_vdot: float
    min_sector_slack: Optional[float] = None
    final_disagreement: float
    tail_oscillation: float
    expected_decision: Optional[float] = None
    horizon: float

    @model_validator(mode="after")
    def check_consensus_time(self) -> "AnalysisReport":
        if self.consensus_time is not None and not (0.0 <= self.consensus_time <= self.horizon):
            raise ValueError("consensus_time must lie within the simulated horizon")
        return self


class RateComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    faster: Literal["a", "b", "tie"]
    eps: float
    time_a: Optional[float] = None
    time_b: Optional[float] = None
    rate_a: Optional[float] = None
    rate_b: Optional[float] = None
    rate_ratio: Optional[float] = None  # rate_a / rate_b
    label_a: str = ""
    label_b: str = ""


class RunSummary(BaseModel):
    """Flat record written next to a trajectory CSV."""

    model_config = ConfigDict(frozen=True)

    name: str
    protocol: str
    mode: str
    n: int
    steps: int
    terminated_by: str
    decision_value: Optional[float] = None
    expected_decision: Optional[float] = None
    consensus_time: Optional[float] = None
    final_disagreement: float
    tail_oscillation: float
    max_conservation_drift: float
    v_monotone: Optional[bool] = None
    fitted_decay_rate: Optional[float] = None
    sos_residual: float
    monotone_on_range: bool
    estimated_sector_bound: float
