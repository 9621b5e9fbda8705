from nlconsensus.models.graph_models import (
    BMatrix,
    ConnectivityReport,
    Laplacian,
    LeftEigenvector,
    ReachabilityMatrix,
    WeightedDigraph,
)
from nlconsensus.models.protocol_models import MonotonicityReport, Protocol
from nlconsensus.models.reports import AnalysisReport, RateComparison, RunSummary
from nlconsensus.models.state import (
    ExperimentConfig,
    SimulationConfig,
    State,
    Trajectory,
    TrajectorySample,
)
