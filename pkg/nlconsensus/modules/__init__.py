from nlconsensus.modules.analysis import analysis_module, AnalysisModule
from nlconsensus.modules.dynamics import dynamics_module, DynamicsModule
from nlconsensus.modules.graph import graph_module, GraphModule
from nlconsensus.modules.oracle import oracle_module, OracleModule
from nlconsensus.modules.protocol import protocol_module, ProtocolModule
