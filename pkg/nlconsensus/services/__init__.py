# I/O and orchestration around the engines
from nlconsensus.services.experiment_config import config_loader, ExperimentConfigLoader
from nlconsensus.services.export import export_service, ExportService
from nlconsensus.services.graph_io import graph_reader, graph_writer, GraphReader, GraphWriter
from nlconsensus.services.plotting import plotting_service, PlottingService
from nlconsensus.services.runner import experiment_runner, ExperimentRunner, RunResult
