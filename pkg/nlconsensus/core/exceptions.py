"""
Error hierarchy
===============
Every failure the engines signal derives from ConsensusError, so callers
(the CLI above all) can catch the family and map each kind to an exit code.
"""


class ConsensusError(RuntimeError):
    """Base class for nlconsensus failures."""


class NotStronglyConnected(ConsensusError):
    pass


class DegenerateNullspace(ConsensusError):
    pass


class NonPositiveEntry(ConsensusError):
    pass


class NonMonotone(ConsensusError):
    pass


class NonFiniteState(ConsensusError):
    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class InvariantViolation(ConsensusError):
    pass


class Incomparable(ConsensusError):
    pass


class ProtocolSpecError(ConsensusError):
    pass


class ConfigError(ConsensusError):
    pass


class GraphParseError(ConsensusError):
    def __init__(self, message: str, line: int, column: int = 1, source: str = "<graph>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.source = source
