"""
Exception hierarchy for the toolchain.

Every error carries the process exit code the CLI reports for it:
1 usage, 2 parse/validation, 3 analysis/simulation.
"""
from typing import Iterable, Optional


EXIT_USAGE = 1
EXIT_INVALID_INPUT = 2
EXIT_FAILURE = 3


class NvClusterError(ValueError):
    """Base class for all domain errors."""

    exit_code = EXIT_FAILURE


class BenchSyntaxError(NvClusterError):
    """Malformed line in a .bench file."""

    exit_code = EXIT_INVALID_INPUT

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class NetlistValidationError(NvClusterError):
    """Structurally invalid netlist (duplicate driver, undriven net, loop, bad arity)."""

    exit_code = EXIT_INVALID_INPUT

    def __init__(self, message: str, line: Optional[int] = None, members: Iterable[str] = ()):
        self.line = line
        self.members = tuple(members)
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownElementError(NvClusterError, KeyError):
    """Element id not present in the netlist."""

    exit_code = EXIT_INVALID_INPUT

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown element"


class TechFileError(NvClusterError):
    """Malformed or incomplete technology file."""

    exit_code = EXIT_INVALID_INPUT


class PgLibraryError(NvClusterError):
    """Invalid polymorphic-gate arguments."""


class DeviceModelError(NvClusterError):
    """Out-of-range device parameters or a diverging integration."""


class ClusteringError(NvClusterError):
    """Cone does not belong to the netlist it is checked against."""


class StalePlanError(ClusteringError):
    """Plan was computed for a different netlist."""


class AnalysisError(NvClusterError):
    """Cost or vulnerability analysis is undefined for the given design."""


class SimulationError(NvClusterError):
    """Logic or intermittent simulation cannot run on the given inputs."""
