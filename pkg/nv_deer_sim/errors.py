"""Exception hierarchy for nv-deer-sim.

Every error carries the process exit code the CLI reports for it:
validation problems exit with 1, broken internal invariants with 2.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""

    exit_code = 1


class ValidationError(SimulationError):
    """Invalid user input: arguments, config values, sequences."""

    exit_code = 1


class InvalidSpinError(ValidationError):
    """Spin quantum number is not a non-negative half-integer."""


class InvalidArgumentError(ValidationError):
    """Argument outside its allowed range."""


class InvalidOrderingError(ValidationError):
    """Two values given in the wrong order (e.g. f_plus <= f_minus)."""


class SequenceSyntaxError(ValidationError):
    """Pulse-sequence text does not match the grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnresolvedNameError(ValidationError):
    """A named frequency in a sequence has no definition."""

    def __init__(self, name: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"unresolved frequency name '{name}'{where}")
        self.name = name
        self.line = line
        self.column = column


class ConfigError(ValidationError):
    """Config key unknown, mistyped, or out of range."""

    def __init__(self, key: str, message: str, line: Optional[int] = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"config key '{key}'{where}: {message}")
        self.key = key
        self.line = line


class OutputError(ValidationError):
    """Result could not be written."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"cannot write '{path}': {reason}")
        self.path = path


class ContractViolation(SimulationError):
    """An internal numerical contract was broken."""

    exit_code = 2
