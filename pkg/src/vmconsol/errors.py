"""Exception hierarchy.

Each category maps to a distinct CLI exit code (see ``vmconsol.cli``).
"""


class VmconsolError(Exception):
    exit_code = 1


class ConfigError(VmconsolError, ValueError):
    exit_code = 2


class ValidationError(VmconsolError):
    """A migration map or placement breaks a capacity or assignment constraint."""

    exit_code = 3

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ModelIntegrityError(VmconsolError):
    exit_code = 4


class NetworkModelError(VmconsolError):
    exit_code = 4


class InfeasibleError(VmconsolError):
    exit_code = 4


class SnapshotParseError(VmconsolError):
    exit_code = 3

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field
