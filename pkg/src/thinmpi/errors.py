"""Exception hierarchy shared by all thinmpi modules."""


class ThinMPIError(Exception):
    """Base class for all domain errors raised by this package."""

    kind = "error"

    def diagnostic(self) -> str:
        """Single-line, machine-parsable rendering: ``kind: message``."""
        return f"{self.kind}: {self}"


class RegistryParseError(ThinMPIError):
    kind = "registry-parse-error"


class RegistryValidationError(ThinMPIError):
    kind = "registry-validation-error"


class CoverageError(ThinMPIError):
    """An invoked function cannot be covered by any registry block."""

    kind = "coverage-error"


class ProfileError(ThinMPIError):
    kind = "profile-error"


class SimulationError(ThinMPIError):
    kind = "simulation-error"
