"""Exception hierarchy. Every error knows its CLI exit code and a short reason slug."""


class FamaError(Exception):
    """Base class for all library errors."""

    exit_code: int = 4
    reason: str = "error"


class ConfigError(FamaError):
    """Run configuration could not be parsed or violates the schema."""

    exit_code = 2
    reason = "config"


class ScenarioError(FamaError):
    """Scenario is well-formed but outside the analysed regime."""

    exit_code = 3
    reason = "scenario"


class StrongInterferenceError(ScenarioError):
    reason = "strong-interference"


class DimensionCapError(ScenarioError):
    reason = "dimension-cap"


class NumericError(FamaError):
    """A numerical procedure failed."""

    exit_code = 4
    reason = "numeric"


class DegenerateGeometryError(NumericError):
    reason = "degenerate-geometry"


class IntegrationError(NumericError):
    reason = "integration"


class HeuristicRangeError(NumericError):
    reason = "heuristic-range"


class DomainError(FamaError, ValueError):
    """Argument outside the domain of a pure function."""

    exit_code = 4
    reason = "domain"
