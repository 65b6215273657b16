"""Exception types raised across the package."""


class AssumptionViolation(ValueError):
    """A modelling assumption required by the estimators does not hold.

    ``assumption`` carries the human-readable name of the violated
    assumption so validators can report it verbatim.
    """

    assumption = "unspecified"


class ObservabilityError(AssumptionViolation):
    assumption = "global observability"


class ConnectivityError(AssumptionViolation):
    assumption = "average connectivity"


class WeightMatrixError(AssumptionViolation):
    assumption = "weight matrices"


class ConfigError(ValueError):
    """Ill-formed experiment configuration or data file."""

    def __init__(self, message, *, source=None, line=None, field=None):
        self.source = source
        self.line = line
        self.field = field
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)
