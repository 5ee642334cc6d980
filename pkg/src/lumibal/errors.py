"""Exception types shared across the lumibal package."""

__all__ = [
    "LumibalError",
    "IngestError",
    "IntegrityError",
    "DegenerateDistributionError",
    "DegenerateVarianceError",
    "InsufficientPairsError",
]


class LumibalError(Exception):
    """Base class for all lumibal errors.

    ``code`` is a short stable token used by the CLI for its single-line
    machine-parsable error output.
    """

    code = "error"


class IngestError(LumibalError):
    """A dataset file could not be parsed or failed record validation."""

    code = "ingest"

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class IntegrityError(LumibalError):
    """Cross-record consistency violated (dangling ids, subject mismatch...)."""

    code = "integrity"


class DegenerateVarianceError(LumibalError):
    """Both score distributions are constant but their means differ, so the
    sensitivity index is undefined."""

    code = "degenerate-variance"


class DegenerateDistributionError(LumibalError):
    """An operation that needs mass in the histogram got an all-zero input."""

    code = "degenerate-distribution"


class InsufficientPairsError(LumibalError):
    """A selection asked for more pairs than are available."""

    code = "insufficient-pairs"

    def __init__(self, needed, available, side=""):
        where = f" ({side})" if side else ""
        super().__init__(f"need {needed} pairs but only {available} available{where}")
        self.needed = needed
        self.available = available
