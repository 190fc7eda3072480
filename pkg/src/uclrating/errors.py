"""Exception hierarchy.

``DataError`` subclasses signal bad input (CLI exit code 1); ``FitError``,
``InfeasibleDrawError`` and ``UndefinedValueError`` signal that a computation
cannot produce a value for otherwise valid input (CLI exit code 2).
"""

from __future__ import annotations


class UclRatingError(Exception):
    pass


class DataError(UclRatingError, ValueError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DuplicateMatchError(DataError):
    pass


class UnresolvedRatingError(DataError):
    def __init__(self, missing: list[tuple[str, str]]):
        self.missing = missing
        shown = ", ".join(f"{team} ({season})" for season, team in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        super().__init__(f"no rating for {shown}{more}")


class PairingError(DataError):
    pass


class InvariantError(DataError):
    pass


class EmptyInputError(DataError):
    pass


class ConfigurationError(DataError):
    pass


class DomainError(UclRatingError, ValueError):
    pass


class OutOfRangeError(UclRatingError, ValueError):
    pass


class UndefinedValueError(UclRatingError, ValueError):
    pass


class FitError(UclRatingError):
    def __init__(self, message: str, feature: str | None = None, model_id: str | None = None):
        self.feature = feature
        self.model_id = model_id
        super().__init__(message)

    def annotated(self, model_id: str) -> "FitError":
        err = type(self)(f"model {model_id}: {self}", feature=self.feature, model_id=model_id)
        return err


class SeparationError(FitError):
    pass


class RankError(FitError):
    pass


class DegenerateOutcomeError(FitError):
    pass


class ConvergenceError(FitError):
    pass


class InfeasibleDrawError(UclRatingError):
    def __init__(self, message: str, constraint: dict | None = None):
        self.constraint = constraint or {}
        super().__init__(message)
