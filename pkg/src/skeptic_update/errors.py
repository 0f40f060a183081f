"""Exception hierarchy shared by every module."""


class SkepticUpdateError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class NonFinite(SkepticUpdateError):
    pass


class MaxIterationsWarning(RuntimeWarning):
    pass


class RankDeficient(SkepticUpdateError):
    pass


class InsufficientObservations(SkepticUpdateError):
    pass


class SingleClass(SkepticUpdateError):
    pass


class Separation(SkepticUpdateError):
    pass


class NoCensoring(SkepticUpdateError):
    pass


class AllCensored(SkepticUpdateError):
    pass


class EmptyUpdaterSubsample(SkepticUpdateError):
    pass


class TransformMismatch(SkepticUpdateError):
    pass


class ConformabilityError(SkepticUpdateError):
    pass


class MissingCovariates(SkepticUpdateError):
    pass


class MalformedRow(SkepticUpdateError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaMismatch(SkepticUpdateError):
    pass


class InvariantViolation(SkepticUpdateError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"line {v.line}: {v.message}" for v in self.violations[:10]]
        more = len(self.violations) - len(lines)
        if more > 0:
            lines.append(f"... and {more} more")
        super().__init__("; ".join(lines))


class EmptyAfterFilter(SkepticUpdateError):
    pass


class OutOfRange(SkepticUpdateError, ValueError):
    pass


class InvalidConfig(SkepticUpdateError, ValueError):
    pass
