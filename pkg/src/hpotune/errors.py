"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`TuneError`,
which itself is a ``ValueError`` so callers doing broad input validation keep
working.
"""


class TuneError(ValueError):
    pass


# search space
class DuplicateName(TuneError):
    pass


class EmptyCategorical(TuneError):
    pass


class InvertedRange(TuneError):
    pass


class LogUniformNonPositive(TuneError):
    pass


class NonFiniteDomain(TuneError):
    pass


class DimensionMismatch(TuneError):
    pass


# learner / data
class AllZeroCounts(TuneError):
    pass


class EmptyDataset(TuneError):
    pass


class EmptyMatrix(TuneError):
    pass


class ClassWithSingleRow(TuneError):
    pass


class KTooLarge(TuneError):
    pass


class LengthMismatch(TuneError):
    pass


class EmptyInput(TuneError):
    pass


class MissingColumn(TuneError):
    pass


class ParseError(TuneError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"row {row}: cannot parse column {column!r} value {value!r}")
        self.row = row
        self.column = column


class UnknownLabel(TuneError):
    def __init__(self, row: int, label: str):
        super().__init__(f"row {row}: unknown label {label!r}")
        self.row = row
        self.label = label


class NTooLarge(TuneError):
    pass


# strategies / orchestration
class EmptyHistory(TuneError):
    pass


class UnknownStrategy(TuneError):
    pass


class UnsetFitness(TuneError):
    pass


class BudgetExhausted(TuneError):
    pass


class EmptyCampaign(TuneError):
    pass


class ConfigError(TuneError):
    pass
