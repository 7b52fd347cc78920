class LabError(Exception):
    """Base class of every error raised by gfmlab"""


class DimensionError(LabError):
    pass


class DegenerateInputError(LabError):
    pass


class DegenerateEmbeddingError(DegenerateInputError):
    pass


class ContractError(LabError):
    pass


class NumericError(LabError):
    pass


class ConfigError(LabError):
    """
    Raised for invalid configurations.

    :ivar field:  Name of the offending field, if known
    """

    def __init__(self, message, field=None):
        super(ConfigError, self).__init__(message)
        self.field = field


class TooSmallError(LabError):
    pass


class EmptyTextError(LabError):
    pass


class MissingDataError(LabError):
    pass


class OptimizerError(LabError):
    pass


class BudgetExhaustedError(LabError):
    """
    Raised when a victim handle has no query budget left.

    :ivar spent:  Number of successful queries at the time of the failure
    """

    def __init__(self, message, spent):
        super(BudgetExhaustedError, self).__init__(message)
        self.spent = spent


class ThrottleError(LabError):
    pass


class UnsynthesizableError(LabError):
    pass


class UndefinedMetricError(LabError):
    pass


class EmptyAggregateError(LabError):
    pass
