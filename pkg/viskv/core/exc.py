class ViskvError(Exception):
    exit_code = 1


class ConfigError(ViskvError):
    """Bad run configuration, unusable grids or options"""
    exit_code = 2


class ParseError(ConfigError):
    pass


class GridMismatchError(ConfigError):
    pass


class DomainError(ViskvError):
    """Parameters outside the domain where the model is defined"""
    exit_code = 3


class ValidationError(DomainError):
    pass


class InfeasibleWeightsError(DomainError):
    pass


class NumericError(ViskvError):
    exit_code = 4


class HistoryDataError(NumericError):
    pass


# Implicit step matrix could not be factorised
class SingularSystemError(NumericError):
    pass


class WindowError(NumericError):
    pass


class FitError(NumericError):
    pass
