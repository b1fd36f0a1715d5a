from .model import (
    Coefficients,
    FieldGrid,
    MUSCLE_SAMPLE,
    MusclePhysical,
    StabilityInput,
    ValidationResult,
    Violation,
    derive_coefficients,
    poincare_constant_interval,
    time_grid,
    validate_coefficients
)
from .history import HistoryBuffer, make_history_buffer
from .exc import (
    ViskvError,
    ConfigError,
    ParseError,
    GridMismatchError,
    DomainError,
    ValidationError,
    InfeasibleWeightsError,
    NumericError,
    HistoryDataError,
    SingularSystemError,
    WindowError,
    FitError
)
