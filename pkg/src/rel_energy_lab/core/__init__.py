from .errors import (
    LabError, DomainError, HypothesisError, UnsupportedRegimeError, UndefinedDirectionError,
    DomainCoverageError, InsufficientDataError, ConfigError, NotSmoothError, NumericalBlowupError,
)
from .utils import DEFAULTS, load_config, setup_logging
