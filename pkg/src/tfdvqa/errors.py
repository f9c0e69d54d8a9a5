"""Exception hierarchy shared by every module."""


class TFDError(Exception):
    """Base class for all package errors."""


class DimensionError(TFDError, ValueError):
    """Register sizes of two operands do not agree."""


class ContractError(TFDError, ValueError):
    """An operation was called outside its documented preconditions."""


class ConfigError(TFDError, ValueError):
    """Invalid user-facing configuration (ansatz depth, flow settings, files)."""


class FlowSingularityError(TFDError, RuntimeError):
    """The McLachlan linear system could not be solved even after regularization."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class DegenerateOperatorError(TFDError, RuntimeError):
    """B|psi> vanished, so the correlation branch cannot be normalized."""


class RefinementRequiredError(TFDError, RuntimeError):
    """Density-matrix integration drifted; a smaller step is needed."""
