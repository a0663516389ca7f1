"""Exception types shared across the package."""


class QnoiseError(Exception):
    pass


class InvalidGateError(QnoiseError, ValueError):
    pass


class ArityError(QnoiseError, ValueError):
    """Length of a parameter or feature vector does not match what a circuit expects."""


class DomainError(QnoiseError, ValueError):
    pass


class CPTPViolationError(QnoiseError, ValueError):
    pass


class NumericalIntegrityError(QnoiseError, ArithmeticError):
    pass


class SchemaError(QnoiseError, KeyError):
    pass


class EmptyDataError(QnoiseError, ValueError):
    pass


class ImbalanceError(QnoiseError, ValueError):
    pass


class ConfigError(QnoiseError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StateError(QnoiseError, RuntimeError):
    pass
