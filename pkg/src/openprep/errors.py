"""Exception hierarchy shared across the package."""


class OpenPrepError(Exception):
    """Base class for all errors raised by openprep."""


class DimensionError(OpenPrepError, ValueError):
    """Operand shapes or subsystem dimensions do not line up."""


class ContractViolation(OpenPrepError, ValueError):
    """An input breaks a documented precondition (Hermiticity, normalization, ...)."""


class DomainError(OpenPrepError, ValueError):
    """A scalar argument is outside its allowed range."""


class ImpossiblePreparationError(OpenPrepError):
    """A projective preparation succeeds with (numerically) zero probability."""

    def __init__(self, message: str, input_label: int | None = None, probability: float | None = None):
        super().__init__(message)
        self.input_label = input_label
        self.probability = probability


class DegenerateBasisError(OpenPrepError):
    """Tomography inputs do not span the system operator space."""


class ConfigError(OpenPrepError):
    """A scenario configuration failed to load or validate.

    ``findings`` holds one human-readable message per problem, each prefixed
    with the dotted path of the offending field.
    """

    def __init__(self, findings: list[str]):
        super().__init__("; ".join(findings) if findings else "invalid configuration")
        self.findings = list(findings)
