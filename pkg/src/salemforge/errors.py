"""Exception hierarchy; ``exit_code`` is what the CLI returns for each family."""


class SalemforgeError(Exception):
    exit_code = 2


class ValidationError(SalemforgeError):
    """Malformed or out-of-domain input."""


class DimensionError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class IntervalError(ValidationError):
    pass


class RankError(ValidationError):
    pass


class NoConeError(ValidationError):
    pass


class NotIsometryError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class IntegralityError(ValidationError):
    pass


class UnsupportedError(ValidationError):
    pass


class ExhaustedError(SalemforgeError):
    """Search budget ran out; ``stats`` says how far it got."""

    exit_code = 3

    def __init__(self, message, stats=None, degenerate=False):
        super().__init__(message)
        self.stats = dict(stats or {})
        self.degenerate = degenerate
