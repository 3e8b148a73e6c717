"""Exception hierarchy shared by all modules."""


class WrenyiError(Exception):
    """Base class for library errors."""


class PoleError(WrenyiError, ValueError):
    """Special function evaluated at a pole."""


class DomainError(WrenyiError, ValueError):
    """Argument outside the domain of a map or function."""


class ParameterError(WrenyiError, ValueError):
    """Distribution or formula parameter outside its admissible range."""


class DimensionMismatch(WrenyiError, ValueError):
    pass


class NonRealWeight(WrenyiError, TypeError):
    """Complex-valued weight function passed to an entropy functional."""


class EstimatorDiverged(WrenyiError, ArithmeticError):
    """Monte Carlo average dominated by non-finite or runaway terms."""


class ZeroIntegral(WrenyiError, ArithmeticError):
    pass


class SupportMismatch(WrenyiError, ValueError):
    """Reference density vanishes where the first density has mass."""


class BracketError(WrenyiError, ValueError):
    pass


class RankError(WrenyiError, ValueError):
    pass


class DegenerateInput(WrenyiError, ValueError):
    pass


class ConfigError(WrenyiError, ValueError):
    """Scenario file failed validation; ``pointer`` locates the bad field."""

    def __init__(self, message, pointer="/"):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
