"""Exception types shared across the package."""


class UnphysicalStateError(ValueError):
    """Moments violate positivity or the uncertainty bound."""


class UnknownBeamError(KeyError):
    pass


class NetworkError(ValueError):
    """Malformed network topology or a state/network label mismatch."""


class UnreachableFrequencyError(ValueError):
    pass


class ConfigError(ValueError):
    """Scenario configuration failed validation.

    ``line`` is the 1-based line of the offending key in the source
    document, when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
