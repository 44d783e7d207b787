__all__ = [
    'ViolatedInvariant',
    'ConfigError',
    'DomainError',
    'NonFinite',
    'TauOutOfDomain',
]


class ViolatedInvariant(ValueError):
    """
    Raised when a parameter breaks one of its constraints.

    Args:
        name (str): The field (or pseudo-field such as ``heights``) that failed.
        message (str, optional): Human readable detail.
    """

    def __init__(self, name: str, message: str = None):
        self.name = name
        super().__init__(f"{name}: {message}" if message else name)


class ConfigError(ViolatedInvariant):
    """Malformed configuration file: unknown keys, missing blocks, bad types."""


class DomainError(ValueError):
    """An argument lies outside the domain of a geometric or special function."""


class NonFinite(ValueError):
    """
    Raised when a closed form overflows or turns into NaN.

    Args:
        subterm (str): Dotted name of the offending subterm, e.g. ``ps_max.irs.t2``.
    """

    def __init__(self, subterm: str, value: float = None):
        self.subterm = subterm
        self.value = value
        detail = f" (value={value!r})" if value is not None else ""
        super().__init__(f"non-finite subterm {subterm}{detail}")


class TauOutOfDomain(ValueError):
    """The tail parameter tau is outside the open interval (0, tau_max)."""

    def __init__(self, tau: float, tau_max: float):
        self.tau = tau
        self.tau_max = tau_max
        super().__init__(f"tau={tau!r} outside (0, {tau_max!r})")
