import math

__all__ = ['format_readable_power', 'to_watts']

_PREFIXES = ['fW', 'pW', 'nW', 'uW', 'mW', 'W', 'kW', 'MW', 'GW']
_UNIT_MULTIPLIERS = {
    'fw': 1e-15,
    'pw': 1e-12,
    'nw': 1e-9,
    'uw': 1e-6,
    'µw': 1e-6,
    'mw': 1e-3,
    'w': 1.0,
    'kw': 1e3,
    'mw_': 1e6,
    'gw': 1e9,
}


def format_readable_power(power: float, decimal_places: int = 1) -> str:
    """
    Format a power in watts with an SI prefix.

    Args:
        power (float): The power in watts.
        decimal_places (int, optional): The number of decimal places to round the result to. Defaults to 1.

    Returns:
        str: The formatted power.

    Example:
        >>> format_readable_power(0.0025)
        '2.5 mW'
        >>> format_readable_power(1e6, decimal_places=0)
        '1 MW'
        >>> format_readable_power(3.2e-17)
        '0.0 fW'

    Raises:
        ValueError: If the power is negative or not finite.
    """
    if power < 0:
        raise ValueError("Power cannot be negative.")
    if not math.isfinite(power):
        raise ValueError("Power must be finite.")

    if power == 0:
        return f"{0:.{decimal_places}f} W"

    magnitude = int(math.floor(math.log10(power) / 3)) + _PREFIXES.index('W')
    magnitude = min(max(magnitude, 0), len(_PREFIXES) - 1)

    power /= 1000.0 ** (magnitude - _PREFIXES.index('W'))
    return f"{power:.{decimal_places}f} {_PREFIXES[magnitude]}"


def to_watts(power_str: str) -> float:
    """
    Convert a human-readable power to watts.

    Prefixes are case-insensitive except for ``mW`` (milli) versus ``MW`` (mega).

    Args:
        power_str (str): The power, e.g. ``'1.5 mW'``.

    Returns:
        float: The power in watts.

    Example:
        >>> to_watts('1.5 mW')
        0.0015
        >>> to_watts('2 W')
        2.0

    Raises:
        ValueError: If the power is negative.
        ValueError: If the power format is invalid.
    """
    parts = power_str.strip().split()
    if len(parts) != 2:
        raise ValueError("Invalid power format")
    value, unit = parts

    value = float(value)
    if value < 0:
        raise ValueError("Power cannot be negative.")

    key = 'mw_' if unit == 'MW' else unit.lower()
    if key not in _UNIT_MULTIPLIERS:
        raise ValueError("Invalid power format")

    return value * _UNIT_MULTIPLIERS[key]
