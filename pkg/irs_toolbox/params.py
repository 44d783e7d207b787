import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional, Union

from .errors import ConfigError, ViolatedInvariant
from .format_power import to_watts
from .geometry import lens_area_exact, lens_area_formula

__all__ = [
    'SystemParams',
    'ValidatedParams',
    'BoundParams',
    'validate',
    'validate_bound_params',
    'default_params',
    'params_from_dict',
    'params_to_dict',
    'bound_params_from_dict',
    'bound_params_to_dict',
    'parse_config',
    'serialize_config',
    'param_hash',
]

logger = logging.getLogger(__name__)

LENS_SOURCES = ('printed', 'exact')


@dataclass(frozen=True)
class SystemParams:
    """
    Every scalar parameter of the downlink model. Densities are per square meter,
    lengths in meters, powers in watts.
    """
    lambda_bs: float = 1e-3
    lambda_u: float = 1e-2
    lambda_irs: float = 1e-3
    r_co: float = 15.0
    q_elems: int = 1000
    kappa: float = 1.0
    lambda_wave: float = 0.01
    h_bs: float = 10.0
    h_irs: float = 11.0
    epsilon: float = 0.01
    delta: float = 0.01
    p_b: float = 0.5
    h_hat: float = 1e-4
    sigma_d_sq: float = 1e6
    n0: float = 1e-3

    def with_values(self, **changes) -> 'SystemParams':
        """Return a validated copy with some fields replaced."""
        return validate(replace(self, **changes))


ValidatedParams = SystemParams

_FIELD_ORDER = [f.name for f in fields(SystemParams)]
_POWER_FIELDS = ('sigma_d_sq', 'n0')


@dataclass(frozen=True)
class BoundParams:
    """
    Free radii of the interference lower bound and the tail parameters.

    ``lens_area_s`` is derived from ``b`` and the coverage radius at validation
    time; ``lens_area`` chooses between the printed expression and the exact
    circle intersection.
    """
    b: float = 7.5
    d: float = 3.0
    tau_i: Optional[float] = None
    tau_s: Optional[float] = None
    lens_area: str = 'printed'
    lens_area_s: float = field(default=float('nan'), compare=False)


def _check(ok: bool, name: str, message: str) -> None:
    if not ok:
        raise ViolatedInvariant(name, message)


def _finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


def validate(p: SystemParams) -> ValidatedParams:
    """
    Check every field constraint of the model.

    Args:
        p (SystemParams): The parameters.

    Returns:
        SystemParams: The same object when every constraint holds. Idempotent.

    Example:
        >>> validate(default_params()).r_co
        15.0

    Raises:
        ViolatedInvariant: Naming the first failing field.
    """
    for name in ('lambda_bs', 'lambda_u', 'lambda_irs'):
        value = getattr(p, name)
        _check(_finite(value) and value >= 0, name, "density must be finite and non-negative")
    _check(_finite(p.r_co) and p.r_co > 0, 'r_co', "coverage radius must be positive")
    _check(isinstance(p.q_elems, int) and not isinstance(p.q_elems, bool) and p.q_elems >= 1,
           'q_elems', "number of IRS elements must be an integer >= 1")
    _check(isinstance(p.kappa, (int, float)) and p.kappa >= 0, 'kappa', "Rician factor must be >= 0")
    _check(_finite(p.lambda_wave) and p.lambda_wave > 0, 'lambda_wave', "wavelength must be positive")
    _check(_finite(p.h_bs) and p.h_bs > 0, 'h_bs', "BS height must be positive")
    _check(_finite(p.h_irs) and p.h_irs > 0, 'h_irs', "IRS height must be positive")
    _check(p.h_bs != p.h_irs, 'heights', "h_bs and h_irs must differ")
    _check(_finite(p.epsilon) and 0 < p.epsilon < 1, 'epsilon', "beam width must lie in (0, 1)")
    _check(_finite(p.delta) and 0 < p.delta <= 1, 'delta', "sidelobe gain must lie in (0, 1]")
    _check(_finite(p.p_b) and 0 <= p.p_b <= 1, 'p_b', "blockage probability must lie in [0, 1]")
    _check(_finite(p.h_hat) and 0 < p.h_hat < 1, 'h_hat', "blockage attenuation must lie in (0, 1)")
    _check(_finite(p.sigma_d_sq) and p.sigma_d_sq > 0, 'sigma_d_sq', "symbol power must be positive")
    _check(_finite(p.n0) and p.n0 > 0, 'n0', "noise power must be positive")
    return p


def validate_bound_params(bp: BoundParams, p: SystemParams) -> BoundParams:
    """
    Check the interference lower-bound radii against the coverage radius and fill ``lens_area_s``.

    Args:
        bp (BoundParams): The bound parameters.
        p (SystemParams): Validated system parameters.

    Returns:
        BoundParams: A copy with ``lens_area_s`` set.

    Raises:
        ViolatedInvariant: If a radius or tau is out of range.
    """
    _check(_finite(bp.b) and 0 < bp.b < p.r_co, 'b', "b must lie in (0, r_co)")
    _check(_finite(bp.d) and 0 < bp.d < p.r_co / 2, 'd', "d must lie in (0, r_co / 2)")
    for name in ('tau_i', 'tau_s'):
        value = getattr(bp, name)
        _check(value is None or (_finite(value) and value > 0), name, "tau must be positive")
    _check(bp.lens_area in LENS_SOURCES, 'lens_area', f"must be one of {LENS_SOURCES}")

    area_fn = lens_area_formula if bp.lens_area == 'printed' else lens_area_exact
    return replace(bp, lens_area_s=area_fn(bp.b, p.r_co))


def default_params(**overrides) -> SystemParams:
    """The reference parameter set, optionally overridden, validated."""
    return validate(replace(SystemParams(), **overrides))


def _coerce_power(name: str, value: Any) -> float:
    if isinstance(value, str):
        try:
            return to_watts(value)
        except ValueError as error:
            raise ConfigError(name, str(error))
    return value


def params_from_dict(data: Dict[str, Any]) -> SystemParams:
    """
    Build validated parameters from a plain dictionary.

    ``sigma_d`` (amplitude) is accepted instead of ``sigma_d_sq`` and squared.

    Raises:
        ConfigError: On unknown keys or when both ``sigma_d`` and ``sigma_d_sq`` are given.
        ViolatedInvariant: On a constraint violation.
    """
    data = dict(data)
    if 'sigma_d' in data:
        if 'sigma_d_sq' in data:
            raise ConfigError('sigma_d', "give either sigma_d or sigma_d_sq, not both")
        sigma_d = data.pop('sigma_d')
        if not isinstance(sigma_d, (int, float)) or isinstance(sigma_d, bool):
            raise ConfigError('sigma_d', "must be a number")
        data['sigma_d_sq'] = float(sigma_d) ** 2

    unknown = sorted(set(data) - set(_FIELD_ORDER))
    if unknown:
        raise ConfigError(unknown[0], "unknown parameter")

    for name in _POWER_FIELDS:
        if name in data:
            data[name] = _coerce_power(name, data[name])
    for name, value in data.items():
        if name != 'q_elems' and isinstance(value, int) and not isinstance(value, bool):
            data[name] = float(value)
        elif name != 'q_elems' and not isinstance(value, float):
            raise ConfigError(name, "must be a number")

    return validate(SystemParams(**data))


def params_to_dict(p: SystemParams) -> Dict[str, Any]:
    """Canonical ordered dictionary of the parameters."""
    return {name: getattr(p, name) for name in _FIELD_ORDER}


def bound_params_from_dict(data: Dict[str, Any], p: SystemParams) -> BoundParams:
    """
    Build validated bound parameters from a plain dictionary.

    Raises:
        ConfigError: On unknown keys (``lens_area_s`` is derived, never read).
    """
    allowed = ('b', 'd', 'tau_i', 'tau_s', 'lens_area')
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(unknown[0], "unknown bound parameter")
    values = {k: (float(v) if isinstance(v, int) and not isinstance(v, bool) else v) for k, v in data.items()}
    return validate_bound_params(BoundParams(**values), p)


def bound_params_to_dict(bp: BoundParams) -> Dict[str, Any]:
    """Canonical dictionary of the bound parameters, without the derived area."""
    return {'b': bp.b, 'd': bp.d, 'tau_i': bp.tau_i, 'tau_s': bp.tau_s, 'lens_area': bp.lens_area}


def parse_config(text: Union[str, bytes]) -> Dict[str, Any]:
    """
    Parse a JSON configuration.

    Args:
        text (str): The JSON document with ``params``, optional ``bound_params``
            and optional ``experiment`` blocks.

    Returns:
        dict: ``{'params': SystemParams, 'bound_params': BoundParams, 'experiment': dict}``.

    Raises:
        ConfigError: If the document is not valid JSON or has unknown blocks.
        ViolatedInvariant: On a constraint violation.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError('config', f"invalid JSON: {error}")
    if not isinstance(document, dict):
        raise ConfigError('config', "top level must be an object")

    unknown = sorted(set(document) - {'params', 'bound_params', 'experiment'})
    if unknown:
        raise ConfigError(unknown[0], "unknown config block")

    p = params_from_dict(document.get('params', {}))
    bp = bound_params_from_dict(document.get('bound_params', {}), p)
    experiment = document.get('experiment', {})
    if not isinstance(experiment, dict):
        raise ConfigError('experiment', "must be an object")
    return {'params': p, 'bound_params': bp, 'experiment': experiment}


def serialize_config(p: SystemParams, bp: Optional[BoundParams] = None,
                     experiment: Optional[Dict[str, Any]] = None) -> str:
    """
    Canonical JSON text: fixed key order, two-space indent, trailing newline.

    ``serialize_config(**parse_config(text))`` reproduces ``text`` byte for byte
    when ``text`` is itself canonical.
    """
    document = {'params': params_to_dict(p)}
    if bp is not None:
        document['bound_params'] = bound_params_to_dict(bp)
    if experiment is not None:
        document['experiment'] = {k: experiment[k] for k in sorted(experiment)}
    return json.dumps(document, indent=2) + '\n'


def param_hash(p: SystemParams, bp: Optional[BoundParams] = None) -> str:
    """Short stable digest of the canonical parameters, used in CSV metadata."""
    return hashlib.sha256(serialize_config(p, bp).encode('utf-8')).hexdigest()[:16]
