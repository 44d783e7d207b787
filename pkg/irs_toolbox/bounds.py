import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, NonFinite, TauOutOfDomain
from .params import BoundParams, SystemParams

__all__ = [
    'BoundTerm',
    'BoundSet',
    'TauChoice',
    'KL_EXPONENT',
    'ps_max',
    'ps_min',
    'pi_max',
    'pi_min',
    'k_coef',
    'l_coef',
    'tau_max_i',
    'tau_max_s',
    'g_fn',
    'h_fn',
    'log_g_fn',
    'log_h_fn',
    'g_series',
    'h_series',
    'tail_bound_i',
    'tail_bound_s',
    'outage_threshold',
    'outage_terms',
    'outage_bound',
    'optimize_tau',
    'order_slope',
    'evaluate',
]

logger = logging.getLogger(__name__)

LOG_MAX = math.log(sys.float_info.max)
PI = math.pi
FOUR_PI = 4.0 * math.pi

# Exponent applied to the bracketed height factors of K and L.
KL_EXPONENT = 2

TAIL_KINDS = ('i_tail', 's_tail', 'outage')
_U_MIN = 1e-12


@dataclass(frozen=True)
class BoundTerm:
    """
    One evaluated closed form, split into the part caused by the BSs and the part
    caused by the IRSs. ``subterms`` names every additive block.
    """
    total: float
    bs_part: float
    irs_part: float
    subterms: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class TauChoice:
    tau: float
    bound: float


def _finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise NonFinite(name, value)
    return value


def _exp_poly(name: str, x: float, power: int, c: float) -> float:
    """``x**power * exp(c / x)`` evaluated in log-space."""
    if x <= 0:
        raise NonFinite(name, math.inf)
    log_value = power * math.log(x) + c / x
    if log_value > LOG_MAX:
        raise NonFinite(name, math.inf)
    return math.exp(log_value)


def _one_minus_exp_over(x: float) -> float:
    """``(1 - exp(-x)) / x`` with its limit 1 at 0."""
    return 1.0 if x == 0 else -math.expm1(-x) / x


def _user_factor(mu: float) -> float:
    """``(mu + exp(-mu) - 1) / (1 - exp(-mu))``, 0 at ``mu == 0``."""
    if mu == 0:
        return 0.0
    return (mu + math.expm1(-mu)) / -math.expm1(-mu)


def _inverse_count_mean(mu: float) -> float:
    """Lower bound on the mean inverse count of a zero-truncated Poisson variable."""
    if mu < 1e-2:
        return 0.5 - mu / 12.0 + mu ** 3 / 720.0
    numerator = -math.expm1(-mu) - mu * math.exp(-mu)
    return numerator / (mu * -math.expm1(-mu))


@dataclass(frozen=True)
class _Symbols:
    """Quantities shared by several closed forms."""
    r: float
    q: int
    lw2: float
    lw4: float
    sd: float
    p_bs: float
    blk: float
    a: float
    a1: float
    lp: float
    u_r: float
    h_b: float
    h_i: float
    dh: float
    m: float
    kap: float
    g_lobe: float
    log_bs: float
    sq: float
    ll: float

    @classmethod
    def of(cls, p: SystemParams) -> '_Symbols':
        r = p.r_co
        dh = p.h_bs - p.h_irs
        h_i = p.h_irs
        kap = 1.0 if math.isinf(p.kappa) else p.kappa / (p.kappa + 1.0)
        sq = (math.sqrt((2 * r) ** 2 / ((h_i ** 2 + (2 * r) ** 2) * h_i ** 2))
              * math.sqrt((3 * r) ** 2 / ((dh ** 2 + (3 * r) ** 2) * dh ** 2)))
        ll = PI * math.log1p((2 * r / h_i) ** 2) * math.log1p((3 * r / dh) ** 2)
        return cls(
            r=r,
            q=p.q_elems,
            lw2=p.lambda_wave ** 2,
            lw4=p.lambda_wave ** 4,
            sd=p.sigma_d_sq,
            p_bs=-math.expm1(-p.lambda_bs * PI * r * r),
            blk=1.0 + (p.h_hat - 1.0) * p.p_b,
            a=p.lambda_irs * PI * (2 * r) ** 2,
            a1=p.lambda_irs * PI * r * r,
            lp=p.lambda_irs * (2 * r) ** 2,
            u_r=p.lambda_u * PI * r * r,
            h_b=p.h_bs,
            h_i=h_i,
            dh=dh,
            m=max(dh * dh, h_i * h_i),
            kap=kap,
            g_lobe=(1.0 - p.delta) * math.acos(1.0 - p.epsilon) + p.delta * PI,
            log_bs=math.log1p((r / p.h_bs) ** 2),
            sq=sq,
            ll=ll,
        )


def _term(name: str, bs_part: float, subterms: Dict[str, float]) -> BoundTerm:
    for key, value in subterms.items():
        _finite(f"{name}.{key}", value)
    _finite(f"{name}.bs", bs_part)
    irs_part = _finite(f"{name}.irs", math.fsum(subterms.values()))
    total = _finite(name, bs_part + irs_part)
    return BoundTerm(total, bs_part, irs_part, dict(subterms, bs=bs_part))


def ps_max(p: SystemParams) -> BoundTerm:
    """
    Upper bound on the mean desired-signal power.

    The IRS part has three blocks (``t1``, ``t2``, ``t3``); the exponentials
    ``exp(9 / (2a))`` overflow for sparse IRS deployments and are then reported
    as ``NonFinite``.

    Args:
        p (SystemParams): Validated parameters.

    Returns:
        BoundTerm: Total, BS part and IRS part.

    Raises:
        NonFinite: Naming the overflowing block.
    """
    s = _Symbols.of(p)
    r, q, a = s.r, s.q, s.a

    bs = ((PI + (3 * s.a1 + s.a1 ** 2) * s.g_lobe) / PI
          * s.blk * s.lw2 * s.sd / (r * r * FOUR_PI ** 2) * s.log_bs * s.p_bs)

    e3 = _exp_poly('ps_max.t1', a, 3, 4.5)
    t1 = ((3 * a + a * a + e3) / FOUR_PI ** 4
          * 3 * q * s.lw4 * s.p_bs * s.sd
          / math.sqrt(4 * (s.dh ** 2 + 9 * r * r) * (s.h_i ** 2 + 4 * r * r))
          / (abs(s.dh) * s.h_i))

    e4 = _exp_poly('ps_max.t2', a, 4, 8.0)
    t2 = ((e4 + e3 - (a * a + 2 * a)) / (4 ** 8 * PI ** 2 * r ** 4)
          * s.p_bs * q * (q - 1) * s.lw4 * s.kap
          * math.log1p((3 * r / s.dh) ** 2) * math.log1p((2 * r / s.h_i) ** 2) * s.sd)

    lp = s.lp
    t3 = (s.p_bs * q * s.lw4 * s.sd / (4 ** 5 * PI ** 4 * r * r) * s.sq
          * (3 * lp + 2 * lp * lp + _exp_poly('ps_max.t3', lp, 3, 4.5)))

    return _term('ps_max', bs, {'t1': t1, 't2': t2, 't3': t3})


def ps_min(p: SystemParams) -> BoundTerm:
    """Lower bound on the mean desired-signal power; the IRS part is linear in the IRS density."""
    s = _Symbols.of(p)
    r = s.r

    bs = s.p_bs * s.lw2 * s.blk * s.sd / (FOUR_PI ** 2 * r * r) * s.log_bs
    irs = (p.lambda_irs * s.p_bs * p.delta ** 2 * s.q * s.lw4 * s.sd / FOUR_PI ** 4
           * PI * _inverse_count_mean(s.u_r)
           * r * r / (s.m + 3 * r * r) / (s.m + 4 * r * r))
    return _term('ps_min', bs, {'irs': irs})


def pi_max(p: SystemParams) -> BoundTerm:
    """
    Upper bound on the mean interference power.

    Raises:
        NonFinite: Naming the overflowing block.
    """
    s = _Symbols.of(p)
    r, q, a = s.r, s.q, s.a
    users = _user_factor(s.u_r)

    bs = (p.lambda_bs * (1 + 3 * s.a1 + s.a1 ** 2) * s.blk * s.lw2 * s.sd / (16 * PI)
          * users * s.log_bs)

    e3 = _exp_poly('pi_max.s1', a, 3, 4.5)
    e4 = _exp_poly('pi_max.s3', a, 4, 8.0)
    s1 = e3 / (4 * r * r) * s.sq
    s2 = (2 * a * a + 3 * a) / (4 * r * r) * s.sq
    s3 = e4 / (4 * r ** 4) * s.ll
    s4 = e3 / (4 * r ** 4) * s.ll
    s5 = (a * a + 2 * a) / (4 * r ** 4) * s.ll
    coherent = s.lw4 * users * q * q * s.p_bs * s.sd / FOUR_PI ** 4 * (s1 + s2 + s3 + s4 - s5)

    incoherent = (p.lambda_bs * users / (4 ** 5 * PI ** 3)
                  * q * s.lw4 * s.sd / (r * r)
                  * math.log1p((r / s.dh) ** 2) * math.log1p((2 * r / s.h_i) ** 2)
                  * (e3 + 2 * a * a + 3 * a))

    return _term('pi_max', bs, {'coherent': coherent, 'incoherent': incoherent})


def pi_min(p: SystemParams, bp: BoundParams) -> BoundTerm:
    """
    Lower bound on the mean interference power for the radii ``b`` and ``d``.

    The lens area ``bp.lens_area_s`` enters through the user-count factor. The
    two ``max(., 0)`` guards are applied as printed, so a negative lens area can
    drive parts of this bound below zero.

    Args:
        p (SystemParams): Validated parameters.
        bp (BoundParams): Validated bound parameters.

    Returns:
        BoundTerm: Total, BS part and IRS part (blocks ``coherent`` and ``incoherent``).
    """
    s = _Symbols.of(p)
    r, q, b, d = s.r, s.q, bp.b, bp.d
    lam_u, lam_bs = p.lambda_u, p.lambda_bs
    area = bp.lens_area_s

    ring = lam_bs * PI * (4 * r * r - b * b)
    e1_over = _one_minus_exp_over(ring)
    e2 = -math.expm1(-lam_bs * PI * b * b)
    users = _user_factor(lam_u * area)

    bs = (e1_over * p.delta ** 2 * s.sd * e2 * s.blk * s.lw2
          / (FOUR_PI ** 2 * (s.h_b ** 2 + r * r)) * users)

    inner = lam_u * PI * (r / 2 - d) ** 2 + math.exp(-lam_u * PI * (r / 2 + d) ** 2) - 1.0
    outer = (1.0 - math.exp(-3 * s.u_r) - 4 * s.u_r * math.exp(-3 * s.u_r)) / (4 * s.u_r) ** 2 \
        if s.u_r > 0 else 0.0
    if inner <= 0 or outer <= 0:
        coherent = 0.0
    else:
        spread = (2 * d / r * _one_minus_exp_over(3 * lam_bs * PI * r * r)
                  / -math.expm1(-lam_u * PI * (r / 2 + d) ** 2))
        coherent = (s.kap * s.p_bs * q * (q - 1) * s.a1 ** 2 * s.lw4 * p.delta ** 2 * s.sd
                    / (4 ** 6 * PI ** 2 * r ** 4)
                    * inner * spread * outer
                    * math.log((s.m + 4 * r * r) / (s.m + 3 * r * r)) ** 2)

    incoherent = (users * math.log1p((b / s.h_i) ** 2) * q * s.lw4 * p.delta ** 2
                  * p.lambda_irs * e1_over * e2 * s.sd
                  / (4 ** 4 * PI ** 3 * (s.dh ** 2 + r * r)))
    return _term('pi_min', bs, {'coherent': coherent, 'incoherent': incoherent})


def _inverse_log_count(lam: float, r: float) -> float:
    """``1 / ln(1 + 1 / (lam * 4 pi r**2))``, 0 when ``lam == 0``."""
    if lam == 0:
        return 0.0
    return 1.0 / math.log1p(1.0 / (lam * FOUR_PI * r * r))


def _log_moment_constant(p: SystemParams, name: str, with_users: bool) -> float:
    r = p.r_co
    heights = (p.h_bs, abs(p.h_bs - p.h_irs), p.h_irs)
    log_heights = sum(math.log(max(1.0, p.lambda_wave / (FOUR_PI * h))) for h in heights)

    inv_bs = _inverse_log_count(p.lambda_bs, r)
    inv_u = _inverse_log_count(p.lambda_u, r)
    if inv_bs == 0 or (with_users and inv_u == 0):
        return -math.inf

    value = (2 * math.log(p.q_elems) + 6 * math.log(2) + math.log(p.sigma_d_sq)
             + KL_EXPONENT * log_heights
             + 11 * math.log(2) + 5 * math.log(PI) + 1.5 * math.log(3) + 35.0 / 12.0
             + math.log(18) - 3.0
             + 4 * math.log(8 * max(1.0, _inverse_log_count(p.lambda_irs, r)))
             + 2 * math.log(2 * inv_bs))
    if with_users:
        users = -math.expm1(-p.lambda_u * FOUR_PI * r * r)
        value += 2 * math.log(2 * inv_u) - math.log(users)
    return _finite(name, value)


def k_coef(p: SystemParams) -> float:
    """
    Moment constant of the interference power: ``E{P^k}**(1/k) <= K * k**11``.

    Raises:
        NonFinite: If the constant overflows.
    """
    log_k = _log_moment_constant(p, 'k_coef', with_users=True)
    if log_k == -math.inf:
        return 0.0
    return _finite('k_coef', _exp_or_inf(log_k))


def l_coef(p: SystemParams) -> float:
    """Moment constant of the signal power: ``E{P^k}**(1/k) <= L * k**9``."""
    log_l = _log_moment_constant(p, 'l_coef', with_users=False)
    if log_l == -math.inf:
        return 0.0
    return _finite('l_coef', _exp_or_inf(log_l))


def _tau_max(coef: float, order: int) -> float:
    if coef == 0:
        return math.inf
    return math.exp(order * math.log(order) - math.log(coef) - order)


def tau_max_i(p: SystemParams) -> float:
    """Upper end of the open tau interval of the interference tail bound."""
    return _tau_max(k_coef(p), 11)


def tau_max_s(p: SystemParams) -> float:
    """Upper end of the open tau interval of the signal tail bound."""
    return _tau_max(l_coef(p), 9)


def _series(x: float, order: int, max_terms: int = 10000) -> float:
    if x < 0:
        raise DomainError("argument must be non-negative")
    terms = [1.0]
    term = 1.0
    for k in range(1, max_terms):
        denominator = 1.0
        for i in range(order):
            denominator *= order * k - i
        term = term * x / denominator
        if term == 0.0:
            break
        terms.append(term)
        if term < 1e-18 * math.fsum(terms) and order * k > x ** (1.0 / order):
            break
    return math.fsum(terms)


def _log_closed_form(x: float, order: int) -> float:
    if x < 0:
        raise DomainError("argument must be non-negative")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.inf
    z = x ** (1.0 / order)
    roots = np.exp(2j * PI * np.arange(order) / order)
    mean = complex(np.sum(np.exp(z * (roots - 1.0)))) / order
    if abs(mean.imag) > 1e-9 * abs(mean.real):
        logger.warning("Imaginary residue %g in the order-%d series at x=%g", mean.imag, order, x)
    return z + math.log(mean.real)


def _exp_or_inf(value: float) -> float:
    return math.exp(value) if value <= LOG_MAX else math.inf


def g_series(x: float) -> float:
    """Truncated series ``sum x**k / (11k)!``."""
    return _series(x, 11)


def h_series(x: float) -> float:
    """Truncated series ``sum x**k / (9k)!``."""
    return _series(x, 9)


def log_g_fn(x: float) -> float:
    """Natural log of ``g_fn``; finite for every finite ``x``."""
    return _log_closed_form(x, 11)


def log_h_fn(x: float) -> float:
    """Natural log of ``h_fn``."""
    return _log_closed_form(x, 9)


def g_fn(x: float) -> float:
    """
    ``(1/11) * sum_k exp(x**(1/11) * w_k)`` over the 11th roots of unity ``w_k``.

    Example:
        >>> g_fn(0.0)
        1.0

    Raises:
        DomainError: For negative ``x``.
    """
    return _exp_or_inf(log_g_fn(x))


def h_fn(x: float) -> float:
    """
    Same as ``g_fn`` with the 9th roots of unity.

    Example:
        >>> round(h_fn(1.0), 11)
        1.00000275573
    """
    return _exp_or_inf(log_h_fn(x))


def _log_tail(t: float, tau: float, coef: float, order: int) -> float:
    if t < 0:
        raise DomainError("threshold must be non-negative")
    limit = _tau_max(coef, order)
    if not (0 < tau < limit):
        raise TauOutOfDomain(tau, limit)
    return -math.log1p(-tau / limit) - _log_closed_form(tau * t, order)


def _clamped(log_bound: float, clamp: bool) -> float:
    if clamp:
        return 1.0 if log_bound >= 0 else math.exp(log_bound)
    return _exp_or_inf(log_bound)


def tail_bound_i(t: float, tau: float, p: SystemParams, clamp: bool = True) -> float:
    """
    Bound on the probability that the interference power exceeds ``t``.

    Args:
        t (float): Power threshold.
        tau (float): Free parameter in ``(0, tau_max_i(p))``.
        p (SystemParams): Validated parameters.
        clamp (bool, optional): Clamp the bound to at most 1. Defaults to True.

    Raises:
        TauOutOfDomain: If ``tau`` is outside the open interval.
    """
    return _clamped(_log_tail(t, tau, k_coef(p), 11), clamp)


def tail_bound_s(t: float, tau: float, p: SystemParams, clamp: bool = True) -> float:
    """Bound on the probability that the signal power exceeds ``t``; ``tau`` in ``(0, tau_max_s(p))``."""
    return _clamped(_log_tail(t, tau, l_coef(p), 9), clamp)


def outage_threshold(alpha: float, p: SystemParams) -> float:
    """Signal power ``N0 * (exp(alpha) - 1)`` needed for a capacity of ``alpha`` without interference."""
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    return p.n0 * math.expm1(alpha) if alpha < LOG_MAX else math.inf


def outage_terms(alpha: float, tau: float, p: SystemParams) -> List[float]:
    """The three candidates of the outage bound: 1, the Markov term and the signal tail term."""
    threshold = outage_threshold(alpha, p)
    markov = ps_max(p).total / threshold
    return [1.0, markov, tail_bound_s(threshold, tau, p)]


def outage_bound(alpha: float, tau: float, p: SystemParams) -> float:
    """
    Upper bound on the probability that the capacity exceeds ``alpha`` nats.

    Raises:
        TauOutOfDomain: If ``tau`` is outside ``(0, tau_max_s(p))``.
        NonFinite: If the signal upper bound overflows.
    """
    return min(outage_terms(alpha, tau, p))


def optimize_tau(target: float, p: SystemParams, which: str) -> TauChoice:
    """
    Pick the tau that minimizes a tail or outage bound.

    The search runs on ``u = tau / tau_max`` over a closed sub-interval of
    ``(0, 1)`` using scipy's bounded golden-section/parabolic minimizer on the
    log of the unclamped bound. When the bound is vacuous everywhere the
    midpoint of the interval is returned.

    Args:
        target (float): Power threshold ``t`` for the tails, ``alpha`` for the outage.
        p (SystemParams): Validated parameters.
        which (str): ``'i_tail'``, ``'s_tail'`` or ``'outage'``.

    Returns:
        TauChoice: The chosen tau and the (clamped) bound there.
    """
    if which not in TAIL_KINDS:
        raise ValueError(f"Unknown bound kind {which!r}, expected one of {TAIL_KINDS}")
    if target <= 0:
        raise DomainError("target must be positive")

    if which == 'i_tail':
        coef, order, t = k_coef(p), 11, target
    else:
        coef, order = l_coef(p), 9
        t = target if which == 's_tail' else outage_threshold(target, p)
    limit = _tau_max(coef, order)
    if not math.isfinite(limit):
        raise NonFinite('tau_max', limit)

    def log_bound(u: float) -> float:
        return -math.log1p(-u) - _log_closed_form(u * limit * t, order)

    result = minimize_scalar(log_bound, bounds=(_U_MIN, 1.0 - _U_MIN), method='bounded',
                             options={'xatol': 1e-10})
    u = float(result.x)
    if log_bound(u) >= 0:
        logger.debug("Bound is vacuous for every tau (target=%g, %s); using the midpoint", target, which)
        u = 0.5
    tau = u * limit

    if which == 'i_tail':
        bound = tail_bound_i(t, tau, p)
    elif which == 's_tail':
        bound = tail_bound_s(t, tau, p)
    else:
        bound = outage_bound(target, tau, p)
    return TauChoice(tau, bound)


def order_slope(fn: Callable[[SystemParams], Union[float, BoundTerm]], p: SystemParams,
                grid: Sequence[float], part: str = 'total') -> float:
    """
    Log-log slope of a bound against the IRS density, fitted over ``grid``.

    Args:
        fn (callable): A bound such as ``ps_max``.
        p (SystemParams): Base parameters; ``lambda_irs`` is replaced by the grid values.
        grid (list): Positive IRS densities.
        part (str, optional): ``'total'``, ``'bs_part'`` or ``'irs_part'``. Defaults to ``'total'``.

    Returns:
        float: The fitted slope.
    """
    values = []
    for lam in grid:
        value = fn(p.with_values(lambda_irs=lam))
        values.append(getattr(value, part) if isinstance(value, BoundTerm) else value)
    slope, _ = np.polyfit(np.log(grid), np.log(values), 1)
    return float(slope)


@dataclass(frozen=True)
class BoundSet:
    """All closed forms at one parameter point."""
    ps_max: BoundTerm
    ps_min: BoundTerm
    pi_max: BoundTerm
    pi_min: BoundTerm
    k_coef: float
    l_coef: float
    tau_max_i: float
    tau_max_s: float
    lens_area_s: float
    lens_area: str

    def sandwich_violations(self) -> List[str]:
        """Names of the min/max pairs that are out of order."""
        violations = []
        if self.ps_min.total > self.ps_max.total:
            violations.append('ps')
        if self.pi_min.total > self.pi_max.total:
            violations.append('pi')
        return violations

    def negative_parts(self) -> List[str]:
        """Dotted names of every negative part or block."""
        negatives = []
        for name in ('ps_max', 'ps_min', 'pi_max', 'pi_min'):
            term = getattr(self, name)
            negatives.extend(f"{name}.{key}" for key, value in term.subterms.items() if value < 0)
        return negatives


def evaluate(p: SystemParams, bp: BoundParams) -> BoundSet:
    """
    Evaluate every bound at one parameter point.

    Raises:
        NonFinite: If any bound overflows.
    """
    bounds = BoundSet(
        ps_max=ps_max(p),
        ps_min=ps_min(p),
        pi_max=pi_max(p),
        pi_min=pi_min(p, bp),
        k_coef=k_coef(p),
        l_coef=l_coef(p),
        tau_max_i=tau_max_i(p),
        tau_max_s=tau_max_s(p),
        lens_area_s=bp.lens_area_s,
        lens_area=bp.lens_area,
    )
    for name in bounds.negative_parts():
        logger.debug("Negative bound block %s", name)
    return bounds
