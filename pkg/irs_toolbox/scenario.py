import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from .channel import (
    BlockageDraw,
    ElementDraws,
    LinkDraw,
    bs_user_channel,
    directivity_gain,
    draw_blockage,
    irs_element_channels,
    irs_phase,
)
from .geometry import ORIGIN, Point2, PointSet, neighbors_within, sample_ppp
from .params import SystemParams, params_from_dict, params_to_dict

__all__ = [
    'TrialStreams',
    'Scenario',
    'PowerSample',
    'build',
    'build_from_points',
    'symbol_coefficients',
    'conditional_powers',
    'received_power',
    'capacity',
    'received_signal',
    'symbol_average_power',
    'scenario_to_json',
    'scenario_from_json',
]

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_FACTOR = 3.0
STREAM_NAMES = ('bs', 'u', 'irs', 'association', 'channel')


@dataclass(frozen=True)
class TrialStreams:
    """
    Independent random streams for the parts of one realization.

    Keeping the point processes on their own streams means that changing one
    density leaves the other point sets of a trial untouched.
    """
    bs: np.random.Generator
    u: np.random.Generator
    irs: np.random.Generator
    association: np.random.Generator
    channel: np.random.Generator

    @classmethod
    def from_seed(cls, master_seed: int, trial: int) -> 'TrialStreams':
        """Counter-based derivation: the streams depend only on ``(master_seed, trial)``."""
        return cls(*(
            np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial, index)))
            for index in range(len(STREAM_NAMES))
        ))

    @classmethod
    def single(cls, rng: np.random.Generator) -> 'TrialStreams':
        """Use one generator for everything."""
        return cls(rng, rng, rng, rng, rng)


@dataclass(frozen=True)
class PowerSample:
    """Conditional signal and interference powers of the typical user, and its capacity in nats."""
    p_s: float
    p_i: float
    cap: float


@dataclass(frozen=True)
class Scenario:
    """
    One network realization. The typical user is index 0 of ``u_set``, at the origin.

    Associations use -1 for "none". Channel dictionaries are keyed by point
    indices: ``direct[b]`` for BS ``b`` to the typical user, ``bs_irs[(b, s)]``
    and ``irs_user[(s, u)]`` for the element links.
    """
    params: SystemParams
    bs_set: PointSet
    u_set: PointSet
    irs_set: PointSet
    bs_of_user: np.ndarray
    user_of_irs: np.ndarray
    blockages: Dict[int, BlockageDraw] = field(default_factory=dict)
    direct: Dict[int, LinkDraw] = field(default_factory=dict)
    bs_irs: Dict[Tuple[int, int], ElementDraws] = field(default_factory=dict)
    irs_user: Dict[Tuple[int, int], ElementDraws] = field(default_factory=dict)
    irs_phases: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def typical_user(self) -> Point2:
        x, y = self.u_set.points[0]
        return float(x), float(y)

    def bs_near(self, x: Point2) -> np.ndarray:
        return neighbors_within(self.bs_set.points, x, self.params.r_co)

    def irs_near(self, x: Point2) -> np.ndarray:
        return neighbors_within(self.irs_set.points, x, self.params.r_co)


def _uniform_choice(candidates: np.ndarray, rng: np.random.Generator) -> int:
    if len(candidates) == 0:
        return -1
    return int(candidates[int(rng.integers(len(candidates)))])


def _associate(sources: np.ndarray, targets: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """For every source point pick one target within ``radius`` uniformly, -1 when none."""
    chosen = np.full(len(sources), -1, dtype=int)
    if len(sources) == 0 or len(targets) == 0:
        return chosen
    in_range = cdist(sources, targets) <= radius
    for index in range(len(sources)):
        chosen[index] = _uniform_choice(np.flatnonzero(in_range[index]), rng)
    return chosen


def build_from_points(p: SystemParams, bs_points: np.ndarray, user_points: np.ndarray, irs_points: np.ndarray,
                      rng: Union[np.random.Generator, TrialStreams], window_radius: Optional[float] = None
                      ) -> Scenario:
    """
    Realize associations, blockages, channels and IRS phases on fixed positions.

    Args:
        p (SystemParams): Validated parameters.
        bs_points (np.ndarray): BS positions, shape (n, 2).
        user_points (np.ndarray): Positions of the other users; the typical user is prepended at the origin.
        irs_points (np.ndarray): IRS positions.
        rng: A generator or a ``TrialStreams``; only the association and channel streams are used.
        window_radius (float, optional): Recorded on the point sets. Defaults to ``3 * r_co``.

    Returns:
        Scenario: The realization.
    """
    streams = rng if isinstance(rng, TrialStreams) else TrialStreams.single(rng)
    radius = window_radius if window_radius is not None else DEFAULT_WINDOW_FACTOR * p.r_co

    bs_set = PointSet('BS', bs_points, ORIGIN, radius)
    u_set = PointSet('U', user_points, ORIGIN, radius).with_point_first(ORIGIN)
    irs_set = PointSet('IRS', irs_points, ORIGIN, radius)

    bs_of_user = _associate(u_set.points, bs_set.points, p.r_co, streams.association)
    user_of_irs = _associate(irs_set.points, u_set.points, p.r_co, streams.association)

    scenario = Scenario(p, bs_set, u_set, irs_set, bs_of_user, user_of_irs)
    _draw_links(scenario, streams.channel)
    return scenario


def _draw_links(s: Scenario, rng: np.random.Generator) -> None:
    p = s.params
    bs_pts, u_pts, irs_pts = s.bs_set.points, s.u_set.points, s.irs_set.points
    bs_irs_height = p.h_bs - p.h_irs
    user = s.typical_user

    for b in s.bs_near(user):
        b = int(b)
        s.blockages[b] = draw_blockage(p, rng)
        s.direct[b] = bs_user_channel(p, tuple(bs_pts[b]), user, s.blockages[b], rng)
    if s.blockages:
        logger.debug("%d of %d direct links blocked", sum(d.blocked for d in s.blockages.values()),
                     len(s.blockages))

    def element_link(cache, key, x_a, x_b, height):
        if key not in cache:
            cache[key] = irs_element_channels(p, tuple(x_a), tuple(x_b), height, rng)
        return cache[key]

    for irs in s.irs_near(user):
        irs = int(irs)
        element_link(s.irs_user, (irs, 0), irs_pts[irs], user, p.h_irs)
        for b in s.bs_near(tuple(irs_pts[irs])):
            element_link(s.bs_irs, (int(b), irs), bs_pts[b], irs_pts[irs], bs_irs_height)

        served = int(s.user_of_irs[irs])
        feeding = int(s.bs_of_user[served]) if served >= 0 else -1
        if feeding < 0:
            s.irs_phases[irs] = np.zeros(p.q_elems)
            continue
        to_user = element_link(s.irs_user, (irs, served), irs_pts[irs], u_pts[served], p.h_irs)
        from_bs = element_link(s.bs_irs, (feeding, irs), bs_pts[feeding], irs_pts[irs], bs_irs_height)
        s.irs_phases[irs] = irs_phase(from_bs.phases, to_user.phases)


def build(p: SystemParams, rng: Union[np.random.Generator, TrialStreams],
          window_factor: float = DEFAULT_WINDOW_FACTOR) -> Scenario:
    """
    Sample one realization around the typical user.

    BS, user and IRS processes are drawn on the disk of radius
    ``window_factor * r_co`` around the origin, then the typical user is inserted
    at the origin.

    Args:
        p (SystemParams): Validated parameters.
        rng: A generator or a ``TrialStreams``.
        window_factor (float, optional): Window radius in units of ``r_co``. Defaults to 3.

    Returns:
        Scenario: The realization.
    """
    streams = rng if isinstance(rng, TrialStreams) else TrialStreams.single(rng)
    radius = window_factor * p.r_co
    bs_set = sample_ppp(p.lambda_bs, ORIGIN, radius, streams.bs, 'BS')
    u_set = sample_ppp(p.lambda_u, ORIGIN, radius, streams.u, 'U')
    irs_set = sample_ppp(p.lambda_irs, ORIGIN, radius, streams.irs, 'IRS')
    return build_from_points(p, bs_set.points, u_set.points, irs_set.points, streams, radius)


def _element_sum(values: np.ndarray) -> complex:
    """Correctly rounded sum over IRS elements, independent of element order."""
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _reflected(s: Scenario, b: int, irs: int) -> complex:
    """Sum over elements of IRS-to-user, phase shift and BS-to-IRS coefficients."""
    shifted = s.irs_user[(irs, 0)].coeffs * np.exp(1j * s.irs_phases[irs]) * s.bs_irs[(b, irs)].coeffs
    return _element_sum(shifted)


def _beam_gain(s: Scenario, b: int, user: int, x: Point2, irs_of_bs: np.ndarray) -> float:
    """Gain at ``x`` of every beam BS ``b`` steers for ``user``: at the user and at IRSs serving it."""
    p = s.params
    x_bs = tuple(s.bs_set.points[b])
    gain = directivity_gain(x_bs, tuple(s.u_set.points[user]), x, p.epsilon, p.delta)
    for irs in irs_of_bs:
        if s.user_of_irs[irs] == user:
            gain += directivity_gain(x_bs, tuple(s.irs_set.points[irs]), x, p.epsilon, p.delta)
    return gain


def _path_contributions(s: Scenario) -> Iterator[Tuple[int, int, complex]]:
    """
    Every ``(user, irs, value)`` term of the typical user's received signal.

    ``irs`` is -1 for a BS's direct link. Users are visited BS by BS and paths in
    a fixed order, so sums over the terms are reproducible.
    """
    near_irs = [int(irs) for irs in s.irs_near(s.typical_user)]
    feeders = {irs: set(int(b) for b in s.bs_near(tuple(s.irs_set.points[irs]))) for irs in near_irs}
    relevant = sorted(set(s.direct) | set().union(*feeders.values()))

    users_of_bs = defaultdict(list)
    for user, b in enumerate(s.bs_of_user):
        if b >= 0:
            users_of_bs[int(b)].append(user)

    for b in relevant:
        if not users_of_bs[b]:
            continue
        paths: List[Tuple[int, complex, Point2]] = []
        if b in s.direct:
            paths.append((-1, s.direct[b].coeff, s.typical_user))
        for irs in near_irs:
            if b in feeders[irs]:
                paths.append((irs, _reflected(s, b, irs), tuple(s.irs_set.points[irs])))

        irs_of_bs = s.irs_near(tuple(s.bs_set.points[b]))
        for user in users_of_bs[b]:
            for irs, h, x in paths:
                yield user, irs, h * _beam_gain(s, b, user, x, irs_of_bs)


def symbol_coefficients(s: Scenario) -> Dict[int, complex]:
    """
    Complex coefficient of every user symbol in the typical user's received signal.

    A BS contributes through its direct link when it is in range of the typical
    user, and through every in-range IRS of the typical user that it can reach.

    Args:
        s (Scenario): A built scenario.

    Returns:
        dict: ``{user_index: coefficient}`` for users whose symbol arrives.
    """
    coefficients: Dict[int, complex] = {}
    for user, _, value in _path_contributions(s):
        coefficients[user] = coefficients.get(user, 0j) + value
    return coefficients


def capacity(p_s: float, p_i: float, n0: float) -> float:
    """
    Capacity in nats per channel use.

    Example:
        >>> round(capacity(3.0, 1.0, 1.0), 4)
        0.9163
    """
    return math.log1p(p_s / (p_i + n0))


def conditional_powers(s: Scenario) -> PowerSample:
    """
    Powers of the typical user's received signal averaged over the transmitted symbols.

    Symbols are i.i.d. zero mean with power ``sigma_d_sq``. The signal is the
    typical user's symbol over the serving BS's direct link and over the IRSs
    serving the typical user. The same symbol arriving through any other IRS
    counts as interference, together with ``|c_u|**2`` of every other user.
    """
    signal, leak = 0j, 0j
    others: Dict[int, complex] = {}
    for user, irs, value in _path_contributions(s):
        if user != 0:
            others[user] = others.get(user, 0j) + value
        elif irs < 0 or s.user_of_irs[irs] == 0:
            signal += value
        else:
            leak += value

    sigma = s.params.sigma_d_sq
    p_s = sigma * abs(signal) ** 2
    p_i = sigma * math.fsum([abs(leak) ** 2] + [abs(c) ** 2 for c in others.values()])
    return PowerSample(p_s, p_i, capacity(p_s, p_i, s.params.n0))


def received_power(s: Scenario) -> float:
    """
    Symbol-averaged power of the whole noise-free received signal, ``sigma_d_sq * sum |c_u|**2``.

    It differs from ``p_s + p_i`` by the cross term between the signal paths
    and the leaking paths of the typical user's own symbol.
    """
    return s.params.sigma_d_sq * math.fsum(abs(c) ** 2 for c in symbol_coefficients(s).values())


def received_signal(s: Scenario, symbols: np.ndarray) -> np.ndarray:
    """
    Noise-free received signal of the typical user for a batch of symbol vectors.

    Evaluated element by element from what every BS radiates, independently of
    ``symbol_coefficients``.

    Args:
        s (Scenario): A built scenario.
        symbols (np.ndarray): Complex array of shape (draws, number of users).

    Returns:
        np.ndarray: Complex array of shape (draws,).
    """
    p = s.params
    bs_pts, u_pts, irs_pts = s.bs_set.points, s.u_set.points, s.irs_set.points
    draws = symbols.shape[0]

    def radiated(b: int, x: Point2) -> np.ndarray:
        out = np.zeros(draws, dtype=complex)
        x_bs = tuple(bs_pts[b])
        for user in np.flatnonzero(s.bs_of_user == b):
            out += symbols[:, user] * directivity_gain(x_bs, tuple(u_pts[user]), x, p.epsilon, p.delta)
        for irs in neighbors_within(irs_pts, x_bs, p.r_co):
            served = s.user_of_irs[irs]
            if served >= 0 and s.bs_of_user[served] == b:
                out += symbols[:, served] * directivity_gain(x_bs, tuple(irs_pts[irs]), x, p.epsilon, p.delta)
        return out

    signal = np.zeros(draws, dtype=complex)
    for b, link in s.direct.items():
        signal += link.coeff * radiated(b, s.typical_user)
    for irs, theta in s.irs_phases.items():
        x_irs = tuple(irs_pts[irs])
        to_user = s.irs_user[(irs, 0)].coeffs
        for b in neighbors_within(bs_pts, x_irs, p.r_co):
            from_bs = s.bs_irs[(int(b), irs)].coeffs
            toward_irs = radiated(int(b), x_irs)
            for q in range(p.q_elems):
                signal += to_user[q] * np.exp(1j * theta[q]) * from_bs[q] * toward_irs
    return signal


def symbol_average_power(s: Scenario, draws: int, rng: np.random.Generator) -> Tuple[float, float]:
    """
    Monte Carlo power of the received signal over fresh Gaussian symbols.

    Returns:
        tuple: ``(mean power, standard error)``.
    """
    shape = (draws, len(s.u_set))
    scale = math.sqrt(s.params.sigma_d_sq / 2.0)
    symbols = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    power = np.abs(received_signal(s, symbols)) ** 2
    return float(np.mean(power)), float(np.std(power, ddof=1) / math.sqrt(draws))


def _pair_key(key: Tuple[int, int]) -> str:
    return f"{key[0]}:{key[1]}"


def _parse_pair(text: str) -> Tuple[int, int]:
    first, second = text.split(':')
    return int(first), int(second)


def _encode_elements(draws: ElementDraws) -> Dict[str, list]:
    return {
        'coeffs': [[float(c.real), float(c.imag)] for c in draws.coeffs],
        'phases': [float(x) for x in draws.phases],
    }


def _decode_elements(data: Dict[str, list]) -> ElementDraws:
    coeffs = np.array([complex(re, im) for re, im in data['coeffs']], dtype=complex)
    return ElementDraws(coeffs, np.array(data['phases'], dtype=float))


def scenario_to_json(s: Scenario) -> str:
    """
    Snapshot of a realization. Doubles are written with ``repr`` and read back exactly.
    """
    def points(ps: PointSet) -> Dict:
        return {'center': list(ps.center), 'radius': ps.radius, 'points': ps.points.tolist()}

    document = {
        'params': params_to_dict(s.params),
        'bs_set': points(s.bs_set),
        'u_set': points(s.u_set),
        'irs_set': points(s.irs_set),
        'bs_of_user': [int(b) for b in s.bs_of_user],
        'user_of_irs': [int(u) for u in s.user_of_irs],
        'blockages': {str(b): draw.factor for b, draw in sorted(s.blockages.items())},
        'direct': {str(b): [link.coeff.real, link.coeff.imag, link.phase] for b, link in sorted(s.direct.items())},
        'bs_irs': {_pair_key(k): _encode_elements(v) for k, v in sorted(s.bs_irs.items())},
        'irs_user': {_pair_key(k): _encode_elements(v) for k, v in sorted(s.irs_user.items())},
        'irs_phases': {str(k): [float(x) for x in v] for k, v in sorted(s.irs_phases.items())},
    }
    return json.dumps(document)


def scenario_from_json(text: str) -> Scenario:
    """Inverse of ``scenario_to_json``."""
    document = json.loads(text)

    def points(kind: str, data: Dict) -> PointSet:
        return PointSet(kind, np.array(data['points'], dtype=float), tuple(data['center']), data['radius'])

    return Scenario(
        params=params_from_dict(document['params']),
        bs_set=points('BS', document['bs_set']),
        u_set=points('U', document['u_set']),
        irs_set=points('IRS', document['irs_set']),
        bs_of_user=np.array(document['bs_of_user'], dtype=int),
        user_of_irs=np.array(document['user_of_irs'], dtype=int),
        blockages={int(b): BlockageDraw(f) for b, f in document['blockages'].items()},
        direct={int(b): LinkDraw(complex(re, im), ph) for b, (re, im, ph) in document['direct'].items()},
        bs_irs={_parse_pair(k): _decode_elements(v) for k, v in document['bs_irs'].items()},
        irs_user={_parse_pair(k): _decode_elements(v) for k, v in document['irs_user'].items()},
        irs_phases={int(k): np.array(v, dtype=float) for k, v in document['irs_phases'].items()},
    )
