import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate
from scipy.spatial.distance import cdist

from .errors import DomainError

__all__ = [
    'Point2',
    'ORIGIN',
    'PointSet',
    'sample_ppp',
    'link_distance',
    'neighbors_within',
    'lens_area_formula',
    'lens_area_exact',
    'lens_area_numeric',
    'campbell_check',
]

logger = logging.getLogger(__name__)

Point2 = Tuple[float, float]
ORIGIN: Point2 = (0.0, 0.0)

KINDS = ('BS', 'U', 'IRS')


@dataclass(frozen=True)
class PointSet:
    """
    Points of one node type sampled on a disk window.

    Attributes:
        kind (str): One of ``BS``, ``U`` or ``IRS``.
        points (np.ndarray): Array of shape (n, 2).
        center (Point2): Window center.
        radius (float): Window radius.
    """
    kind: str
    points: np.ndarray
    center: Point2
    radius: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown point kind {self.kind!r}")
        points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, 'points', points)

    def __len__(self) -> int:
        return self.points.shape[0]

    def with_point_first(self, point: Point2) -> 'PointSet':
        """Return a copy with ``point`` inserted at index 0."""
        points = np.vstack([np.asarray(point, dtype=float).reshape(1, 2), self.points])
        return PointSet(self.kind, points, self.center, self.radius)


def sample_ppp(lam: float, center: Point2, radius: float, rng: np.random.Generator,
               kind: str = 'U') -> PointSet:
    """
    Sample a homogeneous Poisson point process on a disk.

    The count is Poisson with mean ``lam * pi * radius**2``; points are i.i.d.
    uniform on the disk (radius drawn as ``radius * sqrt(U)``).

    Args:
        lam (float): Density in points per square meter, ``>= 0``.
        center (Point2): Disk center.
        radius (float): Disk radius, ``> 0``.
        rng (np.random.Generator): Random stream.
        kind (str, optional): Node type stored on the result. Defaults to ``'U'``.

    Returns:
        PointSet: The sampled points.

    Raises:
        DomainError: If ``lam < 0`` or ``radius <= 0``.
    """
    if lam < 0:
        raise DomainError("density must be non-negative")
    if radius <= 0:
        raise DomainError("radius must be positive")

    count = rng.poisson(lam * math.pi * radius ** 2) if lam > 0 else 0
    rho = radius * np.sqrt(rng.random(count))
    phi = 2.0 * math.pi * rng.random(count)
    points = np.column_stack([center[0] + rho * np.cos(phi), center[1] + rho * np.sin(phi)])
    return PointSet(kind, points, (float(center[0]), float(center[1])), float(radius))


def link_distance(h: float, a: Point2, b: Point2) -> float:
    """
    Three-dimensional link length for a height offset ``h`` and planar positions.

    Example:
        >>> link_distance(0.0, (3.0, 0.0), (0.0, 4.0))
        5.0
    """
    return math.sqrt(h * h + (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)


def neighbors_within(points: np.ndarray, x: Point2, radius: float) -> np.ndarray:
    """Sorted indices of ``points`` whose planar distance to ``x`` is at most ``radius``."""
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    distances = cdist(np.asarray(x, dtype=float).reshape(1, 2), points)[0]
    return np.flatnonzero(distances <= radius)


def _check_lens_domain(b: float, r: float) -> None:
    if not (0 < b < r):
        raise DomainError(f"lens area needs 0 < b < r, got b={b!r}, r={r!r}")


def lens_area_formula(b: float, r: float) -> float:
    """
    Lens-area expression used by the interference lower bound, evaluated as printed.

    A(b, r) = (2r²/π − b²/π)·asin(b/2r) − (r²/2)·sin(4·asin(b/2r))
              + (b²/2)·(1 − sin(π − 2·asin(b/2r)))

    This is not the true intersection area; see ``lens_area_exact``.

    Raises:
        DomainError: If ``b <= 0`` or ``b >= r``.
    """
    _check_lens_domain(b, r)
    a = math.asin(b / (2.0 * r))
    return ((2.0 * r * r / math.pi - b * b / math.pi) * a
            - (r * r / 2.0) * math.sin(4.0 * a)
            + (b * b / 2.0) * (1.0 - math.sin(math.pi - 2.0 * a)))


def lens_area_exact(b: float, r: float) -> float:
    """
    Area of the intersection of the disk of radius ``b`` at the origin with the
    disk of radius ``r`` centered at distance ``r``.

    Example:
        >>> round(lens_area_exact(7.5, 15.0), 2)
        78.93

    Raises:
        DomainError: If ``b <= 0`` or ``b >= r``.
    """
    _check_lens_domain(b, r)
    small = b * b * math.acos(b / (2.0 * r))
    large = r * r * math.acos(1.0 - b * b / (2.0 * r * r))
    kite = 0.5 * math.sqrt(b * b * (2.0 * r - b) * (2.0 * r + b))
    return small + large - kite


def lens_area_numeric(b: float, r: float, samples: int, rng: np.random.Generator) -> Tuple[float, float]:
    """
    Hit-or-miss estimate of the same intersection as ``lens_area_exact``.

    Args:
        b (float): Radius of the disk at the origin.
        r (float): Radius of the offset disk (its center sits at distance ``r``).
        samples (int): Number of uniform points drawn in the small disk, ``>= 10**4``.
        rng (np.random.Generator): Random stream.

    Returns:
        tuple: ``(area, standard_error)``.

    Raises:
        DomainError: If ``b`` is out of range or ``samples < 10**4``.
    """
    _check_lens_domain(b, r)
    if samples < 10 ** 4:
        raise DomainError("at least 10**4 samples are required")

    rho = b * np.sqrt(rng.random(samples))
    phi = 2.0 * math.pi * rng.random(samples)
    x = rho * np.cos(phi) - r
    y = rho * np.sin(phi)
    hits = np.count_nonzero(x * x + y * y <= r * r)

    disk = math.pi * b * b
    fraction = hits / samples
    return disk * fraction, disk * math.sqrt(fraction * (1.0 - fraction) / samples)


def campbell_check(lam: float, f: Callable[[np.ndarray], np.ndarray], radius: float, trials: int,
                   rng: np.random.Generator, center: Point2 = ORIGIN) -> float:
    """
    Compare the empirical mean of a PPP sum with Campbell's formula ``lam * ∫ f``.

    Args:
        lam (float): Density.
        f (callable): Maps an (n, 2) array of points to n values.
        radius (float): Disk window radius.
        trials (int): Number of independent realizations.
        rng (np.random.Generator): Random stream.
        center (Point2, optional): Window center. Defaults to the origin.

    Returns:
        float: Relative error of the empirical mean; 0 when ``lam == 0``.
    """
    if lam == 0:
        return 0.0

    def integrand(rho: float, phi: float) -> float:
        point = np.array([[center[0] + rho * math.cos(phi), center[1] + rho * math.sin(phi)]])
        return float(f(point)[0]) * rho

    integral, _ = integrate.dblquad(integrand, 0.0, 2.0 * math.pi, 0.0, radius)
    expected = lam * integral

    total = 0.0
    for _ in range(trials):
        points = sample_ppp(lam, center, radius, rng).points
        if len(points):
            total += float(np.sum(f(points)))
    empirical = total / trials

    logger.debug("campbell: empirical=%g expected=%g", empirical, expected)
    if expected == 0:
        return abs(empirical)
    return abs(empirical - expected) / abs(expected)
