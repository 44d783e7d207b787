import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .geometry import Point2, link_distance
from .params import SystemParams

__all__ = [
    'BlockageDraw',
    'LinkDraw',
    'ElementDraws',
    'rician_weights',
    'rician_coefficients',
    'draw_blockage',
    'bs_user_channel',
    'irs_element_channels',
    'directivity_gain',
    'irs_phase',
]

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BlockageDraw:
    """Power factor of a direct BS-user link: 1, or ``h_hat`` when blocked."""
    factor: float

    @property
    def blocked(self) -> bool:
        return self.factor != 1.0


@dataclass(frozen=True)
class LinkDraw:
    """One complex channel coefficient and the phase of its specular part."""
    coeff: complex
    phase: float


@dataclass(frozen=True)
class ElementDraws:
    """Per-element coefficients and specular phases of one IRS link, both of length Q."""
    coeffs: np.ndarray
    phases: np.ndarray


def rician_weights(kappa: float) -> Tuple[float, float]:
    """
    Amplitude weights of the specular and scattered parts.

    Example:
        >>> rician_weights(float('inf'))
        (1.0, 0.0)
    """
    if math.isinf(kappa):
        return 1.0, 0.0
    return math.sqrt(kappa / (kappa + 1.0)), math.sqrt(1.0 / (kappa + 1.0))


def rician_coefficients(kappa: float, lambda_wave: float, d3: float, rng: np.random.Generator,
                        factor: float = 1.0, size: Optional[int] = None
                        ) -> Tuple[Union[complex, np.ndarray], Union[float, np.ndarray]]:
    """
    Draw Rician coefficients with free-space amplitude ``lambda_wave / (4 pi d3)``.

    The specular part has a uniform phase; the scattered part is circularly
    symmetric Gaussian with variance ``factor * (lambda_wave / (4 pi d3))**2``.
    Draw order is fixed: phases, then real parts, then imaginary parts.

    Args:
        kappa (float): Rician factor, ``inf`` for a purely specular link.
        lambda_wave (float): Wavelength.
        d3 (float): Link length.
        rng (np.random.Generator): Random stream.
        factor (float, optional): Power factor (blockage). Defaults to 1.
        size (int, optional): Number of i.i.d. draws; scalar when omitted.

    Returns:
        tuple: ``(coefficients, specular_phases)``.
    """
    amplitude = lambda_wave * math.sqrt(factor) / (4.0 * math.pi * d3)
    w_spec, w_scat = rician_weights(kappa)

    phase = TWO_PI * rng.random(size)
    real = rng.standard_normal(size)
    imag = rng.standard_normal(size)
    scattered = (real + 1j * imag) * (amplitude / math.sqrt(2.0))
    coeff = w_spec * amplitude * np.exp(1j * phase) + w_scat * scattered

    if size is None:
        return complex(coeff), float(phase)
    return coeff, phase


def draw_blockage(p: SystemParams, rng: np.random.Generator) -> BlockageDraw:
    """Bernoulli blockage: factor ``h_hat`` with probability ``p_b``, else 1."""
    return BlockageDraw(p.h_hat if rng.random() < p.p_b else 1.0)


def bs_user_channel(p: SystemParams, x_bs: Point2, x_u: Point2, blockage: BlockageDraw,
                    rng: np.random.Generator) -> LinkDraw:
    """
    Direct BS-to-user channel, attenuated by the blockage factor.

    Args:
        p (SystemParams): Validated parameters.
        x_bs (Point2): BS position.
        x_u (Point2): User position.
        blockage (BlockageDraw): Blockage state of this link.
        rng (np.random.Generator): Random stream.

    Returns:
        LinkDraw: The coefficient and its specular phase.
    """
    d3 = link_distance(p.h_bs, x_bs, x_u)
    coeff, phase = rician_coefficients(p.kappa, p.lambda_wave, d3, rng, factor=blockage.factor)
    return LinkDraw(coeff, phase)


def irs_element_channels(p: SystemParams, x_a: Point2, x_b: Point2, height: float,
                         rng: np.random.Generator) -> ElementDraws:
    """
    Channels of all Q elements of an IRS link, never blocked.

    Args:
        p (SystemParams): Validated parameters.
        x_a (Point2): Transmitting end (BS or IRS).
        x_b (Point2): Receiving end (IRS or user).
        height (float): Height offset of the link, ``h_bs - h_irs`` for BS to IRS
            and ``h_irs`` for IRS to user.
        rng (np.random.Generator): Random stream.

    Returns:
        ElementDraws: Coefficients and specular phases, one per element.
    """
    d3 = link_distance(height, x_a, x_b)
    coeffs, phases = rician_coefficients(p.kappa, p.lambda_wave, d3, rng, size=p.q_elems)
    return ElementDraws(coeffs, phases)


def directivity_gain(x_bs: Point2, x_0: Point2, x: Point2, epsilon: float, delta: float) -> float:
    """
    Sectorized BS antenna gain toward ``x`` for a beam steered at ``x_0``.

    Args:
        x_bs (Point2): BS position.
        x_0 (Point2): Beam target.
        x (Point2): Receiving point.
        epsilon (float): Beam width parameter; the main lobe is ``cos >= 1 - epsilon``.
        delta (float): Sidelobe gain.

    Returns:
        float: 1 inside the main lobe (boundary included), ``delta`` outside.
            A zero-length direction yields 1 and a warning.

    Example:
        >>> directivity_gain((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), 0.01, 0.01)
        0.01
    """
    ax, ay = x_0[0] - x_bs[0], x_0[1] - x_bs[1]
    bx, by = x[0] - x_bs[0], x[1] - x_bs[1]
    norm = math.hypot(ax, ay) * math.hypot(bx, by)
    if norm == 0.0:
        logger.warning("Degenerate direction at BS %s (target %s, receiver %s); using gain 1", x_bs, x_0, x)
        return 1.0
    cosine = (ax * bx + ay * by) / norm
    return 1.0 if cosine >= 1.0 - epsilon else delta


def irs_phase(phase_bs_irs: Union[float, np.ndarray], phase_irs_u: Union[float, np.ndarray]
              ) -> Union[float, np.ndarray]:
    """
    Element phase that cancels both specular phases of the served link, in [0, 2π).

    Example:
        >>> irs_phase(0.0, 0.0)
        0.0
    """
    if np.ndim(phase_bs_irs) == 0 and np.ndim(phase_irs_u) == 0:
        return float((-(phase_bs_irs + phase_irs_u)) % TWO_PI)
    return np.mod(-(np.asarray(phase_bs_irs) + np.asarray(phase_irs_u)), TWO_PI)
