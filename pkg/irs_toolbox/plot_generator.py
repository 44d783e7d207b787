import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

__all__ = ['generate_svg_plot', 'axis_ticks']

PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#e377c2', '#7f7f7f']
MARGIN_LEFT = 70
MARGIN_RIGHT = 150
MARGIN_TOP = 30
MARGIN_BOTTOM = 50


def _usable(points: Sequence[Tuple[float, float]], log_x: bool, log_y: bool) -> List[Tuple[float, float]]:
    kept = []
    for x, y in points:
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        if (log_x and x <= 0) or (log_y and y <= 0):
            continue
        kept.append((float(x), float(y)))
    return kept


def axis_ticks(low: float, high: float, log: bool, count: int = 5) -> List[float]:
    """
    Tick positions for an axis range.

    Args:
        low (float): Lower end of the data.
        high (float): Upper end of the data.
        log (bool): Logarithmic axis: one tick per decade.
        count (int, optional): Number of ticks of a linear axis. Defaults to 5.

    Returns:
        list: Tick values, ascending.

    Example:
        >>> axis_ticks(0.002, 3.0, log=True)
        [0.001, 0.01, 0.1, 1.0, 10.0]
        >>> axis_ticks(0.0, 1.0, log=False)
        [0.0, 0.25, 0.5, 0.75, 1.0]
    """
    if log:
        first, last = math.floor(math.log10(low)), math.ceil(math.log10(high))
        if first == last:
            last += 1
        return [10.0 ** k for k in range(first, last + 1)]
    if low == high:
        low, high = low - 0.5, high + 0.5
    step = (high - low) / (count - 1)
    return [low + i * step for i in range(count)]


def generate_svg_plot(
        series: Dict[str, Sequence[Tuple[float, float]]],
        title: str = '',
        x_label: str = '',
        y_label: str = '',
        log_x: bool = False,
        log_y: bool = False,
        width: int = 640,
        height: int = 400,
        tick_format: Optional[Callable[[float], str]] = None,
        pretty: bool = False
) -> str:
    """
    Render line series as a self-contained SVG 1.1 document.

    Points that cannot be drawn (non-finite, or non-positive on a log axis) are skipped.

    Args:
        series (dict): Legend label to list of ``(x, y)`` points.
        title (str): Plot title.
        x_label (str): Horizontal axis label.
        y_label (str): Vertical axis label.
        log_x (bool): Logarithmic horizontal axis.
        log_y (bool): Logarithmic vertical axis.
        width (int): Width in pixels.
        height (int): Height in pixels.
        tick_format (callable, optional): Formats vertical tick values. Defaults to ``'{:g}'``.
        pretty (bool): Whether to add newlines and indentation. Defaults to False.

    Returns:
        str: The SVG document.

    Example:
        >>> svg = generate_svg_plot({'a': [(1, 1), (2, 4)]})
        >>> svg.startswith('<svg')
        True
    """
    if tick_format is None:
        tick_format = '{:g}'.format
    cleaned = {label: _usable(points, log_x, log_y) for label, points in series.items()}
    xs = [x for points in cleaned.values() for x, _ in points]
    ys = [y for points in cleaned.values() for _, y in points]

    default = (1.0, 10.0) if log_x else (0.0, 1.0)
    x_ticks = axis_ticks(min(xs) if xs else default[0], max(xs) if xs else default[1], log_x)
    default = (1.0, 10.0) if log_y else (0.0, 1.0)
    y_ticks = axis_ticks(min(ys) if ys else default[0], max(ys) if ys else default[1], log_y)

    plot_w = width - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = height - MARGIN_TOP - MARGIN_BOTTOM

    def scale(value: float, ticks: List[float], log: bool) -> float:
        low, high = ticks[0], ticks[-1]
        if log:
            value, low, high = math.log10(value), math.log10(low), math.log10(high)
        return (value - low) / (high - low)

    def px(x: float) -> float:
        return MARGIN_LEFT + scale(x, x_ticks, log_x) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (1.0 - scale(y, y_ticks, log_y)) * plot_h

    newline = '\n    ' if pretty else ''
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">')
    svg += newline + f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>'
    svg += newline + (f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
                      f'fill="none" stroke="black"/>')

    for tick in x_ticks:
        x = px(tick)
        svg += newline + f'<line x1="{x:.2f}" y1="{MARGIN_TOP + plot_h}" x2="{x:.2f}" y2="{MARGIN_TOP + plot_h + 5}" stroke="black"/>'
        svg += newline + (f'<text x="{x:.2f}" y="{MARGIN_TOP + plot_h + 18}" font-size="11" '
                          f'text-anchor="middle">{escape("{:g}".format(tick))}</text>')
    for tick in y_ticks:
        y = py(tick)
        svg += newline + f'<line x1="{MARGIN_LEFT - 5}" y1="{y:.2f}" x2="{MARGIN_LEFT}" y2="{y:.2f}" stroke="black"/>'
        svg += newline + (f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-size="11" '
                          f'text-anchor="end">{escape(tick_format(tick))}</text>')

    if title:
        svg += newline + (f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{MARGIN_TOP - 10}" font-size="14" '
                          f'text-anchor="middle">{escape(title)}</text>')
    if x_label:
        svg += newline + (f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{height - 12}" font-size="12" '
                          f'text-anchor="middle">{escape(x_label)}</text>')
    if y_label:
        svg += newline + (f'<text x="14" y="{MARGIN_TOP + plot_h / 2:.2f}" font-size="12" text-anchor="middle" '
                          f'transform="rotate(-90 14 {MARGIN_TOP + plot_h / 2:.2f})">{escape(y_label)}</text>')

    for index, (label, points) in enumerate(cleaned.items()):
        color = PALETTE[index % len(PALETTE)]
        if points:
            coords = ' '.join(f'{px(x):.2f},{py(y):.2f}' for x, y in points)
            svg += newline + f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        legend_y = MARGIN_TOP + 12 + 16 * index
        legend_x = MARGIN_LEFT + plot_w + 10
        svg += newline + (f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 20}" y2="{legend_y}" '
                          f'stroke="{color}" stroke-width="1.5"/>')
        svg += newline + f'<text x="{legend_x + 25}" y="{legend_y + 4}" font-size="11">{escape(label)}</text>'

    if pretty:
        svg += '\n'
    svg += '</svg>'
    return svg
