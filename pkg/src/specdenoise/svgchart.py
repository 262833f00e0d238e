"""Hand-rolled SVG 1.1 line charts, no dependencies, byte-deterministic.

Numeric x axis, auto-ranged y axis, fixed palette, legend on the right.
Every coordinate is formatted with a fixed precision so the same data always
yields the same bytes.
"""

from __future__ import annotations

from .errors import InvalidParamError

PALETTE = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
    "#bcbd22",
    "#e377c2",
]

_WIDTH = 960
_HEIGHT = 600
_MARGIN_LEFT = 96
_MARGIN_RIGHT = 230
_MARGIN_TOP = 64
_MARGIN_BOTTOM = 84


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("'", "&#39;")
    )


def _fmt(value: float) -> str:
    text = f"{value:.6g}"
    return "0" if text == "-0" else text


def render_line_chart(title: str, x_label: str, y_label: str,
                      series: list[tuple[str, list[tuple[float, float]]]]) -> str:
    """Render labeled (x, y) series to an SVG document string."""
    if not series or all(not points for _, points in series):
        raise InvalidParamError("nothing to plot")
    xs = [x for _, points in series for x, _ in points]
    ys = [y for _, points in series for _, y in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        pad = abs(y_lo) * 0.1 or 0.5
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = (y_hi - y_lo) * 0.08
        y_lo, y_hi = y_lo - pad, y_hi + pad

    left = _MARGIN_LEFT
    right = _WIDTH - _MARGIN_RIGHT
    top = _MARGIN_TOP
    bottom = _HEIGHT - _MARGIN_BOTTOM

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * (right - left)

    def py(y: float) -> float:
        return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="34" text-anchor="middle" font-size="22" '
        f'font-family="Helvetica,Arial,sans-serif">{_escape(title)}</text>',
    ]

    ticks = 6
    for i in range(ticks + 1):
        value = y_lo + (y_hi - y_lo) * i / ticks
        y = py(value)
        lines.append(f'<line x1="{left}" y1="{y:.2f}" x2="{right}" y2="{y:.2f}" '
                     f'stroke="#dddddd" stroke-width="1"/>')
        lines.append(f'<text x="{left - 10}" y="{y + 4:.2f}" text-anchor="end" font-size="12" '
                     f'font-family="Helvetica,Arial,sans-serif">{_fmt(value)}</text>')
    for i in range(ticks + 1):
        value = x_lo + (x_hi - x_lo) * i / ticks
        x = px(value)
        lines.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 6}" '
                     f'stroke="#000000" stroke-width="1"/>')
        lines.append(f'<text x="{x:.2f}" y="{bottom + 24}" text-anchor="middle" font-size="12" '
                     f'font-family="Helvetica,Arial,sans-serif">{_fmt(value)}</text>')

    lines.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" '
                 f'stroke="#000000" stroke-width="2"/>')
    lines.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" '
                 f'stroke="#000000" stroke-width="2"/>')
    lines.append(f'<text x="{(left + right) / 2:.1f}" y="{_HEIGHT - 26}" text-anchor="middle" '
                 f'font-size="15" font-family="Helvetica,Arial,sans-serif">{_escape(x_label)}</text>')
    lines.append(f'<text x="26" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-size="15" '
                 f'font-family="Helvetica,Arial,sans-serif" '
                 f'transform="rotate(-90 26 {(top + bottom) / 2:.1f})">{_escape(y_label)}</text>')

    legend_x = right + 20
    legend_y = top + 14
    for idx, (label, points) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        ordered = sorted(points)
        if ordered:
            coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in ordered)
            lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="2.5" '
                         f'points="{coords}"/>')
            for x, y in ordered:
                lines.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3.5" fill="{color}"/>')
        ly = legend_y + idx * 24
        lines.append(f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 24}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2.5"/>')
        lines.append(f'<text x="{legend_x + 32}" y="{ly + 4}" text-anchor="start" font-size="13" '
                     f'font-family="Helvetica,Arial,sans-serif">{_escape(label)}</text>')

    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_line_chart(path, title: str, x_label: str, y_label: str,
                     series: list[tuple[str, list[tuple[float, float]]]]) -> None:
    text = render_line_chart(title, x_label, y_label, series)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
