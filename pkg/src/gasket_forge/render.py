"""Deterministic SVG rendering of packings and point clouds.

No timestamps, no randomness: elements are emitted in input order with a
fixed 9-significant-digit float format, so equal inputs give equal bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mobius import GenCircle, is_inf


@dataclass
class RenderSpec:
    center: complex = complex(0.5, 0.35)
    half_width: float = 2.0
    stroke_width: float = 0.005
    fill: bool = False
    point_size: float = 0.004
    max_elements: int = 50000
    size_px: int = 800

    def __post_init__(self):
        if not (self.half_width > 0 and self.point_size > 0 and self.max_elements > 0):
            raise ValueError("render spec needs positive sizes and caps")


def _f(x: float) -> str:
    return format(float(x), ".9g")


def _clip_line_to_box(anchor: complex, tangent: complex, lo_x, lo_y, hi_x, hi_y):
    """Segment of a parametrized line inside an axis box, or None."""
    t_min, t_max = -1e30, 1e30
    for (p0, d, lo, hi) in ((anchor.real, tangent.real, lo_x, hi_x),
                            (anchor.imag, tangent.imag, lo_y, hi_y)):
        if abs(d) < 1e-300:
            if not (lo <= p0 <= hi):
                return None
            continue
        t0, t1 = (lo - p0) / d, (hi - p0) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_min, t_max = max(t_min, t0), min(t_max, t1)
    if t_min >= t_max:
        return None
    return anchor + t_min * tangent, anchor + t_max * tangent


def render_svg(elements, spec: RenderSpec = None) -> str:
    """Render ("circle", GenCircle, color) / ("point", z, color) elements.

    The chart is drawn with the imaginary axis pointing up; circles whose
    boundary passes through infinity are emitted as clipped lines.
    """
    spec = spec or RenderSpec()
    cx, cy = spec.center.real, spec.center.imag
    hw = spec.half_width
    lo_x, hi_x = cx - hw, cx + hw
    lo_y, hi_y = cy - hw, cy + hw

    def X(x):
        return _f(x)

    def Y(y):
        return _f(2 * cy - y)  # flip about the viewport center line

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.size_px}" '
        f'height="{spec.size_px}" viewBox="{_f(lo_x)} {_f(cy - hw)} {_f(2 * hw)} {_f(2 * hw)}">',
    ]
    emitted = 0
    truncated = 0
    for element in elements:
        if emitted >= spec.max_elements:
            truncated += 1
            continue
        kind = element[0]
        color = element[2] if len(element) > 2 else "black"
        if kind == "circle":
            c: GenCircle = element[1]
            if c.is_line:
                seg = _clip_line_to_box(c.center, 1j * c.normal, lo_x, lo_y, hi_x, hi_y)
                if seg is None:
                    continue
                a, b = seg
                out.append(f'<line x1="{X(a.real)}" y1="{Y(a.imag)}" '
                           f'x2="{X(b.real)}" y2="{Y(b.imag)}" stroke="{color}" '
                           f'stroke-width="{_f(spec.stroke_width)}"/>')
            else:
                fill = color if spec.fill else "none"
                opacity = ' fill-opacity="0.15"' if spec.fill else ""
                out.append(f'<circle cx="{X(c.center.real)}" cy="{Y(c.center.imag)}" '
                           f'r="{_f(c.radius)}" stroke="{color}" '
                           f'stroke-width="{_f(spec.stroke_width)}" fill="{fill}"{opacity}/>')
        elif kind == "point":
            z = element[1]
            if is_inf(z):
                continue
            s = spec.point_size
            out.append(f'<rect x="{X(z.real - s / 2)}" y="{Y(z.imag + s / 2)}" '
                       f'width="{_f(s)}" height="{_f(s)}" fill="{color}"/>')
        else:
            raise ValueError(f"unknown element kind {kind!r}")
        emitted += 1
    if truncated:
        out.append(f"<!-- truncated {truncated} elements beyond the cap -->")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def packing_elements(p, color: str = "black"):
    return [("circle", p.circles[v], color) for v in sorted(p.circles)]


def cloud_elements(points, color: str = "black"):
    return [("point", z, color) for z in points]
