"""SVG pictures of stacks.

Blocks are drawn as rectangles, the support set lightly shaded and the
balancing set darker.  Force arrows have lengths proportional to their
magnitudes; point weights are drawn as downward arrows onto the blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional
from xml.sax.saxutils import escape

from .balance import BalanceResult, is_balanced
from .model import RENDER_HEIGHT, Stack, support_partition

SUPPORT_FILL = "#e4e4e4"
BALANCING_FILL = "#9a9a9a"
PLAIN_FILL = "#d0d0d0"
FORCE_COLOUR = "#c0392b"
WEIGHT_COLOUR = "#1f4e9c"


@dataclass(frozen=True)
class RenderSpec:
    scale: float = 40.0  # pixels per block length
    show_forces: bool = False
    show_point_weights: bool = True
    shading: bool = True
    arrow_scale: Optional[float] = None  # block lengths per unit of force; None: longest arrow = 1

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.arrow_scale is not None and not self.arrow_scale > 0:
            raise ValueError("arrow scale must be positive")


def _f(v) -> str:
    """Fixed formatting so the output is byte-identical across runs."""
    s = f"{float(v):.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _arrow(x, y0, y1, colour: str, width: float) -> list:
    """Vertical arrow from ``y0`` to ``y1`` (SVG coordinates), head at ``y1``."""
    head = min(abs(y1 - y0), 6.0)
    sign = 1 if y1 > y0 else -1
    return [
        f'<line x1="{_f(x)}" y1="{_f(y0)}" x2="{_f(x)}" y2="{_f(y1)}" '
        f'stroke="{colour}" stroke-width="{_f(width)}"/>',
        f'<polygon points="{_f(x)},{_f(y1)} {_f(x - head / 2)},{_f(y1 - sign * head)} '
        f'{_f(x + head / 2)},{_f(y1 - sign * head)}" fill="{colour}"/>',
    ]


def render_svg(
    stack: Stack,
    spec: RenderSpec = RenderSpec(),
    result: Optional[BalanceResult] = None,
    title: str = "",
) -> str:
    """SVG 1.1 document for ``stack``.

    ``result`` supplies the verdict and the forces to draw; it is computed
    when not given.  An unbalanced stack gets a warning banner.
    """
    s = spec.scale
    h = RENDER_HEIGHT
    if result is None:
        result = is_balanced(stack)
    blocks = stack.blocks
    xs = [float(b.x) for b in blocks] or [0.0]
    tops = [(b.level + 1) * h for b in blocks] or [h]
    max_mag = max([float(w.magnitude) for w in stack.weights] + [0.0])
    draw_forces = spec.show_forces and result.balanced and result.witness
    if spec.arrow_scale is not None:
        unit = spec.arrow_scale
    else:
        mags = [max_mag] + ([float(fv.magnitude) for fv in result.witness] if draw_forces else [])
        unit = 1.0 / max(max(mags), 1e-12)
    arrow_room = unit * max_mag if spec.show_point_weights else 0.0
    x_lo = min(min(xs), -1.0) - 0.5
    x_hi = max(max(xs) + 1, 0.0) + 0.5
    y_hi = max(tops) + arrow_room + 0.5
    y_lo = -0.75
    width = (x_hi - x_lo) * s
    banner = 0.0 if result.balanced else 24.0
    height = (y_hi - y_lo) * s + banner

    def px(x) -> float:
        return (float(x) - x_lo) * s

    def py(y) -> float:
        return banner + (y_hi - float(y)) * s

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" '
        f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">',
        f"<title>{escape(title or stack.name or 'stack')}</title>",
        f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="white"/>',
    ]
    if not result.balanced:
        out.append(f'<rect x="0" y="0" width="{_f(width)}" height="{_f(banner)}" fill="#f8d7a0"/>')
        out.append(
            f'<text x="6" y="{_f(banner - 7)}" font-family="sans-serif" font-size="13" '
            f'fill="#7a3d00">warning: stack is not balanced</text>'
        )
    # table
    out.append(
        f'<rect class="table" x="{_f(px(x_lo))}" y="{_f(py(0))}" width="{_f(px(0) - px(x_lo))}" '
        f'height="{_f(0.75 * s)}" fill="#6b4f2a"/>'
    )
    if blocks:
        part = support_partition(stack) if spec.shading else None
        for i, b in enumerate(blocks):
            if part is None:
                fill = PLAIN_FILL
            else:
                fill = SUPPORT_FILL if i in part.support else BALANCING_FILL
            out.append(
                f'<rect class="block" x="{_f(px(b.x))}" y="{_f(py((b.level + 1) * h))}" '
                f'width="{_f(s)}" height="{_f(h * s)}" fill="{fill}" stroke="black" '
                f'stroke-width="1"/>'
            )
    if draw_forces:
        # total force per contact end, drawn upward from the contact level
        for fv in result.witness:
            mag = float(fv.magnitude)
            if mag <= 1e-12:
                continue
            y = stack.blocks[fv.contact.upper].level * h
            length = unit * mag * s
            lines = _arrow(px(fv.position), py(y) + length, py(y), FORCE_COLOUR, 1.5)
            lines[0] = lines[0].replace("<line ", '<line class="force" ', 1)
            out.extend(lines)
    if spec.show_point_weights:
        for w in stack.weights:
            b = stack.blocks[w.block]
            y = (b.level + 1) * h
            length = unit * float(w.magnitude) * s
            lines = _arrow(px(w.position), py(y) - length, py(y), WEIGHT_COLOUR, 2.0)
            lines[0] = lines[0].replace("<line ", '<line class="weight" ', 1)
            out.extend(lines)
    out.append("</svg>")
    return "\n".join(out) + "\n"
