import xml.etree.ElementTree as ET

import pytest

from overhang.balance import is_balanced
from overhang.model import PointWeight, Stack, make_harmonic, make_inverted_triangle
from overhang.parabolic import build_parabolic
from overhang.render import RenderSpec, render_svg

NS = "{http://www.w3.org/2000/svg}"


def _elements(svg, tag, cls):
    root = ET.fromstring(svg.encode())
    return [e for e in root.iter(NS + tag) if e.get("class") == cls]


def test_parabolic_six_has_every_block():
    svg = render_svg(build_parabolic(6).stack)
    assert len(_elements(svg, "rect", "block")) == 111
    assert "not balanced" not in svg


def test_deterministic():
    s = build_parabolic(3).stack
    assert render_svg(s) == render_svg(s)


def test_point_weight_arrows():
    s = make_harmonic(3)
    b = s.blocks[2]
    s = Stack(s.blocks, [PointWeight(2, b.x + 0.5, 0.25), PointWeight(2, b.x, 0.125)])
    svg = render_svg(s)
    assert len(_elements(svg, "line", "weight")) == 2
    assert not _elements(render_svg(s, RenderSpec(show_point_weights=False)), "line", "weight")


def test_force_arrows():
    s = make_harmonic(4)
    svg = render_svg(s, RenderSpec(show_forces=True), result=is_balanced(s))
    assert _elements(svg, "line", "force")


def test_unbalanced_warning():
    svg = render_svg(make_inverted_triangle(3))
    assert "warning: stack is not balanced" in svg
    ET.fromstring(svg.encode())


def test_bad_spec():
    with pytest.raises(ValueError):
        RenderSpec(scale=0)
