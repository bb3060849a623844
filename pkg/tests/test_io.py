import json
from fractions import Fraction

import pytest

from overhang import io
from overhang.model import Block, PointWeight, Stack, make_harmonic
from overhang.search.brickwall import BrickWallProfile

F = Fraction


def test_fraction_round_trip():
    s = make_harmonic(7)
    back = io.loads(io.dumps(s), exact=True)
    assert back.blocks == s.blocks
    assert all(isinstance(b.x, Fraction) for b in back.blocks)


def test_float_round_trip_is_bit_exact():
    s = Stack([Block(-0.1, 0), Block(-0.1 + 1 / 3, 1)], [PointWeight(1, 0.7, 2.5)])
    back = io.loads(io.dumps(s))
    assert [b.x for b in back.blocks] == [b.x for b in s.blocks]
    assert back.weights[0].position == 0.7 and back.weights[0].magnitude == 2.5


def test_number_formats():
    assert io.format_number(F(3, 8)) == "0.375"
    assert io.format_number(F(-1, 40)) == "-0.025"
    assert io.format_number(F(1, 3)) == "1/3"
    assert io.format_number(F(4, 2)) == 2
    assert io.format_number(7) == 7
    with pytest.raises(ValueError):
        io.format_number(float("nan"))


def test_exact_reading_of_decimals():
    doc = '{"blocks": [{"x": -0.1, "level": 0}, {"x": "-1/3", "level": 1}]}'
    s = io.loads(doc, exact=True)
    assert s.blocks[0].x == F(-1, 10)
    assert s.blocks[1].x == F(-1, 3)


def test_output_is_deterministic(tmp_path):
    s = make_harmonic(4)
    path = tmp_path / "h.json"
    io.write_stack(s, path)
    assert path.read_text() == io.dumps(s)
    assert io.read_stack(path, exact=True).blocks == s.blocks
    json.loads(path.read_text())


@pytest.mark.parametrize(
    "text, where",
    [
        ('{"blocks": [', "line 1"),
        ("[]", "top level"),
        ('{"blocks": [{"x": 0}]}', "blocks[0]"),
        ('{"blocks": [{"x": "abc", "level": 0}]}', "blocks[0].x"),
        ('{"blocks": [{"x": -0.5, "level": true}]}', "blocks[0].level"),
        ('{"blocks": [{"x": -0.5, "level": 0}], "point_weights": [{"block": 3, "position": 0, "magnitude": 1}]}',
         "point_weights[0].block"),
        ('{"blocks": [{"x": -0.5, "level": 0}], "point_weights": [{"block": 0, "position": 2, "magnitude": 1}]}',
         "point_weights[0].position"),
        ('{"blocks": [{"x": -0.5, "level": 0}], "point_weights": [{"block": 0, "position": 0, "magnitude": -1}]}',
         "point_weights[0].magnitude"),
        ('{"blocks": [{"x": -0.5, "level": 0}, {"x": 1.0, "level": 1}]}', "geometry"),
    ],
)
def test_errors_name_the_location(text, where):
    with pytest.raises(io.DocumentError) as exc:
        io.loads(text)
    assert where in str(exc.value)


def test_profile_documents():
    p = BrickWallProfile.from_half_widths([F(1, 2), 1, F(3, 2)])
    text = io.profile_dumps(p)
    assert io.is_profile_document(text)
    assert not io.is_profile_document(io.dumps(make_harmonic(2)))
    assert io.profile_loads(text) == p
    with pytest.raises(io.DocumentError):
        io.profile_loads('{"rows": [{"width": 2, "left": 0}]}')
