import math

import pytest

from overhang.balance import is_balanced
from overhang.model import overhang
from overhang.search.structures import MAX_BLOCKS, enumerate_structures, optimize_structure


def test_d1_d2(cache):
    assert cache.exhaustive(1)[0] == pytest.approx(0.5)
    # three-quarters: the harmonic pair; recorded rather than taken from a reference
    assert cache.exhaustive(2)[0] == pytest.approx(0.75)


def test_d3(cache):
    value, stack = cache.exhaustive(3)
    assert abs(value - 1) < 1e-6
    assert is_balanced(stack, tol=1e-7).balanced


def test_d4(cache):
    value, stack = cache.exhaustive(4)
    assert abs(value - (15 - 4 * math.sqrt(2)) / 8) < 1e-4
    assert abs(float(overhang(stack)) - value) < 1e-12


def test_structures_are_distinct():
    for n in range(1, 6):
        seen = [s.levels for s in enumerate_structures(n)]
        assert len(seen) == len(set(seen))
        assert all(sum(s) == n for s in (tuple([lv[0]] + [len(x) for x in lv[1:]]) for lv in seen))


def test_enumeration_cap():
    with pytest.raises(ValueError):
        next(enumerate_structures(MAX_BLOCKS + 1))


def test_every_output_balances():
    for s in enumerate_structures(3):
        try:
            value, stack = optimize_structure(s, starts=6)
        except RuntimeError:
            continue
        assert is_balanced(stack, tol=1e-7).balanced
        assert stack.n == 3
