import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overhang.balance import is_balanced
from overhang.model import Block, PointWeight, Stack, overhang
from overhang.spinal import (
    balance_displacements,
    diamond_column_deficit,
    log_bounds,
    optimize,
    optimize_fixed_k,
    sqrt_construction,
)


def test_s_star_100():
    opt = optimize(100)
    assert abs(opt.value - 3.6979) < 1e-3


@pytest.mark.parametrize("w", [2, 5, 10, 100, 1000, 10000])
def test_log_sandwich(w):
    lo, hi = log_bounds(w)
    assert lo < optimize(w).value < hi


def test_weight_one_is_half():
    assert optimize(1).value == pytest.approx(0.5)


def test_sqrt_construction():
    d = sqrt_construction(100)
    assert d.k == 10
    assert d.total_weight == 100
    assert abs(float(d.overhang) - 3.5332) < 1e-3


def test_monotone_in_weight():
    values = [optimize(w).value for w in range(1, 60, 3)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("w", [4, 9, 30, 100, 400])
def test_sqrt_below_optimum(w):
    assert sqrt_construction(w).overhang <= optimize(w).value + 1e-12


@pytest.mark.parametrize("w, k", [(20, 4), (50, 6), (100, 10), (100, 20)])
def test_stationarity_and_trailing_zeros(w, k):
    d = optimize_fixed_k(w, k).design
    t = d.loads
    positive = [i for i in range(1, k + 1) if d.weights[i - 1] > 1e-12]
    zero = [i for i in range(1, k + 1) if i not in positive]
    # zero weights form a suffix of 1..k
    assert zero == list(range(k + 1 - len(zero), k + 1))
    for i in positive:
        if i < k and i + 1 in positive:
            assert abs(t[i] ** 2 - (t[i - 1] + 0.5) * t[i + 1]) <= 1e-8 * t[i + 1]


def test_displacement_formula():
    d = balance_displacements([Fraction(1), Fraction(0), Fraction(2)])
    assert d.loads == (0, 2, 3, 6)
    assert d.displacements == (Fraction(3, 4), Fraction(1, 6), Fraction(5, 12))


def spine_stack(design, bump=None, eps=0.0):
    """The design as a loaded stack, optionally with d_bump increased by eps."""
    s = design.to_stack()
    if bump is None:
        return s
    # block i (0 = top) moves with every displacement at or below it in the spine
    shift = lambda i: eps if i <= bump else 0
    blocks = [Block(b.x + shift(i), b.level) for i, b in enumerate(s.blocks)]
    weights = [PointWeight(w.block, w.position + shift(w.block), w.magnitude) for w in s.weights]
    return Stack(blocks, weights)


@pytest.mark.parametrize("w", [3, 10, 40, 100])
def test_lemma_balance_iff_lp(w):
    design = optimize(w).design
    s = spine_stack(design)
    assert is_balanced(s).balanced
    assert abs(float(overhang(s)) - design.overhang) < 1e-12
    for i in range(design.k):
        assert not is_balanced(spine_stack(design, i, 1e-4)).balanced


@settings(max_examples=30, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=5, max_denominator=4), min_size=1, max_size=6))
def test_any_weights_balance_exactly(weights):
    design = balance_displacements(weights)
    assert is_balanced(design.to_stack(), mode="exact").balanced


def test_diamond_deficit():
    assert [diamond_column_deficit(m) for m in (4, 5, 6)] == [0, 6, 27]


def test_rejects_too_light():
    with pytest.raises(ValueError):
        optimize(0.5)
