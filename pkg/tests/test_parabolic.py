from fractions import Fraction

import pytest

from overhang.balance import is_balanced
from overhang.model import make_inverted_triangle, overhang
from overhang.parabolic import (
    block_count,
    build_modified_parabolic,
    build_parabolic,
    build_slab,
    force_schedule,
    g_closed_form,
    laying_prefix,
    theorem_d,
    verify_parabolic,
    verify_slab_balance,
    with_extra_blocks,
)


@pytest.mark.parametrize("d", range(2, 11))
def test_parabolic_counts_and_overhang(d):
    s = build_parabolic(d).stack
    assert s.n == block_count(d) == d * (d - 1) * (2 * d - 1) // 3 + 1
    assert overhang(s) == Fraction(d, 2)


def test_six_stack():
    s = build_parabolic(6).stack
    assert (s.n, overhang(s)) == (111, 3)


@pytest.mark.parametrize("d", range(2, 8))
def test_parabolic_exactly_balanced(d):
    assert is_balanced(build_parabolic(d).stack, mode="exact").balanced


@pytest.mark.parametrize("d", range(2, 11))
def test_slab_construction(d):
    assert verify_parabolic(d)


def test_slab_rows():
    slab = build_slab(4)
    assert slab.rows == (4, 3, 4, 3, 4)
    assert slab.n_blocks == 2 * 3 ** 2


def test_slab_rejects_negative_load():
    with pytest.raises(ValueError):
        verify_slab_balance(build_slab(3), -1)


def test_schedule_closed_form():
    for d in range(2, 51):
        for sched in force_schedule(d):
            assert sched.g == g_closed_form(d, sched.r)


def test_bottom_rows_unbalanced():
    s = build_parabolic(6).stack
    rows = s.levels()
    bottom3 = [i for lv in (0, 1, 2) for i in rows[lv]]
    assert not is_balanced(s.subset(bottom3), mode="exact").balanced
    plus_one = bottom3 + [rows[3][0]]
    assert not is_balanced(s.subset(plus_one), mode="exact").balanced
    bottom6 = [i for lv in range(6) for i in rows[lv]]
    assert not is_balanced(s.subset(bottom6), mode="exact").balanced
    assert not is_balanced(make_inverted_triangle(3), mode="exact").balanced


@pytest.mark.parametrize("n", [4, 12, 112, 1000])
def test_lower_bound(n):
    d = theorem_d(n)
    assert Fraction(d, 2) > (3 * n / 16) ** (1 / 3) - 0.25
    s = with_extra_blocks(n)
    assert s.n == n
    assert is_balanced(s).balanced


@pytest.mark.parametrize("d", range(2, 6))
def test_every_laying_prefix_balanced(d):
    stack, order = build_modified_parabolic(d)
    assert sorted(order) == list(range(stack.n))
    for m in range(1, stack.n + 1):
        assert is_balanced(laying_prefix(stack, order, m), mode="exact").balanced, m
