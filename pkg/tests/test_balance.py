from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overhang import model
from overhang.balance import (
    UnsupportedModeError,
    build_balance_lp,
    is_balanced,
    is_strictly_stable,
    loaded_equivalent,
    min_stabilizing_weight,
    witness_residuals,
)
from overhang.lp import verify_certificate
from overhang.model import Block, PointWeight, Stack, make_diamond, make_harmonic, make_inverted_triangle, overhang
from overhang.parabolic import build_parabolic

CORPUS = [
    make_harmonic(1),
    make_harmonic(5),
    make_harmonic(20),
    make_inverted_triangle(2),
    make_inverted_triangle(3),
    make_diamond(4),
    make_diamond(5),
    build_parabolic(3).stack,
]


def shifted(stack, eps):
    """Harmonic stack with every displacement changed by ``eps``."""
    blocks = sorted(stack.blocks, key=lambda b: b.level)
    out, shift = [], 0
    for b in blocks:
        shift += eps
        out.append(Block(b.x + shift, b.level))
    return Stack(out)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 50, 100])
def test_harmonic_balanced(n):
    assert is_balanced(make_harmonic(n), mode="exact").balanced
    assert is_balanced(make_harmonic(n)).balanced


@pytest.mark.parametrize(
    "stack, expected",
    [
        (make_inverted_triangle(2), True),
        (make_inverted_triangle(3), False),
        (make_diamond(4), True),
        (make_diamond(5), False),
    ],
)
def test_named_verdicts(stack, expected):
    for mode in ("exact", "float"):
        assert is_balanced(stack, mode=mode).balanced is expected


def test_exact_certificate_is_verified():
    s = make_inverted_triangle(3)
    res = is_balanced(s, mode="exact")
    assert not res.balanced
    assert verify_certificate(build_balance_lp(s, exact=True).problem, res.certificate)


def test_exact_and_float_agree_on_corpus():
    for s in CORPUS:
        assert is_balanced(s, mode="exact").balanced == is_balanced(s).balanced


def test_h_independence(monkeypatch):
    s = make_diamond(4)
    before = build_balance_lp(s, exact=True).problem
    monkeypatch.setattr(model, "RENDER_HEIGHT", 7.25)
    after = build_balance_lp(s, exact=True).problem
    assert before.eq_rows == after.eq_rows
    assert before.b_eq == after.b_eq
    assert before.var_names == after.var_names


def test_witness_residuals():
    for s in CORPUS:
        for mode in ("float", "exact"):
            res = is_balanced(s, mode=mode)
            if res.balanced:
                r = witness_residuals(s, res)
                if mode == "exact":
                    assert all(v == 0 for v in r)
                else:
                    assert max(abs(v) for v in r) <= 1e-9
                assert all(fv.magnitude >= 0 for fv in res.witness)


@pytest.mark.parametrize("n", [2, 5, 20, 50])
def test_verge_of_collapse(n):
    s = make_harmonic(n)
    assert not is_balanced(shifted(s, 1e-6)).balanced
    assert is_balanced(shifted(s, -1e-6)).balanced


def test_irrational_coordinates_rejected_in_exact_mode():
    with pytest.raises(UnsupportedModeError):
        is_balanced(Stack([Block(2 ** 0.5 - 2, 0)]), mode="exact")


def test_point_weights_enter_the_rows():
    s = Stack([Block(Fraction(-1, 2), 0)])
    assert is_balanced(s.with_weights([PointWeight(0, Fraction(-1, 2), 5)]), mode="exact").balanced
    assert not is_balanced(s.with_weights([PointWeight(0, Fraction(1, 2), 5)]), mode="exact").balanced


def test_min_stabilizing_weight_sharp():
    # a single block sticking out 3/4: weight w at its left end x = -1/4
    # pulls the centre of mass to (1/4 - w/4) / (1 + w), over the table for w >= 1
    s = Stack([Block(Fraction(-1, 4), 0)])
    total, weights = min_stabilizing_weight(s, exact=True)
    assert total == 1
    assert weights[0].position == Fraction(-1, 4)
    less = [PointWeight(w.block, w.position, w.magnitude * (1 - Fraction(1, 10**6))) for w in weights]
    assert not is_balanced(s.with_weights(less)).balanced
    assert is_balanced(s.with_weights(weights)).balanced


def test_min_stabilizing_weight_zero_for_balanced():
    total, weights = min_stabilizing_weight(make_harmonic(4))
    assert total < 1e-9


def test_strict_stability():
    s = Stack([Block(-0.5, 0)])
    assert is_strictly_stable(s, 0.25)
    assert not is_strictly_stable(make_harmonic(3), 0.01)


def test_loaded_equivalent_keeps_balance_and_overhang():
    for s in [make_diamond(4), make_inverted_triangle(2), build_parabolic(3).stack]:
        res = is_balanced(s)
        loaded = loaded_equivalent(s, res)
        assert is_balanced(loaded).balanced
        assert overhang(loaded) == overhang(s)
        extra = float(loaded.total_weight - loaded.n)
        assert abs(extra - (s.n - loaded.n)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=8), min_size=1, max_size=6),
)
def test_random_spines_float_matches_exact(steps):
    x, blocks = Fraction(-1, 2), []
    for level, d in enumerate(steps):
        blocks.append(Block(x, level))
        x += d / 2
    s = Stack(blocks)
    assert is_balanced(s).balanced == is_balanced(s, mode="exact").balanced
