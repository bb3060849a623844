from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from overhang import lp


def small_problem(b):
    p = lp.LpProblem()
    x, y = p.add_var(), p.add_var()
    p.add_eq({x: 1, y: 1}, b)
    p.add_eq({x: 1, y: -1}, Fraction(1, 3))
    return p


def test_exact_simplex_feasible():
    res = lp.simplex(small_problem(Fraction(1)), exact=True)
    assert res.feasible
    assert res.x == [Fraction(2, 3), Fraction(1, 3)]


def test_exact_simplex_infeasible_with_certificate():
    p = small_problem(Fraction(-1))
    res = lp.lp_solve(p, exact=True)
    assert not res.feasible
    assert lp.verify_certificate(p, res.certificate)


def test_highs_and_simplex_agree_on_objective():
    p = lp.LpProblem()
    a, b, c = p.add_var(), p.add_var(), p.add_var()
    p.add_eq({a: 1, b: 2, c: 1}, 4)
    p.add_ub({a: 1, b: -1}, 1)
    p.c = {a: -1, b: -1, c: 0}
    exact = lp.lp_solve(p, exact=True, engine="simplex")
    flt = lp.lp_solve(p.to_float())
    assert abs(float(exact.objective) - flt.objective) < 1e-9


def test_dump_lists_rows():
    text = small_problem(Fraction(1)).dump()
    assert "subject to" in text and "eq1" in text


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=3), st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_exact_verdicts_are_certified(rows, rhs):
    p = lp.LpProblem()
    for _ in range(3):
        p.add_var()
    for row, b in zip(rows, rhs):
        p.add_eq({k: Fraction(v) for k, v in enumerate(row)}, Fraction(b))
    res = lp.lp_solve(p, exact=True)
    if res.feasible:
        assert all(v == 0 for v in p.residuals(res.x))
        assert all(v >= 0 for v in res.x)
    else:
        assert lp.verify_certificate(p, res.certificate)
    assert res.feasible == lp.lp_solve(p.to_float()).feasible
