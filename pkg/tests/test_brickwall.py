import math
from fractions import Fraction

import pytest

from overhang.balance import is_balanced
from overhang.parabolic import build_parabolic, force_schedule, slab_base, slab_forces
from overhang.search.brickwall import (
    BrickWallProfile,
    ProfileError,
    _moves,
    _valid_ends,
    best_of_seeds,
    interface_loads,
    local_search_brickwall,
    min_weight_for_profile,
    outline_csv,
    profile_from_stack,
    propagate_well_behaved,
    scaled_outline,
)

F = Fraction
TOY = BrickWallProfile.from_half_widths([F(1, 2), 1])


def test_single_block():
    assert min_weight_for_profile(BrickWallProfile.from_half_widths([F(1, 2)]), exact=True) == 1


def test_toy_by_hand():
    # two blocks on one: each upper block takes 1/2 + 1/2 on its outer and inner corners
    assert min_weight_for_profile(TOY, exact=True) == 3
    pws = propagate_well_behaved(TOY, exact=True).point_weights(5)
    assert len(pws) == 4
    assert all(pw.magnitude == F(1, 2) for pw in pws)


def test_profile_validation():
    with pytest.raises(ProfileError):
        BrickWallProfile((F(-1, 2), F(-1, 2)), (1, 1))  # no half offset
    with pytest.raises(ProfileError):
        BrickWallProfile((F(-1, 2), F(1)), (1, 1))  # centre off the row beneath
    with pytest.raises(ProfileError):
        BrickWallProfile((F(-1, 2), F(-1)), (1, 1), True)


@pytest.mark.parametrize("halves", [[F(1, 2), 1, F(3, 2)], [F(1, 2), 1, F(1, 2), 1, F(3, 2), 2]])
def test_witness_is_feasible(halves):
    p = BrickWallProfile.from_half_widths(halves)
    asg = propagate_well_behaved(p, exact=True)
    w = min_weight_for_profile(p, exact=True)
    for total in (w, w + 1, 2 * w):
        assert asg.worst(total) >= 0
        stack = asg.loaded_stack(total)
        assert sum(pw.magnitude for pw in stack.weights) + stack.n == total
        assert is_balanced(stack, mode="exact").balanced


def test_sharpness():
    p = BrickWallProfile.from_half_widths([F(1, 2), 1, F(3, 2), 2, F(3, 2), 2, F(5, 2)])
    asg = propagate_well_behaved(p)
    w = min_weight_for_profile(p)
    assert asg.worst(w) >= -1e-9
    if w > p.n_blocks:
        assert asg.worst(w - 1e-6) < 0


def test_float_and_exact_agree():
    p = build_parabolic(4).stack
    prof = profile_from_stack(p)
    assert prof.symmetric
    assert math.isclose(float(min_weight_for_profile(prof, True)), min_weight_for_profile(prof), rel_tol=1e-12)


def test_local_search_is_one_move_optimal():
    res = local_search_brickwall(2, symmetric=True)
    assert all(b < a for a, b in zip(res.history, res.history[1:]))
    assert res.profile.overhang == 2
    assert res.weight == pytest.approx(min_weight_for_profile(res.profile), abs=1e-9)
    ends = [(float(a), float(b)) for a, b in res.profile.ends()]
    for _, g in _moves(ends, True, True):
        if _valid_ends(g, 2.0):
            other = BrickWallProfile.from_ends(g, True)
            assert min_weight_for_profile(other) >= res.weight - 1e-9


def test_asymmetric_not_heavier():
    sym = best_of_seeds(3, symmetric=True)
    asym = best_of_seeds(3, symmetric=False)
    assert asym.weight <= sym.weight + 1e-9
    assert asym.profile.overhang == 3


def test_overhang_four_weight():
    res = best_of_seeds(4)
    assert res.profile.symmetric and res.profile.overhang == 4
    stack = propagate_well_behaved(res.profile).loaded_stack(res.weight + 1e-9)
    assert is_balanced(stack).balanced


def test_standard_overhang_four(cache):
    res = cache.standard4()
    assert res.n_blocks <= 95
    assert res.extra_weight == 0
    stack = res.profile.to_stack()
    assert stack.weights == () or not stack.weights
    assert is_balanced(stack, mode="exact").balanced


def test_scaled_outline():
    left, right = scaled_outline(TOY)
    assert left[0] == (-0.5, 0.0) and right[-1] == (1.0, 2.0)
    assert all(abs(x + y) < 1e-15 for (x, _), (y, _) in zip(left, right))
    assert outline_csv(TOY).splitlines()[0] == "side,x,y"


def test_profile_from_stack_round_trip():
    p = BrickWallProfile((F(-1, 2), F(-1), F(-1, 2)), (1, 2, 2))
    assert profile_from_stack(p.to_stack()) == p


def _schedule_interfaces(d):
    """Loads under the bottom row of each slab predicted by the schedule."""
    return {s.r: slab_forces(s.r, s.g)[0] for s in force_schedule(d)}


def _well_behaved_interfaces(d):
    stack = build_parabolic(d).stack
    asg = propagate_well_behaved(profile_from_stack(stack), exact=True)
    return {r: interface_loads(asg, stack.n, slab_base(r)) for r in range(2, d + 1)}


def test_schedule_matches_lowest_slabs():
    got, want = _well_behaved_interfaces(6), _schedule_interfaces(6)
    for r in (2, 3):
        assert got[r] == want[r]
    for r in range(2, 7):
        assert sum(got[r].values()) == sum(want[r].values())
        assert set(got[r]) == set(want[r])


@pytest.mark.xfail(
    strict=True,
    reason="the well-behaved assignment spreads load differently inside slabs 4 to 6 "
    "and needs more than 111 units of weight on this profile",
)
def test_schedule_matches_every_slab():
    assert _well_behaved_interfaces(6) == _schedule_interfaces(6)
    assert min_weight_for_profile(profile_from_stack(build_parabolic(6).stack)) <= 111


@pytest.mark.slow
def test_overhang_fifty():
    res = best_of_seeds(50)
    assert res.profile.overhang == 50
    assert math.isfinite(res.weight)
