"""Loaded brick-wall stacks.

A brick-wall profile is a list of contiguous rows, each offset by half a
block from the row beneath, standing on a single block that rests on the
table edge.  Its stabilising forces are taken to be well-behaved:

* a block covered at both upper corners passes its load up as two forces at
  those corners (a splitter);
* a protruding block covered at one corner only passes a single force at a
  free position inside that contact (a prop);
* uncovered corners carry point weights.  In asymmetric mode a
  left-protruding block is a splitter with a point weight at its left end.

Every magnitude is then affine in the total weight w, and so is every moment,
which turns the prop position bounds into affine inequalities too.  The
smallest w meeting all of them is the profile's minimum weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from ..model import Block, PointWeight, Stack

HALF = Fraction(1, 2)


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class BrickWallProfile:
    lefts: tuple  # x of the leftmost block in each row, bottom first
    widths: tuple
    symmetric: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lefts", tuple(Fraction(v) for v in self.lefts))
        object.__setattr__(self, "widths", tuple(int(v) for v in self.widths))
        check_profile(self)

    @classmethod
    def from_half_widths(cls, halves: Sequence) -> "BrickWallProfile":
        """Symmetric profile from row half-widths (multiples of 1/2)."""
        halves = [Fraction(h) for h in halves]
        return cls(tuple(-h for h in halves), tuple(int(2 * h) for h in halves), True)

    @classmethod
    def from_ends(cls, ends: Sequence, symmetric: bool = False) -> "BrickWallProfile":
        ends = [(Fraction(a), Fraction(b)) for a, b in ends]
        return cls(tuple(a for a, _ in ends), tuple(int(b - a) for a, b in ends), symmetric)

    @property
    def height(self) -> int:
        return len(self.widths)

    @property
    def n_blocks(self) -> int:
        return sum(self.widths)

    @property
    def rights(self) -> tuple:
        return tuple(a + w for a, w in zip(self.lefts, self.widths))

    @property
    def overhang(self) -> Fraction:
        return max(self.rights)

    def ends(self) -> list:
        return list(zip(self.lefts, self.rights))

    def half_widths(self) -> list:
        return [Fraction(w, 2) for w in self.widths]

    def levels(self) -> list:
        """``(width, offset, left)`` per row, offset being left mod 1."""
        return [(w, a % 1, a) for w, a in zip(self.widths, self.lefts)]

    def to_stack(self, weights: Sequence = (), name: str = "") -> Stack:
        blocks = [
            Block(a + k, level)
            for level, (a, w) in enumerate(zip(self.lefts, self.widths))
            for k in range(w)
        ]
        return Stack(blocks, weights, name or f"brickwall-{float(self.overhang):g}")


def check_profile(p: BrickWallProfile) -> None:
    if not p.widths:
        raise ProfileError("empty profile")
    if p.widths[0] != 1:
        raise ProfileError("the bottom row must be a single block")
    if not -1 < p.lefts[0] < 0:
        raise ProfileError("the bottom block must straddle the table edge")
    for level in range(1, p.height):
        a0, a = p.lefts[level - 1], p.lefts[level]
        w0, w = p.widths[level - 1], p.widths[level]
        if w < 1:
            raise ProfileError(f"row {level} is empty")
        if (a - a0 - HALF) % 1 != 0:
            raise ProfileError(f"row {level} is not offset by half a block")
        # every block of the row needs its centre over the row beneath
        if a + HALF < a0 or a + w - HALF > a0 + w0:
            raise ProfileError(f"row {level} overhangs the row beneath")
    if p.symmetric and any(2 * a + w != 0 for a, w in zip(p.lefts, p.widths)):
        raise ProfileError("profile is not symmetric about x = 0")


# -- affine propagation --------------------------------------------------------------


@dataclass(frozen=True)
class WellBehavedForce:
    kind: str  # "table", "contact", "prop" or "point"
    lower: int  # block receiving the force from above (-1 for the table)
    upper: int  # block pressing down, -1 for a point weight
    position: object  # None for a prop: the position is moment / magnitude
    magnitude: tuple  # (alpha, beta): alpha + beta * w
    moment: tuple


@dataclass
class WellBehavedAssignment:
    profile: BrickWallProfile
    forces: list
    constraints: list  # (alpha, beta, label), each alpha + beta * w >= 0

    def values(self, w) -> list:
        return [a + b * w for a, b, _ in self.constraints]

    def worst(self, w):
        return min(self.values(w))

    def point_weights(self, w) -> list:
        out = []
        for f in self.forces:
            if f.kind == "point":
                m = f.magnitude[0] + f.magnitude[1] * w
                if m != 0:
                    out.append(PointWeight(f.lower, f.position, m))
        return out

    def loaded_stack(self, w) -> Stack:
        """The profile with its point weights at total weight ``w``.

        Weights that come out slightly negative from rounding are dropped.
        """
        pws = [pw for pw in self.point_weights(w) if pw.magnitude > 0]
        return self.profile.to_stack(pws)

    def contact_forces(self, w) -> dict:
        """``{(upper, lower): (position, magnitude)}`` at total weight ``w``;
        the table is lower = -1."""
        out = {}
        for f in self.forces:
            if f.kind == "point":
                continue
            mag = f.magnitude[0] + f.magnitude[1] * w
            if f.position is None:
                mom = f.moment[0] + f.moment[1] * w
                pos = mom / mag if mag else None
            else:
                pos = f.position
            out[f.upper, f.lower] = (pos, mag)
        return out


def propagate_well_behaved(
    profile: BrickWallProfile,
    exact: bool = False,
    left_props: Optional[bool] = None,
) -> WellBehavedAssignment:
    """Affine well-behaved forces for ``profile``, bottom row first.

    ``left_props`` chooses how left-protruding blocks behave; by default they
    are props in symmetric profiles and weighted splitters otherwise.
    """
    if left_props is None:
        left_props = profile.symmetric
    num = (lambda v: Fraction(v)) if exact else float
    zero = num(0)
    forces, cons = [], []
    index = 0
    starts = []
    for w in profile.widths:
        starts.append(index)
        index += w

    a0 = num(profile.lefts[0])
    table_pos = min(a0 + 1, zero)
    # incoming (force, moment) on each block of the current row
    incoming = [[zero, num(1), zero, table_pos]]
    forces.append(WellBehavedForce("table", -1, 0, table_pos, (zero, num(1)), (zero, table_pos)))
    cons.append((zero, num(1), "table"))

    for level in range(profile.height):
        left = num(profile.lefts[level])
        width = profile.widths[level]
        base = starts[level]
        if level + 1 < profile.height:
            up_left = num(profile.lefts[level + 1])
            up_width = profile.widths[level + 1]
            up_centres = {up_left + k + num(HALF): k for k in range(up_width)}
            nxt = [[zero, zero, zero, zero] for _ in range(up_width)]
        else:
            up_centres, nxt = {}, None
        for j in range(width):
            me = base + j
            c = left + j + num(HALF)
            lo_end, hi_end = c - num(HALF), c + num(HALF)
            fa, fb, ma, mb = incoming[j]
            fa -= 1  # own weight
            ma -= c
            kl = up_centres.get(lo_end)
            kr = up_centres.get(hi_end)
            prop = (kl is None) != (kr is None) and (kl is not None or left_props)
            if prop:
                k = kl if kl is not None else kr
                upper = starts[level + 1] + k
                # single force inside the contact with the block above
                lo, hi = (lo_end, c) if kl is not None else (c, hi_end)
                cons.append((fa, fb, f"prop {me} force"))
                cons.append((ma - lo * fa, mb - lo * fb, f"prop {me} left"))
                cons.append((hi * fa - ma, hi * fb - mb, f"prop {me} right"))
                forces.append(WellBehavedForce("prop", me, upper, None, (fa, fb), (ma, mb)))
                t = nxt[k]
                t[0] += fa
                t[1] += fb
                t[2] += ma
                t[3] += mb
                continue
            # splitter: forces at both upper corners
            ra, rb = ma - lo_end * fa, mb - lo_end * fb
            la, lb = fa - ra, fb - rb
            for k, pos, xa, xb, side in ((kl, lo_end, la, lb, "left"), (kr, hi_end, ra, rb, "right")):
                cons.append((xa, xb, f"block {me} {side}"))
                if k is None:
                    forces.append(WellBehavedForce("point", me, -1, pos, (xa, xb), (pos * xa, pos * xb)))
                else:
                    upper = starts[level + 1] + k
                    forces.append(WellBehavedForce("contact", me, upper, pos, (xa, xb), (pos * xa, pos * xb)))
                    t = nxt[k]
                    t[0] += xa
                    t[1] += xb
                    t[2] += pos * xa
                    t[3] += pos * xb
        incoming = nxt
    return WellBehavedAssignment(profile, forces, cons)


def profile_from_stack(stack: Stack, symmetric: Optional[bool] = None) -> BrickWallProfile:
    """The brick-wall profile of a standard stack whose rows are contiguous."""
    lefts, widths = [], []
    for level, row in stack.levels().items():
        if level != len(widths):
            raise ProfileError(f"level {len(widths)} is empty")
        xs = [Fraction(stack.blocks[i].x) for i in row]
        if any(b - a != 1 for a, b in zip(xs, xs[1:])):
            raise ProfileError(f"row {level} is not contiguous")
        lefts.append(xs[0])
        widths.append(len(xs))
    if symmetric is None:
        symmetric = all(2 * a + w == 0 for a, w in zip(lefts, widths))
    return BrickWallProfile(tuple(lefts), tuple(widths), symmetric)


def interface_loads(assignment: WellBehavedAssignment, w, level: int) -> dict:
    """``{x: force}`` pressed by row ``level`` onto the row beneath, summed
    over the blocks meeting at each point."""
    row_of = []
    for lv, width in enumerate(assignment.profile.widths):
        row_of.extend([lv] * width)
    out = {}
    for (upper, lower), (pos, mag) in assignment.contact_forces(w).items():
        if lower >= 0 and row_of[upper] == level:
            out[pos] = out.get(pos, 0) + mag
    return dict(sorted(out.items()))


def weight_interval(constraints, tol: float = 0.0) -> tuple:
    """``(lo, hi)`` range of w satisfying every ``alpha + beta * w >= -tol``."""
    lo, hi = -math.inf, math.inf
    for a, b, _ in constraints:
        if b == 0:
            if a < -tol:
                return math.inf, -math.inf
        elif b > 0:
            lo = max(lo, (-a - tol) / b if tol else -a / b)
        else:
            hi = min(hi, (-a - tol) / b if tol else -a / b)
    return lo, hi


def min_weight_for_profile(profile: BrickWallProfile, exact: bool = False):
    """Smallest total weight that makes every well-behaved force non-negative;
    ``math.inf`` when no weight does."""
    asg = propagate_well_behaved(profile, exact=exact)
    lo, hi = weight_interval(asg.constraints)
    n = profile.n_blocks
    lo = max(lo, n)
    if lo > hi:
        return math.inf
    return lo


# -- local search -------------------------------------------------------------------
#
# The search works on plain float ends (every coordinate is a multiple of 1/2,
# so the arithmetic is exact) and re-propagates only from the first layer a
# move touches, reusing the cached state of the layers below.


def _sweep(ends, left_props, state, start, best, record=None):
    """Propagate from layer ``start`` given the cached ``state`` there.

    ``state`` is ``(incoming, lo, hi)`` before processing that layer.  Stops
    early (returning inf) once the weight bound reaches ``best``.  When
    ``record`` is a list, the state before every layer is appended to it.
    """
    incoming, lo, hi = state
    n = len(ends)
    for level in range(start, n):
        if record is not None:
            record.append((incoming, lo, hi))
        a, b = ends[level]
        width = int(b - a)
        if level + 1 < n:
            ua, ub = ends[level + 1]
            up = {ua + k + 0.5: k for k in range(int(ub - ua))}
            nxt = [[0.0, 0.0, 0.0, 0.0] for _ in range(int(ub - ua))]
        else:
            up, nxt = {}, None
        for j in range(width):
            c = a + j + 0.5
            le, re = c - 0.5, c + 0.5
            fa, fb, ma, mb = incoming[j]
            fa -= 1.0
            ma -= c
            kl = up.get(le)
            kr = up.get(re)
            if (kl is None) != (kr is None) and (kl is not None or left_props):
                k = kl if kl is not None else kr
                plo, phi = (le, c) if kl is not None else (c, re)
                rows = ((fa, fb), (ma - plo * fa, mb - plo * fb), (phi * fa - ma, phi * fb - mb))
                t = nxt[k]
                t[0] += fa
                t[1] += fb
                t[2] += ma
                t[3] += mb
            else:
                ra, rb = ma - le * fa, mb - le * fb
                la, lb = fa - ra, fb - rb
                rows = ((la, lb), (ra, rb))
                if kl is not None:
                    t = nxt[kl]
                    t[0] += la
                    t[1] += lb
                    t[2] += le * la
                    t[3] += le * lb
                if kr is not None:
                    t = nxt[kr]
                    t[0] += ra
                    t[1] += rb
                    t[2] += re * ra
                    t[3] += re * rb
            for al, be in rows:
                if be > 0:
                    v = -al / be
                    if v > lo:
                        lo = v
                        if lo >= best:
                            return math.inf
                elif be < 0:
                    v = -al / be
                    if v < hi:
                        hi = v
                elif al < -1e-12:
                    return math.inf
                if lo > hi + 1e-9:
                    return math.inf
        incoming = nxt
    return lo


def _initial_state(ends):
    a0 = ends[0][0]
    return ([[0.0, 1.0, 0.0, min(a0 + 1.0, 0.0)]], 0.0, math.inf)


def _valid_ends(ends, target) -> bool:
    a0, b0 = ends[0]
    if b0 - a0 != 1 or not -1 < a0 < 0:
        return False
    top = b0
    for (pa, pb), (a, b) in zip(ends, ends[1:]):
        if b - a < 1 or (a - pa - 0.5) % 1 != 0:
            return False
        if a + 0.5 < pa or b - 0.5 > pb:
            return False
        top = max(top, b)
    return top == target


def _moves(ends, symmetric: bool, insert_anywhere: bool):
    """``(first changed layer, new ends)`` for every neighbour, top layers
    first so that cheap re-propagations come early."""
    n = len(ends)
    out = []
    steps = ((-1, 1), (1, -1)) if symmetric else ((-1, 0), (1, 0), (0, 1), (0, -1))
    shifts = ((-0.5, 0.5), (0.5, -0.5)) if symmetric else tuple(
        (da, db) for da in (0.5, -0.5) for db in (0.5, -0.5)
    )
    a, b = ends[-1]
    for da, db in shifts:
        out.append((n - 1, ends + [(a + da, b + db)]))
    if n > 1:
        out.append((n - 2, ends[:-1]))
    for i in range(n - 1, 0, -1):
        a, b = ends[i]
        for da, db in steps:
            g = list(ends)
            g[i] = (a + da, b + db)
            out.append((i - 1, g))
        if insert_anywhere and 2 <= i:
            pa, pb = ends[i - 1]
            for da, db in shifts:
                up = [(x + da, y + db) for x, y in ends[i:]]
                out.append((i - 1, ends[:i] + [(pa + da, pb + db)] + up))
                if i < n - 1:
                    out.append((i - 1, ends[:i] + [(x + da, y + db) for x, y in ends[i + 1 :]]))
    # add or remove a layer just above the foot block
    a0, b0 = ends[0]
    for da, db in shifts:
        shifted = [(x + da, y + db) for x, y in ends[1:]]
        for na, nb in ((a0 - 0.5, b0 + 0.5), (a0 + 0.5, b0 + 0.5), (a0 - 0.5, b0 - 0.5)):
            if nb - na >= 1 and (not symmetric or na + nb == 0):
                out.append((0, [ends[0], (na, nb)] + shifted))
        if n > 2:
            out.append((0, [ends[0]] + [(x + da, y + db) for x, y in ends[2:]]))
    return out


@dataclass
class SearchResult:
    profile: BrickWallProfile
    weight: float
    history: list = field(default_factory=list)
    evaluations: int = 0

    def __iter__(self):
        yield self.profile
        yield self.weight


def local_search_brickwall(
    target_overhang,
    symmetric: bool = True,
    seed: Optional[BrickWallProfile] = None,
    insert_anywhere: bool = True,
    max_iter: int = 1000000,
) -> SearchResult:
    """First-improvement local search on the minimum well-behaved weight at a
    fixed overhang.

    Moves widen or narrow one layer (both ends together when symmetric, one
    end otherwise), add or remove a layer at the top or just above the foot
    block and, with ``insert_anywhere``, insert or delete a layer at any
    height, re-offsetting the layers above.  The search stops when no move
    improves, so the result is one-move optimal.
    """
    target = Fraction(target_overhang)
    if target < HALF or (2 * target) % 1 != 0:
        raise ValueError("target overhang must be a positive multiple of 1/2")
    if seed is None:
        seed = default_seed(target, symmetric)
    if seed.overhang != target:
        raise ValueError("seed profile does not reach the target overhang")
    if symmetric and not seed.symmetric:
        raise ValueError("symmetric search needs a symmetric seed")
    t = float(target)
    ends = [(float(a), float(b)) for a, b in seed.ends()]
    states = []
    best = _sweep(ends, symmetric, _initial_state(ends), 0, math.inf, states)
    history = [best]
    evals = 1
    for _ in range(max_iter):
        improved = False
        for first, g in _moves(ends, symmetric, insert_anywhere):
            if not _valid_ends(g, t):
                continue
            start = max(first, 0)
            state = states[start] if 0 < start < len(states) else _initial_state(g)
            evals += 1
            v = _sweep(g, symmetric, state, start, best - 1e-9)
            if v < best - 1e-9:
                recorded = []
                v = _sweep(g, symmetric, _initial_state(g), 0, math.inf, recorded)
                ends, best, states = g, v, recorded
                history.append(v)
                improved = True
                break
        if not improved:
            break
    profile = BrickWallProfile.from_ends(ends, symmetric)
    return SearchResult(profile, best, history, evals)


def zigzag_seed(target, levels: int) -> BrickWallProfile:
    """Symmetric profile widening steadily from one block to ``target``."""
    target = Fraction(target)
    halves = [HALF]
    for k in range(1, levels):
        goal = HALF + (target - HALF) * Fraction(k, max(levels - 1, 1))
        step = HALF if halves[-1] + HALF <= goal + Fraction(1, 4) else -HALF
        nxt = halves[-1] + step
        if nxt < HALF:
            nxt = halves[-1] + HALF
        halves.append(min(nxt, target))
    while halves[-1] < target:
        halves.append(halves[-1] + HALF)
    return BrickWallProfile.from_half_widths(halves)


def default_seed(target, symmetric: bool = True) -> BrickWallProfile:
    p = zigzag_seed(target, max(2, int(11 * Fraction(target))))
    return p if symmetric else BrickWallProfile(p.lefts, p.widths, False)


SEED_HEIGHTS = (4, 4.5, 5, 6, 8, 11, 14)


def best_of_seeds(target, symmetric: bool = True, heights=SEED_HEIGHTS, **kw) -> SearchResult:
    """Run the search from several seed heights (multiples of the target)
    and keep the lightest result.

    The search seldom removes layers, so the seed height largely decides the
    result: small targets want about 4.5 levels per unit of overhang, large
    ones about 11.  An asymmetric search starts from the best symmetric
    profile, which is far cheaper than growing one from a zigzag.
    """
    best = None
    for mult in heights:
        seed = zigzag_seed(target, max(2, int(mult * Fraction(target))))
        res = local_search_brickwall(target, True, seed=seed, **kw)
        if best is None or res.weight < best.weight:
            best = res
    if symmetric:
        return best
    p = best.profile
    res = local_search_brickwall(target, False, seed=BrickWallProfile(p.lefts, p.widths, False), **kw)
    res.evaluations += best.evaluations
    return res


# -- standard stacks ----------------------------------------------------------------
#
# Without point weights the well-behaved bound no longer applies.  The search
# instead minimises blocks + penalty * (least point weight that balances the
# profile, from the balance LP), raising the penalty until the extra weight
# vanishes.


PENALTIES = (1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0)


@dataclass
class StandardResult:
    profile: Optional[BrickWallProfile]
    n_blocks: float  # inf when no standard stack was found
    extra_weight: float
    evaluations: int = 0


def standard_search(
    target_overhang,
    height_factors: Sequence = (4, 4.5, 5),
    penalties: Sequence = PENALTIES,
) -> StandardResult:
    """Fewest-block symmetric brick-wall stack with no point weights.

    Each start is the loaded local optimum from a zigzag seed with
    ``factor * target`` levels.  Short seeds matter: the loaded search rarely
    removes layers, and small targets do best with few of them.
    """
    from ..balance import UnstabilizableError, is_balanced, min_stabilizing_weight

    target = Fraction(target_overhang)
    t = float(target)

    @lru_cache(maxsize=None)
    def extra(key):
        stack = BrickWallProfile.from_ends(key, True).to_stack()
        try:
            return float(min_stabilizing_weight(stack)[0])
        except UnstabilizableError:
            return math.inf

    def score(ends, lam):
        n = sum(int(b - a) for a, b in ends)
        e = extra(tuple(ends))
        return n + lam * e, n, e

    best = StandardResult(None, math.inf, math.inf)
    for factor in height_factors:
        seed = zigzag_seed(target, max(1, int(factor * target)))
        ends = [(float(a), float(b)) for a, b in local_search_brickwall(target, True, seed=seed).profile.ends()]
        for lam in penalties:
            cur = score(ends, lam)
            improved = True
            while improved:
                improved = False
                for _, g in _moves(ends, True, True):
                    if _valid_ends(g, t):
                        v = score(g, lam)
                        if v[0] < cur[0] - 1e-9:
                            ends, cur, improved = g, v, True
                            break
        _, n, e = cur
        if e <= 1e-9 and n < best.n_blocks:
            profile = BrickWallProfile.from_ends(ends, True)
            if is_balanced(profile.to_stack()).balanced:
                best = StandardResult(profile, n, e)
    best.evaluations = extra.cache_info().currsize
    return best


# -- outlines ------------------------------------------------------------------------


def scaled_outline(profile: BrickWallProfile, scale: Optional[float] = None) -> tuple:
    """Left and right boundary polylines, divided by the overhang.

    Each is a list of ``(x, y)`` points, bottom to top, with y in block heights
    (also scaled).
    """
    s = float(profile.overhang) if scale is None else float(scale)
    left, right = [], []
    for level, (a, b) in enumerate(profile.ends()):
        for y in (level, level + 1):
            left.append((float(a) / s, y / s))
            right.append((float(b) / s, y / s))
    return left, right


def outline_csv(profile: BrickWallProfile) -> str:
    left, right = scaled_outline(profile)
    lines = ["side,x,y"]
    lines += [f"left,{x:.10g},{y:.10g}" for x, y in left]
    lines += [f"right,{x:.10g},{y:.10g}" for x, y in right]
    return "\n".join(lines) + "\n"
