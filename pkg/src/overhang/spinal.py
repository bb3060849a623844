"""Loaded spinal stacks.

The spine is numbered from the top: block 1 is the highest, block k rests on
the table.  Block i carries a point weight w_i at its left edge, and
t_i = t_{i-1} + w_i + 1 is the total load that block i passes down.  A spine
with those weights balances exactly when block i sticks out
d_i = (w_i + 1/2) / t_i beyond the block below it.

For fixed total weight and spine length the best loads obey
t_i^2 = (t_{i-1} + 1/2) t_{i+1} on a prefix, and the remaining lower blocks
carry no weight.  We solve that three-term recurrence by shooting on the first
free load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .model import Block, PointWeight, Stack

SHOOT_TOL = 1e-10
LOWER_SLACK = 1.313  # additive constant of the guaranteed lower bound


@dataclass(frozen=True)
class SpinalDesign:
    weights: tuple  # w_1..w_k
    loads: tuple  # t_0..t_k
    displacements: tuple  # d_1..d_k

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self):
        return self.loads[-1]

    @property
    def overhang(self):
        return sum(self.displacements)

    def positions(self) -> list:
        """Left-edge x of spine blocks 1..k."""
        xs = []
        reach = 0
        for d in reversed(self.displacements):
            reach += d
            xs.append(reach - 1)
        return xs[::-1]

    def to_stack(self, name: str = "") -> Stack:
        """Spine blocks with each weight at its block's left edge."""
        xs = self.positions()
        k = self.k
        blocks = [Block(x, k - 1 - i) for i, x in enumerate(xs)]
        weights = [PointWeight(i, xs[i], w) for i, w in enumerate(self.weights) if w > 0]
        return Stack(blocks, weights, name or f"spinal-{float(self.total_weight):g}")


@dataclass(frozen=True)
class SpinalOptimum:
    design: SpinalDesign
    value: float
    k_star: int


def balance_displacements(weights: Sequence) -> SpinalDesign:
    """Loads and balancing displacements for the given point weights (top first)."""
    if not weights:
        raise ValueError("a spine needs at least one block")
    if any(w < 0 for w in weights):
        raise ValueError("point weights must be non-negative")
    exact = all(isinstance(w, (int, Fraction)) for w in weights)
    half = Fraction(1, 2) if exact else 0.5
    loads = [0]
    disp = []
    for w in weights:
        loads.append(loads[-1] + w + 1)
        disp.append((w + half) / loads[-1])
    return SpinalDesign(tuple(weights), tuple(loads), tuple(disp))


def _from_loads(loads: Sequence[float]) -> SpinalDesign:
    weights = [max(0.0, loads[i] - loads[i - 1] - 1) for i in range(1, len(loads))]
    return balance_displacements(weights)


def _forward(start: float, j: int, p: int, cap: float) -> list:
    """Loads t_0..t_j with t_i = i below ``p``, t_p = start and the optimality
    recurrence above.  Stops early (last entry inf) once a load passes ``cap``."""
    t = [float(i) for i in range(p)] + [start]
    while len(t) <= j:
        i = len(t) - 1
        nxt = t[i] * t[i] / (t[i - 1] + 0.5)
        if nxt > cap:
            return t + [math.inf] * (j + 1 - len(t))
        t.append(nxt)
    return t


def _shoot(target: float, j: int, p: int) -> Optional[list]:
    """Loads with t_j == target whose first ``p - 1`` weights are zero, or None
    if no such loads keep every weight non-negative."""
    if j < p:
        return [float(i) for i in range(j + 1)] if abs(target - j) < SHOOT_TOL else None
    lo = float(p)  # w_p = 0
    cap = 4 * target + 4
    if _forward(lo, j, p, cap)[j] > target:
        return None
    hi = max(lo + 1.0, target)
    while _forward(hi, j, p, cap)[j] < target:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _forward(mid, j, p, cap)[j] < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    t = _forward(hi, j, p, cap)
    if abs(t[j] - target) > SHOOT_TOL * max(1.0, target):
        t = _forward(lo, j, p, cap)
    if abs(t[j] - target) > SHOOT_TOL * max(1.0, target):
        return None
    t[j] = target
    if any(t[i] - t[i - 1] < 1 - 1e-9 for i in range(1, j + 1)):
        return None
    return t


def _check_weight(w, k: int = 1):
    if w < k:
        raise ValueError(f"total weight {w} cannot pay for {k} unit blocks")


def optimize_fixed_k(w: float, k: int, no_top_weight: bool = False) -> SpinalOptimum:
    """Best spine of ``k`` blocks and total weight ``w`` (the value S*_k(w)).

    Every split index j is tried: loads follow the optimality recurrence up to
    block j and the blocks below carry no weight.  ``no_top_weight`` forbids a
    point weight on the highest block.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    _check_weight(w, k)
    p = 2 if no_top_weight else 1
    best = None
    for j in range(1, k + 1):
        t = _shoot(float(w) - (k - j), j, p)
        if t is None:
            continue
        t = t + [t[-1] + i for i in range(1, k - j + 1)]
        design = _from_loads(t)
        if best is None or design.overhang > best.overhang + 1e-15:
            best = design
    if best is None:
        raise ValueError(f"no spine of {k} blocks has total weight {w}")
    return SpinalOptimum(best, best.overhang, k)


def optimize(w: float, no_top_weight: bool = False, k_max: Optional[int] = None) -> SpinalOptimum:
    """S*(w): the best spine over all lengths.

    Lengths are scanned upward with every block weighted; once the weights
    cannot all stay positive no longer spine is tried.  Ties go to the
    shorter spine.
    """
    _check_weight(w)
    p = 2 if no_top_weight else 1
    limit = int(math.floor(w + 1e-12)) if k_max is None else min(k_max, int(w))
    best = None
    k_best = 0
    misses = 0
    for k in range(1, limit + 1):
        t = _shoot(float(w), k, p)
        if t is None:
            if best is not None:
                misses += 1
                if misses > 2:
                    break
            continue
        misses = 0
        design = _from_loads(t)
        if best is None or design.overhang > best.overhang + 1e-15:
            best, k_best = design, k
    if best is None:
        return optimize_fixed_k(w, 1, no_top_weight)
    return SpinalOptimum(best, best.overhang, k_best)


def sqrt_construction(w: float) -> SpinalDesign:
    """Spine of floor(sqrt(w)) blocks with w_i = 2(i - 1), so that t_i = i^2."""
    _check_weight(w)
    k = math.isqrt(int(math.floor(w)))
    return balance_displacements([2 * i for i in range(k)])


def log_bounds(w: float) -> tuple:
    """``(ln w - 1.313, ln w + 1)``, which bracket S*(w)."""
    _check_weight(w)
    return math.log(w) - LOWER_SLACK, math.log(w) + 1


def diamond_column_deficit(m: int) -> int:
    """Blocks missing from an m-diamond for its spine to balance.

    Every spine block of a diamond sticks out by 1/2, which forces
    t_i = 2 t_{i-1} + 1, so the spine must carry at least 2^m - 1 units.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    return max(0, 2**m - m * m - 1)
