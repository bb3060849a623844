"""Exhaustive search over combinatorial stack structures.

A structure records, level by level and left to right, which blocks of the
level below each block rests on.  A unit block overlaps at most two
neighbouring blocks below it, so every entry is a run ``(lo, hi)`` of one or
two consecutive lower blocks; level-0 blocks rest on the table.  Mirror
images are different structures because overhang is measured to the right.

For a fixed structure the best placement is a non-convex problem in the block
positions, contact forces and contact force positions.  It is solved by
multi-start SLSQP.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy import optimize

from ..balance import is_balanced
from ..model import TABLE, Block, Stack, overhang

log = logging.getLogger(__name__)

MAX_BLOCKS = 7


class StructureInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class CombinatorialStructure:
    levels: tuple  # levels[0] = number of table blocks; levels[k] = ((lo, hi), ...) for k >= 1

    @property
    def n(self) -> int:
        return self.levels[0] + sum(len(lv) for lv in self.levels[1:])

    def level_sizes(self) -> list:
        return [self.levels[0]] + [len(lv) for lv in self.levels[1:]]

    def block_ids(self) -> list:
        """Block index for each (level, position)."""
        ids, k = [], 0
        for size in self.level_sizes():
            ids.append(list(range(k, k + size)))
            k += size
        return ids

    def rests_on(self) -> dict:
        """Block index -> list of supporting block indices (TABLE for level 0)."""
        ids = self.block_ids()
        out = {}
        for i in ids[0]:
            out[i] = [TABLE]
        for lv in range(1, len(self.levels)):
            for pos, (lo, hi) in enumerate(self.levels[lv]):
                out[ids[lv][pos]] = [ids[lv - 1][j] for j in range(lo, hi + 1)]
        return out

    def supports(self) -> dict:
        """Block index -> blocks resting on it, left to right."""
        out = {i: [] for i in range(self.n)}
        for u, lows in self.rests_on().items():
            for low in lows:
                if low != TABLE:
                    out[low].append(u)
        return out


def _valid_runs(runs: tuple) -> bool:
    for (plo, phi), (lo, hi) in zip(runs, runs[1:]):
        if lo < phi:
            return False
        if (lo, hi) == (plo, phi) and lo != hi:
            return False
        if hi < phi:
            return False
    load = {}
    for lo, hi in runs:
        for j in range(lo, hi + 1):
            load[j] = load.get(j, 0) + 1
    return all(v <= 2 for v in load.values())


def _compositions(n: int) -> Iterator[tuple]:
    for cuts in itertools.product((0, 1), repeat=n - 1):
        sizes, run = [], 1
        for c in cuts:
            if c:
                sizes.append(run)
                run = 1
            else:
                run += 1
        sizes.append(run)
        yield tuple(sizes)


def enumerate_structures(n: int) -> Iterator[CombinatorialStructure]:
    """Every structure with ``n`` blocks, each exactly once."""
    if n < 1:
        raise ValueError("need at least one block")
    if n > MAX_BLOCKS:
        raise ValueError(f"exhaustive enumeration is limited to {MAX_BLOCKS} blocks")
    for sizes in _compositions(n):
        per_level = []
        for below, count in zip(sizes, sizes[1:]):
            runs = [(i, i) for i in range(below)] + [(i, i + 1) for i in range(below - 1)]
            runs.sort()
            options = [c for c in itertools.combinations_with_replacement(runs, count) if _valid_runs(c)]
            per_level.append(options)
        for choice in itertools.product(*per_level):
            yield CombinatorialStructure((sizes[0],) + tuple(choice))


# -- per-structure optimisation ----------------------------------------------


class _Layout:
    """Variable layout: block x, then per contact (force, position)."""

    def __init__(self, s: CombinatorialStructure):
        self.s = s
        self.n = s.n
        self.rests = s.rests_on()
        self.contacts = [(u, low) for u in range(self.n) for low in self.rests[u]]
        self.nv = self.n + 2 * len(self.contacts)
        ids = s.block_ids()
        self.level_of = {}
        for lv, row in enumerate(ids):
            for i in row:
                self.level_of[i] = lv
        self.rows = ids

    def split(self, v):
        x = v[: self.n]
        f = v[self.n :: 2][: len(self.contacts)]
        p = v[self.n + 1 :: 2][: len(self.contacts)]
        return x, f, p

    def equalities(self, v):
        x, f, p = self.split(v)
        force = [-1.0] * self.n
        moment = [-(x[i] + 0.5) for i in range(self.n)]
        for c, (u, low) in enumerate(self.contacts):
            force[u] += f[c]
            moment[u] += f[c] * p[c]
            if low != TABLE:
                force[low] -= f[c]
                moment[low] -= f[c] * p[c]
        return np.array(force + moment)

    def inequalities(self, v):
        """All entries must be >= 0."""
        x, f, p = self.split(v)
        out = []
        for c, (u, low) in enumerate(self.contacts):
            out.append(f[c])
            out += [p[c] - x[u], x[u] + 1 - p[c]]
            if low == TABLE:
                out.append(-p[c])
            else:
                out += [p[c] - x[low], x[low] + 1 - p[c]]
        for row in self.rows:
            for a, b in zip(row, row[1:]):
                out.append(x[b] - x[a] - 1)
        # no contact with lower blocks outside the recorded run
        for lv in range(1, len(self.rows)):
            lower = self.rows[lv - 1]
            for u in self.rows[lv]:
                lows = self.rests[u]
                first = lower.index(lows[0])
                last = lower.index(lows[-1])
                if first > 0:
                    out.append(x[u] - x[lower[first - 1]] - 1)
                if last < len(lower) - 1:
                    out.append(x[lower[last + 1]] - x[u] - 1)
        return np.array(out)

    def start(self, rng) -> np.ndarray:
        """A rough feasible-looking placement: levels centred near the edge."""
        x = np.zeros(self.n)
        for lv, row in enumerate(self.rows):
            if lv == 0:
                for k, i in enumerate(row):
                    x[i] = -len(row) + k + 0.0
            else:
                for i in row:
                    lows = self.rests[i]
                    x[i] = np.mean([x[j] for j in lows]) + (0.5 if len(lows) == 2 else 0.0)
                for a, b in zip(row, row[1:]):
                    if x[b] < x[a] + 1:
                        x[b] = x[a] + 1
        x = x + rng.uniform(-0.25, 0.25, self.n)
        v = np.zeros(self.nv)
        v[: self.n] = x
        for c, (u, low) in enumerate(self.contacts):
            lo = max(x[u], x[low]) if low != TABLE else x[u]
            hi = min(x[u], x[low]) + 1 if low != TABLE else min(x[u] + 1, 0.0)
            v[self.n + 2 * c] = 1.0
            v[self.n + 2 * c + 1] = 0.5 * (lo + hi)
        return v


def _realise(layout: _Layout, x) -> Stack:
    blocks = [Block(float(x[i]), layout.level_of[i]) for i in range(layout.n)]
    return Stack(blocks)


def optimize_structure(
    s: CombinatorialStructure,
    starts: int = 20,
    seed: int = 0,
    tol: float = 1e-7,
) -> tuple:
    """Best overhang found for ``s`` and the stack achieving it.

    Each start maximises the x of one candidate principal block (the rightmost
    block of some level).  Only placements whose stack passes the float
    balance check at ``tol`` are kept.
    """
    layout = _Layout(s)
    rng = np.random.default_rng(seed)
    candidates = [row[-1] for row in layout.rows]
    best_val, best_stack = None, None
    cons = [
        {"type": "eq", "fun": layout.equalities},
        {"type": "ineq", "fun": layout.inequalities},
    ]
    for k in range(starts):
        target = candidates[k % len(candidates)]
        v0 = layout.start(rng)
        obj = lambda v, t=target: -v[t]
        res = optimize.minimize(
            obj, v0, method="SLSQP", constraints=cons, options={"maxiter": 500, "ftol": 1e-12}
        )
        if not np.all(np.isfinite(res.x)):
            continue
        if np.max(np.abs(layout.equalities(res.x))) > 1e-7 or np.min(layout.inequalities(res.x)) < -1e-7:
            continue
        stack = _tidy(layout, res.x, tol)
        if stack is None:
            continue
        val = float(overhang(stack))
        if best_val is None or val > best_val + 1e-12:
            best_val, best_stack = val, stack
    if best_stack is None:
        raise StructureInfeasible(f"no balanced placement found for {s.levels}")
    return best_val, best_stack


def _tidy(layout: _Layout, v, tol: float) -> Optional[Stack]:
    """Snap the optimiser's positions into a valid stack that balances.

    Same-level neighbours that the solver left a hair closer than one block
    apart are pushed out to exactly one.
    """
    x = np.array(v[: layout.n], dtype=float)
    for row in layout.rows:
        for a, b in zip(row, row[1:]):
            if x[b] - x[a] < 1:
                x[b] = x[a] + 1
    try:
        stack = _realise(layout, x)
        if is_balanced(stack, tol=tol).balanced:
            return stack
    except ValueError:
        return None
    return None


def exhaustive_D(n: int, starts: int = 20, seed: int = 0) -> tuple:
    """Largest overhang over all ``n``-block structures, with the stack."""
    best_val, best_stack = None, None
    for s in enumerate_structures(n):
        try:
            val, stack = optimize_structure(s, starts=starts, seed=seed)
        except StructureInfeasible:
            continue
        if best_val is None or val > best_val + 1e-12:
            best_val, best_stack = val, stack
            log.debug("n=%d new best %.9f from %s", n, val, s.levels)
    return best_val, best_stack
