"""Parabolic stacks built from slabs.

An r-row is r contiguous blocks centred on x = 0.  An r-slab alternates
r-rows and (r-1)-rows, 2r - 3 rows in all, starting and ending with an r-row.
A parabolic d-stack is a d-slab on a (d-1)-slab on ... on a 2-slab on one
block; its top row reaches x = d/2.

All coordinates are multiples of 1/2, so everything here is kept in
:class:`Fraction` and balance is certified exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import Block, Stack, centered_row

HALF = Fraction(1, 2)


def block_count(d: int) -> int:
    return d * (d - 1) * (2 * d - 1) // 3 + 1


@dataclass(frozen=True)
class Slab:
    r: int
    rows: tuple  # row widths, bottom first
    base_level: int = 0

    @property
    def n_blocks(self) -> int:
        return sum(self.rows)

    def blocks(self) -> list:
        out = []
        for i, width in enumerate(self.rows):
            out.extend(centered_row(width, self.base_level + i))
        return out

    def to_stack(self) -> Stack:
        return Stack(self.blocks(), name=f"slab-{self.r}")


@dataclass(frozen=True)
class SlabForceSchedule:
    r: int
    g: Fraction  # force unit on the slab's top row
    g_prime: Fraction  # force unit on its bottom row


@dataclass(frozen=True)
class ParabolicStack:
    d: int
    stack: Stack
    schedule: tuple


def build_slab(r: int, base_level: int = 0) -> Slab:
    if r < 2:
        raise ValueError("slabs start at r = 2")
    rows = tuple(r if i % 2 == 0 else r - 1 for i in range(2 * r - 3))
    return Slab(r, rows, base_level)


def slab_base(r: int) -> int:
    """Level of the lowest row of the r-slab inside a parabolic stack."""
    return 1 + (r - 2) ** 2


def build_parabolic(d: int) -> ParabolicStack:
    if d < 2:
        raise ValueError("parabolic stacks need d >= 2")
    blocks = [Block(-HALF, 0)]
    for r in range(2, d + 1):
        blocks.extend(build_slab(r, slab_base(r)).blocks())
    stack = Stack(blocks, name=f"parabolic-{d}")
    return ParabolicStack(d, stack, tuple(force_schedule(d)))


def force_schedule(d: int) -> list:
    """Edge force g(r) on each slab's top row, top slab first.

    g(d) = 0 and each lower slab gets g(r-1) = r/(r-1) g(r) + r - 1.
    """
    if d < 2:
        raise ValueError("parabolic stacks need d >= 2")
    out = []
    g = Fraction(0)
    for r in range(d, 1, -1):
        g_prime = Fraction(r, r - 1) * g + (r - 1)
        out.append(SlabForceSchedule(r, g, g_prime))
        g = g_prime
    return out


def g_closed_form(d: int, r: int) -> Fraction:
    return Fraction(sum(i * i for i in range(r, d)), r)


def with_extra_blocks(n: int) -> Stack:
    """Largest parabolic stack affordable with ``n`` blocks, leftovers piled
    in the centre on top."""
    if n < 1:
        raise ValueError("need at least one block")
    if n < block_count(2):
        return Stack([Block(-HALF, level) for level in range(n)], name=f"pile-{n}")
    d = 2
    while block_count(d + 1) <= n:
        d += 1
    base = build_parabolic(d).stack
    top = base.height
    pile = [Block(-HALF, top + i) for i in range(n - base.n)]
    return base.extended(pile)


# -- the slab force construction ---------------------------------------------------


def slab_forces(r: int, g) -> list:
    """Vertical forces across every interface of an r-slab.

    Entry i maps x -> force pressing down across the interface under row i;
    the last entry is the load on the top row.  Interface 0 holds the
    supports under the bottom row.  The top row gets g, 2g, ..., 2g, g at its
    block edges and the result has g', 2g', ..., 2g', g' at the bottom row's
    block centres.
    """
    g = Fraction(g)
    if r == 2:
        return [
            {-HALF: 2 * g + 1, HALF: 2 * g + 1},
            {Fraction(-1): g, Fraction(0): 2 * g, Fraction(1): g},
        ]
    s = r - 1  # the (r-1)-slab sitting inside
    f = g / s
    inner = slab_forces(s, (s - 1) * f)
    n_rows = 2 * r - 3
    ifaces = [dict() for _ in range(n_rows + 1)]
    edge = Fraction(s, 2)
    # the top r-row rests on s + 1 equal forces
    ifaces[n_rows] = {Fraction(-r, 2) + m: (g if m in (0, r) else 2 * g) for m in range(r + 1)}
    ifaces[n_rows - 1] = {-edge + m: 2 * s * f + 1 for m in range(s + 1)}
    # the rest of the top-row support runs straight down through the inner slab
    straight = {-edge + m: 2 * f + 1 for m in range(1, s)}
    inner_rows = 2 * s - 3
    for k in range(inner_rows):
        merged = dict(inner[k])
        # extended rows sit at odd inner positions; count those at or above k
        extra = sum(1 for q in range(k, inner_rows) if q % 2 == 1)
        for p, v in straight.items():
            merged[p] = merged.get(p, 0) + v
        for p in (-edge, edge):
            merged[p] = merged.get(p, 0) + (s + 1) * f + 1 + extra
        ifaces[k + 1] = merged
    g_prime = Fraction(r, r - 1) * g + (r - 1)
    ifaces[0] = {Fraction(-s, 2) + m: (g_prime if m in (0, s) else 2 * g_prime) for m in range(s + 1)}
    return ifaces


def _row_balanced(width: int, below: dict, above: dict) -> bool:
    """Each block of a centred row in equilibrium under the given point forces.

    Forces at a block centre belong to that block.  At a joint the net share
    of each neighbour follows from the moment equation, sweeping left to
    right, and must be realisable by non-negative contact forces.
    """
    left = -Fraction(width, 2)
    right = left + width
    points = set(below) | set(above)
    for p in points:
        if not left <= p <= right or (2 * (p - left)) % 1 != 0:
            return False
    if any(v < 0 for v in list(below.values()) + list(above.values())):
        return False
    net = lambda p: below.get(p, 0) - above.get(p, 0)
    carried = net(left)  # share of the left end owned by block 0
    for j in range(width):
        c = left + j + HALF
        # moment about the centre: right share equals left share
        share = carried
        if carried + net(c) + share != 1:
            return False
        p = c + HALF
        if j == width - 1:
            return share == net(p)
        rest = net(p) - share
        for part in (share, rest):
            if not -above.get(p, 0) <= part <= below.get(p, 0):
                return False
        carried = rest
    return True


def verify_slab_balance(slab: Slab, g) -> bool:
    """Check the slab's equilibrium under the explicit force construction."""
    if g < 0:
        raise ValueError("g must be non-negative")
    ifaces = slab_forces(slab.r, g)
    return all(
        _row_balanced(width, ifaces[i], ifaces[i + 1]) for i, width in enumerate(slab.rows)
    )


def verify_parabolic(d: int) -> bool:
    """Chain the slab construction through a whole d-stack down to the table."""
    for sched in force_schedule(d):
        if not verify_slab_balance(build_slab(sched.r), sched.g):
            return False
    # the 2-slab rests on the bottom block at x = -1/2 and 1/2 with equal
    # forces, so the block's load acts at its centre, right over the table edge
    return True


# -- incremental construction ------------------------------------------------------


def build_modified_parabolic(d: int) -> tuple:
    """The d-stack without its lowest block, shifted half a block left, and
    an order for laying its blocks one at a time."""
    if d < 2:
        raise ValueError("parabolic stacks need d >= 2")
    full = build_parabolic(d).stack
    rows = full.levels()
    blocks = []
    order = []
    for level, row in rows.items():
        if level == 0:
            continue
        start = len(blocks)
        for i in row:
            b = full.blocks[i]
            blocks.append(Block(b.x - HALF, level - 1))
        width = len(row)
        mid = (width - 1) // 2  # left of centre for even rows
        seq = [mid]
        lo, hi = mid - 1, mid + 1
        if width % 2 == 0:
            seq.append(hi)
            hi += 1
        while lo >= 0 or hi < width:
            if lo >= 0:
                seq.append(lo)
                lo -= 1
            if hi < width:
                seq.append(hi)
                hi += 1
        order.extend(start + j for j in seq)
    return Stack(blocks, name=f"modified-parabolic-{d}"), order


def laying_prefix(stack: Stack, order, m: int) -> Stack:
    return stack.subset(sorted(order[:m]))


def theorem_d(n: int) -> Optional[int]:
    """Depth of the largest parabolic stack with at most ``n`` blocks."""
    if n < block_count(2):
        return None
    d = 2
    while block_count(d + 1) <= n:
        d += 1
    return d
