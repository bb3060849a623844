"""Geometry of 2-D block stacks.

Blocks have unit length and sit on integer levels; a block at ``(x, level)``
occupies ``[x, x + 1]`` horizontally. The table fills ``x <= 0`` below level 0,
so its edge is at ``x = 0``. Coordinates may be floats or :class:`Fraction`;
the exact balance check needs the latter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, float, Fraction]

TABLE = -1
"""Index used for the table in :class:`Contact.lower`."""

RENDER_HEIGHT = 1
"""Nominal block height. Only the renderer uses it."""


class InvalidGeometryError(ValueError):
    """Raised when blocks overlap or a block has nothing to rest on."""


@dataclass(frozen=True)
class Block:
    x: Number
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise InvalidGeometryError(f"negative level {self.level}")


@dataclass(frozen=True)
class PointWeight:
    """An external downward force on the upper edge of a block."""

    block: int
    position: Number
    magnitude: Number


@dataclass(frozen=True)
class Contact:
    """Block ``upper`` rests on ``lower`` (a block index or :data:`TABLE`)
    over the interval ``[a, b]``."""

    upper: int
    lower: int
    a: Number
    b: Number

    @property
    def on_table(self) -> bool:
        return self.lower == TABLE


@dataclass(frozen=True)
class SupportPartition:
    principal: int
    support: frozenset
    balancing: frozenset


@dataclass(frozen=True)
class Stack:
    blocks: tuple = ()
    weights: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "weights", tuple(self.weights))

    def __len__(self):
        return len(self.blocks)

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def total_weight(self) -> Number:
        return self.n + sum(w.magnitude for w in self.weights)

    @property
    def is_loaded(self) -> bool:
        return bool(self.weights)

    @property
    def height(self) -> int:
        return 1 + max(b.level for b in self.blocks) if self.blocks else 0

    def levels(self) -> dict:
        """Map level -> block indices sorted left to right."""
        rows: dict = {}
        for i, b in enumerate(self.blocks):
            rows.setdefault(b.level, []).append(i)
        for row in rows.values():
            row.sort(key=lambda i: self.blocks[i].x)
        return dict(sorted(rows.items()))

    def with_weights(self, weights: Iterable[PointWeight]) -> "Stack":
        return Stack(self.blocks, tuple(self.weights) + tuple(weights), self.name)

    def without_weights(self) -> "Stack":
        return Stack(self.blocks, (), self.name)

    def translated(self, dx: Number) -> "Stack":
        blocks = [Block(b.x + dx, b.level) for b in self.blocks]
        weights = [PointWeight(w.block, w.position + dx, w.magnitude) for w in self.weights]
        return Stack(blocks, weights, self.name)

    def extended(self, blocks: Iterable[Block]) -> "Stack":
        return Stack(tuple(self.blocks) + tuple(blocks), self.weights, self.name)

    def subset(self, indices: Sequence[int]) -> "Stack":
        """The stack formed by the given blocks; weights on dropped blocks are discarded."""
        remap = {old: new for new, old in enumerate(indices)}
        blocks = [self.blocks[i] for i in indices]
        weights = [
            PointWeight(remap[w.block], w.position, w.magnitude)
            for w in self.weights
            if w.block in remap
        ]
        return Stack(blocks, weights, self.name)


def validate(stack: Stack) -> None:
    """Check the geometric invariants, raising :class:`InvalidGeometryError`."""
    for level, row in stack.levels().items():
        for left, right in zip(row, row[1:]):
            if stack.blocks[right].x - stack.blocks[left].x < 1:
                raise InvalidGeometryError(
                    f"blocks {left} and {right} overlap on level {level}"
                )
    for w in stack.weights:
        if not 0 <= w.block < stack.n:
            raise InvalidGeometryError(f"point weight on unknown block {w.block}")
        if w.magnitude <= 0:
            raise InvalidGeometryError(f"point weight magnitude {w.magnitude} is not positive")
        x = stack.blocks[w.block].x
        if not x <= w.position <= x + 1:
            raise InvalidGeometryError(
                f"point weight at {w.position} lies outside block {w.block}"
            )


def contacts(stack: Stack) -> list:
    """All rest-on relations, upper block first, ordered by upper block then by x.

    Blocks at horizontal distance exactly 1 touch at a single point and do not
    count as resting on each other.
    """
    validate(stack)
    rows = stack.levels()
    out = []
    for i, blk in enumerate(stack.blocks):
        if blk.level == 0:
            if blk.x < 0:
                out.append(Contact(i, TABLE, blk.x, min(blk.x + 1, 0)))
            continue
        for j in rows.get(blk.level - 1, ()):
            other = stack.blocks[j]
            if abs(blk.x - other.x) < 1:
                out.append(Contact(i, j, max(blk.x, other.x), min(blk.x, other.x) + 1))
    return out


def check_supported(stack: Stack) -> None:
    """Raise if some block rests on nothing (neither the table nor a block)."""
    resting = {c.upper for c in contacts(stack)}
    for i in range(stack.n):
        if i not in resting:
            raise InvalidGeometryError(f"block {i} rests on nothing")


def overhang(stack: Stack) -> Number:
    if not stack.blocks:
        raise ValueError("overhang of an empty stack")
    return 1 + max(b.x for b in stack.blocks)


def support_partition(stack: Stack) -> SupportPartition:
    if not stack.blocks:
        raise ValueError("empty stack has no principal block")
    top_x = max(b.x for b in stack.blocks)
    principal = min(
        (i for i, b in enumerate(stack.blocks) if b.x == top_x),
        key=lambda i: (stack.blocks[i].level, i),
    )
    below: dict = {}
    for c in contacts(stack):
        if not c.on_table:
            below.setdefault(c.upper, []).append(c.lower)
    support = {principal}
    todo = [principal]
    while todo:
        for j in below.get(todo.pop(), ()):
            if j not in support:
                support.add(j)
                todo.append(j)
    balancing = frozenset(range(stack.n)) - support
    return SupportPartition(principal, frozenset(support), balancing)


def is_spinal(stack: Stack) -> bool:
    part = support_partition(stack)
    levels = [stack.blocks[i].level for i in part.support]
    return len(levels) == len(set(levels))


# -- named families ---------------------------------------------------------


def harmonic_overhang(n: int) -> Fraction:
    return sum((Fraction(1, 2 * i) for i in range(1, n + 1)), Fraction(0))


def make_harmonic(n: int) -> Stack:
    """Classic one-on-one stack; the i-th block from the top sticks out 1/(2i)."""
    if n < 1:
        raise ValueError("harmonic stack needs n >= 1")
    blocks = []
    reach = Fraction(0)  # right edge of the block, measured from the table edge
    for i in range(n, 0, -1):
        reach += Fraction(1, 2 * i)
        blocks.append(Block(reach - 1, n - i))
    blocks.reverse()
    return Stack(blocks, name=f"harmonic-{n}")


def centered_row(width: int, level: int, center: Number = 0) -> list:
    """``width`` contiguous blocks symmetric about ``center``."""
    left = center - Fraction(width, 2)
    return [Block(left + k, level) for k in range(width)]


def rows_stack(widths: Sequence[int], name: str = "") -> Stack:
    blocks = []
    for level, width in enumerate(widths):
        blocks.extend(centered_row(width, level))
    return Stack(blocks, name=name)


def make_inverted_triangle(m: int) -> Stack:
    """Rows of 1, 2, ..., m blocks, bottom up, all centred on the table edge."""
    if m < 1:
        raise ValueError("inverted triangle needs m >= 1")
    return rows_stack(range(1, m + 1), name=f"inverted-triangle-{m}")


def make_diamond(m: int) -> Stack:
    """Rows of 1, 2, ..., m, ..., 2, 1 blocks centred on the table edge."""
    if m < 1:
        raise ValueError("diamond needs m >= 1")
    widths = list(range(1, m + 1)) + list(range(m - 1, 0, -1))
    return rows_stack(widths, name=f"diamond-{m}")
