"""Turning loaded spinal stacks into standard stacks.

Spine block B_i (numbered from the top, B_k on the table) needs a downward
force w_i at its left edge x_i.  A shield block B'_i sits on B_{i+1} beside
B_i, with left edge y_i, and delivers w_{i+1} at x_{i+1}.  It rests partly on
the shield below, passing it u_{i+1} at z_{i+1}, and receives u_i at z_i from
the shield above plus an optional external force v_i at y_i.  Each shield is
in equilibrium when

    u_i + v_i + 1 = u_{i+1} + w_{i+1}
    z_i u_i + y_i v_i + y_i + 1/2 = z_{i+1} u_{i+1} + x_{i+1} w_{i+1}.

Shields are placed bottom-up.  Whenever z_{i+1} drifts to within a unit of
x_{i+1}, an integral external force v_{i+1} is split off and later realised as
a tower of v_{i+1} blocks.  The few top layers left over are completed by a
search over small assemblies, each checked by the balance linear program.

Everything runs in exact rational arithmetic on a spine whose loads are first
rounded to a few decimal digits, so that the final stack can be certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .balance import is_balanced
from .model import Block, InvalidGeometryError, Stack, overhang, validate
from .spinal import SpinalDesign, balance_displacements, optimize

HALF = Fraction(1, 2)
LOAD_DIGITS = 9


class ConversionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShieldLayer:
    i: int
    y: Fraction  # left edge of B'_i
    u: Fraction  # force passed to B'_i by the shield above
    z: Fraction  # where that force acts
    v: int = 0  # external force at y


@dataclass
class ShieldPlacement:
    design: SpinalDesign
    layers: list  # bottom layer (i = k - 1) first
    stopped_at: Optional[int] = None  # layer index the heuristic could not place
    reason: str = ""

    @property
    def complete(self) -> bool:
        return self.stopped_at is None


@dataclass
class ConversionResult:
    stack: Optional[Stack]
    placed_shields: int
    towers: list  # (application x, block count)
    residual_top: str
    success: bool
    layers: list = field(default_factory=list)

    def report(self) -> str:
        lines = [f"success: {self.success}", f"shields placed: {self.placed_shields}"]
        for layer in self.layers:
            lines.append(
                f"  layer {layer.i}: y={float(layer.y):.10g} z={float(layer.z):.10g} "
                f"u={float(layer.u):.10g} v={layer.v}"
            )
        for pos, count in self.towers:
            lines.append(f"tower of {count} at x={float(pos):.10g}")
        lines.append(f"top: {self.residual_top}")
        return "\n".join(lines)


def rational_design(design: SpinalDesign, digits: int = LOAD_DIGITS) -> SpinalDesign:
    """The same spine with loads rounded to ``digits`` decimals, in Fractions.

    Displacements are recomputed exactly, so the result balances exactly and
    its overhang moves by about 10^-digits.
    """
    scale = 10**digits
    loads = [Fraction(round(Fraction(t) * scale), scale) for t in design.loads]
    weights = [loads[i] - loads[i - 1] - 1 for i in range(1, len(loads))]
    weights = [max(Fraction(0), w) for w in weights]
    return balance_displacements(weights)


def place_shields(design: SpinalDesign, trim: int = 0) -> ShieldPlacement:
    """Run the bottom-up shield heuristic on an exact spine.

    Layers run from i = k - 1 down to 0.  B'_0 rests on the top spine block
    with nothing beside it, so its left edge may go as far right as x_1.
    ``trim`` blocks are held back from the first external force, leaving
    them for the top assembly.
    """
    k = design.k
    w = [None] + [Fraction(v) for v in design.weights]
    x = [None] + [Fraction(v) for v in design.positions()]
    right_limit = [x[1]] + [x[i] - 1 for i in range(1, k + 1)]  # bound on y_i
    layers = {}
    for i in range(k - 1, -1, -1):
        if i + 1 <= k - 1:
            below = layers[i + 1]
            if below.z <= x[i + 1] - 1:
                below = _split_external(below, trim)
                trim = 0
                layers[i + 1] = below
                if below.z <= x[i + 1] - 1:
                    why = f"B'_{i + 1} cannot pass its load to the spine block beneath"
                    return ShieldPlacement(design, _ordered(layers), i, why)
            u_up, z_up = below.u, below.z
        else:
            u_up, z_up = Fraction(0), Fraction(0)
        y = right_limit[i]
        if i + 1 <= k - 1 and z_up < y:
            y = z_up
        u = u_up + w[i + 1] - 1
        if u < 0:
            why = (
                f"point-weight deficit at B'_{i}: it must weigh one block but only "
                f"{float(u_up + w[i + 1]):.10g} is available"
            )
            return ShieldPlacement(design, _ordered(layers), i, why)
        moment = z_up * u_up + x[i + 1] * w[i + 1] - (y + HALF)
        z = moment / u if u else y + HALF
        if u and not y <= z <= y + 1:
            why = f"the load on B'_{i} falls outside the block"
            return ShieldPlacement(design, _ordered(layers), i, why)
        layers[i] = ShieldLayer(i, y, u, z, 0)
    return ShieldPlacement(design, _ordered(layers), None)


def _split_external(layer: ShieldLayer, trim: int = 0) -> ShieldLayer:
    total = layer.u + layer.v
    v = math.floor((1 - layer.z + layer.y) * layer.u) - trim
    if v <= 0:
        return layer
    moment = layer.z * layer.u + layer.y * layer.v
    u = total - layer.v - v
    z = (moment - layer.y * v) / u if u else layer.y
    return ShieldLayer(layer.i, layer.y, u, z, layer.v + v)


def _ordered(layers: dict) -> list:
    return [layers[i] for i in sorted(layers, reverse=True)]


def shield_residuals(design: SpinalDesign, layers: list) -> list:
    """Force and moment residuals of both balance conditions at every layer."""
    w = [None] + list(design.weights)
    x = [None] + list(design.positions())
    by_index = {layer.i: layer for layer in layers}
    out = []
    for layer in layers:
        i = layer.i
        below = by_index.get(i + 1)
        u_up = below.u if below else 0
        z_up = below.z if below else 0
        f = layer.u + layer.v + 1 - u_up - w[i + 1]
        m = layer.z * layer.u + layer.y * layer.v + layer.y + HALF - z_up * u_up - x[i + 1] * w[i + 1]
        out.append((f, m))
    return out


def realize_towers(layers: list) -> list:
    """``(position, count)`` for each shield that needs an external force:
    a tower of ``v`` blocks whose weight acts at the shield's left edge."""
    towers = []
    for layer in layers:
        if layer.v:
            if layer.v != int(layer.v) or layer.v < 0:
                raise ConversionError(f"external force {layer.v} is not a whole number of blocks")
            towers.append((layer.y, int(layer.v)))
    return towers


def tower_blocks(p, count: int, host: Block, next_left=None) -> list:
    """Blocks of a tower of ``count`` whose weight lands on ``host`` at ``p``.

    A plain column centred on ``p`` is used when it clears the block to the
    right on the level above (left edge ``next_left``).  Shield steps are
    usually narrower than half a block, so otherwise the tower's base block
    is pushed against that neighbour and the column above it is set off so
    that base and column together still act at ``p``.
    """
    p = Fraction(p)
    level = host.level + 1
    if count <= 0:
        return []
    if not host.x <= p <= host.x + 1:
        raise ConversionError(f"tower position {float(p)} is off its host block")
    if next_left is None or p + HALF <= next_left:
        return [Block(p - HALF, level + j) for j in range(count)]
    base = Fraction(next_left) - 1
    if count == 1 or next_left <= p:
        raise ConversionError(f"no room for a tower of {count} at x={float(p)}")
    c = (count * p - (base + HALF)) / (count - 1)
    if not base <= c <= base + 1:
        raise ConversionError(f"tower of {count} at x={float(p)} cannot be offset")
    return [Block(base, level)] + [Block(c - HALF, level + 1 + j) for j in range(count - 1)]


def spine_blocks(design: SpinalDesign) -> list:
    """B_1..B_k, B_i on level k - i."""
    k = design.k
    return [Block(x, k - 1 - i) for i, x in enumerate(design.positions())]


def assemble(design: SpinalDesign, layers: list, extra=()) -> tuple:
    """Spine, shields and towers as one standard stack, plus the tower list.

    ``extra`` holds further blocks (the top assembly).  Raises
    :class:`ConversionError` when the geometry does not fit.
    """
    k = design.k
    blocks = spine_blocks(design)
    by_index = {layer.i: layer for layer in layers}
    shield = {i: Block(layer.y, k - i) for i, layer in by_index.items()}
    blocks += [shield[i] for i in sorted(shield, reverse=True)]
    towers = []
    for layer in layers:
        if not layer.v:
            continue
        nxt = shield.get(layer.i - 1)
        blocks += tower_blocks(layer.y, int(layer.v), shield[layer.i], nxt.x if nxt else None)
        towers.append((layer.y, int(layer.v)))
    blocks += list(extra)
    stack = Stack(blocks, name=f"converted-{float(design.total_weight):g}")
    try:
        validate(stack)
    except InvalidGeometryError as exc:
        raise ConversionError(str(exc)) from exc
    return stack, towers


# -- finishing the top -------------------------------------------------------------

TOP_GRID = 8  # candidate positions per top shield
MAX_TOP_LAYERS = 4


def _unsplit(layer: ShieldLayer) -> ShieldLayer:
    if not layer.v:
        return layer
    u = layer.u + layer.v
    return ShieldLayer(layer.i, layer.y, u, (layer.z * layer.u + layer.y * layer.v) / u, 0)


@dataclass
class _Site:
    host: int  # 0: a column on top of B'_0; j >= 1: a tower on B'_j
    lo: Fraction  # where its weight may act
    hi: Fraction
    count: int = 0


def _overlap(a: Block, b: Block):
    lo, hi = max(a.x, b.x), min(a.x, b.x) + 1
    return (lo, hi) if lo < hi else None


def _site_range(ys: dict, j: int, count: int):
    """Interval on B'_j where a tower of ``count`` blocks can act without
    hitting the shields above, or None.  ``ys`` includes B'_j itself."""
    if j == 0:
        return ys[0], ys[0] + 1
    host = ys[j]
    above = [ys[l] for l in range(j)]
    lo, hi = host, min(host + 1, min(above) - HALF)  # plain column
    if count >= 2:
        base = ys[j - 1] - 1
        reach = min(min(above[:-1], default=base + 2) - HALF, base + 1)
        olo = max(host, base + HALF / count)
        ohi = min(ys[j - 1], (base + HALF + (count - 1) * reach) / count)
        if olo <= ohi:
            lo, hi = (min(lo, olo), max(hi, ohi)) if lo <= hi else (olo, ohi)
    return (lo, hi) if lo <= hi else None


def _top_lp(design, kept: ShieldLayer, ys: dict, sites: list, total: int, exact: bool):
    """Small LP for the top blocks alone.

    The fixed part below must receive exactly the loads the spine and the
    kept shield need.  Each site carries a share of the ``total`` extra
    blocks (its ``count`` when that is fixed, any share when ``count`` is
    None) acting anywhere in its interval.  Returns ``(feasible, [(share,
    position)])``.
    """
    from . import lp

    num = Fraction if exact else float
    k, c = design.k, kept.i
    x = [None] + [Fraction(v) for v in design.positions()]
    w = [None] + [Fraction(v) for v in design.weights]
    fixed = {("B", i): Block(x[i], k - i) for i in range(1, c + 1)}
    fixed[("S", c)] = Block(kept.y, k - c)
    demand = {("B", i): (w[i], w[i] * x[i]) for i in range(1, c + 1)}
    demand[("S", c)] = (kept.u, kept.u * kept.z)
    top = {("S", j): Block(ys[j], k - j) for j in range(c)}
    everyone = {**fixed, **top}
    prob = lp.LpProblem()
    load = {key: ({}, {}) for key in everyone}  # downward force and moment on each block

    def push(key, var, pos, sign):
        load[key][0][var] = load[key][0].get(var, 0) + sign
        load[key][1][var] = load[key][1].get(var, 0) + sign * num(pos)

    for ukey, ub in top.items():
        for lkey, lb in everyone.items():
            if lb.level == ub.level - 1:
                ov = _overlap(ub, lb)
                if ov:
                    for pos in ov:
                        v = prob.add_var()
                        push(ukey, v, pos, -1)
                        push(lkey, v, pos, 1)
    ends = []
    for site in sites:
        va, vb = prob.add_var(), prob.add_var()
        push(("S", site.host), va, site.lo, 1)
        push(("S", site.host), vb, site.hi, 1)
        ends.append((va, vb))
        if site.count is not None:
            prob.add_eq({va: 1, vb: 1}, num(site.count))
    prob.add_eq({v: 1 for pair in ends for v in pair}, num(total))
    for key, blk in top.items():
        # support minus load equals the block's own weight
        prob.add_eq({v: -a for v, a in load[key][0].items()}, num(1))
        prob.add_eq({v: -a for v, a in load[key][1].items()}, num(blk.x) + num(HALF))
    for key, (f, m) in demand.items():
        prob.add_eq(load[key][0], num(f))
        prob.add_eq(load[key][1], num(m))
    res = lp.lp_solve(prob, exact=exact)
    if not res.feasible:
        return False, None
    out = []
    for site, (va, vb) in zip(sites, ends):
        share = res.x[va] + res.x[vb]
        pos = (res.x[va] * num(site.lo) + res.x[vb] * num(site.hi)) / share if share else num(site.lo)
        out.append((share, pos))
    return True, out


def _splits(shares: list, total: int) -> list:
    """Whole-block splits of ``total`` near the given shares."""
    options = [sorted({math.floor(v + 1e-9), math.ceil(v - 1e-9)}) for v in shares]
    found = []
    for combo in _product(options):
        if sum(combo) == total and combo not in found:
            found.append(combo)
    for i in sorted(range(len(shares)), key=lambda i: -shares[i]):
        single = tuple(total if j == i else 0 for j in range(len(shares)))
        if single not in found:
            found.append(single)
    return found


def _site_blocks(design, ys: dict, site: _Site, pos) -> list:
    k = design.k
    if site.count == 0:
        return []
    if site.host == 0:
        return [Block(pos - HALF, k + 1 + j) for j in range(site.count)]
    host = Block(ys[site.host], k - site.host)
    return tower_blocks(pos, site.count, host, ys[site.host - 1])


def _candidates(lo, hi, n=TOP_GRID) -> list:
    """Grid on (lo, hi], right end first, plus a point just inside ``lo``
    (tight top assemblies often need a shield pushed as far left as it goes)."""
    return [hi - (hi - lo) * Fraction(t, n) for t in range(n)] + [lo + (hi - lo) / 64]


def _try_top(design, lower, kept, ys, total):
    """A certified stack for one choice of top shield positions, or None."""
    k = design.k
    allys = dict(ys)
    allys[kept.i] = kept.y
    hosts = [0] + list(range(1, kept.i + 1)) if total else [0]
    sites = []
    for j in hosts:
        span = _site_range(allys, j, total)
        if span is not None:
            sites.append(_Site(j, span[0], span[1], None))
    ok, shares = _top_lp(design, kept, ys, sites, total, exact=False)
    if not ok:
        return None
    for split in _splits([float(sh) for sh, _ in shares], total):
        chosen = []
        for site, count in zip(sites, split):
            if count:
                span = _site_range(allys, site.host, count)
                if span is None:
                    break
                chosen.append(_Site(site.host, span[0], span[1], count))
        else:
            if not chosen:
                chosen = [_Site(0, allys[0], allys[0] + 1, 0)]
            if not _top_lp(design, kept, ys, chosen, total, exact=False)[0]:
                continue
            ok, placed = _top_lp(design, kept, ys, chosen, total, exact=True)
            if not ok:
                continue
            extra = [Block(y, k - j) for j, y in sorted(ys.items(), reverse=True)]
            try:
                for site, (_, pos) in zip(chosen, placed):
                    extra += _site_blocks(design, allys, site, pos)
                stack, towers = assemble(design, lower, extra)
            except ConversionError:
                continue
            if is_balanced(stack, mode="exact").balanced:
                parts = [
                    f"{site.count} on {'top of ' if site.host == 0 else ''}B'_{site.host} at x={float(pos):.10g}"
                    for site, (_, pos) in zip(chosen, placed) if site.count
                ]
                return stack, towers, parts
    return None


def finish_top(placement: ShieldPlacement, max_layers: int = MAX_TOP_LAYERS) -> ConversionResult:
    """Complete the top of a shield placement.

    The heuristic's layers above some cut c are replaced by c new shields
    plus the remaining blocks, split into columns and towers standing on the
    new shields.  Shield positions come from a grid.  A small LP screens each
    choice and suggests how to split the blocks, an exact LP pins their
    positions and the whole stack is then certified.
    """
    design = placement.design
    k = design.k
    x = [None] + [Fraction(v) for v in design.positions()]
    by_index = {layer.i: layer for layer in placement.layers}
    tried = 0
    for c in range(1, max_layers + 1):
        if c not in by_index:
            continue
        kept = _unsplit(by_index[c])
        lower = [layer for layer in placement.layers if layer.i > c] + [kept]
        total = design.total_weight - k - len(lower) - sum(layer.v for layer in lower) - c
        if total < 0 or total != int(total):
            continue
        total = int(total)
        ranges = [_candidates(x[j + 1] - 1, x[1] if j == 0 else x[j] - 1) for j in range(c)]
        for combo in _product(ranges):
            ys = dict(enumerate(combo))
            try:
                assemble(design, lower, [Block(y, k - j) for j, y in ys.items()])
            except ConversionError:
                continue
            tried += 1
            found = _try_top(design, lower, kept, ys, total)
            if found:
                stack, towers, parts = found
                desc = f"{c} top shields; extra blocks: " + (", ".join(parts) or "none")
                return ConversionResult(stack, len(lower) + c, towers, desc, True, lower)
    return ConversionResult(
        None, len(placement.layers), realize_towers(placement.layers),
        "; ".join(filter(None, [placement.reason, tried and f"no top assembly found after {tried} candidates"])),
        False, list(placement.layers),
    )


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def convert(design, digits: int = LOAD_DIGITS) -> ConversionResult:
    """Standard stack with the same spine as a loaded spinal ``design``.

    A number is read as a total weight and its optimal spine is used.  The
    total weight must be a whole number of blocks.
    """
    if not isinstance(design, SpinalDesign):
        design = optimize(design).design
    total = Fraction(design.total_weight).limit_denominator(10**digits)
    if total != int(total):
        raise ValueError(f"total weight {float(total)} is not a whole number of blocks")
    exact = rational_design(design, digits)
    if exact.k == 1 or all(wt == 0 for wt in exact.weights):
        if total == exact.k:
            stack = Stack(spine_blocks(exact), name=f"converted-{int(total)}")
            ok = is_balanced(stack, mode="exact").balanced
            return ConversionResult(stack if ok else None, 0, [], "nothing to add", ok)
    placement = place_shields(exact)
    if placement.complete:
        top = placement.layers[-1]
        extra = [Block(top.z - HALF, exact.k + 1 + j) for j in range(int(top.u))]
        try:
            stack, towers = assemble(exact, placement.layers, extra)
            if is_balanced(stack, mode="exact").balanced:
                desc = f"column of {int(top.u)} on B'_0" if top.u else "none needed"
                return ConversionResult(stack, len(placement.layers), towers, desc, True, placement.layers)
        except ConversionError:
            pass
    return finish_top(placement)
