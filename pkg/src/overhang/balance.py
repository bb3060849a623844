"""Balance of (loaded) stacks as linear feasibility.

Every contact carries two non-negative unknowns, the resultant forces at the
left and right ends of its interval.  Each block contributes a force row and a
moment row; the table needs no equilibrium.  A stack is balanced when the
system has a solution.

Float mode asks HiGHS for the smallest achievable worst-case residual and
accepts when it is within ``tol``.  Exact mode works on rationals and returns
either a witness that satisfies every row exactly or a Farkas certificate.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from . import lp
from .model import (
    TABLE,
    Contact,
    InvalidGeometryError,
    PointWeight,
    Stack,
    contacts,
    support_partition,
)

DEFAULT_TOL = float(os.environ.get("OVERHANG_TOL", "1e-9"))


class UnsupportedModeError(ValueError):
    """Exact mode was asked for a stack whose coordinates are not rational."""


class UnstabilizableError(RuntimeError):
    pass


@dataclass(frozen=True)
class ForceVar:
    contact: Contact
    end: str  # "A" = left end a, "B" = right end b
    magnitude: object

    @property
    def position(self):
        return self.contact.a if self.end == "A" else self.contact.b


@dataclass
class BalanceResult:
    balanced: bool
    witness: Optional[list] = None
    certificate: Optional[list] = None
    residual: object = None
    mode: str = "float"
    contacts: list = field(default_factory=list)

    def __bool__(self):
        return self.balanced

    def forces(self) -> dict:
        """``{(upper, lower): (f_a, f_b)}`` from the witness."""
        out = {}
        for fv in self.witness or ():
            key = (fv.contact.upper, fv.contact.lower)
            a, b = out.get(key, (0, 0))
            out[key] = (fv.magnitude, b) if fv.end == "A" else (a, fv.magnitude)
        return out


def to_rational(v) -> Fraction:
    """Exact value of a coordinate.

    Floats are read through their shortest decimal form and accepted only with
    at most 12 fractional digits; anything longer is treated as irrational.
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    text = repr(float(v))
    if "e" in text or "inf" in text or "nan" in text:
        raise UnsupportedModeError(f"coordinate {v!r} has no short decimal form; use float mode")
    frac = text.split(".")[1] if "." in text else ""
    if len(frac) > 12:
        raise UnsupportedModeError(f"coordinate {v!r} looks irrational; use float mode")
    return Fraction(text)


def rationalize(stack: Stack) -> Stack:
    from .model import Block

    blocks = [Block(to_rational(b.x), b.level) for b in stack.blocks]
    weights = [
        PointWeight(w.block, to_rational(w.position), to_rational(w.magnitude))
        for w in stack.weights
    ]
    return Stack(blocks, weights, stack.name)


@dataclass
class BalanceLp:
    problem: lp.LpProblem
    contacts: list
    var_of: dict  # (contact index, "A"/"B") -> column


def build_balance_lp(stack: Stack, exact: bool = False) -> BalanceLp:
    """Force and moment rows for every block of ``stack``.

    Point weights raise the right-hand sides: magnitude ``m`` at ``p`` adds
    ``m`` to the force row and ``m * p`` to the moment row of its block.
    """
    if exact:
        stack = rationalize(stack)
    half = Fraction(1, 2) if exact else 0.5
    conts = contacts(stack)
    prob = lp.LpProblem()
    var_of = {}
    for ci, c in enumerate(conts):
        lower = "T" if c.on_table else str(c.lower)
        var_of[ci, "A"] = prob.add_var(f"f{c.upper}_{lower}_a")
        var_of[ci, "B"] = prob.add_var(f"f{c.upper}_{lower}_b")
    force = [dict() for _ in stack.blocks]
    moment = [dict() for _ in stack.blocks]
    for ci, c in enumerate(conts):
        fa, fb = var_of[ci, "A"], var_of[ci, "B"]
        force[c.upper][fa] = force[c.upper].get(fa, 0) + 1
        force[c.upper][fb] = force[c.upper].get(fb, 0) + 1
        moment[c.upper][fa] = moment[c.upper].get(fa, 0) + c.a
        moment[c.upper][fb] = moment[c.upper].get(fb, 0) + c.b
        if c.lower != TABLE:
            force[c.lower][fa] = force[c.lower].get(fa, 0) - 1
            force[c.lower][fb] = force[c.lower].get(fb, 0) - 1
            moment[c.lower][fa] = moment[c.lower].get(fa, 0) - c.a
            moment[c.lower][fb] = moment[c.lower].get(fb, 0) - c.b
    f_rhs = [1 if exact else 1.0 for _ in stack.blocks]
    m_rhs = [b.x + half for b in stack.blocks]
    for w in stack.weights:
        f_rhs[w.block] += w.magnitude
        m_rhs[w.block] += w.magnitude * w.position
    for i in range(stack.n):
        prob.add_eq(force[i], f_rhs[i], f"force{i}")
        prob.add_eq(moment[i], m_rhs[i], f"moment{i}")
    return BalanceLp(prob, conts, var_of)


def _witness(blp: BalanceLp, x) -> list:
    return [
        ForceVar(c, end, x[blp.var_of[ci, end]])
        for ci, c in enumerate(blp.contacts)
        for end in ("A", "B")
    ]


def min_residual_lp(problem: lp.LpProblem) -> tuple:
    """Relax every equality by a shared bound ``s`` and minimise ``s``.

    Returns the relaxed problem and the column of ``s``.
    """
    relaxed = lp.LpProblem(problem.n_vars, list(problem.var_names))
    s = relaxed.add_var("s")
    for row, b in zip(problem.eq_rows, problem.b_eq):
        up = dict(row)
        up[s] = -1
        relaxed.add_ub(up, b)
        down = {k: -v for k, v in row.items()}
        down[s] = -1
        relaxed.add_ub(down, -b)
    for row, b in zip(problem.ub_rows, problem.b_ub):
        relaxed.add_ub(dict(row), b)
    relaxed.c = {s: 1}
    return relaxed, s


def _float_verdict(problem: lp.LpProblem, tol: float, engine: str):
    """(within tolerance, point, worst residual) for a float problem."""
    if problem.n_vars == 0 and not problem.ub_rows:
        worst = max([abs(float(b)) for b in problem.b_eq], default=0.0)
        return worst <= tol, [], worst
    relaxed, s = min_residual_lp(problem.to_float())
    res = lp.lp_solve(relaxed, engine=engine)
    if res.status != lp.OPTIMAL:
        # only the homogeneous <= rows can fail, and they always admit 0
        raise lp.LpError(f"residual LP ended {res.status}")
    fp = problem.to_float()
    x = [max(0.0, v) for v in res.x[: problem.n_vars]]
    worst = _worst(fp, x)
    if worst > tol and fp.eq_rows:
        y = _polish(fp, x)
        wy = _worst(fp, y)
        if wy < worst:
            x, worst = y, wy
    return worst <= tol, x, worst


def _worst(problem: lp.LpProblem, x) -> float:
    worst = max([abs(r) for r in problem.residuals(x)], default=0.0)
    return max([worst] + [-v for v in problem.ub_slacks(x)])


def _polish(problem: lp.LpProblem, x) -> list:
    """Least-squares refinement of the equality rows on the support of ``x``.

    Large stacks leave HiGHS residuals near 1e-9; re-solving on the support
    recovers several digits.  Entries that turn negative are clipped.
    """
    support = [k for k, v in enumerate(x) if v > 1e-12]
    if not support:
        return list(x)
    col = {k: i for i, k in enumerate(support)}
    rows, cols, vals = [], [], []
    for r, row in enumerate(problem.eq_rows):
        for k, v in row.items():
            if k in col:
                rows.append(r)
                cols.append(col[k])
                vals.append(float(v))
    a = sparse.csr_matrix((vals, (rows, cols)), shape=(len(problem.eq_rows), len(support)))
    b = np.array([float(v) for v in problem.b_eq])
    x0 = np.array([x[k] for k in support])
    dy = splinalg.lsqr(a, b - a @ x0, atol=1e-16, btol=1e-16, iter_lim=20 * len(support))[0]
    y = list(x)
    for k, v in zip(support, x0 + dy):
        y[k] = max(0.0, float(v))
    return y


def is_balanced(
    stack: Stack,
    mode: str = "float",
    tol: float = DEFAULT_TOL,
    engine: str = "highs",
) -> BalanceResult:
    """Decide balance.

    ``mode="float"`` accepts when some non-negative force assignment leaves no
    row off by more than ``tol``.  ``mode="exact"`` needs rational coordinates
    (see :func:`to_rational`) and certifies the verdict.
    """
    if mode not in ("float", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact":
        blp = build_balance_lp(stack, exact=True)
        res = lp.lp_solve(blp.problem, exact=True, engine=engine)
        if res.feasible:
            return BalanceResult(True, _witness(blp, res.x), residual=Fraction(0), mode=mode, contacts=blp.contacts)
        return BalanceResult(False, certificate=res.certificate, mode=mode, contacts=blp.contacts)
    blp = build_balance_lp(stack)
    ok, x, worst = _float_verdict(blp.problem, tol, engine)
    if ok:
        return BalanceResult(True, _witness(blp, x), residual=worst, mode=mode, contacts=blp.contacts)
    cert = lp.farkas_float(blp.problem)
    return BalanceResult(False, certificate=cert, residual=worst, mode=mode, contacts=blp.contacts)


def witness_residuals(stack: Stack, result: BalanceResult) -> list:
    """Residual of every force and moment row under the result's witness."""
    exact = result.mode == "exact"
    blp = build_balance_lp(stack, exact=exact)
    x = [0] * blp.problem.n_vars
    lookup = {(fv.contact, fv.end): fv.magnitude for fv in result.witness}
    for ci, c in enumerate(blp.contacts):
        for end in ("A", "B"):
            x[blp.var_of[ci, end]] = lookup[c, end]
    return blp.problem.residuals(x)


# -- point weights ------------------------------------------------------------


def free_upper_positions(stack: Stack) -> list:
    """Candidate point-weight sites: ends of the uncovered parts of upper edges.

    A weight anywhere on an uncovered stretch is a mix of weights at the
    stretch's two ends, so these sites lose nothing.
    """
    covered = {i: [] for i in range(stack.n)}
    for c in contacts(stack):
        if c.lower != TABLE:
            covered[c.lower].append((c.a, c.b))
    sites = []
    for i, blk in enumerate(stack.blocks):
        lo, hi = blk.x, blk.x + 1
        cursor = lo
        for a, b in sorted(covered[i]):
            if a >= cursor:
                sites.append((i, cursor))
                if a > cursor:
                    sites.append((i, a))
            cursor = max(cursor, b)
        if cursor <= hi:
            sites.append((i, cursor))
            if hi > cursor:
                sites.append((i, hi))
    return list(dict.fromkeys(sites))


def _weight_lp(stack: Stack, sites, exact: bool):
    blp = build_balance_lp(stack, exact=exact)
    prob = blp.problem
    cols = []
    for i, pos in sites:
        if exact:
            pos = to_rational(pos)
        k = prob.add_var(f"w{i}@{pos}")
        cols.append(k)
        prob.eq_rows[2 * i][k] = -1
        prob.eq_rows[2 * i + 1][k] = -pos
    prob.c = {k: 1 for k in cols}
    return blp, cols


def min_stabilizing_weight(
    stack: Stack,
    allowed_positions: Optional[Sequence] = None,
    exact: bool = False,
) -> tuple:
    """Least total point weight that balances ``stack``.

    ``allowed_positions`` is a list of ``(block, x)`` sites; by default the
    uncovered parts of all upper edges.  Returns ``(total, [PointWeight])``.
    """
    sites = list(allowed_positions) if allowed_positions is not None else free_upper_positions(stack)
    for i, pos in sites:
        blk = stack.blocks[i]
        if not blk.x <= pos <= blk.x + 1:
            raise InvalidGeometryError(f"site {pos} is not on block {i}")
    blp, cols = _weight_lp(stack, sites, exact)
    res = lp.lp_solve(blp.problem, exact=exact, engine="simplex" if exact else "highs")
    if res.status != lp.OPTIMAL:
        raise UnstabilizableError("no finite set of point weights balances this stack")
    weights = []
    for (i, pos), k in zip(sites, cols):
        if res.x[k] > (0 if exact else 1e-12):
            weights.append(PointWeight(i, pos, res.x[k]))
    total = sum((w.magnitude for w in weights), Fraction(0) if exact else 0.0)
    return total, weights


# -- stability ---------------------------------------------------------------------


def is_strictly_stable(stack: Stack, margin: float, tol: float = DEFAULT_TOL) -> bool:
    """Balanced with no contact resultant within ``margin`` of a block edge.

    Both ends of a contact between blocks are block edges.  A table contact
    ending at the table edge x = 0 while the block continues past it has only
    one block edge, its left end.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    blp = build_balance_lp(stack)
    prob = blp.problem
    for ci, c in enumerate(blp.contacts):
        fa, fb = blp.var_of[ci, "A"], blp.var_of[ci, "B"]
        length = float(c.b - c.a)
        # the resultant sits length * fb / (fa + fb) right of a
        prob.add_ub({fa: margin, fb: margin - length}, 0.0)
        if not (c.on_table and c.b == 0 and stack.blocks[c.upper].x + 1 > 0):
            prob.add_ub({fa: margin - length, fb: margin}, 0.0)
    ok, _, _ = _float_verdict(prob, tol, "highs")
    return ok


# -- balancing set as point weights -------------------------------------------


def loaded_equivalent(stack: Stack, result: Optional[BalanceResult] = None) -> Stack:
    """Replace the balancing set by the downward forces it exerts on the support set."""
    if result is None:
        result = is_balanced(stack)
    if not result.balanced:
        raise ValueError("stack is not balanced")
    part = support_partition(stack)
    keep = sorted(part.support)
    remap = {old: new for new, old in enumerate(keep)}
    loaded = stack.subset(keep)
    extra = []
    for fv in result.witness:
        c = fv.contact
        if c.upper in part.balancing and c.lower in part.support and fv.magnitude > 0:
            extra.append(PointWeight(remap[c.lower], fv.position, fv.magnitude))
    return loaded.with_weights(extra)
