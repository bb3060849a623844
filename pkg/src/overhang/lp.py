"""Small linear-programming toolkit used by the balance checks.

Problems are kept in a sparse row form with every variable bounded below by
zero:

    minimize    c . x
    subject to  A_eq x == b_eq
                A_ub x <= b_ub
                x >= 0

Two engines are available.  ``simplex`` is a two-phase tableau simplex with
Bland's rule written here; it runs on floats or on :class:`Fraction` values.
``highs`` hands the float problem to SciPy's HiGHS wrapper.  Exact solves use
HiGHS to guess the support of a solution and then confirm it with rational
elimination, falling back to the exact simplex whenever the guess does not
survive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import optimize, sparse

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(RuntimeError):
    pass


@dataclass
class LpProblem:
    n_vars: int = 0
    var_names: list = field(default_factory=list)
    eq_rows: list = field(default_factory=list)
    b_eq: list = field(default_factory=list)
    ub_rows: list = field(default_factory=list)
    b_ub: list = field(default_factory=list)
    c: Optional[dict] = None
    row_names: list = field(default_factory=list)

    def add_var(self, name: str = "") -> int:
        self.var_names.append(name or f"x{self.n_vars}")
        self.n_vars += 1
        return self.n_vars - 1

    def add_eq(self, row: dict, rhs, name: str = "") -> int:
        self.eq_rows.append({k: v for k, v in row.items() if v != 0})
        self.b_eq.append(rhs)
        self.row_names.append(name or f"eq{len(self.eq_rows) - 1}")
        return len(self.eq_rows) - 1

    def add_ub(self, row: dict, rhs) -> int:
        self.ub_rows.append({k: v for k, v in row.items() if v != 0})
        self.b_ub.append(rhs)
        return len(self.ub_rows) - 1

    @property
    def n_rows(self) -> int:
        return len(self.eq_rows) + len(self.ub_rows)

    def is_exact(self) -> bool:
        values = [v for row in self.eq_rows + self.ub_rows for v in row.values()]
        values += list(self.b_eq) + list(self.b_ub)
        if self.c:
            values += list(self.c.values())
        return all(isinstance(v, (int, Fraction)) for v in values)

    def to_float(self) -> "LpProblem":
        conv = lambda row: {k: float(v) for k, v in row.items()}
        return LpProblem(
            self.n_vars,
            list(self.var_names),
            [conv(r) for r in self.eq_rows],
            [float(b) for b in self.b_eq],
            [conv(r) for r in self.ub_rows],
            [float(b) for b in self.b_ub],
            conv(self.c) if self.c is not None else None,
            list(self.row_names),
        )

    def residuals(self, x) -> list:
        """``A_eq x - b_eq`` for a candidate point."""
        return [sum(v * x[k] for k, v in row.items()) - b for row, b in zip(self.eq_rows, self.b_eq)]

    def ub_slacks(self, x) -> list:
        return [b - sum(v * x[k] for k, v in row.items()) for row, b in zip(self.ub_rows, self.b_ub)]

    def dump(self) -> str:
        """Plain-text listing of objective, rows and bounds."""
        def term(k, v):
            return f"{v:+} {self.var_names[k]}"

        lines = []
        if self.c:
            lines.append("minimize " + " ".join(term(k, v) for k, v in sorted(self.c.items())))
        else:
            lines.append("feasibility")
        lines.append("subject to")
        for name, row, b in zip(self.row_names, self.eq_rows, self.b_eq):
            lines.append(f"  {name}: " + " ".join(term(k, v) for k, v in sorted(row.items())) + f" = {b}")
        for i, (row, b) in enumerate(zip(self.ub_rows, self.b_ub)):
            lines.append(f"  ub{i}: " + " ".join(term(k, v) for k, v in sorted(row.items())) + f" <= {b}")
        lines.append("bounds")
        lines.append("  all variables >= 0")
        return "\n".join(lines)


@dataclass
class LpResult:
    status: str
    x: Optional[list] = None
    objective: object = None
    certificate: Optional[list] = None
    ray: Optional[list] = None
    exact: bool = False

    @property
    def feasible(self) -> bool:
        return self.status in (OPTIMAL, UNBOUNDED)


# -- tableau simplex ----------------------------------------------------------


class _Tableau:
    """Sparse dense-ish tableau: rows are dicts column -> value."""

    def __init__(self, rows, rhs, basis, eps):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.eps = eps
        self.cost = {}
        self.value = 0

    def pivot(self, r, e):
        eps = self.eps
        prow = self.rows[r]
        piv = prow[e]
        prow = {k: v / piv for k, v in prow.items()}
        prow[e] = 1 if eps == 0 else 1.0
        self.rows[r] = prow
        self.rhs[r] = self.rhs[r] / piv
        prhs = self.rhs[r]
        for s, row in enumerate(self.rows):
            if s == r:
                continue
            f = row.get(e)
            if not f:
                continue
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv == 0 or (eps and abs(nv) <= eps):
                    row.pop(k, None)
                else:
                    row[k] = nv
            row.pop(e, None)
            self.rhs[s] = self.rhs[s] - f * prhs
            if eps and abs(self.rhs[s]) <= eps:
                self.rhs[s] = 0.0
        f = self.cost.get(e)
        if f:
            for k, v in prow.items():
                nv = self.cost.get(k, 0) - f * v
                if nv == 0 or (eps and abs(nv) <= eps):
                    self.cost.pop(k, None)
                else:
                    self.cost[k] = nv
            self.cost.pop(e, None)
            self.value = self.value + f * prhs
        self.basis[r] = e

    def run(self, allowed, max_iter=100000):
        """Bland's rule until optimal; returns None or the unbounded column."""
        eps = self.eps
        for _ in range(max_iter):
            entering = None
            for k in sorted(self.cost):
                if self.cost[k] < -eps and allowed(k):
                    entering = k
                    break
            if entering is None:
                return None
            best = None
            for r, row in enumerate(self.rows):
                a = row.get(entering, 0)
                if a > eps:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return entering
            self.pivot(best[1], entering)
        raise LpError("simplex iteration limit reached")

    def column(self, k):
        return {r: row[k] for r, row in enumerate(self.rows) if k in row}


def simplex(problem: LpProblem, exact: bool = True, eps: float = 1e-10) -> LpResult:
    """Two-phase simplex with Bland's rule.

    With ``exact`` the arithmetic is rational and the verdict is certified;
    otherwise plain floats with tolerance ``eps``.
    """
    conv = Fraction if exact else float
    eps = 0 if exact else eps
    zero = conv(0)
    one = conv(1)
    n = problem.n_vars
    rows, rhs = [], []
    for row, b in zip(problem.eq_rows, problem.b_eq):
        rows.append({k: conv(v) for k, v in row.items()})
        rhs.append(conv(b))
    n_slack = len(problem.ub_rows)
    for i, (row, b) in enumerate(zip(problem.ub_rows, problem.b_ub)):
        r = {k: conv(v) for k, v in row.items()}
        r[n + i] = one
        rows.append(r)
        rhs.append(conv(b))
    m = len(rows)
    signs = []
    for r in range(m):
        if rhs[r] < 0:
            rows[r] = {k: -v for k, v in rows[r].items()}
            rhs[r] = -rhs[r]
            signs.append(-1)
        else:
            signs.append(1)
    first_art = n + n_slack
    for r in range(m):
        rows[r][first_art + r] = one
    tab = _Tableau(rows, rhs, [first_art + r for r in range(m)], eps)
    # phase I: minimise the sum of artificials
    for r in range(m):
        for k, v in rows[r].items():
            if k < first_art:
                tab.cost[k] = tab.cost.get(k, zero) - v
        tab.value += rhs[r]
    tab.cost = {k: v for k, v in tab.cost.items() if v != 0}
    tab.run(lambda k: True)
    phase1 = tab.value
    if phase1 > (eps * max(1, m) if eps else 0):
        # reduced cost of artificial r is 1 - y_r
        y = [(one - tab.cost.get(first_art + r, zero)) * signs[r] for r in range(m)]
        return LpResult(INFEASIBLE, certificate=y, exact=exact)
    # drive artificials out of the basis; rows with nothing left are redundant
    for r in range(m):
        if tab.basis[r] >= first_art:
            cand = [k for k in sorted(tab.rows[r]) if k < first_art and (not eps or abs(tab.rows[r][k]) > eps)]
            if cand:
                tab.pivot(r, cand[0])
    keep = [r for r in range(m) if tab.basis[r] < first_art]
    tab.rows = [tab.rows[r] for r in keep]
    tab.rhs = [tab.rhs[r] for r in keep]
    tab.basis = [tab.basis[r] for r in keep]
    for row in tab.rows:
        for k in [k for k in row if k >= first_art]:
            del row[k]
    # phase II
    tab.cost = {}
    tab.value = zero
    if problem.c:
        cost = {k: conv(v) for k, v in problem.c.items() if v != 0}
        for r, b in enumerate(tab.basis):
            cb = cost.get(b)
            if cb:
                for k, v in tab.rows[r].items():
                    cost[k] = cost.get(k, zero) - cb * v
                tab.value += cb * tab.rhs[r]
        tab.cost = {k: v for k, v in cost.items() if v != 0 and (not eps or abs(v) > eps)}
        unbounded = tab.run(lambda k: k < first_art)
    else:
        unbounded = None
    x = [zero] * (n + n_slack)
    for r, b in enumerate(tab.basis):
        x[b] = tab.rhs[r]
    if unbounded is not None:
        ray = [zero] * (n + n_slack)
        ray[unbounded] = one
        for r, a in tab.column(unbounded).items():
            ray[tab.basis[r]] = -a
        return LpResult(UNBOUNDED, x=x[:n], ray=ray[:n], exact=exact)
    return LpResult(OPTIMAL, x=x[:n], objective=tab.value, exact=exact)


# -- HiGHS ---------------------------------------------------------------------


def _matrix(rows, n):
    data, ri, ci = [], [], []
    for r, row in enumerate(rows):
        for k, v in row.items():
            data.append(float(v))
            ri.append(r)
            ci.append(k)
    return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))


def highs(problem: LpProblem, **options) -> LpResult:
    n = problem.n_vars
    c = np.zeros(n)
    if problem.c:
        for k, v in problem.c.items():
            c[k] = float(v)
    kw = {}
    if problem.eq_rows:
        kw["A_eq"] = _matrix(problem.eq_rows, n)
        kw["b_eq"] = np.array([float(b) for b in problem.b_eq])
    if problem.ub_rows:
        kw["A_ub"] = _matrix(problem.ub_rows, n)
        kw["b_ub"] = np.array([float(b) for b in problem.b_ub])
    if n == 0:
        ok = all(float(b) == 0 for b in problem.b_eq) and all(float(b) >= 0 for b in problem.b_ub)
        return LpResult(OPTIMAL if ok else INFEASIBLE, x=[], objective=0.0)
    res = optimize.linprog(c, bounds=(0, None), method="highs", options=options or None, **kw)
    if res.status == 0:
        return LpResult(OPTIMAL, x=list(res.x), objective=float(res.fun))
    if res.status == 2:
        return LpResult(INFEASIBLE, certificate=farkas_float(problem))
    if res.status == 3:
        return LpResult(UNBOUNDED)
    raise LpError(f"HiGHS failed: {res.message}")


def farkas_float(problem: LpProblem) -> Optional[list]:
    """A normalised Farkas ray ``y`` with ``A^T y <= 0`` and ``b.y > 0``.

    Multipliers on ``<=`` rows are non-positive.  Returns None when the
    auxiliary LP finds no ray.
    """
    n_eq, n_ub = len(problem.eq_rows), len(problem.ub_rows)
    m = n_eq + n_ub
    if m == 0:
        return None
    cols = [dict() for _ in range(problem.n_vars)]
    for r, row in enumerate(problem.eq_rows + problem.ub_rows):
        for k, v in row.items():
            cols[k][r] = float(v)
    b = np.array([float(v) for v in list(problem.b_eq) + list(problem.b_ub)])
    bounds = [(-1, 1)] * n_eq + [(-1, 0)] * n_ub
    kw = {}
    if problem.n_vars:
        kw = dict(A_ub=_matrix(cols, m), b_ub=np.zeros(problem.n_vars))
    res = optimize.linprog(-b, bounds=bounds, method="highs", **kw)
    if res.status != 0 or -res.fun <= 1e-12:
        return None
    return list(res.x)


# -- exact support solve ----------------------------------------------------------


def solve_exact_subsystem(rows, rhs, cols) -> Optional[dict]:
    """Solve ``rows . x == rhs`` over the columns in ``cols`` exactly.

    Columns outside ``cols`` are fixed at zero and free columns of the reduced
    system are set to zero.  Returns ``{col: value}`` or None if inconsistent.
    """
    cols = set(cols)
    pivots: dict = {}  # pivot column -> (row dict, rhs)
    where: dict = {}  # column -> set of pivot columns whose rows mention it
    for row, b in zip(rows, rhs):
        r = {k: Fraction(v) for k, v in row.items() if k in cols and v != 0}
        b = Fraction(b)
        while True:
            hit = [k for k in r if k in pivots]
            if not hit:
                break
            k = hit[0]
            f = r[k]
            prow, pb = pivots[k]
            for kk, vv in prow.items():
                nv = r.get(kk, 0) - f * vv
                if nv:
                    r[kk] = nv
                else:
                    r.pop(kk, None)
            b -= f * pb
        if not r:
            if b != 0:
                return None
            continue
        p = min(r, key=lambda k: (len(where.get(k, ())), k))
        piv = r[p]
        r = {k: v / piv for k, v in r.items()}
        b = b / piv
        # eliminate p from existing pivot rows
        for q in list(where.get(p, ())):
            qrow, qb = pivots[q]
            f = qrow.get(p)
            if not f:
                continue
            for kk, vv in r.items():
                nv = qrow.get(kk, 0) - f * vv
                if nv:
                    if kk not in qrow:
                        where.setdefault(kk, set()).add(q)
                    qrow[kk] = nv
                else:
                    if kk in qrow:
                        del qrow[kk]
                        where.get(kk, set()).discard(q)
            pivots[q] = (qrow, qb - f * b)
        where.pop(p, None)
        pivots[p] = (r, b)
        for k in r:
            if k != p:
                where.setdefault(k, set()).add(p)
    # rows are fully reduced: each pivot row is p + sum(free) = b
    return {p: b for p, (r, b) in pivots.items()}


def crossover_exact(problem: LpProblem, x_float, rel_tol: float = 1e-9) -> Optional[list]:
    """Rational solution of the equality system supported where ``x_float`` is
    positive, or None if that support does not give a non-negative point."""
    if problem.ub_rows:
        return None
    scale = max([1.0] + [abs(float(v)) for v in x_float])
    support = [k for k, v in enumerate(x_float) if v > rel_tol * scale]
    sol = solve_exact_subsystem(problem.eq_rows, problem.b_eq, support)
    if sol is None:
        return None
    x = [Fraction(0)] * problem.n_vars
    for k, v in sol.items():
        if v < 0:
            return None
        x[k] = v
    if any(r != 0 for r in problem.residuals(x)):
        return None
    return x


def verify_certificate(problem: LpProblem, y) -> bool:
    """Exact Farkas check: ``A^T y <= 0``, ``y_ub <= 0`` and ``b . y > 0``."""
    n_eq = len(problem.eq_rows)
    if any(v > 0 for v in y[n_eq:]):
        return False
    col = [Fraction(0)] * problem.n_vars
    for r, row in enumerate(problem.eq_rows + problem.ub_rows):
        if y[r]:
            for k, v in row.items():
                col[k] += Fraction(v) * y[r]
    by = sum(Fraction(b) * yy for b, yy in zip(list(problem.b_eq) + list(problem.b_ub), y))
    return all(v <= 0 for v in col) and by > 0


def _rational_certificate(problem: LpProblem, y_float) -> Optional[list]:
    for bound in (10**3, 10**6, 10**9):
        y = [Fraction(v).limit_denominator(bound) for v in y_float]
        if verify_certificate(problem, y):
            return y
    return None


def lp_solve(problem: LpProblem, exact: bool = False, engine: str = "highs") -> LpResult:
    """Solve ``problem``.

    ``exact`` requires rational data and returns rational values; feasible
    answers carry a point that satisfies every row exactly and infeasible ones
    a Farkas certificate that :func:`verify_certificate` accepts.
    """
    if engine not in ("highs", "simplex"):
        raise ValueError(f"unknown LP engine {engine!r}")
    if not exact:
        if engine == "simplex":
            return simplex(problem, exact=False)
        return highs(problem)
    if not problem.is_exact():
        raise LpError("exact solve needs rational coefficients")
    if engine == "highs" and not problem.c and not problem.ub_rows:
        guess = highs(problem.to_float())
        if guess.status == OPTIMAL:
            x = crossover_exact(problem, guess.x)
            if x is not None:
                return LpResult(OPTIMAL, x=x, objective=Fraction(0), exact=True)
        elif guess.status == INFEASIBLE and guess.certificate is not None:
            y = _rational_certificate(problem, guess.certificate)
            if y is not None:
                return LpResult(INFEASIBLE, certificate=y, exact=True)
        log.debug("crossover failed; running exact simplex")
    return simplex(problem, exact=True)
