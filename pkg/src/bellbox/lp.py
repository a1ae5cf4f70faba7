"""Dense two-phase simplex for small equality-form linear programs.

Solves  min c'x  subject to  A x = b,  x >= 0  on a dense numpy tableau.
Pivot selection follows Bland's smallest-index rule throughout (entering:
lowest column index with a negative reduced cost; leaving: minimum-ratio
rows tie-broken by lowest basic-variable index), which rules out cycling
and makes every solve deterministic.

Phase 1 minimizes the sum of artificial variables.  If its optimum exceeds
``feas_tol`` the program is infeasible and a certificate vector y with
y'A <= 0 (up to tolerance) and y'b > 0 is read off the artificial columns
of the final objective row -- the phase-1 dual, i.e. a Farkas witness of
infeasibility.  Otherwise remaining basic artificials are pivoted out
(rows that cannot be pivoted are redundant and dropped) before phase 2
optimizes the real objective.

Instances in this package stay tiny (tens of rows, at most ~1000 columns),
so there is no sparse or revised-simplex machinery here on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_MAX_PIVOTS = 200_000


@dataclass(frozen=True)
class SimplexResult:
    """Outcome of one solve.

    ``x`` and ``objective`` are set when status is "optimal";
    ``farkas`` is set when status is "infeasible"; ``infeasibility``
    always carries the phase-1 optimum.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    infeasibility: float
    farkas: np.ndarray | None


def solve_standard_form(
    a_eq,
    b_eq,
    cost=None,
    *,
    feas_tol: float = 1e-9,
    pivot_tol: float = 1e-10,
) -> SimplexResult:
    """Solve min cost'x s.t. a_eq x = b_eq, x >= 0.

    ``cost=None`` means a pure feasibility problem (phase 1 only, then the
    zero objective is trivially optimal at the feasible point found).
    """
    a = np.array(a_eq, dtype=float)
    b = np.array(b_eq, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] != b.size:
        raise ValueError(f"constraint shapes disagree: A {a.shape}, b {b.shape}")
    m, n = a.shape
    c = np.zeros(n) if cost is None else np.array(cost, dtype=float).ravel()
    if c.size != n:
        raise ValueError(f"cost length {c.size} != number of columns {n}")

    # Flip rows so the right-hand side is nonnegative; remember the signs to
    # map the Farkas certificate back to the caller's row space.
    signs = np.where(b < 0.0, -1.0, 1.0)
    a = a * signs[:, None]
    b = b * signs

    # Phase-1 tableau: [A | I | b] with the reduced-cost row underneath.
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n : n + m] = np.eye(m)
    t[:m, -1] = b
    t[m, :n] = -a.sum(axis=0)
    t[m, -1] = -b.sum()  # corner holds minus the current objective
    basis = np.arange(n, n + m)

    status = _iterate(t, basis, n + m, pivot_tol)
    if status != OPTIMAL:  # pragma: no cover - phase 1 is bounded below by 0
        raise ArithmeticError("phase 1 reported unbounded; numerical breakdown")
    phase1 = -t[m, -1]
    if phase1 > feas_tol:
        # Reduced cost of artificial i is 1 - y_i, so the dual is read off
        # the artificial columns of the objective row.
        y = (1.0 - t[m, n : n + m]) * signs
        return SimplexResult(INFEASIBLE, None, None, float(phase1), y)

    # Pivot leftover basic artificials out on any original column; rows with
    # no eligible column are linearly dependent on the others and dropped.
    drop = []
    for row in range(m):
        if basis[row] < n:
            continue
        eligible = np.nonzero(np.abs(t[row, :n]) > pivot_tol)[0]
        if eligible.size:
            _pivot(t, basis, row, int(eligible[0]))
        else:
            drop.append(row)
    if drop:
        t = np.delete(t, drop, axis=0)
        basis = np.delete(basis, drop)

    # Phase 2 on the original columns with the real objective.
    cb = c[basis]
    t[-1, :n] = c - cb @ t[:-1, :n]
    t[-1, n:-1] = 0.0  # artificial columns are barred from entering anyway
    t[-1, -1] = -float(cb @ t[:-1, -1])
    status = _iterate(t, basis, n, pivot_tol)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, None, None, float(phase1), None)

    x = np.zeros(n)
    x[basis] = t[:-1, -1]
    return SimplexResult(OPTIMAL, x, float(-t[-1, -1]), float(phase1), None)


def _iterate(t: np.ndarray, basis: np.ndarray, allowed_cols: int, pivot_tol: float) -> str:
    for _ in range(_MAX_PIVOTS):
        reduced = t[-1, :allowed_cols]
        entering = np.nonzero(reduced < -pivot_tol)[0]
        if entering.size == 0:
            return OPTIMAL
        q = int(entering[0])  # Bland: smallest eligible column index
        column = t[:-1, q]
        rows = np.nonzero(column > pivot_tol)[0]
        if rows.size == 0:
            return UNBOUNDED
        ratios = t[:-1, -1][rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        p = int(ties[np.argmin(basis[ties])])  # Bland: smallest basic index
        _pivot(t, basis, p, q)
    raise ArithmeticError("simplex pivot limit exceeded")


def _pivot(t: np.ndarray, basis: np.ndarray, p: int, q: int) -> None:
    t[p, :] /= t[p, q]
    column = t[:, q].copy()
    column[p] = 0.0
    t -= np.outer(column, t[p, :])
    # Crush roundoff drift in the pivot column so it stays a unit vector.
    t[:, q] = 0.0
    t[p, q] = 1.0
    basis[p] = q
