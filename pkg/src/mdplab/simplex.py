"""Dense two-phase tableau simplex.

The pivot rule is Bland's (smallest eligible index for both the entering
column and, among tied ratios, the leaving basic variable), which cannot
cycle. Dantzig's most-negative-reduced-cost rule is available as a faster
option. Row operations go through :func:`mdplab.kernels.pivot`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels

ENTRY_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
RATIO_TIE_TOL = 1e-12
MAX_PIVOTS = 50_000
PERTURBATION = 1e-10

LE, EQ, GE = "<=", "=", ">="
MAXIMIZE, MINIMIZE = "maximize", "minimize"
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


class SimplexError(ArithmeticError):
    """Numerical breakdown that perturbation could not repair."""


@dataclass
class LpSolution:
    status: str
    values: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    pivots: int = 0


@dataclass
class _Standard:
    """``min c.y  s.t.  A y (rel) b, y >= 0`` with ``x = shift + T y``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    relations: list[str]
    T: np.ndarray
    shift: np.ndarray
    sign: float  # +1 for minimise, -1 for maximise


def _standardize(lp) -> _Standard:
    n = len(lp.objective)
    columns, shift = [], np.zeros(n)
    extra_rows, extra_rhs = [], []
    for j, (lo, hi) in enumerate(lp.bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if lo is not None and math.isfinite(lo):
            shift[j] = lo
            columns.append(e)
            if hi is not None and math.isfinite(hi):
                extra_rows.append(len(columns) - 1)
                extra_rhs.append(hi - lo)
        elif hi is not None and math.isfinite(hi):
            shift[j] = hi
            columns.append(-e)
        else:
            columns.append(e)
            columns.append(-e)
    T = np.array(columns).T.reshape(n, len(columns))

    sign = -1.0 if lp.sense == MAXIMIZE else 1.0
    obj = np.asarray(lp.objective, dtype=float)
    rows = [np.asarray(r, dtype=float) for r, _, _ in lp.constraints]
    A = np.array(rows).reshape(len(rows), n) @ T
    b = np.array([rhs for _, _, rhs in lp.constraints], dtype=float)
    b = b - np.array(rows).reshape(len(rows), n) @ shift
    relations = [rel for _, rel, _ in lp.constraints]
    for col, rhs in zip(extra_rows, extra_rhs):
        row = np.zeros(T.shape[1])
        row[col] = 1.0
        A = np.vstack([A, row])
        b = np.append(b, rhs)
        relations.append(LE)
    return _Standard(
        c=sign * (obj @ T),
        A=A,
        b=b,
        relations=relations,
        T=T,
        shift=shift,
        sign=sign,
    )


class _Tableau:
    """Canonical tableau; the last row holds reduced costs and ``-objective``."""

    def __init__(self, A, b, basis, rule):
        self.T = np.zeros((A.shape[0] + 1, A.shape[1] + 1))
        self.T[:-1, :-1] = A
        self.T[:-1, -1] = b
        self.basis = list(basis)
        self.rule = rule
        self.pivots = 0

    def set_objective(self, c):
        self.T[-1, :] = 0.0
        self.T[-1, : len(c)] = c
        for r, j in enumerate(self.basis):
            if self.T[-1, j] != 0.0:
                self.T[-1] -= self.T[-1, j] * self.T[r]

    def pivot(self, r, j):
        kernels.pivot(self.T, r, j)
        self.basis[r] = j
        self.pivots += 1

    def entering(self, allowed):
        reduced = self.T[-1, :allowed]
        candidates = np.flatnonzero(reduced < -ENTRY_TOL)
        if candidates.size == 0:
            return None
        if self.rule == "dantzig":
            return int(candidates[np.argmin(reduced[candidates])])
        return int(candidates[0])

    def leaving(self, j):
        col = self.T[:-1, j]
        rows = np.flatnonzero(col > ENTRY_TOL)
        if rows.size == 0:
            return None
        ratios = self.T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + RATIO_TIE_TOL * max(1.0, abs(best))]
        return int(min(tied, key=lambda r: self.basis[r]))

    def run(self, allowed):
        while True:
            if self.pivots >= MAX_PIVOTS:
                raise SimplexError(f"no convergence after {MAX_PIVOTS} pivots")
            j = self.entering(allowed)
            if j is None:
                return OPTIMAL
            r = self.leaving(j)
            if r is None:
                return UNBOUNDED
            self.pivot(r, j)


def _simplex(std: _Standard, rule: str):
    m, n = std.A.shape
    A = std.A.copy()
    b = std.b.copy()
    rel = list(std.relations)
    for r in range(m):
        if b[r] < 0:
            A[r] *= -1.0
            b[r] *= -1.0
            rel[r] = {LE: GE, GE: LE, EQ: EQ}[rel[r]]

    n_slack = sum(1 for x in rel if x != EQ)
    n_art = sum(1 for x in rel if x != LE)
    width = n + n_slack + n_art
    full = np.zeros((m, width))
    full[:, :n] = A
    basis = [0] * m
    s, a = n, n + n_slack
    for r, x in enumerate(rel):
        if x == LE:
            full[r, s] = 1.0
            basis[r] = s
            s += 1
        else:
            if x == GE:
                full[r, s] = -1.0
                s += 1
            full[r, a] = 1.0
            basis[r] = a
            a += 1

    tab = _Tableau(full, b, basis, rule)
    art_start = n + n_slack
    if n_art:
        phase1 = np.zeros(width)
        phase1[art_start:] = 1.0
        tab.set_objective(phase1)
        tab.run(width)
        if -tab.T[-1, -1] > FEASIBILITY_TOL * max(1.0, np.abs(b).max()):
            return INFEASIBLE, None, tab.pivots
        # Drive artificials out of the basis; drop rows that are redundant.
        r = 0
        while r < len(tab.basis):
            if tab.basis[r] >= art_start:
                row = tab.T[r, :art_start]
                cols = np.flatnonzero(np.abs(row) > ENTRY_TOL)
                if cols.size:
                    tab.pivot(r, int(cols[0]))
                else:
                    tab.T = np.delete(tab.T, r, axis=0)
                    del tab.basis[r]
                    continue
            r += 1
        tab.T = np.ascontiguousarray(np.delete(tab.T, np.s_[art_start:width], axis=1))

    tab.set_objective(std.c)
    status = tab.run(art_start)
    if status != OPTIMAL:
        return status, None, tab.pivots
    y = np.zeros(art_start)
    for r, j in enumerate(tab.basis):
        y[j] = tab.T[r, -1]
    return OPTIMAL, y[:n], tab.pivots


def _satisfies(lp, x, tol):
    for row, rel, rhs in lp.constraints:
        lhs = float(np.dot(row, x))
        scale = tol * max(1.0, abs(rhs))
        if rel == LE and lhs > rhs + scale:
            return False
        if rel == GE and lhs < rhs - scale:
            return False
        if rel == EQ and abs(lhs - rhs) > scale:
            return False
    for xj, (lo, hi) in zip(x, lp.bounds):
        if lo is not None and xj < lo - tol * max(1.0, abs(lo)):
            return False
        if hi is not None and xj > hi + tol * max(1.0, abs(hi)):
            return False
    return True


def solve_lp(lp, rule: str = "bland") -> LpSolution:
    """Solve an :class:`~mdplab.lp.LpProgram` with the dense simplex method.

    Returns an :class:`LpSolution` whose status is ``optimal``, ``infeasible``
    or ``unbounded``. An optimal point that fails the feasibility check is
    retried once with a small deterministic right-hand-side perturbation;
    if that also fails :class:`SimplexError` is raised.
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    std = _standardize(lp)
    pivots = 0
    for attempt in range(2):
        if attempt:
            # Distinct tiny offsets break ties among degenerate vertices.
            std.b = std.b + PERTURBATION * np.arange(1, len(std.b) + 1)
        status, y, used = _simplex(std, rule)
        pivots += used
        if status != OPTIMAL:
            return LpSolution(status=status, pivots=pivots)
        x = std.shift + std.T @ y
        if _satisfies(lp, x, FEASIBILITY_TOL):
            objective = float(np.dot(lp.objective, x))
            return LpSolution(OPTIMAL, x, objective, pivots)
    raise SimplexError("optimal basis violates constraints after perturbation")
