"""Small dense linear-program solver (two-phase tableau simplex).

Solves  maximize f^T x  s.t.  A x <= b,  lo <= x <= hi  for dense data with
at most a few thousand rows.  Pivoting is deterministic: Dantzig's rule with
lowest-index tie-breaking, falling back to Bland's anti-cycling rule after a
degenerate stall, so identical inputs always produce identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InputError, RareccError, UnboundedError

_PIVOT_TOL = 1e-10       # minimum magnitude of an acceptable pivot element
_COST_TOL = 1e-9
_STALL_LIMIT = 64        # degenerate iterations before switching to Bland


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective @ x subject to A x <= b and lo <= x <= hi."""

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        f = np.asarray(self.objective, dtype=float)
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or f.ndim != 1 or b.ndim != 1:
            raise ContractError("A must be a matrix, objective and b vectors")
        mrows, ncols = A.shape
        if mrows < 1 or ncols < 1:
            raise ContractError("need at least one row and one column")
        if f.shape != (ncols,) or b.shape != (mrows,):
            raise ContractError("objective/b shapes inconsistent with A")
        lo = np.zeros(ncols) if self.lo is None else np.asarray(self.lo, dtype=float)
        hi = np.full(ncols, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float)
        if lo.shape != (ncols,) or hi.shape != (ncols,):
            raise ContractError("bound shapes inconsistent with A")
        if not (np.isfinite(f).all() and np.isfinite(A).all() and np.isfinite(b).all()):
            raise InputError("objective, A and b must be finite")
        if not np.isfinite(lo).all():
            raise InputError("every variable needs a finite lower bound")
        if np.isnan(hi).any():
            raise InputError("upper bounds must not be NaN")
        object.__setattr__(self, "objective", f)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one LP solve."""

    status: str                     # "optimal" | "infeasible"
    x: np.ndarray | None
    objective: float | None
    iterations: int
    residual: float
    active_rows: list = field(default_factory=list)


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int,
           scratch: np.ndarray | None = None) -> None:
    prow = T[row] / T[row, col]
    coef = T[:, col].copy()
    coef[row] = 0.0
    if scratch is None:
        T -= np.outer(coef, prow)
    else:
        np.multiply(coef[:, None], prow[None, :], out=scratch)
        np.subtract(T, scratch, out=T)
    T[row] = prow
    basis[row] = col


def _iterate(T: np.ndarray, basis: np.ndarray, ncols: int) -> int:
    """Pivot to optimality of the minimization tableau; returns pivot count."""
    iters = 0
    stall = 0
    bland = False
    last_obj = T[-1, -1]
    max_iters = 200 * (T.shape[0] + ncols)
    scratch = np.empty_like(T)
    while True:
        costs = T[-1, :ncols]
        if bland:
            elig = np.flatnonzero(costs < -_COST_TOL)
            if elig.size == 0:
                return iters
            col = int(elig[0])
        else:
            col = int(np.argmin(costs))
            if costs[col] >= -_COST_TOL:
                return iters
        colvals = T[:-1, col]
        rhs = np.maximum(T[:-1, -1], 0.0)
        ok = colvals > _PIVOT_TOL
        if not ok.any():
            raise UnboundedError("LP is unbounded; call sites must supply box bounds")
        ratios = np.where(ok, rhs / np.where(ok, colvals, 1.0), np.inf)
        best = ratios.min()
        tied = np.flatnonzero(ratios <= best + 1e-12)
        row = int(tied[np.argmin(basis[tied])])
        _pivot(T, basis, row, col, scratch)
        iters += 1
        if T[-1, -1] > last_obj + 1e-12 * (1.0 + abs(last_obj)):
            last_obj = T[-1, -1]
            stall = 0
        else:
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        if iters > max_iters:
            raise RareccError("simplex iteration limit exceeded")


def solve_lp(lp: LinearProgram) -> SolveResult:
    """Solve the LP; returns an optimal vertex or status "infeasible".

    Infeasibility is a result, not an exception; unboundedness raises
    :class:`UnboundedError` because every call site is supposed to pass a
    bounded feasible region.
    """
    f, A, b, lo, hi = lp.objective, lp.A, lp.b, lp.lo, lp.hi
    ncols = A.shape[1]
    if (hi < lo - 1e-15).any():
        return SolveResult("infeasible", None, None, 0, 0.0)

    # shift to z = x - lo >= 0 and materialize finite upper bounds as rows
    b_shift = b - A @ lo
    ub_idx = np.flatnonzero(np.isfinite(hi))
    G = np.vstack([A] + [np.eye(ncols)[ub_idx]]) if ub_idx.size else A.copy()
    g = np.concatenate([b_shift, (hi - lo)[ub_idx]]) if ub_idx.size else b_shift.copy()

    # drop vacuous rows; an all-zero row with negative rhs is a contradiction
    scale = np.abs(G).max(axis=1)
    vacuous = (scale <= _PIVOT_TOL)
    if (vacuous & (g < -1e-9)).any():
        return SolveResult("infeasible", None, None, 0, 0.0)
    keep = ~vacuous
    G, g, scale = G[keep], g[keep], scale[keep]
    if G.shape[0] == 0:
        raise ContractError("all constraint rows vanished; region is unbounded")
    G = G / scale[:, None]
    g = g / scale

    nrows = G.shape[0]
    neg = g < 0
    art_rows = np.flatnonzero(neg)
    nart = art_rows.size
    total = ncols + nrows + nart
    T = np.zeros((nrows + 1, total + 1))
    T[:-1, :ncols] = np.where(neg[:, None], -G, G)
    T[np.arange(nrows), ncols + np.arange(nrows)] = np.where(neg, -1.0, 1.0)
    T[:-1, -1] = np.abs(g)
    basis = ncols + np.arange(nrows)
    iters = 0

    if nart:
        for j, r in enumerate(art_rows):
            T[r, ncols + nrows + j] = 1.0
            basis[r] = ncols + nrows + j
        # phase 1: minimize the sum of artificials
        T[-1, :] = 0.0
        T[-1, ncols + nrows:total] = 1.0
        for r in art_rows:
            T[-1, :] -= T[r, :]
        iters += _iterate(T, basis, total)
        if -T[-1, -1] > 1e-7:
            return SolveResult("infeasible", None, None, iters, 0.0)
        # pivot surviving artificials out of the basis; rows that cannot be
        # repaired are redundant and get dropped together with their basis slot
        n_struct = ncols + nrows
        dead = []
        for r in range(nrows):
            if basis[r] >= n_struct:
                sub = np.abs(T[r, :n_struct])
                j = int(np.argmax(sub))
                if sub[j] > _PIVOT_TOL:
                    _pivot(T, basis, r, j)
                    iters += 1
                else:
                    dead.append(r)
        if dead:
            T = np.delete(T, dead, axis=0)
            basis = np.delete(basis, dead)
            nrows -= len(dead)
        T = np.delete(T, np.s_[n_struct:total], axis=1)
        total = n_struct

    # phase 2: minimize -f^T z
    T[-1, :] = 0.0
    T[-1, :ncols] = -f
    for r in range(nrows):
        if T[-1, basis[r]] != 0.0:
            T[-1, :] -= T[-1, basis[r]] * T[r, :]
    iters += _iterate(T, basis, total)

    z = np.zeros(total)
    z[basis] = T[:-1, -1]
    x = lo + z[:ncols]
    slack_ok = A @ x - b
    residual = float(max(0.0, slack_ok.max(), (lo - x).max(), (x - hi)[np.isfinite(hi)].max(initial=0.0)))
    active = [int(i) for i in np.flatnonzero(np.abs(slack_ok) <= 1e-7 * (1.0 + np.abs(b)))]
    return SolveResult("optimal", x, float(f @ x), iters, residual, active)
