"""The three risk-level-indexed solution methods and their support code.

* :func:`ccp_oracle` - brute-force Monte Carlo reference: per simplex
  direction, the largest scale whose empirical violation stays within delta.
* :func:`cvar_solve` - the sample-average Rockafellar-Uryasev linear program.
* :func:`scenario_solve` - the sampled-constraint linear program.

The CVaR program over N samples has one slack variable and one row per
sample; far fewer than N of them can be active (only the upper delta-tail),
so for large N the solver keeps only the highest-loss scenarios, solves the
reduced LP, then verifies every dropped row at the solution and re-expands
violations until the reduced solution is certified optimal for the full LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InputError, ParameterError, RareccError
from .lpsolve import LinearProgram, solve_lp
from .model import ProblemInstance, box_clip, phi_many
from .sampler import (HeavyTailModel, LightTailModel, SampleBatch, TailModel,
                      draws_range, light_qinv)
from .search import quasirandom_simplex, simplex_grid

_Z95 = 1.959963984540054
_STREAM_CHUNK = 1 << 18
_DIRECT_CVAR_LIMIT = 600   # largest sample count solved without row pruning


@dataclass(frozen=True)
class MethodResult:
    """Decision, value and Monte Carlo diagnostics of one method run."""

    x: np.ndarray
    value: float
    delta: float | None
    violation_estimate: float | None
    violation_halfwidth: float | None
    meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "method": self.meta.get("method", "unknown"),
            "x": [float(v) for v in self.x],
            "value": float(self.value),
            "delta": self.delta,
            "violation": self.violation_estimate,
            "violation_halfwidth": self.violation_halfwidth,
            "seed": self.meta.get("seed"),
        }


def wilson_halfwidth(successes: int, trials: int) -> float:
    """Half-width of the 95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ParameterError("trials must be positive")
    p = successes / trials
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / trials
    return _Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom


def violation_prob(problem: ProblemInstance, x, tail: TailModel,
                   budget: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of P(loss(x, L) > 1) with a Wilson 95% half-width.

    Streams the sample in fixed chunks, so memory stays flat and the result
    depends only on (tail, seed, budget).
    """
    if budget < 1000:
        raise ParameterError("budget must be at least 1000")
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.m,):
        raise ContractError(f"x has shape {x.shape}, expected ({problem.m},)")
    if (x < -1e-12).any() or (x > problem.h + 1e-12).any():
        raise InputError("x must lie in the box [0, h]^m")
    hits = 0
    for lo in range(0, budget, _STREAM_CHUNK):
        hi = min(lo + _STREAM_CHUNK, budget)
        block = draws_range(tail, seed, lo, hi)
        hits += int((phi_many(problem, x, block) > 1.0).sum())
    return hits / budget, wilson_halfwidth(hits, budget)


def _oracle_directions(m: int) -> np.ndarray:
    return simplex_grid(m, 50) if m <= 3 else quasirandom_simplex(m, 1000)


def ccp_oracle(problem: ProblemInstance, tail: TailModel, delta: float,
               budget: int, seed: int) -> MethodResult:
    """Monte Carlo reference solution of the chance-constrained program.

    One shared sample (common random numbers) serves every direction u of a
    deterministic simplex grid; the maximal feasible scale along u is the
    reciprocal of the empirical (1-delta)-quantile of loss(u, L), taken as
    the order statistic of rank ceil(budget (1-delta)).  Exact up to Monte
    Carlo quantile error and grid resolution.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    if delta * budget < 100:
        raise ParameterError("need delta * budget >= 100 for a stable quantile")
    draws = draws_range(tail, seed, 0, budget)
    rank = math.ceil(budget * (1.0 - delta))
    best_val, best_x = -math.inf, None
    for u in _oracle_directions(problem.m):
        scores = phi_many(problem, u, draws)
        q = float(np.partition(scores, rank - 1)[rank - 1])
        if q <= 0.0:
            x = np.where(u > 0, problem.h, 0.0)
        else:
            x = box_clip(problem, u / q)
        val = float(problem.c @ x)
        if val > best_val:
            best_val, best_x = val, x
    hits = int((phi_many(problem, best_x, draws) > 1.0).sum())
    return MethodResult(
        x=best_x, value=best_val, delta=delta,
        violation_estimate=hits / budget,
        violation_halfwidth=wilson_halfwidth(hits, budget),
        meta={"method": "ccp_oracle", "seed": seed, "budget": budget,
              "quantile_rank": rank},
    )


def _cvar_lp(problem: ProblemInstance, draws: np.ndarray, kept: np.ndarray,
             rows: list, delta: float, n_total: int):
    """Assemble and solve the reduced Rockafellar-Uryasev LP.

    Variables are (x, tau, s_j for j in kept); ``rows`` holds global (j, i)
    pairs, one constraint  x^T A_i L_j - tau - s_j <= 1  each, plus the
    aggregate row  tau + (1/(delta N)) sum_j s_j <= 0.
    """
    m, nvar = problem.m, problem.m + 1 + kept.size
    pos = {int(j): loc for loc, j in enumerate(kept)}
    mat = np.zeros((len(rows) + 1, nvar))
    rhs = np.ones(len(rows) + 1)
    for r, (j, i) in enumerate(rows):
        mat[r, :m] = problem.A[i] @ draws[j]
        mat[r, m] = -1.0
        mat[r, m + 1 + pos[j]] = -1.0
    mat[-1, m] = 1.0
    mat[-1, m + 1:] = 1.0 / (delta * n_total)
    rhs[-1] = 0.0
    lo = np.zeros(nvar)
    lo[m] = -1.0
    hi = np.full(nvar, np.inf)
    hi[:m] = problem.h
    hi[m] = 0.0
    f = np.zeros(nvar)
    f[:m] = problem.c
    res = solve_lp(LinearProgram(objective=f, A=mat, b=rhs, lo=lo, hi=hi))
    if res.status != "optimal":
        raise RareccError("CVaR LP reported infeasible; x = 0 should be feasible")
    return res, pos


def cvar_solve(problem: ProblemInstance, tail: TailModel, delta: float,
               sample_count: int, seed: int) -> MethodResult:
    """Solve the sample-average CVaR relaxation as a linear program.

    For sample counts beyond what a dense simplex tableau tolerates, only
    the scenarios with the largest losses at a reference direction keep
    their slack variable; the pruning is certified after the solve (every
    dropped scenario must satisfy loss <= 1 + tau at the optimum) and
    violated scenarios are re-admitted until the certificate holds, so the
    returned solution is exactly the full-LP optimum.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    if delta * sample_count < 100:
        raise ParameterError("need delta * sample_count >= 100")
    n_total = int(sample_count)
    draws = draws_range(tail, seed, 0, n_total)

    u0 = problem.c / problem.c.sum()
    ref_scores = phi_many(problem, u0, draws)
    if n_total <= _DIRECT_CVAR_LIMIT:
        kept = np.arange(n_total)
    else:
        base = math.ceil(delta * n_total)
        t_keep = min(n_total, base + max(200, base // 4))
        kept = np.sort(np.argpartition(-ref_scores, t_keep - 1)[:t_keep])

    w0 = u0 @ problem.A                       # (d, n)
    rows = [(int(j), int(np.argmax(draws[j] @ w0.T))) for j in kept]
    outer = 0
    while True:
        outer += 1
        res, pos = _cvar_lp(problem, draws, kept, rows, delta, n_total)
        x_star = res.x[:problem.m]
        tau_star = float(res.x[problem.m])
        s_star = res.x[problem.m + 1:]
        w = x_star @ problem.A                # (d, n)
        scores_all = draws @ w.T              # (N, d)
        phi_all = scores_all.max(axis=1)
        tol = 1e-7 * (1.0 + abs(1.0 + tau_star))

        in_kept = np.zeros(n_total, dtype=bool)
        in_kept[kept] = True
        missing = np.flatnonzero(~in_kept & (phi_all > 1.0 + tau_star + tol))
        have = set(rows)
        slack_gap = scores_all[kept] - 1.0 - tau_star - s_star[:, None]   # (T, d)
        extra = [(int(kept[loc]), int(i))
                 for loc, i in np.argwhere(slack_gap > tol)
                 if (int(kept[loc]), int(i)) not in have]
        if missing.size == 0 and not extra:
            break
        if outer > 25:
            raise RareccError("CVaR scenario re-expansion failed to settle")
        kept = np.sort(np.concatenate([kept, missing]))
        rows.extend((int(j), int(np.argmax(scores_all[j]))) for j in missing)
        rows.extend(extra)

    hits = int((phi_all > 1.0).sum())
    return MethodResult(
        x=x_star, value=float(problem.c @ x_star), delta=delta,
        violation_estimate=hits / n_total,
        violation_halfwidth=wilson_halfwidth(hits, n_total),
        meta={"method": "cvar", "seed": seed, "samples": n_total,
              "tau": tau_star, "kept_scenarios": int(kept.size),
              "outer_iterations": outer, "lp_iterations": res.iterations},
    )


def _pareto_max_rows(W: np.ndarray) -> np.ndarray:
    """Rows of W not coordinatewise dominated by another row (y >= 0 makes
    dominated constraint rows redundant)."""
    if W.shape[1] == 1:
        return W.max(axis=0, keepdims=True)
    if W.shape[1] == 2:
        # descending in column 0: a row survives iff its column 1 strictly
        # exceeds every earlier row's column 1
        order = np.lexsort((-W[:, 1], -W[:, 0]))
        S = W[order]
        run = np.maximum.accumulate(S[:, 1])
        keep = np.concatenate([[True], S[1:, 1] > run[:-1]])
        return S[keep]
    order = np.argsort(-W.sum(axis=1), kind="stable")
    kept: list[np.ndarray] = []
    for idx in order:
        row = W[idx]
        if kept and (np.asarray(kept) >= row[None, :]).all(axis=1).any():
            continue
        kept.append(row)
    return np.asarray(kept)


def scenario_solve(problem: ProblemInstance, batch: SampleBatch,
                   radius: float) -> MethodResult:
    """Solve the sampled-constraint program at the given constraint radius.

    maximize c^T y  s.t.  y in [0, h radius]^m  and  y^T A_i L_j <= radius
    for every matrix i and scenario j; radius 1 recovers the plain scenario
    program, the regime radii give its scaled variants.  Dominated rows are
    removed before the LP solve; the optimum is unchanged.
    """
    if batch.count < 1:
        raise ParameterError("scenario batch must be nonempty")
    if not radius > 0:
        raise ParameterError("radius must be positive")
    if batch.n != problem.n:
        raise ContractError("batch dimension disagrees with problem")
    W = np.einsum("imn,jn->jim", problem.A, batch.samples).reshape(-1, problem.m)
    W = _pareto_max_rows(W)
    lp = LinearProgram(
        objective=problem.c,
        A=W,
        b=np.full(W.shape[0], float(radius)),
        lo=np.zeros(problem.m),
        hi=np.full(problem.m, problem.h * radius),
    )
    res = solve_lp(lp)
    if res.status != "optimal":
        raise RareccError("scenario LP unexpectedly infeasible")
    return MethodResult(
        x=res.x, value=float(res.objective), delta=None,
        violation_estimate=None, violation_halfwidth=None,
        meta={"method": "scenario", "seed": batch.seed, "radius": float(radius),
              "scenarios": batch.count, "binding_candidates": int(W.shape[0]),
              "lp_iterations": res.iterations},
    )


def sample_size_rule(delta: float, beta_conf: float, dim: int) -> int:
    """Published scenario-count prescription guaranteeing feasibility with
    probability at least 1 - beta_conf:
    ceil((2/delta) log(1/beta_conf) + 2 dim + (2 dim / delta) log(2/delta)).
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    if not 0.0 < beta_conf < 1.0:
        raise ParameterError("beta_conf must lie in (0, 1)")
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ParameterError("dim must be a positive integer")
    val = (2.0 / delta) * math.log(1.0 / beta_conf) + 2.0 * dim \
        + (2.0 * dim / delta) * math.log(2.0 / delta)
    return int(math.ceil(val))


def _scalar_data(problem: ProblemInstance) -> tuple[float, float]:
    if not (problem.m == 1 and problem.n == 1 and problem.d == 1):
        raise ParameterError("analytic oracle needs a scalar instance (m = n = d = 1)")
    return float(problem.c[0]), float(problem.A[0, 0, 0])


def analytic_ccp_value(problem: ProblemInstance, tail: TailModel, delta: float) -> float:
    """Exact optimal value of the scalar chance-constrained problem."""
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    c0, a = _scalar_data(problem)
    if isinstance(tail, LightTailModel):
        x = 1.0 / (a * light_qinv(tail, math.log(1.0 / delta)))
    else:
        x = delta ** (1.0 / tail.alpha) / a
    return c0 * min(x, problem.h)


def analytic_cvar_value(problem: ProblemInstance, tail: TailModel, delta: float) -> float:
    """Exact optimal value of the scalar CVaR-constrained problem.

    Closed forms exist for the Pareto radius (any alpha) and for the
    exponential marginal (beta = 1); other light tails raise.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    c0, a = _scalar_data(problem)
    if isinstance(tail, HeavyTailModel):
        x = (1.0 - 1.0 / tail.alpha) * delta ** (1.0 / tail.alpha) / a
    else:
        if abs(tail.beta - 1.0) > 1e-12:
            raise ParameterError("analytic CVaR optimum implemented for beta = 1 only")
        x = 1.0 / (a * (math.log(1.0 / delta) + 1.0))
    return c0 * min(x, problem.h)
