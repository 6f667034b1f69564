"""Tail-rate functions and the small-risk limit programs.

The light-tail limit program maximizes c^T y over {y >= 0 : J(y) >= 1},
where J aggregates the decay rate I of the loss tail; the heavy-tail limit
program maximizes c^T y over {y >= 0 : sum_k w_k phi(y, theta_k)^alpha <= 1}.
Both feasible sets are scale-star-shaped thanks to the homogeneity of the
constraint functions, so each program reduces to a one-dimensional ray
problem per direction of the unit simplex; a deterministic grid scan plus
Nelder-Mead refinement solves the reduced problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import search
from .errors import (ContractError, InfeasibleError, InputError,
                     ParameterError, UnboundedError)
from .model import ProblemInstance, box_clip
from .sampler import (HeavyTailModel, LightTailModel, TailModel,
                      copula_exponent, tail_radius)

#: Distinguished value for "the rate constraint can never bind" (b = 0 or
#: zero loss rows).  Callers must branch on it; it never enters arithmetic.
INFEASIBLE_RATE = math.inf


def is_infeasible_rate(value: float) -> bool:
    return math.isinf(value)


@dataclass(frozen=True)
class RateFunction:
    """Decay-rate evaluator for the light-tail family.

    mode "closed" uses the explicit dual-norm formula; mode "numeric" solves
    the inner minimization by projected gradient over the scaled simplex.
    The two must agree; tests exploit that as a cross-check.
    """

    model: LightTailModel
    mode: str = "closed"

    def __post_init__(self):
        if self.mode not in ("closed", "numeric"):
            raise ParameterError(f"unknown rate mode {self.mode!r}")

    @property
    def gamma(self) -> float:
        return self.model.beta * self.model.theta


@dataclass(frozen=True)
class LimitSolution:
    """Optimizer of a limit program plus solve diagnostics."""

    y_star: np.ndarray
    value: float
    residual: float
    method: str

    def to_json_dict(self) -> dict:
        return {
            "y_star": [float(v) for v in self.y_star],
            "value": float(self.value),
            "residual": float(self.residual),
            "method": self.method,
        }


def lambda_eval(model: LightTailModel, x) -> float:
    """Dependence exponent of the light model, homogeneous of degree beta."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ContractError(f"x has shape {x.shape}, expected ({model.n},)")
    if not np.isfinite(x).all() or (x < 0).any():
        raise InputError("x must be finite and nonnegative")
    return copula_exponent(model, x)


def _check_b(b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise ContractError(f"b has shape {b.shape}, expected ({n},)")
    if not np.isfinite(b).all() or (b < 0).any():
        raise InputError("b must be finite and nonnegative")
    return b


def _rate_closed(model: LightTailModel, b: np.ndarray) -> float:
    beta, theta = model.beta, model.theta
    if math.isinf(theta):
        norm = b.sum()
    else:
        gamma = beta * theta
        if gamma <= 1.0:
            norm = b.max()
        else:
            p = gamma / (gamma - 1.0)
            norm = float(np.sum(b ** p) ** (1.0 / p))
    return norm ** (-beta)


def _project_scaled_simplex(v: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0 : b^T x = 1} (breakpoint scan)."""
    pos = b > 0
    bp, vp = b[pos], v[pos]
    ratios = vp / bp
    order = np.argsort(-ratios, kind="stable")
    bs, vs = bp[order], vp[order]
    cum_bv = np.cumsum(bs * vs)
    cum_bb = np.cumsum(bs * bs)
    mu = None
    for k in range(bs.size):
        cand = (cum_bv[k] - 1.0) / cum_bb[k]
        upper = ratios[order][k]
        lower = ratios[order][k + 1] if k + 1 < bs.size else -math.inf
        if lower <= cand <= upper + 1e-15:
            mu = cand
            break
    if mu is None:
        mu = (cum_bv[-1] - 1.0) / cum_bb[-1]
    x = np.maximum(v - mu * b, 0.0)
    x[~pos] = np.maximum(v[~pos], 0.0)
    return x


def _rate_numeric(model: LightTailModel, b: np.ndarray) -> float:
    """Inner minimization of lambda over {b^T x >= 1, x >= 0}.

    Candidate vertices e_i / b_i are always evaluated; a projected-gradient
    descent from the analytic center handles the smooth regime.
    """
    if math.isinf(model.theta):
        # comonotone limit: equalize the active coordinates
        pos = b > 0
        x = np.zeros_like(b)
        x[pos] = 1.0 / b[pos].sum()
        return copula_exponent(model, x)
    beta, theta = model.beta, model.theta
    gamma = beta * theta
    best = math.inf
    for i in np.flatnonzero(b > 0):
        x = np.zeros_like(b)
        x[i] = 1.0 / b[i]
        best = min(best, copula_exponent(model, x))

    x = b / float(b @ b)
    fx = copula_exponent(model, x)
    for _ in range(800):
        s = np.sum(x ** gamma)
        if s <= 0:
            break
        grad = np.zeros_like(x)
        pos = x > 0
        grad[pos] = (gamma / theta) * s ** (1.0 / theta - 1.0) * x[pos] ** (gamma - 1.0)
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        step = 0.5 / gnorm
        improved = False
        for _ in range(40):
            cand = _project_scaled_simplex(x - step * grad, b)
            fc = copula_exponent(model, cand)
            if fc < fx - 1e-16:
                x, fx, improved = cand, fc, True
                break
            step *= 0.5
        if not improved:
            break
    return min(best, fx)


def rate_I(rf: RateFunction, b) -> float:
    """Decay rate of P(b^T L > r): inf of lambda over {x >= 0 : b^T x >= 1}.

    Returns :data:`INFEASIBLE_RATE` for b = 0 (the constraint set is empty).
    Scales as I(t b) = t^(-beta) I(b).
    """
    b = _check_b(b, rf.model.n)
    if not (b > 0).any():
        return INFEASIBLE_RATE
    if rf.mode == "closed":
        return _rate_closed(rf.model, b)
    return _rate_numeric(rf.model, b)


def rate_J(rf: RateFunction, problem: ProblemInstance, y) -> float:
    """Aggregate rate min_i I(y^T A_i): the loss tail decays at speed J(y) q(r).

    Returns :data:`INFEASIBLE_RATE` when every y^T A_i vanishes.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (problem.m,):
        raise ContractError(f"y has shape {y.shape}, expected ({problem.m},)")
    if not np.isfinite(y).all() or (y < 0).any():
        raise InputError("y must be finite and nonnegative")
    if rf.model.n != problem.n:
        raise ContractError("rate function and problem disagree on n")
    rows = y @ problem.A          # (d, n)
    best = INFEASIBLE_RATE
    for b in rows:
        if not (b > 0).any():
            continue
        val = rate_I(rf, b)
        if is_infeasible_rate(best) or val < best:
            best = val
    return best


def angular_moment(model: HeavyTailModel, problem: ProblemInstance, y) -> float:
    """Limit tail ratio sum_k w_k phi(y, theta_k)^alpha of the heavy model."""
    y = np.asarray(y, dtype=float)
    v = np.einsum("imn,kn->kim", problem.A, model.atoms)   # (K, d, m)
    phis = (v @ y).max(axis=1)
    return float(np.sum(model.weights * phis ** model.alpha))


def solve_lt_limit(rf: RateFunction, problem: ProblemInstance) -> LimitSolution:
    """Maximize c^T y subject to y >= 0 and J(y) >= 1.

    Since J(t u) = t^(-beta) J(u), the best feasible scale along direction u
    is t(u) = J(u)^(1/beta); the solver maximizes t(u) c^T u over the unit
    simplex with a deterministic multi-start scheme.
    """
    if rf.model.n != problem.n:
        raise ContractError("rate function and problem disagree on n")
    c, beta, m = problem.c, rf.model.beta, problem.m

    def value_fn(u):
        j = rate_J(rf, problem, u)
        cu = float(c @ u)
        if is_infeasible_rate(j):
            return math.inf if cu > 0 else -math.inf
        return j ** (1.0 / beta) * cu

    u, val = search.maximize_over_simplex(value_fn, m)
    if math.isinf(val):
        raise UnboundedError("a profitable direction carries no tail risk")
    if not val > 0:
        raise InfeasibleError("no direction admits a positive feasible scale")
    t = rate_J(rf, problem, u) ** (1.0 / beta)
    y = t * u
    residual = abs(rate_J(rf, problem, y) - 1.0)
    return LimitSolution(y_star=y, value=float(c @ y), residual=residual,
                         method="ray-search")


def solve_ht_limit(model: HeavyTailModel, problem: ProblemInstance) -> LimitSolution:
    """Maximize c^T y subject to y >= 0 and sum_k w_k phi(y, theta_k)^alpha <= 1.

    The constraint function g(y) = (sum_k w_k phi(y, theta_k)^alpha)^(1/alpha)
    is convex and degree-1 homogeneous, so the optimum is the best of
    c^T u / g(u) over simplex directions.
    """
    if model.n != problem.n:
        raise ContractError("tail model and problem disagree on n")
    c, alpha, m = problem.c, model.alpha, problem.m
    v = np.einsum("imn,kn->kim", problem.A, model.atoms)   # (K, d, m)
    w = model.weights

    def g(u):
        phis = (v @ u).max(axis=1)
        return float(np.sum(w * phis ** alpha) ** (1.0 / alpha))

    def value_fn(u):
        gu = g(u)
        cu = float(c @ u)
        if gu <= 0.0:
            return math.inf if cu > 0 else -math.inf
        return cu / gu

    u, val = search.maximize_over_simplex(value_fn, m)
    if math.isinf(val):
        raise UnboundedError("the angular loss vanishes along a profitable direction")
    if not val > 0:
        raise InfeasibleError("no direction admits a positive feasible scale")
    y = u / g(u)
    residual = abs(angular_moment(model, problem, y) - 1.0)
    return LimitSolution(y_star=y, value=float(c @ y), residual=residual,
                         method="ray-search")


def limit_to_decision(sol: LimitSolution, tail: TailModel, delta: float,
                      eta: float, problem: ProblemInstance) -> np.ndarray:
    """Scale a limit solution back to a concrete decision at risk level delta.

    Returns (1 - eta) * y_star / r(delta) clipped to the box X, where
    r(delta) is the regime's normalizing radius; eta > 0 trades a fixed
    share of profit for asymptotic feasibility headroom.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must lie in (0, 1)")
    if not 0.0 <= eta < 1.0:
        raise ParameterError("eta must lie in [0, 1)")
    r = tail_radius(tail, delta)
    return box_clip(problem, (1.0 - eta) * sol.y_star / r)
