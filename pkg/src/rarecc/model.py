"""Problem definition: box-constrained LP data and the max-of-bilinear loss."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InputError


@dataclass(frozen=True)
class ProblemInstance:
    """Data of the profit-maximization problem with a bilinear-max loss.

    Attributes:
        c: objective weights, shape (m,), entries >= 0, not all zero.
        h: box bound > 0; the feasible decisions live in X = [0, h]^m.
        A: stack of d coupling matrices, shape (d, m, n), entries >= 0,
           each matrix having at least one strictly positive entry.
    """

    c: np.ndarray
    h: float
    A: np.ndarray
    m: int = field(init=False)
    n: int = field(init=False)
    d: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = np.asarray(self.A, dtype=float)
        if c.ndim != 1 or A.ndim != 3:
            raise ContractError("c must be a vector and A a (d, m, n) stack")
        d, m, n = A.shape
        if c.shape != (m,):
            raise ContractError(f"c has length {c.shape[0]}, expected m={m}")
        if not (np.isfinite(c).all() and np.isfinite(A).all()):
            raise InputError("c and A must be finite")
        if (c < 0).any() or (A < 0).any():
            raise InputError("c and A must be nonnegative")
        if not (c > 0).any():
            raise InputError("c must have at least one positive entry")
        for i in range(d):
            if not (A[i] > 0).any():
                raise InputError(f"matrix A[{i}] has no positive entry")
        if not (np.isfinite(self.h) and self.h > 0):
            raise InputError("h must be a finite positive number")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        """Build from a config mapping with keys ``c``, ``h``, ``A``."""
        try:
            return cls(c=np.asarray(data["c"], dtype=float),
                       h=float(data["h"]),
                       A=np.asarray(data["A"], dtype=float))
        except KeyError as exc:
            raise ContractError(f"problem config missing key {exc}") from exc


def _check_vector(v, size: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (size,):
        raise ContractError(f"{name} has shape {v.shape}, expected ({size},)")
    if not np.isfinite(v).all():
        raise InputError(f"{name} must be finite")
    if (v < 0).any():
        raise InputError(f"{name} must be nonnegative")
    return v


def phi(problem: ProblemInstance, x, L) -> float:
    """Loss functional: the largest of the d bilinear forms x^T A_i L.

    Nonnegative, convex and positively homogeneous in x, and nondecreasing
    in both arguments because all matrix entries are nonnegative.
    """
    x = _check_vector(x, problem.m, "x")
    L = _check_vector(L, problem.n, "L")
    return float(np.einsum("imn,m,n->i", problem.A, x, L).max())


def phi_many(problem: ProblemInstance, x: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Vectorized loss over a batch of risk vectors, shape (N, n) -> (N,)."""
    w = x @ problem.A            # (d, n)
    return (draws @ w.T).max(axis=1)


def argmax_matrix(problem: ProblemInstance, x: np.ndarray, L: np.ndarray) -> int:
    """Index of the loss-attaining matrix; the smallest index wins ties."""
    vals = np.einsum("imn,m,n->i", problem.A, x, L)
    return int(np.argmax(vals))


def box_clip(problem: ProblemInstance, x) -> np.ndarray:
    """Coordinatewise projection of x onto the box X = [0, h]^m."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.m,):
        raise ContractError(f"x has shape {x.shape}, expected ({problem.m},)")
    if not np.isfinite(x).all():
        raise InputError("x must be finite")
    return np.clip(x, 0.0, problem.h)
