"""Risk-vector generators and their exact tail functions.

Two parametric families are implemented:

* Light tails: Weibull(beta) marginals tied together by a Gumbel-Hougaard
  survival copula with dependence theta >= 1, so the joint survival is
  exactly ``P(L > x) = exp(-copula_exponent(x))``.  Dependent draws use the
  Kanter representation of a positive stable variable.
* Heavy tails: polar construction L = R * Theta with R standard Pareto of
  index alpha and Theta drawn from a finite set of atoms on the L1 simplex,
  independent of R.

Draws are generated in fixed-size blocks, each block from its own
counter-keyed Philox stream, so the value of draw ``i`` depends only on
(model, seed, i).  Batches can therefore be produced in parallel shards
and merged in any order without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InputError, ParameterError

_MASK64 = (1 << 64) - 1
_BLOCK = 4096          # draws per Philox stream; fixed, part of the format


@dataclass(frozen=True)
class LightTailModel:
    """Weibull(beta) marginals with Gumbel-Hougaard survival dependence.

    ``theta = 1`` gives independent coordinates, ``theta = math.inf`` the
    comonotone (all coordinates equal) case.
    """

    n: int
    beta: float
    theta: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("dimension n must be >= 1")
        if not self.beta > 0:
            raise ParameterError("beta must be positive")
        if not self.theta >= 1:
            raise ParameterError("theta must be >= 1")


@dataclass(frozen=True)
class HeavyTailModel:
    """Pareto(alpha) radius with an atomic angular law on the L1 simplex."""

    n: int
    alpha: float
    weights: np.ndarray
    atoms: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("dimension n must be >= 1")
        if not self.alpha > 1:
            raise ParameterError("alpha must exceed 1")
        w = np.asarray(self.weights, dtype=float)
        pts = np.asarray(self.atoms, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ParameterError("at least one angular atom is required")
        if pts.shape != (w.size, self.n):
            raise ContractError(f"atoms must have shape ({w.size}, {self.n})")
        if (w <= 0).any():
            raise ParameterError("atom weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError("atom weights must sum to 1 within 1e-12")
        if (pts < 0).any():
            raise ParameterError("atoms must be nonnegative")
        if np.abs(pts.sum(axis=1) - 1.0).max() > 1e-9:
            raise ParameterError("atoms must lie on the L1 unit simplex")
        # renormalize rows so |L|_1 == R holds to machine precision
        pts = pts / pts.sum(axis=1, keepdims=True)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "atoms", pts)

    @classmethod
    def from_pairs(cls, n: int, alpha: float, pairs) -> "HeavyTailModel":
        """Build from ``[(weight, atom_coords), ...]`` pairs."""
        w = np.array([p[0] for p in pairs], dtype=float)
        pts = np.array([p[1] for p in pairs], dtype=float)
        return cls(n=n, alpha=alpha, weights=w, atoms=pts)


TailModel = LightTailModel | HeavyTailModel


@dataclass(frozen=True)
class SampleBatch:
    """A matrix of i.i.d. draws (one per row) plus the generating seed."""

    samples: np.ndarray
    seed: int

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]


def _block_rng(seed: int, block: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, block & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _stable_oneside(exponent: float, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Kanter construction of a positive stable variable S with
    ``E[exp(-t S)] = exp(-t**exponent)``, from V ~ U(0, pi), W ~ Exp(1)."""
    a = exponent
    return (np.sin(a * v) / np.sin(v) ** (1.0 / a)) * (np.sin((1.0 - a) * v) / w) ** ((1.0 - a) / a)


def _light_block(model: LightTailModel, seed: int, block: int) -> np.ndarray:
    rng = _block_rng(seed, block)
    n, beta, theta = model.n, model.beta, model.theta
    if math.isinf(theta):
        e = rng.standard_exponential(_BLOCK)
        return np.repeat((e ** (1.0 / beta))[:, None], n, axis=1)
    e = rng.standard_exponential((_BLOCK, n))
    if theta < 1.0 + 1e-9:
        # near-independent: the stable factor degenerates, skip it
        return e ** (1.0 / beta)
    v = rng.uniform(0.0, np.pi, _BLOCK)
    w = rng.standard_exponential(_BLOCK)
    s = _stable_oneside(1.0 / theta, v, w)
    return (e / s[:, None]) ** (1.0 / (theta * beta))


def _heavy_block(model: HeavyTailModel, seed: int, block: int) -> np.ndarray:
    rng = _block_rng(seed, block)
    u = rng.random(_BLOCK)
    r = u ** (-1.0 / model.alpha)
    pick = rng.random(_BLOCK)
    idx = np.searchsorted(np.cumsum(model.weights), pick, side="right")
    idx = np.minimum(idx, model.weights.size - 1)
    return r[:, None] * model.atoms[idx]


def _heavy_radii_block(model: HeavyTailModel, seed: int, block: int) -> np.ndarray:
    # consumes the stream exactly like _heavy_block but returns radii only
    rng = _block_rng(seed, block)
    u = rng.random(_BLOCK)
    rng.random(_BLOCK)
    return u ** (-1.0 / model.alpha)


def draws_range(model: TailModel, seed: int, start: int, stop: int) -> np.ndarray:
    """Draws with indices [start, stop); bit-identical however the range is split."""
    if start < 0 or stop < start:
        raise ParameterError("invalid draw range")
    block_fn = _light_block if isinstance(model, LightTailModel) else _heavy_block
    out = np.empty((stop - start, model.n))
    pos = 0
    for b in range(start // _BLOCK, (stop + _BLOCK - 1) // _BLOCK if stop > start else 0):
        blk = block_fn(model, seed, b)
        lo = max(start - b * _BLOCK, 0)
        hi = min(stop - b * _BLOCK, _BLOCK)
        out[pos:pos + hi - lo] = blk[lo:hi]
        pos += hi - lo
    return out


def heavy_radii_range(model: HeavyTailModel, seed: int, start: int, stop: int) -> np.ndarray:
    """Radii of the heavy draws with indices [start, stop)."""
    out = np.empty(stop - start)
    pos = 0
    for b in range(start // _BLOCK, (stop + _BLOCK - 1) // _BLOCK if stop > start else 0):
        blk = _heavy_radii_block(model, seed, b)
        lo = max(start - b * _BLOCK, 0)
        hi = min(stop - b * _BLOCK, _BLOCK)
        out[pos:pos + hi - lo] = blk[lo:hi]
        pos += hi - lo
    return out


def _checked_count(count) -> int:
    if not isinstance(count, (int, np.integer)) or count < 1:
        raise ParameterError("count must be a positive integer")
    return int(count)


def sample_light(model: LightTailModel, seed: int, count: int) -> SampleBatch:
    """Draw ``count`` i.i.d. light-tailed risk vectors.

    Construction: for theta > 1 draw a positive stable S with exponent
    1/theta and unit exponentials E_1..E_n, set L_i = (E_i / S)^(1/(theta
    beta)); for theta = 1 the coordinates are independent Weibull(beta);
    for theta = inf one shared exponential drives all coordinates.
    """
    count = _checked_count(count)
    return SampleBatch(samples=draws_range(model, seed, 0, count), seed=seed)


def sample_heavy(model: HeavyTailModel, seed: int, count: int) -> SampleBatch:
    """Draw ``count`` i.i.d. heavy-tailed risk vectors L = R * Theta."""
    count = _checked_count(count)
    return SampleBatch(samples=draws_range(model, seed, 0, count), seed=seed)


def sample_tail(model: TailModel, seed: int, count: int) -> SampleBatch:
    """Dispatch to the light or heavy sampler according to the model type."""
    if isinstance(model, LightTailModel):
        return sample_light(model, seed, count)
    return sample_heavy(model, seed, count)


def copula_exponent(model: LightTailModel, x: np.ndarray) -> float:
    """Gumbel-Hougaard exponent ``(sum_i x_i^(beta theta))^(1/theta)``.

    For theta = inf the limit ``max_i x_i^beta`` is used.  Homogeneous of
    degree beta; the joint survival of the light model is exp(-value).
    """
    x = np.asarray(x, dtype=float)
    if math.isinf(model.theta):
        return float(np.max(x) ** model.beta)
    return float(np.sum(x ** (model.beta * model.theta)) ** (1.0 / model.theta))


def joint_tail_light(model: LightTailModel, x) -> float:
    """Exact joint survival P(L > x) = exp(-copula_exponent(x))."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ContractError(f"x has shape {x.shape}, expected ({model.n},)")
    if not np.isfinite(x).all() or (x < 0).any():
        raise InputError("x must be finite and nonnegative")
    return math.exp(-copula_exponent(model, x))


def light_qinv(model: LightTailModel, u: float) -> float:
    """Inverse of the tail-rate scale q(r) = r^beta, i.e. u^(1/beta)."""
    if not u > 0:
        raise ParameterError("u must be positive")
    return float(u) ** (1.0 / model.beta)


def heavy_fbar_inv(model: HeavyTailModel, delta: float) -> float:
    """Radius threshold with tail mass delta: delta^(-1/alpha) (delta in (0, 1])."""
    if not 0.0 < delta <= 1.0:
        raise ParameterError("delta must lie in (0, 1]")
    return float(delta) ** (-1.0 / model.alpha)


def tail_radius(model: TailModel, delta: float) -> float:
    """The regime's normalizing radius at risk level delta."""
    if isinstance(model, LightTailModel):
        return light_qinv(model, math.log(1.0 / delta))
    return heavy_fbar_inv(model, delta)


def dump_batch_csv(batch: SampleBatch, path) -> None:
    """Write a batch as CSV: a ``# seed=`` comment, a header, one draw per row."""
    n = batch.n
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# seed={batch.seed}\n")
        fh.write(",".join(f"L{i + 1}" for i in range(n)) + "\n")
        for row in batch.samples:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_batch_csv(path) -> SampleBatch:
    """Read a batch written by :func:`dump_batch_csv`."""
    seed = 0
    rows = []
    with open(path, "r") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line.lstrip("# ").partition("=")
                if key.strip() == "seed":
                    seed = int(val)
                continue
            if line.startswith("L1"):
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ContractError(f"no sample rows found in {path}")
    return SampleBatch(samples=np.asarray(rows, dtype=float), seed=seed)
