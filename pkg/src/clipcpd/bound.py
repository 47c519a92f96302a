"""Clipped-SGD online mean estimation and its anytime confidence radius.

The estimator keeps a single running estimate and moves it towards each new
sample by a norm-clipped innovation with step size ``2 / (t + gamma)``.  The
companion function :func:`bound_b` returns a squared-error radius that holds
for every confidence level simultaneously, which is what lets the detector
test many splits at many different confidence levels.

Two constant sets are supported: ``Regime.THEORETICAL`` (the constants the
guarantee is proven with) and ``Regime.EMPIRICAL`` (smaller constants that
work well in practice, the default).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

ArrayLike = Union[float, int, np.ndarray]


class ConfigError(ValueError):
    """Raised for inconsistent estimator or detector configuration."""


class Regime(str, enum.Enum):
    THEORETICAL = "theoretical"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class Ball:
    """Euclidean ball ``{x : ||x - center|| <= radius}``."""

    center: np.ndarray
    radius: float

    def project(self, x: np.ndarray) -> np.ndarray:
        diff = x - self.center
        norm = np.linalg.norm(diff, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(norm > self.radius, self.radius / norm, 1.0)
        return self.center + diff * scale


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]``."""

    lo: np.ndarray
    hi: np.ndarray

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)


Projection = Optional[Union[Ball, Box]]


def gamma_of(regime: Regime, lam: float, sigma: float) -> float:
    """Step-size offset ``gamma`` for the given constant regime."""
    regime = Regime(regime)
    if regime is Regime.THEORETICAL:
        return max(120.0 * lam * sigma * (sigma + 1.0), 320.0 * sigma**2 + 1.0)
    return max(4.0 * lam * sigma * (sigma + 1.0), 8.0 * sigma**2 + 1.0)


@dataclass(frozen=True)
class EstimatorConfig:
    """Scalar hyperparameters of the clipped-SGD estimator.

    ``lam`` defaults to ``2 * g_diam`` and ``gamma`` is always derived from
    ``(regime, lam, sigma)``; it is not settable directly.
    """

    g_diam: float = 1.0
    sigma: float = 1.0
    lam: Optional[float] = None
    regime: Regime = Regime.EMPIRICAL
    dim: int = 1
    projection: Projection = None
    gamma: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.g_diam > 0:
            raise ConfigError(f"g_diam must be positive, got {self.g_diam}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.lam is None:
            object.__setattr__(self, "lam", 2.0 * self.g_diam)
        if not self.lam > 0:
            raise ConfigError(f"lam must be positive, got {self.lam}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(
            self, "gamma", gamma_of(self.regime, self.lam, self.sigma)
        )

    def with_dim(self, dim: int) -> "EstimatorConfig":
        return replace(self, dim=dim)


@dataclass
class SgdChain:
    """One clipped-SGD chain.

    ``start`` is the global index of the first sample consumed and ``steps``
    the number of samples consumed so far.
    """

    start: int
    steps: int
    estimate: np.ndarray

    @classmethod
    def fresh(cls, start: int, cfg: EstimatorConfig, theta0=None) -> "SgdChain":
        est = np.zeros(cfg.dim) if theta0 is None else np.array(theta0, dtype=float)
        return cls(start=start, steps=0, estimate=est)

    def copy(self) -> "SgdChain":
        return SgdChain(self.start, self.steps, self.estimate.copy())


def clip(x: np.ndarray, lam: float) -> np.ndarray:
    """Scale ``x`` to have norm at most ``lam``; the zero vector is fixed."""
    x = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm <= lam:
        return x.copy()
    return x * (lam / norm)


def step_size(t: ArrayLike, gamma: float) -> ArrayLike:
    """``eta_t = 2 / (t + gamma)`` for ``t >= 1``."""
    return 2.0 / (t + gamma)


def update_step(chain: SgdChain, x: np.ndarray, cfg: EstimatorConfig) -> SgdChain:
    """Return the chain after consuming ``x``; the input chain is untouched.

    The estimate moves *towards* the sample:
    ``theta <- proj(theta + eta * clip(x - theta, lam))``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg.dim,) or chain.estimate.shape != (cfg.dim,):
        raise ConfigError(
            f"dimension mismatch: sample {x.shape}, chain {chain.estimate.shape}, "
            f"config dim {cfg.dim}"
        )
    steps = chain.steps + 1
    est = chain.estimate + step_size(steps, cfg.gamma) * clip(x - chain.estimate, cfg.lam)
    if cfg.projection is not None:
        est = cfg.projection.project(est)
    return SgdChain(start=chain.start, steps=steps, estimate=est)


def fold(samples, cfg: EstimatorConfig, start: int = 0, theta0=None) -> SgdChain:
    """Run a fresh chain over ``samples`` in order."""
    chain = SgdChain.fresh(start, cfg, theta0)
    for x in samples:
        chain = update_step(chain, x, cfg)
    return chain


def _log_term(t: np.ndarray, delta: ArrayLike) -> np.ndarray:
    # ln(2 t^2 (t + 1) / delta)
    return np.log(2.0 * t * t * (t + 1.0)) - np.log(delta)


def c_t(t: ArrayLike, delta: ArrayLike, cfg: EstimatorConfig) -> ArrayLike:
    """Leading multiplier of the confidence radius at step ``t >= 1``."""
    tt = np.asarray(t, dtype=float)
    g, s, lam, gam = cfg.g_diam, cfg.sigma, cfg.lam, cfg.gamma
    root = np.sqrt(_log_term(tt, delta))
    if cfg.regime is Regime.THEORETICAL:
        out = np.maximum(1024.0 * s**4 / (g**2 * lam**2), 8.0 * lam * root / (gam**2 * g))
    else:
        out = np.maximum(0.5 * s**4 / (g**2 * lam**2), lam * root / (gam**2 * g))
    return float(out) if out.ndim == 0 else out


def bound_b(t: ArrayLike, delta: ArrayLike, cfg: EstimatorConfig) -> ArrayLike:
    """Squared-error radius ``B(t, delta)`` after ``t`` steps.

    Vectorised over ``t`` and ``delta``.  ``t == 0`` maps to ``+inf`` so a
    test that depends on an empty segment never fires.
    """
    tt = np.asarray(t, dtype=float)
    g, s, lam, gam = cfg.g_diam, cfg.sigma, cfg.lam, cfg.gamma
    empty = tt <= 0
    tp = np.where(empty, 1.0, tt)
    log = _log_term(tp, delta)
    if cfg.regime is Regime.THEORETICAL:
        init = gam**2 * g**2 / (tp + 1.0) ** 2
        var = (16.0 * s**2 / lam + 4.0 * s**2) / (2.0 * (tp + 1.0))
        mart = 96.0 * lam**2 * log * s * (s + 1.0) / ((tp + gam) * np.sqrt(tp + 1.0))
    else:
        init = gam**2 * g**2 / (tp + 1.0)
        var = (2.0 * s**2 / lam + s**2) / (2.0 * (tp + 1.0))
        mart = 2.0 * lam**2 * log * s * (s + 1.0) / ((tp + gam) * np.sqrt(tp + 1.0))
    out = c_t(tp, delta, cfg) * (init + var + mart)
    out = np.where(empty, np.inf, out)
    return float(out) if out.ndim == 0 else out


def subgaussian_radius(t: ArrayLike, delta: ArrayLike, lambda_max: float, dim: int) -> ArrayLike:
    """Time-uniform deviation radius of an empirical mean of ``t`` sub-gaussian samples.

    ``sqrt(2 * lambda_max * (1 + 1/t) * ln((t + 1)**dim / delta) / t)``; used
    by the GLR baseline.  Computed in log space so large ``dim`` does not
    overflow.
    """
    tt = np.asarray(t, dtype=float)
    log = dim * np.log(tt + 1.0) - np.log(delta)
    out = np.sqrt(2.0 * lambda_max * (1.0 + 1.0 / tt) * log / tt)
    return float(out) if out.ndim == 0 else out


__all__ = [
    "Ball",
    "Box",
    "ConfigError",
    "EstimatorConfig",
    "Regime",
    "SgdChain",
    "bound_b",
    "c_t",
    "clip",
    "fold",
    "gamma_of",
    "step_size",
    "subgaussian_radius",
    "update_step",
]
