"""GLR-style comparison detector using empirical means.

Same split scan, budget allocation and restart rule as the clipped-SGD
detector, but each side of a split is summarised by its empirical mean and
the test is

    ||mean(X_r..X_s) - mean(X_{s+1}..X_t)|| > rad(s-r+1) + rad(t-s)

with ``rad`` the sub-gaussian time-uniform radius at level
``delta / (2 (t-r)(t-r+1))``.  This is a stand-in for Improved-GLR built for
side-by-side regret tables, not a reimplementation of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .bound import ConfigError, subgaussian_radius
from .detector import Detection


@dataclass(frozen=True)
class GlrConfig:
    lambda_max: float = 1.0
    dim: int = 1
    delta: float = 0.1
    max_window: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.lambda_max > 0:
            raise ConfigError(f"lambda_max must be positive, got {self.lambda_max}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.dim < 1:
            raise ConfigError(f"dim must be positive, got {self.dim}")


class GlrState:
    """Prefix sums of the samples since the restart anchor ``r``.

    ``prefix[k]`` is the sum of ``X_r .. X_{r+k-1}`` (``prefix[0] = 0``).
    """

    def __init__(self, cfg: GlrConfig):
        self.cfg = cfg
        self.t = -1
        self.num_detections = 0
        self._reset(0)

    def _reset(self, r: int) -> None:
        self.r = r
        self._buf = np.zeros((64, self.cfg.dim))
        self._n = 1

    @property
    def prefix(self) -> np.ndarray:
        return self._buf[: self._n]

    def push(self, x: np.ndarray) -> None:
        if self._n == len(self._buf):
            self._buf = np.vstack([self._buf, np.zeros_like(self._buf)])
        self._buf[self._n] = self._buf[self._n - 1] + x
        self._n += 1
        self.t += 1

    def segment_mean(self, a: int, b: int) -> np.ndarray:
        """Empirical mean of ``X_a .. X_b`` (global, inclusive)."""
        p = self.prefix
        return (p[b - self.r + 1] - p[a - self.r]) / (b - a + 1)


def violating_splits(state: GlrState) -> np.ndarray:
    cfg = state.cfg
    r, t = state.r, state.t
    span = t - r
    if span < 2:
        return np.empty(0, dtype=int)
    lo = r + 1
    if cfg.max_window is not None:
        lo = max(lo, t - cfg.max_window)
    s = np.arange(lo, t)
    p = state.prefix
    n_left = s - r + 1
    n_right = t - s
    left = (p[s - r + 1] - p[0]) / n_left[:, None]
    right = (p[span + 1] - p[s - r + 1]) / n_right[:, None]
    diff = left - right
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    per_test = cfg.delta / (2.0 * span * (span + 1.0))
    rad = subgaussian_radius(np.arange(1, span + 1), per_test, cfg.lambda_max, cfg.dim)
    thr = rad[n_left - 1] + rad[n_right - 1]
    return s[dist > thr]


def glr_step(state: GlrState, x) -> Tuple[bool, Optional[Detection]]:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (state.cfg.dim,):
        raise ConfigError(f"sample has dimension {x.size}, detector expects {state.cfg.dim}")
    state.push(x)
    hits = violating_splits(state)
    if len(hits) == 0:
        return False, None
    det = Detection(
        time=state.t,
        segment_start=state.r,
        witness_split=int(hits[0]),
        localization=(int(hits[0]), int(hits[-1])),
    )
    state.num_detections += 1
    state._reset(state.t + 1)
    return True, det


def run_glr(stream: Iterable, cfg: GlrConfig) -> List[Detection]:
    state = GlrState(cfg)
    out = []
    for x in stream:
        _, det = glr_step(state, x)
        if det is not None:
            out.append(det)
    return out
