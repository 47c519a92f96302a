"""Online change-point detector built on clipped-SGD chains.

Since the last restart ``r`` the detector keeps one clipped-SGD chain per
candidate start ``s in [r, t]``.  At every step it compares, for every split
``r < s < t``, the anchor chain as it stood after ``X_s`` against the chain
started at ``s + 1``, and fires when the squared distance exceeds the sum of
the two confidence radii.  The budget ``delta`` is split evenly over the
``(t - r)(t - r + 1) / 2`` splits tested in the current segment.  After a
detection every chain is discarded and the anchor moves to ``t + 1``.

Sample indices are 0-based and global: ``t`` is the index of the sample just
consumed, and a :class:`Detection` at ``time=t`` means the test fired on
``X_t``.

Cost per step is ``O((t - r) * dim)`` time and memory; ``max_window`` caps
both by keeping only the most recent chains and anchor snapshots.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .bound import ConfigError, EstimatorConfig, SgdChain, bound_b, step_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorConfig:
    est: EstimatorConfig = field(default_factory=EstimatorConfig)
    delta: float = 0.1
    max_window: Optional[int] = None
    theta0: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.max_window is not None and self.max_window < 2:
            raise ConfigError(f"max_window must be >= 2, got {self.max_window}")
        if self.theta0 is not None and len(self.theta0) != self.est.dim:
            raise ConfigError("theta0 length does not match dim")

    def initial_estimate(self) -> np.ndarray:
        if self.theta0 is None:
            return np.zeros(self.est.dim)
        return np.array(self.theta0, dtype=float)


@dataclass(frozen=True)
class Detection:
    time: int
    segment_start: int
    witness_split: int
    localization: Optional[Tuple[int, int]] = None


def threshold(n1: int, n2: int, span: int, delta: float, cfg: EstimatorConfig) -> float:
    """Firing threshold for a split with ``n1`` left and ``n2`` right steps.

    Both radii are evaluated at the per-split level
    ``delta / (2 * span * (span + 1))``; an empty side gives ``+inf``.
    """
    if span < 1:
        raise ValueError(f"span must be >= 1, got {span}")
    per_test = delta / (2.0 * span * (span + 1.0))
    return float(bound_b(n1, per_test, cfg) + bound_b(n2, per_test, cfg))


def _clip_rows(diff: np.ndarray, lam: float) -> np.ndarray:
    norm = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    scale = np.ones_like(norm)
    big = norm > lam
    scale[big] = lam / norm[big]
    return diff * scale[:, None]


class DetectorState:
    """Mutable state of one detector run.

    ``r`` is the restart anchor and ``t`` the index of the last sample
    consumed (``-1`` before any sample).  Chains are stored row-wise:
    ``estimates[i]`` belongs to start ``starts[0] + i``.  ``anchor_history[k]``
    is the estimate of the anchor chain after consuming ``X_r .. X_{r+k}``.
    """

    def __init__(self, cfg: DetectorConfig):
        self.cfg = cfg
        self.r = 0
        self.t = -1
        self.num_detections = 0
        self.window_truncated = False
        self._reset(0)

    def _reset(self, r: int) -> None:
        d = self.cfg.est.dim
        self.r = r
        self.first_start = r
        self.estimates = np.empty((0, d))
        self.anchor = self.cfg.initial_estimate()
        self.anchor_first = r
        self.anchor_history = np.empty((0, d))

    @property
    def starts(self) -> range:
        return range(self.first_start, self.first_start + len(self.estimates))

    def chain(self, start: int) -> SgdChain:
        """Copy of the live chain begun at ``start``."""
        if start == self.r:
            est = self.anchor
        else:
            i = start - self.first_start
            if not 0 <= i < len(self.estimates):
                raise KeyError(f"no live chain for start {start}")
            est = self.estimates[i]
        return SgdChain(start=start, steps=self.t - start + 1, estimate=est.copy())

    def anchor_snapshot(self, s: int) -> Optional[np.ndarray]:
        """Anchor-chain estimate after ``X_s``, or None if evicted."""
        k = s - self.anchor_first
        if 0 <= k < len(self.anchor_history):
            return self.anchor_history[k]
        return None


def split_indicator(state: DetectorState, s: int) -> bool:
    """Whether the split at ``s`` separates ``X_r..X_s`` from ``X_{s+1}..X_t``.

    Returns False (and sets ``state.window_truncated``) if either side was
    evicted by ``max_window``.
    """
    r, t = state.r, state.t
    if not r < s < t:
        return False
    left = state.anchor_snapshot(s)
    i = s + 1 - state.first_start
    if left is None or not 0 <= i < len(state.estimates):
        state.window_truncated = True
        return False
    right = state.estimates[i]
    dist = float(np.sum((left - right) ** 2))
    span = t - r
    return dist > threshold(s - r, t - s - 1, span, state.cfg.delta, state.cfg.est)


def _advance(state: DetectorState, x: np.ndarray) -> None:
    cfg = state.cfg.est
    t = state.t + 1
    state.t = t
    theta0 = state.cfg.initial_estimate()

    # The anchor chain (start r) is kept apart so it survives window eviction.
    anchor_steps = t - state.r + 1
    state.anchor = state.anchor + step_size(anchor_steps, cfg.gamma) * _clip_rows(
        (x - state.anchor)[None, :], cfg.lam
    )[0]
    if cfg.projection is not None:
        state.anchor = cfg.projection.project(state.anchor)
    state.anchor_history = np.vstack([state.anchor_history, state.anchor[None, :]])

    # Chains for starts r+1..t; the chain for start t enters with steps=0.
    if t > state.r:
        state.estimates = np.vstack([state.estimates, theta0[None, :]])
        if len(state.estimates) == 1:
            state.first_start = t
        steps = t - np.arange(state.first_start, t + 1) + 1
        eta = step_size(steps.astype(float), cfg.gamma)
        state.estimates = state.estimates + eta[:, None] * _clip_rows(
            x[None, :] - state.estimates, cfg.lam
        )
        if cfg.projection is not None:
            state.estimates = cfg.projection.project(state.estimates)

    w = state.cfg.max_window
    if w is not None:
        if len(state.estimates) > w:
            drop = len(state.estimates) - w
            state.estimates = state.estimates[drop:]
            state.first_start += drop
        if len(state.anchor_history) > w:
            drop = len(state.anchor_history) - w
            state.anchor_history = state.anchor_history[drop:]
            state.anchor_first += drop


def violating_splits(state: DetectorState) -> np.ndarray:
    """All ``s in (r, t)`` whose split test fires at the current step, ascending."""
    r, t = state.r, state.t
    span = t - r
    if span < 3:
        return np.empty(0, dtype=int)
    # Splits with both sides non-empty in the radius convention: s in [r+1, t-2].
    s = np.arange(r + 1, t - 1)
    k_left = s - state.anchor_first
    k_right = s + 1 - state.first_start
    ok = (k_left >= 0) & (k_left < len(state.anchor_history))
    ok &= (k_right >= 0) & (k_right < len(state.estimates))
    if not ok.all():
        state.window_truncated = True
    s, k_left, k_right = s[ok], k_left[ok], k_right[ok]
    if len(s) == 0:
        return s
    diff = state.anchor_history[k_left] - state.estimates[k_right]
    dist = np.einsum("ij,ij->i", diff, diff)
    per_test = state.cfg.delta / (2.0 * span * (span + 1.0))
    radii = bound_b(np.arange(0, span), per_test, state.cfg.est)
    thr = radii[s - r] + radii[t - s - 1]
    return s[dist > thr]


def step(state: DetectorState, x) -> Tuple[bool, Optional[Detection]]:
    """Consume one sample; on detection return the event and restart."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (state.cfg.est.dim,):
        raise ConfigError(
            f"sample has dimension {x.size}, detector expects {state.cfg.est.dim}"
        )
    _advance(state, x)
    hits = violating_splits(state)
    if len(hits) == 0:
        return False, None
    det = Detection(
        time=state.t,
        segment_start=state.r,
        witness_split=int(hits[0]),
        localization=(int(hits[0]), int(hits[-1])),
    )
    logger.debug("detection at t=%d (segment start %d)", det.time, det.segment_start)
    state.num_detections += 1
    state._reset(state.t + 1)
    return True, det


class ClippedSgdDetector:
    """Streaming interface around :class:`DetectorState`."""

    def __init__(self, cfg: DetectorConfig):
        self.cfg = cfg
        self.state = DetectorState(cfg)
        self.detections: List[Detection] = []

    def update(self, x) -> Optional[Detection]:
        _, det = step(self.state, x)
        if det is not None:
            self.detections.append(det)
        return det


def run(stream: Iterable, cfg: DetectorConfig) -> List[Detection]:
    """Fold :func:`step` over a finite stream."""
    det = ClippedSgdDetector(cfg)
    for x in stream:
        det.update(x)
    return det.detections
