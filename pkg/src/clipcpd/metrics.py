"""Evaluation metrics for detection sequences against known change points.

Times are 0-based sample indices, a change point is the index of the first
sample with the new mean, and a detection at ``t`` means the detector fired
on sample ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class GroundTruth:
    horizon: int
    change_points: Tuple[int, ...]

    def __post_init__(self) -> None:
        cps = tuple(int(c) for c in self.change_points)
        object.__setattr__(self, "change_points", cps)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("change points must be strictly increasing")
        if cps and (cps[0] < 1 or cps[-1] > self.horizon):
            raise ValueError("change points must lie within the horizon")


@dataclass
class RunReport:
    detections: List[int]
    false_flags: List[bool]
    delay: Optional[int]
    regret: int
    seed: Optional[int] = None

    @property
    def num_false(self) -> int:
        return sum(self.false_flags)


def _check_sorted(detections: Sequence[int]) -> None:
    if any(b < a for a, b in zip(detections, detections[1:])):
        raise ValueError("detections must be sorted")


def false_positive_flags(detections: Sequence[int], truth: GroundTruth) -> List[bool]:
    """Flag each detection that has no change point since the previous one."""
    _check_sorted(detections)
    cps = np.asarray(truth.change_points, dtype=int)
    flags = []
    prev = 0
    for t in detections:
        hit = np.any((cps > prev) & (cps <= t))
        flags.append(not bool(hit))
        prev = t
    return flags


def fpr(reports: Sequence[RunReport]) -> float:
    """Mean over runs of the false fraction of detections (0 for silent runs)."""
    if not reports:
        raise ValueError("fpr needs at least one report")
    total = 0.0
    for rep in reports:
        if rep.false_flags:
            total += sum(rep.false_flags) / len(rep.false_flags)
    return total / len(reports)


def single_change_delay(detections: Sequence[int], change_at: int) -> Optional[int]:
    after = [t for t in detections if t > change_at]
    if not after:
        return None
    return min(after) - change_at


def regret(detections: Sequence[int], truth: GroundTruth) -> int:
    """``sum_{t=1}^{T} |#detections <= t  -  #changes <= t|``."""
    ts = np.arange(1, truth.horizon + 1)
    det = np.searchsorted(np.sort(np.asarray(detections, dtype=int)), ts, side="right")
    cps = np.searchsorted(np.asarray(truth.change_points, dtype=int), ts, side="right")
    return int(np.abs(det - cps).sum())


def nearest_rank(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile, ``q`` in [0, 1]."""
    xs = sorted(values)
    if not xs:
        raise ValueError("percentile of empty sequence")
    k = max(1, math.ceil(q * len(xs)))
    return xs[k - 1]


def aggregate(values: Sequence[float]) -> Tuple[float, float, float]:
    """(median, 5th percentile, 95th percentile), nearest-rank."""
    if len(values) == 0:
        raise ValueError("aggregate needs at least one value")
    return nearest_rank(values, 0.5), nearest_rank(values, 0.05), nearest_rank(values, 0.95)


def report(detections: Sequence[int], truth: GroundTruth, seed: Optional[int] = None) -> RunReport:
    dets = sorted(int(t) for t in detections)
    delay = None
    if len(truth.change_points) == 1:
        delay = single_change_delay(dets, truth.change_points[0])
    return RunReport(
        detections=dets,
        false_flags=false_positive_flags(dets, truth),
        delay=delay,
        regret=regret(dets, truth),
        seed=seed,
    )
