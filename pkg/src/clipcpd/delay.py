"""Worst-case detection-delay bound and the region where it is vacuous.

For a single change of size ``delta_jump`` after ``n`` pre-change samples the
bound is the smallest ``d >= 1`` with

    jump**2 >= B(n-1, d'/2) + B(d, d'/2)
               + B(n-1, delta / (2 (n+d+1)(n+d))) + B(d, delta / (2 (n+d+1)(n+d)))

where ``d'`` is the delay confidence and ``delta`` the detector's FPR budget.
The right-hand side is not provably monotone in ``d``, so the search scans
``d = 1, 2, ...`` and returns the first hit (``math.inf`` past ``d_max``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import List, Sequence, TextIO

import numpy as np

from .bound import EstimatorConfig, bound_b

_CHUNK = 65536


@dataclass(frozen=True)
class DelayQuery:
    n: int
    delta_jump: float
    delta_prime: float = 0.1
    cfg: EstimatorConfig = EstimatorConfig()
    fpr_delta: float = 0.1
    d_max: int = 10**6

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.delta_jump > 0:
            raise ValueError(f"delta_jump must be positive, got {self.delta_jump}")
        for name in ("delta_prime", "fpr_delta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.d_max < 1:
            raise ValueError("d_max must be positive")


def delay_rhs(q: DelayQuery, d) -> np.ndarray:
    """Right-hand side of the delay inequality for an array of delays ``d``."""
    d = np.asarray(d, dtype=float)
    cfg, n = q.cfg, q.n
    half = q.delta_prime / 2.0
    alloc = q.fpr_delta / (2.0 * (n + d + 1.0) * (n + d))
    return (
        bound_b(n - 1, half, cfg)
        + bound_b(d, half, cfg)
        + bound_b(np.full_like(d, n - 1), alloc, cfg)
        + bound_b(d, alloc, cfg)
    )


def delay_bound(q: DelayQuery) -> float:
    """Smallest qualifying delay as an int, or ``math.inf`` if none up to ``d_max``."""
    target = q.delta_jump**2
    for lo in range(1, q.d_max + 1, _CHUNK):
        d = np.arange(lo, min(lo + _CHUNK, q.d_max + 1))
        ok = np.nonzero(target >= delay_rhs(q, d))[0]
        if len(ok):
            return int(d[ok[0]])
    return math.inf


def undetectable(q: DelayQuery) -> bool:
    return math.isinf(delay_bound(q))


def heatmap(n_grid: Sequence[int], jump_grid: Sequence[float], template: DelayQuery) -> List[list]:
    """Delay bound on the product grid; rows follow ``n_grid``, columns ``jump_grid``."""
    if not n_grid or not jump_grid:
        raise ValueError("grids must be nonempty")
    return [
        [delay_bound(replace(template, n=int(n), delta_jump=float(j))) for j in jump_grid]
        for n in n_grid
    ]


def write_heatmap_csv(fh: TextIO, n_grid, jump_grid, grid, comment: str = None) -> None:
    """Header row is the jump grid; first column is ``n``; infinite cells are empty."""
    if comment:
        fh.write(f"# {comment}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n"] + [repr(float(j)) for j in jump_grid])
    for n, row in zip(n_grid, grid):
        w.writerow([int(n)] + ["" if math.isinf(v) else int(v) for v in row])
