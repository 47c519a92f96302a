"""Synthetic piecewise-constant-mean streams and data ingestion.

All randomness comes from :class:`numpy.random.Generator` over the PCG64
bit generator, so a ``(scenario, seed)`` pair reproduces a stream bit for
bit on any platform.  Replicate ``i`` of an experiment uses
``seed = base_seed + i``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

WELL_LOG_DIVISOR = 10.0**4.5


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    PARETO = "pareto"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class Scenario:
    """Piecewise-constant mean process.

    ``segments`` holds ``(length, mean)`` pairs; the noise around each mean
    has second moment ``sigma_target ** 2``.
    """

    dim: int
    family: Family
    segments: Tuple[Tuple[int, Tuple[float, ...]], ...]
    sigma_target: float = 1.0
    shape: float = 2.01
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        segs = tuple(
            (int(n), tuple(float(v) for v in np.atleast_1d(m))) for n, m in self.segments
        )
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("scenario needs at least one segment")
        for n, m in segs:
            if n < 1:
                raise ValueError(f"segment length must be positive, got {n}")
            if len(m) != self.dim:
                raise ValueError(f"segment mean {m} does not have dimension {self.dim}")
        for (_, a), (_, b) in zip(segs, segs[1:]):
            if a == b:
                raise ValueError("consecutive segments must have different means")
        if self.family is Family.BERNOULLI:
            if self.dim != 1:
                raise ValueError("Bernoulli scenarios are one-dimensional")
            if any(not 0.0 < m[0] < 1.0 for _, m in segs):
                raise ValueError("Bernoulli means must lie in (0, 1)")
        if self.family is Family.PARETO and self.shape <= 2:
            raise ValueError("Pareto shape must exceed 2 for a finite variance")

    @property
    def horizon(self) -> int:
        return sum(n for n, _ in self.segments)

    @property
    def change_points(self) -> List[int]:
        """0-based index of the first sample of every segment after the first."""
        return list(np.cumsum([n for n, _ in self.segments])[:-1].astype(int))

    @property
    def jump(self) -> float:
        if len(self.segments) < 2:
            return 0.0
        a, b = (np.array(m) for _, m in self.segments[:2])
        return float(np.linalg.norm(b - a))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def pareto_scale_for_variance(shape: float, target_var: float) -> float:
    """Pareto scale ``x_m`` whose variance equals ``target_var``.

    Var = shape * x_m**2 / ((shape - 1)**2 * (shape - 2)).
    """
    if shape <= 2:
        raise ValueError(f"Pareto variance is infinite for shape {shape} <= 2")
    if target_var <= 0:
        raise ValueError(f"target_var must be positive, got {target_var}")
    return (shape - 1.0) * math.sqrt(target_var * (shape - 2.0) / shape)


def _pareto(rng: np.random.Generator, shape: float, scale: float, size) -> np.ndarray:
    # numpy's pareto() is the Lomax law; shift by one for classical Pareto.
    return scale * (1.0 + rng.pareto(shape, size=size))


def _unit_sphere(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def gen_univariate(scenario: Scenario, rng: np.random.Generator) -> np.ndarray:
    if scenario.dim != 1:
        raise ValueError("gen_univariate needs a one-dimensional scenario")
    out = []
    for n, (mean,) in scenario.segments:
        if scenario.family is Family.GAUSSIAN:
            seg = mean + scenario.sigma_target * rng.standard_normal(n)
        elif scenario.family is Family.PARETO:
            a = scenario.shape
            xm = pareto_scale_for_variance(a, scenario.sigma_target**2)
            seg = mean + _pareto(rng, a, xm, n) - a * xm / (a - 1.0)
        else:
            seg = (rng.random(n) < mean).astype(float)
        out.append(seg)
    return np.concatenate(out)[:, None]


def gen_multivariate(scenario: Scenario, rng: np.random.Generator) -> np.ndarray:
    d = scenario.dim
    if d < 2:
        raise ValueError("gen_multivariate needs dim >= 2")
    out = []
    for n, mean in scenario.segments:
        mu = np.asarray(mean)
        if scenario.family is Family.PARETO:
            a = scenario.shape
            xm = math.sqrt(scenario.sigma_target**2 * (a - 2.0) / a)
            radius = _pareto(rng, a, xm, n)
            seg = mu + radius[:, None] * _unit_sphere(rng, n, d)
        elif scenario.family is Family.GAUSSIAN:
            seg = mu + (scenario.sigma_target / math.sqrt(d)) * rng.standard_normal((n, d))
        else:
            raise ValueError("Bernoulli scenarios are one-dimensional")
        out.append(seg)
    return np.concatenate(out)


def generate(scenario: Scenario, seed: int) -> np.ndarray:
    """Stream of shape ``(horizon, dim)`` for one replicate."""
    rng = make_rng(seed)
    if scenario.dim == 1:
        return gen_univariate(scenario, rng)
    return gen_multivariate(scenario, rng)


def alternating(
    family: Family, dim: int, low, high, n_segments: int = 4, seg_len: int = 400, name: str = ""
) -> Scenario:
    segs = tuple((seg_len, low if i % 2 == 0 else high) for i in range(n_segments))
    return Scenario(dim=dim, family=family, segments=segs, name=name)


def scenario_catalog() -> Dict[str, Scenario]:
    """The synthetic benchmark settings: 4 segments of 400 samples each."""
    cat: Dict[str, Scenario] = {}
    for fam, tag in ((Family.PARETO, "pareto"), (Family.GAUSSIAN, "gauss")):
        for d in (1, 32):
            for jump, jtag in ((0.5, "D05"), (1.0, "D1")):
                name = f"{tag}-d{d}-{jtag}"
                high = np.full(d, jump / math.sqrt(d))
                cat[name] = alternating(fam, d, np.zeros(d), high, name=name)
    cat["bern-a"] = alternating(Family.BERNOULLI, 1, 0.7, 0.3, name="bern-a")
    cat["bern-b"] = alternating(Family.BERNOULLI, 1, 0.85, 0.15, name="bern-b")
    return cat


def load_well_log(path, divisor: float = WELL_LOG_DIVISOR) -> np.ndarray:
    """Read one value per line and divide by ``divisor``; blank lines are skipped."""
    path = Path(path)
    values = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise DataError(f"{path}:{lineno}: cannot parse {text!r} as a number") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{lineno}: non-finite value {text!r}")
            values.append(v / divisor)
    if not values:
        raise DataError(f"{path}: no data")
    return np.array(values)[:, None]


def load_stream_csv(path, dim: int = None) -> np.ndarray:
    """Read a stream CSV with header ``t,x_0,...,x_{d-1}``."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if not header or header[0].strip() != "t":
        raise DataError(f"{path}:1: expected header starting with 't', got {header!r}")
    d = len(header) - 1
    if d < 1:
        raise DataError(f"{path}:1: no value columns")
    if dim is not None and dim != d:
        raise DataError(f"{path}: file has dimension {d} but dim={dim} was requested")
    out = np.empty((len(body), d))
    for i, row in enumerate(body):
        if len(row) != d + 1:
            raise DataError(f"{path}:{i + 2}: expected {d + 1} fields, got {len(row)}")
        try:
            out[i] = [float(v) for v in row[1:]]
        except ValueError:
            raise DataError(f"{path}:{i + 2}: non-numeric value in {row!r}") from None
        if not np.all(np.isfinite(out[i])):
            raise DataError(f"{path}:{i + 2}: non-finite value")
    return out


def write_stream_csv(path, stream: Sequence) -> None:
    stream = np.atleast_2d(np.asarray(stream, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x_{j}" for j in range(stream.shape[1])])
        for t, row in enumerate(stream):
            w.writerow([t] + [repr(float(v)) for v in row])
