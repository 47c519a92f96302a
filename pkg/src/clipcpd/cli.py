"""Command-line entry point: ``clipcpd {simulate,detect,delay-heatmap,list-scenarios}``.

Settings resolve as command-line flag, then ``--config`` YAML file, then
library default.  Exit status is 0 on success, 1 for usage errors and 2 for
data errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Optional

import yaml

from .bound import ConfigError, EstimatorConfig, Regime
from .delay import DelayQuery, heatmap, write_heatmap_csv
from .experiment import ExperimentSpec, config_comment, detect_stream, simulate, write_outputs
from .streams import DataError, load_stream_csv, load_well_log, scenario_catalog

log = logging.getLogger("clipcpd")

EXIT_USAGE = 1
EXIT_DATA = 2

G_MISSING = (
    "--g (diameter of the mean set) is required: the benchmark setting is "
    "ambiguous between G=1 and G=12, so no default is assumed"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str):
    return [int(v) for v in text.split(",") if v.strip()]


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--g", type=float, dest="g_diam", help="diameter G of the mean set (required)")
    p.add_argument("--sigma", type=float, help="second-moment bound (default 1)")
    p.add_argument("--delta", type=float, help="FPR budget (default 0.1)")
    p.add_argument("--regime", choices=[r.value for r in Regime], help="constant set (default empirical)")
    p.add_argument("--lambda", type=float, dest="lam", help="clipping level (default 2G)")
    p.add_argument("--max-window", type=int, help="cap on chains kept per segment")
    p.add_argument("--config", type=Path, help="YAML file with default settings")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clipcpd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo replicates of a catalogued scenario")
    p.add_argument("--scenario")
    p.add_argument("--detector", choices=["clipped", "glr"])
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int, dest="base_seed")
    p.add_argument("--lambda-max", type=float, help="GLR covariance scale")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--out", type=Path, help="output directory")
    _add_estimator_flags(p)

    p = sub.add_parser("detect", help="run a detector over a stream file")
    p.add_argument("input", type=Path)
    p.add_argument("--well-log", action="store_true", help="input is one value per line")
    p.add_argument("--dim", type=int)
    p.add_argument("--detector", choices=["clipped", "glr"])
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--out", type=Path, help="output CSV (default stdout)")
    _add_estimator_flags(p)

    p = sub.add_parser("delay-heatmap", help="worst-case delay bound on an (n, jump) grid")
    p.add_argument("--n-grid", type=_ints, default=[100, 200, 500, 1000, 2000])
    p.add_argument("--jump-grid", type=_floats, default=[0.5, 1.0, 2.0, 5.0, 10.0])
    p.add_argument("--delta-prime", type=float, default=0.1)
    p.add_argument("--d-max", type=int, default=10**6)
    p.add_argument("--out", type=Path)
    _add_estimator_flags(p)

    sub.add_parser("list-scenarios", help="print the scenario catalogue")
    return parser


def _resolve(args: argparse.Namespace, keys, defaults: dict) -> dict:
    file_cfg = {}
    if getattr(args, "config", None) is not None:
        try:
            file_cfg = yaml.safe_load(args.config.read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError(f"config {args.config} must be a mapping")
        unknown = set(file_cfg) - set(keys)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is None:
            v = file_cfg.get(k, defaults.get(k))
        out[k] = v
    if out.get("g_diam") is None:
        raise UsageError(G_MISSING)
    return out


SPEC_KEYS = (
    "scenario", "g_diam", "detector", "sigma", "delta", "regime", "max_window",
    "lam", "lambda_max", "replicates", "base_seed", "jobs",
)
SPEC_DEFAULTS = {
    "detector": "clipped", "sigma": 1.0, "delta": 0.1, "regime": "empirical",
    "replicates": 30, "base_seed": 0, "jobs": 1,
}


def cmd_simulate(args) -> int:
    cfg = _resolve(args, SPEC_KEYS + ("out",), SPEC_DEFAULTS)
    out = cfg.pop("out", None)
    if cfg["scenario"] is None:
        raise UsageError("--scenario is required")
    if out is None:
        raise UsageError("--out is required")
    try:
        spec = ExperimentSpec(**cfg)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    results = simulate(spec)
    row = write_outputs(spec, results, Path(out))
    print(", ".join(f"{k}={v}" for k, v in row.items()))
    return 0


def cmd_detect(args) -> int:
    keys = ("g_diam", "detector", "sigma", "delta", "regime", "max_window", "lam", "lambda_max")
    cfg = _resolve(args, keys, SPEC_DEFAULTS)
    try:
        if args.well_log:
            stream = load_well_log(args.input)
            if args.dim not in (None, 1):
                raise DataError(f"well-log data is one-dimensional, got --dim {args.dim}")
        else:
            stream = load_stream_csv(args.input, dim=args.dim)
    except OSError as exc:
        raise DataError(str(exc)) from None
    dim = stream.shape[1]
    dets = detect_stream(stream, dim, **cfg)
    resolved = dict(cfg, input=str(args.input), well_log=args.well_log, dim=dim)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        fh.write(config_comment(resolved) + "\n")
        w = csv.writer(fh)
        w.writerow(["time", "segment_start", "loc_lo", "loc_hi", "witness_split"])
        for d in dets:
            lo, hi = d.localization if d.localization else ("", "")
            w.writerow([d.time, d.segment_start, lo, hi, d.witness_split])
    finally:
        if fh is not sys.stdout:
            fh.close()
    log.info("%d detections over %d samples", len(dets), len(stream))
    return 0


def cmd_delay_heatmap(args) -> int:
    keys = ("g_diam", "sigma", "delta", "regime", "lam")
    cfg = _resolve(args, keys, SPEC_DEFAULTS)
    est = EstimatorConfig(
        g_diam=cfg["g_diam"], sigma=cfg["sigma"], lam=cfg["lam"], regime=Regime(cfg["regime"])
    )
    template = DelayQuery(
        n=2, delta_jump=1.0, delta_prime=args.delta_prime, cfg=est,
        fpr_delta=cfg["delta"], d_max=args.d_max,
    )
    grid = heatmap(args.n_grid, args.jump_grid, template)
    resolved = dict(cfg, delta_prime=args.delta_prime, d_max=args.d_max)
    comment = config_comment(resolved)[2:]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_heatmap_csv(fh, args.n_grid, args.jump_grid, grid, comment=comment)
    else:
        write_heatmap_csv(sys.stdout, args.n_grid, args.jump_grid, grid, comment=comment)
    return 0


def cmd_list_scenarios(args) -> int:
    for name, sc in scenario_catalog().items():
        print(f"{name}\t{sc.family.value}\td={sc.dim}\tjump={sc.jump:g}\tT={sc.horizon}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "detect": cmd_detect,
    "delay-heatmap": cmd_delay_heatmap,
    "list-scenarios": cmd_list_scenarios,
}


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, ValueError) as exc:
        if isinstance(exc, DataError):
            print(f"clipcpd: data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"clipcpd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
