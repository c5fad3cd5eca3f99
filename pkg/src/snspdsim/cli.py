"""Command-line front end: `simulate`, `analyze` and `reproduce`.

The seed is resolved in the order: `--seed` flag, `SNSPD_SIM_SEED`
environment variable, the config file's `run.seed` (simulate) or the
preset default (reproduce).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, presets, timetags
from .config import load_run_config
from .errors import SnspdSimError
from .quantities import parse_time
from .simulation import simulate

SEED_ENV_VAR = "SNSPD_SIM_SEED"

ANALYSES = (
    "interarrival",
    "expfit",
    "afterpulse",
    "corrected-dcr",
    "trains",
    "conditional",
    "recovery",
)


def _resolve_seed(flag_seed, fallback):
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return fallback


def _cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    seed = _resolve_seed(args.seed, cfg.seed)
    out = Path(args.out or cfg.output or "run.nptt")
    stream = simulate(cfg.model, cfg.stimulus, cfg.duration, seed)
    stream.metadata["config_file_digest"] = cfg.digest
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".csv":
        timetags.write_stream_csv(stream, out)
    else:
        timetags.write_stream(stream, out)
    n = stream.detector_events.size
    rate = n / cfg.duration if cfg.duration > 0 else 0.0
    print(f"wrote {out}")
    print(f"detector counts: {n}")
    print(f"sync counts: {stream.sync_events.size}")
    print(f"total rate: {rate:.2f} cps")
    print(f"config digest: {cfg.digest}")
    return 0


def _write_metric_csv(path, names_values) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("metric,value\n")
        for name, value in names_values:
            fh.write(f"{name},{value!r}\n")


def _cmd_analyze(args) -> int:
    paths = args.inputs
    streams = [timetags.read_stream(p) for p in paths]
    out = Path(args.out) if args.out else None
    name = args.analysis

    if name == "recovery":
        runs = []
        for path, stream in zip(paths, streams):
            sep = stream.metadata.get("separation_ps")
            if sep is None:
                print(f"error: {path} has no separation_ps metadata", file=sys.stderr)
                return 2
            runs.append((int(sep), stream))
        curve = analysis.recovery_curve(
            runs,
            acceptance_bin_ps=int(round(parse_time(args.acceptance_bin) * 1e12)),
            window_ps=int(round(parse_time(args.window_2000ns) * 1e12)),
            neighbors_per_side=args.neighbors,
            ratio=args.ratio,
        )
        analysis.write_recovery_csv(curve, out or "recovery.csv")
        for sep, eta, err in zip(curve.separations_ps, curve.efficiency, curve.stat_error):
            print(f"separation {sep/1000:.0f} ns: efficiency {eta:.5f} +- {err:.5f}")
        return 0

    if len(streams) != 1:
        print(f"error: analysis {name!r} takes exactly one input file", file=sys.stderr)
        return 2
    stream = streams[0]
    events = stream.detector_events
    window_ps = int(round(parse_time(args.window) * 1e12))

    if name == "interarrival":
        hist = analysis.interarrival_histogram(
            events,
            int(round(parse_time(args.bin) * 1e12)),
            int(round(parse_time(args.max_time) * 1e12)),
        )
        analysis.write_histogram_csv(hist, out or "interarrival.csv")
        print(f"{hist.total_events} gaps, {int(hist.counts.sum())} binned")
    elif name == "expfit":
        hist = analysis.interarrival_histogram(
            events,
            int(round(parse_time(args.bin) * 1e12)),
            int(round(parse_time(args.max_time) * 1e12)),
        )
        fit = analysis.fit_exponential(hist, args.discard_first, args.min_bin_count)
        pred = fit.predict_bins(hist.n_bins)
        rows = [
            (float(s * analysis.PS), int(c), float(p))
            for s, c, p in zip(hist.bin_starts_ps, hist.counts, pred)
        ]
        with open(out or "expfit.csv", "w", newline="") as fh:
            fh.write("bin_start_s,count,fit\n")
            for row in rows:
                fh.write(f"{row[0]!r},{row[1]},{row[2]!r}\n")
        print(f"rate: {fit.rate:.2f} /s  R^2: {fit.r_squared:.5f}")
    elif name == "afterpulse":
        p = analysis.afterpulse_probability(events, window_ps)
        rows = [("afterpulse_probability", float("nan") if p is None else p)]
        _write_metric_csv(out or "afterpulse.csv", rows)
        print("afterpulse probability:", "undefined (empty stream)" if p is None else f"{p:.6f}")
    elif name == "corrected-dcr":
        total, corrected = analysis.corrected_dcr(events, stream.duration_ps, window_ps)
        _write_metric_csv(out or "corrected_dcr.csv", [("total_cps", total), ("corrected_cps", corrected)])
        print(f"total: {total:.2f} cps  corrected: {corrected:.2f} cps")
    elif name == "trains":
        dist = analysis.classify_trains(events, window_ps)
        analysis.write_trains_csv(dist, out or "trains.csv")
        print("trains by length:", {n: dist.count(n) for n in range(1, 7)})
    elif name == "conditional":
        hist = analysis.conditional_histogram(
            stream,
            int(round(parse_time(args.window_2000ns) * 1e12)),
            int(round(parse_time(args.bin) * 1e12)),
        )
        analysis.write_histogram_csv(hist, out or "conditional.csv")
        print(f"{hist.total_events} qualifying windows")
    return 0


def _cmd_reproduce(args) -> int:
    out_dir = Path(args.out or f"out_{args.figure}")
    seed = _resolve_seed(args.seed, presets.DEFAULT_SEED)
    report = presets.FIGURES[args.figure](out_dir, seed=seed)
    for line in report.lines():
        print(line)
    print(f"report written to {out_dir}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snspd-sim",
        description="SNSPD detection-chain simulator and time-tag analysis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation from a YAML config")
    sim.add_argument("--config", required=True, help="YAML run configuration")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--out", default=None, help="output time-tag file (.nptt or .csv)")
    sim.set_defaults(func=_cmd_simulate)

    ana = sub.add_parser("analyze", help="run an analysis on a time-tag file")
    ana.add_argument("analysis", choices=ANALYSES)
    ana.add_argument("inputs", nargs="+", help="time-tag file(s); recovery takes one per separation")
    ana.add_argument("--bin", default="0.1ms", help="histogram bin width (e.g. 0.1ms, 4ns)")
    ana.add_argument("--max-time", default="3ms", help="interarrival histogram range")
    ana.add_argument("--window", default="1000ns", help="afterpulse window")
    ana.add_argument(
        "--conditional-window",
        dest="window_2000ns",
        default="2000ns",
        help="sync window length for conditional/recovery analyses",
    )
    ana.add_argument("--acceptance-bin", default="4ns", help="recovery acceptance bin (< 5 ns)")
    ana.add_argument("--neighbors", type=int, default=2, help="background bins per side")
    ana.add_argument("--ratio", choices=("first-detected", "first-only"), default="first-detected")
    ana.add_argument("--discard-first", type=int, default=1)
    ana.add_argument("--min-bin-count", type=int, default=10)
    ana.add_argument("--out", default=None, help="output CSV path")
    ana.set_defaults(func=_cmd_analyze)

    rep = sub.add_parser("reproduce", help="run a figure-reproduction preset")
    rep.add_argument("figure", choices=sorted(presets.FIGURES, key=lambda s: (len(s), s)))
    rep.add_argument("--out", default=None, help="output directory")
    rep.add_argument("--seed", type=int, default=None, help="master seed")
    rep.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SnspdSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
