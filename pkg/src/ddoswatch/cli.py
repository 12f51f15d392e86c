"""Command-line entry point: ``ddoswatch generate|detect|evaluate|sweep``.

Every subcommand accepts ``--config`` (a JSON file) plus flags; flags win
over config fields, which win over built-in defaults.

Run config schema (``detect`` and ``sweep``)::

    {
      "detector": "EMA4" | "CUSUM_SYN" | "CUSUM_ENTROPY",
      "params": {...},            # detector parameters, defaults per detector
      "window_len": 10,
      "trace": "path.trace.csv",  # or "listen_port": 37008 for live TZSP
      "start": 0, "end": 3600,    # optional second range to gap-fill
      "out": "prefix"
    }

Scenario configs for ``generate`` follow ``trafficgen.Scenario.from_dict``.

Exit status: 0 success, 1 domain error, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import grids
from .detect import DetectionRun, DetectorKind, make_params
from .evaluation import (AlarmTimeline, LengthMismatch, PreparedScenario, best_of, objective_value,
                         roc_points, score, sweep, write_report_csv, write_roc_csv, OBJECTIVES)
from .features import DEFAULT_WINDOW, FeatureExtractor
from .ingest import TZSP_PORT, ParseError, TzspListener, aggregate, read_trace
from .trafficgen import Scenario, read_labels

log = logging.getLogger("ddoswatch")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad invocation or unreadable input; maps to exit status 2."""


def _load_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _param_overrides(items: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def run_config(args) -> dict:
    """Merge defaults, the JSON config and command-line flags."""
    cfg = {"detector": "EMA4", "params": {}, "window_len": DEFAULT_WINDOW}
    if args.config:
        data = _load_json(args.config)
        if not isinstance(data, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        cfg.update(data)
    for name in ("detector", "window_len", "trace", "out", "start", "end"):
        value = getattr(args, name, None)
        if value is not None:
            cfg[name] = value
    if getattr(args, "listen_port", None) is not None:
        cfg["listen_port"] = args.listen_port
    params = dict(cfg.get("params") or {})
    params.update(_param_overrides(getattr(args, "param", None)))
    cfg["params"] = params
    try:
        cfg["detector"] = DetectorKind.parse(cfg["detector"])
    except ValueError:
        raise UsageError(f"unknown detector {cfg['detector']!r}") from None
    if int(cfg["window_len"]) != cfg["window_len"] or cfg["window_len"] < 1:
        raise UsageError("window_len must be a positive integer")
    cfg["window_len"] = int(cfg["window_len"])
    return cfg


# --------------------------------------------------------------------------
# generate

def cmd_generate(args) -> int:
    if not args.config:
        raise UsageError("generate needs --config")
    data = _load_json(args.config)
    if not isinstance(data, dict):
        raise UsageError(f"{args.config}: scenario config must be a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    prefix = args.out or data.get("name") or Path(args.config).stem
    scenario = Scenario.from_dict(data)
    trace = scenario.build()
    try:
        n = trace.write(f"{prefix}.trace.csv")
        trace.write_labels(f"{prefix}.labels.csv")
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from None
    attack_packets = sum(f.packet_count for f in trace.fragments)
    print(f"wrote {prefix}.trace.csv and {prefix}.labels.csv")
    print(f"{n} packets ({attack_packets} attack), {len(trace.attacks)} attacks, "
          f"{trace.duration} s, seed {scenario.seed}")
    return EXIT_OK


# --------------------------------------------------------------------------
# detect

class _LineCounter:
    def __init__(self):
        self.errors = 0
        self.first = None

    def __call__(self, exc: ParseError):
        self.errors += 1
        if self.first is None:
            self.first = exc
        log.warning("%s", exc)


class _Counted:
    """Wrap a packet iterator, counting what comes through."""

    def __init__(self, it):
        self.it = it
        self.count = 0

    def __iter__(self):
        for pkt in self.it:
            self.count += 1
            yield pkt


def cmd_detect(args) -> int:
    cfg = run_config(args)
    live = "listen_port" in cfg and cfg.get("trace") is None
    if live == (cfg.get("trace") is not None):
        raise UsageError("detect needs exactly one input: --trace or --listen-port")
    if not cfg.get("out"):
        raise UsageError("detect needs --out")
    kind = cfg["detector"]
    params = make_params(kind, cfg["params"])
    prefix = cfg["out"]

    try:
        events_fh = open(f"{prefix}.events.csv", "w", newline="")
        alarms_fh = open(f"{prefix}.alarms.csv", "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from None
    with events_fh, alarms_fh:
        events = csv.writer(events_fh)
        alarms = csv.writer(alarms_fh)
        run = DetectionRun(kind, params, cfg["window_len"], keep_log=False)
        events.writerow(run.log_columns)
        alarms.writerow(["sample_index", "start_second", "end_second", "alarm"])

        def on_sample(r, fs, alarm):
            row = r.detector.log_row()
            events.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
            alarms.writerow([len(r.alarms) - 1, fs.start_second, fs.start_second + r.window_len, int(alarm)])
            if live:
                events_fh.flush()
                alarms_fh.flush()

        run.on_sample = on_sample
        bad = _LineCounter()
        if live:
            port = cfg["listen_port"]
            try:
                listener = TzspListener(port, timeout=args.timeout)
            except OSError as exc:
                raise UsageError(f"cannot listen on port {port}: {exc}") from None
            print(f"listening for TZSP on udp/{listener.port}", file=sys.stderr, flush=True)
            with listener:
                try:
                    run.run(aggregate(listener))
                except KeyboardInterrupt:
                    pass
            good = listener.received - listener.dropped
            failed = listener.dropped
        else:
            packets = _Counted(read_trace(cfg["trace"], on_error=bad))
            try:
                run.run(aggregate(packets, cfg.get("start"), cfg.get("end")))
            except OSError as exc:
                raise UsageError(f"cannot read {cfg['trace']}: {exc.strerror or exc}") from None
            good, failed = packets.count, bad.errors

    alarm_samples = sum(run.alarms)
    episodes = run.timeline().episodes()
    print(f"{len(run.alarms)} samples, {alarm_samples} alarmed, {len(episodes)} alarm episodes")
    if failed:
        print(f"{failed} of {good + failed} inputs rejected", file=sys.stderr)
    if failed and failed > 0.5 * (good + failed):
        print(f"error: more than half of the input failed to parse (first: {bad.first})", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


# --------------------------------------------------------------------------
# evaluate

def _percent(x: float) -> str:
    return "n/a" if math.isnan(x) else f"{100 * x:.2f}%"


def format_summary(report) -> str:
    delay = "n/a" if math.isnan(report.mean_detection_delay) else f"{report.mean_detection_delay:.1f} s"
    return "\n".join([
        f"detection rate {_percent(report.event_detection_rate)} "
        f"({report.detected_events}/{report.events} events)",
        f"false positive rate {_percent(report.event_false_positive_rate)} "
        f"({report.false_episodes}/{report.episodes} alarm episodes), interval FPR "
        f"{report.false_positive_rate:.4f}",
        f"recall {report.recall:.2f}  precision {report.precision:.2f}  F1 {report.f1:.2f}",
        f"mean detection delay {delay}",
    ])


def cmd_evaluate(args) -> int:
    try:
        timeline = AlarmTimeline.read(args.alarms)
        start, reference = read_labels(args.labels)
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    report = score(timeline, reference, start)
    if args.out:
        try:
            write_report_csv(args.out, [({}, report)])
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
    print(format_summary(report))
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep

def _load_grid(spec: str, kind: DetectorKind):
    if spec == "default":
        return grids.default_grid(kind)
    data = _load_json(spec)
    if not isinstance(data, (dict, list)):
        raise UsageError(f"{spec}: grid must be a JSON object or list")
    return data


def cmd_sweep(args) -> int:
    cfg = run_config(args)
    if not cfg.get("out"):
        raise UsageError("sweep needs --out")
    kind = cfg["detector"]
    grid = _load_grid(args.grid, kind)
    window = cfg["window_len"]
    if args.scenario:
        data = _load_json(args.scenario)
        if args.seed is not None:
            data["seed"] = args.seed
        trace = Scenario.from_dict(data).build()
        start, reference = 0, trace.reference
        aggs = trace.aggregates()
    else:
        if not cfg.get("trace") or not args.labels:
            raise UsageError("sweep needs --trace and --labels, or --scenario")
        try:
            start, reference = read_labels(args.labels)
        except OSError as exc:
            raise UsageError(f"cannot read {args.labels}: {exc}") from None
        bad = _LineCounter()
        aggs = aggregate(read_trace(cfg["trace"], on_error=bad), start, start + len(reference))
    try:
        samples = list(FeatureExtractor(window).run(aggs))
    except OSError as exc:
        raise UsageError(f"cannot read trace: {exc}") from None
    prepared = PreparedScenario(samples, reference, start, window)

    errors: list = []
    results = sweep(kind, grid, prepared, window, errors=errors)
    for point, exc in errors:
        print(f"skipped {json.dumps(point, sort_keys=True)}: {exc}", file=sys.stderr)
    if not results:
        print("error: every grid point failed", file=sys.stderr)
        return EXIT_DOMAIN
    prefix = cfg["out"]
    try:
        write_roc_csv(f"{prefix}.roc.csv", roc_points(results))
        write_report_csv(f"{prefix}.report.csv", results)
        params, report = best_of(results, args.objective)
        with open(f"{prefix}.best.json", "w", encoding="utf-8") as fh:
            json.dump({"detector": kind.value, "objective": args.objective,
                       "params": make_params(kind, params).to_dict(),
                       "report": report.to_dict()}, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from None
    print(f"{len(results)} grid points scored, {len(errors)} skipped")
    print(f"best by {args.objective} ({objective_value(report, args.objective):.4f}): "
          f"{json.dumps(params, sort_keys=True)}")
    print(format_summary(report))
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--window-len", dest="window_len", type=int,
                        help=f"max-filter window in seconds (default {DEFAULT_WINDOW})")
    common.add_argument("--out", help="output path or prefix")
    common.add_argument("-v", "--verbose", action="store_true")

    detector = argparse.ArgumentParser(add_help=False)
    detector.add_argument("--detector", help="EMA4, CUSUM_SYN or CUSUM_ENTROPY")
    detector.add_argument("--param", action="append", metavar="KEY=VALUE",
                          help="override one detector parameter (repeatable)")
    detector.add_argument("--trace", help="trace CSV to read")

    p = argparse.ArgumentParser(prog="ddoswatch", description="Entropy and rate based DDoS detection.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="synthesize a labeled scenario trace")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("detect", parents=[common, detector], help="run a detector over a trace or live TZSP")
    d.add_argument("--listen-port", dest="listen_port", type=int, nargs="?", const=TZSP_PORT,
                   help=f"receive TZSP datagrams on this UDP port (default {TZSP_PORT})")
    d.add_argument("--timeout", type=float, help="live mode: stop after this many idle seconds")
    d.add_argument("--start", type=int, help="first second to report (gap-filled)")
    d.add_argument("--end", type=int, help="second after the last one to report (gap-filled)")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("evaluate", parents=[common], help="score an alarm timeline against labels")
    e.add_argument("--alarms", required=True, help="alarm timeline CSV from detect")
    e.add_argument("--labels", required=True, help="labels CSV from generate")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", parents=[common, detector], help="score a parameter grid")
    s.add_argument("--grid", required=True, help="grid JSON file, or 'default' for the built-in grid")
    s.add_argument("--labels", help="labels CSV matching --trace")
    s.add_argument("--scenario", help="scenario config to generate in memory instead of --trace")
    s.add_argument("--objective", choices=OBJECTIVES, default="F1")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.ERROR,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LengthMismatch, ValueError, TypeError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
