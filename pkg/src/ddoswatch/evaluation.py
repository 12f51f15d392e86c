"""Scoring alarm timelines against ground truth, parameter sweeps and ROC data.

Two levels of scoring are always reported:

* interval level: confusion counts over filtered samples, where a sample
  is attack-positive if any of its seconds is labeled as attacked;
* event level: an attack event (a run of positive samples) is detected if
  at least one alarm sample overlaps it, and an alarm episode (a run of
  alarm samples) is false if it overlaps no attack.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .detect import DetectorKind, make_params, run_on_samples
from .features import DEFAULT_WINDOW, FeatureExtractor, FilteredSample
from .trafficgen import LabeledTrace, runs


class LengthMismatch(ValueError):
    pass


class SweepError(ValueError):
    def __init__(self, params, exc):
        super().__init__(f"parameter set {params}: {exc}")
        self.params = params


@dataclass
class AlarmTimeline:
    samples: list
    sample_period: int = DEFAULT_WINDOW
    start_second: int = 0

    def __len__(self):
        return len(self.samples)

    def episodes(self) -> list[tuple]:
        return runs(self.samples)

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample_index", "start_second", "end_second", "alarm"])
            for i, a in enumerate(self.samples):
                s = self.start_second + i * self.sample_period
                w.writerow([i, s, s + self.sample_period, int(bool(a))])

    @classmethod
    def read(cls, path) -> "AlarmTimeline":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["sample_index", "start_second", "end_second", "alarm"]:
                raise ValueError(f"{path}: unexpected alarm timeline header {reader.fieldnames}")
            rows = list(reader)
        if not rows:
            return cls([], DEFAULT_WINDOW, 0)
        starts = [int(r["start_second"]) for r in rows]
        period = int(rows[0]["end_second"]) - starts[0]
        if period < 1 or any(b - a != period for a, b in zip(starts, starts[1:])):
            raise ValueError(f"{path}: samples are not evenly spaced")
        return cls([bool(int(r["alarm"])) for r in rows], period, starts[0])


@dataclass
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    recall: float
    precision: float
    f1: float
    false_positive_rate: float
    event_detection_rate: float
    event_false_positive_rate: float
    mean_detection_delay: float
    events: int
    detected_events: int
    episodes: int
    false_episodes: int

    def to_dict(self) -> dict:
        return asdict(self)


def f1_score(precision: float, recall: float) -> float:
    total = precision + recall
    return 2 * precision * recall / total if total > 0 else 0.0


def downsample(reference: Sequence[bool], period: int, offset: int = 0,
               n_samples: Optional[int] = None) -> np.ndarray:
    """Per-sample truth: a window is positive if any of its seconds is."""
    ref = np.asarray(reference, dtype=bool)[offset:]
    n = len(ref) // period if n_samples is None else n_samples
    if n == 0:
        return np.zeros(0, dtype=bool)
    return ref[:n * period].reshape(n, period).any(axis=1)


def score_samples(alarms: Sequence[bool], truth: Sequence[bool], period: int = DEFAULT_WINDOW) -> EvalReport:
    a = np.asarray(alarms, dtype=bool)
    r = np.asarray(truth, dtype=bool)
    if a.shape != r.shape:
        raise LengthMismatch(f"{len(a)} alarm samples vs {len(r)} reference samples")
    tp = int(np.sum(a & r))
    fp = int(np.sum(a & ~r))
    tn = int(np.sum(~a & ~r))
    fn = int(np.sum(~a & r))
    recall = tp / (tp + fn) if tp + fn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0

    events = runs(r)
    episodes = runs(a)
    delays = []
    for s, e in events:
        hit = np.flatnonzero(a[s:e])
        if hit.size:
            delays.append(int(hit[0]) * period)
    false_eps = sum(1 for s, e in episodes if not r[s:e].any())
    return EvalReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        recall=recall, precision=precision, f1=f1_score(precision, recall),
        false_positive_rate=fpr,
        event_detection_rate=len(delays) / len(events) if events else 0.0,
        event_false_positive_rate=false_eps / len(episodes) if episodes else 0.0,
        mean_detection_delay=float(np.mean(delays)) if delays else math.nan,
        events=len(events), detected_events=len(delays),
        episodes=len(episodes), false_episodes=false_eps,
    )


def align_reference(alarms: AlarmTimeline, reference: Sequence[bool], reference_start: int = 0) -> np.ndarray:
    offset = alarms.start_second - reference_start
    ref = np.asarray(reference, dtype=bool)
    if offset < 0:
        raise LengthMismatch("alarm timeline starts before the reference")
    available = max(0, len(ref) - offset) // alarms.sample_period
    if available != len(alarms):
        raise LengthMismatch(f"{len(alarms)} alarm samples vs {available} reference samples")
    return downsample(ref, alarms.sample_period, offset, len(alarms))


def score(alarms: AlarmTimeline, reference: Sequence[bool], reference_start: int = 0) -> EvalReport:
    truth = align_reference(alarms, reference, reference_start)
    return score_samples(alarms.samples, truth, alarms.sample_period)


# --------------------------------------------------------------------------
# Sweeps

@dataclass
class PreparedScenario:
    """Filtered feature samples plus reference, computed once per sweep."""

    samples: list
    reference: np.ndarray
    reference_start: int
    window_len: int


def prepare(scenario: Union[LabeledTrace, PreparedScenario], window_len: int = DEFAULT_WINDOW) -> PreparedScenario:
    if isinstance(scenario, PreparedScenario):
        if scenario.window_len != window_len:
            raise ValueError("prepared scenario uses a different window length")
        return scenario
    samples = list(FeatureExtractor(window_len).run(scenario.aggregates()))
    return PreparedScenario(samples, scenario.reference, 0, window_len)


def expand_grid(grid: Union[Mapping, Sequence[Mapping]]) -> list[dict]:
    """A dict of lists becomes its cartesian product; a list of dicts passes through."""
    if isinstance(grid, Mapping):
        keys = list(grid)
        values = [v if isinstance(v, (list, tuple)) else [v] for v in grid.values()]
        return [dict(zip(keys, combo)) for combo in itertools.product(*values)]
    points = []
    for item in grid:
        points.extend(expand_grid(item) if any(isinstance(v, list) for v in item.values()) else [dict(item)])
    return points


def sweep(detector_kind, param_grid, scenario, window_len: int = DEFAULT_WINDOW,
          errors: Optional[list] = None) -> list[tuple]:
    """Score one detector run per grid point, in grid order.

    With ``errors`` given, failing points are appended there as
    ``(params, exception)`` and skipped instead of raising.
    """
    kind = DetectorKind.parse(detector_kind)
    points = expand_grid(param_grid)
    if not points:
        raise ValueError("parameter grid is empty")
    prepared = prepare(scenario, window_len)
    results = []
    for point in points:
        try:
            params = make_params(kind, point)
            timeline = run_on_samples(kind, params, prepared.samples, window_len)
            report = score(timeline, prepared.reference, prepared.reference_start)
        except (ValueError, TypeError) as exc:
            if errors is None:
                raise SweepError(point, exc) from exc
            errors.append((point, exc))
            continue
        results.append((point, report))
    return results


OBJECTIVES = ("F1", "TPR_at_zero_FPR")


def objective_value(report: EvalReport, objective: str) -> float:
    if objective == "F1":
        return report.f1
    if objective == "TPR_at_zero_FPR":
        return report.recall if report.fp == 0 else -report.false_positive_rate
    raise ValueError(f"unknown objective {objective!r}")


def best_of(results: Sequence[tuple], objective: str = "F1") -> tuple:
    """Argmax of the objective; ties go to higher precision, then lower delay, then grid order."""
    if not results:
        raise ValueError("no results to choose from")

    def key(item):
        i, (_params, rep) = item
        delay = rep.mean_detection_delay if not math.isnan(rep.mean_detection_delay) else math.inf
        return (-objective_value(rep, objective), -rep.precision, delay, i)

    _, best = min(enumerate(results), key=key)
    return best


def optimize(detector_kind, param_grid, scenario, objective: str = "F1",
             window_len: int = DEFAULT_WINDOW) -> tuple:
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    return best_of(sweep(detector_kind, param_grid, scenario, window_len), objective)


def roc_points(results: Sequence[tuple]) -> list[tuple]:
    """(fpr, tpr, param_id) sorted by fpr, then tpr, then param_id."""
    pts = [(rep.false_positive_rate, rep.recall, i) for i, (_p, rep) in enumerate(results)]
    return sorted(pts)


def upper_envelope(points: Sequence[tuple]) -> list[tuple]:
    """Running-maximum TPR over fpr-sorted ROC points (the achievable frontier)."""
    out = []
    best = -math.inf
    for fpr, tpr, *rest in sorted(points):
        best = max(best, tpr)
        out.append((fpr, best, *rest))
    return out


REPORT_COLUMNS = ["param_id", "params"] + [f.name for f in fields(EvalReport)]


def write_report_csv(path, results: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for i, (params, rep) in enumerate(results):
            w.writerow([i, json.dumps(params, sort_keys=True)] + [repr(v) if isinstance(v, float) else v
                                                                 for v in asdict(rep).values()])


def read_report_csv(path) -> list[tuple]:
    out = []
    types = {f.name: f.type for f in fields(EvalReport)}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kwargs = {}
            for name, typ in types.items():
                kwargs[name] = int(row[name]) if typ in (int, "int") else float(row[name])
            out.append((json.loads(row["params"]), EvalReport(**kwargs)))
    return out


def write_roc_csv(path, points: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["fpr", "tpr", "param_id"])
        for fpr, tpr, pid in points:
            w.writerow([repr(float(fpr)), repr(float(tpr)), pid])


def read_roc_csv(path) -> list[tuple]:
    with open(path, newline="") as fh:
        return [(float(r["fpr"]), float(r["tpr"]), int(r["param_id"])) for r in csv.DictReader(fh)]
