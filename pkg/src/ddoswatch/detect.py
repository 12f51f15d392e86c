"""Wiring from aggregates to alarm timelines for the three detector kinds."""
from __future__ import annotations

import csv
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .cusum import CUSUM_ENTROPY_PARAMS, CUSUM_SYN_PARAMS, CusumDetector, CusumParams
from .ema import Ema4Detector, EmaParams4
from .features import DEFAULT_WINDOW, FeatureExtractor, FilteredSample
from .ingest import IntervalAggregate


class DetectorKind(Enum):
    EMA4 = "EMA4"
    CUSUM_SYN = "CUSUM_SYN"
    CUSUM_ENTROPY = "CUSUM_ENTROPY"

    @classmethod
    def parse(cls, value) -> "DetectorKind":
        if isinstance(value, cls):
            return value
        key = str(value).upper().replace("-", "_")
        aliases = {"4EMA": "EMA4", "CUSUMSYN": "CUSUM_SYN", "CUSUMENTROPY": "CUSUM_ENTROPY"}
        return cls(aliases.get(key, key))


Params = Union[EmaParams4, CusumParams]


def default_params(kind: DetectorKind) -> Params:
    return {DetectorKind.EMA4: EmaParams4(),
            DetectorKind.CUSUM_SYN: CUSUM_SYN_PARAMS,
            DetectorKind.CUSUM_ENTROPY: CUSUM_ENTROPY_PARAMS}[kind]


def make_params(kind, params: Optional[Union[Params, Mapping]] = None) -> Params:
    kind = DetectorKind.parse(kind)
    if params is None:
        return default_params(kind)
    if kind is DetectorKind.EMA4:
        if isinstance(params, EmaParams4):
            return params
        if isinstance(params, CusumParams):
            raise TypeError("CUSUM parameters given for the 4EMA detector")
        return EmaParams4.from_dict(params)
    if isinstance(params, EmaParams4):
        raise TypeError("4EMA parameters given for a CUSUM detector")
    if isinstance(params, CusumParams):
        return params
    # unspecified fields fall back to the detector's published setting
    return CusumParams.from_dict(params, **default_params(kind).to_dict())


def make_detector(kind, params=None):
    kind = DetectorKind.parse(kind)
    p = make_params(kind, params)
    if kind is DetectorKind.EMA4:
        return Ema4Detector(p)
    return CusumDetector(p, "syn" if kind is DetectorKind.CUSUM_SYN else "entropy")


class DetectionRun:
    """Feed aggregates through features and one detector, collecting outputs."""

    def __init__(self, kind, params=None, window_len: int = DEFAULT_WINDOW, keep_log: bool = True,
                 features: bool = False, on_sample: Optional[Callable] = None):
        self.kind = DetectorKind.parse(kind)
        self.detector = make_detector(self.kind, params)
        self.extractor = FeatureExtractor(window_len, keep_rows=features)
        self.window_len = window_len
        self.alarms: list[bool] = []
        self.starts: list[int] = []
        self.log: Optional[list] = [] if keep_log else None
        self.on_sample = on_sample

    def push_sample(self, fs: FilteredSample) -> bool:
        alarm = self.detector.update(fs)
        self.alarms.append(alarm)
        self.starts.append(fs.start_second)
        if self.log is not None:
            self.log.append(self.detector.log_row())
        if self.on_sample is not None:
            self.on_sample(self, fs, alarm)
        return alarm

    def push(self, agg: IntervalAggregate) -> Optional[bool]:
        fs = self.extractor.push(agg)
        if fs is None:
            return None
        return self.push_sample(fs)

    def run(self, aggregates: Iterable[IntervalAggregate]) -> "DetectionRun":
        for agg in aggregates:
            self.push(agg)
        return self

    def timeline(self):
        from .evaluation import AlarmTimeline

        start = self.starts[0] if self.starts else 0
        return AlarmTimeline(list(self.alarms), self.window_len, start)

    @property
    def log_columns(self) -> Sequence[str]:
        return self.detector.LOG_COLUMNS


def run_on_samples(kind, params, samples: Sequence[FilteredSample], window_len: int = DEFAULT_WINDOW):
    """Run a detector over precomputed filtered samples (no event log)."""
    from .evaluation import AlarmTimeline

    det = make_detector(kind, params)
    alarms = [det.update(fs) for fs in samples]
    start = samples[0].start_second if samples else 0
    return AlarmTimeline(alarms, window_len, start)


def detect(kind, aggregates: Iterable[IntervalAggregate], params=None, window_len: int = DEFAULT_WINDOW):
    return DetectionRun(kind, params, window_len, keep_log=False).run(aggregates).timeline()


def write_event_log(path, columns: Sequence[str], rows: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])


def read_event_log(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows
