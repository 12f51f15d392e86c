"""Per-second feature series and the tumbling max filter.

Two series drive the hybrid detector: normalized Shannon entropy of the
(src, dst) pair distribution and the packet rate. A third, the SYN count,
feeds the SYN-counting CUSUM baseline. Each series is reduced by taking
the maximum over non-overlapping ``window_len``-second windows.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Optional

from .ingest import IntervalAggregate

DEFAULT_WINDOW = 10


class Kind(Enum):
    ENTROPY = "entropy"
    RATE = "rate"
    SYN = "syn"


class SeriesSample(NamedTuple):
    index: int
    value: float
    kind: Kind


def entropy_of_counts(counts: Iterable[int]) -> float:
    counts = [c for c in counts if c > 0]
    n = len(counts)
    total = sum(counts)
    if n <= 1 or total == 0:
        return 0.0
    if min(counts) == max(counts):
        return 1.0
    h = 0.0
    for c in counts:
        p = c / total
        h -= p * math.log2(p)
    # float rounding can push a uniform distribution a hair past 1
    return min(1.0, max(0.0, h / math.log2(n)))


def pair_entropy(agg: IntervalAggregate) -> float:
    """Shannon entropy of the pair distribution, normalized by log2(#pairs)."""
    return entropy_of_counts(agg.pair_counts.values())


def packet_rate(agg: IntervalAggregate) -> float:
    """Packets per second (aggregates span one second)."""
    return float(agg.total_packets)


@dataclass
class FilterState:
    """Tumbling-window max filter."""

    window_len: int = DEFAULT_WINDOW
    buffer: list = field(default_factory=list)
    emitted: int = 0

    def __post_init__(self):
        if self.window_len < 1:
            raise ValueError("window_len must be positive")

    def push(self, sample: SeriesSample) -> Optional[SeriesSample]:
        self.buffer.append(sample.value)
        if len(self.buffer) < self.window_len:
            return None
        out = SeriesSample(self.emitted, max(self.buffer), sample.kind)
        self.buffer.clear()
        self.emitted += 1
        return out


def max_filter(state: FilterState, sample: SeriesSample) -> Optional[SeriesSample]:
    return state.push(sample)


class FilteredSample(NamedTuple):
    """One time-aligned output of the three max filters."""

    index: int
    start_second: int
    entropy: float
    rate: float
    syn: float


class FeatureExtractor:
    """Turn IntervalAggregates into raw per-second values and filtered samples.

    ``rows`` optionally collects the per-second dump
    (sample_index, raw_entropy, raw_rate, filtered_entropy, filtered_rate).
    """

    def __init__(self, window_len: int = DEFAULT_WINDOW, keep_rows: bool = False):
        self.window_len = window_len
        self.entropy = FilterState(window_len)
        self.rate = FilterState(window_len)
        self.syn = FilterState(window_len)
        self.seconds = 0
        self.window_start: Optional[int] = None
        self.rows: Optional[list] = [] if keep_rows else None

    def push(self, agg: IntervalAggregate) -> Optional[FilteredSample]:
        i = self.seconds
        self.seconds += 1
        if self.window_start is None or not self.entropy.buffer:
            self.window_start = agg.interval_start
        raw_e = pair_entropy(agg)
        raw_r = packet_rate(agg)
        fe = self.entropy.push(SeriesSample(i, raw_e, Kind.ENTROPY))
        fr = self.rate.push(SeriesSample(i, raw_r, Kind.RATE))
        fs = self.syn.push(SeriesSample(i, float(agg.syn_count), Kind.SYN))
        if self.rows is not None:
            self.rows.append((i, raw_e, raw_r, fe.value if fe else None, fr.value if fr else None))
        if fe is None:
            return None
        return FilteredSample(fe.index, self.window_start, fe.value, fr.value, fs.value)

    def run(self, aggregates: Iterable[IntervalAggregate]) -> Iterator[FilteredSample]:
        for agg in aggregates:
            out = self.push(agg)
            if out is not None:
                yield out


def filtered_series(aggregates: Iterable[IntervalAggregate],
                    window_len: int = DEFAULT_WINDOW) -> list[FilteredSample]:
    return list(FeatureExtractor(window_len).run(aggregates))


def write_feature_dump(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_index", "raw_entropy", "raw_rate", "filtered_entropy", "filtered_rate"])
        for i, e, r, fe, fr in rows:
            w.writerow([i, repr(e), repr(r), "" if fe is None else repr(fe), "" if fr is None else repr(fr)])


def read_feature_dump(path) -> list[tuple]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append((int(rec["sample_index"]), float(rec["raw_entropy"]), float(rec["raw_rate"]),
                         float(rec["filtered_entropy"]) if rec["filtered_entropy"] else None,
                         float(rec["filtered_rate"]) if rec["filtered_rate"] else None))
    return rows
