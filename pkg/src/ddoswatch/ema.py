"""Hybrid entropy/rate detector built from four exponential moving averages.

Fast and slow EMAs run over the filtered entropy series and over the
filtered rate series. Their differences drive a two-threshold latch: the
alarm turns on when entropy trends down while the rate trends up, and
turns off only when entropy trends up while the rate trends down.
"""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import asdict, dataclass, fields
from typing import Mapping, NamedTuple, Optional

from .features import FilteredSample, Kind, SeriesSample


class IndexMismatch(ValueError):
    pass


class EmaState:
    """EMA with period N over the most recent N samples.

    The value is the recursion ``cur = a*x + (1-a)*cur`` with ``a = 2/(N+1)``
    seeded at the oldest sample still inside the N-sample window, which is
    exactly the finite weighted sum
    ``(1-a)**(N-1) * x[n-N+1] + a * sum((1-a)**s * x[n-s] for s < N-1)``.
    Before N samples have arrived the window is everything seen so far.
    """

    __slots__ = ("period", "alpha", "current", "count", "_window")

    def __init__(self, period: int):
        if period < 1:
            raise ValueError("EMA period must be >= 1")
        self.period = int(period)
        self.alpha = 2.0 / (self.period + 1)
        self.current: Optional[float] = None
        self.count = 0
        self._window: deque = deque(maxlen=self.period)

    @property
    def warm(self) -> bool:
        return self.count >= self.period

    def update(self, x: float) -> float:
        self._window.append(x)
        self.count += 1
        a = self.alpha
        it = iter(self._window)
        cur = next(it)
        for v in it:
            cur = a * v + (1.0 - a) * cur
        self.current = cur
        return cur


def ema_update(state: EmaState, x: float) -> float:
    return state.update(x)


def diff_signal(fast: float, slow: float) -> float:
    return fast - slow


_CAMEL = {
    "emaFastInterval": "ema_fast_interval",
    "emaSlowInterval": "ema_slow_interval",
    "emaPacketFastInterval": "ema_packet_fast_interval",
    "emaPacketSlowInterval": "ema_packet_slow_interval",
    "trEntAlarm": "tr_ent_alarm",
    "trEntNoAlarm": "tr_ent_no_alarm",
    "trPktAlarm": "tr_pkt_alarm",
    "trPktNoAlarm": "tr_pkt_no_alarm",
}


@dataclass(frozen=True)
class EmaParams4:
    """Periods (in filtered samples) and diff thresholds of the hybrid detector.

    Defaults are the typical values of the original tuning table.
    """

    ema_fast_interval: int = 2
    ema_slow_interval: int = 6
    ema_packet_fast_interval: int = 4
    ema_packet_slow_interval: int = 8
    tr_ent_alarm: float = -0.74
    tr_ent_no_alarm: float = 0.10
    tr_pkt_alarm: float = 0.10
    tr_pkt_no_alarm: float = -0.50

    def __post_init__(self):
        for name in ("ema_fast_interval", "ema_slow_interval",
                     "ema_packet_fast_interval", "ema_packet_slow_interval"):
            value = getattr(self, name)
            if value != int(value) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.ema_fast_interval >= self.ema_slow_interval:
            raise ValueError("entropy fast interval must be shorter than slow interval")
        if self.ema_packet_fast_interval >= self.ema_packet_slow_interval:
            raise ValueError("rate fast interval must be shorter than slow interval")
        if not self.tr_ent_alarm < self.tr_ent_no_alarm:
            raise ValueError("tr_ent_alarm must be below tr_ent_no_alarm")
        if not self.tr_pkt_no_alarm < self.tr_pkt_alarm:
            raise ValueError("tr_pkt_no_alarm must be below tr_pkt_alarm")

    @classmethod
    def from_dict(cls, data: Mapping) -> "EmaParams4":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            name = _CAMEL.get(key, key)
            if name not in known:
                raise ValueError(f"unknown 4EMA parameter {key!r}")
            kwargs[name] = value
        params = cls(**kwargs)
        if params.tr_ent_alarm > 0:
            warnings.warn("tr_ent_alarm > 0: the alarm fires on almost any entropy trend",
                          stacklevel=2)
        return params

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def warmup(self) -> int:
        return max(self.ema_slow_interval, self.ema_packet_slow_interval)


class AlarmState(NamedTuple):
    active: bool
    last_change_sample: int


class Ema4Detector:
    """Streaming 4EMA detector; one instance per monitored stream."""

    LOG_COLUMNS = ("sample_index", "ent_fast", "ent_slow", "rate_fast", "rate_slow",
                   "ent_diff", "rate_diff", "alarm")

    def __init__(self, params: EmaParams4 = EmaParams4()):
        self.params = params
        self.ent_fast = EmaState(params.ema_fast_interval)
        self.ent_slow = EmaState(params.ema_slow_interval)
        self.rate_fast = EmaState(params.ema_packet_fast_interval)
        self.rate_slow = EmaState(params.ema_packet_slow_interval)
        self.state = AlarmState(False, -1)
        self.ent_diff = 0.0
        self.rate_diff = 0.0
        self.index = -1

    def step(self, filtered_entropy: SeriesSample, filtered_rate: SeriesSample) -> AlarmState:
        if filtered_entropy.index != filtered_rate.index:
            raise IndexMismatch(f"entropy sample {filtered_entropy.index} "
                                f"!= rate sample {filtered_rate.index}")
        self.index = filtered_entropy.index
        ef = self.ent_fast.update(filtered_entropy.value)
        es = self.ent_slow.update(filtered_entropy.value)
        rf = self.rate_fast.update(filtered_rate.value)
        rs = self.rate_slow.update(filtered_rate.value)
        self.ent_diff = diff_signal(ef, es)
        self.rate_diff = diff_signal(rf, rs)
        if all(e.warm for e in (self.ent_fast, self.ent_slow, self.rate_fast, self.rate_slow)):
            self.state = self.decide(self.state, self.ent_diff, self.rate_diff, self.index)
        return self.state

    def decide(self, state: AlarmState, ent_diff: float, rate_diff: float, index: int) -> AlarmState:
        p = self.params
        active = state.active
        if ent_diff < p.tr_ent_alarm and rate_diff > p.tr_pkt_alarm:
            active = True
        elif ent_diff > p.tr_ent_no_alarm and rate_diff < p.tr_pkt_no_alarm:
            active = False
        if active == state.active:
            return state
        return AlarmState(active, index)

    def update(self, sample: FilteredSample) -> bool:
        return self.step(SeriesSample(sample.index, sample.entropy, Kind.ENTROPY),
                         SeriesSample(sample.index, sample.rate, Kind.RATE)).active

    def log_row(self) -> tuple:
        return (self.index, self.ent_fast.current, self.ent_slow.current, self.rate_fast.current,
                self.rate_slow.current, self.ent_diff, self.rate_diff, int(self.state.active))
