"""CUSUM baselines: SYN-count CUSUM and pair-entropy CUSUM.

Both run an adaptive, reset-to-zero cumulative sum over a max-filtered
series::

    S  <- max(0, S + K * (x - beta2 * mu - k))      # upward direction
    mu <- beta1 * mu + (1 - beta1) * x              # skipped while alarmed

The alarm raises when S exceeds h and clears when S returns to 0. For the
entropy variant the deviation is negated (``beta2 * mu - x - k``) because
attacks on the monitored network lower pair entropy.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Optional

from .ema import AlarmState
from .features import DEFAULT_WINDOW, FeatureExtractor, FilteredSample
from .ingest import IntervalAggregate

UP = "increase"
DOWN = "decrease"


@dataclass(frozen=True)
class CusumParams:
    beta1: float
    beta2: float
    k: float
    h: float
    K: float
    direction: str = UP

    def __post_init__(self):
        if not 0 < self.beta1 < 1:
            raise ValueError("beta1 must lie in (0, 1)")
        if self.beta2 <= 0:
            raise ValueError("beta2 must be positive")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.K < 0:
            raise ValueError("K must be non-negative")
        if self.direction not in (UP, DOWN):
            raise ValueError(f"direction must be {UP!r} or {DOWN!r}")

    @classmethod
    def from_dict(cls, data: Mapping, **defaults) -> "CusumParams":
        known = {f.name for f in fields(cls)}
        aliases = {"β1": "beta1", "β2": "beta2"}
        kwargs = dict(defaults)
        for key, value in data.items():
            name = aliases.get(key, key)
            if name not in known:
                raise ValueError(f"unknown CUSUM parameter {key!r}")
            kwargs[name] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


# Published optimized settings for the two baselines.
CUSUM_SYN_PARAMS = CusumParams(beta1=0.148, beta2=3, k=18, h=6.8, K=0.01)
CUSUM_ENTROPY_PARAMS = CusumParams(beta1=0.139, beta2=0.0001, k=28, h=3.1, K=0.51, direction=DOWN)


@dataclass
class CusumState:
    mu: Optional[float] = None
    S: float = 0.0
    active: bool = False
    last_change_sample: int = -1
    index: int = -1


def cusum_step(state: CusumState, params: CusumParams, x: float) -> AlarmState:
    """Advance the statistic by one observation (mutates ``state``)."""
    state.index += 1
    if state.mu is None:
        state.mu = x
    dev = x - params.beta2 * state.mu
    if params.direction == DOWN:
        dev = -dev
    state.S = max(0.0, state.S + params.K * (dev - params.k))
    was = state.active
    if state.S > params.h:
        state.active = True
    elif state.S == 0.0:
        state.active = False
    if state.active != was:
        state.last_change_sample = state.index
    # the baseline mean is frozen while alarmed so the attack cannot absorb into it
    if not state.active:
        state.mu = params.beta1 * state.mu + (1 - params.beta1) * x
    return AlarmState(state.active, state.last_change_sample)


class CusumDetector:
    """Streaming CUSUM over one field of FilteredSample ('syn' or 'entropy')."""

    LOG_COLUMNS = ("sample_index", "input", "mu", "S", "alarm")

    def __init__(self, params: CusumParams, feature: str):
        if feature not in ("syn", "entropy", "rate"):
            raise ValueError(f"unknown feature {feature!r}")
        self.params = params
        self.feature = feature
        self.state = CusumState()
        self.last_input = 0.0
        self.index = -1

    def update(self, sample: FilteredSample) -> bool:
        self.index = sample.index
        self.last_input = getattr(sample, self.feature)
        return cusum_step(self.state, self.params, self.last_input).active

    def log_row(self) -> tuple:
        return (self.index, self.last_input, self.state.mu, self.state.S, int(self.state.active))


def cusum_syn_detector(params: CusumParams = CUSUM_SYN_PARAMS) -> CusumDetector:
    return CusumDetector(params, "syn")


def cusum_entropy_detector(params: CusumParams = CUSUM_ENTROPY_PARAMS) -> CusumDetector:
    return CusumDetector(params, "entropy")


def _run(detector: CusumDetector, aggregates: Iterable[IntervalAggregate], window_len: int):
    from .evaluation import AlarmTimeline

    samples = []
    start = 0
    for i, fs in enumerate(FeatureExtractor(window_len).run(aggregates)):
        if i == 0:
            start = fs.start_second
        samples.append(detector.update(fs))
    return AlarmTimeline(samples, window_len, start)


def cusum_syn_detect(aggregates: Iterable[IntervalAggregate], params: CusumParams = CUSUM_SYN_PARAMS,
                     window_len: int = DEFAULT_WINDOW):
    return _run(cusum_syn_detector(params), aggregates, window_len)


def cusum_entropy_detect(aggregates: Iterable[IntervalAggregate],
                         params: CusumParams = CUSUM_ENTROPY_PARAMS,
                         window_len: int = DEFAULT_WINDOW):
    return _run(cusum_entropy_detector(params), aggregates, window_len)
