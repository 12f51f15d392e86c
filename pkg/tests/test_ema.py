import itertools
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ddoswatch.ema import (AlarmState, Ema4Detector, EmaParams4, EmaState, IndexMismatch, diff_signal,
                           ema_update)
from ddoswatch.features import FilteredSample, Kind, SeriesSample


def closed_form(xs, n, N):
    """Finite-window EMA at index n, exact rational arithmetic."""
    a = Fraction(2, N + 1)
    total = (1 - a) ** (N - 1) * Fraction(xs[n - N + 1])
    for s in range(N - 1):
        total += a * (1 - a) ** s * Fraction(xs[n - s])
    return total


def test_ema_examples():
    s = EmaState(2)
    ema_update(s, 0.0)
    assert ema_update(s, 3.0) == pytest.approx(2.0, abs=1e-12)
    assert float(closed_form([0, 3], 1, 2)) == 2.0
    s = EmaState(3)
    assert [ema_update(s, x) for x in (4, 4, 8)] == [4, 4, 6]
    assert abs(s.current - float(closed_form([4, 4, 8], 2, 3))) <= 1e-9


def test_ema_state_basics():
    s = EmaState(4)
    assert s.current is None and not s.warm
    assert s.alpha == pytest.approx(0.4)
    for _ in range(4):
        ema_update(s, 1.5)
    assert s.current == 1.5 and s.warm
    assert EmaState(1).alpha == 1.0
    with pytest.raises(ValueError):
        EmaState(0)


@given(st.sampled_from([2, 4, 6, 8]),
       st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=24, max_size=40))
def test_ema_matches_closed_form(N, xs):
    s = EmaState(N)
    for n, x in enumerate(xs):
        v = ema_update(s, x)
        if n >= N - 1:
            assert abs(v - float(closed_form(xs, n, N))) <= 1e-9


@given(st.integers(1, 10), st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50))
def test_ema_stays_within_input_range(N, xs):
    s = EmaState(N)
    for i, x in enumerate(xs):
        v = ema_update(s, x)
        lo, hi = min(xs[:i + 1]), max(xs[:i + 1])
        assert lo - 1e-9 * max(1, abs(lo)) <= v <= hi + 1e-9 * max(1, abs(hi))


def test_diff_signal():
    assert diff_signal(2.0, 2.0) == 0.0
    assert diff_signal(0.3, 1.5) == pytest.approx(-1.2)
    assert diff_signal(5.0, 3.0) == 2.0


# --- parameters -------------------------------------------------------------

def test_params_defaults_and_aliases():
    p = EmaParams4()
    assert (p.ema_fast_interval, p.ema_slow_interval, p.ema_packet_fast_interval,
            p.ema_packet_slow_interval) == (2, 6, 4, 8)
    assert (p.tr_ent_alarm, p.tr_ent_no_alarm, p.tr_pkt_alarm, p.tr_pkt_no_alarm) == (-0.74, 0.10, 0.10, -0.50)
    q = EmaParams4.from_dict({"emaSlowInterval": 4, "trEntAlarm": -0.5})
    assert q.ema_slow_interval == 4 and q.tr_ent_alarm == -0.5
    assert EmaParams4.from_dict(q.to_dict()) == q
    assert EmaParams4(ema_slow_interval=4.0).ema_slow_interval == 4


@pytest.mark.parametrize("kwargs", [
    {"ema_fast_interval": 0},
    {"ema_fast_interval": 6, "ema_slow_interval": 6},
    {"ema_packet_fast_interval": 9},
    {"tr_ent_alarm": 0.2, "tr_ent_no_alarm": 0.1},
    {"tr_pkt_alarm": -1.0},
    {"ema_slow_interval": 4.5},
])
def test_params_invariants(kwargs):
    with pytest.raises(ValueError):
        EmaParams4(**kwargs)


def test_params_unknown_key():
    with pytest.raises(ValueError, match="unknown"):
        EmaParams4.from_dict({"fastInterval": 2})


def test_positive_alarm_threshold_warns():
    with pytest.warns(UserWarning, match="tr_ent_alarm"):
        EmaParams4.from_dict({"trEntAlarm": 0.74, "trEntNoAlarm": 0.8})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        EmaParams4.from_dict({"trEntAlarm": -0.74})


# --- alarm logic ------------------------------------------------------------

CANON = EmaParams4()


def test_decide_examples():
    d = Ema4Detector()
    assert d.decide(AlarmState(False, -1), -1.5, 0.2, 5) == AlarmState(True, 5)
    on = AlarmState(True, 3)
    assert d.decide(on, 0.0, 0.0, 7) is on
    assert d.decide(on, 0.5, -0.8, 7) == AlarmState(False, 7)


BANDS_E = {"below": CANON.tr_ent_alarm - 0.5, "inside": 0.0, "above": CANON.tr_ent_no_alarm + 0.5}
BANDS_R = {"below": CANON.tr_pkt_no_alarm - 0.5, "inside": 0.0, "above": CANON.tr_pkt_alarm + 0.5}


def expected(prev: bool, e_band: str, r_band: str) -> bool:
    if e_band == "below" and r_band == "above":
        return True
    if e_band == "above" and r_band == "below":
        return False
    return prev


@pytest.mark.parametrize("prev,e_band,r_band",
                         list(itertools.product([False, True], BANDS_E, BANDS_R)))
def test_hysteresis_cells(prev, e_band, r_band):
    d = Ema4Detector()
    state = AlarmState(prev, 4)
    out = d.decide(state, BANDS_E[e_band], BANDS_R[r_band], 9)
    assert out.active == expected(prev, e_band, r_band)
    if out.active == prev:
        assert out is state


@pytest.mark.parametrize("ent,rate,prev", [
    (CANON.tr_ent_alarm, 1.0, False),        # equality on the entropy alarm edge
    (-1.0, CANON.tr_pkt_alarm, False),       # equality on the rate alarm edge
    (CANON.tr_ent_no_alarm, -1.0, True),
    (1.0, CANON.tr_pkt_no_alarm, True),
])
def test_threshold_equality_never_changes_state(ent, rate, prev):
    d = Ema4Detector()
    s = AlarmState(prev, 0)
    assert d.decide(s, ent, rate, 1) is s


def sample(i, e, r):
    return FilteredSample(i, 10 * i, e, r, 0.0)


def test_step_index_mismatch():
    d = Ema4Detector()
    with pytest.raises(IndexMismatch):
        d.step(SeriesSample(0, 0.5, Kind.ENTROPY), SeriesSample(1, 10.0, Kind.RATE))


def test_warmup_suppresses_alarm():
    p = EmaParams4(tr_ent_alarm=-0.05, tr_ent_no_alarm=0.05, tr_pkt_alarm=1, tr_pkt_no_alarm=-1)
    d = Ema4Detector(p)
    # a violent step at sample 1 would alarm immediately without the warm-up guard
    seq = [(0.9, 100)] + [(0.1, 5000)] * 3
    out = [d.update(sample(i, e, r)) for i, (e, r) in enumerate(seq)]
    assert out == [False] * 4
    assert p.warmup == 8


def test_step_change_alarm_and_clear():
    p = EmaParams4(ema_slow_interval=4, tr_ent_alarm=-0.02, tr_ent_no_alarm=0.02,
                   tr_pkt_alarm=100, tr_pkt_no_alarm=-100)
    d = Ema4Detector(p)
    seq = [(0.95, 500)] * 10 + [(0.80, 1700)] * 6 + [(0.95, 500)] * 6
    out = [d.update(sample(i, e, r)) for i, (e, r) in enumerate(seq)]
    onset = out.index(True)
    assert onset >= 10
    # first sample after the step is the earliest possible transition
    assert onset == 10
    assert out[15] and not out[-1]
    assert d.state.last_change_sample > 15
    row = d.log_row()
    assert len(row) == len(Ema4Detector.LOG_COLUMNS) and row[0] == len(seq) - 1


def test_canonical_parameters_no_alarm_before_sample_two():
    d = Ema4Detector()
    seq = [(0.95, 500)] + [(0.0, 2000)] * 20
    out = [d.update(sample(i, e, r)) for i, (e, r) in enumerate(seq)]
    assert not any(out[:2])


diff_seq = st.lists(st.tuples(st.floats(-1, 1, allow_nan=False), st.floats(-5, 5, allow_nan=False)),
                    max_size=60)


@given(diff_seq, st.floats(-1, -0.01), st.floats(-1, -0.01))
def test_alarm_pointwise_monotone_in_entropy_threshold(diffs, t1, t2):
    lo, hi = sorted((t1, t2))
    a = Ema4Detector(EmaParams4(tr_ent_alarm=lo, tr_ent_no_alarm=0.1, tr_pkt_alarm=0.1))
    b = Ema4Detector(EmaParams4(tr_ent_alarm=hi, tr_ent_no_alarm=0.1, tr_pkt_alarm=0.1))
    sa = sb = AlarmState(False, -1)
    for i, (e, r) in enumerate(diffs):
        sa = a.decide(sa, e, r, i)
        sb = b.decide(sb, e, r, i)
        # the stricter (lower) threshold never alarms where the looser one does not
        assert sb.active or not sa.active
