import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddoswatch.detect import DetectorKind, run_on_samples
from ddoswatch.evaluation import (AlarmTimeline, EvalReport, LengthMismatch, PreparedScenario, SweepError,
                                  best_of, downsample, expand_grid, f1_score, optimize, read_report_csv,
                                  read_roc_csv, roc_points, score, score_samples, sweep, upper_envelope,
                                  write_report_csv, write_roc_csv)
from ddoswatch.features import FilteredSample


@pytest.mark.parametrize("recall,precision,f1", [(0.76, 0.86, 0.81), (0.59, 0.86, 0.70), (0.76, 0.90, 0.82)])
def test_f1_fixtures(recall, precision, f1):
    assert abs(f1_score(precision, recall) - f1) <= 0.005


def test_f1_zero_denominator():
    assert f1_score(0.0, 0.0) == 0.0


def test_downsample_any_second():
    ref = [0] * 9 + [1] + [0] * 10 + [1] * 10
    assert downsample(ref, 10).tolist() == [True, False, True]
    assert downsample(ref, 10, offset=5).tolist() == [True, True]
    assert downsample([], 10).tolist() == []


def test_perfect_detector():
    truth = [False, True, True, False, True, False]
    r = score_samples(truth, truth)
    assert (r.recall, r.precision, r.f1) == (1.0, 1.0, 1.0)
    assert (r.event_detection_rate, r.event_false_positive_rate) == (1.0, 0.0)
    assert r.mean_detection_delay == 0.0 and r.events == 2


def test_event_level_scoring():
    truth = [0, 1, 1, 1, 0, 0, 0, 1, 1, 0, 0, 0]
    alarm = [0, 0, 1, 1, 1, 0, 1, 0, 0, 0, 1, 0]
    r = score_samples(alarm, truth, period=10)
    assert (r.tp, r.fp, r.tn, r.fn) == (2, 3, 4, 3)
    assert r.events == 2 and r.detected_events == 1
    assert r.episodes == 3 and r.false_episodes == 2
    assert r.event_false_positive_rate == pytest.approx(2 / 3)
    assert r.mean_detection_delay == 10.0


def test_no_events_and_no_detections():
    r = score_samples([False] * 4, [False] * 4)
    assert r.event_detection_rate == 0.0 and math.isnan(r.mean_detection_delay)
    assert r.recall == 0.0 and r.precision == 0.0 and r.f1 == 0.0


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        score_samples([True], [True, False])
    with pytest.raises(LengthMismatch):
        score(AlarmTimeline([False] * 3), [False] * 40)


def test_score_aligns_offsets():
    tl = AlarmTimeline([False, True], sample_period=10, start_second=20)
    ref = np.zeros(40, dtype=bool)
    ref[31] = True
    r = score(tl, ref, reference_start=0)
    assert r.tp == 1 and r.tn == 1


bools = st.lists(st.booleans(), min_size=1, max_size=60)


@given(bools.flatmap(lambda a: st.tuples(st.just(a), st.lists(st.booleans(), min_size=len(a),
                                                                max_size=len(a)))))
def test_score_invariants(pair):
    alarms, truth = pair
    r = score_samples(alarms, truth)
    assert r.tp + r.fp + r.tn + r.fn == len(alarms)
    assert 0.0 <= r.event_detection_rate <= 1.0
    swapped = score_samples(truth, alarms)
    assert swapped.recall == pytest.approx(r.precision) and swapped.precision == pytest.approx(r.recall)
    if r.event_detection_rate == 1.0:
        from ddoswatch.trafficgen import runs
        for s, e in runs(truth):
            assert any(alarms[s:e])


def test_timeline_roundtrip(tmp_path):
    tl = AlarmTimeline([False, True, True, False], sample_period=10, start_second=30)
    path = tmp_path / "a.csv"
    tl.write(path)
    assert path.read_text().splitlines()[:2] == ["sample_index,start_second,end_second,alarm", "0,30,40,0"]
    assert AlarmTimeline.read(path) == tl
    assert tl.episodes() == [(1, 3)]


def make_prepared():
    """Synthetic filtered series: baseline entropy 0.95/rate 500, two attacks."""
    rng = np.random.default_rng(3)
    samples, ref = [], np.zeros(600, dtype=bool)
    for i in range(60):
        attack = 15 <= i < 25 or 40 <= i < 48
        e = (0.88 if attack else 0.95) + rng.normal(0, 0.003)
        r = (1700 if attack else 500) + rng.normal(0, 20)
        samples.append(FilteredSample(i, 10 * i, e, r, 1100.0 if attack else 10.0))
    ref[150:250] = True
    ref[400:480] = True
    return PreparedScenario(samples, ref, 0, 10)


EMA_POINT = {"ema_slow_interval": 4, "tr_ent_alarm": -0.01, "tr_ent_no_alarm": 0.01,
             "tr_pkt_alarm": 100, "tr_pkt_no_alarm": -100}


def test_sweep_single_point_matches_direct_run():
    prepared = make_prepared()
    (params, rep), = sweep("EMA4", [EMA_POINT], prepared)
    direct = score(run_on_samples(DetectorKind.EMA4, EMA_POINT, prepared.samples), prepared.reference)
    assert rep == direct and params == EMA_POINT
    assert rep.event_detection_rate == 1.0 and rep.false_episodes == 0


def test_sweep_duplicates_identical():
    prepared = make_prepared()
    (_, a), (_, b) = sweep("EMA4", [EMA_POINT, EMA_POINT], prepared)
    assert a == b


def test_sweep_tpr_monotone_in_alarm_threshold():
    prepared = make_prepared()
    grid = {**EMA_POINT, "tr_ent_alarm": [-0.005, -0.02, -0.05, -0.1]}
    tprs = [rep.recall for _, rep in sweep("EMA4", grid, prepared)]
    assert all(a >= b for a, b in zip(tprs, tprs[1:]))
    assert tprs[0] > tprs[-1]


def test_sweep_errors_annotated_or_collected():
    prepared = make_prepared()
    bad = {"tr_ent_alarm": 0.5, "tr_ent_no_alarm": 0.1}
    with pytest.raises(SweepError) as info:
        sweep("EMA4", [EMA_POINT, bad], prepared)
    assert info.value.params == bad
    errors = []
    out = sweep("EMA4", [EMA_POINT, bad], prepared, errors=errors)
    assert len(out) == 1 and errors[0][0] == bad
    with pytest.raises(ValueError):
        sweep("EMA4", [], prepared)


def test_expand_grid():
    assert expand_grid({"a": [1, 2], "b": 3}) == [{"a": 1, "b": 3}, {"a": 2, "b": 3}]
    assert expand_grid([{"a": 1}, {"a": [2, 3]}]) == [{"a": 1}, {"a": 2}, {"a": 3}]


def rep(f1=0.5, precision=0.5, delay=10.0, fp=1, recall=0.5, fpr=0.1):
    return EvalReport(0, fp, 0, 0, recall, precision, f1, fpr, 1.0, 0.0, delay, 1, 1, 1, 0)


def test_best_of_tie_breaks():
    results = [({"i": 0}, rep(f1=0.9)), ({"i": 1}, rep(f1=1.0))]
    assert best_of(results)[0] == {"i": 1}
    results = [({"i": 0}, rep(precision=0.5)), ({"i": 1}, rep(precision=0.7))]
    assert best_of(results)[0] == {"i": 1}
    results = [({"i": 0}, rep(delay=30.0)), ({"i": 1}, rep(delay=20.0)), ({"i": 2}, rep(delay=math.nan))]
    assert best_of(results)[0] == {"i": 1}
    results = [({"i": 0}, rep()), ({"i": 1}, rep())]
    assert best_of(results)[0] == {"i": 0}


def test_best_of_tpr_at_zero_fpr():
    results = [({"i": 0}, rep(recall=0.9, fp=2)), ({"i": 1}, rep(recall=0.6, fp=0))]
    assert best_of(results, "TPR_at_zero_FPR")[0] == {"i": 1}
    with pytest.raises(ValueError):
        optimize("EMA4", [EMA_POINT], make_prepared(), objective="accuracy")


def test_optimize_returns_best():
    prepared = make_prepared()
    params, report = optimize("EMA4", {**EMA_POINT, "tr_ent_alarm": [-0.74, -0.01]}, prepared)
    assert params["tr_ent_alarm"] == -0.01 and report.f1 > 0.8


def test_roc_and_envelope():
    prepared = make_prepared()
    results = sweep("CUSUM_ENTROPY", {"beta1": [0.5, 0.9], "beta2": 1.0, "k": [0.0, 0.02, 0.1],
                                      "h": [0.01, 0.05], "K": 1.0}, prepared)
    pts = roc_points(results)
    assert pts == sorted(pts)
    env = upper_envelope(pts)
    assert all(a[0] <= b[0] and a[1] <= b[1] for a, b in zip(env, env[1:]))


def test_csv_roundtrips(tmp_path):
    prepared = make_prepared()
    results = sweep("EMA4", {**EMA_POINT, "tr_pkt_alarm": [50, 100]}, prepared)
    path = tmp_path / "report.csv"
    write_report_csv(path, results)
    assert read_report_csv(path) == results
    roc = roc_points(results)
    path = tmp_path / "roc.csv"
    write_roc_csv(path, roc)
    assert path.read_text().splitlines()[0] == "fpr,tpr,param_id"
    assert read_roc_csv(path) == roc
