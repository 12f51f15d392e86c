"""Documented parameter grids for sweeps and optimization.

Entropy thresholds live on the normalized [0, 1] entropy scale, rate
thresholds in packets per second of the max-filtered rate. The canonical
detector settings are always part of each grid.
"""
from __future__ import annotations

import itertools

from .detect import DetectorKind

# EMA periods (fast < slow for both series) and threshold values; points
# that violate the hysteresis invariants are left out rather than skipped.
EMA4_PERIODS = [(ef, es, pf, ps)
                for ef, es, pf, ps in itertools.product([1, 2], [3, 4, 6], [1, 2, 4], [3, 4, 8])
                if ef < es and pf < ps]
EMA4_THRESHOLDS = {
    "tr_ent_alarm": [-0.74, -0.02, -0.01, -0.005],
    "tr_ent_no_alarm": [0.1, 0.01, 0.0],
    "tr_pkt_alarm": [0.1, 100, -100],
    "tr_pkt_no_alarm": [-0.5, -200, -400],
}


def _ema4_points() -> list[dict]:
    points = []
    for ef, es, pf, ps in EMA4_PERIODS:
        for ea, en, pa, pn in itertools.product(*EMA4_THRESHOLDS.values()):
            if ea < en and pn < pa:
                points.append({"ema_fast_interval": ef, "ema_slow_interval": es,
                               "ema_packet_fast_interval": pf, "ema_packet_slow_interval": ps,
                               "tr_ent_alarm": ea, "tr_ent_no_alarm": en,
                               "tr_pkt_alarm": pa, "tr_pkt_no_alarm": pn})
    return points


EMA4_GRID = _ema4_points()

CUSUM_SYN_GRID = {
    "beta1": [0.148, 0.5, 0.9],
    "beta2": [1, 2, 3],
    "k": [5, 18, 50],
    "h": [0.5, 6.8, 20],
    "K": [0.01, 0.1, 1],
}

CUSUM_ENTROPY_GRID = {
    "beta1": [0.139, 0.5, 0.8, 0.95],
    "beta2": [1.0],
    "k": [0.0, 0.01, 0.02, 0.03, 0.035, 0.04, 0.045, 0.05],
    "h": [0.002, 0.005, 0.01, 0.02, 0.05],
    "K": [1.0],
    "direction": ["decrease"],
}


def default_grid(kind):
    kind = DetectorKind.parse(kind)
    return {DetectorKind.EMA4: EMA4_GRID,
            DetectorKind.CUSUM_SYN: CUSUM_SYN_GRID,
            DetectorKind.CUSUM_ENTROPY: CUSUM_ENTROPY_GRID}[kind]
