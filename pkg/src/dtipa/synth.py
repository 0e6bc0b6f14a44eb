"""Synthetic 107 x 18 metro survey for tests and documentation.

Rows are generated leaf by leaf from a fixed six-leaf rule structure
(ticketing, arrival info, safety, station accessibility, car crowding) so
that the full pipeline recovers it. A shared per-respondent satisfaction
factor drives the remaining attributes, which keeps the questionnaire
internally consistent without making those attributes good splitters.
Column sums of ticketing and safety are then nudged to fixed totals so the
means land on 4.21 and 4.50 (to two decimals).
"""

from __future__ import annotations

import numpy as np

from .survey import SurveyMatrix

ATTRIBUTES = (
    "station_accessibility",
    "wayfinding_signage",
    "ticketing_topup",
    "gate_waiting",
    "route_map_info",
    "escalators_elevators",
    "station_crowding",
    "arrival_info",
    "waiting_time",
    "car_crowding",
    "noise",
    "lighting",
    "temperature_ventilation",
    "hygiene",
    "staff_service",
    "safety_security",
    "operating_hours",
    "overall",
)
OVERALL = "overall"

# baseline level of each free attribute before the satisfaction factor
_BASE = {
    "wayfinding_signage": 4.5,
    "gate_waiting": 4.2,
    "route_map_info": 4.6,
    "escalators_elevators": 4.55,
    "station_crowding": 3.9,
    "waiting_time": 4.4,
    "noise": 4.15,
    "lighting": 4.6,
    "temperature_ventilation": 4.45,
    "hygiene": 4.25,
    "staff_service": 4.45,
    "operating_hours": 4.6,
}

# per leaf: (lo, hi, centre) for ticketing, arrival info, safety,
# accessibility and car crowding, then the overall-class counts
_LEAVES = (
    ((2, 4, 3.2), (1, 3, 2.8), (3, 5, 4.2), (3, 5, 4.6), (2, 5, 4.0), {3: 8}),
    ((2, 4, 3.2), (4, 5, 4.6), (3, 5, 4.2), (3, 5, 4.6), (2, 5, 4.0), {4: 38}),
    ((5, 5, 5.0), (4, 5, 4.6), (3, 4, 3.8), (2, 4, 3.6), (4, 5, 4.3), {3: 8}),
    ((5, 5, 5.0), (4, 5, 4.6), (3, 4, 3.8), (5, 5, 5.0), (4, 5, 4.3), {4: 8}),
    ((5, 5, 5.0), (4, 5, 4.6), (5, 5, 5.0), (4, 5, 4.6), (1, 3, 2.8), {4: 10}),
    ((5, 5, 5.0), (4, 5, 4.6), (5, 5, 5.0), (4, 5, 4.6), (4, 5, 4.1), {5: 35}),
)
_STRUCTURAL = ("ticketing_topup", "arrival_info", "safety_security",
               "station_accessibility", "car_crowding")

TICKETING_TOTAL = 451   # mean 4.215 -> reported 4.21
SAFETY_TOTAL = 481      # mean 4.495 -> reported 4.50
DEFAULT_SEED = 7

JUDGMENTS_CSV = """i,j,value
car_crowding,station_crowding,1/4
car_crowding,ticketing_topup,1/9
station_crowding,ticketing_topup,1/5
"""


def _draw(rng, lo: int, hi: int, level: float) -> int:
    """Integer in [lo, hi] centred near ``level``."""
    return int(np.clip(np.rint(level + rng.normal(0, 0.45)), lo, hi))


def _nudge(col: np.ndarray, target: int, lo: np.ndarray, hi: np.ndarray, rng) -> None:
    """Shift single cells by +-1 within their bounds until the column sums to ``target``."""
    order = rng.permutation(len(col))
    while col.sum() != target:
        step = 1 if col.sum() < target else -1
        for i in order:
            if lo[i] <= col[i] + step <= hi[i]:
                col[i] += step
                break
        else:
            raise ValueError("cannot reach target column sum within bounds")


def synth_survey(seed: int = DEFAULT_SEED) -> SurveyMatrix:
    rng = np.random.default_rng(seed)
    idx = {name: i for i, name in enumerate(ATTRIBUTES)}
    rows = []
    bounds = []
    for t_rng, r_rng, s_rng, a_rng, c_rng, classes in _LEAVES:
        for cls, count in sorted(classes.items()):
            for _ in range(count):
                factor = rng.normal(0, 0.45)
                row = [0] * len(ATTRIBUTES)
                for name, base in _BASE.items():
                    row[idx[name]] = _draw(rng, 1, 5, base + factor)
                ranges = dict(zip(_STRUCTURAL, (t_rng, r_rng, s_rng, a_rng, c_rng)))
                for name, (lo, hi, centre) in ranges.items():
                    row[idx[name]] = _draw(rng, lo, hi, centre + factor)
                row[idx[OVERALL]] = cls
                rows.append(row)
                bounds.append(ranges)
    scores = np.array(rows, dtype=np.int64)
    for name, target in (("ticketing_topup", TICKETING_TOTAL), ("safety_security", SAFETY_TOTAL)):
        lo = np.array([b[name][0] for b in bounds])
        hi = np.array([b[name][1] for b in bounds])
        col = scores[:, idx[name]].copy()
        _nudge(col, target, lo, hi, rng)
        scores[:, idx[name]] = col
    order = rng.permutation(len(scores))
    return SurveyMatrix(ATTRIBUTES, idx[OVERALL], scores[order])
