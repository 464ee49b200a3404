"""Matching estimated profiles against ground truth for Monte Carlo studies."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive

DEFAULT_GATE_M = 0.15


@dataclass(frozen=True)
class Match:
    truth_index: int
    estimate_index: int
    range_error_m: float


@dataclass(frozen=True)
class MatchReport:
    """Result of gated nearest-range matching.

    ``range_rmse_m`` and ``amplitude_rms_relative_error`` are ``None`` when
    nothing matched. Amplitude error compares magnitudes only, since the
    absolute phase depends on the start frequency.
    """

    matches: list = field(default_factory=list)
    missed: list = field(default_factory=list)
    spurious: list = field(default_factory=list)
    range_rmse_m: float | None = None
    max_range_error_m: float | None = None
    amplitude_rms_relative_error: float | None = None
    order_correct: bool = False


def match_scatterers(truth, estimate, gate_m=DEFAULT_GATE_M):
    """Greedily pair truth and estimate points, closest range error first.

    Indices refer to positions in the (range-sorted) profiles.
    """
    gate_m = check_positive(gate_m, "gate_m")
    tr, er = truth.ranges, estimate.ranges
    dist = np.abs(np.subtract.outer(tr, er))
    ti, ei = np.nonzero(dist <= gate_m)
    # sort by error, ties broken by indices so input order cannot matter
    order = np.lexsort((ei, ti, dist[ti, ei]))
    used_t, used_e = set(), set()
    matches = []
    for t, e in zip(ti[order], ei[order]):
        if t in used_t or e in used_e:
            continue
        used_t.add(t)
        used_e.add(e)
        matches.append(Match(int(t), int(e), float(er[e] - tr[t])))
    matches.sort(key=lambda m: m.truth_index)
    missed = [i for i in range(len(truth)) if i not in used_t]
    spurious = [j for j in range(len(estimate)) if j not in used_e]

    rmse = max_err = amp_err = None
    if matches:
        errs = np.array([m.range_error_m for m in matches])
        rmse = float(np.sqrt(np.mean(errs**2)))
        max_err = float(np.max(np.abs(errs)))
        ta = np.abs(truth.amplitudes[[m.truth_index for m in matches]])
        ea = np.abs(estimate.amplitudes[[m.estimate_index for m in matches]])
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(ta > 0, (ea - ta) / ta, np.where(ea > 0, np.inf, 0.0))
        amp_err = float(np.sqrt(np.mean(rel**2)))
    order_correct = len(estimate) == len(truth) and not missed and not spurious
    return MatchReport(
        matches=matches,
        missed=missed,
        spurious=spurious,
        range_rmse_m=rmse,
        max_range_error_m=max_err,
        amplitude_rms_relative_error=amp_err,
        order_correct=order_correct,
    )


def spurious_peak_count(profile, floor_db_below_peak=20.0):
    """Number of points within ``floor_db_below_peak`` dB of the strongest one."""
    floor = check_positive(floor_db_below_peak, "floor_db_below_peak", strict=False)
    if len(profile) == 0:
        return 0
    db = profile.magnitude_db
    return int(np.count_nonzero(db >= db.max() - floor))
