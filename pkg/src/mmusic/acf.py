"""Autocovariance estimation from gapped samples.

Only pairs in which both samples are available contribute. For lag ``h`` the
estimate is the plain average of ``x[i+h] * conj(x[i])`` over those pairs, so
with a full mask it reduces to the usual unbiased estimator that divides by
``N - h``. No mean is removed.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_int
from .signal_model import AvailabilityMask, MaskedSamples


@dataclass(frozen=True)
class AcfEstimate:
    """Autocovariance values and valid-pair counts for lags ``0..max_lag``.

    Lags with no valid pair have ``defined[h] == False`` and a NaN value.
    """

    values: np.ndarray
    pair_counts: np.ndarray
    pulse_count: int

    @property
    def max_lag(self):
        return self.values.size - 1

    @property
    def defined(self):
        return self.pair_counts > 0


def _as_flags(mask):
    return mask.flags if isinstance(mask, AvailabilityMask) else np.asarray(mask, bool)


def count_pairs(mask, lag):
    """Number of indices ``i`` with both pulse ``i`` and ``i + lag`` available."""
    flags = _as_flags(mask)
    n = flags.size
    lag = check_int(lag, "lag", minimum=0, maximum=n - 1)
    return int(np.count_nonzero(flags[lag:] & flags[: n - lag]))


def estimate_acf(data, max_lag):
    """Estimate the autocovariance at lags ``0..max_lag`` from valid pairs only.

    Parameters
    ----------
    data : MaskedSamples
    max_lag : int
        Largest lag, ``0 <= max_lag < N``.

    Returns
    -------
    AcfEstimate
    """
    if not isinstance(data, MaskedSamples):
        data = MaskedSamples(data)
    flags = data.mask.flags
    n = flags.size
    max_lag = check_int(max_lag, "max_lag", minimum=0, maximum=n - 1)
    # masked entries are replaced, not multiplied, so NaN/inf there never leak
    x = np.where(flags, data.samples, 0.0)
    occupancy = flags.astype(np.int64)

    counts = np.empty(max_lag + 1, dtype=np.int64)
    sums = np.empty(max_lag + 1, dtype=np.complex128)
    counts[0] = occupancy.sum()
    sums[0] = np.sum(x.real**2 + x.imag**2)
    for h in range(1, max_lag + 1):
        counts[h] = occupancy[h:] @ occupancy[: n - h]
        sums[h] = np.dot(x[h:], np.conj(x[: n - h]))

    values = np.full(max_lag + 1, np.nan + 1j * np.nan)
    ok = counts > 0
    values[ok] = sums[ok] / counts[ok]
    return AcfEstimate(values=values, pair_counts=counts, pulse_count=n)
