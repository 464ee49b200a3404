"""Hermitian Toeplitz covariance forming and matrix-size selection."""

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_positive
from .exceptions import (
    InsufficientDataError,
    InvalidInputError,
    NoDataError,
    SizeRuleFallbackWarning,
)


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray

    @property
    def size(self):
        return self.entries.shape[0]


def default_max_size(pulse_count):
    return max(2, min(pulse_count // 4, 128))


def _size_limit(acf, max_size):
    max_size = check_int(max_size, "max_size", minimum=2)
    if acf.pair_counts[0] == 0:
        raise NoDataError("no valid samples: Q(0) = 0")
    return min(max_size, acf.max_lag + 1)


SIZE_RULES = ("half_expected", "half_full", "all_defined")


def select_matrix_size(acf, max_size, reference="full"):
    """Largest size ``L <= max_size`` whose lags all keep at least half their pairs.

    With ``reference="full"`` the requirement is ``Q(h) >= (N - h)/2`` for every
    ``h < L``, i.e. half the pairs a complete pulse train would give. With
    ``reference="expected"`` it is half the pairs expected when ``A = Q(0)``
    pulses survive, ``Q(h) >= (A/N)**2 * (N - h) / 2``; the two agree for a
    full mask.

    Returns 1 when only lag 0 qualifies (or not even that one). ``max_size`` is
    also capped by the lags actually present in ``acf``.
    """
    if reference not in ("full", "expected"):
        raise InvalidInputError(f"reference must be 'full' or 'expected', got {reference!r}")
    limit = _size_limit(acf, max_size)
    n = acf.pulse_count
    h = np.arange(limit)
    needed = (n - h).astype(float)
    if reference == "expected":
        needed *= (acf.pair_counts[0] / n) ** 2
    ok = 2 * acf.pair_counts[:limit] >= needed
    failing = np.flatnonzero(~ok)
    size = limit if failing.size == 0 else int(failing[0])
    return max(size, 1)


def largest_defined_size(acf, max_size):
    """Largest size ``L <= max_size`` with every lag ``h < L`` estimable."""
    limit = _size_limit(acf, max_size)
    failing = np.flatnonzero(acf.pair_counts[:limit] == 0)
    return limit if failing.size == 0 else int(failing[0])


def choose_matrix_size(acf, max_size, rule="half_expected"):
    """Pick the covariance size, falling back when the rule gives ``L < 2``.

    Parameters
    ----------
    rule : {"half_expected", "half_full", "all_defined"}
        ``"half_full"`` and ``"half_expected"`` call :func:`select_matrix_size`
        with ``reference="full"`` and ``"expected"``; ``"all_defined"`` takes
        the largest size whose lags all have a valid pair.

    Returns ``(size, fell_back)``. The fallback takes the largest size whose
    lags are all defined and emits :class:`SizeRuleFallbackWarning`.
    """
    if rule not in SIZE_RULES:
        raise InvalidInputError(f"rule must be one of {SIZE_RULES}, got {rule!r}")
    if rule == "all_defined":
        size = largest_defined_size(acf, max_size)
    else:
        reference = "full" if rule == "half_full" else "expected"
        size = select_matrix_size(acf, max_size, reference)
    if size >= 2:
        return size, False
    size = largest_defined_size(acf, max_size)
    if size < 2:
        raise InsufficientDataError(
            "lag 1 has no valid sample pair; cannot form a covariance of size >= 2"
        )
    warnings.warn(
        f"half-occupancy size rule admits no L >= 2; using L = {size} "
        "(largest size with every lag estimable)",
        SizeRuleFallbackWarning,
        stacklevel=2,
    )
    return size, True


def form_toeplitz(acf, size, loading=0.0):
    """Hermitian Toeplitz matrix with ``C[i, j] = c(j - i)`` and ``c(-h) = conj(c(h))``.

    Parameters
    ----------
    acf : AcfEstimate
    size : int
        Matrix size; lags ``0..size-1`` must all be defined.
    loading : float, optional
        Non-negative value added to the diagonal.
    """
    size = check_int(size, "size", minimum=1)
    loading = check_positive(loading, "loading", strict=False)
    if size > acf.max_lag + 1:
        raise InsufficientDataError(
            f"size {size} needs lags up to {size - 1}, estimate stops at {acf.max_lag}"
        )
    missing = np.flatnonzero(~acf.defined[:size])
    if missing.size:
        raise InsufficientDataError(f"lag {int(missing[0])} has no valid sample pair")
    c = acf.values[:size].copy()
    c[0] = c[0].real + loading
    lag = np.subtract.outer(np.arange(size), np.arange(size))  # i - j
    entries = np.where(lag <= 0, c[np.abs(lag)], np.conj(c[np.abs(lag)]))
    return CovarianceMatrix(entries)
