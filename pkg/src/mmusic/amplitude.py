"""Least-squares amplitude recovery and profile assembly."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from ._validation import check_complex_vector, check_real_vector
from .exceptions import ConditioningError, InvalidInputError, UnderdeterminedError
from .signal_model import AvailabilityMask, delay_to_range

DB_FLOOR = -300.0

# condition number of F^H F above which the steering is treated as rank deficient
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class SteeringMatrix:
    """Steering columns ``exp(-2j*pi*f_m*delay_k)`` restricted to valid pulses."""

    entries: np.ndarray
    pulse_indices: np.ndarray
    delays: np.ndarray


class ProfilePoint(NamedTuple):
    range_m: float
    amplitude: complex
    magnitude_db: float


@dataclass(frozen=True)
class Profile:
    """Scatterers sorted by range, with complex amplitudes and dB magnitudes."""

    delays: np.ndarray
    amplitudes: np.ndarray

    @classmethod
    def empty(cls):
        return form_profile([], [])

    @property
    def ranges(self):
        return delay_to_range(self.delays)

    @property
    def magnitude_db(self):
        return magnitude_db(self.amplitudes)

    @property
    def points(self):
        return list(self)

    def __len__(self):
        return self.delays.size

    def __iter__(self):
        for r, a, m in zip(self.ranges, self.amplitudes, self.magnitude_db):
            yield ProfilePoint(float(r), complex(a), float(m))


def magnitude_db(amplitudes):
    mag = np.abs(np.asarray(amplitudes, dtype=np.complex128))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, DB_FLOOR)


def build_steering(config, mask, delays):
    """Steering matrix over the valid pulses of ``mask`` for each delay."""
    delays = check_real_vector(delays, "delays", min_size=1)
    flags = mask.flags if isinstance(mask, AvailabilityMask) else np.asarray(mask, bool)
    if flags.size != config.pulse_count:
        raise InvalidInputError(
            f"mask length {flags.size} does not match pulse_count {config.pulse_count}"
        )
    idx = np.flatnonzero(flags)
    if idx.size < delays.size:
        raise UnderdeterminedError(
            f"{idx.size} valid pulses cannot determine {delays.size} amplitudes"
        )
    freqs = config.frequencies[idx]
    entries = np.exp(-2j * np.pi * np.outer(freqs, delays))
    return SteeringMatrix(entries=entries, pulse_indices=idx, delays=delays)


def least_squares_amplitudes(steering, observations):
    """Solve ``min ||F a - y||`` through a QR factorisation of the steering.

    Raises
    ------
    ConditioningError
        When ``cond(F^H F)`` exceeds ``MAX_CONDITION``; the message names the
        two closest delays.
    """
    F = steering.entries
    y = check_complex_vector(observations, "observations")
    if y.size != F.shape[0]:
        raise InvalidInputError(
            f"{y.size} observations for a steering matrix with {F.shape[0]} rows"
        )
    q, r = scipy.linalg.qr(F, mode="economic")
    sv = np.linalg.svd(r, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else (sv[0] / sv[-1]) ** 2
    if cond > MAX_CONDITION:
        pair = _closest_pair(steering.delays)
        raise ConditioningError(
            f"steering is rank deficient (cond {cond:.3g}); "
            f"delays {pair[0]:.9g} s and {pair[1]:.9g} s are too close",
            delay_pair=pair,
            condition=cond,
        )
    return scipy.linalg.solve_triangular(r, q.conj().T @ y)


def _closest_pair(delays):
    d = np.sort(np.asarray(delays, dtype=float))
    if d.size < 2:
        return (float(d[0]), float(d[0]))
    i = int(np.argmin(np.diff(d)))
    return (float(d[i]), float(d[i + 1]))


def form_profile(delays, amplitudes):
    """Arrange scatterers by ascending range.

    Ties are broken by descending magnitude, then by phase, so the order is
    total for distinct points.
    """
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=np.complex128))
    if delays.shape != amplitudes.shape or delays.ndim != 1:
        raise InvalidInputError(
            f"{delays.size} delays but {amplitudes.size} amplitudes"
        )
    order = np.lexsort((np.angle(amplitudes), -np.abs(amplitudes), delays))
    return Profile(delays=delays[order], amplitudes=amplitudes[order])
