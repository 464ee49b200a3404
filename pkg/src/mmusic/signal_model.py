"""Stepped-frequency baseband samples from point scatterers, and availability masks.

One complex sample is produced per pulse, after quadrature demodulation:

    y[n] = sum_k amp_k * exp(-2j*pi*f_n*delay_k) + e[n],   f_n = f0 + n*df

The transmitted envelope is not modelled. Noise is circular complex Gaussian
with variance ``10**(-snr_db/10)``, i.e. the SNR is quoted for a unit-amplitude
scatterer and split evenly between the real and imaginary parts.

The start frequency only contributes a constant phase ``exp(-2j*pi*f0*delay_k)``
per scatterer, which is absorbed into the complex amplitude; it has no effect
on delay estimation.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    check_bool_vector,
    check_complex_vector,
    check_int,
    check_positive,
    check_real_vector,
)
from .exceptions import InvalidInputError

SPEED_OF_LIGHT = 299_792_458.0

X_BAND_START_FREQUENCY = 10.0e9


@dataclass(frozen=True)
class RadarConfig:
    """Pulse-train geometry and noise level.

    Parameters
    ----------
    pulse_count : int
        Number of pulses (and samples), at least 2.
    start_frequency : float
        Carrier of pulse 0 in Hz.
    frequency_step : float
        Carrier increment between consecutive pulses in Hz.
    noise_snr_db : float or None
        Per-sample SNR for a unit-amplitude scatterer. ``None`` means noiseless.
    """

    pulse_count: int
    start_frequency: float = X_BAND_START_FREQUENCY
    frequency_step: float = 1.875e6
    noise_snr_db: float | None = None

    def __post_init__(self):
        check_int(self.pulse_count, "pulse_count", minimum=2)
        check_positive(self.frequency_step, "frequency_step")
        check_positive(self.start_frequency, "start_frequency", strict=False)
        if self.noise_snr_db is not None and not np.isfinite(self.noise_snr_db):
            raise InvalidInputError("noise_snr_db must be finite or None")

    @property
    def bandwidth(self):
        """Synthetic bandwidth ``pulse_count * frequency_step`` in Hz."""
        return self.pulse_count * self.frequency_step

    @property
    def frequencies(self):
        return self.start_frequency + np.arange(self.pulse_count) * self.frequency_step

    @property
    def unambiguous_delay(self):
        """Length of the delay window ``1/frequency_step`` in seconds."""
        return 1.0 / self.frequency_step

    @property
    def unambiguous_range(self):
        return SPEED_OF_LIGHT / (2.0 * self.frequency_step)

    @property
    def range_resolution(self):
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth)

    @property
    def noise_variance(self):
        if self.noise_snr_db is None:
            return 0.0
        return 10.0 ** (-self.noise_snr_db / 10.0)


def range_to_delay(range_m):
    return 2.0 * np.asarray(range_m, dtype=float) / SPEED_OF_LIGHT


def delay_to_range(delay_s):
    return SPEED_OF_LIGHT * np.asarray(delay_s, dtype=float) / 2.0


@dataclass(frozen=True)
class ScattererSet:
    """Point scatterers as parallel arrays of delays (s) and complex amplitudes."""

    delays: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        delays = check_real_vector(self.delays, "delays")
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=np.complex128))
        if amps.ndim != 1 or not np.isfinite(amps).all():
            raise InvalidInputError("amplitudes must be a finite 1-D vector")
        if delays.shape != amps.shape:
            raise InvalidInputError(
                f"{delays.size} delays but {amps.size} amplitudes"
            )
        if (delays < 0).any():
            raise InvalidInputError("delays must be non-negative")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_ranges(cls, ranges_m, amplitudes):
        return cls(range_to_delay(ranges_m), amplitudes)

    @property
    def ranges(self):
        return delay_to_range(self.delays)

    def __len__(self):
        return self.delays.size


@dataclass(frozen=True)
class AvailabilityMask:
    """Per-pulse availability flags; ``True`` marks a usable sample."""

    flags: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "flags", check_bool_vector(self.flags, "flags"))
        self.flags.setflags(write=False)

    @classmethod
    def full(cls, pulse_count):
        return cls(np.ones(pulse_count, dtype=bool))

    def __len__(self):
        return self.flags.size

    def __and__(self, other):
        if len(other) != len(self):
            raise InvalidInputError(
                f"mask lengths differ: {len(self)} and {len(other)}"
            )
        return AvailabilityMask(self.flags & other.flags)

    def __eq__(self, other):
        if not isinstance(other, AvailabilityMask):
            return NotImplemented
        return np.array_equal(self.flags, other.flags)

    __hash__ = None

    @property
    def valid_count(self):
        return int(self.flags.sum())

    @property
    def valid_indices(self):
        return np.flatnonzero(self.flags)

    @property
    def missing_indices(self):
        return np.flatnonzero(~self.flags)


@dataclass(frozen=True)
class MaskedSamples:
    """Complex samples with their availability mask.

    Entries at masked-out indices are kept for shape only and are never read
    by the estimators.
    """

    samples: np.ndarray
    mask: AvailabilityMask = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.samples)
        mask = self.mask if self.mask is not None else AvailabilityMask.full(arr.size)
        if not isinstance(mask, AvailabilityMask):
            mask = AvailabilityMask(mask)
        if arr.ndim != 1 or arr.size != len(mask):
            raise InvalidInputError(
                f"samples length {arr.size} does not match mask length {len(mask)}"
            )
        arr = check_complex_vector(arr, "samples", allow_nonfinite_where=~mask.flags)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "mask", mask)

    def __len__(self):
        return self.samples.size

    @property
    def valid_samples(self):
        return self.samples[self.mask.flags]


def synthesize(config, target, seed=None):
    """Simulate one sample per pulse for a point-scatterer target.

    Parameters
    ----------
    config : RadarConfig
    target : ScattererSet
        Non-empty; every delay must lie in ``[0, 1/frequency_step)``.
    seed : int, optional
        Seed for the noise generator. Ignored when the config is noiseless.

    Returns
    -------
    MaskedSamples
        Samples with an all-true mask.
    """
    if len(target) == 0:
        raise InvalidInputError("target has no scatterers")
    window = config.unambiguous_delay
    outside = target.delays >= window
    if outside.any():
        bad = float(target.delays[outside][0])
        raise InvalidInputError(
            f"delay {bad:.6g} s is outside the unambiguous window [0, {window:.6g}) s"
        )
    phase = -2j * np.pi * np.outer(config.frequencies, target.delays)
    y = np.exp(phase) @ target.amplitudes
    if config.noise_snr_db is not None:
        rng = np.random.default_rng(seed)
        scale = np.sqrt(config.noise_variance / 2.0)
        noise = rng.standard_normal(config.pulse_count) + 1j * rng.standard_normal(
            config.pulse_count
        )
        y = y + scale * noise
    return MaskedSamples(y, AvailabilityMask.full(config.pulse_count))


def make_random_mask(pulse_count, valid_count, seed=None):
    """Keep ``valid_count`` pulses chosen uniformly without replacement."""
    pulse_count = check_int(pulse_count, "pulse_count", minimum=1)
    valid_count = check_int(valid_count, "valid_count", minimum=1, maximum=pulse_count)
    rng = np.random.default_rng(seed)
    flags = np.zeros(pulse_count, dtype=bool)
    flags[rng.choice(pulse_count, size=valid_count, replace=False)] = True
    return AvailabilityMask(flags)


def make_block_mask(pulse_count, blocks):
    """Mark every index inside the half-open ``[start, end)`` blocks as missing.

    Blocks must lie inside ``[0, pulse_count)`` and must not overlap. An
    all-missing result is accepted here; the estimators reject it.
    """
    pulse_count = check_int(pulse_count, "pulse_count", minimum=1)
    intervals = []
    for block in blocks:
        try:
            start, end = (int(v) for v in block)
        except (TypeError, ValueError):
            raise InvalidInputError(f"block {block!r} is not a [start, end) pair")
        if not 0 <= start < end <= pulse_count:
            raise InvalidInputError(
                f"block [{start}, {end}) is empty or outside [0, {pulse_count})"
            )
        intervals.append((start, end))
    intervals.sort()
    for (s0, e0), (s1, e1) in zip(intervals, intervals[1:]):
        if s1 < e0:
            raise InvalidInputError(f"blocks [{s0}, {e0}) and [{s1}, {e1}) overlap")
    flags = np.ones(pulse_count, dtype=bool)
    for start, end in intervals:
        flags[start:end] = False
    return AvailabilityMask(flags)


def apply_mask(data, mask):
    """Combine ``mask`` with the existing mask of ``data`` (logical AND).

    Newly masked entries are zeroed; nothing downstream depends on that.
    """
    if not isinstance(mask, AvailabilityMask):
        mask = AvailabilityMask(mask)
    combined = data.mask & mask
    samples = np.where(combined.flags, data.samples, 0.0)
    return MaskedSamples(samples, combined)
