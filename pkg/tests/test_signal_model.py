import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmusic import (
    AvailabilityMask,
    InvalidInputError,
    MaskedSamples,
    RadarConfig,
    ScattererSet,
    apply_mask,
    make_block_mask,
    make_random_mask,
    synthesize,
)
from mmusic.signal_model import delay_to_range, range_to_delay

import oracles


def test_zero_delay_gives_constant_samples():
    cfg = RadarConfig(4, start_frequency=0.0, frequency_step=1.0)
    out = synthesize(cfg, ScattererSet([0.0], [1.0]))
    np.testing.assert_array_equal(out.samples, np.ones(4))
    assert out.mask.valid_count == 4


def test_quarter_turn_per_pulse():
    cfg = RadarConfig(4, start_frequency=0.0, frequency_step=0.25)
    out = synthesize(cfg, ScattererSet([1.0], [1.0]))
    np.testing.assert_allclose(out.samples, [1, -1j, -1, 1j], atol=1e-15)


def test_table_config_four_scatterers():
    cfg = RadarConfig(512, noise_snr_db=15.0)
    target = ScattererSet.from_ranges([10.0, 11.0, 14.5, 20.0], [1.0, 0.8, 0.6, 0.9])
    out = synthesize(cfg, target, seed=3)
    assert out.samples.shape == (512,)
    assert np.isfinite(out.samples).all()


def test_synthesis_matches_direct_sum():
    cfg = RadarConfig(16, start_frequency=10e9, frequency_step=1.875e6)
    delays = range_to_delay([3.0, 7.25])
    amps = [1.0 + 0.5j, -0.3j]
    out = synthesize(cfg, ScattererSet(delays, amps))
    ref = oracles.synthesize_direct(16, 10e9, 1.875e6, list(delays), amps)
    np.testing.assert_allclose(out.samples, ref, rtol=0, atol=1e-12)


def test_radar_geometry():
    cfg = RadarConfig(512)
    assert cfg.bandwidth == pytest.approx(960e6)
    assert cfg.unambiguous_range == pytest.approx(79.9446555, rel=1e-8)
    assert cfg.range_resolution == pytest.approx(0.15614, rel=1e-4)
    assert RadarConfig(8, noise_snr_db=20).noise_variance == pytest.approx(0.01)
    assert RadarConfig(8).noise_variance == 0.0


def test_range_delay_round_trip():
    r = np.array([0.0, 1.0, 40.0])
    np.testing.assert_allclose(delay_to_range(range_to_delay(r)), r)


def test_noise_level_and_seed():
    cfg = RadarConfig(20000, noise_snr_db=10.0)
    a = synthesize(cfg, ScattererSet([0.0], [0.0]), seed=1).samples
    b = synthesize(cfg, ScattererSet([0.0], [0.0]), seed=1).samples
    np.testing.assert_array_equal(a, b)
    assert np.var(a) == pytest.approx(0.1, rel=0.03)
    assert np.var(a.real) == pytest.approx(0.05, rel=0.05)


def test_synthesize_errors():
    cfg = RadarConfig(8)
    with pytest.raises(InvalidInputError):
        synthesize(cfg, ScattererSet([], []))
    with pytest.raises(InvalidInputError):
        synthesize(cfg, ScattererSet([cfg.unambiguous_delay], [1.0]))


@pytest.mark.parametrize(
    "kwargs",
    [dict(pulse_count=1), dict(pulse_count=8, frequency_step=0.0), dict(pulse_count=8, noise_snr_db=np.inf)],
)
def test_radar_config_validation(kwargs):
    with pytest.raises(InvalidInputError):
        RadarConfig(**kwargs)


def test_scatterer_set_validation():
    with pytest.raises(InvalidInputError):
        ScattererSet([1.0, 2.0], [1.0])
    with pytest.raises(InvalidInputError):
        ScattererSet([-1.0], [1.0])
    assert len(ScattererSet([], [])) == 0


@given(
    delay=st.floats(0, 0.99),
    amp=st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_single_scatterer_constant_modulus(delay, amp):
    cfg = RadarConfig(32, start_frequency=5.0, frequency_step=1.0)
    out = synthesize(cfg, ScattererSet([delay], [amp]))
    np.testing.assert_allclose(np.abs(out.samples), abs(amp), rtol=1e-12)


@given(
    d=st.lists(st.floats(0, 0.99), min_size=2, max_size=4),
    seed=st.integers(0, 2**16),
)
def test_synthesis_is_linear_in_scatterers(d, seed):
    cfg = RadarConfig(24, start_frequency=3.0, frequency_step=1.0)
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(len(d)) + 1j * rng.standard_normal(len(d))
    merged = synthesize(cfg, ScattererSet(d, amps)).samples
    parts = sum(synthesize(cfg, ScattererSet([di], [ai])).samples for di, ai in zip(d, amps))
    np.testing.assert_allclose(merged, parts, atol=1e-12)


def test_random_mask_examples():
    assert make_random_mask(512, 300, seed=11).valid_count == 300
    assert make_random_mask(8, 8, seed=0) == AvailabilityMask.full(8)
    with pytest.raises(InvalidInputError):
        make_random_mask(8, 0, seed=0)
    with pytest.raises(InvalidInputError):
        make_random_mask(8, 9, seed=0)


@settings(max_examples=50)
@given(n=st.integers(1, 300), frac=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_random_mask_count_exact(n, frac, seed):
    valid = max(1, int(round(frac * n)))
    assert make_random_mask(n, valid, seed).valid_count == valid


def test_block_mask_examples():
    m = make_block_mask(512, [(100, 206), (350, 456)])
    assert m.valid_count == 300
    assert make_block_mask(8, []) == AvailabilityMask.full(8)
    assert make_block_mask(8, [(0, 8)]).valid_count == 0
    np.testing.assert_array_equal(make_block_mask(6, [(1, 3)]).flags, [1, 0, 0, 1, 1, 1])


@pytest.mark.parametrize("blocks", [[(0, 9)], [(-1, 2)], [(2, 5), (4, 6)], [(3, 3)], [(1,)]])
def test_block_mask_errors(blocks):
    with pytest.raises(InvalidInputError):
        make_block_mask(8, blocks)


def test_apply_mask_examples():
    full = AvailabilityMask.full(8)
    alt = AvailabilityMask(np.arange(8) % 2 == 0)
    data = MaskedSamples(np.arange(8) + 1j, full)
    assert apply_mask(data, full).mask == full
    assert apply_mask(data, alt).mask == alt
    both = apply_mask(apply_mask(data, alt), AvailabilityMask(~alt.flags))
    assert both.mask.valid_count == 0
    np.testing.assert_array_equal(apply_mask(data, alt).samples[1::2], 0)
    with pytest.raises(InvalidInputError):
        apply_mask(data, AvailabilityMask.full(7))


def test_mask_is_read_only():
    m = AvailabilityMask.full(4)
    with pytest.raises(ValueError):
        m.flags[0] = False


def test_masked_samples_allow_nan_only_where_masked():
    flags = np.array([True, False, True])
    MaskedSamples(np.array([1.0, np.nan, 2.0]), flags)
    with pytest.raises(InvalidInputError):
        MaskedSamples(np.array([np.nan, 1.0, 2.0]), flags)
    with pytest.raises(InvalidInputError):
        MaskedSamples(np.ones(3), np.ones(4, bool))
