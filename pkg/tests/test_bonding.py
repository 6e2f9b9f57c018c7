import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bondsim.analysis import tone_amplitudes
from bondsim.bonding import BondedSignal, bond_iq_bands, deinterleave, reconstruct_interleaved, reconstruct_iq
from bondsim.frontend import ChannelCapture, adc_capture, hybrid_coupler, power_splitter
from bondsim.signal_core import ContinuousSignal, FrequencySpan, analytic, brickwall_filter, generate_multitone, real_part

from conftest import DENSE, FS, rf_multitone


def _interleave_pair(rf):
    a, b = power_splitter(rf)
    return adc_capture(a, FS), adc_capture(b, FS, 0.5 / FS, channel_id=1)


def test_interleaved_equals_direct_double_rate_capture():
    rf, _, _ = rf_multitone(400e6, 3.5e9, 5e6)
    bonded = reconstruct_interleaved(*_interleave_pair(rf))
    direct = adc_capture(rf, 2 * FS).samples
    assert bonded.rate == 2 * FS and bonded.channel_rate == FS
    assert not np.iscomplexobj(bonded.samples)
    rel = np.sqrt(np.mean((bonded.samples - direct) ** 2) / np.mean(direct**2))
    assert rel < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 8))
def test_interleave_round_trip(seed, m):
    rng = np.random.default_rng(seed)
    a = ChannelCapture(rng.normal(size=4 * m), FS)
    b = ChannelCapture(rng.normal(size=4 * m), FS, 0.5 / FS, 1)
    even, odd = deinterleave(reconstruct_interleaved(a, b))
    assert np.array_equal(even, a.samples) and np.array_equal(odd, b.samples)
    even, odd = deinterleave(reconstruct_interleaved(a, b, swap=True))
    assert np.array_equal(even, b.samples) and np.array_equal(odd, a.samples)


def test_iq_reconstruction_is_sampled_analytic_signal():
    rf, _, _ = rf_multitone(400e6, 3.5e9, 5e6)
    p0, p90 = hybrid_coupler(rf)
    bonded = reconstruct_iq(adc_capture(p0, FS), adc_capture(p90, FS))
    expect = analytic(rf).samples[::4]
    np.testing.assert_allclose(bonded.samples, expect, atol=1e-12)
    assert bonded.method == "iq_hybrid" and bonded.rate == FS


def test_iq_places_band_without_its_mirror():
    rf, _, tones = rf_multitone(400e6, 3.5e9, 5e6)
    p0, p90 = hybrid_coupler(rf)
    bonded = reconstruct_iq(adc_capture(p0, FS), adc_capture(p90, FS))
    desired = np.abs(tone_amplitudes(bonded, tones))
    mirror = np.abs(tone_amplitudes(bonded, -tones))
    assert np.min(desired) > 1e10 * np.max(mirror)


def test_pair_mismatch_rejected():
    a = ChannelCapture(np.zeros(8), FS)
    with pytest.raises(ValueError, match="rates"):
        reconstruct_iq(a, ChannelCapture(np.zeros(8), 2 * FS))
    with pytest.raises(ValueError, match="lengths"):
        reconstruct_interleaved(a, ChannelCapture(np.zeros(6), FS))
    with pytest.raises(ValueError):
        BondedSignal(np.zeros(4), FS, "polyphase")


def test_bond_iq_bands_is_flat_across_two_zones():
    band = FrequencySpan(30e6, 4990e6)
    src = real_part(generate_multitone(band, 20e6, DENSE))
    lp = adc_capture(brickwall_filter(src, [FrequencySpan(-FS / 2, FS / 2)]), FS)
    bp = brickwall_filter(src, [FrequencySpan(FS / 2, FS), FrequencySpan(-FS, -FS / 2)])
    iq = reconstruct_iq(*(adc_capture(p, FS) for p in hybrid_coupler(bp)))
    plan = [(FrequencySpan(0, FS / 2), "baseband"), (FrequencySpan(FS / 2, FS), "iq")]
    bonded = bond_iq_bands(lp, iq, plan, 2 * FS)
    tones = 30e6 + 20e6 * np.arange(249)
    got = tone_amplitudes(bonded, tones)
    np.testing.assert_allclose(got, 2 * tone_amplitudes(src, tones), atol=1e-12)
    # nothing on the negative side of the analytic output
    assert np.max(np.abs(tone_amplitudes(bonded, -tones))) < 1e-12


def test_bond_iq_bands_rejects_overlap():
    cap = ChannelCapture(np.zeros(8), FS)
    iq = BondedSignal(np.zeros(8, complex), FS, "iq_hybrid")
    plan = [(FrequencySpan(0, 3e9), "baseband"), (FrequencySpan(2e9, 5e9), "iq")]
    with pytest.raises(ValueError, match="overlap"):
        bond_iq_bands(cap, iq, plan, 2 * FS)
