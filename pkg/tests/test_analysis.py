import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bondsim.analysis import (
    SENTINEL_DB,
    DeconvolutionError,
    compute_deviation,
    deconvolve_impulse_response,
    image_frequency,
    irr_from_deviation,
    measure_irr,
    measure_tone_irr,
    reconstruction_gain_db,
    sinr,
    theoretical_irr,
)
from bondsim.bonding import reconstruct_interleaved, reconstruct_iq
from bondsim.frontend import DeviationModel, FrequencyResponse, adc_capture, hybrid_coupler, power_splitter
from bondsim.signal_core import ContinuousSignal, FrequencySpan, fractional_delay, generate_multitone

from conftest import FS, rf_multitone


def _closed_form_irr(gain_db, phase_rad):
    # image/desired = |1 - g e^{jp}|^2 / |1 + g e^{jp}|^2 expanded by hand,
    # with 1 -/+ 2g cos p + g^2 = (1 -/+ g)^2 +/- 4g sin^2(p/2) to avoid cancellation
    g = 10 ** (gain_db / 20)
    s2 = np.sin(phase_rad / 2) ** 2
    return 10 * np.log10(((1 + g) ** 2 - 4 * g * s2) / ((1 - g) ** 2 + 4 * g * s2))


@pytest.mark.parametrize(
    "dev, expected",
    [
        (DeviationModel.scalar(gain_db=1.0), 24.81),
        (DeviationModel.scalar(phase_deg=1.0), 41.18),
        (DeviationModel.scalar(delay_s=5e-12), 36.08),
    ],
)
def test_theoretical_irr_known_values(dev, expected):
    assert theoretical_irr(dev, [1e9])[0] == pytest.approx(expected, abs=0.005)


@settings(max_examples=50, deadline=None)
@given(st.floats(-6, 6), st.floats(-30, 30))
def test_irr_formula_matches_expanded_form(g, p):
    h = 10 ** (g / 20) * np.exp(1j * np.radians(p))
    got = irr_from_deviation(h)
    if got == SENTINEL_DB:
        return
    # h is itself rounded, so |1 - h| carries ~eps/|1 - h| relative error
    tol = 1e-9 + 10 / np.log(10) * 8 * np.finfo(float).eps / abs(1 - h)
    assert got == pytest.approx(_closed_form_irr(g, np.radians(p)), abs=tol)


def test_irr_sentinels():
    assert irr_from_deviation(1.0) == SENTINEL_DB
    assert irr_from_deviation(-1.0) == -SENTINEL_DB


def test_pure_delay_curve_is_tangent_law():
    tau = 5e-12
    f = np.linspace(0.2e9, 4.8e9, 47)
    got = theoretical_irr(DeviationModel.scalar(delay_s=tau), f)
    np.testing.assert_allclose(got, -20 * np.log10(np.abs(np.tan(np.pi * f * tau))), atol=1e-9)


def test_amplitude_corrected_pure_gain_is_sentinel():
    dev = DeviationModel.scalar(gain_db=2.0)
    assert np.all(theoretical_irr(dev, np.linspace(1e9, 2e9, 5), amplitude_corrected=True) == SENTINEL_DB)


def test_compute_deviation_ratio_and_interpolation():
    f1 = np.linspace(1e9, 2e9, 11)
    r1 = FrequencyResponse.from_polar(f1, np.zeros(11), np.zeros(11))
    r2 = FrequencyResponse.from_polar(np.linspace(0.9e9, 2.1e9, 7), np.ones(7), np.full(7, 3.0))
    dev = compute_deviation(r1, r2)
    h = dev.evaluate(f1)
    np.testing.assert_allclose(20 * np.log10(np.abs(h)), 1.0)
    np.testing.assert_allclose(np.degrees(np.angle(h)), 3.0)


def test_compute_deviation_disjoint_bands():
    r1 = FrequencyResponse.from_polar([1e9, 2e9], [0, 0], [0, 0])
    r2 = FrequencyResponse.from_polar([3e9, 4e9], [0, 0], [0, 0])
    with pytest.raises(ValueError, match="disjoint"):
        compute_deviation(r1, r2)


def test_sinr_simple_cases():
    assert sinr(np.array([1.0, 0, 0, 0, 0]), 0) == SENTINEL_DB
    assert sinr(np.array([1.0, 0.1, 0, 0, 0]), 0) == pytest.approx(20.0)
    assert sinr(np.array([0.1, 0, 0, 0, 1.0]), 1) == SENTINEL_DB  # window wraps around
    with pytest.raises(ValueError):
        sinr(np.ones(3), 2)


def _baseband_reference(k_half=20, spacing=1e6, dense=160e6):
    return generate_multitone(FrequencySpan(-k_half * spacing, k_half * spacing), spacing, dense)


def test_deconvolution_recovers_two_tap_channel():
    ref = _baseband_reference()
    k = 41
    tap = 1 / (k * 1e6)
    meas = ContinuousSignal(ref.samples + 0.1 * fractional_delay(ref, tap).samples, ref.sample_period)
    rep = deconvolve_impulse_response(meas, ref, window=0)
    expect = np.zeros(k, complex)
    expect[:2] = [1.0, 0.1]
    np.testing.assert_allclose(rep.taps, expect, atol=1e-12)
    assert rep.sinr_db == pytest.approx(20.0)
    assert rep.tap_rate == pytest.approx(41e6)


def test_deconvolution_time_offset_is_removed():
    ref = _baseband_reference()
    t0 = 3.7e-9
    meas = fractional_delay(ref, -t0)  # samples taken from t0 onward
    rep = deconvolve_impulse_response(meas, ref, time_offset=t0)
    assert abs(rep.taps[0]) == pytest.approx(1.0)
    assert rep.sinr_db == SENTINEL_DB


def test_deconvolution_missing_tooth_is_ill_conditioned():
    ref = _baseband_reference()
    x = np.fft.fft(ref.samples)
    x[3] = 0.0
    holey = ContinuousSignal(np.fft.ifft(x), ref.sample_period)
    with pytest.raises(DeconvolutionError, match="ill-conditioned"):
        deconvolve_impulse_response(holey, holey)


def test_deconvolution_period_mismatch():
    ref = _baseband_reference()
    with pytest.raises(DeconvolutionError, match="periods"):
        deconvolve_impulse_response(ContinuousSignal(ref.samples[:80], ref.sample_period), ref)


def test_band_irr_matches_theory_for_flat_deviation():
    rf, _, tones = rf_multitone(400e6, 3.5e9, 5e6)
    dev = DeviationModel.scalar(gain_db=1.0, phase_deg=2.0)
    p0, p90 = hybrid_coupler(rf, dev)
    bonded = reconstruct_iq(adc_capture(p0, FS), adc_capture(p90, FS))
    desired = FrequencySpan(-1.7e9, -1.3e9)  # 3.5 GHz lands at -1.5 GHz
    rep = measure_irr(bonded, desired)
    assert rep.image_band == FrequencySpan(1.3e9, 1.7e9)
    assert rep.irr_db == pytest.approx(theoretical_irr(dev, [3.5e9])[0], abs=1e-9)


def test_irr_collision_is_reported():
    rf, _, _ = rf_multitone(80e6, 2.5e9, 1e6)
    a, b = power_splitter(rf)
    bonded = reconstruct_interleaved(adc_capture(a, FS), adc_capture(b, FS, 0.5 / FS))
    with pytest.raises(ValueError, match="collide"):
        measure_irr(bonded, FrequencySpan(2.46e9, 2.54e9))
    with pytest.raises(ValueError, match="collide"):
        measure_tone_irr(bonded, [2.49e9, 2.51e9])


def test_image_locations():
    rf, _, _ = rf_multitone(80e6, 1e9, 10e6)
    a, b = power_splitter(rf)
    il = reconstruct_interleaved(adc_capture(a, FS), adc_capture(b, FS, 0.5 / FS))
    assert image_frequency(il, 1e9) == pytest.approx(4e9)
    assert image_frequency(il, -1e9) == pytest.approx(-4e9)
    p0, p90 = hybrid_coupler(rf)
    iq = reconstruct_iq(adc_capture(p0, FS), adc_capture(p90, FS))
    assert image_frequency(iq, 1e9) == pytest.approx(-1e9)


def test_ideal_interleaved_reconstruction_gain_is_six_db():
    rf, ref, tones = rf_multitone(400e6, 1e9, 5e6)
    a, b = power_splitter(rf)
    c1, c2 = adc_capture(a, FS), adc_capture(b, FS, 0.5 / FS)
    bonded = reconstruct_interleaved(c1, c2)
    carrier = tones.mean()
    comb = deconvolve_impulse_response(bonded, ref, carrier)
    singles = [deconvolve_impulse_response(c1, ref, carrier), deconvolve_impulse_response(c2, ref, carrier, 0.5 / FS)]
    assert reconstruction_gain_db(comb, singles) == pytest.approx(20 * np.log10(2), abs=1e-9)
