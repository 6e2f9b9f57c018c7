"""Measurements on bonded signals: image rejection, impulse responses, SINR.

Band powers are raw sums of per-bin tone power. Signals are periodic and
on-grid, so there is no leakage and no window is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frontend import DeviationModel, FrequencyResponse
from .signal_core import FULL_SCALE_POWER, FrequencySpan, alias_frequency, power_to_dbfs

SENTINEL_DB = 999.0


class DeconvolutionError(ValueError):
    pass


@dataclass(frozen=True)
class IrrReport:
    desired_band: FrequencySpan
    image_band: FrequencySpan
    desired_power_dbfs: float
    image_power_dbfs: float
    irr_db: float


@dataclass(frozen=True, eq=False)
class ImpulseResponseReport:
    taps: np.ndarray
    peak_index: int
    peak_power_db: float
    sinr_db: float
    n_samples: int
    tap_rate: float


def _amplitudes(bonded):
    x = np.asarray(bonded.samples)
    return np.fft.fft(x) / x.size, np.fft.fftfreq(x.size, d=1.0 / bonded.rate)


def image_frequency(bonded, f):
    """Where the residual image of a component at ``f`` lands.

    I/Q reconstructions mirror about DC. Interleaved streams are real, so the
    image of +f at f - f_s is reported on the same side as f, at f_s - |f|.
    """
    f = np.asarray(f, dtype=float)
    if bonded.method == "iq_hybrid":
        return -f
    fs = bonded.channel_rate
    return np.sign(f) * (fs - np.abs(f))


def image_span(bonded, desired: FrequencySpan) -> FrequencySpan:
    lo, hi = image_frequency(bonded, [desired.f_low, desired.f_high])
    return FrequencySpan(min(lo, hi), max(lo, hi))


def _irr(desired_power, image_power):
    d_db = float(power_to_dbfs(desired_power))
    i_db = float(power_to_dbfs(image_power))
    return d_db, i_db, d_db - i_db


def measure_irr(bonded, desired: FrequencySpan) -> IrrReport:
    """Integrated desired-band power over integrated image-band power, in dB."""
    half = bonded.rate / 2
    if desired.f_low < -half or desired.f_high > half:
        raise ValueError("desired span outside the bonded Nyquist range")
    if bonded.method == "interleaved" and desired.f_low < 0 < desired.f_high:
        raise ValueError("interleaved desired span must lie on one side of DC")
    img = image_span(bonded, desired)
    if img.overlaps(desired):
        raise ValueError("bands collide (fully aliased case - use sinr path)")
    amps, freqs = _amplitudes(bonded)
    tol = 1e-9 * bonded.rate / amps.size
    p = np.abs(amps) ** 2
    d_db, i_db, irr = _irr(p[desired.contains(freqs, tol)].sum(), p[img.contains(freqs, tol)].sum())
    return IrrReport(desired, img, d_db, i_db, irr)


@dataclass(frozen=True, eq=False)
class ToneIrr:
    """Per-tone image rejection plus the band total over the same tones."""

    tones: np.ndarray
    images: np.ndarray
    irr_db: np.ndarray
    total_irr_db: float


def measure_tone_irr(bonded, tones) -> ToneIrr:
    """IRR at individual tone bins of the bonded grid.

    Raises if any tone's image bin coincides with another tone's bin.
    """
    tones = np.atleast_1d(np.asarray(tones, dtype=float))
    amps, _ = _amplitudes(bonded)
    n = amps.size
    df = bonded.rate / n
    images = image_frequency(bonded, tones)
    k_t = _grid_index(tones, bonded.rate, df, n)
    k_i = _grid_index(images, bonded.rate, df, n)
    if np.intersect1d(k_t, k_i).size:
        raise ValueError("bands collide (fully aliased case - use sinr path)")
    pd = np.abs(amps[k_t]) ** 2
    pi = np.abs(amps[k_i]) ** 2
    with np.errstate(divide="ignore"):
        irr = 10 * np.log10(pd) - 10 * np.log10(pi)
    irr = np.where(pi == 0, SENTINEL_DB, irr)
    total = _irr(pd.sum(), pi.sum())[2]
    return ToneIrr(tones, images, irr, total)


def _grid_index(f, rate, df, n):
    f = alias_frequency(f, rate)
    k_f = f / df
    k = np.rint(k_f)
    if np.any(np.abs(k_f - k) > 1e-6):
        raise ValueError("frequency is not on the DFT grid")
    return k.astype(np.int64) % n


def tone_amplitudes(signal, freqs) -> np.ndarray:
    """Complex tone amplitudes at ``freqs`` (aliased onto the signal's grid)."""
    x = np.asarray(signal.samples)
    n = x.size
    rate = 1.0 / signal.sample_period
    k = _grid_index(np.asarray(freqs, dtype=float), rate, rate / n, n)
    return (np.fft.fft(x) / n)[k]


def irr_from_deviation(h) -> np.ndarray:
    """Rejection -20 log10(|1 - H_d| / |1 + H_d|) with +/-999 dB sentinels."""
    h = np.asarray(h, dtype=complex)
    num = np.abs(1 - h)
    den = np.abs(1 + h)
    eps = 4 * np.finfo(float).eps
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -20 * np.log10(num / den)
    out = np.where(num <= eps * den, SENTINEL_DB, out)
    out = np.where(den <= eps * num, -SENTINEL_DB, out)
    return out


def theoretical_irr(dev: DeviationModel, grid, amplitude_corrected: bool = False) -> np.ndarray:
    """Achievable IRR (dB, positive = rejection) for a deviation H_d.

    With ``amplitude_corrected`` the magnitude of H_d is first normalised to
    one at every frequency, leaving only the phase imbalance.
    """
    h = dev.evaluate(np.asarray(grid, dtype=float))
    if amplitude_corrected:
        mag = np.abs(h)
        h = np.where(mag > 0, h / np.where(mag > 0, mag, 1.0), h)
    return irr_from_deviation(h)


def compute_deviation(resp1: FrequencyResponse, resp2: FrequencyResponse) -> DeviationModel:
    """H_d = H_2 / H_1 on the reference grid of ``resp1``.

    ``resp2`` is interpolated onto that grid when the grids differ; reference
    points outside its coverage are dropped.
    """
    f1 = resp1.freq_grid
    g1 = resp1.gains
    if f1.shape == resp2.freq_grid.shape and np.array_equal(f1, resp2.freq_grid):
        g2 = resp2.gains
    else:
        keep = resp2.covers(f1)
        if not np.any(keep):
            raise ValueError("responses cover disjoint bands")
        f1, g1 = f1[keep], g1[keep]
        g2 = resp2.evaluate(f1)
    if np.any(np.abs(g1) < 1e-12):
        raise ValueError("reference response vanishes")
    return DeviationModel.tabulated(FrequencyResponse(f1, g2 / g1))


def sinr(taps, window: int = 2) -> float:
    """Power within +/-``window`` taps of the peak (circular) over the rest, in dB."""
    taps = np.asarray(taps)
    k = taps.size
    if window < 0 or 2 * window + 1 > k:
        raise ValueError("main-tap window does not fit the tap vector")
    p = np.abs(taps) ** 2
    peak = int(np.argmax(p))
    idx = (peak + np.arange(-window, window + 1)) % k
    inside = p[idx].sum()
    outside = p.sum() - inside
    if outside <= 0:
        return SENTINEL_DB
    if inside <= 0:
        return -SENTINEL_DB
    return float(10 * np.log10(inside / outside))


def deconvolve_impulse_response(
    measured,
    reference,
    carrier: float = 0.0,
    time_offset: float = 0.0,
    window: int = 2,
    threshold_dbfs: float = -100.0,
) -> ImpulseResponseReport:
    """Circular channel impulse response by per-bin spectral division.

    Parameters
    ----------
    measured
        Any periodic sample container (capture, bonded signal, dense signal)
        holding one period of the received waveform.
    reference
        The known transmitted periodic waveform (complex baseband or real).
    carrier : float
        Frequency offset of the measured band relative to the reference, in
        Hz. Each reference tone f is looked up at ``carrier + f`` on the
        measured grid, aliasing included.
    time_offset : float
        Nominal start time of the measured samples; its linear phase is
        removed before division.
    window : int
        Main-tap half width for the SINR figure.

    Returns
    -------
    ImpulseResponseReport
        Taps live on the occupied-band grid: one tap per occupied reference
        bin, at a tap rate equal to the occupied width.
    """
    r = np.asarray(reference.samples)
    m = np.asarray(measured.samples)
    t_r = reference.sample_period
    t_m = measured.sample_period
    p_r = r.size * t_r
    p_m = m.size * t_m
    if abs(p_r - p_m) > 1e-9 * p_r:
        raise DeconvolutionError("measured and reference periods differ")

    ref_amp = np.fft.fft(r) / r.size
    ref_f = np.fft.fftfreq(r.size, d=t_r)
    power = np.abs(ref_amp) ** 2 / FULL_SCALE_POWER
    with np.errstate(divide="ignore"):
        power_db = 10 * np.log10(power)
    occ = np.flatnonzero(power_db > threshold_dbfs)
    if occ.size == 0:
        raise DeconvolutionError("ill-conditioned deconvolution: empty reference")
    order = np.argsort(ref_f[occ])
    occ = occ[order]
    f_occ = ref_f[occ]
    df = 1.0 / p_r
    steps = np.rint(np.diff(f_occ) / df).astype(np.int64)
    stride = int(steps.min()) if steps.size else 1
    if steps.size and np.any(steps != stride):
        raise DeconvolutionError("ill-conditioned deconvolution: reference bin below threshold in occupied band")

    rf = carrier + f_occ
    meas_amp = tone_amplitudes(measured, rf)
    if time_offset:
        meas_amp = meas_amp * np.exp(-2j * np.pi * rf * time_offset)
    h = meas_amp / ref_amp[occ]

    k = occ.size
    spacing = stride * df
    # a comb offset from the spacing grid only rotates tap phases
    q = f_occ[0] / spacing
    base = 0.0 if abs(q - np.rint(q)) < 1e-6 else f_occ[0] - spacing * np.floor(q)
    pos = np.rint((f_occ - base) / spacing).astype(np.int64) % k
    if np.unique(pos).size != k:
        raise DeconvolutionError("occupied comb does not map onto a tap grid")
    spectrum = np.zeros(k, dtype=complex)
    spectrum[pos] = h
    taps = np.fft.ifft(spectrum)
    p = np.abs(taps) ** 2
    peak = int(np.argmax(p))
    with np.errstate(divide="ignore"):
        peak_db = float(10 * np.log10(p[peak]))
    return ImpulseResponseReport(taps, peak, peak_db, sinr(taps, min(window, (k - 1) // 2)), m.size, k * spacing)


def reconstruction_gain_db(combined: ImpulseResponseReport, singles) -> float:
    """Peak gain of the combined response over the individual channels.

    Peaks are compared as coherent sums over one period (amplitude times
    sample count), so multiplexing two channels into twice the samples counts
    the same as the analytic doubling of I/Q reconstruction. Individual
    channels are power-averaged.
    """
    c = 10 ** (combined.peak_power_db / 10) * combined.n_samples**2
    s = np.mean([10 ** (r.peak_power_db / 10) * r.n_samples**2 for r in singles])
    return float(10 * np.log10(c / s))
