"""Signal containers and exact transforms for periodic, densely sampled waveforms.

Everything here treats a periodic signal as exactly one fundamental period, so
delays and frequency shifts are circular and exact on the DFT
grid. Amplitudes are dimensionless with full scale at +/-1.0.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# mean-square of a full-scale real sine, the 0 dBFS reference
FULL_SCALE_POWER = 0.5

DBFS_FLOOR = -999.0


@dataclass(frozen=True)
class FrequencySpan:
    """Closed frequency interval [f_low, f_high] in Hz.

    A degenerate span (f_low == f_high) selects a single frequency.
    """

    f_low: float
    f_high: float

    def __post_init__(self):
        if not (np.isfinite(self.f_low) and np.isfinite(self.f_high)):
            raise ValueError("span edges must be finite")
        if self.f_low > self.f_high:
            raise ValueError(f"f_low {self.f_low} > f_high {self.f_high}")

    @property
    def width(self) -> float:
        return self.f_high - self.f_low

    @property
    def center(self) -> float:
        return 0.5 * (self.f_low + self.f_high)

    def mirrored(self) -> "FrequencySpan":
        return FrequencySpan(-self.f_high, -self.f_low)

    def shifted(self, df: float) -> "FrequencySpan":
        return FrequencySpan(self.f_low + df, self.f_high + df)

    def overlaps(self, other: "FrequencySpan") -> bool:
        return self.f_low <= other.f_high and other.f_low <= self.f_high

    def contains(self, f, tol: float = 0.0):
        f = np.asarray(f)
        return (f >= self.f_low - tol) & (f <= self.f_high + tol)


@dataclass(frozen=True, eq=False)
class ContinuousSignal:
    """Dense sample vector standing in for a continuous-time waveform.

    When ``is_periodic`` is set the vector holds exactly one period.
    """

    samples: np.ndarray
    sample_period: float
    is_periodic: bool = True

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D vector")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        object.__setattr__(self, "samples", samples)

    @property
    def rate(self) -> float:
        return 1.0 / self.sample_period

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    @property
    def duration(self) -> float:
        return self.samples.size * self.sample_period

    def __len__(self):
        return self.samples.size

    def time(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.sample_period


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Two-sided DFT with an explicit ascending frequency grid.

    ``bins`` use the unitary (orthonormal) scaling, so Parseval holds without
    extra factors. ``amplitudes`` gives per-bin complex tone amplitudes.
    """

    bins: np.ndarray
    freq_grid: np.ndarray
    source_rate: float

    def __post_init__(self):
        if len(self.bins) != len(self.freq_grid):
            raise ValueError("bins and freq_grid differ in length")

    @property
    def spacing(self) -> float:
        return self.source_rate / len(self.bins)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.bins / np.sqrt(len(self.bins))

    def power_dbfs(self) -> np.ndarray:
        return power_to_dbfs(np.abs(self.amplitudes) ** 2)

    def index_of(self, f) -> np.ndarray:
        """Grid index for frequencies already on (or aliased onto) the grid."""
        n = len(self.bins)
        k = np.rint(np.asarray(f, dtype=float) / self.spacing).astype(np.int64)
        return (k + n // 2) % n


def power_to_dbfs(power):
    """Mean-square power to dBFS, floored at ``DBFS_FLOOR`` for silent bins."""
    power = np.asarray(power, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(power / FULL_SCALE_POWER)
    return np.maximum(out, DBFS_FLOOR)


def alias_frequency(f, rate: float):
    """Fold ``f`` into the two-sided band [-rate/2, rate/2)."""
    f = np.asarray(f, dtype=float)
    return f - rate * np.floor(f / rate + 0.5)


def _period_of(sig) -> float:
    return getattr(sig, "sample_period", None) or 1.0 / sig.rate


def _is_periodic(sig) -> bool:
    return getattr(sig, "is_periodic", True)


def _replace_samples(sig, samples):
    return dataclasses.replace(sig, samples=samples)


def dft(signal) -> Spectrum:
    """Unitary DFT of any sample container, returned on a two-sided grid."""
    x = np.asarray(signal.samples)
    if x.size == 0:
        raise ValueError("empty input")
    period = _period_of(signal)
    bins = np.fft.fftshift(np.fft.fft(x, norm="ortho"))
    grid = np.fft.fftshift(np.fft.fftfreq(x.size, d=period))
    return Spectrum(bins, grid, 1.0 / period)


def idft(spectrum: Spectrum, real: bool = False) -> ContinuousSignal:
    x = np.fft.ifft(np.fft.ifftshift(spectrum.bins), norm="ortho")
    if real:
        x = x.real
    return ContinuousSignal(x, 1.0 / spectrum.source_rate, True)


def _fft_freqs(n: int, period: float) -> np.ndarray:
    return np.fft.fftfreq(n, d=period)


def generate_multitone(
    band: FrequencySpan,
    tone_spacing: float,
    dense_rate: float,
    phase_scheme: str = "newman",
    seed: int | None = None,
    fundamental: float | None = None,
    rms: float = 0.25,
) -> ContinuousSignal:
    """Periodic complex multitone with equal-magnitude tones across ``band``.

    Parameters
    ----------
    band : FrequencySpan
        First and last tone frequency. A degenerate span gives a single tone.
    tone_spacing : float
        Tone spacing in Hz; must divide the band width.
    dense_rate : float
        Sample rate of the dense grid in Hz.
    phase_scheme : {"newman", "random"}
        Newman's quadratic phases (low crest factor) or uniform random phases
        drawn from ``seed``.
    fundamental : float, optional
        Fundamental frequency of the stored period. Defaults to the largest
        frequency dividing both ``tone_spacing`` and the first tone; pass a
        finer value when the signal will be shifted by an offset carrier.
    rms : float
        RMS level of the result in full-scale units.

    Returns
    -------
    ContinuousSignal
        One period, ``is_periodic=True``.
    """
    half = dense_rate / 2
    if band.f_low < -half or band.f_high >= half:
        raise ValueError("band exceeds dense grid")
    if tone_spacing <= 0:
        raise ValueError("tone_spacing must be positive (it sets the period)")
    if band.width == 0:
        n_tones = 1
    else:
        ratio = band.width / tone_spacing
        n_tones = int(round(ratio)) + 1
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError("tone_spacing does not divide the band width")
    if n_tones < 1:
        raise ValueError("no tones in band")

    if fundamental is None:
        fundamental = common_fundamental(tone_spacing, band.f_low)
    n_float = dense_rate / fundamental
    n = int(round(n_float))
    if abs(n_float - n) > 1e-9 * n:
        raise ValueError("dense_rate is not an integer multiple of the fundamental")

    freqs = band.f_low + tone_spacing * np.arange(n_tones) if n_tones > 1 else np.array([band.f_low])
    harmonics = freqs / fundamental
    k = np.rint(harmonics).astype(np.int64)
    if np.any(np.abs(harmonics - k) > 1e-6):
        raise ValueError("tones are not on the periodic grid; pass a finer fundamental")

    if phase_scheme == "newman":
        idx = np.arange(n_tones)
        phases = np.pi * idx**2 / n_tones
    elif phase_scheme == "random":
        phases = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, n_tones)
    else:
        raise ValueError(f"unknown phase_scheme {phase_scheme!r}")

    # build on the DFT grid so every tone is exactly periodic
    spec = np.zeros(n, dtype=complex)
    np.add.at(spec, k % n, np.exp(1j * phases))
    x = np.fft.ifft(spec) * n
    x *= rms / np.sqrt(np.mean(np.abs(x) ** 2))
    return ContinuousSignal(x, 1.0 / dense_rate, True)


def common_fundamental(*freqs: float) -> float:
    """Largest frequency whose integer multiples include every argument.

    Works in whole Hz; falls back to the first argument for non-integer input.
    """
    ints = []
    for f in freqs:
        r = round(abs(f))
        if abs(abs(f) - r) > 1e-6:
            return float(freqs[0])
        if r:
            ints.append(int(r))
    if not ints:
        return float(freqs[0])
    return float(math.gcd(*ints))


def tone_frequencies(band: FrequencySpan, tone_spacing: float) -> np.ndarray:
    if band.width == 0:
        return np.array([band.f_low])
    n_tones = int(round(band.width / tone_spacing)) + 1
    return band.f_low + tone_spacing * np.arange(n_tones)


def analytic(signal):
    """Analytic signal y + jH(y) of a real signal.

    Negative-frequency bins are zeroed and positive bins doubled; DC and the
    Nyquist bin of an even-length vector pass unchanged. The real part of the
    result is the input itself.
    """
    x = np.asarray(signal.samples)
    if np.iscomplexobj(x):
        raise ValueError("analytic requires real input")
    return _replace_samples(signal, x + 1j * hilbert_part(x))


def _sgn_weights(n: int) -> np.ndarray:
    # sgn(f) on the unshifted fft grid, zero at DC and at the even-N Nyquist bin
    w = np.zeros(n)
    w[1 : (n + 1) // 2] = 1.0
    w[n // 2 + 1 :] = -1.0
    return w


def hilbert_part(x: np.ndarray) -> np.ndarray:
    """Circular Hilbert transform of a real vector (multiplier -j sgn(f))."""
    X = np.fft.fft(x)
    return np.fft.ifft(-1j * _sgn_weights(x.size) * X).real


def fractional_delay(signal, delay: float):
    """Exact circular delay by an arbitrary amount of time.

    The spectrum is multiplied by exp(-j 2 pi f delay). Real input stays real;
    for even lengths the Nyquist bin of a real signal keeps only its real part.
    """
    if not _is_periodic(signal):
        raise ValueError("fractional_delay requires a periodic signal")
    x = np.asarray(signal.samples)
    if delay == 0:
        return _replace_samples(signal, x.copy())
    period = _period_of(signal)
    n = x.size
    # phase in cycles, reduced before scaling by 2 pi to keep integer delays exact
    cycles = np.fft.fftfreq(n) * (delay / period)
    ramp = np.exp(-2j * np.pi * (cycles - np.rint(cycles)))
    y = np.fft.ifft(np.fft.fft(x) * ramp)
    if not np.iscomplexobj(x):
        y = y.real
    return _replace_samples(signal, y)


def bin_mask(freqs: np.ndarray, passbands: Iterable[FrequencySpan], spacing: float) -> np.ndarray:
    tol = 1e-9 * spacing
    mask = np.zeros(freqs.shape, dtype=bool)
    for span in passbands:
        mask |= span.contains(freqs, tol)
    return mask


def brickwall_filter(signal, passbands: Sequence[FrequencySpan]):
    """Keep DFT bins inside any passband (edges included), zero the rest.

    Spans are two-sided; give both signs to keep a real signal real.
    """
    x = np.asarray(signal.samples)
    n = x.size
    period = _period_of(signal)
    rate = 1.0 / period
    for span in passbands:
        if span.f_low < -rate / 2 or span.f_high > rate / 2:
            raise ValueError("passband outside the dense Nyquist range")
    freqs = _fft_freqs(n, period)
    mask = bin_mask(freqs, passbands, rate / n)
    y = np.fft.ifft(np.fft.fft(x) * mask)
    if not np.iscomplexobj(x) and _hermitian(mask):
        y = y.real
    return _replace_samples(signal, y)


def _hermitian(mask: np.ndarray) -> bool:
    mirror = (-np.arange(mask.size)) % mask.size
    return bool(np.array_equal(mask, mask[mirror]))


def frequency_shift(signal, f_shift: float):
    """Multiply by exp(j 2 pi f_shift t); returns a complex signal.

    For periodic signals the shift must be a whole number of fundamentals and
    is exact: bins move circularly by that many positions.
    """
    x = np.asarray(signal.samples)
    n = x.size
    period = _period_of(signal)
    rate = 1.0 / period
    if f_shift == 0:
        return _replace_samples(signal, x.astype(complex))
    if _is_periodic(signal):
        k_float = f_shift * n * period
        k = int(round(k_float))
        if abs(k_float - k) > 1e-6:
            raise ValueError("off-grid carrier")
        X = np.fft.fft(x)
        occupied = np.abs(X) > 1e-12 * np.max(np.abs(X))
        moved = _fft_freqs(n, period)[occupied] + f_shift
        if np.any(moved < -rate / 2) or np.any(moved >= rate / 2):
            raise ValueError("shifted band exceeds dense grid")
        # integer phase arithmetic keeps the modulation exact
        phase = ((k * np.arange(n)) % n) / n
        y = x * np.exp(2j * np.pi * phase)
    else:
        y = x * np.exp(2j * np.pi * f_shift * np.arange(n) * period)
    return _replace_samples(signal, y)


def real_part(signal):
    return _replace_samples(signal, np.asarray(signal.samples).real.copy())


def energy(x) -> float:
    return float(np.sum(np.abs(np.asarray(x)) ** 2))


def mean_power_dbfs(x) -> float:
    return float(power_to_dbfs(np.mean(np.abs(np.asarray(x)) ** 2)))
