"""Analog front-end models and the ADC capture process.

Inter-channel deviation is always attached to the second path; the first
path is the reference. Deviations are defined for positive frequencies and
applied to real signals with Hermitian symmetry, so a real input produces a
real output.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .signal_core import (
    FULL_SCALE_POWER,
    ContinuousSignal,
    FrequencySpan,
    hilbert_part,
)


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    """Complex linear gain sampled on a strictly ascending grid."""

    freq_grid: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freq_grid, dtype=float)
        g = np.asarray(self.gains, dtype=complex)
        if f.ndim != 1 or f.size == 0 or f.shape != g.shape:
            raise ValueError("freq_grid and gains must be equal-length 1-D vectors")
        if np.any(np.diff(f) <= 0):
            raise ValueError("freq_grid must be strictly ascending")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise ValueError("response contains NaN or Inf")
        object.__setattr__(self, "freq_grid", f)
        object.__setattr__(self, "gains", g)

    @classmethod
    def from_polar(cls, freq_grid, gain_db, phase_deg):
        gain_db = np.asarray(gain_db, dtype=float)
        phase = np.deg2rad(np.asarray(phase_deg, dtype=float))
        return cls(freq_grid, 10 ** (gain_db / 20) * np.exp(1j * phase))

    def covers(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        span = self.freq_grid[-1] - self.freq_grid[0]
        tol = 1e-12 * max(span, abs(self.freq_grid[-1]), 1.0)
        return (f >= self.freq_grid[0] - tol) & (f <= self.freq_grid[-1] + tol)

    def evaluate(self, f) -> np.ndarray:
        """Linear interpolation in log-magnitude and unwrapped phase."""
        f = np.atleast_1d(np.asarray(f, dtype=float))
        if not np.all(self.covers(f)):
            raise ValueError("frequency outside the tabulated grid")
        if self.freq_grid.size == 1:
            return np.full(f.shape, self.gains[0])
        f = np.clip(f, self.freq_grid[0], self.freq_grid[-1])
        mag = self.gains_abs_log()
        ph = np.unwrap(np.angle(self.gains))
        return np.exp(np.interp(f, self.freq_grid, mag) + 1j * np.interp(f, self.freq_grid, ph))

    def gains_abs_log(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.gains))


def load_response_csv(path) -> FrequencyResponse:
    """Read a ``freq_hz,re,im`` CSV (one row per point, ascending)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["freq_hz", "re", "im"]:
            raise ValueError(f"{path}: expected header freq_hz,re,im")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows)
    return FrequencyResponse(data[:, 0], data[:, 1] + 1j * data[:, 2])


def save_response_csv(resp: FrequencyResponse, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "re", "im"])
        for f, g in zip(resp.freq_grid, resp.gains):
            w.writerow([f"{f:.17g}", f"{g.real:.17g}", f"{g.imag:.17g}"])


@dataclass(frozen=True, eq=False)
class DeviationModel:
    """Deviation H_d(f) of the second path relative to the reference path.

    ``mode`` is ``"ideal"``, ``"scalar"`` (gain, phase, delay) or
    ``"tabulated"`` (a :class:`FrequencyResponse`).
    """

    mode: str = "ideal"
    gain_db: float = 0.0
    phase_deg: float = 0.0
    delay_s: float = 0.0
    response: FrequencyResponse | None = None

    def __post_init__(self):
        if self.mode not in ("ideal", "scalar", "tabulated"):
            raise ValueError(f"unknown deviation mode {self.mode!r}")
        if self.mode == "tabulated" and self.response is None:
            raise ValueError("tabulated deviation needs a response")

    @classmethod
    def ideal(cls):
        return cls("ideal")

    @classmethod
    def scalar(cls, gain_db=0.0, phase_deg=0.0, delay_s=0.0):
        return cls("scalar", gain_db=float(gain_db), phase_deg=float(phase_deg), delay_s=float(delay_s))

    @classmethod
    def tabulated(cls, response: FrequencyResponse):
        return cls("tabulated", response=response)

    @property
    def is_ideal(self) -> bool:
        return self.mode == "ideal"

    def evaluate(self, f) -> np.ndarray:
        """H_d at (positive-side) frequencies ``f``."""
        f = np.atleast_1d(np.asarray(f, dtype=float))
        if self.mode == "ideal":
            return np.ones(f.shape, dtype=complex)
        if self.mode == "scalar":
            g = 10 ** (self.gain_db / 20) * np.exp(1j * np.deg2rad(self.phase_deg))
            return g * np.exp(-2j * np.pi * f * self.delay_s)
        return self.response.evaluate(f)

    def describe(self) -> dict:
        if self.mode == "scalar":
            return {"mode": "scalar", "gain_db": self.gain_db, "phase_deg": self.phase_deg, "delay_s": self.delay_s}
        if self.mode == "tabulated":
            return {"mode": "tabulated", "points": int(self.response.freq_grid.size)}
        return {"mode": "ideal"}

    def real_path_response(self, freqs: np.ndarray, occupied: np.ndarray | None = None) -> np.ndarray:
        """Hermitian-extended response on an fft frequency vector.

        Bins at f < 0 get conj(H_d(-f)). The DC bin and an even-length Nyquist
        bin must be real, so they keep the real part of H_d. Bins outside
        ``occupied`` are left at unity, which lets a tabulated response cover
        only the signal band.
        """
        freqs = np.asarray(freqs, dtype=float)
        h = np.ones(freqs.shape, dtype=complex)
        sel = np.ones(freqs.shape, dtype=bool) if occupied is None else np.asarray(occupied)
        if not np.any(sel):
            return h
        fa = np.abs(freqs[sel])
        if self.mode == "tabulated" and not np.all(self.response.covers(fa)):
            raise ValueError("tabulated deviation does not cover the signal band")
        hv = self.evaluate(fa)
        hv = np.where(freqs[sel] < 0, np.conj(hv), hv)
        n = freqs.size
        edge = np.zeros(n, dtype=bool)
        edge[0] = True
        if n % 2 == 0:
            edge[n // 2] = True
        hv = np.where(edge[sel], hv.real, hv)
        h[sel] = hv
        return h


def apply_deviation(signal: ContinuousSignal, deviation: DeviationModel) -> ContinuousSignal:
    """Pass a real signal through H_d (Hermitian-extended)."""
    x = np.asarray(signal.samples)
    if deviation.is_ideal:
        return dataclasses.replace(signal, samples=x.copy())
    X = np.fft.fft(x)
    freqs = np.fft.fftfreq(x.size, d=signal.sample_period)
    occupied = np.abs(X) > 1e-12 * max(np.max(np.abs(X)), 1e-300)
    y = np.fft.ifft(X * deviation.real_path_response(freqs, occupied))
    if not np.iscomplexobj(x):
        y = y.real
    return dataclasses.replace(signal, samples=y)


def _require_real(signal, what):
    if np.iscomplexobj(signal.samples):
        raise ValueError(f"{what} requires a real input")


def hybrid_coupler(signal: ContinuousSignal, deviation: DeviationModel = DeviationModel()):
    """90 degree hybrid: (0 degree port, 90 degree port).

    The 0 degree port passes the input unchanged; the 90 degree port carries
    its Hilbert transform with the deviation applied.
    """
    _require_real(signal, "hybrid_coupler")
    x = np.asarray(signal.samples)
    quad = dataclasses.replace(signal, samples=hilbert_part(x))
    return dataclasses.replace(signal, samples=x.copy()), apply_deviation(quad, deviation)


def power_splitter(signal: ContinuousSignal, deviation: DeviationModel = DeviationModel()):
    """Two-way splitter; common insertion loss is left out."""
    _require_real(signal, "power_splitter")
    x = np.asarray(signal.samples)
    return dataclasses.replace(signal, samples=x.copy()), apply_deviation(signal, deviation)


def ramp_filter(signal: ContinuousSignal, stop_low, pass_low, pass_high, stop_high) -> ContinuousSignal:
    """Trapezoidal magnitude response in |f|: linear ramps, flat passband, zero phase."""
    x = np.asarray(signal.samples)
    f = np.abs(np.fft.fftfreq(x.size, d=signal.sample_period))
    h = np.interp(f, [stop_low, pass_low, pass_high, stop_high], [0.0, 1.0, 1.0, 0.0], left=0.0, right=0.0)
    y = np.fft.ifft(np.fft.fft(x) * h)
    if not np.iscomplexobj(x):
        y = y.real
    return dataclasses.replace(signal, samples=y)


@dataclass(frozen=True)
class ImpairmentConfig:
    awgn_dbfs: float | None = None
    quantizer_bits: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.quantizer_bits is not None and not 4 <= self.quantizer_bits <= 16:
            raise ValueError("quantizer_bits must lie in [4, 16]")


@dataclass(frozen=True, eq=False)
class ChannelCapture:
    """Real samples from one simulated converter channel (one period)."""

    samples: np.ndarray
    rate: float
    timing_offset: float = 0.0
    channel_id: int = 0
    impairments: dict = field(default_factory=dict)
    is_periodic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples))

    @property
    def sample_period(self) -> float:
        return 1.0 / self.rate

    def __len__(self):
        return self.samples.size


def quantize(x: np.ndarray, bits: int) -> np.ndarray:
    """Mid-tread uniform quantizer over +/-1.0 with saturation."""
    step = 2.0 / 2**bits
    codes = np.clip(np.rint(x / step), -(2 ** (bits - 1)), 2 ** (bits - 1) - 1)
    return codes * step


def adc_capture(
    signal: ContinuousSignal,
    rate: float,
    offset: float = 0.0,
    imp: ImpairmentConfig = ImpairmentConfig(),
    channel_id: int = 0,
    deviation: DeviationModel | None = None,
) -> ChannelCapture:
    """Decimate the dense waveform to one converter channel.

    ``offset`` must land on the dense grid; sub-grid timing is produced
    upstream with :func:`fractional_delay` or a deviation delay. AWGN is added
    before quantization.
    """
    _require_real(signal, "adc_capture")
    dense_rate = signal.rate
    ratio = dense_rate / rate
    decim = int(round(ratio))
    if decim < 1 or abs(ratio - decim) > 1e-9 * ratio:
        raise ValueError("dense grid mismatch")
    ticks_f = offset / signal.sample_period
    ticks = int(round(ticks_f))
    if abs(ticks_f - ticks) > 1e-6:
        raise ValueError("offset is not on the dense grid")
    x = np.asarray(signal.samples)
    n = x.size
    if signal.is_periodic:
        if n % decim:
            raise ValueError("dense grid mismatch: period is not a whole number of channel samples")
        idx = (ticks + decim * np.arange(n // decim)) % n
    else:
        idx = np.arange(ticks, n, decim)
        if idx.size == 0:
            raise ValueError("offset beyond the end of the signal")
    y = x[idx].astype(float)
    if imp.awgn_dbfs is not None:
        sigma = np.sqrt(FULL_SCALE_POWER * 10 ** (imp.awgn_dbfs / 10))
        y = y + np.random.default_rng(imp.seed).normal(0.0, sigma, y.size)
    if imp.quantizer_bits is not None:
        y = quantize(y, imp.quantizer_bits)
    record = {
        "awgn_dbfs": imp.awgn_dbfs,
        "quantizer_bits": imp.quantizer_bits,
        "seed": imp.seed,
        "deviation": (deviation or DeviationModel()).describe(),
    }
    return ChannelCapture(y, rate, ticks * signal.sample_period, channel_id, record, signal.is_periodic)


def band_occupancy(signal: ContinuousSignal) -> FrequencySpan:
    """Smallest span holding the signal's non-negligible bins."""
    X = np.fft.fft(signal.samples)
    f = np.fft.fftfreq(X.size, d=signal.sample_period)
    occ = f[np.abs(X) > 1e-12 * np.max(np.abs(X))]
    return FrequencySpan(float(occ.min()), float(occ.max()))
