"""Channel bonding: combine coherent captures into one wider-band signal.

Reconstruction only uses the samples plus the nominal geometry declared by the
caller (rates, the half-period interleave offset, the band plan). Injected
impairments are never consulted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frontend import ChannelCapture
from .signal_core import FrequencySpan, alias_frequency


@dataclass(frozen=True, eq=False)
class BondedSignal:
    samples: np.ndarray
    rate: float
    method: str
    band_plan: list = field(default_factory=list)
    channel_rate: float | None = None
    is_periodic: bool = True

    def __post_init__(self):
        if self.method not in ("iq_hybrid", "interleaved"):
            raise ValueError(f"unknown bonding method {self.method!r}")
        object.__setattr__(self, "samples", np.asarray(self.samples))
        if self.channel_rate is None:
            per_channel = self.rate / 2 if self.method == "interleaved" else self.rate
            object.__setattr__(self, "channel_rate", per_channel)

    @property
    def sample_period(self) -> float:
        return 1.0 / self.rate

    def __len__(self):
        return self.samples.size


def _check_pair(a: ChannelCapture, b: ChannelCapture):
    if a.rate != b.rate:
        raise ValueError(f"channel rates differ: {a.rate} vs {b.rate}")
    if len(a) != len(b):
        raise ValueError(f"capture lengths differ: {len(a)} vs {len(b)}")


def reconstruct_iq(cap0: ChannelCapture, cap90: ChannelCapture) -> BondedSignal:
    """Analytic reconstruction cap0 + j*cap90 at the channel rate."""
    _check_pair(cap0, cap90)
    z = np.asarray(cap0.samples, dtype=float) + 1j * np.asarray(cap90.samples, dtype=float)
    plan = [(FrequencySpan(-cap0.rate / 2, cap0.rate / 2), "iq")]
    return BondedSignal(z, cap0.rate, "iq_hybrid", plan, cap0.rate)


def reconstruct_interleaved(cap1: ChannelCapture, cap2: ChannelCapture, swap: bool = False) -> BondedSignal:
    """Multiplex two half-period-offset captures into one stream at twice the rate.

    ``cap1`` lands on the even output indices unless ``swap`` is set.
    """
    _check_pair(cap1, cap2)
    first, second = (cap2, cap1) if swap else (cap1, cap2)
    out = np.empty(2 * len(cap1), dtype=np.result_type(first.samples, second.samples))
    out[0::2] = first.samples
    out[1::2] = second.samples
    plan = [(FrequencySpan(0.0, cap1.rate), "interleaved")]
    return BondedSignal(out, 2 * cap1.rate, "interleaved", plan, cap1.rate)


def deinterleave(bonded: BondedSignal):
    return bonded.samples[0::2], bonded.samples[1::2]


def _check_plan(plan):
    spans = sorted((span for span, _ in plan), key=lambda s: s.f_low)
    for a, b in zip(spans, spans[1:]):
        if a.f_high > b.f_low:
            raise ValueError("band plan spans overlap")


def _tone_amplitudes(x: np.ndarray) -> np.ndarray:
    return np.fft.fft(x) / x.size


def bond_iq_bands(
    baseband: ChannelCapture,
    iq: BondedSignal,
    plan,
    rate: float,
) -> BondedSignal:
    """Assemble a baseband capture and an I/Q pair into one analytic signal.

    Parameters
    ----------
    baseband : ChannelCapture
        Real capture of the lowpass branch; its analytic content fills the
        span tagged ``"baseband"``.
    iq : BondedSignal
        Output of :func:`reconstruct_iq` for the bandpass branch; its content
        is moved to the span tagged ``"iq"``.
    plan : list of (FrequencySpan, tag)
        Disjoint spans in absolute frequency. Bins are assigned half-open,
        [f_low, f_high), so touching spans never double count.
    rate : float
        Bonded output rate; the output grid is [-rate/2, rate/2).

    Notes
    -----
    All inputs must hold exactly one period of the same periodic waveform, so
    the assembly is exact bin-for-bin.
    """
    _check_plan(plan)
    period = len(baseband) / baseband.rate
    if abs(len(iq) / iq.rate - period) > 1e-9 * period:
        raise ValueError("baseband and I/Q captures cover different periods")
    n_out_f = rate * period
    n_out = int(round(n_out_f))
    if abs(n_out_f - n_out) > 1e-6:
        raise ValueError("bonded rate is not commensurate with the signal period")
    df = 1.0 / period
    out = np.zeros(n_out, dtype=complex)
    out_freqs = np.fft.fftfreq(n_out, d=1.0 / rate)

    for span, tag in plan:
        if span.f_low < -rate / 2 or span.f_high > rate / 2:
            raise ValueError("span exceeds the bonded Nyquist range")
        sel = (out_freqs >= span.f_low - 1e-9 * df) & (out_freqs < span.f_high - 1e-9 * df)
        if span.width == 0:
            sel = np.abs(out_freqs - span.f_low) < 1e-9 * df
        f_sel = out_freqs[sel]
        if tag == "baseband":
            if span.f_low < 0 or span.f_high > baseband.rate / 2:
                raise ValueError("baseband span exceeds the source Nyquist range")
            src = _tone_amplitudes(np.asarray(baseband.samples, dtype=float))
            src_rate = baseband.rate
            weight = np.where(f_sel == 0, 1.0, 2.0)
        elif tag == "iq":
            if span.width > iq.rate:
                raise ValueError("I/Q span exceeds the source Nyquist range")
            src = _tone_amplitudes(np.asarray(iq.samples))
            src_rate = iq.rate
            weight = np.ones(f_sel.shape)
        else:
            raise ValueError(f"unknown band plan tag {tag!r}")
        n_src = src.size
        k = np.rint(alias_frequency(f_sel, src_rate) / df).astype(np.int64) % n_src
        out[sel] = weight * src[k] * n_out
    spans = [(span, tag) for span, tag in plan]
    return BondedSignal(np.fft.ifft(out), rate, "iq_hybrid", spans, iq.rate)
