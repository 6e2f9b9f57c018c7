"""Blind inter-channel correction: power equalization and subsample timing.

Channel 1 (or the 0 degree channel) is the reference and is never modified.
The timing search is a golden-section search over a fractional delay applied
to the second channel; the gain is solved in closed form.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import image_frequency, image_span
from .bonding import reconstruct_interleaved, reconstruct_iq
from .frontend import ChannelCapture
from .signal_core import FrequencySpan, fractional_delay

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass
class CorrectionState:
    gain: float = 1.0
    delay: float = 0.0
    objective_history: list = field(default_factory=list)
    converged: bool = True
    status: str = "identity"
    iterations: int = 0
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "gain": self.gain,
            "delay_s": self.delay,
            "converged": self.converged,
            "status": self.status,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "objective_history": [[i, v] for i, v in self.objective_history],
        }


def estimate_gain(cap1, cap2) -> float:
    """Linear factor that equalizes the RMS of ``cap2`` to ``cap1``."""
    a = np.asarray(cap1.samples)
    b = np.asarray(cap2.samples)
    if a.size != b.size:
        raise ValueError("captures differ in length")
    rms_a = np.sqrt(np.mean(np.abs(a) ** 2))
    rms_b = np.sqrt(np.mean(np.abs(b) ** 2))
    if rms_a == 0 or rms_b == 0:
        raise ValueError("zero-RMS channel")
    return float(rms_a / rms_b)


def timing_error_measure(bonded) -> float:
    """Lag-1 even/odd autocorrelation asymmetry of an interleaved stream.

    |A_even - A_odd| / (A_even + A_odd) with A_even = mean(x[2n] x[2n+1]) and
    A_odd = mean(x[2n+1] x[2n+2]), taken circularly over one period. Zero for
    a correctly timed stationary stream; grows with skew. The band must not
    straddle a multiple of half the channel rate.
    """
    x = np.asarray(bonded.samples)
    if np.iscomplexobj(x):
        x = x.real
    if x.size < 4 or x.size % 2:
        raise ValueError("interleaved stream must have an even length >= 4")
    even = x[0::2]
    odd = x[1::2]
    a_even = np.mean(even * odd)
    a_odd = np.mean(odd * np.roll(even, -1))
    den = a_even + a_odd
    if abs(den) < 1e-18:
        raise ValueError("insufficient signal")
    return float(abs(a_even - a_odd) / abs(den))


def apply_correction(cap: ChannelCapture, state: CorrectionState) -> ChannelCapture:
    x = np.asarray(cap.samples)
    y = x * state.gain if state.gain != 1.0 else x.copy()
    out = fractional_delay(dataclasses.replace(cap, samples=y), state.delay)
    record = dict(cap.impairments)
    record["correction"] = {"gain": state.gain, "delay_s": state.delay}
    return dataclasses.replace(out, impairments=record)


def _image_power_ratio(bonded, desired) -> float:
    x = np.asarray(bonded.samples)
    amps = np.abs(np.fft.fft(x) / x.size) ** 2
    freqs = np.fft.fftfreq(x.size, d=1.0 / bonded.rate)
    df = bonded.rate / x.size
    if isinstance(desired, FrequencySpan):
        img = image_span(bonded, desired)
        p_d = amps[desired.contains(freqs, 1e-9 * df)].sum()
        p_i = amps[img.contains(freqs, 1e-9 * df)].sum()
    else:
        tones = np.asarray(desired, dtype=float)
        k_d = np.rint(tones / df).astype(np.int64) % x.size
        k_i = np.rint(image_frequency(bonded, tones) / df).astype(np.int64) % x.size
        p_d = amps[k_d].sum()
        p_i = amps[k_i].sum()
    if p_d <= 0:
        raise ValueError("no power in the desired band")
    return float(p_i / p_d)


def make_objective(cap1, cap2, method: str, objective: str, desired=None, gain: float = 1.0, swap: bool = False):
    """Objective of the candidate delay applied to ``cap2``."""
    if method not in ("interleaved", "iq_hybrid"):
        raise ValueError(f"unknown method {method!r}")
    if objective == "autocorr" and method != "interleaved":
        raise ValueError("the autocorrelation measure applies to interleaved captures only")
    if objective == "image_band_power" and desired is None:
        raise ValueError("image_band_power needs a desired span or tone list")
    if objective not in ("autocorr", "image_band_power"):
        raise ValueError(f"unknown objective {objective!r}")
    scaled = dataclasses.replace(cap2, samples=np.asarray(cap2.samples) * gain)

    def bond(delay):
        c2 = fractional_delay(scaled, delay)
        if method == "interleaved":
            return reconstruct_interleaved(cap1, c2, swap=swap)
        return reconstruct_iq(cap1, c2)

    if objective == "autocorr":
        return lambda d: timing_error_measure(bond(d))
    return lambda d: _image_power_ratio(bond(d), desired)


def golden_section(f, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Minimize ``f`` on [lo, hi]; returns (x, fx, history, iterations, converged).

    ``history`` holds the incumbent best value after every iteration, so it
    never increases.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    history = []
    it = 0
    while (b - a) > tol and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            x_new, f_new = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            x_new, f_new = d, fd
        if f_new < best_f:
            best_x, best_f = x_new, f_new
        history.append((it, best_f))
    mid = 0.5 * (a + b)
    f_mid = f(mid)
    if f_mid < best_f:
        best_x, best_f = mid, f_mid
    return best_x, best_f, history, it, (b - a) <= tol


def optimize_timing(
    cap1: ChannelCapture,
    cap2: ChannelCapture,
    method: str = "interleaved",
    objective: str = "autocorr",
    desired=None,
    tol_s: float = 1e-15,
    max_iter: int = 200,
    swap: bool = False,
) -> CorrectionState:
    """Blind gain and subsample-timing estimate for the second channel.

    Parameters
    ----------
    cap1, cap2 : ChannelCapture
        Reference and corrected channel (0/90 degree ports for ``iq_hybrid``).
    method : {"interleaved", "iq_hybrid"}
        How candidate corrections are reconstructed.
    objective : {"autocorr", "image_band_power"}
        Timing-error statistic of the interleaved stream, or image-to-desired
        power of the bonded spectrum for ``desired`` (span or tone list).
    tol_s : float
        Search stops once the bracket is narrower than this.

    Returns
    -------
    CorrectionState
        ``converged`` is false when the bracket did not shrink below
        ``tol_s`` or the best value sits on the search edge.
    """
    gain = estimate_gain(cap1, cap2)
    f = make_objective(cap1, cap2, method, objective, desired, gain, swap)
    evals = 0

    def counted(d):
        nonlocal evals
        evals += 1
        return f(d)

    half = cap1.sample_period / 2
    x, fx, history, iters, tight = golden_section(counted, -half, half, tol_s, max_iter)

    state = CorrectionState(gain=gain, objective_history=history, iterations=iters)
    # the declared nominal geometry is a legitimate candidate
    f0 = counted(0.0)
    if f0 <= fx:
        x, fx = 0.0, f0
    f_lo, f_hi = counted(-half), counted(half)
    edge = min(f_lo, f_hi) < fx
    if edge:
        x, fx = (-half, f_lo) if f_lo <= f_hi else (half, f_hi)
        state.status = "optimum at search edge; objective may not be unimodal"
        log.warning("timing optimizer: %s", state.status)
    elif not tight:
        state.status = f"stopped after {iters} iterations"
    else:
        state.status = "converged"
    if state.objective_history and fx < state.objective_history[-1][1]:
        state.objective_history.append((iters + 1, fx))
    state.delay = float(x)
    state.converged = bool(tight and not edge)
    state.evaluations = evals
    return state


def correct_pair(cap1, cap2, state: CorrectionState, method: str = "interleaved", swap: bool = False):
    c2 = apply_correction(cap2, state)
    if method == "interleaved":
        return reconstruct_interleaved(cap1, c2, swap=swap)
    return reconstruct_iq(cap1, c2)
