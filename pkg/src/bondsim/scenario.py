"""Declarative experiment runner.

A scenario is a JSON document (``"schema": 1``) describing the signal, the
front end and what to measure. Running one produces a ``report.json`` plus
CSV files, byte-identical for identical inputs.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import DeconvolutionError, SENTINEL_DB
from .bonding import bond_iq_bands, reconstruct_interleaved, reconstruct_iq
from .correction import correct_pair, optimize_timing
from .frontend import (
    DeviationModel,
    FrequencyResponse,
    ImpairmentConfig,
    adc_capture,
    hybrid_coupler,
    load_response_csv,
    power_splitter,
    ramp_filter,
)
from .signal_core import (
    FrequencySpan,
    alias_frequency,
    brickwall_filter,
    common_fundamental,
    dft,
    frequency_shift,
    generate_multitone,
    power_to_dbfs,
    real_part,
    tone_frequencies,
)

SCHEMA_VERSION = 1
DEFAULT_OUT = "bondsim_out"
OUTPUT_KINDS = ("spectrum", "impulse_response", "irr_curve")


class ConfigError(ValueError):
    """Invalid scenario configuration; the message carries the line number."""


class NumericalError(RuntimeError):
    """A numerical step of the pipeline failed (e.g. ill-conditioned deconvolution)."""


DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "name": "scenario",
    "architecture": None,
    "waveform": {
        "bandwidth_hz": None,
        "carrier_hz": None,
        "tone_spacing_hz": None,
        "tone_offset_hz": 0.0,
        "phase_scheme": "newman",
        "phase_seed": 0,
    },
    "rates": {"channel_rate_hz": 5e9, "dense_oversampling": 4, "swap_channels": False},
    "deviation": {"mode": "ideal"},
    "impairments": {"awgn_dbfs": None, "quantizer_bits": None, "seed": 0},
    "correction": {"enabled": False, "objective": "autocorr", "tol_s": 1e-15},
    "analysis": {"desired_band": None, "sinr_window": 2, "outputs": list(OUTPUT_KINDS)},
}

DEVIATION_KEYS = {
    "ideal": {"mode"},
    "scalar": {"mode", "gain_db", "phase_deg", "delay_s"},
    "tabulated": {"mode", "csv", "response1", "response2", "freq_hz", "gain_db", "phase_deg"},
}


def _line_of(text: str, path) -> int:
    pos = 0
    for key in path:
        hit = text.find(f'"{key}"', pos)
        if hit < 0:
            break
        pos = hit
    return text.count("\n", 0, pos) + 1


class _Validator:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def fail(self, path, msg):
        line = _line_of(self.text, path) if path else 1
        where = ".".join(str(p) for p in path) or "<root>"
        raise ConfigError(f"{self.source}:{line}: {where}: {msg}")

    def number(self, obj, path, *, allow_none=False, positive=False, integer=False):
        val = obj
        if val is None and allow_none:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            self.fail(path, "expected a finite number")
        if integer and int(val) != val:
            self.fail(path, "expected an integer")
        if positive and val <= 0:
            self.fail(path, "must be positive")
        return int(val) if integer else float(val)


def _merge(validator, data, defaults, path):
    if not isinstance(data, dict):
        validator.fail(path, "expected an object")
    out = {}
    for key in data:
        if key not in defaults:
            validator.fail(path + [key], "unknown key")
    for key, default in defaults.items():
        if isinstance(default, dict) and key != "deviation":
            out[key] = _merge(validator, data.get(key, {}), default, path + [key])
        else:
            out[key] = copy.deepcopy(data.get(key, default))
    return out


def parse_config(text: str, source: str = "<config>", base_dir=None) -> dict:
    """Validate a scenario document and fill defaults.

    Relative CSV paths resolve against ``base_dir`` and are stored absolute.
    """
    v = _Validator(text, source)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        v.fail([], "expected a JSON object")
    if raw.get("schema") != SCHEMA_VERSION:
        v.fail(["schema"], f"schema must be {SCHEMA_VERSION}")
    cfg = _merge(v, raw, DEFAULTS, [])
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    if not isinstance(cfg["name"], str):
        v.fail(["name"], "expected a string")
    arch = cfg["architecture"]
    if arch not in ("iq_hybrid", "interleaved", "filterbank_demo"):
        v.fail(["architecture"], "must be iq_hybrid, interleaved or filterbank_demo")

    rates = cfg["rates"]
    fs = v.number(rates["channel_rate_hz"], ["rates", "channel_rate_hz"], positive=True)
    osf = v.number(rates["dense_oversampling"], ["rates", "dense_oversampling"], positive=True, integer=True)
    if osf < 2 or osf % 2:
        v.fail(["rates", "dense_oversampling"], "must be an even integer >= 2 (half-period offset on the dense grid)")
    if not isinstance(rates["swap_channels"], bool):
        v.fail(["rates", "swap_channels"], "expected true or false")
    rates.update(channel_rate_hz=fs, dense_oversampling=osf)

    wf = cfg["waveform"]
    bw = v.number(wf["bandwidth_hz"], ["waveform", "bandwidth_hz"])
    fc = v.number(wf["carrier_hz"], ["waveform", "carrier_hz"])
    sp = v.number(wf["tone_spacing_hz"], ["waveform", "tone_spacing_hz"], positive=True)
    off = v.number(wf["tone_offset_hz"], ["waveform", "tone_offset_hz"])
    if bw < 0:
        v.fail(["waveform", "bandwidth_hz"], "must be non-negative")
    ratio = bw / sp
    if abs(ratio - round(ratio)) > 1e-9 * max(1, ratio) or round(ratio) % 2:
        v.fail(["waveform", "tone_spacing_hz"], "bandwidth must be an even multiple of the tone spacing")
    if wf["phase_scheme"] not in ("newman", "random"):
        v.fail(["waveform", "phase_scheme"], "must be newman or random")
    seed = v.number(wf["phase_seed"], ["waveform", "phase_seed"], integer=True)
    wf.update(bandwidth_hz=bw, carrier_hz=fc, tone_spacing_hz=sp, tone_offset_hz=off, phase_seed=seed)
    lo, hi = fc + off - bw / 2, fc + off + bw / 2
    dense_nyq = osf * fs / 2
    if arch == "interleaved" and not (0 < lo and hi < fs):
        v.fail(["waveform", "carrier_hz"], "band must lie inside (0, channel rate) for interleaved sampling")
    if arch == "iq_hybrid" and (bw > fs or lo <= 0):
        v.fail(["waveform", "carrier_hz"], "band must be positive and no wider than the channel rate")
    if arch == "filterbank_demo" and not (0 < lo and hi < fs):
        v.fail(["waveform", "carrier_hz"], "demo band must lie inside (0, channel rate)")
    if hi >= dense_nyq:
        v.fail(["waveform", "carrier_hz"], "band exceeds the dense grid")

    cfg["deviation"] = _parse_deviation(v, cfg["deviation"], base_dir)
    if cfg["deviation"]["mode"] == "tabulated" and arch != "filterbank_demo":
        try:
            dev = build_deviation(cfg["deviation"])
        except (OSError, ValueError) as exc:
            v.fail(["deviation"], str(exc))
        if not np.all(dev.response.covers([lo, hi])):
            v.fail(["deviation"], f"table does not cover the signal band [{lo:.9g}, {hi:.9g}] Hz")

    imp = cfg["impairments"]
    awgn = v.number(imp["awgn_dbfs"], ["impairments", "awgn_dbfs"], allow_none=True)
    bits = v.number(imp["quantizer_bits"], ["impairments", "quantizer_bits"], allow_none=True, integer=True)
    if bits is not None and not 4 <= bits <= 16:
        v.fail(["impairments", "quantizer_bits"], "must lie in [4, 16]")
    imp.update(awgn_dbfs=awgn, quantizer_bits=bits,
               seed=v.number(imp["seed"], ["impairments", "seed"], integer=True))

    corr = cfg["correction"]
    if not isinstance(corr["enabled"], bool):
        v.fail(["correction", "enabled"], "expected true or false")
    if corr["objective"] not in ("autocorr", "image_band_power"):
        v.fail(["correction", "objective"], "must be autocorr or image_band_power")
    if corr["enabled"] and corr["objective"] == "autocorr" and arch != "interleaved":
        v.fail(["correction", "objective"], "autocorr applies to interleaved captures only")
    corr["tol_s"] = v.number(corr["tol_s"], ["correction", "tol_s"], positive=True)

    an = cfg["analysis"]
    band = an["desired_band"]
    if band is not None:
        if not (isinstance(band, list) and len(band) == 2):
            v.fail(["analysis", "desired_band"], "expected [f_low, f_high] or null")
        b0 = v.number(band[0], ["analysis", "desired_band"])
        b1 = v.number(band[1], ["analysis", "desired_band"])
        if b0 > b1:
            v.fail(["analysis", "desired_band"], "f_low exceeds f_high")
        an["desired_band"] = [b0, b1]
    an["sinr_window"] = v.number(an["sinr_window"], ["analysis", "sinr_window"], integer=True)
    if an["sinr_window"] < 0:
        v.fail(["analysis", "sinr_window"], "must be >= 0")
    outs = an["outputs"]
    if not isinstance(outs, list) or any(o not in OUTPUT_KINDS for o in outs):
        v.fail(["analysis", "outputs"], f"entries must be among {', '.join(OUTPUT_KINDS)}")
    return cfg


def _parse_deviation(v: _Validator, dev, base_dir: Path) -> dict:
    path = ["deviation"]
    if not isinstance(dev, dict):
        v.fail(path, "expected an object")
    mode = dev.get("mode")
    if mode not in DEVIATION_KEYS:
        v.fail(path + ["mode"], "must be ideal, scalar or tabulated")
    for key in dev:
        if key not in DEVIATION_KEYS[mode]:
            v.fail(path + [key], f"unknown key for {mode} deviation")
    out = {"mode": mode}
    if mode == "scalar":
        for key in ("gain_db", "phase_deg", "delay_s"):
            out[key] = v.number(dev.get(key, 0.0), path + [key])
    elif mode == "tabulated":
        given = [k for k in ("csv", "response1", "freq_hz") if k in dev]
        if len(given) != 1:
            v.fail(path, "give exactly one of csv, response1/response2, or freq_hz/gain_db/phase_deg")
        if "csv" in dev:
            out["csv"] = _existing(v, dev["csv"], path + ["csv"], base_dir)
        elif "response1" in dev:
            if "response2" not in dev:
                v.fail(path + ["response1"], "response2 is required with response1")
            out["response1"] = _existing(v, dev["response1"], path + ["response1"], base_dir)
            out["response2"] = _existing(v, dev["response2"], path + ["response2"], base_dir)
        else:
            cols = {}
            for key in ("freq_hz", "gain_db", "phase_deg"):
                col = dev.get(key)
                if not isinstance(col, list) or not col:
                    v.fail(path + [key], "expected a non-empty list of numbers")
                cols[key] = [v.number(c, path + [key]) for c in col]
            if len({len(c) for c in cols.values()}) != 1:
                v.fail(path + ["freq_hz"], "freq_hz, gain_db and phase_deg differ in length")
            if any(b <= a for a, b in zip(cols["freq_hz"], cols["freq_hz"][1:])):
                v.fail(path + ["freq_hz"], "must be strictly ascending")
            out.update(cols)
    return out


def _existing(v, value, path, base_dir):
    if not isinstance(value, str):
        v.fail(path, "expected a file path")
    p = Path(value)
    if not p.is_absolute():
        p = base_dir / p
    if not p.is_file():
        v.fail(path, f"file not found: {p}")
    return str(p.resolve())


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}:1: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), path.parent)


def build_deviation(desc: dict) -> DeviationModel:
    mode = desc["mode"]
    if mode == "ideal":
        return DeviationModel.ideal()
    if mode == "scalar":
        return DeviationModel.scalar(desc["gain_db"], desc["phase_deg"], desc["delay_s"])
    if "csv" in desc:
        return DeviationModel.tabulated(load_response_csv(desc["csv"]))
    if "response1" in desc:
        return analysis.compute_deviation(load_response_csv(desc["response1"]), load_response_csv(desc["response2"]))
    return DeviationModel.tabulated(FrequencyResponse.from_polar(desc["freq_hz"], desc["gain_db"], desc["phase_deg"]))


# --- output files -------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(float(c)) if not isinstance(c, (int, np.integer)) else str(int(c)) for c in row])


def write_spectrum_csv(path: Path, signal) -> None:
    spec = dft(signal)
    amps = spec.amplitudes
    mag = power_to_dbfs(np.abs(amps) ** 2)
    phase = np.degrees(np.angle(amps))
    write_csv(path, ["freq_hz", "mag_dbfs", "phase_deg"], zip(spec.freq_grid, mag, phase))


def write_irr_csv(path: Path, freqs, irr) -> None:
    write_csv(path, ["freq_hz", "irr_db"], zip(freqs, irr))


def write_impulse_csv(path: Path, report) -> None:
    p = np.abs(report.taps) ** 2
    with np.errstate(divide="ignore"):
        mag = np.maximum(10 * np.log10(p), -SENTINEL_DB)
    phase = np.degrees(np.angle(report.taps))
    write_csv(path, ["tap_index", "mag_db", "phase_deg"], zip(range(len(p)), mag, phase))


def read_csv(path) -> tuple[list, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def resolve_out_dir(out=None) -> Path:
    return Path(out or os.environ.get("BONDSIM_OUT") or DEFAULT_OUT)


# --- scenario pipeline --------------------------------------------------------

@dataclass
class Pipeline:
    """Intermediate products of one scenario run, kept for inspection."""

    reference: object
    rf: object
    rf_tones: np.ndarray
    cap_a: object
    cap_b: object
    bonded: object
    method: str
    deviation: DeviationModel
    fully_aliased: bool


def build_pipeline(cfg: dict) -> Pipeline:
    wf, rates, imp = cfg["waveform"], cfg["rates"], cfg["impairments"]
    fs = rates["channel_rate_hz"]
    dense = rates["dense_oversampling"] * fs
    bw, sp = wf["bandwidth_hz"], wf["tone_spacing_hz"]
    shift = wf["carrier_hz"] + wf["tone_offset_hz"]
    band = FrequencySpan(-bw / 2, bw / 2)
    fund = common_fundamental(sp, bw / 2, shift)
    ref = generate_multitone(band, sp, dense, wf["phase_scheme"], wf["phase_seed"], fundamental=fund)
    rf = real_part(frequency_shift(ref, shift))
    rf_tones = shift + tone_frequencies(band, sp)
    dev = build_deviation(cfg["deviation"])
    imp_a = ImpairmentConfig(imp["awgn_dbfs"], imp["quantizer_bits"], imp["seed"])
    imp_b = ImpairmentConfig(imp["awgn_dbfs"], imp["quantizer_bits"], imp["seed"] + 1)
    if cfg["architecture"] == "iq_hybrid":
        a, b = hybrid_coupler(rf, dev)
        cap_a = adc_capture(a, fs, 0.0, imp_a, 0, dev)
        cap_b = adc_capture(b, fs, 0.0, imp_b, 1, dev)
        bonded = reconstruct_iq(cap_a, cap_b)
    else:
        a, b = power_splitter(rf, dev)
        cap_a = adc_capture(a, fs, 0.0, imp_a, 0, dev)
        cap_b = adc_capture(b, fs, 0.5 / fs, imp_b, 1, dev)
        bonded = reconstruct_interleaved(cap_a, cap_b, swap=rates["swap_channels"])
    ratio = shift / (fs / 2)
    fully_aliased = abs(ratio - round(ratio)) < 1e-9
    return Pipeline(ref, rf, rf_tones, cap_a, cap_b, bonded, cfg["architecture"], dev, fully_aliased)


def irr_tones(pipe: Pipeline, desired_band=None):
    """Bonded-grid tone positions usable for IRR, with their RF frequencies.

    Tones whose image lands on another tone are dropped; fully aliased
    carriers yield no tones.
    """
    rf = pipe.rf_tones
    if desired_band is not None:
        rf = rf[FrequencySpan(*desired_band).contains(rf, 1e-6)]
    if pipe.fully_aliased or rf.size == 0:
        return np.array([]), np.array([]), 0
    if pipe.method == "iq_hybrid":
        pos = alias_frequency(rf, pipe.bonded.channel_rate)
    else:
        pos = rf.copy()
    df = pipe.bonded.rate / len(pipe.bonded)
    k = np.rint(pos / df).astype(np.int64)
    k_img = np.rint(analysis.image_frequency(pipe.bonded, pos) / df).astype(np.int64)
    keep = ~np.isin(k_img, k)
    return pos[keep], rf[keep], int((~keep).sum())


def _impulse_reports(pipe: Pipeline, bonded, cap_b, window):
    shift = pipe.rf_tones.mean() if pipe.rf_tones.size else 0.0
    fs = pipe.cap_a.rate
    offset_b = 0.5 / fs if pipe.method == "interleaved" else 0.0
    try:
        comb = analysis.deconvolve_impulse_response(bonded, pipe.reference, shift, 0.0, window)
        single = [
            analysis.deconvolve_impulse_response(pipe.cap_a, pipe.reference, shift, 0.0, window),
            analysis.deconvolve_impulse_response(cap_b, pipe.reference, shift, offset_b, window),
        ]
    except DeconvolutionError as exc:
        raise NumericalError(str(exc)) from exc
    return comb, single


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def run_scenario(config, out_dir=None, seed: int | None = None) -> dict:
    """Run a scenario and write its report and requested CSVs.

    ``config`` is a path or an already-parsed dict. ``seed`` overrides the
    impairment seed.
    """
    cfg = load_config(config) if isinstance(config, (str, Path)) else copy.deepcopy(config)
    if seed is not None:
        cfg["impairments"]["seed"] = int(seed)
    if cfg["architecture"] == "filterbank_demo":
        return run_filterbank_demo(cfg, out_dir)
    out = resolve_out_dir(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = cfg["analysis"]["outputs"]
    window = cfg["analysis"]["sinr_window"]

    try:
        pipe = build_pipeline(cfg)
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
    pos, rf_used, excluded = irr_tones(pipe, cfg["analysis"]["desired_band"])
    artifacts = []
    report = {
        "schema": SCHEMA_VERSION,
        "config": cfg,
        "fully_aliased": pipe.fully_aliased,
        "irr_tones": int(pos.size),
        "irr_tones_excluded": excluded,
    }

    raw_tone = analysis.measure_tone_irr(pipe.bonded, pos) if pos.size else None
    report["raw_irr_db"] = _num(raw_tone.total_irr_db) if raw_tone else None
    comb, single = _impulse_reports(pipe, pipe.bonded, pipe.cap_b, window)
    report["sinr_single_db"] = _num(np.mean([s.sinr_db for s in single]))
    report["sinr_raw_db"] = _num(comb.sinr_db)
    report["sinr_improvement_db"] = _num(comb.sinr_db - np.mean([s.sinr_db for s in single]))
    report["reconstruction_gain_db"] = _num(analysis.reconstruction_gain_db(comb, single))

    if "spectrum" in outputs:
        write_spectrum_csv(out / "spectrum_raw.csv", pipe.bonded)
        artifacts.append("spectrum_raw.csv")
    if "impulse_response" in outputs:
        write_impulse_csv(out / "impulse_response_raw.csv", comb)
        artifacts.append("impulse_response_raw.csv")
    if "irr_curve" in outputs:
        try:
            theory = analysis.theoretical_irr(pipe.deviation, pipe.rf_tones)
        except ValueError as exc:
            raise NumericalError(str(exc)) from exc
        write_irr_csv(out / "irr_theory.csv", pipe.rf_tones, theory)
        artifacts.append("irr_theory.csv")
        if raw_tone is not None:
            write_irr_csv(out / "irr_measured_raw.csv", rf_used, raw_tone.irr_db)
            artifacts.append("irr_measured_raw.csv")

    corr = cfg["correction"]
    if corr["enabled"]:
        objective = corr["objective"]
        if objective == "image_band_power" and not pos.size:
            raise NumericalError("image_band_power objective needs a non-aliased desired band")
        state = optimize_timing(
            pipe.cap_a, pipe.cap_b, pipe.method, objective, pos if pos.size else None,
            corr["tol_s"], swap=cfg["rates"]["swap_channels"],
        )
        fixed = correct_pair(pipe.cap_a, pipe.cap_b, state, pipe.method, cfg["rates"]["swap_channels"])
        from .correction import apply_correction

        cap_b_fixed = apply_correction(pipe.cap_b, state)
        fixed_tone = analysis.measure_tone_irr(fixed, pos) if pos.size else None
        comb_c, _ = _impulse_reports(pipe, fixed, cap_b_fixed, window)
        report["corrected_irr_db"] = _num(fixed_tone.total_irr_db) if fixed_tone else None
        report["sinr_corrected_db"] = _num(comb_c.sinr_db)
        report["correction_state"] = state.to_dict()
        if "spectrum" in outputs:
            write_spectrum_csv(out / "spectrum_corrected.csv", fixed)
            artifacts.append("spectrum_corrected.csv")
        if "impulse_response" in outputs:
            write_impulse_csv(out / "impulse_response_corrected.csv", comb_c)
            artifacts.append("impulse_response_corrected.csv")
        if "irr_curve" in outputs and fixed_tone is not None:
            write_irr_csv(out / "irr_measured_corrected.csv", rf_used, fixed_tone.irr_db)
            artifacts.append("irr_measured_corrected.csv")

    artifacts.append("report.json")
    report["artifacts"] = artifacts
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


# --- theory curves ------------------------------------------------------------

def run_irr_theory(response1, response2, amplitude_corrected: bool = False, out_path=None):
    """Theoretical IRR curve from two measured path responses.

    Returns (freqs, irr_db); writes ``freq_hz,irr_db`` to ``out_path`` if given.
    """
    try:
        r1 = load_response_csv(response1)
        r2 = load_response_csv(response2)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    try:
        dev = analysis.compute_deviation(r1, r2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    freqs = dev.response.freq_grid
    irr = analysis.theoretical_irr(dev, freqs, amplitude_corrected)
    if out_path is not None:
        write_irr_csv(Path(out_path), freqs, irr)
    return freqs, irr


# --- filter bank comparison ---------------------------------------------------

def filterbank_plans(fs: float) -> dict:
    """Lowpass/bandpass trapezoids (stop, pass, pass, stop) scaled to the channel rate.

    ``attenuated`` keeps every path inside its own Nyquist zone at the cost of
    a dip at the crossover; ``aliased`` keeps the pass-band flat but lets each
    path spill into the neighbouring zone.
    """
    ny = fs / 2
    return {
        "attenuated": {"lowpass": (-1.0, 0.0, 0.6 * ny, ny), "bandpass": (ny, 1.4 * ny, 1.6 * ny, 2 * ny)},
        "aliased": {"lowpass": (-1.0, 0.0, ny, 1.4 * ny), "bandpass": (0.6 * ny, ny, 2 * ny, 2.4 * ny)},
    }


def _ramp_gain(f, stop_low, pass_low, pass_high, stop_high):
    return np.interp(np.abs(f), [stop_low, pass_low, pass_high, stop_high], [0.0, 1.0, 1.0, 0.0], left=0.0, right=0.0)


def _bank_metrics(bonded_amp, source_amp, response, tones, fs):
    expected = 2 * response * source_amp
    with np.errstate(divide="ignore"):
        mag_db = 20 * np.log10(np.abs(bonded_amp / (2 * source_amp)))
    alias = np.sum(np.abs(bonded_amp - expected) ** 2)
    ref = np.sum(np.abs(expected) ** 2)
    with np.errstate(divide="ignore"):
        alias_dbc = 10 * np.log10(alias / ref) if alias > 0 else -SENTINEL_DB
    near = np.argmin(np.abs(tones - fs / 2))
    return {
        "passband_ripple_db": _num(np.max(mag_db) - np.min(mag_db)) if np.all(np.isfinite(mag_db)) else None,
        "crossover_dip_db": _num(-mag_db[near]),
        "crossover_tone_hz": float(tones[near]),
        "alias_power_dbc": _num(max(alias_dbc, -SENTINEL_DB)),
    }


def _analytic_from_real(cap, freqs):
    return 2 * analysis.tone_amplitudes(cap, freqs)


def run_filterbank_demo(config, out_dir=None) -> dict:
    """Compare two real-sampled filter banks against the I/Q-aligned bank.

    A white real multitone across (0, channel rate) goes through each bank;
    every path is sampled at the channel rate and the bonded positive
    spectrum is rebuilt. Writes one spectrum CSV per bank plus a summary.
    """
    cfg = load_config(config) if isinstance(config, (str, Path)) else copy.deepcopy(config)
    out = resolve_out_dir(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    wf, rates = cfg["waveform"], cfg["rates"]
    fs = rates["channel_rate_hz"]
    dense = rates["dense_oversampling"] * fs
    bw, sp = wf["bandwidth_hz"], wf["tone_spacing_hz"]
    center = wf["carrier_hz"] + wf["tone_offset_hz"]
    band = FrequencySpan(center - bw / 2, center + bw / 2)
    tones = tone_frequencies(band, sp)
    if np.any(np.isclose(tones, fs / 2, rtol=0, atol=1e-6 * sp)):
        raise ConfigError("filterbank demo tones must avoid the crossover frequency")
    src = real_part(generate_multitone(band, sp, dense, wf["phase_scheme"], wf["phase_seed"]))
    x_amp = analysis.tone_amplitudes(src, tones)
    low = tones < fs / 2

    results = {}
    spectra = {}
    for name, plan in filterbank_plans(fs).items():
        lp = adc_capture(ramp_filter(src, *plan["lowpass"]), fs)
        bp = adc_capture(ramp_filter(src, *plan["bandpass"]), fs)
        bonded = np.where(low, _analytic_from_real(lp, tones), _analytic_from_real(bp, tones))
        resp = np.where(low, _ramp_gain(tones, *plan["lowpass"]), _ramp_gain(tones, *plan["bandpass"]))
        results[name] = _bank_metrics(bonded, x_amp, resp, tones, fs)
        spectra[name] = bonded

    lp = adc_capture(brickwall_filter(src, [FrequencySpan(-fs / 2, fs / 2)]), fs)
    bp_sig = brickwall_filter(src, [FrequencySpan(fs / 2, fs), FrequencySpan(-fs, -fs / 2)])
    p0, p90 = hybrid_coupler(bp_sig)
    iq = reconstruct_iq(adc_capture(p0, fs), adc_capture(p90, fs))
    plan = [(FrequencySpan(0.0, fs / 2), "baseband"), (FrequencySpan(fs / 2, fs), "iq")]
    bonded_sig = bond_iq_bands(lp, iq, plan, 2 * fs)
    bonded = analysis.tone_amplitudes(bonded_sig, tones)
    results["iq_aligned"] = _bank_metrics(bonded, x_amp, np.ones(tones.size), tones, fs)
    spectra["iq_aligned"] = bonded

    artifacts = []
    for name, amps in spectra.items():
        fname = f"filterbank_{name}.csv"
        mag = power_to_dbfs(np.abs(amps) ** 2)
        write_csv(out / fname, ["freq_hz", "mag_dbfs", "phase_deg"], zip(tones, mag, np.degrees(np.angle(amps))))
        artifacts.append(fname)
    summary = {"schema": SCHEMA_VERSION, "config": cfg, "banks": results, "artifacts": artifacts + ["filterbank_summary.json"]}
    (out / "filterbank_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
