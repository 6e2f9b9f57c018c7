"""Simulation of two-channel bonding receivers: hybrid I/Q and time-interleaved sampling."""

from .analysis import (
    DeconvolutionError,
    ImpulseResponseReport,
    IrrReport,
    ToneIrr,
    compute_deviation,
    deconvolve_impulse_response,
    measure_irr,
    measure_tone_irr,
    reconstruction_gain_db,
    sinr,
    theoretical_irr,
)
from .bonding import BondedSignal, bond_iq_bands, deinterleave, reconstruct_interleaved, reconstruct_iq
from .correction import CorrectionState, apply_correction, estimate_gain, optimize_timing, timing_error_measure
from .frontend import (
    ChannelCapture,
    DeviationModel,
    FrequencyResponse,
    ImpairmentConfig,
    adc_capture,
    hybrid_coupler,
    load_response_csv,
    power_splitter,
    ramp_filter,
    save_response_csv,
)
from .scenario import ConfigError, NumericalError, run_filterbank_demo, run_irr_theory, run_scenario
from .signal_core import (
    ContinuousSignal,
    FrequencySpan,
    Spectrum,
    alias_frequency,
    analytic,
    brickwall_filter,
    dft,
    fractional_delay,
    frequency_shift,
    generate_multitone,
    idft,
)

__version__ = "0.1.0"
