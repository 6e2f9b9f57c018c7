"""
Achievable IRR from measured path responses
============================================

Builds two synthetic path responses, writes them as ``freq_hz,re,im`` CSVs
and turns them into theoretical IRR curves with and without amplitude
correction, the same way measured network-analyser data would be used.
"""

from pathlib import Path

import numpy as np

from bondsim import FrequencyResponse, save_response_csv
from bondsim.scenario import run_irr_theory

OUT = Path("demo_out/theory")
OUT.mkdir(parents=True, exist_ok=True)

f = np.linspace(0.25e9, 5e9, 96)
# a reference path with mild slope and a second path with gain ripple,
# a small quadrature offset and 3 ps of excess delay
h1 = 10 ** (-0.3 * f / 5e9 / 20) * np.exp(-2j * np.pi * f * 150e-12)
h2 = h1 * 10 ** ((0.4 + 0.2 * np.sin(2 * np.pi * f / 1.3e9)) / 20) * np.exp(1j * np.radians(1.5) - 2j * np.pi * f * 3e-12)
save_response_csv(FrequencyResponse(f, h1), OUT / "path1.csv")
save_response_csv(FrequencyResponse(f, h2), OUT / "path2.csv")

freqs, raw = run_irr_theory(OUT / "path1.csv", OUT / "path2.csv", out_path=OUT / "irr_theory.csv")
_, amp = run_irr_theory(OUT / "path1.csv", OUT / "path2.csv", True, OUT / "irr_theory_amplitude_corrected.csv")

for fi in (0.5e9, 1e9, 2.5e9, 4.5e9):
    k = np.argmin(np.abs(freqs - fi))
    print(f"{freqs[k] / 1e9:5.2f} GHz  IRR {raw[k]:6.2f} dB  amplitude-corrected {amp[k]:6.2f} dB")

# %%
# Amplitude equalisation lifts the curve to the phase-only limit; what is
# left is set by the quadrature offset and the growing delay phase.
