import numpy as np
import pytest

from bondsim.signal_core import (
    FrequencySpan,
    common_fundamental,
    frequency_shift,
    generate_multitone,
    real_part,
    tone_frequencies,
)

FS = 5e9
DENSE = 4 * FS


def rf_multitone(bw, carrier, spacing, offset=0.0, dense=DENSE, scheme="newman", seed=0):
    """Real RF multitone plus its complex baseband reference and RF tone list."""
    shift = carrier + offset
    band = FrequencySpan(-bw / 2, bw / 2)
    fund = common_fundamental(spacing, bw / 2, shift)
    ref = generate_multitone(band, spacing, dense, scheme, seed, fundamental=fund)
    rf = real_part(frequency_shift(ref, shift))
    return rf, ref, shift + tone_frequencies(band, spacing)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
