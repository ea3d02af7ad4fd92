import numpy as np
import pytest

from stereoqa.audio import AudioBuffer

FS = 48000


def sine(freq_hz, seconds=1.0, amplitude=0.5, sample_rate=FS, phase=0.0):
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    return amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase)


def tonal_item(seconds=1.5, sample_rate=FS):
    """Harmonic stack, solo-instrument stand-in."""
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    x = np.zeros_like(t)
    for i, f in enumerate((440.0, 880.0, 1320.0, 2200.0)):
        x += 0.14 * np.sin(2.0 * np.pi * f * t + 0.7 * i)
    return x


def noisy_item(seconds=1.5, sample_rate=FS, seed=11):
    """Lowpass-tilted noise, dense-mix stand-in."""
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(int(seconds * sample_rate))
    shaped = np.zeros_like(white)
    state = 0.0
    # one-pole tilt keeps some energy everywhere but rolls off the top
    for i, w in enumerate(white):
        state = 0.97 * state + 0.05 * w
        shaped[i] = state
    return 0.35 * shaped / np.max(np.abs(shaped))


def noisy_item_fast(seconds=1.5, sample_rate=FS, seed=11):
    from scipy.signal import lfilter

    rng = np.random.default_rng(seed)
    white = rng.standard_normal(int(seconds * sample_rate))
    shaped = lfilter([0.05], [1.0, -0.97], white)
    return 0.35 * shaped / np.max(np.abs(shaped))


def transient_item(seconds=1.5, sample_rate=FS, seed=5):
    """Decaying noise bursts four times a second, castanet stand-in."""
    rng = np.random.default_rng(seed)
    x = np.zeros(int(seconds * sample_rate))
    for start in range(0, len(x), sample_rate // 4):
        burst = rng.standard_normal(500) * np.exp(-np.arange(500) / 70.0)
        end = min(start + 500, len(x))
        x[start:end] += 0.5 * burst[: end - start]
    return x


def stereo_buffer(seed=3, seconds=0.6, sample_rate=FS, amplitude=0.4):
    rng = np.random.default_rng(seed)
    frames = int(seconds * sample_rate)
    return AudioBuffer(
        sample_rate, amplitude * rng.uniform(-1.0, 1.0, size=(2, frames))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
