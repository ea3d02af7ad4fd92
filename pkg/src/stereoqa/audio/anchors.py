"""Lowpass and mono anchor processing for MUSHRA trials.

The lowpass anchors follow the usual template: passband kept within 0.5 dB
up to 0.9 x cutoff, at least 50 dB of rejection above 1.25 x cutoff. A
linear-phase Kaiser FIR designed 5 dB past that attenuation gives margin on
both sides, and centered convolution removes the group delay so output and
input stay sample-aligned.
"""

from __future__ import annotations

import numpy as np
from scipy import signal

from .buffer import AudioBuffer

LOWPASS_CUTOFFS_HZ = (3500.0, 7000.0)

_STOPBAND_DB = 55.0  # design margin over the 50 dB template


def lowpass_design(cutoff_hz: float, sample_rate: int) -> np.ndarray:
    """Kaiser-window FIR taps for one anchor cutoff (odd length, type I)."""
    nyquist = sample_rate / 2.0
    if not 0 < cutoff_hz < nyquist:
        raise ValueError(f"cutoff {cutoff_hz} Hz outside (0, {nyquist}) Hz")
    transition_hz = (1.25 - 0.9) * cutoff_hz
    numtaps, beta = signal.kaiserord(_STOPBAND_DB, transition_hz / nyquist)
    numtaps |= 1  # odd length keeps the delay an integer number of samples
    return signal.firwin(numtaps, 1.075 * cutoff_hz, window=("kaiser", beta), fs=sample_rate)


def lowpass_anchor(buffer: AudioBuffer, cutoff_hz: float) -> AudioBuffer:
    """Length-preserving, delay-compensated lowpass at 3.5 or 7 kHz."""
    taps = lowpass_design(cutoff_hz, buffer.sample_rate)
    out = np.stack(
        [signal.fftconvolve(ch, taps, mode="same") for ch in buffer.samples]
    )
    return AudioBuffer(buffer.sample_rate, out)


def mono_anchor(stereo: AudioBuffer) -> AudioBuffer:
    """Per-sample channel mean, presented dual-mono for the stereo chain."""
    if stereo.num_channels != 2:
        raise ValueError(f"mono anchor needs 2 channels, got {stereo.num_channels}")
    mono = 0.5 * (stereo.samples[0] + stereo.samples[1])
    return AudioBuffer(stereo.sample_rate, np.stack([mono, mono.copy()]))
