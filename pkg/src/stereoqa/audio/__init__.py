"""Sample-accurate signal primitives: buffers, WAV I/O, STFT, MS, anchors."""

from .anchors import LOWPASS_CUTOFFS_HZ, lowpass_anchor, mono_anchor
from .buffer import AudioBuffer
from .midside import MS_GAIN_DEFAULT, MidSidePair, ms_forward, ms_inverse
from .stft import (
    DEFAULT_FFT_SIZE,
    DEFAULT_HOP_SIZE,
    DEFAULT_WINDOW,
    Spectrogram,
    istft,
    make_window,
    stft,
    stft_mono,
)
from .wavio import read_wav, write_wav

__all__ = [
    "AudioBuffer",
    "MidSidePair",
    "MS_GAIN_DEFAULT",
    "Spectrogram",
    "DEFAULT_FFT_SIZE",
    "DEFAULT_HOP_SIZE",
    "DEFAULT_WINDOW",
    "LOWPASS_CUTOFFS_HZ",
    "istft",
    "lowpass_anchor",
    "make_window",
    "mono_anchor",
    "ms_forward",
    "ms_inverse",
    "read_wav",
    "stft",
    "stft_mono",
    "write_wav",
]
