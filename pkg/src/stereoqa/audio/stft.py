"""STFT analysis/resynthesis with weighted overlap-add.

Analysis and synthesis both apply the window, so perfect reconstruction
needs the *squared* window to overlap-add to a constant at the chosen hop
(sine window at 50% or 75% overlap, hann at 75%). Combinations that do not
are rejected up front.

The input is zero-padded by ``fft_size - hop_size`` on the left plus
whatever the right edge needs, giving ``ceil((length + fft_size - hop) /
hop)`` frames; every original sample then sits under a full overlap-add
weight and the inverse transform trims the padding away.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .buffer import AudioBuffer

DEFAULT_FFT_SIZE = 2048
DEFAULT_HOP_SIZE = 1024
DEFAULT_WINDOW = "sine"

_COLA_RTOL = 1e-8


def make_window(name: str, size: int) -> np.ndarray:
    """Periodic analysis window by name ("sine", "hann" or "rect")."""
    n = np.arange(size)
    if name == "sine":
        return np.sin(np.pi * (n + 0.5) / size)
    if name == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / size)
    if name == "rect":
        return np.ones(size)
    raise ValueError(f"unknown window {name!r}")


def _cola_constant(window: np.ndarray, hop: int) -> float:
    """Overlap-add constant of the squared window, or raise if not COLA."""
    product = window * window
    size = len(window)
    positions = np.arange(hop)
    total = np.zeros(hop)
    for shift in range(0, size, hop):
        chunk = product[shift + positions[: max(0, min(hop, size - shift))]]
        total[: len(chunk)] += chunk
    if total.max() - total.min() > _COLA_RTOL * total.max():
        raise ValueError(
            f"window/hop combination is not COLA for analysis+synthesis "
            f"(hop {hop} of {size}); overlap sum varies "
            f"{total.min():.6g}..{total.max():.6g}"
        )
    return float(total.mean())


@dataclass
class Spectrogram:
    """Complex one-sided STFT frames plus the geometry needed to invert them."""

    frames: np.ndarray = field(repr=False)  # (num_frames, fft_size // 2 + 1) complex
    fft_size: int
    hop_size: int
    window: str
    sample_rate: int
    num_samples: int
    channel_id: int = 0

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]

    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.num_bins) * self.sample_rate / self.fft_size

    def geometry_matches(self, other: "Spectrogram") -> bool:
        return (
            self.frames.shape == other.frames.shape
            and self.fft_size == other.fft_size
            and self.hop_size == other.hop_size
            and self.window == other.window
            and self.sample_rate == other.sample_rate
            and self.num_samples == other.num_samples
        )

    def copy(self) -> "Spectrogram":
        return Spectrogram(
            self.frames.copy(),
            self.fft_size,
            self.hop_size,
            self.window,
            self.sample_rate,
            self.num_samples,
            self.channel_id,
        )


def _validate_geometry(fft_size: int, hop_size: int):
    if fft_size <= 0 or fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two, got {fft_size}")
    if not 0 < hop_size <= fft_size:
        raise ValueError(f"hop_size must be in (0, fft_size], got {hop_size}")


def stft_mono(
    samples: np.ndarray,
    sample_rate: int,
    fft_size: int = DEFAULT_FFT_SIZE,
    hop_size: int = DEFAULT_HOP_SIZE,
    window: str = DEFAULT_WINDOW,
    channel_id: int = 0,
) -> Spectrogram:
    """STFT of a single channel."""
    _validate_geometry(fft_size, hop_size)
    win = make_window(window, fft_size)
    _cola_constant(win, hop_size)

    x = np.asarray(samples, dtype=np.float64)
    length = len(x)
    pad_left = fft_size - hop_size
    num_frames = max(1, -(-(length + pad_left) // hop_size))
    needed = (num_frames - 1) * hop_size + fft_size
    padded = np.zeros(needed)
    padded[pad_left:pad_left + length] = x

    offsets = np.arange(num_frames) * hop_size
    segments = padded[offsets[:, np.newaxis] + np.arange(fft_size)]
    frames = np.fft.rfft(segments * win, axis=1)
    return Spectrogram(frames, fft_size, hop_size, window, sample_rate, length, channel_id)


def stft(
    buffer: AudioBuffer,
    fft_size: int = DEFAULT_FFT_SIZE,
    hop_size: int = DEFAULT_HOP_SIZE,
    window: str = DEFAULT_WINDOW,
) -> list[Spectrogram]:
    """STFT of every channel, one Spectrogram per channel."""
    return [
        stft_mono(buffer.channel(c), buffer.sample_rate, fft_size, hop_size, window, channel_id=c)
        for c in range(buffer.num_channels)
    ]


def istft(spec: Spectrogram) -> AudioBuffer:
    """Weighted overlap-add resynthesis back to a mono buffer."""
    expected_bins = spec.fft_size // 2 + 1
    if spec.frames.ndim != 2 or spec.frames.shape[1] != expected_bins:
        raise ValueError(
            f"inconsistent frames: expected (*, {expected_bins}), got {spec.frames.shape}"
        )
    win = make_window(spec.window, spec.fft_size)
    cola = _cola_constant(win, spec.hop_size)

    pad_left = spec.fft_size - spec.hop_size
    needed = (spec.num_frames - 1) * spec.hop_size + spec.fft_size
    out = np.zeros(needed)
    segments = np.fft.irfft(spec.frames, n=spec.fft_size, axis=1) * win
    for k in range(spec.num_frames):
        start = k * spec.hop_size
        out[start:start + spec.fft_size] += segments[k]
    out /= cola
    return AudioBuffer(spec.sample_rate, out[pad_left:pad_left + spec.num_samples])
