"""Multichannel PCM sample buffers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AudioBuffer:
    """Linear PCM audio held as float64 in [-1, 1], one row per channel.

    ``samples`` has shape (channels, frames). All channels share the same
    length by construction; the canonical dataset rate is 48 kHz but any
    positive rate is accepted for processing.
    """

    sample_rate: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :]
        if arr.ndim != 2:
            raise ValueError(f"samples must be 1-D or (channels, frames), got ndim={arr.ndim}")
        if arr.shape[0] == 0:
            raise ValueError("buffer needs at least one channel")
        self.samples = arr

    @property
    def num_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_frames(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.num_frames / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        """View of one channel's samples."""
        return self.samples[index]

    def mono_channel(self, index: int) -> "AudioBuffer":
        """Single channel as a new 1-channel buffer (copies)."""
        return AudioBuffer(self.sample_rate, self.samples[index].copy())

    def copy(self) -> "AudioBuffer":
        return AudioBuffer(self.sample_rate, self.samples.copy())

    @classmethod
    def from_mono(cls, samples: np.ndarray, sample_rate: int) -> "AudioBuffer":
        return cls(sample_rate, np.asarray(samples, dtype=np.float64)[np.newaxis, :].copy())

    @classmethod
    def from_stereo(cls, left: np.ndarray, right: np.ndarray, sample_rate: int) -> "AudioBuffer":
        left = np.asarray(left, dtype=np.float64)
        right = np.asarray(right, dtype=np.float64)
        if left.shape != right.shape:
            raise ValueError("left/right length mismatch")
        return cls(sample_rate, np.stack([left, right]))

    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.square(self.samples))))
