"""Mid-side matrixing for stereo buffers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .buffer import AudioBuffer

# Energy-preserving normalization: |L|^2 + |R|^2 == |M|^2 + |S|^2.
MS_GAIN_DEFAULT = 1.0 / math.sqrt(2.0)


@dataclass
class MidSidePair:
    mid: AudioBuffer
    side: AudioBuffer
    normalization: float

    def __post_init__(self):
        if self.mid.num_channels != 1 or self.side.num_channels != 1:
            raise ValueError("mid and side must be mono buffers")
        if self.mid.sample_rate != self.side.sample_rate:
            raise ValueError("mid/side sample rate mismatch")
        if self.mid.num_frames != self.side.num_frames:
            raise ValueError(
                f"mid/side length mismatch: {self.mid.num_frames} vs {self.side.num_frames}"
            )


def ms_forward(stereo: AudioBuffer, gain: float = MS_GAIN_DEFAULT) -> MidSidePair:
    """mid = (L + R) * gain, side = (L - R) * gain."""
    if stereo.num_channels != 2:
        raise ValueError(f"mid-side transform needs 2 channels, got {stereo.num_channels}")
    left, right = stereo.samples[0], stereo.samples[1]
    mid = AudioBuffer(stereo.sample_rate, (left + right) * gain)
    side = AudioBuffer(stereo.sample_rate, (left - right) * gain)
    return MidSidePair(mid, side, gain)


def ms_inverse(pair: MidSidePair) -> AudioBuffer:
    """Invert ms_forward exactly: L = (M + S)/(2g), R = (M - S)/(2g)."""
    g2 = 2.0 * pair.normalization
    mid, side = pair.mid.samples[0], pair.side.samples[0]
    return AudioBuffer(pair.mid.sample_rate, np.stack([(mid + side) / g2, (mid - side) / g2]))
