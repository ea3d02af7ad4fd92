"""RIFF/WAVE reading and writing for 16/24-bit PCM and float32.

Integer samples map symmetrically: value / 2^(bits-1), so 16-bit -32768
reads as -1.0 exactly and 24-bit uses the 2^23 divisor. On write, samples
outside [-1, 1] are clipped to full scale and counted; +1.0 itself clips
to the largest positive code.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ChannelCountError, UnsupportedWavError, WavFormatError
from .buffer import AudioBuffer

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE

# accepted bit_depth arguments for write_wav
BIT_DEPTHS = (16, 24, "32f")


def read_wav(path) -> AudioBuffer:
    """Read a PCM or float32 WAV file into a normalized AudioBuffer.

    Raises WavFormatError for malformed containers, UnsupportedWavError for
    codecs/bit depths outside {16, 24, 32 int, float32} and
    ChannelCountError for more than two channels.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavFormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _FORMAT_EXTENSIBLE:
                if chunk_size < 40:
                    raise WavFormatError(f"{path}: truncated WAVE_FORMAT_EXTENSIBLE chunk")
                (sub_format,) = struct.unpack_from("<H", body, 24)
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data":
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise WavFormatError(f"{path}: missing fmt or data chunk")

    format_tag, channels, sample_rate, _, block_align, bits = fmt
    if channels < 1:
        raise WavFormatError(f"{path}: zero channels")
    if channels > 2:
        raise ChannelCountError(f"{path}: {channels} channels, only mono/stereo supported")
    if block_align != channels * (bits // 8):
        raise WavFormatError(f"{path}: block alignment inconsistent with bit depth")

    usable = (len(payload) // block_align) * block_align
    raw = payload[:usable]

    if format_tag == _FORMAT_PCM and bits == 16:
        flat = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 2.0 ** 15
    elif format_tag == _FORMAT_PCM and bits == 24:
        as_bytes = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3)
        ints = (
            as_bytes[:, 0].astype(np.int32)
            | (as_bytes[:, 1].astype(np.int32) << 8)
            | (as_bytes[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 2 ** 23, ints - 2 ** 24, ints)
        flat = ints.astype(np.float64) / 2.0 ** 23
    elif format_tag == _FORMAT_PCM and bits == 32:
        flat = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2.0 ** 31
    elif format_tag == _FORMAT_FLOAT and bits == 32:
        flat = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedWavError(f"{path}: format tag {format_tag} / {bits} bit not supported")

    samples = flat.reshape(-1, channels).T
    return AudioBuffer(int(sample_rate), samples)


def write_wav(buffer: AudioBuffer, path, bit_depth=24) -> int:
    """Write a buffer as WAV, returning the number of clipped samples.

    bit_depth is 16, 24 or "32f". NaN samples raise instead of being
    silently written; values outside [-1, 1] clip to full scale.
    """
    if bit_depth not in BIT_DEPTHS:
        raise ValueError(f"bit_depth must be one of {BIT_DEPTHS}, got {bit_depth!r}")
    if buffer.num_frames == 0:
        raise ValueError("refusing to write an empty buffer")
    if np.isnan(buffer.samples).any():
        raise ValueError("buffer contains NaN samples")

    interleaved = buffer.samples.T.reshape(-1)

    if bit_depth == "32f":
        clipped = int(np.count_nonzero(np.abs(interleaved) > 1.0))
        out = np.clip(interleaved, -1.0, 1.0).astype("<f4")
        body = out.tobytes()
        format_tag, bits = _FORMAT_FLOAT, 32
    else:
        scale = 2.0 ** (bit_depth - 1)
        lo, hi = -int(scale), int(scale) - 1
        codes = np.rint(interleaved * scale)
        clipped = int(np.count_nonzero((codes < lo) | (codes > hi)))
        codes = np.clip(codes, lo, hi).astype(np.int32)
        if bit_depth == 16:
            body = codes.astype("<i2").tobytes()
        else:
            u = codes.astype(np.uint32) & 0xFFFFFF
            as_bytes = np.empty((len(u), 3), dtype=np.uint8)
            as_bytes[:, 0] = u & 0xFF
            as_bytes[:, 1] = (u >> 8) & 0xFF
            as_bytes[:, 2] = (u >> 16) & 0xFF
            body = as_bytes.tobytes()
        format_tag, bits = _FORMAT_PCM, bit_depth

    channels = buffer.num_channels
    block_align = channels * (bits // 8)
    byte_rate = buffer.sample_rate * block_align
    fmt_chunk = struct.pack(
        "<HHIIHH", format_tag, channels, buffer.sample_rate, byte_rate, block_align, bits
    )
    pad = b"\x00" if len(body) % 2 else b""
    riff_size = 4 + (8 + len(fmt_chunk)) + (8 + len(body) + len(pad))
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", riff_size) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk)
        fh.write(b"data" + struct.pack("<I", len(body)) + body + pad)
    return clipped
