"""Quantization-noise and spectral-hole impairments at the five quality levels.

QN adds random noise shaped to sit a fixed number of dB above the masked
threshold in every critical band and frame. Because the noise is synthesized
frame-wise and overlap-added, a fraction of each frame's energy lands in its
neighbors; the per-frame targets are therefore deconvolved through the known
frame-coupling weights (a short symmetric tridiagonal system) before the
spectra are drawn, which keeps the re-measured NMR within a fraction of a dB
of the target even for transient material.

SH zeroes whole critical bands: one Bernoulli decision per band per frame,
which is the granularity at which coarse quantization kills scalefactor
bands and what produces the characteristic birdies.
"""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .audio.buffer import AudioBuffer
from .audio.midside import MS_GAIN_DEFAULT, ms_forward, ms_inverse
from .audio.anchors import lowpass_anchor, mono_anchor
from .audio.stft import (
    DEFAULT_FFT_SIZE,
    DEFAULT_HOP_SIZE,
    DEFAULT_WINDOW,
    Spectrogram,
    istft,
    make_window,
    stft_mono,
    _cola_constant,
)
from .audio.wavio import write_wav
from .masking import (
    DEFAULT_MASKING,
    CriticalBandPartition,
    MaskingConfig,
    masking_threshold,
)

ARTIFACT_KINDS = ("QN", "SH")
QUALITY_LEVELS = ("Q1", "Q2", "Q3", "Q4", "Q5")
STEREO_MODES = ("LR", "MS")

# Quality-level parameter grids: NMR targets in dB for QN, hole
# probabilities for SH.
QN_NMR_DB = {"Q1": 0.0, "Q2": 6.0, "Q3": 12.0, "Q4": 18.0, "Q5": 24.0}
SH_HOLE_PROB = {"Q1": 0.70, "Q2": 0.50, "Q3": 0.30, "Q4": 0.20, "Q5": 0.10}

# sub-seed roles so L/R (and M/S) get decorrelated but reproducible streams
_ROLE_CODES = {"L": 0, "R": 1, "M": 2, "S": 3, "mono": 4}


@dataclass(frozen=True)
class ArtifactSpec:
    """One impairment: kind, quality level and the RNG seed that renders it."""

    kind: str
    quality: str
    rng_seed: int

    def __post_init__(self):
        if self.kind not in ARTIFACT_KINDS:
            raise ValueError(f"kind must be one of {ARTIFACT_KINDS}, got {self.kind!r}")
        if self.quality not in QUALITY_LEVELS:
            raise ValueError(f"quality must be one of {QUALITY_LEVELS}, got {self.quality!r}")

    @property
    def parameter(self) -> float:
        return QN_NMR_DB[self.quality] if self.kind == "QN" else SH_HOLE_PROB[self.quality]


@dataclass(frozen=True)
class EngineSettings:
    """Transform and model parameters shared by all artifact operations."""

    fft_size: int = DEFAULT_FFT_SIZE
    hop_size: int = DEFAULT_HOP_SIZE
    window: str = DEFAULT_WINDOW
    ms_gain: float = MS_GAIN_DEFAULT
    masking: MaskingConfig = DEFAULT_MASKING


DEFAULT_ENGINE = EngineSettings()


def channel_seed(seed: int, role: str) -> np.random.SeedSequence:
    """Decorrelated per-channel seed, stable across runs and platforms."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(_ROLE_CODES[role],))


def _noise_gain_terms(window: np.ndarray, hop: int):
    """(gamma, rho): total synth->analysis energy gain and per-lag shares."""
    n = len(window)
    cola = _cola_constant(window, hop)
    w2 = window * window
    lags = []
    lag = 0
    while lag * hop < n:
        overlap = (w2 * w2).sum() if lag == 0 else (w2[lag * hop:] * w2[:-lag * hop]).sum()
        lags.append(overlap / (cola * cola * n))
        lag += 1
    lags = np.array(lags)
    gamma = lags[0] + 2.0 * lags[1:].sum()
    return gamma, lags / gamma


def _deconvolve_frame_targets(targets: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Solve for per-frame energies whose overlap-added mix hits `targets`.

    Only adjacent-frame coupling is solved for (lags beyond 1 are zero for
    the supported 50%-overlap windows and negligible otherwise). Negative
    solutions mean a quiet frame cannot absorb its neighbors' leakage; they
    clamp to zero.
    """
    frames = targets.shape[0]
    if frames == 1 or len(rho) < 2 or rho[1] == 0.0:
        return targets / rho[0]
    banded = np.zeros((3, frames))
    banded[0, 1:] = rho[1]
    banded[1, :] = rho[0]
    banded[2, :-1] = rho[1]
    solved = solve_banded((1, 1), banded, targets)
    return np.maximum(solved, 0.0)


def apply_qn_mono(
    channel: AudioBuffer,
    nmr_db: float,
    seed,
    settings: EngineSettings = DEFAULT_ENGINE,
) -> AudioBuffer:
    """Add masked-threshold-shaped noise at `nmr_db` above threshold."""
    if channel.num_channels != 1:
        raise ValueError("apply_qn_mono expects a mono buffer")
    if not np.isfinite(nmr_db):
        raise ValueError(f"nmr_db must be finite, got {nmr_db}")

    spec = stft_mono(
        channel.channel(0), channel.sample_rate,
        settings.fft_size, settings.hop_size, settings.window,
    )
    partition = CriticalBandPartition.from_geometry(channel.sample_rate, settings.fft_size)
    thresholds = masking_threshold(spec, partition, settings.masking)

    window = make_window(settings.window, settings.fft_size)
    gamma, rho = _noise_gain_terms(window, settings.hop_size)
    targets = thresholds.threshold * 10.0 ** (nmr_db / 10.0)
    per_frame = _deconvolve_frame_targets(targets, rho)

    # band intensity -> per-bin |X|^2 variance, undoing the analysis scaling
    window_sum = window.sum()
    counts = partition.band_counts
    sigma2 = (per_frame / counts[np.newaxis, :]) * window_sum ** 2 / (4.0 * gamma)
    sigma2 = sigma2[:, partition.bin_to_band]

    rng = np.random.default_rng(seed)
    shape = sigma2.shape
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    frames = np.sqrt(sigma2 / 2.0) * (re + 1j * im)
    frames[:, 0] = np.sqrt(sigma2[:, 0]) * re[:, 0]     # DC and Nyquist bins are real
    frames[:, -1] = np.sqrt(sigma2[:, -1]) * re[:, -1]

    noise_spec = Spectrogram(
        frames, settings.fft_size, settings.hop_size, settings.window,
        channel.sample_rate, channel.num_frames,
    )
    noise = istft(noise_spec)
    return AudioBuffer(channel.sample_rate, channel.channel(0) + noise.channel(0))


def apply_sh_mono(
    channel: AudioBuffer,
    hole_prob: float,
    seed,
    settings: EngineSettings = DEFAULT_ENGINE,
    return_mask: bool = False,
):
    """Zero whole critical bands with independent probability `hole_prob`."""
    if channel.num_channels != 1:
        raise ValueError("apply_sh_mono expects a mono buffer")
    if not 0.0 <= hole_prob <= 1.0:
        raise ValueError(f"hole_prob must be within [0, 1], got {hole_prob}")

    spec = stft_mono(
        channel.channel(0), channel.sample_rate,
        settings.fft_size, settings.hop_size, settings.window,
    )
    partition = CriticalBandPartition.from_geometry(channel.sample_rate, settings.fft_size)
    rng = np.random.default_rng(seed)
    mask = rng.random((spec.num_frames, partition.num_bands)) < hole_prob
    spec.frames[mask[:, partition.bin_to_band]] = 0.0
    out = istft(spec)
    if return_mask:
        return out, mask
    return out


def _apply_kind_mono(channel, spec: ArtifactSpec, role: str, settings) -> AudioBuffer:
    seed = channel_seed(spec.rng_seed, role)
    if spec.kind == "QN":
        return apply_qn_mono(channel, spec.parameter, seed, settings)
    return apply_sh_mono(channel, spec.parameter, seed, settings)


def process_stereo(
    stereo: AudioBuffer,
    spec: ArtifactSpec,
    mode: str,
    settings: EngineSettings = DEFAULT_ENGINE,
) -> AudioBuffer:
    """Run one artifact through the LR or MS processing chain."""
    if stereo.num_channels != 2:
        raise ValueError(f"process_stereo expects stereo input, got {stereo.num_channels} channel")
    if mode not in STEREO_MODES:
        raise ValueError(f"mode must be one of {STEREO_MODES}, got {mode!r}")

    if mode == "LR":
        left = _apply_kind_mono(stereo.mono_channel(0), spec, "L", settings)
        right = _apply_kind_mono(stereo.mono_channel(1), spec, "R", settings)
        return AudioBuffer.from_stereo(left.channel(0), right.channel(0), stereo.sample_rate)

    pair = ms_forward(stereo, settings.ms_gain)
    mid = _apply_kind_mono(pair.mid, spec, "M", settings)
    side = _apply_kind_mono(pair.side, spec, "S", settings)
    return ms_inverse(replace(pair, mid=mid, side=side))


def condition_label(kind: str, quality: str, mode: str) -> str:
    """e.g. QN6_LR, SH30_MS; SH parameters shown as percentages."""
    if kind == "QN":
        return f"QN{int(QN_NMR_DB[quality])}_{mode}"
    return f"SH{int(round(SH_HOLE_PROB[quality] * 100))}_{mode}"


def condition_filename(item: str, kind: str, quality: str, mode: str) -> str:
    if kind == "QN":
        return f"{item}__QN{int(QN_NMR_DB[quality])}__{mode}.wav"
    return f"{item}__SH{int(round(SH_HOLE_PROB[quality] * 100))}__{mode}.wav"


def condition_seed(master_seed: int, item: str, kind: str, quality: str, mode: str) -> int:
    """64-bit seed bound to the condition identity, not execution order."""
    key = (
        zlib.crc32(item.encode("utf-8")),
        ARTIFACT_KINDS.index(kind),
        QUALITY_LEVELS.index(quality),
        STEREO_MODES.index(mode),
    )
    state = np.random.SeedSequence(entropy=master_seed, spawn_key=key).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def render_condition_set(
    item: AudioBuffer,
    item_name: str,
    kinds,
    modes,
    qualities,
    seed: int,
    out_dir,
    settings: EngineSettings = DEFAULT_ENGINE,
    include_anchors: bool = True,
    lowpass_cutoffs=(3500.0, 7000.0),
    bit_depth=24,
) -> list[dict]:
    """Render every (kind, mode, quality) plus anchors and the reference.

    Returns manifest rows; each carries the exact seed used and the sha256
    of the written file so reruns can be verified hash-for-hash.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []

    def emit(filename, buffer, **fields):
        path = out_dir / filename
        try:
            write_wav(buffer, path, bit_depth)
        except OSError as exc:
            raise OSError(f"failed writing condition {filename}: {exc}") from exc
        row = {"item": item_name, "file": filename, "sha256": _sha256(path)}
        row.update(fields)
        rows.append(row)

    for kind in sorted(kinds):
        for mode in sorted(modes):
            for quality in sorted(qualities):
                cseed = condition_seed(seed, item_name, kind, quality, mode)
                spec = ArtifactSpec(kind, quality, cseed)
                rendered = process_stereo(item, spec, mode, settings)
                emit(
                    condition_filename(item_name, kind, quality, mode),
                    rendered,
                    kind=kind, quality=quality, parameter=spec.parameter,
                    mode=mode, seed=cseed,
                )

    if include_anchors:
        for cutoff in lowpass_cutoffs:
            emit(
                f"{item_name}__LP{int(cutoff)}.wav",
                lowpass_anchor(item, cutoff),
                kind="LP", quality=None, parameter=float(cutoff), mode=None, seed=None,
            )
        emit(
            f"{item_name}__MONO.wav", mono_anchor(item),
            kind="MONO", quality=None, parameter=None, mode=None, seed=None,
        )
        emit(
            f"{item_name}__REF.wav", item,
            kind="REF", quality=None, parameter=None, mode=None, seed=None,
        )
    return rows


def write_manifest(rows: list[dict], path) -> None:
    """Line-oriented manifest: one JSON record per rendered file."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def load_manifest(path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
