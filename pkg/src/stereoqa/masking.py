"""Masked-threshold estimation and noise-to-mask ratio measurement.

The model is deliberately plain: bin intensities are integrated on a
Bark-approximate critical-band partition, spread with a two-sided
triangular function (default 25 dB/Bark below a masker, 10 dB/Bark above,
row-normalized so a flat spectrum maps onto itself), lowered by a fixed
noise-masking offset, and floored by an absolute-threshold-in-quiet curve.
Tonality detection is intentionally omitted; every constant lives in
MaskingConfig.

Intensity convention: a full-scale sine has bin intensity 1.0
(``4 |X|^2 / (sum w)^2``), i.e. 0 dBFS. The quiet curve keeps its standard
shape but is placed very low (``quiet_offset_db``) so that the noise
injected for silent input stays below -90 dBFS; the curve's only job here
is to keep thresholds strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio.stft import Spectrogram, make_window

# Zwicker & Fastl critical band edges (Hz); the region above 15.5 kHz is a
# single band up to Nyquist.
CRITICAL_BAND_EDGES_HZ = (
    0.0, 100.0, 200.0, 300.0, 400.0, 510.0, 630.0, 770.0, 920.0, 1080.0,
    1270.0, 1480.0, 1720.0, 2000.0, 2320.0, 2700.0, 3150.0, 3700.0, 4400.0,
    5300.0, 6400.0, 7700.0, 9500.0, 12000.0, 15500.0,
)


@dataclass(frozen=True)
class MaskingConfig:
    """Constants of the masking model and the NMR aggregation."""

    spread_lower_db_per_bark: float = 25.0   # slope below the masker
    spread_upper_db_per_bark: float = 10.0   # slope above the masker
    masking_offset_db: float = 15.5          # noise-masking-noise offset
    quiet_cap_spl_db: float = 45.0           # cap on the ISO curve before placement
    quiet_offset_db: float = 170.0           # shifts the quiet curve below full scale
    activity_floor_db: float = -70.0         # frames quieter than this are ignored
    nmr_floor_db: float = -120.0             # sentinel for zero noise


DEFAULT_MASKING = MaskingConfig()


def bark_scale(freq_hz: np.ndarray) -> np.ndarray:
    f = np.asarray(freq_hz, dtype=np.float64)
    return 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)


def quiet_threshold_spl(freq_hz: np.ndarray) -> np.ndarray:
    """Absolute threshold in quiet (dB SPL), ISO-style approximation."""
    f_khz = np.maximum(np.asarray(freq_hz, dtype=np.float64), 20.0) / 1000.0
    return (
        3.64 * f_khz ** -0.8
        - 6.5 * np.exp(-0.6 * (f_khz - 3.3) ** 2)
        + 1e-3 * f_khz ** 4
    )


@dataclass
class CriticalBandPartition:
    """Mapping from FFT bins to contiguous Bark-approximate bands."""

    sample_rate: int
    fft_size: int
    band_edges_hz: np.ndarray            # (num_bands + 1,), 0 .. Nyquist
    bin_to_band: np.ndarray = field(repr=False)  # (num_bins,)

    def __post_init__(self):
        diffs = np.diff(self.bin_to_band)
        if (diffs < 0).any() or (diffs > 1).any():
            raise ValueError("bin_to_band must assign contiguous, ordered bands")
        counts = np.bincount(self.bin_to_band, minlength=self.num_bands)
        if (counts == 0).any():
            raise ValueError("every band must contain at least one bin")

    @property
    def num_bands(self) -> int:
        return len(self.band_edges_hz) - 1

    @property
    def num_bins(self) -> int:
        return len(self.bin_to_band)

    @property
    def band_starts(self) -> np.ndarray:
        """First bin index of each band (for reduceat)."""
        return np.searchsorted(self.bin_to_band, np.arange(self.num_bands))

    @property
    def band_counts(self) -> np.ndarray:
        return np.bincount(self.bin_to_band, minlength=self.num_bands)

    def band_centers_hz(self) -> np.ndarray:
        return 0.5 * (self.band_edges_hz[:-1] + self.band_edges_hz[1:])

    @classmethod
    def from_geometry(
        cls,
        sample_rate: int,
        fft_size: int,
        edges_hz=CRITICAL_BAND_EDGES_HZ,
    ) -> "CriticalBandPartition":
        nyquist = sample_rate / 2.0
        edges = [e for e in edges_hz if e < nyquist]
        edges.append(nyquist)
        edges = np.asarray(edges, dtype=np.float64)

        bin_freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size
        raw = np.clip(np.searchsorted(edges, bin_freqs, side="right") - 1, 0, len(edges) - 2)

        # Bands too narrow for the FFT resolution get absorbed into the next
        # occupied one so that every band keeps >= 1 bin.
        occupied = np.unique(raw)
        remap = {old: new for new, old in enumerate(occupied)}
        bin_to_band = np.array([remap[b] for b in raw], dtype=np.int64)
        merged_edges = np.concatenate([[0.0], edges[occupied + 1]])
        merged_edges[-1] = nyquist
        return cls(sample_rate, fft_size, merged_edges, bin_to_band)


@dataclass
class MaskingThreshold:
    """Per-frame, per-band masked threshold and companion signal energy."""

    threshold: np.ndarray = field(repr=False)     # (frames, bands) linear intensity
    band_energy: np.ndarray = field(repr=False)   # (frames, bands) linear intensity
    partition: CriticalBandPartition = field(repr=False)
    hop_size: int = 0
    config: MaskingConfig = DEFAULT_MASKING

    @property
    def num_frames(self) -> int:
        return self.threshold.shape[0]

    @property
    def num_bands(self) -> int:
        return self.threshold.shape[1]


def bin_intensity(spec: Spectrogram) -> np.ndarray:
    """|X|^2 scaled so a full-scale sine reads 1.0 at its bin."""
    window_sum = make_window(spec.window, spec.fft_size).sum()
    return 4.0 * np.abs(spec.frames) ** 2 / window_sum ** 2


def band_energies(intensity: np.ndarray, partition: CriticalBandPartition) -> np.ndarray:
    return np.add.reduceat(intensity, partition.band_starts, axis=1)


def spreading_matrix(partition: CriticalBandPartition, config: MaskingConfig) -> np.ndarray:
    """Row-normalized masker->maskee weights on the Bark axis.

    Entry [i, j] weights band j's energy in band i's threshold; rows sum to
    one so a spectrally flat excitation spreads onto itself.
    """
    z = bark_scale(partition.band_centers_hz())
    dz = z[:, np.newaxis] - z[np.newaxis, :]  # maskee minus masker
    slope = np.where(dz < 0, config.spread_lower_db_per_bark, config.spread_upper_db_per_bark)
    gains = 10.0 ** (-slope * np.abs(dz) / 10.0)
    return gains / gains.sum(axis=1, keepdims=True)


def quiet_floor(partition: CriticalBandPartition, config: MaskingConfig) -> np.ndarray:
    """Per-band absolute floor, min of the (capped) quiet curve over the band's bins."""
    bin_freqs = np.arange(partition.num_bins) * partition.sample_rate / partition.fft_size
    spl = np.minimum(quiet_threshold_spl(bin_freqs), config.quiet_cap_spl_db)
    per_bin = 10.0 ** ((spl - config.quiet_offset_db) / 10.0)
    return np.minimum.reduceat(per_bin, partition.band_starts)


def masking_threshold(
    spec: Spectrogram,
    partition: CriticalBandPartition | None = None,
    config: MaskingConfig = DEFAULT_MASKING,
) -> MaskingThreshold:
    """Frame-by-frame masked threshold of one channel."""
    if partition is None:
        partition = CriticalBandPartition.from_geometry(spec.sample_rate, spec.fft_size)
    if partition.num_bins != spec.num_bins or partition.sample_rate != spec.sample_rate:
        raise ValueError("partition geometry does not match the spectrogram")

    energy = band_energies(bin_intensity(spec), partition)
    spread = energy @ spreading_matrix(partition, config).T
    masked = spread * 10.0 ** (-config.masking_offset_db / 10.0)
    threshold = np.maximum(masked, quiet_floor(partition, config)[np.newaxis, :])
    return MaskingThreshold(threshold, energy, partition, spec.hop_size, config)


@dataclass
class NmrResult:
    """Per-cell NMR plus its activity-gated aggregate."""

    per_cell_db: np.ndarray = field(repr=False)   # (frames, bands)
    mean_db: float = 0.0
    active_frames: np.ndarray = field(default=None, repr=False)  # (frames,) bool
    noise_energy: np.ndarray = field(default=None, repr=False)
    threshold: MaskingThreshold = field(default=None, repr=False)


def measure_nmr(
    reference: Spectrogram,
    degraded: Spectrogram,
    partition: CriticalBandPartition | None = None,
    config: MaskingConfig = DEFAULT_MASKING,
) -> NmrResult:
    """NMR of (degraded - reference) against the reference's masked threshold.

    The aggregate is the ratio of total noise energy to total threshold
    energy over frames whose reference level clears the activity floor;
    zero noise reports the sentinel floor instead of -inf.
    """
    if not reference.geometry_matches(degraded):
        raise ValueError("reference/degraded spectrogram geometry mismatch")
    if partition is None:
        partition = CriticalBandPartition.from_geometry(reference.sample_rate, reference.fft_size)

    thr = masking_threshold(reference, partition, config)
    window_sum = make_window(reference.window, reference.fft_size).sum()
    noise_bins = 4.0 * np.abs(degraded.frames - reference.frames) ** 2 / window_sum ** 2
    noise = band_energies(noise_bins, partition)

    floor_lin = 10.0 ** (config.nmr_floor_db / 10.0)
    per_cell_db = 10.0 * np.log10(np.maximum(noise / thr.threshold, floor_lin))

    frame_level = thr.band_energy.sum(axis=1)
    active = frame_level >= 10.0 ** (config.activity_floor_db / 10.0)
    if active.any():
        ratio = noise[active].sum() / thr.threshold[active].sum()
        mean_db = 10.0 * np.log10(max(ratio, floor_lin))
    else:
        mean_db = config.nmr_floor_db
    return NmrResult(per_cell_db, float(mean_db), active, noise, thr)


def export_threshold_matrix(thr: MaskingThreshold, path) -> None:
    """Write frames x bands threshold levels as tab-separated dB text.

    Header lines (prefixed #) carry the geometry; each following line is one
    frame, one column per band, in dB re full-scale sine.
    """
    part = thr.partition
    db = 10.0 * np.log10(np.maximum(thr.threshold, 1e-30))
    edges = ",".join(f"{e:g}" for e in part.band_edges_hz)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# masked threshold matrix, dB re full-scale sine\n")
        fh.write(
            f"# sample_rate={part.sample_rate} fft_size={part.fft_size} "
            f"hop_size={thr.hop_size} frames={thr.num_frames} bands={thr.num_bands}\n"
        )
        fh.write(f"# band_edges_hz={edges}\n")
        for row in db:
            fh.write("\t".join(f"{v:.3f}" for v in row) + "\n")
