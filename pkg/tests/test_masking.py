import numpy as np
import pytest

from stereoqa.audio import make_window, stft_mono
from stereoqa.masking import (
    DEFAULT_MASKING,
    CriticalBandPartition,
    MaskingConfig,
    export_threshold_matrix,
    masking_threshold,
    measure_nmr,
    quiet_floor,
)

from conftest import FS, noisy_item_fast, tonal_item


@pytest.mark.parametrize("fft_size", [256, 512, 2048, 4096])
@pytest.mark.parametrize("sample_rate", [32000, 44100, 48000])
def test_partition_covers_spectrum_with_nonempty_bands(sample_rate, fft_size):
    part = CriticalBandPartition.from_geometry(sample_rate, fft_size)
    edges = part.band_edges_hz
    assert edges[0] == 0.0
    assert edges[-1] == sample_rate / 2.0
    assert np.all(np.diff(edges) > 0)
    counts = part.band_counts
    assert counts.min() >= 1
    assert counts.sum() == fft_size // 2 + 1
    # bands are contiguous runs over the bin axis
    assert np.all(np.isin(np.diff(part.bin_to_band), (0, 1)))


def test_silence_thresholds_equal_quiet_floor():
    spec = stft_mono(np.zeros(FS // 2), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    thr = masking_threshold(spec, part)
    floor = quiet_floor(part, DEFAULT_MASKING)
    np.testing.assert_array_equal(thr.threshold, np.tile(floor, (spec.num_frames, 1)))


def test_white_noise_threshold_sits_at_offset_below_band_energy():
    rng = np.random.default_rng(0)
    spec = stft_mono(rng.uniform(-1.0, 1.0, FS), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    thr = masking_threshold(spec, part)

    # independent band energies straight from the frames
    win_sum = make_window(spec.window, spec.fft_size).sum()
    intensity = 4.0 * np.abs(spec.frames) ** 2 / win_sum ** 2
    energy = np.add.reduceat(intensity, part.band_starts, axis=1)

    ratio_db = 10.0 * np.log10(thr.threshold.mean(axis=0) / energy.mean(axis=0))
    np.testing.assert_allclose(ratio_db, -DEFAULT_MASKING.masking_offset_db, atol=1.0)


def test_threshold_scales_with_signal_above_floor():
    x = noisy_item_fast()
    part = CriticalBandPartition.from_geometry(FS, 2048)
    base = masking_threshold(stft_mono(x, FS), part)
    louder = masking_threshold(stft_mono(2.0 * x, FS), part)

    floor = quiet_floor(part, DEFAULT_MASKING)
    active = base.threshold > 10.0 * floor[np.newaxis, :]
    gain_db = 10.0 * np.log10(louder.threshold[active] / base.threshold[active])
    np.testing.assert_allclose(gain_db, 20.0 * np.log10(2.0), atol=1e-6)


def test_more_masker_energy_never_lowers_own_band_threshold():
    spec = stft_mono(tonal_item(0.5), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    base = masking_threshold(spec, part).threshold
    for band in range(0, part.num_bands, 5):
        boosted = spec.copy()
        boosted.frames[:, part.bin_to_band == band] *= 4.0
        result = masking_threshold(boosted, part).threshold
        assert np.all(result[:, band] >= base[:, band] - 1e-30)


def test_thresholds_finite_and_floored():
    rng = np.random.default_rng(9)
    spec = stft_mono(rng.uniform(-1, 1, 24000), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    thr = masking_threshold(spec, part)
    assert np.all(np.isfinite(thr.threshold))
    assert np.all(thr.threshold >= quiet_floor(part, DEFAULT_MASKING)[np.newaxis, :] - 1e-300)
    assert np.all(thr.threshold > 0)


def test_geometry_mismatch_rejected():
    spec = stft_mono(np.zeros(4096), FS)
    wrong = CriticalBandPartition.from_geometry(FS, 1024)
    with pytest.raises(ValueError, match="geometry"):
        masking_threshold(spec, wrong)
    other = stft_mono(np.zeros(8000), FS)
    with pytest.raises(ValueError, match="geometry"):
        measure_nmr(spec, other)


def test_config_constants_are_adjustable():
    spec = stft_mono(noisy_item_fast(0.3), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    lo = masking_threshold(spec, part, MaskingConfig(masking_offset_db=25.0))
    hi = masking_threshold(spec, part, MaskingConfig(masking_offset_db=5.0))
    assert np.all(hi.threshold >= lo.threshold)


def test_threshold_matrix_export_roundtrips(tmp_path):
    spec = stft_mono(tonal_item(0.25), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    thr = masking_threshold(spec, part)
    path = tmp_path / "thresholds.txt"
    export_threshold_matrix(thr, path)

    lines = path.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    data = [l for l in lines if not l.startswith("#")]
    assert any("band_edges_hz" in l for l in header)
    parsed = np.array([[float(v) for v in line.split("\t")] for line in data])
    assert parsed.shape == (thr.num_frames, thr.num_bands)
    np.testing.assert_allclose(parsed, 10.0 * np.log10(thr.threshold), atol=5e-3)
