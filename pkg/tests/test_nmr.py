import numpy as np
import pytest

from stereoqa.audio import make_window, stft_mono
from stereoqa.masking import (
    DEFAULT_MASKING,
    CriticalBandPartition,
    masking_threshold,
    measure_nmr,
)

from conftest import FS, noisy_item_fast, tonal_item


def _exact_noise_frames(spec, part, thr, offset_db, rng, frame_mask=None, absolute=None):
    """Noise spectrogram whose band energy is exactly threshold + offset_db
    (or an absolute intensity), built directly in the STFT domain so the
    measurement path is exercised without any resynthesis roundtrip."""
    win_sum = make_window(spec.window, spec.fft_size).sum()
    target = thr.threshold * 10.0 ** (offset_db / 10.0) if absolute is None \
        else np.full_like(thr.threshold, absolute)
    per_bin = target / part.band_counts[np.newaxis, :]
    mags = np.sqrt(per_bin[:, part.bin_to_band] * win_sum ** 2 / 4.0)
    phases = rng.uniform(0.0, 2.0 * np.pi, mags.shape)
    noise = mags * np.exp(1j * phases)
    if frame_mask is not None:
        noise[~frame_mask] = 0.0
    out = spec.copy()
    out.frames = spec.frames + noise
    return out


def test_identical_signals_report_sentinel_floor():
    spec = stft_mono(tonal_item(0.5), FS)
    result = measure_nmr(spec, spec.copy())
    assert result.mean_db == DEFAULT_MASKING.nmr_floor_db
    assert np.all(result.per_cell_db == DEFAULT_MASKING.nmr_floor_db)


@pytest.mark.parametrize("offset_db", [0.0, 6.0, 12.0, 18.0, 24.0])
def test_threshold_shaped_noise_measures_at_its_offset(offset_db, rng):
    for make in (tonal_item, noisy_item_fast):
        spec = stft_mono(make(1.0), FS)
        part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
        thr = masking_threshold(spec, part)
        degraded = _exact_noise_frames(spec, part, thr, offset_db, rng)
        result = measure_nmr(spec, degraded, part)
        assert abs(result.mean_db - offset_db) <= 0.5


def test_per_cell_values_match_construction(rng):
    spec = stft_mono(noisy_item_fast(0.5), FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    thr = masking_threshold(spec, part)
    degraded = _exact_noise_frames(spec, part, thr, 12.0, rng)
    result = measure_nmr(spec, degraded, part)
    np.testing.assert_allclose(result.per_cell_db, 12.0, atol=1e-6)


def test_activity_gating_excludes_silent_frames(rng):
    # loud half then digital silence; the silent frames carry noise at an
    # absolute level comparable to the loud thresholds, which would drag
    # the aggregate far up if gating failed
    x = np.concatenate([tonal_item(0.5), np.zeros(FS // 2)])
    spec = stft_mono(x, FS)
    part = CriticalBandPartition.from_geometry(FS, spec.fft_size)
    thr = masking_threshold(spec, part)

    active = thr.band_energy.sum(axis=1) >= 10.0 ** (DEFAULT_MASKING.activity_floor_db / 10.0)
    assert active.any() and (~active).any()

    loud_thr = thr.threshold[active].mean()
    degraded = _exact_noise_frames(spec, part, thr, 12.0, rng)
    silent_noise = _exact_noise_frames(
        spec, part, thr, 0.0, rng, frame_mask=~active, absolute=loud_thr
    )
    degraded.frames[~active] = silent_noise.frames[~active]

    result = measure_nmr(spec, degraded, part)
    np.testing.assert_array_equal(result.active_frames, active)
    assert abs(result.mean_db - 12.0) <= 0.5


def test_all_silent_input_reports_floor():
    spec = stft_mono(np.zeros(FS // 4), FS)
    degraded = spec.copy()
    degraded.frames = degraded.frames + 1e-9
    result = measure_nmr(spec, degraded)
    assert not result.active_frames.any()
    assert result.mean_db == DEFAULT_MASKING.nmr_floor_db
